#!/usr/bin/env python3
"""Write benchmark CSVs into a data directory.

Two sources:

* datasets bundled with the ``rdatasets`` package (``pip install rdatasets``):
  autoMPG, Housing, CPS and Concrete;
* raw UCI / StatLib files the user has already downloaded, converted to the
  comma-separated layouts the manifests expect (``--yacht``, ``--slump``,
  ``--airfoil``, ``--wine-red``, ``--wine-white``, ``--no2``, ``--pm10``).

Nothing is fetched over the network.
"""

import argparse
import csv
import re
from pathlib import Path


def write(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def export_rdatasets(out: Path):
    import rdatasets

    auto = rdatasets.data("ISLR", "Auto")
    cols = ["mpg", "cylinders", "displacement", "horsepower", "weight", "acceleration", "year", "origin", "name"]
    write(out / "auto_mpg.csv", cols, [[fmt(v) for v in row] for row in auto[cols].itertuples(index=False)])

    boston = rdatasets.data("MASS", "Boston")
    cols = ["crim", "zn", "indus", "chas", "nox", "rm", "age", "dis", "rad", "tax", "ptratio", "black", "lstat", "medv"]
    write(out / "housing.csv", cols, [[fmt(v) for v in row] for row in boston[cols].itertuples(index=False)])

    cps = rdatasets.data("AER", "CPS1985")
    cols = ["education", "south", "female", "experience", "union", "age", "married",
            "ethnicity", "occupation", "sector", "wage"]
    rows = []
    for row in cps.itertuples(index=False):
        rows.append([
            row.education, int(row.region == "south"), int(row.gender == "female"), row.experience,
            int(row.union == "yes"), row.age, int(row.married == "yes"),
            row.ethnicity, row.occupation, row.sector, fmt(float(row.wage)),
        ])
    write(out / "cps.csv", cols, rows)

    concrete = rdatasets.data("modeldata", "concrete")
    cols = ["cement", "blast_furnace_slag", "fly_ash", "water", "superplasticizer", "coarse_aggregate",
            "fine_aggregate", "age", "compressive_strength"]
    write(out / "concrete.csv", cols, [[fmt(v) for v in row] for row in concrete[cols].itertuples(index=False)])


def _tokens(path, sep=None, skip_header=False):
    rows = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        lines = fh.read().splitlines()
    if skip_header:
        lines = lines[1:]
    for line in lines:
        line = line.strip()
        if not line:
            continue
        rows.append([t.strip().strip('"') for t in (re.split(r"\s+", line) if sep is None else line.split(sep))])
    return rows


def export_raw(args, out: Path):
    if args.yacht:
        header = ["longitudinal_position", "prismatic_coefficient", "length_displacement_ratio",
                  "beam_draught_ratio", "length_beam_ratio", "froude_number", "residuary_resistance"]
        write(out / "yacht.csv", header, _tokens(args.yacht))
    if args.slump:
        # slump_test.data: No, 7 inputs, SLUMP, FLOW, 28-day compressive strength
        header = ["cement", "slag", "fly_ash", "water", "sp", "coarse_aggr", "fine_aggr",
                  "slump", "flow", "compressive_strength"]
        write(out / "concrete_cs.csv", header, [r[1:] for r in _tokens(args.slump, ",", skip_header=True)])
    if args.airfoil:
        header = ["frequency", "angle_of_attack", "chord_length", "free_stream_velocity",
                  "suction_side_displacement_thickness", "scaled_sound_pressure"]
        write(out / "airfoil.csv", header, _tokens(args.airfoil))
    for attr, name in (("wine_red", "wine_red.csv"), ("wine_white", "wine_white.csv")):
        src = getattr(args, attr)
        if src:
            rows = _tokens(src, ";")
            header = [h.replace(" ", "_") for h in rows[0]]
            write(out / name, header, rows[1:])
    for attr, target in (("no2", "log_no2"), ("pm10", "log_pm10")):
        src = getattr(args, attr)
        if src:
            header = [target, "log_cars_per_hour", "temperature_2m", "wind_speed", "temperature_diff_25_2m",
                      "wind_direction", "hour_of_day", "day_number"]
            write(out / f"{attr}.csv", header, _tokens(src))


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="data", type=Path)
    ap.add_argument("--no-bundled", action="store_true", help="skip the rdatasets exports")
    for flag in ("yacht", "slump", "airfoil", "wine-red", "wine-white", "no2", "pm10"):
        ap.add_argument(f"--{flag}", type=Path, help=f"raw {flag} file")
    args = ap.parse_args()
    if not args.no_bundled:
        export_rdatasets(args.out)
    export_raw(args, args.out)


if __name__ == "__main__":
    main()
