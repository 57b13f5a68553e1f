"""Benchmark protocol: repeated 80/20 splits, every strategy on the same split, RMSE/CC curves.

Results layout under ``output_dir``::

    run_metadata.json                   config and every fixed constant
    results/<dataset>_r<r>.csv          dataset,strategy,rep,seed,M,rmse,cc
    selections/<dataset>_r<r>.csv       dataset,strategy,rep,order
    summary.csv, improvements_r<r>.csv, pvalues_r<r>.csv, ...   (see write_report)
    plot_data/...                        (see write_plot_data)
"""

from __future__ import annotations

import csv
import json
import logging
import time
import warnings
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import clustering, metrics, regression, strategies
from .dataio import DataError, Dataset, find_manifest, load_csv, slugify
from .metrics import AucSummary, Curve, DegenerateCorrelation
from .preprocess import split_train_test, train_fraction_size, zscore_apply, zscore_fit
from .preprocess import prepare_dataset
from .seeding import derive_seed
from .strategies import DEFAULT_COMMITTEE_SIZE, StrategyId, run_strategy, score_R

__all__ = [
    "ConfigError",
    "DatasetUnavailable",
    "PoolTooSmall",
    "ExperimentConfig",
    "RunRecord",
    "Aggregate",
    "load_dataset",
    "run_unit",
    "run_all",
    "load_results",
    "aggregate",
    "pairwise_tests",
    "write_report",
    "write_plot_data",
    "PROPOSED",
    "BASELINES",
    "EXTRA_SAMPLES",
]

log = logging.getLogger(__name__)

EXTRA_SAMPLES = 21  # M runs over d+1 .. d+21
PROPOSED = ("RD-iGS", "RDiGS", "RDiGSr")
BASELINES = ("RD-EMCM", "iGS")
ALL_STRATEGIES = tuple(s.value for s in StrategyId)
RESULT_COLUMNS = ("dataset", "strategy", "rep", "seed", "M", "rmse", "cc")


class ConfigError(ValueError):
    pass


class DatasetUnavailable(DataError):
    pass


class PoolTooSmall(DataError):
    pass


@dataclass
class ExperimentConfig:
    datasets: list[str]
    strategies: list[str] = field(default_factory=lambda: list(ALL_STRATEGIES))
    repetitions: int = 100
    reg_r: list[float] = field(default_factory=lambda: [0.01])
    committee_P: int = DEFAULT_COMMITTEE_SIZE
    base_seed: int = 0
    output_dir: Path = Path("results")
    data_dir: Path = Path("data")
    jobs: int = 1
    emcm_bias_coordinate: bool = False

    def __post_init__(self):
        self.output_dir = Path(self.output_dir)
        self.data_dir = Path(self.data_dir)
        self.validate()

    def validate(self):
        if not self.datasets:
            raise ConfigError("datasets: at least one dataset is required")
        if int(self.repetitions) < 1:
            raise ConfigError(f"repetitions: must be >= 1, got {self.repetitions}")
        if not self.reg_r or any(not r > 0 for r in self.reg_r):
            raise ConfigError(f"reg_r: every value must be > 0, got {self.reg_r}")
        if int(self.committee_P) < 2:
            raise ConfigError(f"committee_P: must be >= 2, got {self.committee_P}")
        if int(self.jobs) < 1:
            raise ConfigError(f"jobs: must be >= 1, got {self.jobs}")
        try:
            self.strategies = [StrategyId.parse(s).value for s in self.strategies]
        except ValueError as exc:
            raise ConfigError(f"strategies: {exc}") from None
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigError("strategies: duplicates")
        self.reg_r = [float(r) for r in self.reg_r]
        self.repetitions = int(self.repetitions)

    def identity(self) -> dict:
        """Fields that determine result values (paths and parallelism excluded)."""
        return {
            "strategies": list(self.strategies),
            "reg_r": list(self.reg_r),
            "committee_P": int(self.committee_P),
            "base_seed": int(self.base_seed),
            "emcm_bias_coordinate": bool(self.emcm_bias_coordinate),
        }


@dataclass
class RunRecord:
    dataset: str
    strategy: str
    rep: int
    r: float
    seed: int
    m_values: np.ndarray
    rmse: np.ndarray
    cc: np.ndarray
    selection_order: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def rmse_curve(self) -> Curve:
        return Curve(self.m_values, self.rmse)

    @property
    def cc_curve(self) -> Curve:
        return Curve(self.m_values, self.cc)


def load_dataset(name: str, data_dir) -> Dataset:
    try:
        manifest = find_manifest(name, data_dir)
    except KeyError as exc:
        raise DatasetUnavailable(str(exc)) from None
    if not manifest.available:
        raise DatasetUnavailable(f"{manifest.name}: no CSV at {manifest.csv_path}")
    raw = load_csv(manifest)
    for note in raw.warnings:
        log.warning(note)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return prepare_dataset(raw)


def rep_seed(base_seed: int, dataset: str, rep: int) -> int:
    return derive_seed(int(base_seed), dataset, int(rep))


def run_unit(dataset: Dataset, rep: int, config: ExperimentConfig) -> list[RunRecord]:
    """All strategies and regularization values for one repetition on one dataset.

    The split and normalization are shared by every strategy (paired design);
    k-means results and pool distance sums are reused across ``r`` values.
    """
    seed = rep_seed(config.base_seed, dataset.name, rep)
    d = dataset.d
    M0, M_max = d + 1, d + EXTRA_SAMPLES
    split = split_train_test(dataset.n_samples, seed)
    if split.train_indices.size < M_max:
        raise PoolTooSmall(
            f"{dataset.name}: pool of {split.train_indices.size} cannot supply {M_max} labels"
        )
    X, y = dataset.features, dataset.labels
    stats = zscore_fit(X[split.train_indices])
    X_pool = zscore_apply(stats, X[split.train_indices])
    y_pool = y[split.train_indices]
    X_test = zscore_apply(stats, X[split.test_indices])
    y_test = y[split.test_indices]

    kmeans_cache: dict = {}
    R = score_R(X_pool) if "RDiGSr" in config.strategies else None
    m_values = np.arange(M0, M_max + 1)
    out = []
    for r in config.reg_r:
        for name in config.strategies:
            t0 = time.perf_counter()
            run = run_strategy(
                name, X_pool, y_pool, M0, M_max, r, derive_seed(seed, name),
                committee_size=config.committee_P, kmeans_cache=kmeans_cache, R=R,
                emcm_bias_coordinate=config.emcm_bias_coordinate,
            )
            rm, cc = np.empty(m_values.size), np.empty(m_values.size)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateCorrelation)
                for j, M in enumerate(m_values):
                    pred = run.models[int(M)].predict(X_test)
                    rm[j] = metrics.rmse(pred, y_test)
                    cc[j] = metrics.pearson_cc(pred, y_test)
            out.append(RunRecord(
                dataset=dataset.name, strategy=name, rep=rep, r=r, seed=seed, m_values=m_values,
                rmse=rm, cc=cc, selection_order=run.selection, wall_time=time.perf_counter() - t0,
            ))
    return out


# -- persistence -------------------------------------------------------------


def _r_tag(r: float) -> str:
    return f"{r:g}"


def results_path(output_dir, dataset: str, r: float) -> Path:
    return Path(output_dir) / "results" / f"{slugify(dataset)}_r{_r_tag(r)}.csv"


def selections_path(output_dir, dataset: str, r: float) -> Path:
    return Path(output_dir) / "selections" / f"{slugify(dataset)}_r{_r_tag(r)}.csv"


def _append_records(output_dir, records: list[RunRecord]):
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.dataset, rec.r)].append(rec)
    for (ds, r), recs in groups.items():
        path = results_path(output_dir, ds, r)
        new = not path.exists()
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(RESULT_COLUMNS)
            for rec in recs:
                for M, a, b in zip(rec.m_values, rec.rmse, rec.cc):
                    w.writerow((rec.dataset, rec.strategy, rec.rep, rec.seed, int(M), repr(float(a)), repr(float(b))))
        spath = selections_path(output_dir, ds, r)
        new = not spath.exists()
        spath.parent.mkdir(parents=True, exist_ok=True)
        with open(spath, "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(("dataset", "strategy", "rep", "order"))
            for rec in recs:
                w.writerow((rec.dataset, rec.strategy, rec.rep, " ".join(map(str, rec.selection_order))))


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _canonicalize(output_dir, config: ExperimentConfig, datasets: list[str]):
    """Rewrite result files in a fixed order with duplicates removed."""
    order = {s: i for i, s in enumerate(config.strategies)}
    for ds in datasets:
        for r in config.reg_r:
            for path, key_cols in (
                (results_path(output_dir, ds, r), ("strategy", "rep", "M")),
                (selections_path(output_dir, ds, r), ("strategy", "rep")),
            ):
                if not path.exists():
                    continue
                with open(path, newline="", encoding="utf-8") as fh:
                    reader = csv.reader(fh)
                    header = next(reader)
                    rows = list(reader)
                idx = [header.index(c) for c in key_cols]
                uniq = {}
                for row in rows:
                    uniq[tuple(row[i] for i in idx)] = row
                keyed = sorted(
                    uniq.items(),
                    key=lambda kv: (order.get(kv[0][0], len(order)), kv[0][0], *map(int, kv[0][1:])),
                )
                tmp = path.with_suffix(".tmp")
                with open(tmp, "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(header)
                    w.writerows(row for _, row in keyed)
                tmp.replace(path)


def _completed_units(output_dir, config: ExperimentConfig, dataset: str, n_points: int) -> set[int]:
    """Repetitions whose rows are already present for every (r, strategy)."""
    done = None
    for r in config.reg_r:
        path = results_path(output_dir, dataset, r)
        counts = defaultdict(int)
        if path.exists():
            for row in _read_rows(path):
                counts[(row["strategy"], int(row["rep"]))] += 1
        reps = {
            rep for rep in range(config.repetitions)
            if all(counts[(s, rep)] >= n_points for s in config.strategies)
        }
        done = reps if done is None else done & reps
    return done or set()


def metadata(config: ExperimentConfig, datasets: dict[str, Dataset]) -> dict:
    return {
        "config": {
            **config.identity(),
            "datasets": [ds.name for ds in datasets.values()],
            "repetitions": config.repetitions,
        },
        "datasets": {
            ds.name: {
                "N": ds.n_samples,
                "d": ds.d,
                "pool_size": train_fraction_size(ds.n_samples),
                "M_range": [ds.d + 1, ds.d + EXTRA_SAMPLES],
                "pca_applied": ds.meta.get("pca") is not None,
            }
            for ds in datasets.values()
        },
        "constants": {
            "initial_labels": "M0 = d + 1",
            "final_labels": f"M_max = d + {EXTRA_SAMPLES}",
            "split": "floor(0.8 N) train via seeded permutation; shared by all strategies in a repetition",
            "normalization": "z-score fit on the training pool, applied to pool and test set; std < 1e-12 -> 1",
            "preprocessing": "one-hot (sorted tokens) -> PCA to raw feature count when categoricals exist",
            "ridge": "||Xw + b - y||^2 + r||w||^2, bias unpenalized via centering",
            "committee_size": config.committee_P,
            "bootstrap_retries": regression.MAX_BOOTSTRAP_RETRIES,
            "kmeans": {
                "seeding": "greedy k-means++ (2 + floor(ln k) candidates per step)",
                "restarts": clustering.N_RESTARTS,
                "max_iter": clustering.MAX_ITER,
                "empty_cluster": "move the point farthest from its centroid (from a cluster of size > 1)",
                "refinement": "Hartigan single-point transfer at each Lloyd fixed point",
                "iteration_reclustering": "from scratch every iteration, k = M + 1",
            },
            "tie_rule": "argmax/argmin ties resolve to the smallest pool index / cluster id",
            "igsr_eps": strategies.R_EPS,
            "emcm_norm": "|y_p - y_hat| * ||x||" + (" with bias coordinate" if config.emcm_bias_coordinate else ""),
            "auc_rule": "trapezoid over unit-spaced M",
            "variance_rows": "AUC of the across-repetition population-variance curve",
            "ttest": "one-tailed Welch; samples are per-dataset normalized AUCs (per-run variant also emitted)",
            "seed_scheme": "rep seed = blake2b(base_seed, dataset, rep); strategy seed = blake2b(rep seed, strategy); "
                           "sub-seeds = blake2b(strategy seed, purpose, k or M)",
        },
    }


def _check_metadata(output_dir: Path, meta: dict):
    path = output_dir / "run_metadata.json"
    if path.exists():
        old = json.loads(path.read_text(encoding="utf-8"))
        prev = {k: v for k, v in old.get("config", {}).items() if k not in ("datasets", "repetitions")}
        cur = {k: v for k, v in meta["config"].items() if k not in ("datasets", "repetitions")}
        if prev != cur:
            raise ConfigError(f"{output_dir} holds results from a different configuration: {prev} != {cur}")
        # keep every dataset that has results on disk
        names = list(dict.fromkeys(old["config"].get("datasets", []) + meta["config"]["datasets"]))
        meta["config"]["datasets"] = names
        meta["datasets"] = {**old.get("datasets", {}), **meta["datasets"]}
        meta["config"]["repetitions"] = max(meta["config"]["repetitions"], old["config"].get("repetitions", 0))


def _worker_init():
    from threadpoolctl import threadpool_limits

    threadpool_limits(1)


def _run_unit_job(args):
    dataset, rep, config = args
    return run_unit(dataset, rep, config)


def run_all(config: ExperimentConfig, progress=None) -> list[RunRecord]:
    """Run every (dataset, repetition) unit not already on disk.

    Records are appended to the result files as each unit completes, so an
    interrupted run resumes where it stopped. Returns the records computed by
    this call; use :func:`load_results` for the full set.
    """
    datasets = {}
    for name in config.datasets:
        ds = load_dataset(name, config.data_dir)
        if not ds.supports_full_run:
            raise PoolTooSmall(f"{ds.name}: N={ds.n_samples}, d={ds.d} cannot reach M = d + {EXTRA_SAMPLES}")
        datasets[ds.name] = ds

    out_dir = config.output_dir
    meta = metadata(config, datasets)
    _check_metadata(out_dir, meta)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    jobs = []
    for ds in datasets.values():
        done = _completed_units(out_dir, config, ds.name, EXTRA_SAMPLES)
        jobs += [(ds, rep, config) for rep in range(config.repetitions) if rep not in done]
    log.info("%d units to run (%d already complete)",
             len(jobs), len(datasets) * config.repetitions - len(jobs))

    computed = []
    if config.jobs == 1:
        results = map(_run_unit_job, jobs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=config.jobs, initializer=_worker_init)
        results = pool.map(_run_unit_job, jobs)
    try:
        for i, recs in enumerate(results, 1):
            _append_records(out_dir, recs)
            computed.extend(recs)
            if progress is not None:
                progress(i, len(jobs))
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    _canonicalize(out_dir, config, list(datasets))
    return computed


def load_results(output_dir) -> list[RunRecord]:
    """Read every result file under ``output_dir/results`` back into records."""
    out_dir = Path(output_dir)
    files = sorted((out_dir / "results").glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no result files under {out_dir / 'results'}")
    meta_path = out_dir / "run_metadata.json"
    r_by_tag = {}
    if meta_path.exists():
        r_by_tag = {_r_tag(r): r for r in json.loads(meta_path.read_text())["config"]["reg_r"]}
    records = []
    for path in files:
        tag = path.stem.rsplit("_r", 1)[1]
        r = r_by_tag.get(tag, float(tag))
        groups = defaultdict(list)
        for row in _read_rows(path):
            groups[(row["dataset"], row["strategy"], int(row["rep"]), int(row["seed"]))].append(
                (int(row["M"]), float(row["rmse"]), float(row["cc"]))
            )
        for (ds, strat, rep, seed), rows in groups.items():
            rows.sort()
            arr = np.array(rows)
            records.append(RunRecord(ds, strat, rep, r, seed, arr[:, 0].astype(int), arr[:, 1], arr[:, 2]))
    return records


# -- aggregation -------------------------------------------------------------


@dataclass
class Aggregate:
    # (dataset, r, strategy) -> {"M", "rmse_mean", "rmse_var", "cc_mean", "cc_var"}
    curves: dict
    # (dataset, r) -> list of AucSummary (normalized when the RS baseline is present)
    summaries: dict
    # (dataset, r, strategy) -> (reps, 2) array of per-run [rmse AUC, cc AUC] normalized by RS's same rep
    run_aucs: dict
    # r -> strategy -> field -> mean normalized AUC across datasets
    grand: dict
    # r -> strategy -> field -> percent improvement over RS
    improvements: dict
    datasets: list
    strategies: list
    reg_r: list

    def normalized(self, dataset, r, strategy, field_name) -> float:
        for s in self.summaries[(dataset, r)]:
            if s.strategy == strategy:
                return s.normalized[field_name]
        raise KeyError((dataset, r, strategy))


def aggregate(records, baseline: str = "RS") -> Aggregate:
    """Mean/variance curves across repetitions, their AUCs, and baseline-normalized summaries."""
    records = list(records)
    if not records:
        raise ValueError("no records to aggregate")
    groups = defaultdict(list)
    for rec in records:
        groups[(rec.dataset, rec.r, rec.strategy)].append(rec)
    datasets = list(dict.fromkeys(rec.dataset for rec in records))
    reg_r = sorted({rec.r for rec in records})
    present = {rec.strategy for rec in records}
    strategy_order = [s for s in ALL_STRATEGIES if s in present] + sorted(present - set(ALL_STRATEGIES))

    curves, summaries, run_aucs = {}, {}, {}
    for (ds, r, strat), recs in groups.items():
        recs.sort(key=lambda x: x.rep)
        m = recs[0].m_values
        R = np.vstack([x.rmse for x in recs])
        C = np.vstack([x.cc for x in recs])
        curves[(ds, r, strat)] = {
            "M": m, "rmse_mean": R.mean(axis=0), "rmse_var": R.var(axis=0),
            "cc_mean": C.mean(axis=0), "cc_var": C.var(axis=0),
        }
    for ds in datasets:
        for r in reg_r:
            summ = []
            for strat in strategy_order:
                c = curves.get((ds, r, strat))
                if c is None:
                    continue
                summ.append(AucSummary(
                    dataset=ds, strategy=strat,
                    auc_rmse_mean=metrics.auc(Curve(c["M"], c["rmse_mean"])),
                    auc_rmse_var=metrics.auc(Curve(c["M"], c["rmse_var"])),
                    auc_cc_mean=metrics.auc(Curve(c["M"], c["cc_mean"])),
                    auc_cc_var=metrics.auc(Curve(c["M"], c["cc_var"])),
                ))
            if not summ:
                continue
            if any(s.strategy == baseline for s in summ):
                summ, _ = metrics.normalize_and_improve(summ, baseline)
            summaries[(ds, r)] = summ

    grand, improvements = {}, {}
    if baseline in present:
        for (ds, r, strat), recs in groups.items():
            base = {x.rep: x for x in groups.get((ds, r, baseline), [])}
            rows = []
            for x in sorted(recs, key=lambda x: x.rep):
                b = base.get(x.rep)
                if b is None:
                    continue
                rows.append((metrics.auc(x.rmse_curve) / metrics.auc(b.rmse_curve),
                             metrics.auc(x.cc_curve) / metrics.auc(b.cc_curve)))
            run_aucs[(ds, r, strat)] = np.array(rows).reshape(-1, 2)
        for r in reg_r:
            grand[r], improvements[r] = {}, {}
            for strat in strategy_order:
                vals = [
                    s.normalized for ds in datasets for s in summaries.get((ds, r), [])
                    if s.strategy == strat and s.normalized is not None
                ]
                if not vals:
                    continue
                grand[r][strat] = {f: float(np.mean([v[f] for v in vals])) for f in AucSummary.FIELDS}
                improvements[r][strat] = {
                    f: metrics.improvement_percent(f, v) for f, v in grand[r][strat].items()
                }
    return Aggregate(curves, summaries, run_aucs, grand, improvements, datasets, strategy_order, reg_r)


def pairwise_tests(agg: Aggregate, r: float, unit: str = "dataset",
                   proposed=PROPOSED, baselines=BASELINES) -> list[dict]:
    """One-tailed Welch p-values for each (proposed, baseline) pair.

    ``unit="dataset"`` uses one normalized AUC per dataset; ``unit="run"``
    pools the per-repetition normalized AUCs of every dataset.
    """
    rows = []
    for p in proposed:
        for b in baselines:
            if p not in agg.strategies or b not in agg.strategies:
                continue
            if unit == "dataset":
                dsets = [ds for ds in agg.datasets if (ds, r) in agg.summaries]
                if len(dsets) < 2:
                    raise metrics.TooFewSamples("pairwise tests need at least 2 datasets")
                a_rmse = [agg.normalized(ds, r, p, "auc_rmse_mean") for ds in dsets]
                b_rmse = [agg.normalized(ds, r, b, "auc_rmse_mean") for ds in dsets]
                a_cc = [agg.normalized(ds, r, p, "auc_cc_mean") for ds in dsets]
                b_cc = [agg.normalized(ds, r, b, "auc_cc_mean") for ds in dsets]
            elif unit == "run":
                A = np.vstack([agg.run_aucs[(ds, r, p)] for ds in agg.datasets if (ds, r, p) in agg.run_aucs])
                B = np.vstack([agg.run_aucs[(ds, r, b)] for ds in agg.datasets if (ds, r, b) in agg.run_aucs])
                a_rmse, a_cc, b_rmse, b_cc = A[:, 0], A[:, 1], B[:, 0], B[:, 1]
            else:
                raise ValueError(f"unit must be 'dataset' or 'run', got {unit!r}")
            rows.append({"proposed": p, "baseline": b, "metric": "RMSE",
                         "p": metrics.ttest_one_tailed(a_rmse, b_rmse, "less")})
            rows.append({"proposed": p, "baseline": b, "metric": "CC",
                         "p": metrics.ttest_one_tailed(a_cc, b_cc, "greater")})
    return rows


# -- reports -----------------------------------------------------------------


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def write_report(agg: Aggregate, output_dir) -> list[Path]:
    """Per-dataset summary, improvement table and p-value tables."""
    out = Path(output_dir)
    written = []
    fields = AucSummary.FIELDS
    rows = []
    for (ds, r), summ in sorted(agg.summaries.items(), key=lambda kv: (kv[0][1], agg.datasets.index(kv[0][0]))):
        for s in summ:
            norm = s.normalized or {}
            imp = {f: metrics.improvement_percent(f, v) for f, v in norm.items()}
            rows.append([_r_tag(r), ds, s.strategy, *(_fmt(getattr(s, f)) for f in fields),
                         *(_fmt(norm[f]) if f in norm else "" for f in fields),
                         *(_fmt(imp[f]) if f in imp else "" for f in fields)])
    path = out / "summary.csv"
    _write_csv(path, ["r", "dataset", "strategy", *fields, *(f"norm_{f}" for f in fields),
                      *(f"improvement_{f}" for f in fields)], rows)
    written.append(path)

    labels = {"auc_rmse_mean": ("RMSE", "Mean"), "auc_rmse_var": ("RMSE", "Var"),
              "auc_cc_mean": ("CC", "Mean"), "auc_cc_var": ("CC", "Var")}
    for r, imp in agg.improvements.items():
        strats = [s for s in agg.strategies if s != "RS" and s in imp]
        rows = [[*labels[f], *(f"{imp[s][f]:.1f}" for s in strats)] for f in fields]
        path = out / f"improvements_r{_r_tag(r)}.csv"
        _write_csv(path, ["metric", "stat", *strats], rows)
        written.append(path)

        for unit, name in (("dataset", "pvalues"), ("run", "pvalues_by_run")):
            try:
                tests = pairwise_tests(agg, r, unit=unit)
            except metrics.TooFewSamples as exc:
                log.warning("skipping %s tests at r=%s: %s", unit, r, exc)
                continue
            bases = [b for b in BASELINES if b in agg.strategies]
            table = []
            for p in PROPOSED:
                for metric in ("RMSE", "CC"):
                    vals = {t["baseline"]: t["p"] for t in tests if t["proposed"] == p and t["metric"] == metric}
                    if vals:
                        table.append([p, metric, *(f"{vals[b]:.4f}" for b in bases)])
            path = out / f"{name}_r{_r_tag(r)}.csv"
            _write_csv(path, ["proposed", "metric", *bases], table)
            written.append(path)
    return written


def write_plot_data(agg: Aggregate, output_dir) -> list[Path]:
    """Mean curves per dataset/metric and normalized-AUC bar data, as plain CSV."""
    out = Path(output_dir) / "plot_data"
    written = []
    for ds in agg.datasets:
        for r in agg.reg_r:
            strats = [s for s in agg.strategies if (ds, r, s) in agg.curves]
            if not strats:
                continue
            M = agg.curves[(ds, r, strats[0])]["M"]
            for metric in ("rmse", "cc"):
                rows = [[int(m), *(_fmt(agg.curves[(ds, r, s)][f"{metric}_mean"][j]) for s in strats)]
                        for j, m in enumerate(M)]
                path = out / "curves" / f"{slugify(ds)}_r{_r_tag(r)}_{metric}.csv"
                _write_csv(path, ["M", *strats], rows)
                written.append(path)
    for r in agg.reg_r:
        if r not in agg.grand:
            continue
        strats = [s for s in agg.strategies if s in agg.grand[r]]
        rows = []
        for metric, f in (("RMSE", "auc_rmse_mean"), ("CC", "auc_cc_mean")):
            for ds in agg.datasets:
                if (ds, r) in agg.summaries:
                    rows.append([ds, metric, *(_fmt(agg.normalized(ds, r, s, f)) for s in strats)])
            rows.append(["Average", metric, *(_fmt(agg.grand[r][s][f]) for s in strats)])
        path = out / f"normalized_auc_r{_r_tag(r)}.csv"
        _write_csv(path, ["dataset", "metric", *strats], rows)
        written.append(path)
    return written


def config_to_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["output_dir"] = str(config.output_dir)
    d["data_dir"] = str(config.data_dir)
    return d
