"""Pool-based sequential active learning for regression.

Nine query strategies (RS, GSx, QBC, EMCM, RD-EMCM, iGS, RD-iGS, RDiGS,
RDiGSr) over a ridge regression model, plus the repeated-split benchmark
harness used to compare them.
"""

from .strategies import StrategyId, run_strategy

__version__ = "0.1.0"
__all__ = ["StrategyId", "run_strategy", "__version__"]
