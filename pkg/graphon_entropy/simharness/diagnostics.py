"""
Normality diagnostics for batches of estimates.
"""
import dataclasses

import numpy as np
from scipy import stats

from graphons.exceptions import DegenerateInputError, DomainError

MIN_CLT_SAMPLE = 100


@dataclasses.dataclass(frozen=True)
class CltDiagnostic:
    ks_statistic: float
    p_value: float
    skewness: float
    excess_kurtosis: float

    def looks_normal(self, level=0.01):
        return self.p_value > level


def clt_diagnostic(estimates):
    """
    Compare standardized estimates with the standard normal.

    Estimates are centred at their sample mean and scaled by their sample
    standard deviation (ddof=1), then tested with Kolmogorov-Smirnov using
    the asymptotic p-value.

    Raises:
        DomainError: fewer than 100 estimates
        DegenerateInputError: zero sample standard deviation
    """
    values = np.asarray(estimates, dtype=float)
    if values.size < MIN_CLT_SAMPLE:
        raise DomainError(f"the CLT diagnostic needs at least {MIN_CLT_SAMPLE} estimates, got {values.size}")
    sd = values.std(ddof=1)
    if not sd > 0:
        raise DegenerateInputError("estimates have zero standard deviation")
    standardized = (values - values.mean()) / sd
    result = stats.kstest(standardized, 'norm', method='asymp')
    return CltDiagnostic(
        ks_statistic=float(result.statistic),
        p_value=float(result.pvalue),
        skewness=float(stats.skew(values)),
        excess_kurtosis=float(stats.kurtosis(values, fisher=True)),
    )
