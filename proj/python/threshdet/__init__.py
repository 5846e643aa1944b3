"""Threshold-detector click statistics for Wiener-process signals.

Analytic hitting-time laws, random-gain averaging, generalized Born
detection probabilities and a Monte Carlo cross-check engine, backed by the
C++ core in threshdet._core.
"""

from ._core import (
    AsymptoticSeriesResult,
    BarrierMode,
    ClickEstimate,
    ClickMethod,
    CovarianceOperator,
    DensityOperator,
    DetectorConfig,
    EmpiricalClicks,
    EtaDensity,
    GainIntegration,
    GainKind,
    GainModel,
    HittingLawParams,
    SeriesValue,
    SignalModel,
    SimulationPlan,
    TraceRecord,
    __version__,
    born_probability,
    channel_powers,
    collect_hitting_times,
    decompose_signal,
    density_operator,
    detection_prob_fixed_gain,
    detection_prob_random_gain,
    detection_prob_rough,
    diagonalizing_basis,
    erf,
    erfc,
    erfc_asymptotic,
    erfcx,
    expected_clicks,
    gaussian_kernel,
    generalized_born_first_term,
    generalized_born_probabilities,
    hitting_cdf,
    hitting_cdf_exponential_asymptotic,
    hitting_cdf_first_term,
    run_experiment,
    std_normal_cdf,
    std_normal_quantile,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
