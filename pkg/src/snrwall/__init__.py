"""MME spectrum sensing under noise-coloring uncertainty: detector, colored
noise generators, SNR-wall bounds and a Monte Carlo harness."""

from .bounds import (
    BoundReport,
    BoundValidityError,
    gershgorin_bounds,
    h0_statistic_lower_bound,
    h1_statistic_upper_bound,
    kappa_max,
    kappa_max_combined,
    kappa_max_receiver,
    kappa_max_time,
    nonrobustness_inequality,
    rayleigh_eigen_bounds,
    snr_wall_lower_bound,
    validity_condition,
    wall_bound,
)
from .detector import Decision, EigenSpectrum, Hypothesis, decide, hermitian_eigenvalues, mme_statistic, sample_covariance
from .model import (
    HermitianCovariance,
    SampleBlock,
    SignalModelParams,
    Snr,
    VectorSeries,
    build_smoothed_vectors,
    generate_bpsk_signal,
    signal_autocorrelation,
    statistical_signal_covariance,
)
from .montecarlo import ScenarioConfig, empirical_wall_search, run_scenario, summarize
from .noise import (
    CorrelationModel,
    NoiseModel,
    NotPositiveDefiniteError,
    ar1_covariance,
    ar1_noise,
    cholesky_colored_noise,
    psd_of_ar1,
    psd_shaped_noise,
    white_noise,
)

__version__ = "0.1.0"
