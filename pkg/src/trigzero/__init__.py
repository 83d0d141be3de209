"""trigzero: zero counts of random trigonometric polynomials with
dependent stationary Gaussian coefficients, against their limit laws."""

__version__ = "0.1.0"

from .spectral import (
    CorrelationSequence,
    DensitySpec,
    HypothesisReport,
    SpectralMeasure,
    atomic_measure,
    correlation_of,
    hypothesis_report,
    measure_from_density,
    measure_from_dict,
    nodal_measure,
    validate_psd,
)
from .kernels import (
    ConvolutionProfile,
    KernelCoefficients,
    convolution_profile,
    fejer_eval,
    fejer_prime_eval,
    kernel_coefficients,
    ln_eval,
    two_point_cov,
)
from .kacrice import (
    KacRiceProfile,
    LimitPrediction,
    expected_zero_ratio,
    integrand_at,
    l2_limit_operator,
    predicted_limit,
)
from .sampler import (
    CoefficientSample,
    EmbeddingPlan,
    build_embedding,
    covariance_check,
    sample_coefficients,
)
from .zeros import (
    ZeroCount,
    companion_oracle,
    count_zeros,
    evaluate_grid,
    zero_statistics,
)
from .szclt import (
    CharFunctionCurve,
    LocalizedCovarianceCheck,
    cf_distance,
    conditional_cf,
    empirical_cf,
    limit_cf,
    localized_variance,
    normalization_sum,
)
