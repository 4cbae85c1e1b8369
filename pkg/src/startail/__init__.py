"""Star-shaped level sets and asymptotic independence of multivariate tails.

Densities whose level sets are (asymptotically) scaled copies of a bounded
star-shaped set ``D``, exact samplers for them, and diagnostics that decide
whether two components are asymptotically independent: bluntness of the
bivariate projections of ``D``, tail dependence coefficients, the sum
criterion, record probabilities and sample-cloud convergence onto ``D``.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateBox,
    DirectionOutsideCone,
    DivergentIntegral,
    HeavyTailOnly,
    HeavyTailUnsupported,
    InsufficientSample,
    InsufficientTail,
    LevelOutOfRange,
    NoRoot,
    NumericError,
    RejectionStall,
    StartailError,
    ToleranceNotReached,
)
from .shapes import (  # noqa: E402
    Bluntness,
    BluntResult,
    Ellipsoid,
    GaugeShape,
    LpBall,
    MetaTShape,
    OffCenterBall,
    PolytopeShape,
    SkewLimitShape,
    StarShape,
    triangle,
)
from .generators import (  # noqa: E402
    ParetoGenerator,
    RadialTable,
    Rapid,
    Regular,
    WeibullGenerator,
    empirical_variation_ratio,
    level_radius,
    normalizing_constant,
    scaling_constant,
)
from .density import (  # noqa: E402
    ComonotoneGaussian,
    HomotheticDensity,
    MetaTDensity,
    SkewNormalDensity,
    SlicedTriangleDensity,
    gaussian,
    pareto_disk,
)
from .estimators import (  # noqa: E402
    dependence_verdict,
    lambda_u_curve,
    overlap_independent,
    overlap_probability,
    record_probability,
    sum_criterion,
)
from .clouds import (  # noqa: E402
    SampleCloud,
    convergence_report,
    coordinatewise_max,
    frechet_fit,
    make_cloud,
    pareto_edge,
    positivity_partition_check,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DegenerateBox",
    "DirectionOutsideCone",
    "DivergentIntegral",
    "HeavyTailOnly",
    "HeavyTailUnsupported",
    "InsufficientSample",
    "InsufficientTail",
    "LevelOutOfRange",
    "NoRoot",
    "NumericError",
    "RejectionStall",
    "StartailError",
    "ToleranceNotReached",
    "Bluntness",
    "BluntResult",
    "Ellipsoid",
    "GaugeShape",
    "LpBall",
    "MetaTShape",
    "OffCenterBall",
    "PolytopeShape",
    "SkewLimitShape",
    "StarShape",
    "triangle",
    "ParetoGenerator",
    "RadialTable",
    "Rapid",
    "Regular",
    "WeibullGenerator",
    "empirical_variation_ratio",
    "level_radius",
    "normalizing_constant",
    "scaling_constant",
    "ComonotoneGaussian",
    "HomotheticDensity",
    "MetaTDensity",
    "SkewNormalDensity",
    "SlicedTriangleDensity",
    "gaussian",
    "pareto_disk",
    "dependence_verdict",
    "lambda_u_curve",
    "overlap_independent",
    "overlap_probability",
    "record_probability",
    "sum_criterion",
    "SampleCloud",
    "convergence_report",
    "coordinatewise_max",
    "frechet_fit",
    "make_cloud",
    "pareto_edge",
    "positivity_partition_check",
]
