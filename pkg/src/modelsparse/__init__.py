"""Projected gradient descent for GLMs under combinatorial sparsity models."""

__version__ = "0.1.0"

from .glm import Dataset, Linear, Logistic, Poisson, make_family  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .model import (  # noqa: E402
    DisjointGroups,
    EnumerationBudgetExceeded,
    ExplicitFamily,
    PlainK,
    canonicalize_family,
    enumerate_supports,
    model_contains,
    model_expand,
)
from .projection import (  # noqa: E402
    ProjectionResult,
    brute_force_project,
    project_bounded,
    project_unbounded,
)
from .smrh import (  # noqa: E402
    SmrhEstimate,
    analytic_smrh_bounds,
    contraction_gamma,
    empirical_smrh_probe,
    extreme_eigenvalues,
    step_size_optimal,
)
from .solver import (  # noqa: E402
    AdaptiveQuadraticForm,
    FixedOptimal,
    FixedValue,
    SolverConfig,
    SolverTrace,
    adaptive_step,
    fit,
    reference_gradient_term,
    verify_contraction,
)
from .synth import ErrorDecomposition, error_decomposition, gen_dataset, gen_parameter  # noqa: E402
