"""Numerical information geometry for parametrized measure models.

Tensor fields (1-form, Fisher form, Amari–Chentsov tensor), sufficiency and
Markov morphisms, invariance checks and fits, Orlicz-space predicates and
natural-gradient descent.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .spaces import (  # noqa: F401
    Finite,
    Grid,
    Measure,
    Product,
    QuadratureConfig,
    Statistic,
    finite_measure,
    lebesgue,
    product_measure,
    pushforward_statistic,
    quad,
    uniform_measure,
)
from .models import (  # noqa: F401
    ParametrizedModel,
    bernoulli,
    builtin,
    categorical,
    check_k_integrability,
    density_at,
    exp_family,
    expression_model,
    log_derivative,
    make_step_model,
    mass,
    mass_derivative,
    power_exp,
    pushforward_model,
    reparametrize,
    scaled,
    scaling,
)
from .tensors import ac_tensor, fisher_form, fisher_matrix, moment_tensor, one_form_A  # noqa: F401
from .markov import (  # noqa: F401
    MarkovKernel,
    check_sufficiency,
    conditional_distribution,
    congruent_embedding,
    decompose_markov_morphism,
    kernel_model,
    kernel_pushforward,
    left_inverse_check,
    lift_model_by_kernel,
)
from .chentsov import (  # noqa: F401
    fit_invariant_cubic,
    fit_invariant_oneform,
    fit_invariant_quadratic,
    information_loss,
    invariance_report,
    monotonicity_gap,
)
from .orlicz import (  # noqa: F401
    YoungFunction,
    e_convergence_diagnostic,
    in_exponential_tangent,
    orlicz_norm,
    preceq,
    segment_similarity,
    similar,
    stretch_equivalence_check,
)
from .natgrad import KLObjective, NatGradConfig, descend, natural_direction  # noqa: F401
