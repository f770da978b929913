"""Numerical checks of second- and fourth-order Li-Yau type inequalities for the heat equation on R^n."""
from .errors import (
    BudgetTooSmall,
    ClosedFormOnlyData,
    DimensionMismatch,
    DimensionTooLarge,
    InadmissibleParams,
    InputError,
    LiYauError,
    NegativeSigma,
    NonPositiveTime,
    NonPositiveWeight,
    NumericalError,
    OrderTooLarge,
    StepTooSmall,
    VanishingData,
)
from .estimators import DerivativeRatioTransformer, FourthOrderLiYau, HeatFlowMoments, SecondOrderLiYau
from .inequalities import (
    CheckReport,
    FourthOrderParams,
    QuadraticFormCoeffs,
    SecondOrderParams,
    admissible_fourth,
    admissible_second,
    check_fourth_order,
    check_second_order,
    fourth_order_lhs,
    pair_square_sum,
    pair_sum,
    quadratic_coeffs,
    second_order_lhs,
    stated_bound,
)
from .initial_data import (
    GaussianComponent,
    InitialData,
    MomentBundle,
    closed_form_moments,
    closed_form_monomial,
    eval_g,
    heat_solution,
    validate,
)
from .kernel_moments import (
    DerivativeRatios,
    finite_difference_ratio,
    finite_difference_ratios,
    heat_residual,
    jensen_gap,
    laplacian_log_u,
    pair_identity,
    ratios_from_moments,
)
from .probe import (
    ProbeResult,
    SweepSpec,
    make_family,
    minimal_slack_report,
    minimize_slack,
    sharpness_curve,
    sweep,
    sweep_csv,
)
from .quadrature import (
    QuadratureSpec,
    gauss_hermite_rule,
    integrate_weighted,
    quadrature_moments,
    trapezoid_oracle,
)

__version__ = "0.1.0"
