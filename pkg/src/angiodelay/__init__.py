"""Analysis and simulation of angiogenesis models with distributed time delays.

The package decides local stability of the positive steady state for point,
Erlang and triangular delay kernels, locates stability switches and Hopf
points, counts right-half-plane characteristic roots by an argument sweep,
and integrates the nonlinear dynamics to confirm the predicted behaviour.
"""

from .charfun import (
    AuxFunction,
    CharFunction,
    Polynomial,
    aux_function_erlang,
    aux_function_tent,
    erlang_reduced_poly,
    erlang_shifted_char,
    hodograph_points,
    tent_char_parts,
    tent_g1,
)
from .errors import (
    AngioDelayError,
    BlowUpError,
    ConditionFailureError,
    ConfigError,
    ContinuationStallError,
    DegenerateInputError,
    DomainError,
    InconclusiveSignError,
    NeutralModelError,
    NoDensityError,
    NonConvergentError,
    NoPositiveSteadyStateError,
    OnAxisZeroError,
    PoleError,
    UnsupportedError,
)
from .kernels import (
    DelayKernel,
    DiracKernel,
    ErlangKernel,
    KernelMoments,
    TentKernel,
    kernel_from_json,
    kernel_to_json,
)
from .model import (
    HAHNFELDT_PARAMS,
    LOG_GROWTH,
    DerivedRates,
    GrowthFunction,
    ModelParams,
    SteadyState,
    derived_rates,
    params_from_json,
    params_to_json,
    rhs_original,
    rhs_rescaled,
    steady_state,
)
from .simulate import (
    Converging,
    Diverging,
    History,
    Inconclusive,
    Oscillating,
    SimConfig,
    Trajectory,
    classify_trajectory,
    constant_history,
    simulate,
    simulate_linear_chain,
)
from .stability import (
    ALWAYS_STABLE,
    BOUNDARY,
    STABLE,
    UNSTABLE,
    AlwaysStable,
    CrossingCandidate,
    SigmaSwitch,
    StabilityReport,
    SwitchCurve,
    SwitchGuarantee,
    TentBounds,
    UnstableAtZero,
    critical_erlang_rate,
    critical_erlang_shift,
    critical_sigma_dirac,
    erlang_21_switch_conditions,
    hopf_transversality,
    mikhailov_count,
    routh_hurwitz,
    tent_neutral_boundary_point,
    tent_sufficient_bounds,
    tent_switch_curve,
)

__version__ = "0.1.0"
