"""Approximate steering of windowed square-summable states by bilinear pulses.

The library synthesizes exact shift/U(2) steering plans between states on a
truncated two-sided index ladder, compiles them into piecewise-constant
bilinear control pulses through the bounded approximant B_p of the shift
generator, and certifies the result with a rigorous error budget. It also
ships the oscillator-basis realization of the shift, the Monte-Carlo
average-power classifier for essentially infinite-dimensional operators,
and a Lie-closure dimension diagnostic.
"""

from .errors import (
    BadBand,
    BadDim,
    BadParams,
    BudgetInfeasible,
    EdgeSpill,
    EmptySupport,
    NotHermitian,
    NotUnitary,
    QuadratureUnconverged,
    SteeringError,
    WindowMismatch,
    WindowMissesBlock,
    WindowTooSmall,
    ZeroState,
)
from .statespace import (
    IndexWindow,
    StateVector,
    basis_state,
    distance,
    embed,
    from_triples,
    inner,
    load_state_csv,
    normalize,
    save_state_csv,
    to_triples,
    truncate_tail,
)
from .operators import (
    BandedHermitian,
    PrimitiveOp,
    UnitaryMatrix,
    apply_primitive,
    apply_shift,
    apply_two_level,
    bp_entry_oracle,
    build_bp,
    exp_hermitian,
    remainder_bound,
    shift_approx_error,
    shift_down,
    shift_up,
    two_level,
)
from .evolution import (
    ControlSchedule,
    ControlSegment,
    HamiltonianSpec,
    PROPAGATOR_PHASE_SIGN,
    accumulation_table,
    drift_by_name,
    embed_two_level_generator,
    free_rotator,
    load_schedule_jsonl,
    save_schedule_jsonl,
    simulate_schedule,
    step_propagator,
    trotter_step_error,
    zero_drift,
)
from .planner import (
    ErrorBudget,
    Plan,
    allocate_budget,
    apply_plan_exact,
    intermediate_states,
    load_plan_jsonl,
    plan_application_window,
    principal_generator,
    reduce_to_e0,
    save_plan_jsonl,
    simulation_window,
    synthesize_plan,
)
from .oscillator import (
    FockWindow,
    GENERATOR_SETS,
    OscOperator,
    average_power_mc,
    average_power_trials,
    build_osc,
    build_ushift,
    driven_oscillator_generators,
    lie_closure_dim,
    renumbering,
    renumbering_matrix,
    shift_su2_generators,
    zshift_matrix,
)

__version__ = "0.1.0"
