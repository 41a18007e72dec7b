"""solitonforge: solitons, kinks and soliton trains for nonlinear Schrodinger
equations, with split-step propagation and fixed-point gluing diagnostics."""

__version__ = "0.1.0"

PHASE_CONVENTION = "half_vx_minus_quarter_v2_t"
"""Boost phase used for every soliton and kink: exp(i(v.x/2 - |v|^2 t/4 + w t + g))."""

from .nonlinearity import (  # noqa: F401
    NonlinearitySpec,
    alpha_max,
    combined,
    custom,
    eval_f,
    eval_primitives,
    eval_wirtinger,
    gross_pitaevskii,
    power,
    validate_bounds,
)
from .profiles import (  # noqa: F401
    BoundStateProfile,
    KinkProfile,
    action,
    find_kink_frequency,
    first_integral_residual,
    fit_tail_decay,
    ground_state_closed_form,
    kink_profile,
    ode_residual,
    potential_root,
    shoot_bound_state,
)
from .grid import (  # noqa: F401
    ComplexField,
    Grid1D,
    Grid2D,
    collar_mask,
    norm_h1,
    norm_inf,
    norm_l2,
    norm_lp,
)
from .waveforms import (  # noqa: F401
    GeometricTrainGenerator,
    KinkParams,
    SolitonParams,
    TrainSpec,
    assemble,
    check_speed_balance,
    check_train_admissibility,
    fit_source_decay,
    min_relative_velocity,
    moving_gp_kink,
    scaled_soliton_field,
    select_exponents,
    soliton_field,
    source_term,
)
from .evolution import (  # noqa: F401
    ConservedReport,
    EvolveConfig,
    SpongeConfig,
    conserved,
    free_propagate,
    nls_evolve,
)
from .gluing import (  # noqa: F401
    PicardReport,
    convergence_curve,
    glue_multikink,
    glue_train,
    picard_iterate,
    solve_final_data,
)
