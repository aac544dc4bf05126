"""Single-UAV emitter localisation from Doppler and ToA measurements."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateGeometry,
    DegenerateVelocity,
    NoConstraintRoot,
    SingularSystem,
    UavLocError,
    ZeroRange,
)
from .harness import (  # noqa: E402
    ScenarioConfig,
    TrialResult,
    run_snr_sweep,
    run_trajectory_comparison,
    run_trial,
)
from .localization import (  # noqa: E402
    Branch,
    ClsSystem,
    EmitterEstimate,
    LineCondition,
    assemble_cls,
    estimate_emitter,
    line_condition,
    modified_ls_cost,
    solve_cls,
    toa_only_estimate,
)
from .measurement import (  # noqa: E402
    EmitterPosition,
    MeasurementFrame,
    SignalParams,
    UavState,
    doppler_true,
    synthesize_frame,
    toa_true,
)
from .trajectory import (  # noqa: E402
    TrajectoryInputs,
    VelocityBranch,
    VelocityCommand,
    solve_velocity,
    velocity_constraint,
)
