"""Multi-UAV transport of a cable-suspended point-mass payload.

Library layout:

- ``quat``       unit-quaternion algebra and rotation conversions
- ``dynamics``   constrained Newton-Euler dynamics, tension solver, RK4
- ``controller`` hierarchical load/position/attitude control stack
- ``scenario``   trajectories, initial conditions, configuration
- ``simulate``   closed-loop runner producing a :class:`slungload.simlog.SimLog`
- ``analysis``   error-state model and attractive-ellipsoid certificate
- ``cli``        ``slungload simulate|certify|analyze``
"""

from .analysis import (
    CertificateSearchConfig,
    DisturbanceBounds,
    EllipsoidCertificate,
    ErrorStateMatrices,
    build_WL,
    build_chi,
    build_chi_series,
    build_error_matrices,
    check_feasibility,
    containment_levels,
    ellipsoid_membership,
    estimate_disturbance_bounds,
    hurwitz_margin,
    lyapunov_violation_rate,
    search_certificate,
)
from .controller import (
    AgentCommands,
    ControllerGains,
    ControllerState,
    FixedShareAllocation,
    MinNormAllocation,
    ReferenceSample,
    UniformAllocation,
    allocate_tensions,
    attitude_control,
    attitude_extraction,
    controller_step,
    desired_rate,
    desired_vehicle_position,
    load_control,
    reference_fixed_share,
    vehicle_position_control,
)
from .dynamics import (
    PlantInputs,
    SystemParams,
    SystemState,
    VehicleParams,
    cable_directions,
    rk4_step,
    solve_tensions,
    system_derivative,
)
from .errors import (
    CertificateError,
    ConfigError,
    DegenerateGeometryError,
    IntegrationDivergenceError,
    SlungloadError,
    TensionSolveError,
    ThrustSingularityError,
)
from .quat import basic_rotation, quat_conj, quat_error, quat_mul, quat_normalize, quat_to_rot
from .scenario import (
    HoverTrajectory,
    LineTrajectory,
    Scenario,
    ScenarioConfig,
    SpiralTrajectory,
    build_scenario,
    config_from_file,
    default_gains,
    default_system_params,
    hover_equilibrium_conditions,
    load_config,
    reference_initial_conditions,
    spiral_reference,
)
from .simlog import SimLog, column_names
from .simulate import SimResult, run_simulation

__version__ = "0.1.0"
