"""One-loop covariant effective action for a quantum particle with coordinate-dependent mass."""
from .covariant import (
    KernelMatrix,
    PathGrid,
    christoffel,
    einbein,
    el_residual,
    hessian_kernel,
    omega_sq,
    omega_sq_lb,
    transformed_kernel,
)
from .dynamics import OrbitState, Trajectory, el_rhs, integrate_orbit, quantum_shift
from .effective import (
    ActionValue,
    EffectiveModel,
    adiabaticity,
    classical_action,
    effective_action,
    effective_model,
    v1,
    z1,
)
from .expr import differentiate
from .model import Function1D, ModelSpec, validate_model
from .parser import parse_expression
from .reparam import (
    CoordinateMap,
    check_action_invariance,
    check_scalar,
    check_tensor,
    pushforward_model,
    pushforward_path,
)
from .tracelog import (
    FrequencyProfile,
    eig_logdet_ratio,
    gamma1_expansion,
    gamma1_numeric,
    gy_logdet_ratio,
    v1_momentum_check,
)

__version__ = "0.1.0"
