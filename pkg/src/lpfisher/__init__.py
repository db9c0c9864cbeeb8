"""Geodesics, distances and tensors of the L^p-Fisher-Rao metric and alpha-connections on densities."""

from .dens import (
    alpha_connection_dens,
    blowup_time_dens,
    dens_geodesic_residual,
    distance_dens,
    geodesic_bvp_dens,
    geodesic_ivp_dens,
)
from .errors import GridMismatchError, PositivityError, SolverError, TangencyError
from .grid import (
    DensityField,
    GridSpec,
    PathGrid,
    TangentField,
    alpha_divergence,
    fisher_rao_inner,
    fp_norm,
    integrate,
    pushforward,
)
from .kernels import BACKEND
from .parametric import (
    NormalModel,
    ThetaState,
    alpha_normal_rhs,
    fisher_matrix,
    fp_theta,
    g_matrix,
    lp_geodesic_rhs,
    omega,
    shoot_bvp,
)
from .prob_alpha import alpha_geodesic_prob, blowup_estimate, prob_alpha_residual, tau_bvp, tau_ivp
from .prob_lp import lp_geodesic_prob_bvp, speed_profile
from .proot import RootPoint, forward, inverse, push_tangent
from .tensors import TensorContext, cartan_C, chern_prob_apply, functional_I, functional_J4, functional_K, hessian_g

__version__ = "0.1.0"
