"""Paraxial boundary integral equations for diffraction by elongated bodies of revolution.

The package builds the Volterra surface equation of the parabolic wave
equation for a body ``r < f(x)``, solves it by marching or by iteration,
evaluates the closed-form cone field as an independent check, and derives
off-surface fields, directivity and the optical-theorem balance.
"""

from .cone import (ConvolutionPieces, FarFieldFit, SelfSimilarCoord, appendix_surface_field,
                   asympt_constant_P, convolution_pieces, far_field_fit, offsurface_field,
                   penumbra_field, surface_field, surface_field_sc, surface_field_sc_real_axis,
                   zeta_hat_numeric)
from .errors import (AccuracyError, AccuracyWarning, ConsistencyError, DivergenceError,
                     DomainError, NumericError, PetdError, SingularityError)
from .geometry import (ParaxialityReport, Profile, Verdict, WaveParams, make_cone,
                       make_spindle, validate_paraxial)
from .kernels import (KernelEvaluator, SpacePoint, apply_N, apply_N_bar, continuation_apply,
                      greens, greens_dr_source, kernel_cone0, kernel_full, kernel_modal,
                      kernel_modal_closed, propagate)
from .numerics import (QuadResult, QuadratureSpec, bessel_j, bessel_j_deriv, bessel_y,
                       bessel_y_deriv, damped_real_axis, hankel1, hankel1_deriv,
                       oscillatory_integral, parabolic_cylinder_D_neg32)
from .observables import (Directivity, OpticalTheoremBalance, directivity,
                          directivity_quadrature, directivity_series, optical_theorem_balance,
                          optical_theorem_residual, reconstruct_modes, reconstruct_point)
from .volterra import (DEFAULT_ETAS, AxialGrid, IterationTrace, ModalSurfaceField,
                       eta_extrapolate, extrapolation_weights, incident_modal, mode_count,
                       solve_cone_axial, solve_marching, solve_modes, solve_neumann,
                       surface_weights, tip_constant)

__version__ = "0.1.0"
