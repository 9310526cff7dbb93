"""Harnack domination and the hyperbolic distance for row contractions of matrices."""

from .automorph import free_automorphism, harnack_closed_form, mobius, poincare_bergman, unitary_action
from .dilation import (Intertwiner, IsometricDilation, characteristic_function, characteristic_symbol,
                       intertwiner, minimal_isometric_dilation, verify_intertwining)
from .errors import (CapacityError, InconclusiveError, NotDominatedError, NumericalError,
                     ValidationError)
from .fock import FockBasis, FockOperator, enumerate_words, fock_dimension, left_creation, right_creation
from .harnack import (dominates, hyperbolic_delta, l_norm, l_norm_report, min_constant_kernel,
                      suciu_norm, truncated_l_norm)
from .holomap import FreeMap, contractivity_bound, evaluate, schwarz_pick_report
from .kernels import multi_toeplitz_block, pluriharmonic_poisson, poisson_kernel_map
from .numlin import min_pencil_constant, operator_norm
from .rowop import (c_inverse_operator, c_operator, defects, joint_spectral_radius,
                    reconstruction_operator, row_norm)

__version__ = "0.1.0"
