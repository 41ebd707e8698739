"""Point interactions in one dimension: resolvents, Bogolyubov field
correlators and tau functions, each quantity computable by at least two
independent routes that must agree."""

from .bogolyubov import (BogolyubovParams, FieldInsertion, SL2Element,
                         correlator_via_fusion, delta_params, evolve,
                         form_factor, fuse, matrix_element, n_point_correlator,
                         one_point, params_from_sl2, resolvent_via_fields,
                         sl2_from_params, two_point)
from .gaussian import (MomentReport, QuadraticForm, krein_identity,
                       moment_check_mc, schur_partition_identity)
from .greenfn import (HermitianExtensionMatrix, PointInteractionConfig,
                      SpectralParameter, correlator_det, free_green,
                      resolvent_kernel, resolvent_kernel_general, u_matrix)
from .oracle import (FockTruncation, TransferState, build_operator,
                     transfer_green, vev_product)
from .tau import (Localization, Subspace, cross_ratio_tau, ext_subspace,
                  fin_check, int_subspace, n_matrix, tau_collapsed, tau_via_M)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
