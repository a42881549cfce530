"""Edge states and topological invariants of periodic 2D tight-binding models.

Edge spectra and indices are computed from transfer matrices along direction
2 and the Lagrangian planes of their contracting subspaces; bulk invariants
from Bloch projections.  A truncated half-space oracle gives an independent
check.
"""

from .errors import (ConvergenceError, EdgeTopoError, FrameError, GapClosedError,
                     KramersError, ModelError, ModelWarning, NonHyperbolicError,
                     SingularFiberError)
from .kernels import BACKEND
from .model import (TightBindingModel, build_harper, build_honeycomb, build_kane_mele,
                    build_spin_orbit_square, build_square_laplacian, build_triangular,
                    diagnose, fiber_blocks, load_model, model_from_dict, model_to_dict,
                    spin_homotopy, spin_sectors)
from .bloch import (band_projection, bloch_field, bloch_hamiltonian, chern_number,
                    chern_z2, spin_chern_numbers, spin_spectrum_clusters)
from .transfer import (classify, contracting_frame, edge_unitary, stereographic,
                       transfer_matrix)
from .edge import (GapDescriptor, bulk_edge_check, edge_bands, edge_current, edge_index,
                   edge_z2_index, make_gap, maslov_crossings, spin_edge_indices)
from .halfspace import green_matrix, green_unitary, truncated_spectrum

__version__ = "0.1.0"
