"""Synthesize non-Hermitian subsystem dynamics inside Hermitian coupled-mode networks."""

from .network import (ChainHamiltonian, DimerSpec, NetworkHamiltonian, StarBathSpec,
                      attach_chain_bath, build_coupler, build_star)
from .lanczos import (LanczosResult, max_safe_length, synthesize_bath, tridiagonalize,
                      verify_reduction)
from .propagator import (DecayFit, IntensityTrace, Propagator, TransferMatrix,
                         dimer_propagator, fit_decay, site_intensities, transfer_length,
                         transfer_matrix)
from .multiphoton import (PhotonConfig, TwoPhotonState, entanglement_entropy,
                          entanglement_peak, evolve_two_photon, output_amplitude)
from .lindblad import FockBasis, FockDensityMatrix, build_generators, integrate, lindblad_rhs
from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
