"""Pointer-register energy estimation on tensor networks.

Pipeline: build a k-local qubit Hamiltonian (spin model or Jordan-Wigner
mapped integrals), prepare an approximate ground state with DMRG, couple
the system to a discretized measurement meter through H (x) p, evolve
with TDVP, and read the energy off the meter distribution.  Exact
dense/sparse oracles back every step for verification.
"""

from .errors import ConvergenceError, ParseError, ResourceLimitError, VnpsError
from .fermion import (
    FermionIntegrals,
    freeze_core,
    hartree_fock_bits,
    jordan_wigner,
    load_fcidump,
    parse_fcidump,
)
from .lattice import LatticeSpec, build_heisenberg, build_triangular_lattice, heisenberg_chain
from .mpo import (
    MPO,
    apply_mpo,
    couple_system_pointer,
    identity_mpo,
    load_mpo,
    mpo_compress,
    mpo_from_pauli_sum,
    mpo_scale,
    mpo_sum,
    outer_mpo,
    pointer_momentum_mpo,
    projected_hamiltonian_mpo,
    save_mpo,
)
from .mps import (
    MPS,
    TruncationPolicy,
    basis_state,
    canonicalize,
    compress,
    expectation,
    inner,
    join,
    load_mps,
    pointer_plus_state,
    product_state,
    random_mps,
    reduced_density_matrix,
    save_mps,
)
from .pauli import (
    PauliSum,
    PauliTerm,
    dump_pauli_text,
    parse_pauli_text,
    simplify,
    spectral_bounds,
)
from .dmrg import DmrgConfig, DmrgReport, dmrg_excited_states, dmrg_ground_state, lanczos_smallest
from .tdvp import TdvpConfig, local_krylov_exp, tdvp_evolve
from .protocol import (
    PointerConfig,
    ProtocolResult,
    choose_window,
    run_protocol,
    theoretical_distribution,
    time_sweep,
)
from .circuits import (
    CircuitPlan,
    ResourceEstimate,
    complete_isometry,
    mps_to_staircase,
    pauli_exponential_template,
    trotter_resources,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
