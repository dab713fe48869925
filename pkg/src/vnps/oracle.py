"""Brute-force dense/sparse reference implementations.

Everything here trades speed for trustworthiness: dense Kronecker
products, eigendecompositions, and exact statevector manipulation.  The
qubit-ordering contract is global: site 0 is the most significant bit of
the statevector index, matching the MPS site order.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, ResourceLimitError
from .mps import MPS, canonicalize
from .pauli import PauliSum

DENSE_QUBIT_LIMIT = 14
SPARSE_QUBIT_LIMIT = 20

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_sum_to_dense(h: PauliSum, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli sum via Kronecker products."""
    n = h.n_qubits
    if n > limit:
        raise ResourceLimitError(f"{n} qubits exceeds the dense limit of {limit}")
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        ops = term.op_map()
        m = np.array([[1.0]], dtype=complex)
        for q in range(n):
            m = np.kron(m, _PAULI[ops.get(q, "I")])
        out += term.coefficient * m
    return out


class _PauliAction:
    """Fast matrix-free application of a Pauli sum to statevectors.

    Per term: X/Y flip bits (an index XOR), Y/Z contribute a parity sign,
    each Y contributes a factor i.  A 16-bit parity table makes the
    per-term work a few vectorized passes over the state.
    """

    def __init__(self, h: PauliSum):
        self.n = h.n_qubits
        self.dim = 2**self.n
        self._idx = np.arange(self.dim, dtype=np.int64)
        parity16 = np.zeros(1 << 16, dtype=np.int8)
        for b in range(16):
            parity16[(np.arange(1 << 16) >> b) & 1 == 1] ^= 1
        self._parity16 = parity16
        self.rows = []
        for term in h.terms:
            xy = 0
            yz = 0
            ny = 0
            for q, o in term.operators:
                bit = 1 << (self.n - 1 - q)  # site 0 most significant
                if o in ("X", "Y"):
                    xy |= bit
                if o in ("Y", "Z"):
                    yz |= bit
                if o == "Y":
                    ny += 1
            coeff = term.coefficient * (1j**ny)
            self.rows.append((xy, yz, coeff))

    def _parity(self, masked: np.ndarray) -> np.ndarray:
        p = self._parity16[masked & 0xFFFF]
        if self.n > 16:
            p = p ^ self._parity16[(masked >> 16) & 0xFFFF]
        return p

    def dot(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v, dtype=complex)
        idx = self._idx
        for xy, yz, coeff in self.rows:
            if yz:
                signs = 1.0 - 2.0 * self._parity(idx & yz)
                contrib = (coeff * signs) * v
            else:
                contrib = coeff * v
            if xy:
                out[idx ^ xy] += contrib
            else:
                out += contrib
        return out

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(self.dim, dtype=complex)
        idx = self._idx
        for xy, yz, coeff in self.rows:
            if xy:
                continue
            if yz:
                diag += coeff * (1.0 - 2.0 * self._parity(idx & yz))
            else:
                diag += coeff
        return diag


def exact_spectrum(
    h: PauliSum,
    k_lowest: int = 1,
    v0: np.ndarray | None = None,
    method: str = "auto",
    tol: float = 0.0,
) -> list[tuple[float, np.ndarray]]:
    """Lowest ``k_lowest`` eigenpairs, ascending.

    ``method="auto"`` diagonalizes densely up to 12 qubits and switches to
    matrix-free Lanczos (ARPACK) up to 20; each returned eigenvector is
    residual-checked.
    """
    if not h.is_hermitian():
        raise ValueError("exact_spectrum expects a Hermitian PauliSum")
    n = h.n_qubits
    if method == "auto":
        method = "dense" if n <= 12 else "sparse"
    if method == "dense":
        mat = pauli_sum_to_dense(h, limit=DENSE_QUBIT_LIMIT)
        vals, vecs = np.linalg.eigh(mat)
        return [(float(vals[i]), vecs[:, i].astype(complex)) for i in range(k_lowest)]
    if method != "sparse":
        raise ValueError(f"unknown method {method!r}")
    if n > SPARSE_QUBIT_LIMIT:
        raise ResourceLimitError(
            f"{n} qubits exceeds the sparse limit of {SPARSE_QUBIT_LIMIT}"
        )
    action = _PauliAction(h)
    op = spla.LinearOperator((action.dim, action.dim), matvec=action.dot, dtype=complex)
    k = min(k_lowest, action.dim - 2)
    vals, vecs = spla.eigsh(op, k=max(k, 1), which="SA", v0=v0, tol=tol)
    order = np.argsort(vals)
    pairs = []
    for i in order[:k_lowest]:
        val, vec = float(vals[i]), vecs[:, i].astype(complex)
        resid = np.linalg.norm(action.dot(vec) - val * vec)
        if resid > 1e-9 * max(1.0, float(np.sum(np.abs([t.coefficient for t in h.terms])))):
            raise ConvergenceError(f"eigenpair residual {resid:.2e} too large")
        pairs.append((val, vec))
    return pairs


def exact_evolve(h: PauliSum, psi: np.ndarray, t: float,
                 limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """e^{-iHt} psi via dense eigendecomposition."""
    mat = pauli_sum_to_dense(h, limit=limit)
    vals, vecs = np.linalg.eigh(mat)
    amps = vecs.conj().T @ psi
    return vecs @ (np.exp(-1j * vals * t) * amps)


def exact_pointer_distribution(
    h: PauliSum, psi: np.ndarray, t: float, r: int,
    system_limit: int = 12, pointer_limit: int = 8,
) -> np.ndarray:
    """Pointer outcome probabilities for evolution under H (x) p.

    Two independent routes are evaluated and cross-checked: the spectral
    mixture sum_j |<psi_j|psi>|^2 |f(E_j, x)|^2, and the autocorrelation
    (echo) route G(m) = <psi| e^{-i t m H / 2^r} |psi> Fourier-transformed
    against the readout kernel.  They must agree to 1e-10.
    """
    from .protocol import theoretical_distribution

    n = h.n_qubits
    if n > system_limit:
        raise ResourceLimitError(f"{n} system qubits exceeds limit {system_limit}")
    if r > pointer_limit:
        raise ResourceLimitError(f"{r} pointer qubits exceeds limit {pointer_limit}")
    psi = np.asarray(psi, dtype=complex)
    mat = pauli_sum_to_dense(h)
    vals, vecs = np.linalg.eigh(mat)

    weights = np.abs(vecs.conj().T @ psi) ** 2
    dist = np.zeros(2**r)
    for w, e in zip(weights, vals):
        if w > 1e-16:
            dist += w * theoretical_distribution(e, t, r)

    # echo route
    m_count = 2**r
    amps = vecs.conj().T @ psi
    g = np.empty(m_count, dtype=complex)
    for m in range(m_count):
        phases = np.exp(-1j * vals * (t * m / m_count))
        g[m] = np.vdot(amps, phases * amps)
    x = np.arange(m_count)
    echo = np.zeros(m_count)
    for m in range(-(m_count - 1), m_count):
        gm = g[m] if m >= 0 else np.conj(g[-m])
        mult = m_count - abs(m)
        echo += np.real(np.exp(2j * np.pi * x * m / m_count) * gm) * mult
    echo /= 4.0**r

    if np.max(np.abs(dist - echo)) > 1e-10:
        raise ConvergenceError("spectral and echo pointer distributions disagree")
    return dist


def mps_to_statevector(mps: MPS, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Exact contraction of an MPS to a dense amplitude vector."""
    n = mps.n_sites
    if n > limit:
        raise ResourceLimitError(f"{n} sites exceeds the dense limit of {limit}")
    acc = mps.tensors[0].reshape(2, -1)  # (phys..., right)
    for t in mps.tensors[1:]:
        acc = np.tensordot(acc, t, axes=([-1], [0]))
    return np.ascontiguousarray(acc).reshape(2**n)


def mps_from_statevector(vec: np.ndarray, cutoff: float = 1e-14) -> MPS:
    """Exact MPS of a dense state (bond dims grow as needed).

    Plumbing for tests and eigenstate initial conditions; singular values
    below ``cutoff`` (relative) are dropped, which only removes exact
    zeros for generic inputs.
    """
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    n = int(np.log2(vec.size))
    if 2**n != vec.size:
        raise ValueError("statevector length is not a power of two")
    tensors = []
    left = 1
    rest = vec.reshape(1, -1)
    for _ in range(n - 1):
        mat = rest.reshape(left * 2, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep = max(1, int(np.sum(s > cutoff * s[0]))) if s[0] > 0 else 1
        u, s, vh = u[:, :keep], s[:keep], vh[:keep]
        tensors.append(u.reshape(left, 2, keep))
        rest = s[:, None] * vh
        left = keep
    tensors.append(rest.reshape(left, 2, 1))
    return canonicalize(MPS(tensors), "right")


def mpo_to_dense(mpo, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense matrix of an MPO (out-index rows, in-index columns)."""
    n = mpo.n_sites
    if n > limit:
        raise ResourceLimitError(f"{n} sites exceeds the dense limit of {limit}")
    acc = mpo.tensors[0][0]  # (out, in, right)
    for w in mpo.tensors[1:]:
        # (out..., in..., r) x (l, out, in, r') -> (out..., in..., out, in, r')
        acc = np.tensordot(acc, w, axes=([-1], [0]))
    acc = acc[..., 0]
    # interleaved (out_0, in_0, out_1, in_1, ...) -> block (outs..., ins...)
    perm = list(range(0, acc.ndim, 2)) + list(range(1, acc.ndim, 2))
    acc = np.transpose(acc, perm)
    dim = 2**n
    return np.ascontiguousarray(acc).reshape(dim, dim)


def circuit_apply(plan, psi: np.ndarray, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Apply a gate plan to a dense state, gate by gate."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = int(np.log2(psi.size))
    if 2**n != psi.size:
        raise ValueError("statevector length is not a power of two")
    if n > limit:
        raise ResourceLimitError(f"{n} qubits exceeds the dense limit of {limit}")
    state = psi.reshape((2,) * n)
    for gate in plan.gates:
        qubits = list(gate.qubits)
        m = len(qubits)
        u = gate.matrix.reshape((2,) * (2 * m))
        state = np.tensordot(u, state, axes=(list(range(m, 2 * m)), qubits))
        # tensordot moved the acted-on axes to the front; put them back
        state = np.moveaxis(state, list(range(m)), qubits)
    return state.reshape(-1)
