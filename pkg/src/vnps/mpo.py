"""Matrix product operators: Hamiltonians, the pointer momentum, and the
coupled system+pointer generator.

MPO tensors are rank-4 complex arrays indexed (left bond, output physical,
input physical, right bond).  Pauli sums are converted exactly: terms
sharing an operator suffix share a bond channel, and a deparallelization
pass afterwards merges channels that differ only by a scalar, so the
nearest-neighbour Heisenberg chain compresses to the familiar bond
dimension 5 without any lossy step.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import ParseError
from .mps import MPS, TruncationPolicy, EXACT_POLICY, _split_matrix
from .pauli import PauliSum, simplify

MPO_FORMAT_VERSION = 1

_ID = np.eye(2, dtype=complex)
_OPS = {
    "I": _ID,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class MPO:
    """Matrix product operator on a chain of qubits."""

    def __init__(self, tensors):
        tensors = [np.asarray(t, dtype=complex) for t in tensors]
        if not tensors:
            raise ValueError("empty tensor list")
        for i, t in enumerate(tensors):
            if t.ndim != 4 or t.shape[1] != 2 or t.shape[2] != 2:
                raise ValueError(f"site {i}: expected shape (l, 2, 2, r), got {t.shape}")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[3] != 1:
            raise ValueError("open boundary requires D_0 = D_N = 1")
        for i in range(len(tensors) - 1):
            if tensors[i].shape[3] != tensors[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        self.tensors = tensors

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [self.tensors[0].shape[0]] + [t.shape[3] for t in self.tensors]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def copy(self) -> "MPO":
        return MPO([t.copy() for t in self.tensors])


def identity_mpo(n_sites: int) -> MPO:
    return MPO([_ID.reshape(1, 2, 2, 1)] * n_sites)


def mpo_scale(m: MPO, scalar: complex) -> MPO:
    tensors = [t.copy() for t in m.tensors]
    tensors[0] = scalar * tensors[0]
    return MPO(tensors)


def mpo_from_pauli_sum(h: PauliSum) -> MPO:
    """Exact MPO of a Hermitian Pauli sum.

    Bond channels: 'ready' (identity so far), one channel per distinct
    unfinished operator suffix, and 'done'.  Coefficients enter at each
    term's first operator site.  A deparallelization pass then merges
    scalar-parallel channels (prefix sharing).
    """
    if h.n_qubits == 0:
        raise ValueError("cannot build an MPO on zero qubits")
    if not h.is_hermitian():
        raise ValueError("mpo_from_pauli_sum expects a Hermitian PauliSum")
    h = simplify(h)
    n = h.n_qubits

    READY, DONE = ("ready",), ("done",)
    # channel lists per bond; bond b sits between sites b and b+1
    channels: list[list] = [[] for _ in range(n - 1)]
    chan_index: list[dict] = [dict() for _ in range(n - 1)]

    def intern(bond: int, key) -> int:
        table = chan_index[bond]
        if key not in table:
            table[key] = len(channels[bond])
            channels[bond].append(key)
        return table[key]

    for b in range(n - 1):
        intern(b, READY)
    term_routes = []
    for t in h.terms:
        ops = t.operators
        if not ops:
            term_routes.append((t.coefficient, ()))
            continue
        first_site = ops[0][0]
        for b in range(first_site, n - 1):
            remaining = tuple(op for op in ops if op[0] > b)
            key = ("suffix", remaining) if remaining else DONE
            intern(b, key)
        term_routes.append((t.coefficient, ops))
    for b in range(n - 1):
        intern(b, DONE)

    def bond_channels(b: int) -> list:
        if b < 0:
            return [READY]
        if b >= n - 1:
            return [DONE]
        return channels[b]

    tensors = []
    for site in range(n):
        left = bond_channels(site - 1)
        right = bond_channels(site)
        lidx = {key: k for k, key in enumerate(left)}
        ridx = {key: k for k, key in enumerate(right)}
        w = np.zeros((len(left), 2, 2, len(right)), dtype=complex)
        # passthroughs
        if READY in lidx and READY in ridx:
            w[lidx[READY], :, :, ridx[READY]] += _ID
        if DONE in lidx and DONE in ridx:
            w[lidx[DONE], :, :, ridx[DONE]] += _ID
        for key in left:
            if key[0] == "suffix":
                remaining = key[1]
                if remaining[0][0] > site:
                    w[lidx[key], :, :, ridx[key]] += _ID
        # term transitions at this site
        for coeff, ops in term_routes:
            if not ops:
                if site == 0:
                    w[lidx[READY], :, :, ridx[DONE]] += coeff * _ID
                continue
            op_here = dict(ops).get(site)
            if op_here is None:
                continue
            first_site = ops[0][0]
            remaining = tuple(op for op in ops if op[0] > site)
            dst = ("suffix", remaining) if remaining else DONE
            if site == first_site:
                w[lidx[READY], :, :, ridx[dst]] += coeff * _OPS[op_here]
            else:
                incoming = tuple(op for op in ops if op[0] > site - 1)
                src = ("suffix", incoming)
                w[lidx[src], :, :, ridx[dst]] += _OPS[op_here]
        tensors.append(w)

    out = MPO(tensors)
    return deparallelize(out)


def deparallelize(m: MPO, tol: float = 1e-12) -> MPO:
    """Remove zero and scalar-parallel bond channels; exact rewrite.

    Alternates column (left-to-right) and row (right-to-left) passes until
    the bond dimensions stop shrinking.
    """
    tensors = [t.copy() for t in m.tensors]
    while True:
        before = [t.shape[3] for t in tensors]
        _depara_cols(tensors, tol)
        _depara_rows(tensors, tol)
        if [t.shape[3] for t in tensors] == before:
            break
    return MPO(tensors)


def _find_parallel_groups(mat: np.ndarray, tol: float):
    """Group the columns of ``mat`` into scalar-parallel classes.

    Returns (keep, transfer) with ``mat == mat[:, keep] @ transfer`` to
    within ``tol``; all-zero columns vanish (a single zero channel is kept
    if every column is zero, so bond shapes stay valid).
    """
    n_cols = mat.shape[1]
    norms = np.linalg.norm(mat, axis=0)
    scale = max(float(np.max(norms)), 1.0) if n_cols else 1.0
    nonzero = np.flatnonzero(norms > tol * scale)
    if nonzero.size == 0:
        return [0], np.zeros((1, n_cols), dtype=complex)

    units = mat[:, nonzero] / norms[nonzero]
    gram = units.conj().T @ units  # |gram|=1 marks parallel pairs
    assigned = np.full(nonzero.size, -1)
    keep: list[int] = []
    transfer_rows: list[np.ndarray] = []
    for a in range(nonzero.size):
        if assigned[a] >= 0:
            continue
        group = len(keep)
        keep.append(int(nonzero[a]))
        row = np.zeros(n_cols, dtype=complex)
        row[nonzero[a]] = 1.0
        candidates = np.flatnonzero(
            (np.abs(np.abs(gram[a]) - 1.0) <= 10 * tol) & (assigned < 0)
        )
        for b in candidates:
            if b == a:
                assigned[b] = group
                continue
            lam = gram[a, b] * norms[nonzero[b]] / norms[nonzero[a]]
            resid = np.linalg.norm(mat[:, nonzero[b]] - lam * mat[:, nonzero[a]])
            if resid <= tol * max(norms[nonzero[b]], 1.0):
                assigned[b] = group
                row[nonzero[b]] = lam
        transfer_rows.append(row)
    return keep, np.vstack(transfer_rows)


def _depara_cols(tensors, tol):
    for i in range(len(tensors) - 1):
        l, _, _, r = tensors[i].shape
        mat = tensors[i].reshape(l * 4, r)
        keep, transfer = _find_parallel_groups(mat, tol)
        if len(keep) == r and np.allclose(transfer, np.eye(r)):
            continue
        tensors[i] = mat[:, keep].reshape(l, 2, 2, len(keep))
        tensors[i + 1] = np.tensordot(transfer, tensors[i + 1], axes=([1], [0]))


def _depara_rows(tensors, tol):
    for i in range(len(tensors) - 1, 0, -1):
        l, _, _, r = tensors[i].shape
        mat = tensors[i].reshape(l, 4 * r).T  # columns are the rows of W
        keep, transfer = _find_parallel_groups(mat, tol)
        if len(keep) == l and np.allclose(transfer, np.eye(l)):
            continue
        tensors[i] = mat[:, keep].T.reshape(len(keep), 2, 2, r)
        tensors[i - 1] = np.tensordot(tensors[i - 1], transfer.T, axes=([3], [0]))


def pointer_momentum_mpo(r: int) -> MPO:
    """MPO of p = sum_j 2^{-j} (1 - Z_j)/2 on an r-qubit register.

    Pointer qubit j=1 is the register's first site and the most
    significant bit of z, so p|z> = (z / 2^r) |z>.
    """
    if r < 1:
        raise ValueError("pointer register needs at least one qubit")
    projections = [2.0 ** -(j + 1) * np.diag([0.0, 1.0]).astype(complex) for j in range(r)]
    if r == 1:
        return MPO([projections[0].reshape(1, 2, 2, 1)])
    tensors = []
    first = np.zeros((1, 2, 2, 2), dtype=complex)
    first[0, :, :, 0] = _ID
    first[0, :, :, 1] = projections[0]
    tensors.append(first)
    for j in range(1, r - 1):
        w = np.zeros((2, 2, 2, 2), dtype=complex)
        w[0, :, :, 0] = _ID
        w[0, :, :, 1] = projections[j]
        w[1, :, :, 1] = _ID
        tensors.append(w)
    last = np.zeros((2, 2, 2, 1), dtype=complex)
    last[0, :, :, 0] = projections[r - 1]
    last[1, :, :, 0] = _ID
    tensors.append(last)
    return MPO(tensors)


def couple_system_pointer(h_mpo: MPO, p_mpo: MPO) -> MPO:
    """K = H (x) p on the concatenated chain; the junction bond is 1."""
    return MPO([t.copy() for t in h_mpo.tensors] + [t.copy() for t in p_mpo.tensors])


def mpo_sum(a: MPO, b: MPO) -> MPO:
    """Exact block direct sum of two equal-length MPOs."""
    if a.n_sites != b.n_sites:
        raise ValueError("site counts differ")
    n = a.n_sites
    if n == 1:
        return MPO([a.tensors[0] + b.tensors[0]])
    tensors = []
    for i in range(n):
        ta, tb = a.tensors[i], b.tensors[i]
        if i == 0:
            t = np.concatenate([ta, tb], axis=3)
        elif i == n - 1:
            t = np.concatenate([ta, tb], axis=0)
        else:
            la, _, _, ra = ta.shape
            lb, _, _, rb = tb.shape
            t = np.zeros((la + lb, 2, 2, ra + rb), dtype=complex)
            t[:la, :, :, :ra] = ta
            t[la:, :, :, ra:] = tb
        tensors.append(t)
    return MPO(tensors)


def mpo_frobenius_norm(m: MPO) -> float:
    """sqrt(Tr M^dag M) via transfer contraction."""
    env = np.ones((1, 1), dtype=complex)
    for w in m.tensors:
        env = np.tensordot(env, w.conj(), axes=([0], [0]))  # (k, po, pi, r)
        env = np.tensordot(env, w, axes=([0, 1, 2], [0, 1, 2]))  # (r_conj, r)
    return float(np.sqrt(abs(env[0, 0])))


def mpo_compress(m: MPO, policy: TruncationPolicy) -> tuple[MPO, float]:
    """Deparallelize, then SVD-truncate the MPO bonds under ``policy``.

    The returned float bounds the operator-norm error: it is the
    Frobenius weight of everything discarded by the SVD sweep (the
    deparallelization step is exact).
    """
    out = deparallelize(m)
    tensors = [t.copy() for t in out.tensors]
    n = len(tensors)
    if n == 1:
        return MPO(tensors), 0.0
    fro = mpo_frobenius_norm(out)
    if fro == 0.0:
        return MPO(tensors), 0.0

    # right-to-left QR pass (treat (out,in) as one fused physical leg)
    for i in range(n - 1, 0, -1):
        l, _, _, r = tensors[i].shape
        mat = tensors[i].reshape(l, 4 * r)
        q, rr = np.linalg.qr(mat.conj().T)
        k = q.shape[1]
        tensors[i] = q.conj().T.reshape(k, 2, 2, r)
        tensors[i - 1] = np.tensordot(tensors[i - 1], rr.conj().T, axes=([3], [0]))
    # left-to-right SVD truncation sweep
    discarded = 0.0
    for i in range(n - 1):
        l, _, _, r = tensors[i].shape
        u, s, vh, disc = _split_matrix(tensors[i].reshape(l * 4, r), policy)
        discarded += disc
        tensors[i] = u.reshape(l, 2, 2, -1)
        sv = s[:, None] * vh
        tensors[i + 1] = np.tensordot(sv, tensors[i + 1], axes=([1], [0]))
    return MPO(tensors), float(np.sqrt(discarded) * fro)


def apply_mpo(m: MPO, psi: MPS, policy: TruncationPolicy) -> tuple[MPS, float]:
    """Contract an MPO into an MPS, then truncate under ``policy``.

    The result keeps the true norm of O|psi> (it is not renormalized);
    the returned float is the relative truncation error.
    """
    if m.n_sites != psi.n_sites:
        raise ValueError("site counts differ")
    tensors = []
    for w, t in zip(m.tensors, psi.tensors):
        # (wl, po, pi, wr) x (l, pi, r) -> (wl, l, po, wr, r)
        c = np.tensordot(w, t, axes=([2], [1]))
        c = np.transpose(c, (0, 3, 1, 2, 4))
        wl, l, po, wr, r = c.shape
        tensors.append(c.reshape(wl * l, po, wr * r))
    from .mps import compress

    return compress(MPS(tensors), policy, normalize=False)


def outer_mpo(a: MPS, b: MPS) -> MPO:
    """Rank-1 operator |a><b| as an MPO with bond dims chi_a * chi_b."""
    if a.n_sites != b.n_sites:
        raise ValueError("site counts differ")
    tensors = []
    for ta, tb in zip(a.tensors, b.tensors):
        la, _, ra = ta.shape
        lb, _, rb = tb.shape
        w = np.einsum("lpr,mqs->lmpqrs", ta, tb.conj())
        tensors.append(w.reshape(la * lb, 2, 2, ra * rb))
    return MPO(tensors)


def projected_hamiltonian_mpo(
    h_mpo: MPO,
    omega: MPS,
    policy: TruncationPolicy | None = None,
) -> MPO:
    """(I - |O><O|) H (I - |O><O|) as an exact MPO.

    Expanded as H - |O><HO| - |HO><O| + <O|H|O> |O><O| so the bond cost
    stays chi^2 * D instead of the (chi^2 D)-squared of a naive triple
    product.  ``omega`` must be normalized.
    """
    from .mps import expectation, inner

    nrm = abs(inner(omega, omega))
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError("omega must be normalized")
    energy = expectation(omega, h_mpo).real
    h_omega, _ = apply_mpo(h_mpo, omega, EXACT_POLICY)

    parts = mpo_sum(h_mpo, mpo_scale(outer_mpo(omega, h_omega), -1.0))
    parts = mpo_sum(parts, mpo_scale(outer_mpo(h_omega, omega), -1.0))
    parts = mpo_sum(parts, mpo_scale(outer_mpo(omega, omega), energy))
    compressed, _ = mpo_compress(
        parts, policy or TruncationPolicy(chi_max=2**30, svd_cutoff=1e-12)
    )
    return compressed


def serialize_mpo(m: MPO) -> bytes:
    """Same container layout as the MPS format, with rank-4 blobs in
    (left, phys-out, phys-in, right) order."""
    header = {
        "version": MPO_FORMAT_VERSION,
        "kind": "mpo",
        "n_sites": m.n_sites,
        "bond_dims": m.bond_dims,
    }
    head = json.dumps(header).encode("utf-8")
    blob = b"".join(np.ascontiguousarray(t, dtype="<c16").tobytes() for t in m.tensors)
    return struct.pack("<I", len(head)) + head + blob


def deserialize_mpo(data: bytes) -> MPO:
    if len(data) < 4:
        raise ParseError("container too short for header length field")
    (hlen,) = struct.unpack("<I", data[:4])
    if len(data) < 4 + hlen:
        raise ParseError("container truncated inside header")
    try:
        header = json.loads(data[4 : 4 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"corrupt header: {exc}") from None
    if header.get("version") != MPO_FORMAT_VERSION:
        raise ParseError(f"unsupported container version {header.get('version')}")
    if header.get("kind") != "mpo":
        raise ParseError(f"expected an MPO container, got {header.get('kind')!r}")
    bonds = header["bond_dims"]
    n = header["n_sites"]
    offset = 4 + hlen
    tensors = []
    for i in range(n):
        count = bonds[i] * 4 * bonds[i + 1]
        nbytes = count * 16
        chunk = data[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise ParseError(f"blob truncated at site {i}")
        tensors.append(
            np.frombuffer(chunk, dtype="<c16")
            .reshape(bonds[i], 2, 2, bonds[i + 1])
            .copy()
        )
        offset += nbytes
    if offset != len(data):
        raise ParseError("trailing bytes after final tensor")
    return MPO(tensors)


def save_mpo(m: MPO, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_mpo(m))


def load_mpo(path) -> MPO:
    with open(path, "rb") as fh:
        return deserialize_mpo(fh.read())
