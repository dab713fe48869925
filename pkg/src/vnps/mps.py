"""Open-boundary matrix product states for qubit chains.

Tensors are rank-3 complex arrays indexed (left bond, physical, right
bond) with physical dimension 2 throughout.  Operations return new MPS
values and never mutate their arguments.  ``canonical_center`` tracks the
mixed-canonical gauge: every site to its right satisfies the
right-isometry condition, every site to its left the left one; ``None``
means unknown gauge.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ResourceLimitError

MPS_FORMAT_VERSION = 1
RDM_MAX_WINDOW = 10


@dataclass(frozen=True)
class TruncationPolicy:
    """Bond truncation rule: hard cap plus relative singular-value cutoff."""

    chi_max: int
    svd_cutoff: float = 1e-12

    def __post_init__(self):
        if self.chi_max < 1:
            raise ValueError("chi_max must be >= 1")
        if not 0.0 <= self.svd_cutoff < 1.0:
            raise ValueError("svd_cutoff must lie in [0, 1)")


EXACT_POLICY = TruncationPolicy(chi_max=2**30, svd_cutoff=1e-14)


class MPS:
    """Matrix product state on a chain of qubits."""

    def __init__(self, tensors, canonical_center: int | None = None):
        tensors = [np.asarray(t, dtype=complex) for t in tensors]
        if not tensors:
            raise ValueError("empty tensor list")
        for i, t in enumerate(tensors):
            if t.ndim != 3 or t.shape[1] != 2:
                raise ValueError(f"site {i}: expected shape (l, 2, r), got {t.shape}")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("open boundary requires chi_0 = chi_N = 1")
        for i in range(len(tensors) - 1):
            if tensors[i].shape[2] != tensors[i + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {i} and {i + 1}")
        self.tensors = tensors
        self.canonical_center = canonical_center

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [self.tensors[0].shape[0]] + [t.shape[2] for t in self.tensors]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def copy(self) -> "MPS":
        return MPS([t.copy() for t in self.tensors], self.canonical_center)

    def norm(self) -> float:
        return float(np.sqrt(abs(inner(self, self))))

    def is_right_canonical(self, tol: float = 1e-10) -> bool:
        """True when every site (including the first, which then carries
        unit norm) satisfies the right-isometry condition."""
        for t in self.tensors:
            l = t.shape[0]
            gram = np.tensordot(t, t.conj(), axes=([1, 2], [1, 2]))
            if np.max(np.abs(gram - np.eye(l))) > tol:
                return False
        return True


def product_state(local_states) -> MPS:
    """All-bond-dimension-1 MPS from a list of normalized 2-vectors."""
    tensors = []
    for i, v in enumerate(local_states):
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise ValueError(f"site {i}: local state must have 2 components")
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ValueError(f"site {i}: local state is not normalized")
        tensors.append(v.reshape(1, 2, 1))
    return MPS(tensors, canonical_center=0)


def basis_state(bits) -> MPS:
    """Computational basis state |b_0 b_1 ...> (site 0 most significant)."""
    vecs = []
    for b in bits:
        v = np.zeros(2)
        v[int(b)] = 1.0
        vecs.append(v)
    return product_state(vecs)


def pointer_plus_state(r: int) -> MPS:
    """Uniform superposition 2^{-r/2} sum_z |z> over an r-qubit register."""
    if r < 1:
        raise ValueError("pointer register needs at least one qubit")
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    return product_state([plus] * r)


def random_mps(n_sites: int, chi: int, seed: int = 0) -> MPS:
    """Normalized random MPS with bond dimension (up to) chi."""
    rng = np.random.default_rng(seed)
    tensors = []
    left = 1
    for i in range(n_sites):
        right = min(chi, 2 ** (i + 1), 2 ** (n_sites - 1 - i))
        shape = (left, 2, right)
        tensors.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        left = right
    psi = canonicalize(MPS(tensors), "right")
    psi.tensors[0] = psi.tensors[0] / np.linalg.norm(psi.tensors[0])
    return psi


def _split_matrix(theta: np.ndarray, policy: TruncationPolicy):
    """SVD with deterministic sign gauge, truncation, and error readout.

    Returns (U, s, Vh, discarded_weight) where discarded_weight is the sum
    of squared singular values dropped by the cap/cutoff, relative to the
    total weight of theta.
    """
    u, s, vh = np.linalg.svd(theta, full_matrices=False)
    total = float(np.sum(s**2))
    if total == 0.0:
        return u[:, :1], s[:1], vh[:1], 0.0
    keep = int(np.sum(s > policy.svd_cutoff * s[0]))
    keep = max(1, min(keep, policy.chi_max))
    discarded = float(np.sum(s[keep:] ** 2)) / total
    u, s, vh = u[:, :keep], s[:keep], vh[:keep]
    # fix the gauge: largest-magnitude entry of each left vector real-positive
    for k in range(u.shape[1]):
        idx = np.argmax(np.abs(u[:, k]))
        ph = u[idx, k] / abs(u[idx, k])
        u[:, k] /= ph
        vh[k, :] *= ph
    return u, s, vh, discarded


def canonicalize(mps: MPS, target) -> MPS:
    """Bring an MPS into mixed-canonical form with the center at ``target``.

    ``target="right"`` is shorthand for center 0, i.e. fully
    right-canonical.  The represented state is unchanged (up to overall
    normalization being concentrated in the center tensor).
    """
    center = 0 if target == "right" else int(target)
    if not 0 <= center < mps.n_sites:
        raise ValueError(f"target site {target} out of range")
    tensors = [t.copy() for t in mps.tensors]
    n = len(tensors)

    # right-to-left QR pass making sites > center right-isometric
    for i in range(n - 1, center, -1):
        l, d, r = tensors[i].shape
        mat = tensors[i].reshape(l, d * r)
        q, rr = np.linalg.qr(mat.conj().T)
        # fix QR phase so the decomposition is deterministic
        ph = np.sign(np.real(np.diag(rr)))
        ph[ph == 0] = 1.0
        q = q * ph
        rr = (rr.T * ph).T
        k = q.shape[1]
        tensors[i] = q.conj().T.reshape(k, d, r)
        tensors[i - 1] = np.tensordot(tensors[i - 1], rr.conj().T, axes=([2], [0]))

    # left-to-right pass making sites < center left-isometric
    for i in range(center):
        l, d, r = tensors[i].shape
        mat = tensors[i].reshape(l * d, r)
        q, rr = np.linalg.qr(mat)
        ph = np.sign(np.real(np.diag(rr)))
        ph[ph == 0] = 1.0
        q = q * ph
        rr = (rr.T * ph).T
        k = q.shape[1]
        tensors[i] = q.reshape(l, d, k)
        tensors[i + 1] = np.tensordot(rr, tensors[i + 1], axes=([1], [0]))

    return MPS(tensors, canonical_center=center)


def compress(mps: MPS, policy: TruncationPolicy, normalize: bool = True) -> tuple[MPS, float]:
    """Truncate every bond under ``policy``.

    Returns the compressed state and the relative truncation error
    sqrt(sum of discarded singular-value weights).  With
    ``normalize=False`` the surviving norm is kept (needed when the input
    is intentionally unnormalized, e.g. H|psi>).
    """
    psi = canonicalize(mps, "right")
    tensors = psi.tensors
    n = len(tensors)
    discarded_total = 0.0
    for i in range(n - 1):
        l, d, r = tensors[i].shape
        theta = tensors[i].reshape(l * d, r)
        u, s, vh, disc = _split_matrix(theta, policy)
        discarded_total += disc
        tensors[i] = u.reshape(l, d, -1)
        sv = s[:, None] * vh
        tensors[i + 1] = np.tensordot(sv, tensors[i + 1], axes=([1], [0]))
    out = MPS(tensors, canonical_center=n - 1)
    if normalize:
        # all other sites are isometric, so the center holds the norm
        nrm = np.linalg.norm(out.tensors[-1])
        if nrm > 0:
            out.tensors[-1] = out.tensors[-1] / nrm
    return out, float(np.sqrt(discarded_total))


def inner(a: MPS, b: MPS) -> complex:
    """Overlap <a|b> by left-to-right transfer contraction."""
    if a.n_sites != b.n_sites:
        raise ValueError("site counts differ")
    env = np.ones((1, 1), dtype=complex)
    for ta, tb in zip(a.tensors, b.tensors):
        env = np.tensordot(env, ta.conj(), axes=([0], [0]))  # (kb, p, ra)
        env = np.tensordot(env, tb, axes=([0, 1], [0, 1]))  # (ra, rb)
    return complex(env[0, 0])


def expectation(mps: MPS, mpo) -> complex:
    """<psi|O|psi> via the three-layer transfer contraction."""
    if mps.n_sites != mpo.n_sites:
        raise ValueError("site counts differ")
    env = np.ones((1, 1, 1), dtype=complex)  # (bra, mpo, ket)
    for t, w in zip(mps.tensors, mpo.tensors):
        env = np.tensordot(env, t.conj(), axes=([0], [0]))  # (m, k, p', ra)
        env = np.tensordot(env, w, axes=([0, 2], [0, 1]))  # (k, ra, p, rm)
        env = np.tensordot(env, t, axes=([0, 2], [0, 1]))  # (ra, rm, rk)
    return complex(env[0, 0, 0])


def join(system: MPS, pointer: MPS) -> MPS:
    """Concatenate two open chains into one product state across the cut."""
    return MPS(
        [t.copy() for t in system.tensors] + [t.copy() for t in pointer.tensors],
        canonical_center=None,
    )


def reduced_density_matrix(mps: MPS, window: tuple[int, int],
                           max_window: int = RDM_MAX_WINDOW) -> np.ndarray:
    """Dense density matrix of the contiguous site range [start, stop).

    The window is capped (2^w x 2^w output); everything outside is traced
    out exactly through transfer contractions.
    """
    start, stop = window
    n = mps.n_sites
    if not (0 <= start < stop <= n):
        raise ValueError(f"bad window {window}")
    w = stop - start
    if w > max_window:
        raise ResourceLimitError(
            f"window of {w} sites exceeds the {max_window}-site limit"
        )

    left = np.ones((1, 1), dtype=complex)  # (ket_bond, bra_bond)
    for i in range(start):
        t = mps.tensors[i]
        left = np.tensordot(left, t, axes=([0], [0]))  # (bra, p, r_ket)
        left = np.tensordot(left, t.conj(), axes=([0, 1], [0, 1]))  # (r_ket, r_bra)
    right = np.ones((1, 1), dtype=complex)  # (ket_bond, bra_bond)
    for i in range(n - 1, stop - 1, -1):
        t = mps.tensors[i]
        right = np.tensordot(t, right, axes=([2], [0]))  # (l_ket, p, bra)
        right = np.tensordot(right, t.conj(), axes=([1, 2], [1, 2]))  # (l_ket, l_bra)

    # ket-side block with open physical legs: (bra_left, p_start..p_stop-1, ket_right)
    open_t = np.transpose(left, (1, 0))
    for i in range(start, stop):
        open_t = np.tensordot(open_t, mps.tensors[i], axes=([-1], [0]))
    tmp = np.tensordot(open_t, right, axes=([-1], [0]))  # (bra_left, p..., bra_right)
    rho = np.tensordot(tmp, open_t.conj(), axes=([0, -1], [0, -1]))  # (p..., q...)
    dim = 2**w
    return rho.reshape(dim, dim)


def mps_add(a: MPS, b: MPS, coeff_a: complex = 1.0, coeff_b: complex = 1.0) -> MPS:
    """Exact linear combination coeff_a |a> + coeff_b |b> (bond dims add)."""
    if a.n_sites != b.n_sites:
        raise ValueError("site counts differ")
    n = a.n_sites
    if n == 1:
        return MPS([coeff_a * a.tensors[0] + coeff_b * b.tensors[0]])
    tensors = []
    for i in range(n):
        ta, tb = a.tensors[i], b.tensors[i]
        if i == 0:
            t = np.concatenate([coeff_a * ta, coeff_b * tb], axis=2)
        elif i == n - 1:
            t = np.concatenate([ta, tb], axis=0)
        else:
            la, da, ra = ta.shape
            lb, db, rb = tb.shape
            t = np.zeros((la + lb, 2, ra + rb), dtype=complex)
            t[:la, :, :ra] = ta
            t[la:, :, ra:] = tb
        tensors.append(t)
    return MPS(tensors)


def serialize(mps: MPS) -> bytes:
    """Container format: uint32 header length, JSON header, raw blob.

    The blob is complex128 little-endian (real/imag interleaved), one
    tensor after another in site order, each in C order (left, phys,
    right).
    """
    header = {
        "version": MPS_FORMAT_VERSION,
        "kind": "mps",
        "n_sites": mps.n_sites,
        "bond_dims": mps.bond_dims,
        "canonical_center": mps.canonical_center,
    }
    head = json.dumps(header).encode("utf-8")
    blob = b"".join(np.ascontiguousarray(t, dtype="<c16").tobytes() for t in mps.tensors)
    return struct.pack("<I", len(head)) + head + blob


def deserialize(data: bytes) -> MPS:
    if len(data) < 4:
        raise ParseError("container too short for header length field")
    (hlen,) = struct.unpack("<I", data[:4])
    if len(data) < 4 + hlen:
        raise ParseError("container truncated inside header")
    try:
        header = json.loads(data[4 : 4 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"corrupt header: {exc}") from None
    if header.get("version") != MPS_FORMAT_VERSION:
        raise ParseError(f"unsupported container version {header.get('version')}")
    if header.get("kind") != "mps":
        raise ParseError(f"expected an MPS container, got {header.get('kind')!r}")
    bonds = header["bond_dims"]
    n = header["n_sites"]
    if len(bonds) != n + 1:
        raise ParseError("bond_dims length inconsistent with n_sites")
    offset = 4 + hlen
    tensors = []
    for i in range(n):
        count = bonds[i] * 2 * bonds[i + 1]
        nbytes = count * 16
        chunk = data[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise ParseError(f"blob truncated at site {i}")
        tensors.append(
            np.frombuffer(chunk, dtype="<c16").reshape(bonds[i], 2, bonds[i + 1]).copy()
        )
        offset += nbytes
    if offset != len(data):
        raise ParseError("trailing bytes after final tensor")
    return MPS(tensors, canonical_center=header.get("canonical_center"))


def save_mps(mps: MPS, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(mps))


def load_mps(path) -> MPS:
    with open(path, "rb") as fh:
        return deserialize(fh.read())
