"""Environment bookkeeping and effective-Hamiltonian actions for sweeps.

Both the variational ground-state search and the time evolver walk the
chain site by site; the pieces they share live here: left/right
environment tensors of the <psi|H|psi> sandwich and the matrix-free
application of the one- and two-site effective Hamiltonians.

Index conventions:
  MPS tensor  T[l, p, r]
  MPO tensor  W[l, p_out, p_in, r]
  left env    L[bra, mpo, ket]   (block strictly left of a site)
  right env   R[bra, mpo, ket]   (block strictly right of a site)
"""

from __future__ import annotations

import numpy as np

from .mpo import MPO
from .mps import MPS


def left_edge() -> np.ndarray:
    return np.ones((1, 1, 1), dtype=complex)


def right_edge() -> np.ndarray:
    return np.ones((1, 1, 1), dtype=complex)


def extend_left(env: np.ndarray, w: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Absorb one site into a left environment."""
    out = np.tensordot(env, t.conj(), axes=([0], [0]))  # (m, k, po, rb)
    out = np.tensordot(out, w, axes=([0, 2], [0, 1]))  # (k, rb, pi, rm)
    out = np.tensordot(out, t, axes=([0, 2], [0, 1]))  # (rb, rm, rk)
    return out


def extend_right(env: np.ndarray, w: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Absorb one site into a right environment."""
    out = np.tensordot(t.conj(), env, axes=([2], [0]))  # (lb, po, m, k)
    out = np.tensordot(w, out, axes=([1, 3], [1, 2]))  # (lm, pi, lb, k)
    out = np.tensordot(out, t, axes=([1, 3], [1, 2]))  # (lm, lb, lk)
    return np.transpose(out, (1, 0, 2))


def build_right_envs(psi: MPS, mpo: MPO) -> list[np.ndarray]:
    """right_envs[i] = environment of everything right of site i."""
    n = psi.n_sites
    envs: list[np.ndarray] = [None] * n
    envs[n - 1] = right_edge()
    for i in range(n - 1, 0, -1):
        envs[i - 1] = extend_right(envs[i], mpo.tensors[i], psi.tensors[i])
    return envs


def apply_heff_one(left: np.ndarray, w: np.ndarray, right: np.ndarray,
                   x: np.ndarray) -> np.ndarray:
    """One-site effective Hamiltonian acting on x[l, p, r]."""
    out = np.tensordot(left, x, axes=([2], [0]))  # (b, m, p, r)
    out = np.tensordot(out, w, axes=([1, 2], [0, 2]))  # (b, r, po, rm)
    out = np.tensordot(out, right, axes=([1, 3], [2, 1]))  # (b, po, rb)
    return out


def apply_heff_two(left: np.ndarray, w1: np.ndarray, w2: np.ndarray,
                   right: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Two-site effective Hamiltonian acting on x[l, p, q, r]."""
    out = np.tensordot(left, x, axes=([2], [0]))  # (b, m, p, q, r)
    out = np.tensordot(out, w1, axes=([1, 2], [0, 2]))  # (b, q, r, po, m2)
    out = np.tensordot(out, w2, axes=([4, 1], [0, 2]))  # (b, r, po, qo, m3)
    out = np.tensordot(out, right, axes=([1, 4], [2, 1]))  # (b, po, qo, rb)
    return out


class SweepWorkspace:
    """Mutable sweep state: tensors plus incrementally-updated environments.

    The MPS must enter right-canonical (center at site 0); the workspace
    keeps ``left[i]``/``right[i]`` consistent with the current tensors as
    the center moves.
    """

    def __init__(self, psi: MPS, mpo: MPO):
        if psi.n_sites != mpo.n_sites:
            raise ValueError("state and operator length differ")
        self.tensors = [t.copy() for t in psi.tensors]
        self.mpo = mpo
        self.n = psi.n_sites
        self.left: list[np.ndarray] = [None] * self.n
        self.left[0] = left_edge()
        self.right = build_right_envs(psi, mpo)

    def refresh_left(self, i: int) -> None:
        """Recompute left[i+1] from left[i] and the current site-i tensor."""
        if i + 1 < self.n:
            self.left[i + 1] = extend_left(
                self.left[i], self.mpo.tensors[i], self.tensors[i]
            )

    def refresh_right(self, i: int) -> None:
        """Recompute right[i-1] from right[i] and the current site-i tensor."""
        if i - 1 >= 0:
            self.right[i - 1] = extend_right(
                self.right[i], self.mpo.tensors[i], self.tensors[i]
            )

    def two_site_matvec(self, i: int):
        left, right = self.left[i], self.right[i + 1]
        w1, w2 = self.mpo.tensors[i], self.mpo.tensors[i + 1]
        shape = (
            self.tensors[i].shape[0], 2, 2, self.tensors[i + 1].shape[2],
        )

        def matvec(vec: np.ndarray) -> np.ndarray:
            x = vec.reshape(shape)
            return apply_heff_two(left, w1, w2, right, x).reshape(-1)

        dim = int(np.prod(shape))
        return matvec, dim, shape

    def one_site_matvec(self, i: int):
        left, right = self.left[i], self.right[i]
        w = self.mpo.tensors[i]
        shape = self.tensors[i].shape

        def matvec(vec: np.ndarray) -> np.ndarray:
            x = vec.reshape(shape)
            return apply_heff_one(left, w, right, x).reshape(-1)

        dim = int(np.prod(shape))
        return matvec, dim, shape

    def to_mps(self, center: int | None) -> MPS:
        return MPS([t.copy() for t in self.tensors], canonical_center=center)
