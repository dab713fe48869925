"""Two-site time-dependent variational principle integrator.

Each step runs a symmetric pair of half-sweeps: every neighbouring pair
is evolved forward by dt/2 under its effective Hamiltonian, split by SVD
under the truncation policy, and the single-site remainder is evolved
backward by dt/2, first left-to-right and then mirrored.  All local
exponentials use a Lanczos (Krylov) approximation of exp(-i dt H_eff) v;
if a local exponential cannot converge, its step is halved internally and
the event is counted in the diagnostics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .heff import SweepWorkspace, apply_heff_one
from .mpo import MPO
from .mps import MPS, TruncationPolicy, _split_matrix, canonicalize, expectation


@dataclass(frozen=True)
class TdvpConfig:
    dt: float = 0.05
    n_steps: int = 1
    policy: TruncationPolicy = TruncationPolicy(chi_max=128)
    krylov_tol: float = 1e-10
    krylov_max_dim: int = 40
    record_energy: bool = True

    def __post_init__(self):
        if self.dt == 0:
            raise ValueError("dt must be nonzero")
        if self.n_steps < 0:
            raise ValueError("n_steps must be >= 0")


@dataclass
class TdvpDiagnostics:
    steps: list[dict] = field(default_factory=list)
    krylov_shrinks: int = 0

    def append(self, **kw) -> None:
        self.steps.append(kw)

    @property
    def max_bond(self) -> int:
        return max((s["max_bond"] for s in self.steps), default=0)

    @property
    def total_truncation(self) -> float:
        return float(sum(s["truncation_error"] for s in self.steps))

    def to_json(self) -> str:
        return json.dumps(
            {"steps": self.steps, "krylov_shrinks": self.krylov_shrinks}, indent=2
        )


def local_krylov_exp(
    apply,
    vec: np.ndarray,
    dt: float,
    tol: float = 1e-10,
    max_dim: int = 40,
) -> np.ndarray:
    """Approximate exp(-i dt A) v for a Hermitian map given as a callable.

    The Lanczos space grows until successive approximants differ by less
    than ``tol`` (relative to the input norm); exact invariant subspaces
    terminate early.  Raises ConvergenceError, reporting the tolerance
    actually achieved, if ``max_dim`` vectors are not enough.
    """
    v = np.asarray(vec, dtype=complex).reshape(-1)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0 or dt == 0.0:
        return v.copy()
    basis = [v / nrm]
    alphas: list[float] = []
    betas: list[float] = []
    approx_prev: np.ndarray | None = None
    delta = np.inf
    w = apply(basis[0])
    for m in range(1, max_dim + 1):
        alpha = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(alpha)
        w = w - alpha * basis[-1]
        if len(basis) > 1:
            w = w - betas[-1] * basis[-2]
        for b in basis:  # full reorthogonalization
            w = w - np.vdot(b, w) * b
        beta = float(np.linalg.norm(w))

        t = np.diag(alphas).astype(float)
        if betas:
            t += np.diag(betas, 1) + np.diag(betas, -1)
        evals, evecs = np.linalg.eigh(t)
        weights = evecs @ (np.exp(-1j * dt * evals) * evecs[0, :])
        approx = sum(c * b for c, b in zip(weights, basis))

        if approx_prev is not None:
            delta = float(np.linalg.norm(approx - approx_prev))
            if delta <= tol:
                return nrm * approx
        if beta <= 1e-14 * max(1.0, float(np.max(np.abs(evals)))):
            return nrm * approx  # invariant subspace: result is exact
        if len(basis) >= v.shape[0]:
            return nrm * approx  # full space spanned
        approx_prev = approx
        if m < max_dim:
            basis.append(w / beta)
            betas.append(beta)
            w = apply(basis[-1])
    raise ConvergenceError(
        f"Krylov exponential stalled at delta={delta:.2e} (target {tol:.2e}) "
        f"with {max_dim} vectors"
    )


def _krylov_exp_robust(apply, vec, dt, cfg: TdvpConfig,
                       diagnostics: TdvpDiagnostics, depth: int = 0) -> np.ndarray:
    """Krylov exponential with internal step halving on breakdown."""
    try:
        return local_krylov_exp(apply, vec, dt, cfg.krylov_tol, cfg.krylov_max_dim)
    except ConvergenceError:
        if depth >= 6:
            raise
        diagnostics.krylov_shrinks += 1
        half = _krylov_exp_robust(apply, vec, dt / 2, cfg, diagnostics, depth + 1)
        return _krylov_exp_robust(apply, half, dt / 2, cfg, diagnostics, depth + 1)


def tdvp_evolve(h: MPO, psi: MPS, cfg: TdvpConfig) -> tuple[MPS, TdvpDiagnostics]:
    """Evolve |psi> by exp(-i H dt n_steps) with two-site TDVP sweeps."""
    if h.n_sites != psi.n_sites:
        raise ValueError("operator and state length differ")
    state = canonicalize(psi, "right")
    nrm = np.linalg.norm(state.tensors[0])
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError("tdvp_evolve expects a normalized state")
    state.tensors[0] = state.tensors[0] / nrm

    diagnostics = TdvpDiagnostics()
    ws = SweepWorkspace(state, h)
    for step in range(cfg.n_steps):
        trunc = 0.0
        trunc += _half_sweep(ws, cfg, diagnostics, forward=True)
        trunc += _half_sweep(ws, cfg, diagnostics, forward=False)
        # center is back at site 0; truncation removes weight, restore it
        center_norm = float(np.linalg.norm(ws.tensors[0]))
        ws.tensors[0] = ws.tensors[0] / center_norm
        current = ws.to_mps(center=0)
        entry = {
            "step": step + 1,
            "time": (step + 1) * cfg.dt,
            "norm_drift": abs(center_norm - 1.0),
            "max_bond": current.max_bond,
            "truncation_error": float(np.sqrt(trunc)),
        }
        if cfg.record_energy:
            entry["energy"] = expectation(current, h).real
        diagnostics.append(**entry)
    return ws.to_mps(center=0), diagnostics


def _one_site_matvec_for(ws: SweepWorkspace, i: int, shape):
    left, right = ws.left[i], ws.right[i]
    w = ws.mpo.tensors[i]

    def matvec(vec: np.ndarray) -> np.ndarray:
        return apply_heff_one(left, w, right, vec.reshape(shape)).reshape(-1)

    return matvec


def _half_sweep(ws: SweepWorkspace, cfg: TdvpConfig,
                diagnostics: TdvpDiagnostics, forward: bool) -> float:
    """One direction of the symmetric two-site update; returns discarded weight."""
    n = ws.n
    dt2 = cfg.dt / 2.0
    if n == 1:
        matvec = _one_site_matvec_for(ws, 0, ws.tensors[0].shape)
        evolved = _krylov_exp_robust(
            matvec, ws.tensors[0].reshape(-1), dt2, cfg, diagnostics
        )
        ws.tensors[0] = evolved.reshape(ws.tensors[0].shape)
        return 0.0

    trunc = 0.0
    sites = range(n - 1) if forward else range(n - 2, -1, -1)
    for i in sites:
        matvec, _, shape = ws.two_site_matvec(i)
        theta = np.tensordot(ws.tensors[i], ws.tensors[i + 1], axes=([2], [0]))
        theta = _krylov_exp_robust(
            matvec, theta.reshape(-1), dt2, cfg, diagnostics
        ).reshape(shape)
        l, _, _, r = shape
        u, s, vh, disc = _split_matrix(theta.reshape(l * 2, 2 * r), cfg.policy)
        trunc += disc
        if forward:
            ws.tensors[i] = u.reshape(l, 2, -1)
            center = (s[:, None] * vh).reshape(-1, 2, r)
            ws.refresh_left(i)
            if i < n - 2:
                matvec1 = _one_site_matvec_for(ws, i + 1, center.shape)
                center = _krylov_exp_robust(
                    matvec1, center.reshape(-1), -dt2, cfg, diagnostics
                ).reshape(center.shape)
            ws.tensors[i + 1] = center
        else:
            ws.tensors[i + 1] = vh.reshape(-1, 2, r)
            center = (u * s[None, :]).reshape(l, 2, -1)
            ws.refresh_right(i + 1)
            if i > 0:
                matvec1 = _one_site_matvec_for(ws, i, center.shape)
                center = _krylov_exp_robust(
                    matvec1, center.reshape(-1), -dt2, cfg, diagnostics
                ).reshape(center.shape)
            ws.tensors[i] = center
    return trunc
