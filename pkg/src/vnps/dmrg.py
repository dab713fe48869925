"""Two-site variational ground-state search, plus sequential excited states.

The local eigenproblem at each bond is solved with a hand-rolled Lanczos
iteration (full reorthogonalization, deterministic restarts) so that runs
are bit-reproducible for a fixed seed; scipy's ARPACK wrapper is kept out
of the inner loop on purpose.

Excited states follow the projected-operator route: after each converged
state the operator is wrapped as (I - |O><O|) H (I - |O><O|).  Because the
wrapped operator has the previous states at eigenvalue 0, the search runs
on a spectrum shifted well below zero and energies are re-measured with
the original operator afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .heff import SweepWorkspace
from .mpo import MPO, mpo_scale, mpo_sum, identity_mpo, projected_hamiltonian_mpo
from .mps import (
    MPS,
    TruncationPolicy,
    _split_matrix,
    canonicalize,
    expectation,
    inner,
    random_mps,
)


@dataclass(frozen=True)
class DmrgConfig:
    policy: TruncationPolicy = TruncationPolicy(chi_max=64)
    max_sweeps: int = 50
    energy_tol: float = 1e-8
    local_solver_tol: float = 1e-11
    local_solver_max_iters: int = 200
    seed: int = 7

    def __post_init__(self):
        if self.energy_tol <= 0 or self.local_solver_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


@dataclass
class DmrgReport:
    energies: list[float] = field(default_factory=list)
    converged: bool = False
    final_bond_dims: list[int] = field(default_factory=list)
    truncation_errors: list[float] = field(default_factory=list)
    solver_warnings: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "energies": self.energies,
                "converged": self.converged,
                "final_bond_dims": self.final_bond_dims,
                "truncation_errors": self.truncation_errors,
                "solver_warnings": self.solver_warnings,
            },
            indent=2,
        )


@dataclass
class LanczosResult:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    converged: bool
    matvecs: int


def lanczos_smallest(
    apply,
    dim: int,
    tol: float = 1e-11,
    max_iters: int = 200,
    v0: np.ndarray | None = None,
    seed: int = 0,
) -> LanczosResult:
    """Smallest eigenpair of a Hermitian linear map.

    Full reorthogonalization keeps the basis clean; when the Krylov space
    hits ``max_iters`` vectors without converging the result carries the
    best Ritz pair and ``converged=False`` instead of raising, so callers
    can keep the best-so-far.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if v0 is not None:
        v = np.asarray(v0, dtype=complex).reshape(-1).copy()
        if v.shape[0] != dim:
            raise ValueError("v0 has the wrong length")
    else:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("start vector is zero")
    v = v / nrm

    if dim == 1:
        av = apply(v)
        lam = float(np.real(np.vdot(v, av)))
        return LanczosResult(lam, v, float(np.linalg.norm(av - lam * v)), True, 1)

    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    matvecs = 0
    norm_est = 1.0
    best = None

    w = apply(v)
    matvecs += 1
    while True:
        alpha = float(np.real(np.vdot(basis[-1], w)))
        alphas.append(alpha)
        w = w - alpha * basis[-1]
        if len(basis) > 1:
            w = w - betas[-1] * basis[-2]
        # full reorthogonalization
        for b in basis:
            w = w - np.vdot(b, w) * b
        beta = float(np.linalg.norm(w))

        t = np.diag(alphas).astype(float)
        if betas:
            off = np.array(betas)
            t += np.diag(off, 1) + np.diag(off, -1)
        evals, evecs = np.linalg.eigh(t)
        lam, s = float(evals[0]), evecs[:, 0]
        norm_est = max(norm_est, float(np.max(np.abs(evals))))
        resid = abs(beta * s[-1])
        best = (lam, s)
        if resid <= tol * norm_est or beta <= 1e-14 * norm_est:
            vec = sum(c * b for c, b in zip(s, basis))
            vec = vec / np.linalg.norm(vec)
            return LanczosResult(lam, vec, resid, True, matvecs)
        if matvecs >= max_iters or len(basis) >= dim:
            vec = sum(c * b for c, b in zip(s, basis))
            vec = vec / np.linalg.norm(vec)
            return LanczosResult(lam, vec, resid, False, matvecs)

        basis.append(w / beta)
        betas.append(beta)
        w = apply(basis[-1])
        matvecs += 1


def dmrg_ground_state(
    h: MPO, init: MPS, cfg: DmrgConfig
) -> tuple[MPS, float, DmrgReport]:
    """Two-site DMRG sweeps minimizing <psi|H|psi>.

    Stops when the per-sweep energy change drops below ``energy_tol`` or
    after ``max_sweeps``.  The returned energy is re-measured on the final
    state.
    """
    if h.n_sites != init.n_sites:
        raise ValueError("operator and state length differ")
    if init.norm() < 1e-14:
        raise ValueError("initial state has zero norm")
    psi = canonicalize(init, "right")
    psi.tensors[0] = psi.tensors[0] / np.linalg.norm(psi.tensors[0])
    ws = SweepWorkspace(psi, h)
    report = DmrgReport()
    n = ws.n
    previous = None

    for sweep in range(cfg.max_sweeps):
        sweep_trunc = 0.0
        # left-to-right
        for i in range(n - 1):
            sweep_trunc += _optimize_bond(ws, i, cfg, forward=True)
        # right-to-left
        for i in range(n - 2, -1, -1):
            sweep_trunc += _optimize_bond(ws, i, cfg, forward=False)

        state = ws.to_mps(center=0)
        energy = expectation(state, h).real
        report.energies.append(energy)
        report.truncation_errors.append(float(np.sqrt(sweep_trunc)))
        if previous is not None and abs(previous - energy) < cfg.energy_tol:
            report.converged = True
            previous = energy
            break
        previous = energy

    final = ws.to_mps(center=0)
    nrm = final.norm()
    final.tensors[0] = final.tensors[0] / nrm
    energy = expectation(final, h).real
    report.final_bond_dims = final.bond_dims
    return final, energy, report


def _optimize_bond(ws: SweepWorkspace, i: int, cfg: DmrgConfig, forward: bool) -> float:
    """Solve the two-site problem at (i, i+1) and split; returns discarded weight."""
    matvec, dim, shape = ws.two_site_matvec(i)
    theta0 = np.tensordot(ws.tensors[i], ws.tensors[i + 1], axes=([2], [0]))
    result = lanczos_smallest(
        matvec,
        dim,
        tol=cfg.local_solver_tol,
        max_iters=cfg.local_solver_max_iters,
        v0=theta0.reshape(-1),
        seed=cfg.seed,
    )
    theta = result.eigenvector.reshape(shape)
    l, _, _, r = shape
    u, s, vh, disc = _split_matrix(theta.reshape(l * 2, 2 * r), cfg.policy)
    s = s / np.linalg.norm(s)
    if forward:
        ws.tensors[i] = u.reshape(l, 2, -1)
        ws.tensors[i + 1] = (s[:, None] * vh).reshape(-1, 2, r)
        ws.refresh_left(i)
    else:
        ws.tensors[i + 1] = vh.reshape(-1, 2, r)
        ws.tensors[i] = (u * s[None, :]).reshape(l, 2, -1)
        ws.refresh_right(i + 1)
    return disc


def dmrg_excited_states(
    h: MPO,
    n_states: int,
    cfg: DmrgConfig,
    init: MPS | None = None,
    shift: float | None = None,
) -> list[tuple[MPS, float]]:
    """Lowest ``n_states`` eigenstates by successive projected optimization.

    ``shift`` must place every eigenvalue of interest below zero so the
    projector kernel (at 0) never wins the minimization; by default it is
    estimated from the operator's own scale.
    """
    if n_states < 1:
        raise ValueError("n_states must be >= 1")
    if shift is None:
        # Frobenius norm dominates the spectral norm, so this is certain
        from .mpo import mpo_frobenius_norm

        shift = float(mpo_frobenius_norm(h)) + 1.0
    shifted = mpo_sum(h, mpo_scale(identity_mpo(h.n_sites), -shift))
    states: list[tuple[MPS, float]] = []
    current = shifted
    for m in range(n_states):
        start = init if (init is not None and m == 0) else random_mps(
            h.n_sites, chi=2, seed=cfg.seed + 17 * m
        )
        psi, _, _ = dmrg_ground_state(current, start, cfg)
        energy = expectation(psi, h).real
        states.append((psi, energy))
        if m + 1 < n_states:
            current = projected_hamiltonian_mpo(current, psi)
    return states
