"""Second-quantized electronic-structure input and the fermion-to-qubit map.

Integrals are ingested from FCIDUMP files (chemist ordering, 8-fold real
permutation symmetry); computing them from geometry and basis sets is a
quantum-chemistry task outside this package.  The spin-summed Hamiltonian
reconstructed from a dump is

    H = E_const + sum_{kl,s} h_kl f+_{ks} f_{ls}
        + 1/2 sum_{ijkl,st} (ij|kl) f+_{is} f+_{kt} f_{lt} f_{js}

with spatial orbital p mapped to qubits 2p (alpha) and 2p+1 (beta).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .pauli import PauliSum, PauliTerm, simplify

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class FermionIntegrals:
    """One-/two-body integrals plus scalar offset, in Hartree.

    ``two_body[i, j, k, l]`` is the chemist-ordered integral (ij|kl).
    ``constant`` holds nuclear repulsion plus any folded-in core energy.
    """

    n_spatial_orbitals: int
    n_electrons: int
    constant: float
    one_body: np.ndarray
    two_body: np.ndarray

    def __post_init__(self):
        n = self.n_spatial_orbitals
        if self.one_body.shape != (n, n):
            raise ValueError("one_body shape mismatch")
        if self.two_body.shape != (n, n, n, n):
            raise ValueError("two_body shape mismatch")

    def validate(self, tol: float = SYMMETRY_TOL) -> None:
        h, g = self.one_body, self.two_body
        if np.max(np.abs(h - h.T)) > tol:
            raise ValueError("one_body is not symmetric")
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if np.max(np.abs(g - g.transpose(perm))) > tol:
                raise ValueError("two_body violates 8-fold permutation symmetry")


_NAMELIST_INT = {"NORB", "NELEC", "MS2"}


def parse_fcidump(text: str) -> FermionIntegrals:
    """Read an FCIDUMP-format integral file.

    The namelist header supplies NORB/NELEC; data lines are
    ``value i j k l`` with 1-based indices, ``k=l=0`` marking one-body
    entries and the all-zero line the scalar constant.  Each entry is
    spread over all symmetry-equivalent slots.
    """
    lines = text.splitlines()
    header_end = None
    header_text = []
    for lineno, raw in enumerate(lines, start=1):
        header_text.append(raw)
        if "&END" in raw.upper() or raw.strip() == "/" or raw.strip().endswith("/"):
            header_end = lineno
            break
    if header_end is None or "&FCI" not in " ".join(header_text).upper():
        raise ParseError("missing &FCI ... &END namelist header")

    fields: dict[str, int] = {}
    joined = " ".join(header_text)
    for key in _NAMELIST_INT:
        m = re.search(rf"{key}\s*=\s*(-?\d+)", joined, re.IGNORECASE)
        if m:
            fields[key] = int(m.group(1))
    if "NORB" not in fields:
        raise ParseError("header does not define NORB", header_end)
    n = fields["NORB"]
    if n < 1:
        raise ParseError(f"NORB={n} out of range", header_end)
    n_electrons = fields.get("NELEC", 0)

    one_body = np.zeros((n, n))
    two_body = np.zeros((n, n, n, n))
    constant = 0.0

    for lineno in range(header_end, len(lines)):
        line = lines[lineno].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(f"expected 'value i j k l', got {len(parts)} fields", lineno + 1)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(p) for p in parts[1:])
        except ValueError as exc:
            raise ParseError(str(exc), lineno + 1) from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > n:
                raise ParseError(f"orbital index {idx} out of range 0..{n}", lineno + 1)
        if i == j == k == l == 0:
            constant = value
        elif k == 0 and l == 0:
            if j == 0:
                continue  # orbital-energy record, not part of H
            one_body[i - 1, j - 1] = value
            one_body[j - 1, i - 1] = value
        elif i == 0 or j == 0 or k == 0 or l == 0:
            raise ParseError("partial zero indices are not a valid record", lineno + 1)
        else:
            a, b, c, d = i - 1, j - 1, k - 1, l - 1
            for p, q, r, s in (
                (a, b, c, d), (b, a, c, d), (a, b, d, c), (b, a, d, c),
                (c, d, a, b), (d, c, a, b), (c, d, b, a), (d, c, b, a),
            ):
                two_body[p, q, r, s] = value

    out = FermionIntegrals(n, n_electrons, constant, one_body, two_body)
    out.validate()
    return out


def load_fcidump(path) -> FermionIntegrals:
    with open(path, "r", encoding="ascii") as fh:
        return parse_fcidump(fh.read())


def freeze_core(
    integrals: FermionIntegrals, n_frozen: int, n_active: int
) -> FermionIntegrals:
    """Fold the lowest ``n_frozen`` doubly-occupied orbitals into constants.

    Standard frozen-core reduction: the constant gains
    sum_i 2 h_ii + sum_ij (2 (ii|jj) - (ij|ji)) over frozen orbitals, the
    active one-body matrix gains the mean field of the frozen shell, and
    the two-body tensor is restricted to the active window.
    """
    n = integrals.n_spatial_orbitals
    if n_frozen < 0 or n_active < 0 or n_frozen + n_active > n:
        raise ValueError(
            f"window n_frozen={n_frozen}, n_active={n_active} exceeds {n} orbitals"
        )
    if n_frozen == 0 and n_active == n:
        return integrals

    h, g = integrals.one_body, integrals.two_body
    frozen = range(n_frozen)
    active = slice(n_frozen, n_frozen + n_active)

    core = 2.0 * sum(h[i, i] for i in frozen)
    core += sum(
        2.0 * g[i, i, j, j] - g[i, j, j, i] for i in frozen for j in frozen
    )

    h_eff = h[active, active].copy()
    for i in frozen:
        h_eff += 2.0 * g[active, active, i, i] - g[active, i, i, active]

    return FermionIntegrals(
        n_spatial_orbitals=n_active,
        n_electrons=max(integrals.n_electrons - 2 * n_frozen, 0),
        constant=integrals.constant + core,
        one_body=h_eff,
        two_body=g[active, active, active, active].copy(),
    )


def _jw_ladder(mode: int, dagger: bool) -> list[PauliTerm]:
    """Jordan-Wigner image of f_mode (or f+_mode) as two Pauli strings.

    f+ = Z...Z (X - iY)/2 and f = Z...Z (X + iY)/2 on the mode's qubit,
    with the Z string on all lower modes carrying the parity.
    """
    zs = {q: "Z" for q in range(mode)}
    sign = -1j if dagger else 1j
    return [
        PauliTerm.from_map(0.5, {**zs, mode: "X"}),
        PauliTerm.from_map(0.5 * sign, {**zs, mode: "Y"}),
    ]


def _product(factors: list[list[PauliTerm]]) -> list[PauliTerm]:
    acc = [PauliTerm(1.0)]
    for factor in factors:
        acc = [a * b for a in acc for b in factor]
    return acc


def jordan_wigner(integrals: FermionIntegrals, cutoff: float = 1e-12) -> PauliSum:
    """Map the spin-summed electronic Hamiltonian onto qubit operators.

    Spatial orbital p becomes spin-orbitals 2p (alpha) and 2p+1 (beta);
    the returned sum is simplified (merged, pruned, deterministic order)
    and Hermitian.
    """
    integrals.validate()
    n = integrals.n_spatial_orbitals
    n_q = 2 * n
    h, g = integrals.one_body, integrals.two_body

    terms: list[PauliTerm] = [PauliTerm(integrals.constant)]

    for k in range(n):
        for l in range(n):
            if abs(h[k, l]) < cutoff:
                continue
            for s in range(2):
                factors = [_jw_ladder(2 * k + s, True), _jw_ladder(2 * l + s, False)]
                terms.extend(
                    PauliTerm(h[k, l] * t.coefficient, t.operators)
                    for t in _product(factors)
                )

    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    v = g[i, j, k, l]
                    if abs(v) < cutoff:
                        continue
                    for s in range(2):
                        for t_spin in range(2):
                            p, q = 2 * i + s, 2 * k + t_spin
                            r, u = 2 * l + t_spin, 2 * j + s
                            if p == q or r == u:
                                continue  # f+f+ or ff on one mode vanishes
                            factors = [
                                _jw_ladder(p, True),
                                _jw_ladder(q, True),
                                _jw_ladder(r, False),
                                _jw_ladder(u, False),
                            ]
                            terms.extend(
                                PauliTerm(0.5 * v * t.coefficient, t.operators)
                                for t in _product(factors)
                            )

    return simplify(PauliSum(tuple(terms), n_q), cutoff=cutoff)


def hartree_fock_bits(n_qubits: int, n_electrons: int) -> list[int]:
    """Occupation bit-string of the Hartree-Fock reference (interleaved spins)."""
    if not 0 <= n_electrons <= n_qubits:
        raise ValueError("electron count out of range")
    return [1] * n_electrons + [0] * (n_qubits - n_electrons)
