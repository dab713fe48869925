"""Circuit extraction from MPS and Trotter gate-resource estimation.

A right-canonical MPS turns into a staircase of unitaries: each site's
isometry (left bond -> physical x right bond) is completed to a unitary
acting on the site qubit plus the qubits that carry the bond register.
For bond dimension 2 every gate is a 2-qubit gate; wider bonds give wider
gates (compiling those into 2-qubit gates is out of scope here).

Resource counting follows the CNOT-ladder construction for exp(-i th/2 P):
a k-local string costs 2(k-1) CNOTs and at most 2k+1 single-qubit gates
per Trotter slice; coupling to an r-qubit meter multiplies only the
central rotation (conjugation pattern), giving r controlled rotations per
term per slice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .mps import MPS
from .pauli import PauliSum, PauliTerm

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S = np.diag([1.0, 1j]).astype(complex)
_BASIS_CHANGE = {"X": _H, "Y": _S @ _H}  # W with P = W Z W^dag


@dataclass(frozen=True)
class Gate:
    matrix: np.ndarray
    qubits: tuple[int, ...]
    label: str

    def __post_init__(self):
        dim = 2 ** len(self.qubits)
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"gate {self.label}: matrix {self.matrix.shape} does not match "
                f"{len(self.qubits)} qubits"
            )


@dataclass
class CircuitPlan:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, matrix: np.ndarray, qubits, label: str) -> None:
        qubits = tuple(int(q) for q in qubits)
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"gate {label}: qubit {q} out of range")
        self.gates.append(Gate(np.asarray(matrix, dtype=complex), qubits, label))

    def validate_unitarity(self, tol: float = 1e-10) -> None:
        for g in self.gates:
            dim = g.matrix.shape[0]
            err = np.max(np.abs(g.matrix @ g.matrix.conj().T - np.eye(dim)))
            if err > tol:
                raise ValueError(f"gate {g.label} is not unitary (err {err:.2e})")

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_qubits": self.n_qubits,
                "gates": [
                    {
                        "label": g.label,
                        "qubits": list(g.qubits),
                        "matrix_re": np.real(g.matrix).reshape(-1).tolist(),
                        "matrix_im": np.imag(g.matrix).reshape(-1).tolist(),
                    }
                    for g in self.gates
                ],
            }
        )


@dataclass(frozen=True)
class ResourceEstimate:
    cnot_count: int
    single_qubit_count_max: int
    controlled_rz_count: int
    trotter_steps: int
    pointer_r: int | None
    per_term: tuple[dict, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "cnot_count": self.cnot_count,
                "single_qubit_count_max": self.single_qubit_count_max,
                "controlled_rz_count": self.controlled_rz_count,
                "trotter_steps": self.trotter_steps,
                "pointer_r": self.pointer_r,
                "per_term": list(self.per_term),
            },
            indent=2,
        )

    def csv_row(self, name: str) -> str:
        return f"{name},{self.cnot_count},{len(self.per_term)}\n"


def complete_isometry(iso: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Extend a matrix with orthonormal columns to a full unitary.

    The given columns are kept verbatim as the first columns; the
    completion Gram-Schmidts the canonical basis in index order, so the
    result is deterministic.
    """
    iso = np.asarray(iso, dtype=complex)
    n, k = iso.shape
    if k > n:
        raise ValueError("more columns than rows")
    gram = iso.conj().T @ iso
    if np.max(np.abs(gram - np.eye(k))) > tol:
        raise ValueError("columns are not orthonormal")
    cols = [iso[:, j] for j in range(k)]
    for e in range(n):
        if len(cols) == n:
            break
        v = np.zeros(n, dtype=complex)
        v[e] = 1.0
        for c in cols:
            v = v - np.vdot(c, v) * c
        nrm = np.linalg.norm(v)
        if nrm > 1e-7:
            cols.append(v / nrm)
    if len(cols) != n:
        raise ValueError("failed to complete the isometry")
    return np.stack(cols, axis=1)


def mps_to_staircase(mps: MPS) -> CircuitPlan:
    """Gate staircase preparing the MPS from |0...0>.

    Requires right-canonical input.  Gate i consumes the bond register
    |alpha_{i-1}> (held on the leading window qubits) and emits the site's
    physical qubit plus the next bond register; applying the plan in order
    to |0...0> reproduces the state exactly.
    """
    if not mps.is_right_canonical():
        raise ValueError("staircase extraction requires a right-canonical MPS")
    n = mps.n_sites
    plan = CircuitPlan(n_qubits=n)

    for i in range(n):
        t = mps.tensors[i]  # (chi_l, 2, chi_r)
        chi_l, _, chi_r = t.shape
        m_in = max(int(np.ceil(np.log2(chi_l))), 0)
        m_out = max(int(np.ceil(np.log2(chi_r))), 0)
        if i < n - 1:
            width = 1 + max(m_in, m_out)
        else:
            width = max(m_in, 1)  # last site reuses its own qubit for the bond
        dim = 2**width
        first = i if i < n - 1 else n - width
        support = tuple(range(first, first + width))

        # isometry columns: input |alpha, 0...> -> sum_{s,b} T[alpha, s, b] |s, b, 0...>
        iso = np.zeros((dim, chi_l), dtype=complex)
        for alpha in range(chi_l):
            for s in range(2):
                for b in range(chi_r):
                    if i < n - 1:
                        row = s * 2 ** (width - 1) + b * 2 ** (width - 1 - m_out)
                    else:
                        row = s  # chi_r == 1 at the right edge
                    iso[row, alpha] += t[alpha, s, b]
        completed = complete_isometry(iso)

        # place the designated columns at the window indices of |alpha, 0...>
        unitary = np.zeros((dim, dim), dtype=complex)
        used = set()
        for alpha in range(chi_l):
            if i < n - 1:
                col = alpha * 2 ** (width - m_in) if m_in else 0
            else:
                col = alpha
            unitary[:, col] = completed[:, alpha]
            used.add(col)
        spare = iter(completed[:, j] for j in range(chi_l, dim))
        for col in range(dim):
            if col not in used:
                unitary[:, col] = next(spare)
        plan.add(unitary, support, f"U{i + 1}")

    plan.validate_unitarity()
    return plan


def _cnot(control_first: bool) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    if control_first:
        m[0, 0] = m[1, 1] = 1.0
        m[2, 3] = m[3, 2] = 1.0
    else:
        m[0, 0] = m[3, 1] = m[2, 2] = m[1, 3] = 1.0
    return m


def _rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def _controlled(u: np.ndarray) -> np.ndarray:
    dim = u.shape[0]
    out = np.eye(2 * dim, dtype=complex)
    out[dim:, dim:] = u
    return out


def pauli_exponential_template(
    term: PauliTerm,
    angle: float,
    pointer_qubit: int | None = None,
    n_qubits: int | None = None,
) -> CircuitPlan:
    """Gate sequence for exp(-i (angle/2) P), optionally meter-controlled.

    Layout: basis-change layer, CNOT ladder onto the last support qubit, a
    central Rz(angle), and the mirrored layers.  With ``pointer_qubit=j``
    (1-based meter bit) only the central rotation becomes controlled and
    its angle shrinks to 2^{-j} angle, realizing exp(-i (angle/2) 2^{-j}
    P (x) |1><1|_meter); the meter qubit is appended after the system.
    """
    if term.locality == 0:
        raise ValueError("cannot build a template for the identity term")
    support = [q for q, _ in term.operators]
    letters = dict(term.operators)
    n_sys = (max(support) + 1) if n_qubits is None else n_qubits
    total = n_sys + (1 if pointer_qubit is not None else 0)
    meter = n_sys  # meter qubit index when present
    plan = CircuitPlan(n_qubits=total)

    for q in support:
        if letters[q] in _BASIS_CHANGE:
            w = _BASIS_CHANGE[letters[q]]
            plan.add(w.conj().T, (q,), f"basis({letters[q]}{q})^dag")
    for a, b in zip(support[:-1], support[1:]):
        plan.add(_cnot(control_first=True), (a, b), f"CNOT({a}->{b})")
    target = support[-1]
    if pointer_qubit is None:
        plan.add(_rz(angle), (target,), f"Rz({angle:.6g})@{target}")
    else:
        if pointer_qubit < 1:
            raise ValueError("pointer qubit index is 1-based")
        eff = angle * 2.0 ** (-pointer_qubit)
        plan.add(
            _controlled(_rz(eff)),
            (meter, target),
            f"CRz({eff:.6g})@({meter}->{target})",
        )
    for a, b in reversed(list(zip(support[:-1], support[1:]))):
        plan.add(_cnot(control_first=True), (a, b), f"CNOT({a}->{b})")
    for q in reversed(support):
        if letters[q] in _BASIS_CHANGE:
            w = _BASIS_CHANGE[letters[q]]
            plan.add(w, (q,), f"basis({letters[q]}{q})")
    return plan


def trotter_resources(
    h: PauliSum,
    n_steps: int,
    pointer_r: int | None = None,
    use_conjugation: bool = True,
) -> ResourceEstimate:
    """Gate counts for first-order Trotter slices of H (or H (x) p).

    Identity terms only shift the global phase and are excluded.  With a
    meter attached and the conjugation pattern enabled, the r controlled
    rotations of one term share a single ladder/basis sandwich; disabling
    the pattern repeats the sandwich for every meter bit.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    per_term = []
    cnot_total = 0
    single_total = 0
    crz_total = 0
    for term in h.terms:
        k = term.locality
        if k == 0:
            continue
        basis_gates = 2 * sum(1 for _, o in term.operators if o in ("X", "Y"))
        if pointer_r is None:
            cnots = 2 * (k - 1)
            singles = basis_gates + 1  # central Rz
            crz = 0
        elif use_conjugation:
            cnots = 2 * (k - 1)
            singles = basis_gates
            crz = pointer_r
        else:
            cnots = pointer_r * 2 * (k - 1)
            singles = pointer_r * basis_gates
            crz = pointer_r
        per_term.append(
            {
                "term": " ".join(f"{o}{q}" for q, o in term.operators),
                "locality": k,
                "cnot": cnots,
                "single_qubit_max": singles,
                "controlled_rz": crz,
            }
        )
        cnot_total += cnots
        single_total += singles
        crz_total += crz
    return ResourceEstimate(
        cnot_count=n_steps * cnot_total,
        single_qubit_count_max=n_steps * single_total,
        controlled_rz_count=n_steps * crz_total,
        trotter_steps=n_steps,
        pointer_r=pointer_r,
        per_term=tuple(per_term),
    )
