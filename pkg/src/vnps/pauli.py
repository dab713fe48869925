"""Weighted sums of Pauli strings on a fixed qubit register.

``PauliSum`` is the common currency of the package: spin models, mapped
electronic-structure Hamiltonians, and the operators derived from them
(shifted/scaled copies, the system half of the coupled system+pointer
operator) are all held in this form before conversion to MPOs or dense
matrices.

Conventions:
  - qubit indices are 0-based; qubit 0 is the most significant bit of any
    dense representation,
  - coefficients below ``COEFF_CUTOFF`` are dropped by ``simplify``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

from .errors import ParseError

COEFF_CUTOFF = 1e-12
HERMITIAN_TOL = 1e-12

_LETTERS = ("X", "Y", "Z")

# single-qubit products: (A, B) -> (phase, C) with A*B = phase * C
_MUL_TABLE = {
    ("X", "X"): (1.0, None),
    ("Y", "Y"): (1.0, None),
    ("Z", "Z"): (1.0, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliTerm:
    """A coefficient times a tensor product of single-qubit Paulis.

    ``operators`` maps qubit index to one of 'X', 'Y', 'Z'; qubits not
    present carry the identity.  An empty map is an identity term.
    """

    coefficient: complex
    operators: tuple[tuple[int, str], ...] = field(default=())

    def __post_init__(self):
        ops = tuple(sorted((int(q), o) for q, o in dict(self.operators).items()))
        for q, o in ops:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if o not in _LETTERS:
                raise ValueError(f"unknown Pauli letter {o!r}")
        if len({q for q, _ in ops}) != len(ops):
            raise ValueError("duplicate qubit index in Pauli term")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @classmethod
    def from_map(cls, coefficient: complex, ops: dict[int, str]) -> "PauliTerm":
        return cls(coefficient, tuple(ops.items()))

    @property
    def locality(self) -> int:
        return len(self.operators)

    @property
    def max_qubit(self) -> int:
        return self.operators[-1][0] if self.operators else -1

    def op_map(self) -> dict[int, str]:
        return dict(self.operators)

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        """Operator product of two Pauli strings (phase tracked)."""
        a, b = self.op_map(), other.op_map()
        out: dict[int, str] = {}
        phase = 1.0 + 0j
        for q in sorted(set(a) | set(b)):
            if q in a and q in b:
                ph, c = _MUL_TABLE[(a[q], b[q])]
                phase *= ph
                if c is not None:
                    out[q] = c
            else:
                out[q] = a.get(q, b.get(q))
        return PauliTerm.from_map(phase * self.coefficient * other.coefficient, out)

    def __str__(self) -> str:
        body = " ".join(f"{o}{q}" for q, o in self.operators) or "I"
        return f"({self.coefficient:+.12g}) {body}"


@dataclass(frozen=True)
class PauliSum:
    """A k-local qubit operator: a list of weighted Pauli strings on n qubits."""

    terms: tuple[PauliTerm, ...]
    n_qubits: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be >= 0")
        for t in self.terms:
            if t.max_qubit >= self.n_qubits:
                raise ValueError(
                    f"term acts on qubit {t.max_qubit} but n_qubits={self.n_qubits}"
                )

    @classmethod
    def from_terms(cls, terms, n_qubits: int) -> "PauliSum":
        return cls(tuple(terms), n_qubits)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        return PauliSum(self.terms + other.terms, self.n_qubits)

    def __rmul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(
            tuple(PauliTerm(scalar * t.coefficient, t.operators) for t in self.terms),
            self.n_qubits,
        )

    def identity_coefficient(self) -> complex:
        return sum((t.coefficient for t in self.terms if not t.operators), 0j)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        merged = _merge(self.terms)
        return all(abs(c.imag) <= tol for c in merged.values())

    def shifted_scaled(self, scale: float, shift: float) -> "PauliSum":
        """Return ``scale * (H - shift * I)`` simplified."""
        terms = [PauliTerm(scale * t.coefficient, t.operators) for t in self.terms]
        terms.append(PauliTerm(-scale * shift))
        return simplify(PauliSum(tuple(terms), self.n_qubits))

    def __str__(self) -> str:
        return "\n".join(str(t) for t in self.terms) or "(zero operator)"


def _merge(terms) -> dict[tuple, complex]:
    acc: dict[tuple, complex] = {}
    for t in terms:
        acc[t.operators] = acc.get(t.operators, 0j) + t.coefficient
    return acc


def simplify(h: PauliSum, cutoff: float = COEFF_CUTOFF) -> PauliSum:
    """Merge duplicate strings, drop negligible coefficients, sort terms.

    The output order is deterministic (lexicographic in the operator map),
    so simplified sums can be compared and serialized reproducibly.
    """
    merged = _merge(h.terms)
    kept = sorted(
        (ops, c) for ops, c in merged.items() if abs(c) >= cutoff
    )
    return PauliSum(tuple(PauliTerm(c, ops) for ops, c in kept), h.n_qubits)


def spectral_bounds(h: PauliSum) -> tuple[float, float]:
    """Certified bracket [E_lo, E_up] of the spectrum of a Hermitian sum.

    Every non-identity Pauli string has spectral norm 1, so the spectrum
    lies within the identity coefficient plus/minus the l1 weight of the
    rest.  Loose but cheap, and safe for pointer-window placement.
    """
    if not h.is_hermitian():
        raise ValueError("spectral_bounds requires a Hermitian PauliSum")
    merged = _merge(h.terms)
    c_i = merged.pop((), 0j).real
    radius = sum(abs(c) for c in merged.values())
    return (c_i - radius, c_i + radius)


def dump_pauli_text(h: PauliSum) -> str:
    """Line-oriented text form: ``coeff_re coeff_im X0 Z3 Y7`` per term.

    The identity term is written with the placeholder token ``I``.  A
    leading comment row records the qubit count.
    """
    lines = [f"# n_qubits {h.n_qubits}"]
    for t in h.terms:
        body = " ".join(f"{o}{q}" for q, o in t.operators) or "I"
        lines.append(f"{t.coefficient.real:.17g} {t.coefficient.imag:.17g} {body}")
    return "\n".join(lines) + "\n"


def parse_pauli_text(text: str) -> PauliSum:
    """Inverse of :func:`dump_pauli_text` (qubit count inferred if absent)."""
    terms: list[PauliTerm] = []
    n_qubits = 0
    declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if len(fields) == 2 and fields[0] == "n_qubits":
                declared = int(fields[1])
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ParseError("expected 'coeff_re coeff_im [ops...]'", lineno)
        try:
            coeff = complex(float(fields[0]), float(fields[1]))
        except ValueError as exc:
            raise ParseError(f"bad coefficient: {exc}", lineno) from None
        ops: dict[int, str] = {}
        for tok in fields[2:]:
            if tok == "I":
                continue
            letter, idx = tok[0].upper(), tok[1:]
            if letter not in _LETTERS or not idx.isdigit():
                raise ParseError(f"bad operator token {tok!r}", lineno)
            q = int(idx)
            if q in ops:
                raise ParseError(f"qubit {q} repeated", lineno)
            ops[q] = letter
        if ops:
            n_qubits = max(n_qubits, max(ops) + 1)
        terms.append(PauliTerm.from_map(coeff, ops))
    if declared is not None:
        if declared < n_qubits:
            raise ParseError(
                f"declared n_qubits {declared} smaller than largest index used"
            )
        n_qubits = declared
    return PauliSum(tuple(terms), n_qubits)
