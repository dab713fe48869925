"""Triangular-lattice geometry and the Heisenberg Hamiltonian built on it.

The lattice is a rows x cols square grid with one extra diagonal bond per
square plaquette (lower-left to upper-right corner), optionally wrapped
periodically in both directions; every site then has coordination 6.
Sites are labelled row-major; ``site_order`` maps those labels to chain
positions along a row-major snake, which keeps most bonds short when the
2D model is flattened onto a 1D MPS.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pauli import PauliSum, PauliTerm, simplify


@dataclass(frozen=True)
class LatticeSpec:
    rows: int
    cols: int
    periodic: bool
    edges: tuple[tuple[int, int], ...]
    site_order: tuple[int, ...]  # site_order[row_major_label] = chain position

    @property
    def n_sites(self) -> int:
        return self.rows * self.cols

    def validate(self) -> None:
        n = self.n_sites
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"edge ({i},{j}) references invalid sites")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate undirected edge {key}")
            seen.add(key)
        if sorted(self.site_order) != list(range(n)):
            raise ValueError("site_order is not a permutation")


def build_triangular_lattice(rows: int, cols: int, periodic: bool) -> LatticeSpec:
    """Edge list of the (periodic) triangular lattice on a rows x cols grid."""
    if rows < 1 or cols < 1:
        raise ValueError("lattice dimensions must be >= 1")

    def label(r, c):
        return (r % rows) * cols + (c % cols)

    edges: set[tuple[int, int]] = set()

    def add(a, b):
        if a != b:
            edges.add((min(a, b), max(a, b)))

    for r in range(rows):
        for c in range(cols):
            here = label(r, c)
            if c + 1 < cols or periodic:
                add(here, label(r, c + 1))
            if r + 1 < rows or periodic:
                add(here, label(r + 1, c))
            # one diagonal per plaquette: (r,c) -- (r+1,c+1)
            if (r + 1 < rows or periodic) and (c + 1 < cols or periodic):
                add(here, label(r + 1, c + 1))

    order = [0] * (rows * cols)
    for r in range(rows):
        for c in range(cols):
            pos = r * cols + (c if r % 2 == 0 else cols - 1 - c)
            order[r * cols + c] = pos

    spec = LatticeSpec(rows, cols, periodic, tuple(sorted(edges)), tuple(order))
    spec.validate()
    return spec


def build_heisenberg(lattice: LatticeSpec, coupling: float) -> PauliSum:
    """J * (XX + YY + ZZ) on every lattice edge, in chain (snake) ordering."""
    lattice.validate()
    terms = []
    for i, j in lattice.edges:
        a, b = lattice.site_order[i], lattice.site_order[j]
        for letter in ("X", "Y", "Z"):
            terms.append(PauliTerm.from_map(coupling, {a: letter, b: letter}))
    return simplify(PauliSum(tuple(terms), lattice.n_sites))


def heisenberg_chain(n_sites: int, coupling: float = 1.0) -> PauliSum:
    """Open nearest-neighbour Heisenberg chain (a 1 x n lattice)."""
    return build_heisenberg(build_triangular_lattice(1, n_sites, False), coupling)
