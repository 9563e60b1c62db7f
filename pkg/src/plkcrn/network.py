"""Reaction networks and their stoichiometric / graph-theoretic invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import networkx as nx

from . import lp
from .errors import InvalidNetwork, SelfTransfer
from .linalg import RationalMatrix, Vector, to_fraction


@dataclass(frozen=True)
class Species:
    id: int
    name: str


@dataclass(frozen=True)
class Complex:
    """Sparse nonnegative combination of species, stored as sorted (index, coeff) pairs."""

    coeffs: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, object]) -> "Complex":
        items = []
        for idx, c in mapping.items():
            c = to_fraction(c)
            if c < 0:
                raise InvalidNetwork(f"negative stoichiometric coefficient {c}")
            if c != 0:
                items.append((int(idx), c))
        return cls(tuple(sorted(items)))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def vector(self, m: int) -> Vector:
        out = [Fraction(0)] * m
        for i, c in self.coeffs:
            out[i] = c
        return tuple(out)

    def support(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.coeffs)

    def __add__(self, other: "Complex") -> "Complex":
        d = self.as_dict()
        for i, c in other.coeffs:
            d[i] = d.get(i, Fraction(0)) + c
        return Complex.from_mapping(d)

    def format(self, names: Sequence[str]) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in self.coeffs:
            parts.append(names[i] if c == 1 else f"{c} {names[i]}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Reaction:
    id: int
    reactant: Complex
    product: Complex
    label: str


@dataclass(frozen=True)
class StructuralIndices:
    n: int
    l: int
    sl: int
    t: int
    n_r: int
    s: int
    delta: int


@dataclass(frozen=True)
class Network:
    species: tuple[Species, ...]
    complexes: tuple[Complex, ...]
    reactions: tuple[Reaction, ...]
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not self.species or not self.reactions:
            raise InvalidNetwork("a network needs at least one species and one reaction")
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise InvalidNetwork("species names must be unique")
        if [s.id for s in self.species] != list(range(len(self.species))):
            raise InvalidNetwork("species ids must be 0..m-1 in order")
        index = {c: i for i, c in enumerate(self.complexes)}
        if len(index) != len(self.complexes):
            raise InvalidNetwork("duplicate complexes")
        m = len(self.species)
        used = set()
        for r in self.reactions:
            if r.reactant == r.product:
                raise SelfTransfer(f"reaction {r.label}: reactant equals product")
            for c in (r.reactant, r.product):
                if c not in index:
                    raise InvalidNetwork(f"reaction {r.label} uses an unknown complex")
                if any(i >= m for i in c.support()):
                    raise InvalidNetwork(f"reaction {r.label} uses an unknown species")
                used.add(c)
        if len(used) != len(self.complexes):
            raise InvalidNetwork("every complex must take part in a reaction")
        object.__setattr__(self, "_index", index)

    @classmethod
    def build(
        cls,
        species: Sequence[str],
        reactions: Iterable[tuple[str, Mapping[str, object], Mapping[str, object]]],
    ) -> "Network":
        """Build from species names and ``(label, reactant, product)`` name->coeff maps."""
        sp = tuple(Species(i, n) for i, n in enumerate(species))
        pos = {n: i for i, n in enumerate(species)}
        complexes: list[Complex] = []
        seen: dict[Complex, int] = {}
        rxns = []

        def intern(d: Mapping[str, object]) -> Complex:
            try:
                c = Complex.from_mapping({pos[k]: v for k, v in d.items()})
            except KeyError as exc:
                raise InvalidNetwork(f"unknown species {exc.args[0]!r}") from None
            if c not in seen:
                seen[c] = len(complexes)
                complexes.append(c)
            return c

        for k, (label, lhs, rhs) in enumerate(reactions):
            rxns.append(Reaction(k, intern(lhs), intern(rhs), label))
        return cls(sp, tuple(complexes), tuple(rxns))

    @property
    def m(self) -> int:
        return len(self.species)

    @property
    def n(self) -> int:
        return len(self.complexes)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def species_names(self) -> list[str]:
        return [s.name for s in self.species]

    def complex_index(self, c: Complex) -> int:
        return self._index[c]

    def edges(self) -> list[tuple[int, int]]:
        return [(self._index[r.reactant], self._index[r.product]) for r in self.reactions]

    def reactant_indices(self) -> list[int]:
        """Reactant complexes in order of first appearance."""
        out: list[int] = []
        for a, _ in self.edges():
            if a not in out:
                out.append(a)
        return out

    def reaction_vector(self, k: int) -> Vector:
        r = self.reactions[k]
        y, yp = r.reactant.vector(self.m), r.product.vector(self.m)
        return tuple(b - a for a, b in zip(y, yp))

    def format_reaction(self, k: int) -> str:
        r = self.reactions[k]
        names = self.species_names
        return f"{r.reactant.format(names)} -> {r.product.format(names)}"

    def subnetwork(self, reaction_idx: Sequence[int], species_idx: Sequence[int] | None = None):
        """Subnetwork on the given reactions.

        Species are restricted to ``species_idx`` (default: those occurring in
        the chosen complexes). Returns ``(subnetwork, species_idx)``.
        """
        if species_idx is None:
            keep = set()
            for k in reaction_idx:
                r = self.reactions[k]
                keep |= r.reactant.support() | r.product.support()
            species_idx = sorted(keep)
        species_idx = list(species_idx)
        remap = {old: new for new, old in enumerate(species_idx)}
        names = self.species_names
        rx = []
        for k in reaction_idx:
            r = self.reactions[k]
            lhs = {names[i]: c for i, c in r.reactant.coeffs}
            rhs = {names[i]: c for i, c in r.product.coeffs}
            if not set(lhs) | set(rhs) <= {names[i] for i in remap}:
                raise InvalidNetwork("subnetwork species must cover its complexes")
            rx.append((r.label, lhs, rhs))
        return Network.build([names[i] for i in species_idx], rx), species_idx


def incidence_matrix(net: Network) -> RationalMatrix:
    cols = []
    for a, b in net.edges():
        col = [0] * net.n
        col[a] = -1
        col[b] = 1
        cols.append(col)
    return RationalMatrix.from_columns(cols)


def molecularity_matrix(net: Network) -> RationalMatrix:
    return RationalMatrix.from_columns([c.vector(net.m) for c in net.complexes])


def stoichiometric_matrix(net: Network) -> RationalMatrix:
    N = RationalMatrix.from_columns([net.reaction_vector(k) for k in range(net.r)])
    assert N == molecularity_matrix(net) @ incidence_matrix(net)
    return N


def _digraph(net: Network) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(net.n))
    g.add_edges_from(net.edges())
    return g


def linkage_classes(net: Network) -> list[list[int]]:
    """Weakly connected components of the complex graph, as sorted index lists."""
    comps = [sorted(c) for c in nx.weakly_connected_components(_digraph(net))]
    return sorted(comps)


def strong_and_terminal_classes(net: Network) -> tuple[list[list[int]], list[list[int]]]:
    g = _digraph(net)
    strong = sorted(sorted(c) for c in nx.strongly_connected_components(g))
    terminal = []
    for comp in strong:
        inside = set(comp)
        if all(v in inside for u in comp for v in g.successors(u)):
            terminal.append(comp)
    return strong, terminal


def is_weakly_reversible(net: Network) -> bool:
    return len(strong_and_terminal_classes(net)[0]) == len(linkage_classes(net))


def structural_indices(net: Network) -> StructuralIndices:
    strong, terminal = strong_and_terminal_classes(net)
    n = net.n
    l = len(linkage_classes(net))
    s = stoichiometric_matrix(net).rank()
    return StructuralIndices(
        n=n, l=l, sl=len(strong), t=len(terminal), n_r=len(net.reactant_indices()), s=s,
        delta=n - l - s,
    )


def conserved_quantity_basis(net: Network) -> list[Vector]:
    """Basis of S-perp (left kernel of N) in reduced row echelon form."""
    return stoichiometric_matrix(net).left_nullspace()


def is_conservative(net: Network) -> tuple[bool, Vector | None]:
    """Decide whether S-perp meets the positive orthant; returns a witness w >= 1.

    The witness minimizes sum(w) subject to w_i >= 1, so it is deterministic.
    """
    basis = conserved_quantity_basis(net)
    if not basis:
        return False, None
    d, m = len(basis), net.m
    # w = sum_j a_j basis_j ; require -w_i <= -1
    A_ub = [[-basis[j][i] for j in range(d)] for i in range(m)]
    c = [sum(basis[j][i] for i in range(m)) for j in range(d)]
    res = lp.linprog(c, A_ub=A_ub, b_ub=[-1] * m, bounds=(None, None))
    if res.status == lp.INFEASIBLE:
        return False, None
    if not res.success:
        res = lp.linprog([0] * d, A_ub=A_ub, b_ub=[-1] * m, bounds=(None, None))
    w = tuple(sum((res.x[j] * basis[j][i] for j in range(d)), Fraction(0)) for i in range(m))
    return True, w


def positive_dependence_witness(net: Network) -> Vector | None:
    """Minimal-sum k with every k_i >= 1 and N k = 0, or None."""
    N = stoichiometric_matrix(net)
    res = lp.linprog([1] * net.r, A_eq=N.row_list(), b_eq=[0] * net.m, bounds=(1, None))
    return res.x if res.success else None


def is_positively_dependent(net: Network) -> bool:
    return positive_dependence_witness(net) is not None
