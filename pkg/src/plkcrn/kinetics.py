"""Power-law kinetics: kinetic orders, rates, and the kinetic flux subspace."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NonpositiveState, NotPLRDK, NotWeaklyReversible, ShapeMismatch
from .linalg import RationalMatrix, Vector, dot, orthogonal_complement, reduced_basis
from .network import Network, incidence_matrix, is_weakly_reversible, stoichiometric_matrix


@dataclass(frozen=True)
class KineticModel:
    network: Network
    F: RationalMatrix
    rate_names: tuple[str, ...]
    rate_values: tuple[float, ...] | None = None

    def __post_init__(self):
        net = self.network
        if self.F.shape != (net.r, net.m):
            raise ValueError(f"kinetic order matrix must be {net.r}x{net.m}, got {self.F.shape}")
        if len(self.rate_names) != net.r:
            raise ValueError("one rate name per reaction required")
        if self.rate_values is not None:
            vals = tuple(float(v) for v in self.rate_values)
            if len(vals) != net.r:
                raise ValueError("one rate value per reaction required")
            if not all(v > 0 and np.isfinite(v) for v in vals):
                raise ValueError("rate constants must be positive and finite")
            object.__setattr__(self, "rate_values", vals)

    @classmethod
    def mass_action(cls, net: Network, rate_names=None, rate_values=None) -> "KineticModel":
        F = RationalMatrix([r.reactant.vector(net.m) for r in net.reactions], cols=net.m)
        names = tuple(rate_names or (f"k{i + 1}" for i in range(net.r)))
        return cls(net, F, names, None if rate_values is None else tuple(rate_values))

    @property
    def has_rates(self) -> bool:
        return self.rate_values is not None

    def is_mass_action(self) -> bool:
        return all(
            self.F.row(k) == r.reactant.vector(self.network.m)
            for k, r in enumerate(self.network.reactions)
        )

    def with_rates(self, values: Sequence[float]) -> "KineticModel":
        return KineticModel(self.network, self.F, self.rate_names, tuple(values))

    def restrict(self, reaction_idx: Sequence[int]) -> tuple["KineticModel", list[int]]:
        """Kinetics on a subnetwork; species kept are those in its complexes or orders."""
        keep = set()
        for k in reaction_idx:
            r = self.network.reactions[k]
            keep |= r.reactant.support() | r.product.support()
            keep |= {j for j, f in enumerate(self.F.row(k)) if f != 0}
        species_idx = sorted(keep)
        sub, _ = self.network.subnetwork(reaction_idx, species_idx)
        F = RationalMatrix([[self.F[k, j] for j in species_idx] for k in reaction_idx], cols=len(species_idx))
        names = tuple(self.rate_names[k] for k in reaction_idx)
        vals = None if self.rate_values is None else tuple(self.rate_values[k] for k in reaction_idx)
        return KineticModel(sub, F, names, vals), species_idx


@dataclass(frozen=True)
class SubspaceBasis:
    ambient: int
    basis: tuple[Vector, ...]
    tag: str  # "stoichiometric", "kinetic-flux" or "orthocomplement"

    @property
    def dimension(self) -> int:
        return len(self.basis)


def kinetic_order_matrix(km: KineticModel) -> RationalMatrix:
    return km.F


def is_pl_rdk(km: KineticModel) -> bool:
    rows: dict[int, Vector] = {}
    for k, (a, _) in enumerate(km.network.edges()):
        row = km.F.row(k)
        if rows.setdefault(a, row) != row:
            return False
    return True


def y_tilde_matrix(km: KineticModel) -> RationalMatrix:
    """m x n matrix whose column j is the kinetic-order vector of complex j as a reactant."""
    net = km.network
    cols: list[Vector | None] = [None] * net.n
    for k, (a, _) in enumerate(net.edges()):
        row = km.F.row(k)
        if cols[a] is None:
            cols[a] = row
        elif cols[a] != row:
            raise NotPLRDK(
                f"reactions sharing reactant {net.complexes[a].format(net.species_names)} "
                "have different kinetic orders"
            )
    zero = tuple(Fraction(0) for _ in range(net.m))
    return RationalMatrix.from_columns([c if c is not None else zero for c in cols])


def t_matrix(km: KineticModel) -> RationalMatrix:
    """Y-tilde with non-reactant columns dropped (columns in complex order)."""
    reactants = sorted(km.network.reactant_indices())
    return y_tilde_matrix(km).select_columns(reactants)


def stoichiometric_subspace(net: Network) -> SubspaceBasis:
    return SubspaceBasis(net.m, tuple(stoichiometric_matrix(net).column_space()), "stoichiometric")


def _flux_generators(km: KineticModel) -> RationalMatrix:
    if not is_weakly_reversible(km.network):
        raise NotWeaklyReversible("kinetic flux subspace is only defined here for weakly reversible networks")
    return y_tilde_matrix(km) @ incidence_matrix(km.network)


def kinetic_flux_subspace(km: KineticModel) -> SubspaceBasis:
    gens = _flux_generators(km)
    return SubspaceBasis(km.network.m, tuple(gens.column_space()), "kinetic-flux")


def kinetic_flux_orthocomplement(km: KineticModel) -> SubspaceBasis:
    gens = _flux_generators(km)
    m = km.network.m
    cols = [c for c in gens.columns() if any(c)]
    basis = tuple(orthogonal_complement(cols, m))
    for w in basis:
        assert all(dot(w, c) == 0 for c in cols)
    return SubspaceBasis(m, basis, "orthocomplement")


def kinetic_deficiency(km: KineticModel) -> int:
    from .network import linkage_classes

    net = km.network
    return net.n - len(linkage_classes(net)) - kinetic_flux_subspace(km).dimension


def evaluate_rates(km: KineticModel, x) -> np.ndarray:
    """K_i(x) = k_i * prod_j x_j ** F_ij."""
    if km.rate_values is None:
        raise ValueError("rate values are required to evaluate rates")
    x = np.asarray(x, dtype=float)
    if x.shape != (km.network.m,):
        raise ValueError(f"state must have {km.network.m} components")
    if not np.all(x > 0):
        raise NonpositiveState(f"state must be strictly positive, got {x.tolist()}")
    F = km.F.to_numpy()
    return np.asarray(km.rate_values) * np.exp(F @ np.log(x))


class DacClass(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    P_NULL = "p-null"
    Q_NULL = "q-null"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class Classification:
    label: DacClass
    P: Fraction
    Q: Fraction
    pair: tuple[int, int]
    species: tuple[int, int]

    @property
    def Rp(self) -> Fraction | None:
        return None if self.Q == 0 else self.P / self.Q

    @property
    def Rq(self) -> Fraction | None:
        return None if self.P == 0 else self.Q / self.P


def land_atmosphere_pair(net: Network) -> tuple[tuple[int, int], tuple[int, int]]:
    """Locate the unique reversible pair whose complexes each contain the same two species.

    Returns ``((R1, R2), (a, b))`` where species a precedes b in network order
    and R1 is the reaction of the pair that produces a.
    """
    edges = net.edges()
    found = []
    for i, (a, b) in enumerate(edges):
        for j in range(i + 1, len(edges)):
            if edges[j] == (b, a):
                sup = net.complexes[a].support()
                if len(sup) == 2 and net.complexes[b].support() == sup:
                    found.append((i, j, tuple(sorted(sup))))
    if len(found) != 1:
        raise ShapeMismatch(f"expected one two-species reversible pair, found {len(found)}")
    i, j, (sa, sb) = found[0]
    r1, r2 = (i, j) if net.reaction_vector(i)[sa] > 0 else (j, i)
    return (r1, r2), (sa, sb)


def classify_system(km: KineticModel, pair: tuple[int, int] | None = None,
                    species: tuple[int, int] | None = None) -> Classification:
    """Sign class of P = p2 - p1 and Q = q2 - q1.

    ``pair``/``species`` override the automatic lookup of (R1, R2) and (A1, A2)
    for networks that are not shaped like the DAC preset.
    """
    if pair is None or species is None:
        auto_pair, auto_species = land_atmosphere_pair(km.network)
        pair = pair or auto_pair
        species = species or auto_species
    r1, r2 = pair
    a, b = species
    P = km.F[r2, a] - km.F[r1, a]
    Q = km.F[r2, b] - km.F[r1, b]
    if P == 0 and Q == 0:
        label = DacClass.DEGENERATE
    elif P == 0:
        label = DacClass.P_NULL
    elif Q == 0:
        label = DacClass.Q_NULL
    elif P * Q > 0:
        label = DacClass.POSITIVE
    else:
        label = DacClass.NEGATIVE
    return Classification(label, P, Q, (r1, r2), (a, b))
