"""Independent decompositions and verdicts combined across subnetworks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import networkx as nx

from .errors import NotIndependent
from .kinetics import KineticModel, kinetic_deficiency
from .linalg import RationalMatrix, coordinates
from .network import (
    Network,
    StructuralIndices,
    is_positively_dependent,
    is_weakly_reversible,
    stoichiometric_matrix,
    structural_indices,
)
from .structural import (
    DecompositionArgument,
    EmptySignIntersection,
    InjectivityCertificate,
    MultistatVerdict,
    SignWitness,
    Verdict,
    multistationarity_pipeline,
    sign_hypotheses,
)

DEFICIENCY_ZERO_MASS_ACTION = "DeficiencyZeroMassAction"
SIGN_TEST = "SignTest"
INJECTIVITY = "Injectivity"
EXTERNAL = "External"


@dataclass(frozen=True)
class Decomposition:
    subnetworks: tuple[tuple[int, ...], ...]
    indices: tuple[StructuralIndices, ...]
    independent: bool

    def labels(self, net: Network) -> list[list[str]]:
        return [[net.reactions[k].label for k in block] for block in self.subnetworks]


@dataclass(frozen=True)
class SubnetworkVerdict:
    index: int
    verdict: Verdict
    rule: str


def _rank(N: RationalMatrix, cols: Sequence[int]) -> int:
    return N.select_columns(list(cols)).rank() if cols else 0


def is_independent(net: Network, partition: Sequence[Sequence[int]]) -> bool:
    """S equals the direct sum of the block subspaces iff the block ranks add up."""
    N = stoichiometric_matrix(net)
    return sum(_rank(N, b) for b in partition) == N.rank()


def _block_indices(net: Network, block: Sequence[int]) -> StructuralIndices:
    sub, _ = net.subnetwork(block)
    return structural_indices(sub)


def finest_independent_decomposition(net: Network) -> Decomposition:
    N = stoichiometric_matrix(net)
    vectors = N.columns()
    basis_idx: list[int] = []
    for k in range(net.r):
        if _rank(N, basis_idx + [k]) > len(basis_idx):
            basis_idx.append(k)
    basis = [vectors[k] for k in basis_idx]

    g = nx.Graph()
    g.add_nodes_from(range(len(basis)))
    supports = []
    for k in range(net.r):
        coords = coordinates(vectors[k], basis)
        sup = [j for j, c in enumerate(coords) if c != 0]
        supports.append(sup)
        g.add_edges_from((sup[0], j) for j in sup[1:])
    comp_of = {}
    for ci, comp in enumerate(sorted(sorted(c) for c in nx.connected_components(g))):
        for j in comp:
            comp_of[j] = ci
    blocks: dict[int, list[int]] = {}
    for k, sup in enumerate(supports):
        blocks.setdefault(comp_of[sup[0]], []).append(k)
    parts = tuple(tuple(b) for b in sorted(blocks.values()))
    return Decomposition(
        parts,
        tuple(_block_indices(net, b) for b in parts),
        is_independent(net, parts),
    )


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def finer_independent_partitions(net: Network, dec: Decomposition) -> list[list[list[int]]]:
    """All independent partitions strictly finer than ``dec`` (exhaustive; small r only)."""
    out = []
    per_block = [list(_set_partitions(list(b))) for b in dec.subnetworks]

    def combos(i):
        if i == len(per_block):
            yield []
            return
        for p in per_block[i]:
            for tail in combos(i + 1):
                yield p + tail

    for cand in combos(0):
        if len(cand) > len(dec.subnetworks) and is_independent(net, cand):
            out.append(sorted(sorted(b) for b in cand))
    return out


def _rule_for(v: MultistatVerdict) -> str:
    if isinstance(v.evidence, (SignWitness, EmptySignIntersection)):
        return SIGN_TEST
    if isinstance(v.evidence, InjectivityCertificate):
        return INJECTIVITY
    return EXTERNAL


def subnetwork_verdicts(dec: Decomposition, km: KineticModel) -> list[SubnetworkVerdict]:
    out = []
    for i, block in enumerate(dec.subnetworks):
        sub_km, _ = km.restrict(block)
        sub = sub_km.network
        if sub_km.is_mass_action() and is_weakly_reversible(sub) and structural_indices(sub).delta == 0:
            out.append(SubnetworkVerdict(i, Verdict.MONOSTATIONARY, DEFICIENCY_ZERO_MASS_ACTION))
            continue
        v = multistationarity_pipeline(sub, sub_km, use_decomposition=False)
        out.append(SubnetworkVerdict(i, v.verdict, _rule_for(v)))
    return out


def combine_verdicts(dec: Decomposition, verdicts: Sequence[SubnetworkVerdict]) -> MultistatVerdict:
    """All parts monostationary -> monostationary; anything else stays inconclusive."""
    if not dec.independent:
        raise NotIndependent("verdicts can only be combined over an independent decomposition")
    ordered = tuple(sorted(verdicts, key=lambda v: v.index))
    evidence = DecompositionArgument(dec, ordered)
    if ordered and all(v.verdict is Verdict.MONOSTATIONARY for v in ordered):
        return MultistatVerdict(Verdict.MONOSTATIONARY, evidence)
    return MultistatVerdict(Verdict.INCONCLUSIVE, evidence)


def existence_verdict(net: Network, km: KineticModel) -> bool | None:
    """True / False / None (unknown) for the existence of a positive steady state.

    True needs weak reversibility, deficiency zero, PL-RDK kinetics and zero
    kinetic deficiency. False means positive dependence fails.
    """
    if sign_hypotheses(net, km) and kinetic_deficiency(km) == 0:
        return True
    if not is_positively_dependent(net):
        return False
    return None
