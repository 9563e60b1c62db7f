"""Parameter-free steady-state analysis.

Sign-vector tests between the stoichiometric subspace and the orthogonal
complement of the kinetic flux subspace, the symbolic injectivity
determinant, and ACR detection via zero coordinates of that complement.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import lp
from .errors import DimensionTooLarge, ShapeMismatch
from .kinetics import (
    DacClass,
    KineticModel,
    SubspaceBasis,
    classify_system,
    is_pl_rdk,
    kinetic_flux_orthocomplement,
    stoichiometric_subspace,
)
from .linalg import RationalMatrix, Vector
from .network import Network, is_weakly_reversible, stoichiometric_matrix, structural_indices
from .polynomial import MultivariatePolynomial

SignPattern = tuple[int, ...]  # entries in {-1, 0, 1}

MAX_SIGN_DIM = 12
MAX_DET_DIM = 10


def sign_of(v: Sequence) -> SignPattern:
    return tuple((x > 0) - (x < 0) for x in v)


def format_sign(p: SignPattern) -> str:
    return "(" + ",".join({1: "+", -1: "-", 0: "0"}[s] for s in p) + ")"


# --- verdicts ----------------------------------------------------------------


class Verdict(str, enum.Enum):
    MULTISTATIONARY = "multistationary"
    MONOSTATIONARY = "monostationary"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SignWitness:
    """x in the stoichiometric subspace and w in the flux complement with equal signs."""

    x: Vector
    w: Vector
    sign: SignPattern


@dataclass(frozen=True)
class EmptySignIntersection:
    """Only the zero sign vector is shared, so complex balanced equilibria are unique per class."""

    sign_patterns: tuple[SignPattern, ...]


@dataclass(frozen=True)
class InjectivityCertificate:
    sign: int
    determinant: MultivariatePolynomial


@dataclass(frozen=True)
class MixedSignMonomials:
    positive: tuple[str, ...]
    negative: tuple[str, ...]
    reason: str = "mixed signs"


@dataclass(frozen=True)
class DecompositionArgument:
    decomposition: object
    verdicts: tuple


@dataclass(frozen=True)
class Note:
    reason: str


@dataclass(frozen=True)
class MultistatVerdict:
    verdict: Verdict
    evidence: object
    trail: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.verdict is Verdict.MULTISTATIONARY and not isinstance(self.evidence, SignWitness):
            raise ValueError("a multistationary verdict needs a sign witness")


# --- sign vectors ------------------------------------------------------------


def _realize(basis: Sequence[Vector], pattern: Sequence[int | None]) -> Vector | None:
    """Point of span(basis) with sign ``pattern`` (None = unconstrained), or None.

    Uses the x_i >= 1 / x_i <= -1 normalization; the cone is scale invariant.
    """
    d = len(basis)
    m = len(pattern)
    if d == 0:
        ok = all(s in (0, None) for s in pattern)
        return tuple(Fraction(0) for _ in range(m)) if ok else None
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, s in enumerate(pattern):
        if s is None:
            continue
        row = [basis[j][i] for j in range(d)]
        if not any(row):
            if s != 0:
                return None
            continue
        if s == 0:
            A_eq.append(row)
            b_eq.append(0)
        elif s > 0:
            A_ub.append([-a for a in row])
            b_ub.append(-1)
        else:
            A_ub.append(row)
            b_ub.append(-1)
    res = lp.linprog([0] * d, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(None, None))
    if not res.success:
        return None
    return tuple(sum((res.x[j] * basis[j][i] for j in range(d)), Fraction(0)) for i in range(m))


def _basis_of(sub: SubspaceBasis | Sequence[Vector]) -> tuple[list[Vector], int]:
    if isinstance(sub, SubspaceBasis):
        return list(sub.basis), sub.ambient
    sub = list(sub)
    if not sub:
        raise ValueError("pass a SubspaceBasis to describe the zero subspace")
    return sub, len(sub[0])


def sign_patterns_with_witnesses(sub: SubspaceBasis, max_dim: int = MAX_SIGN_DIM) -> dict[SignPattern, Vector]:
    """Every realizable sign pattern of the subspace, each with a witness point.

    Patterns are grown one coordinate at a time and infeasible prefixes are
    pruned; only patterns whose first nonzero sign is + are searched and the
    rest follow by negation.
    """
    basis, m = _basis_of(sub)
    if m > max_dim:
        raise DimensionTooLarge(f"sign enumeration over {m} coordinates exceeds bound {max_dim}")
    out: dict[SignPattern, Vector] = {}
    if len(basis) <= 1:
        # a line (or the origin) realizes only 0 and the signs of its generator
        zero = tuple(Fraction(0) for _ in range(m))
        out[sign_of(zero)] = zero
        for v in basis:
            neg = tuple(-a for a in v)
            out[sign_of(v)] = tuple(v)
            out[sign_of(neg)] = neg
        return dict(sorted(out.items()))

    def grow(prefix: list[int], started: bool):
        i = len(prefix)
        if i == m:
            x = _realize(basis, prefix)
            if x is not None:
                p = tuple(prefix)
                out[p] = x
                out[tuple(-s for s in p)] = tuple(-v for v in x)
            return
        choices = (0, 1, -1) if started else (0, 1)
        for s in choices:
            cand = prefix + [s]
            if i + 1 < m and _realize(basis, cand + [None] * (m - i - 1)) is None:
                continue
            grow(cand, started or s != 0)

    grow([], False)
    return dict(sorted(out.items()))


def realizable_sign_patterns(sub: SubspaceBasis, max_dim: int = MAX_SIGN_DIM) -> set[SignPattern]:
    return set(sign_patterns_with_witnesses(sub, max_dim))


def _preferred(p: SignPattern):
    # + before - on the first nonzero coordinate, then lexicographic
    first = next((s for s in p if s), 0)
    return (-first, tuple(-s for s in p))


def sign_intersection_test(S: SubspaceBasis, W: SubspaceBasis, max_dim: int = MAX_SIGN_DIM):
    """Does a nonzero sign pattern occur in both subspaces?

    Returns ``(found, witness)`` where witness is a pair ``(x in S, w in W)``
    with sign(x) == sign(w), or None. The smaller subspace is enumerated and
    each of its patterns is checked against the other with a single LP.
    """
    if S.ambient != W.ambient:
        raise ValueError("subspaces live in different ambient spaces")
    if S.ambient > max_dim:
        raise DimensionTooLarge(f"{S.ambient} coordinates exceeds bound {max_dim}")
    swap = W.dimension > S.dimension
    small, big = (S, W) if swap else (W, S)
    patterns = sign_patterns_with_witnesses(small, max_dim)
    for p in sorted(patterns, key=_preferred):
        if not any(p):
            continue
        y = _realize(list(big.basis), p)
        if y is not None:
            x, w = (patterns[p], y) if swap else (y, patterns[p])
            return True, (x, w)
    return False, None


# --- injectivity -------------------------------------------------------------


@dataclass(frozen=True)
class MStar:
    entries: tuple[tuple[MultivariatePolynomial, ...], ...]
    variables: tuple[str, ...]
    replaced_rows: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def evaluate_float(self, values: Sequence[float]):
        import numpy as np

        return np.array([[e.evaluate_float(values) for e in row] for row in self.entries])


def build_m_star(N: RationalMatrix, F: RationalMatrix) -> MStar:
    """M = N diag(z) F diag(k) with rows i_j replaced by the left-kernel vectors w^j.

    i_j is the pivot (first nonzero) index of the j-th reduced left-kernel
    basis vector. Variables are z1..zr (reactions) then k1..km (species).
    """
    m, r = N.shape
    if F.shape != (r, m):
        raise ValueError("F must be r x m")
    variables = tuple([f"z{i + 1}" for i in range(r)] + [f"k{j + 1}" for j in range(m)])
    nv = len(variables)

    def zk(i, b):
        e = [0] * nv
        e[i] = 1
        e[r + b] = 1
        return tuple(e)

    rows = []
    for a in range(m):
        row = []
        for b in range(m):
            terms = {}
            for i in range(r):
                c = N[a, i] * F[i, b]
                if c:
                    terms[zk(i, b)] = c
            row.append(MultivariatePolynomial(variables, terms))
        rows.append(row)
    kernel = N.left_nullspace()
    replaced = []
    for w in kernel:
        i = next(j for j, x in enumerate(w) if x != 0)
        rows[i] = [MultivariatePolynomial.constant(variables, x) for x in w]
        replaced.append(i)
    return MStar(tuple(tuple(r_) for r_ in rows), variables, tuple(replaced))


def det_m_star(mstar: MStar, max_dim: int = MAX_DET_DIM) -> MultivariatePolynomial:
    """Exact symbolic determinant by memoized cofactor expansion along the sparsest row."""
    n = mstar.size
    if n > max_dim:
        raise DimensionTooLarge(f"{n}x{n} symbolic determinant exceeds bound {max_dim}")
    E = mstar.entries
    zero = MultivariatePolynomial(mstar.variables)
    memo: dict[tuple, MultivariatePolynomial] = {}

    def det(rows: tuple[int, ...], cols: tuple[int, ...]) -> MultivariatePolynomial:
        if len(rows) == 1:
            return E[rows[0]][cols[0]]
        key = (rows, cols)
        if key in memo:
            return memo[key]
        pivot_pos = min(range(len(rows)), key=lambda p: (sum(bool(E[rows[p]][c]) for c in cols), p))
        row = rows[pivot_pos]
        rest = rows[:pivot_pos] + rows[pivot_pos + 1:]
        total = zero
        for q, c in enumerate(cols):
            entry = E[row][c]
            if not entry:
                continue
            minor = det(rest, cols[:q] + cols[q + 1:])
            if not minor:
                continue
            term = entry * minor
            total = total - term if (pivot_pos + q) % 2 else total + term
        memo[key] = total
        return total

    return det(tuple(range(n)), tuple(range(n)))


def injectivity_test(net: Network, km: KineticModel, max_dim: int = MAX_DET_DIM) -> MultistatVerdict:
    N = stoichiometric_matrix(net)
    mstar = build_m_star(N, km.F)
    det = det_m_star(mstar, max_dim)
    r = net.r
    zvars = mstar.variables[:r]
    kvars = mstar.variables[r:]
    expected = net.m - len(mstar.replaced_rows)
    if det.is_zero():
        return MultistatVerdict(Verdict.INCONCLUSIVE, MixedSignMonomials((), (), "determinant is zero"))
    homogeneous = det.degree(zvars) == {expected} and det.degree(kvars) == {expected}
    pos = tuple(f"{c}*{det.format_monomial(e)}" for e, c in det.sorted_terms() if c > 0)
    neg = tuple(f"{c}*{det.format_monomial(e)}" for e, c in det.sorted_terms() if c < 0)
    if not homogeneous:
        return MultistatVerdict(Verdict.INCONCLUSIVE, MixedSignMonomials(pos, neg, "not homogeneous"))
    if pos and neg:
        return MultistatVerdict(Verdict.INCONCLUSIVE, MixedSignMonomials(pos, neg))
    return MultistatVerdict(Verdict.MONOSTATIONARY, InjectivityCertificate(1 if pos else -1, det))


# --- ACR ---------------------------------------------------------------------


def acr_species(km: KineticModel) -> list[str]:
    """Species whose coordinate vanishes on every basis vector of the flux complement."""
    W = kinetic_flux_orthocomplement(km)
    names = km.network.species_names
    return [names[i] for i in range(km.network.m) if all(w[i] == 0 for w in W.basis)]


# --- pipeline ----------------------------------------------------------------


def sign_hypotheses(net: Network, km: KineticModel) -> bool:
    """Weakly reversible, deficiency zero and reactant-determined power-law kinetics."""
    return is_weakly_reversible(net) and structural_indices(net).delta == 0 and is_pl_rdk(km)


def multistationarity_pipeline(net: Network, km: KineticModel, use_decomposition: bool = True) -> MultistatVerdict:
    """Ordered decision procedure.

    1. sign test finds a shared nonzero sign vector -> multistationary
    2. injectivity certificate -> monostationary
    3. independent decomposition whose parts are all monostationary -> monostationary
    4. sign test finds no shared nonzero sign vector -> monostationary
    5. otherwise inconclusive
    """
    trail = []
    try:
        cls = classify_system(km)
    except ShapeMismatch:
        cls = None
    if cls is not None and cls.label is DacClass.DEGENERATE:
        return MultistatVerdict(Verdict.INCONCLUSIVE, Note("degenerate DAC system (p1=p2 and q1=q2)"), ("degenerate",))

    hyp = sign_hypotheses(net, km)
    sign_result = None
    if hyp:
        S = stoichiometric_subspace(net)
        W = kinetic_flux_orthocomplement(km)
        found, witness = sign_intersection_test(S, W)
        if found:
            x, w = witness
            trail.append("sign test: shared sign vector")
            return MultistatVerdict(Verdict.MULTISTATIONARY, SignWitness(x, w, sign_of(x)), tuple(trail))
        sign_result = W
        trail.append("sign test: intersection is {0}")
    else:
        trail.append("sign test: hypotheses not met")

    inj = None
    try:
        inj = injectivity_test(net, km)
        if inj.verdict is Verdict.MONOSTATIONARY:
            trail.append("injectivity: certificate")
            return MultistatVerdict(inj.verdict, inj.evidence, tuple(trail))
        trail.append(f"injectivity: {inj.evidence.reason}")
    except DimensionTooLarge:
        trail.append("injectivity: skipped (too large)")

    if use_decomposition:
        from .decomposition import combine_verdicts, finest_independent_decomposition, subnetwork_verdicts

        dec = finest_independent_decomposition(net)
        if len(dec.subnetworks) > 1 and dec.independent:
            combined = combine_verdicts(dec, subnetwork_verdicts(dec, km))
            trail.append(f"decomposition: {combined.verdict.value}")
            if combined.verdict is Verdict.MONOSTATIONARY:
                return MultistatVerdict(combined.verdict, combined.evidence, tuple(trail))

    if sign_result is not None:
        patterns = tuple(sorted(realizable_sign_patterns(sign_result)))
        return MultistatVerdict(Verdict.MONOSTATIONARY, EmptySignIntersection(patterns), tuple(trail))

    evidence = inj.evidence if inj is not None else Note("no applicable criterion")
    return MultistatVerdict(Verdict.INCONCLUSIVE, evidence, tuple(trail))
