import itertools
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog as scipy_linprog

from plkcrn.dac import DacParameters, dac_preset
from plkcrn.kinetics import SubspaceBasis, kinetic_flux_orthocomplement, stoichiometric_subspace
from plkcrn.network import Network, stoichiometric_matrix
from plkcrn.polynomial import MultivariatePolynomial
from plkcrn.structural import (
    EmptySignIntersection,
    InjectivityCertificate,
    MixedSignMonomials,
    SignWitness,
    Verdict,
    acr_species,
    build_m_star,
    det_m_star,
    injectivity_test,
    multistationarity_pipeline,
    realizable_sign_patterns,
    sign_intersection_test,
    sign_of,
)
from plkcrn.kinetics import KineticModel


def dac(p1, p2, q1, q2):
    return dac_preset(DacParameters(p1, p2, q1, q2))


# The determinant of M* for the DAC network as a sum of (coefficient, k's, z's):
# coefficient is a linear form in the kinetic orders.
REFERENCE_DET = [
    (("p1", -1), (1, 2, 3, 4), (1, 4, 5, 6)),
    (("p1", -1), (1, 2, 3, 5), (1, 4, 6, 7)),
    (("p1", -1), (1, 2, 4, 5), (1, 3, 5, 7)),
    (("p1", -1), (1, 3, 4, 5), (1, 4, 5, 7)),
    (("p2", 1), (1, 2, 3, 4), (2, 4, 5, 6)),
    (("p2", 1), (1, 2, 3, 5), (2, 4, 6, 7)),
    (("p2", 1), (1, 2, 4, 5), (2, 3, 5, 7)),
    (("p2", 1), (1, 3, 4, 5), (2, 4, 5, 7)),
    (("q1", 1), (2, 3, 4, 5), (1, 4, 5, 7)),
    (("q2", -1), (2, 3, 4, 5), (2, 4, 5, 7)),
]


def reference_det_terms(orders: dict) -> dict:
    """Monomial (as frozenset of variable names) -> coefficient, zero terms dropped."""
    out = {}
    for (name, sign), ks, zs in REFERENCE_DET:
        key = frozenset([f"k{i}" for i in ks] + [f"z{i}" for i in zs])
        out[key] = out.get(key, 0) + sign * orders[name]
    return {k: v for k, v in out.items() if v != 0}


def our_det_terms(det: MultivariatePolynomial) -> dict:
    out = {}
    for e, c in det.sorted_terms():
        assert all(x in (0, 1) for x in e)
        out[frozenset(v for v, x in zip(det.variables, e) if x)] = c
    return out


def det_for(orders):
    net, km = dac(*orders)
    return det_m_star(build_m_star(stoichiometric_matrix(net), km.F))


# --- determinant ---------------------------------------------------------------


def test_determinant_for_injective_negative_orders():
    t = time.perf_counter()
    det = det_for((-1, 1, 1, -1))
    elapsed = time.perf_counter() - t
    ours = our_det_terms(det)
    assert len(ours) == 10
    assert ours == reference_det_terms(dict(p1=-1, p2=1, q1=1, q2=-1))
    assert ours[frozenset(["k1", "k2", "k3", "k4", "z1", "z4", "z5", "z6"])] == 1
    assert all(c > 0 for c in ours.values())
    assert elapsed < 1.0


def test_determinant_all_negative_for_mirrored_orders():
    det = det_for((1, -1, -1, 1))
    assert len(det) == 10
    assert all(c < 0 for _, c in det.sorted_terms())


orders_st = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@settings(max_examples=40, deadline=None)
@given(orders_st, orders_st, orders_st, orders_st)
def test_determinant_matches_displayed_formula(p1, p2, q1, q2):
    ours = our_det_terms(det_for((p1, p2, q1, q2)))
    assert ours == reference_det_terms(dict(p1=p1, p2=p2, q1=q1, q2=q2))


def test_symbolic_vs_numeric_determinant():
    rng = np.random.default_rng(5)
    for _ in range(10):
        orders = tuple(Fraction(int(v), 3) for v in rng.integers(-6, 7, 4))
        net, km = dac(*orders)
        mstar = build_m_star(stoichiometric_matrix(net), km.F)
        det = det_m_star(mstar)
        for point in (np.ones(len(mstar.variables)), rng.uniform(0.5, 2, len(mstar.variables))):
            numeric = np.linalg.det(mstar.evaluate_float(point))
            symbolic = det.evaluate_float(point)
            assert symbolic == pytest.approx(numeric, rel=1e-9, abs=1e-12)


def test_injectivity_verdicts():
    net, km = dac(-1, 1, 1, -1)
    v = injectivity_test(net, km)
    assert v.verdict is Verdict.MONOSTATIONARY and isinstance(v.evidence, InjectivityCertificate)
    assert v.evidence.sign == 1
    net, km = dac(1, -1, -1, 1)
    assert injectivity_test(net, km).evidence.sign == -1
    net, km = dac(0, 1, 0, 1)
    v = injectivity_test(net, km)
    assert v.verdict is Verdict.INCONCLUSIVE and isinstance(v.evidence, MixedSignMonomials)
    assert v.evidence.positive and v.evidence.negative


def test_mass_action_injectivity_examples():
    # A + B <-> C is injective
    net = Network.build(["A", "B", "C"], [("R1", {"A": 1, "B": 1}, {"C": 1}), ("R2", {"C": 1}, {"A": 1, "B": 1})])
    assert injectivity_test(net, KineticModel.mass_action(net)).verdict is Verdict.MONOSTATIONARY
    # 2A <-> A + B is not: on A + B = T the rate (k1 + k2) A^2 - k2 T A is not monotone
    net = Network.build(["A", "B"], [("R1", {"A": 2}, {"A": 1, "B": 1}), ("R2", {"A": 1, "B": 1}, {"A": 2})])
    assert injectivity_test(net, KineticModel.mass_action(net)).verdict is Verdict.INCONCLUSIVE


# --- sign vectors -------------------------------------------------------------------


def scipy_realizable(basis, m):
    """Enumerate sign patterns of span(basis) by brute force over {-,0,+}^m with scipy LPs."""
    B = np.array([[float(x) for x in b] for b in basis]).T  # m x d
    d = B.shape[1]
    out = set()
    for pattern in itertools.product((-1, 0, 1), repeat=m):
        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for i, s in enumerate(pattern):
            if s == 0:
                A_eq.append(B[i])
                b_eq.append(0.0)
            else:
                A_ub.append(-s * B[i])
                b_ub.append(-1.0)
        res = scipy_linprog(np.zeros(d), A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                            A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                            bounds=[(None, None)] * d, method="highs")
        if res.status == 0:
            out.add(pattern)
    return out


small_int = st.integers(-2, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2).flatmap(lambda d: st.lists(st.lists(small_int, min_size=4, max_size=4), min_size=d, max_size=d)))
def test_sign_patterns_match_brute_force(rows):
    from plkcrn.linalg import reduced_basis

    basis = reduced_basis(rows, 4)
    if not basis:
        return
    sub = SubspaceBasis(4, tuple(basis), "test")
    assert realizable_sign_patterns(sub) == scipy_realizable(basis, 4)


def test_positive_class_sign_witness():
    for orders in [(0, 1, 0, 1), (1, 2, 1, 3), (Fraction(-1, 2), 1, -2, 1)]:
        net, km = dac(*orders)
        S = stoichiometric_subspace(net)
        W = kinetic_flux_orthocomplement(km)
        found, (x, w) = sign_intersection_test(S, W)
        assert found
        assert sign_of(x) in {(1, -1, -1, -1, -1), (-1, 1, 1, 1, 1)}
        assert sign_of(x) == sign_of(w)


def test_negative_class_sign_intersection_empty():
    for orders in [(-1, 1, 1, -1), (Fraction(1, 2), 1, 2, 1), (0, 1, 1, 0)]:
        net, km = dac(*orders)
        found, _ = sign_intersection_test(stoichiometric_subspace(net), kinetic_flux_orthocomplement(km))
        assert not found


def test_orthocomplement_sign_patterns_positive_class():
    net, km = dac(0, 1, 0, 1)
    pats = realizable_sign_patterns(kinetic_flux_orthocomplement(km))
    assert pats == {(0, 0, 0, 0, 0), (-1, 1, 1, 1, 1), (1, -1, -1, -1, -1)}


# --- pipeline and ACR ---------------------------------------------------------------


def test_pipeline_per_class():
    t = time.perf_counter()
    v = multistationarity_pipeline(*dac(0, 1, 0, 1))
    assert v.verdict is Verdict.MULTISTATIONARY and isinstance(v.evidence, SignWitness)
    v = multistationarity_pipeline(*dac(-1, 1, 1, -1))
    assert v.verdict is Verdict.MONOSTATIONARY and isinstance(v.evidence, InjectivityCertificate)
    assert multistationarity_pipeline(*dac(1, 1, 0, 1)).verdict is Verdict.MONOSTATIONARY
    assert multistationarity_pipeline(*dac(0, 1, 1, 1)).verdict is Verdict.MONOSTATIONARY
    assert multistationarity_pipeline(*dac(1, 1, 2, 2)).verdict is Verdict.INCONCLUSIVE
    assert time.perf_counter() - t < 1.0


def test_negative_without_certificate():
    # negative class outside both sign configurations of the determinant:
    # the land-atmosphere block is settled by the empty sign intersection
    v = multistationarity_pipeline(*dac(Fraction(1, 2), 1, 2, 1))
    assert v.verdict is Verdict.MONOSTATIONARY
    rules = [sv.rule for sv in v.evidence.verdicts]
    assert rules == ["SignTest", "DeficiencyZeroMassAction", "DeficiencyZeroMassAction"]
    v = multistationarity_pipeline(*dac(Fraction(1, 2), 1, 2, 1), use_decomposition=False)
    assert v.verdict is Verdict.MONOSTATIONARY
    assert isinstance(v.evidence, EmptySignIntersection)


def test_multistationary_requires_witness():
    from plkcrn.structural import MultistatVerdict, Note

    with pytest.raises(ValueError):
        MultistatVerdict(Verdict.MULTISTATIONARY, Note("no witness"))


def test_acr_sets():
    t = time.perf_counter()
    assert acr_species(dac(1, 1, 0, 1)[1]) == ["A2", "A3", "A4", "A5"]
    assert acr_species(dac(0, 1, 1, 1)[1]) == ["A1"]
    assert acr_species(dac(0, 1, 0, 1)[1]) == []
    assert acr_species(dac(-1, 1, 1, -1)[1]) == []
    assert time.perf_counter() - t < 0.04
