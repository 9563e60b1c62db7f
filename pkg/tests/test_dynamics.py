import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import BISTABLE_INIT, FIXTURES, PNULL_INIT, RATES, dac_rhs, random_orders, random_rates
from plkcrn import dynamics as D
from plkcrn.dac import DacParameters, dac_parameters_from_model, dac_preset
from plkcrn.errors import (
    DegenerateClass,
    Infeasible,
    NonpositiveState,
    NoRoot,
    PNullShape,
    StepSizeUnderflow,
    Unbounded,
)
from plkcrn.kinetics import KineticModel, evaluate_rates
from plkcrn.modelio import parse_network_file
from plkcrn.network import Network, incidence_matrix


def load(name):
    return parse_network_file((FIXTURES / name).read_text())


def pnull_params(**over):
    return DacParameters(1, 1, 1, 0, **{**dict(k1=1, k2=2, k4=0.5, k5=0.3, k6=0.7, a_m=1.2, beta=0.8), **over})


# --- vector field ------------------------------------------------------------------


def test_vector_field_matches_hand_equations():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        p = DacParameters(*random_orders(rng), **random_rates(rng))
        km = dac_preset(p)[1]
        x = np.exp(rng.uniform(-2, 2, 5))
        ours = D.vector_field(km, x)
        ref = dac_rhs(p, x)
        scale = np.max(np.abs(evaluate_rates(km, x)))
        assert np.max(np.abs(ours - ref)) <= 1e-14 * scale * 4


def test_vector_field_conserves_total_and_ocean_equation(dac_negative):
    _, km = dac_negative
    p = dac_parameters_from_model(km)
    x = np.array([1.3, 0.7, 2.2, 0.4, 1.9])
    f = D.vector_field(km, x)
    assert abs(f.sum()) < 1e-14
    assert f[2] == pytest.approx(p.a_m * x[1] - p.a_m * p.beta * x[2], rel=1e-14)
    with pytest.raises(NonpositiveState):
        D.vector_field(km, [1, 1, -1, 1, 1])


def test_jacobian_matches_central_differences():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = DacParameters(*random_orders(rng), **random_rates(rng))
        km = dac_preset(p)[1]
        x = np.exp(rng.uniform(-1, 1, 5))
        J = D.jacobian(km, x)
        fd = np.zeros_like(J)
        for j in range(5):
            h = 1e-6 * x[j]
            e = np.zeros(5)
            e[j] = h
            fd[:, j] = (D.vector_field(km, x + e) - D.vector_field(km, x - e)) / (2 * h)
        assert np.max(np.abs(J - fd)) <= 1e-6 * max(np.max(np.abs(J)), 1e-12)


# --- parametrization -----------------------------------------------------------------


def test_parametrized_points_are_equilibria():
    rng = np.random.default_rng(8)
    for i in range(100):
        label = "positive" if i % 2 else "negative"
        p = DacParameters(*random_orders(rng, label), **random_rates(rng))
        km = dac_preset(p)[1]
        A2 = float(np.exp(rng.uniform(-2, 2)))
        x = D.dac_equilibrium_parametrization(p, A2)
        scale = np.max(evaluate_rates(km, x))
        assert np.max(np.abs(D.vector_field(km, x))) < 1e-10 * scale
        assert x[2] == A2 / p.beta
        # equivalent closed form through P and Rq
        A1 = (p.k1 / p.k2) ** (1 / float(p.P)) * A2 ** (-float(p.Q / p.P))
        assert x[0] == pytest.approx(A1, rel=1e-12)


def test_parametrization_needs_p1_ne_p2():
    with pytest.raises(PNullShape):
        D.dac_equilibrium_parametrization(pnull_params(), 1.0)


def test_equilibria_are_complex_balanced():
    p = DacParameters(Fraction(1, 2), 1, 2, 1, **RATES)
    km = dac_preset(p)[1]
    x = D.dac_equilibrium_parametrization(p, 1.7)
    assert D.complex_balance_residual(km, x) < 1e-8 * np.max(evaluate_rates(km, x))
    assert D.complex_balance_residual(km, x * 1.3) > 1e-3


def test_triangle_complex_balance():
    # A -> B -> C -> A with unit rates balances at A = B = C
    net = Network.build(["A", "B", "C"], [("R1", {"A": 1}, {"B": 1}), ("R2", {"B": 1}, {"C": 1}), ("R3", {"C": 1}, {"A": 1})])
    km = KineticModel.mass_action(net, rate_values=(1, 1, 1))
    assert D.complex_balance_residual(km, [2, 2, 2]) == 0
    km = KineticModel.mass_action(net, rate_values=(1, 2, 4))
    # fluxes equal: A = 2B = 4C
    assert D.complex_balance_residual(km, [4, 2, 1]) == 0
    assert incidence_matrix(net).shape == (3, 3)


# --- integration ---------------------------------------------------------------------


def test_pnull_trajectory_reaches_robust_value():
    p = pnull_params()
    km = dac_preset(p)[1]
    traj = D.integrate(km, PNULL_INIT, 200.0)
    A2_star = (p.k1 / p.k2) ** (1 / float(p.q2 - p.q1))
    assert traj.final[1] == pytest.approx(A2_star, rel=1e-6)
    assert traj.drift < 1e-9


def test_stationary_start_stays_put(dac_negative):
    _, km = dac_negative
    p = dac_parameters_from_model(km)
    x = D.dac_equilibrium_parametrization(p, 1.1)
    traj = D.integrate(km, x, 50.0)
    assert np.max(np.abs(traj.final - x) / x) < 1e-8


def test_zero_horizon_echoes_initial_state(dac_negative):
    traj = D.integrate(dac_negative[1], PNULL_INIT, 0.0)
    assert len(traj.t) == 1 and np.array_equal(traj.final, PNULL_INIT)


def test_positivity_guard_reports_underflow():
    # Q > 0 makes the P-null interior equilibrium repelling; A1 is driven to the floor
    p = DacParameters(1, 1, 0, 1, k1=1, k2=2, k4=0.5, k5=0.3, k6=0.7, a_m=1.2, beta=0.8)
    km = dac_preset(p)[1]
    with pytest.raises(StepSizeUnderflow) as info:
        D.integrate(km, PNULL_INIT, 200.0)
    assert info.value.state is not None and np.all(info.value.state > 0)


def test_trajectory_csv_layout(dac_negative):
    traj = D.integrate(dac_negative[1], PNULL_INIT, 1.0)
    text = D.trajectory_csv(traj)
    lines = text.splitlines()
    assert lines[0] == "t,A1,A2,A3,A4,A5"
    first = lines[1].split(",")
    assert len(first) == 6
    assert all(len(v.split("e")[0].replace("-", "").replace(".", "")) == 17 for v in first)
    assert float(first[2]) == 2.0


# --- steady states -------------------------------------------------------------------


def test_newton_recovers_parametrized_point(dac_negative):
    _, km = dac_negative
    p = dac_parameters_from_model(km)
    x = D.dac_equilibrium_parametrization(p, 0.8)
    guess = x * (1 + 0.01 * np.array([1, -1, 1, -1, 0.5]))
    guess *= x.sum() / guess.sum()
    cls = D.StoichClassSpec.from_state(km, guess)
    found = D.find_steady_state(km, cls, guess)
    assert np.max(np.abs(found - x) / x) < 1e-8


def test_newton_rejects_guess_outside_class(dac_negative):
    _, km = dac_negative
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT)
    with pytest.raises(ValueError):
        D.find_steady_state(km, cls, PNULL_INIT * 2)


def test_pnull_newton_always_finds_robust_a2():
    p = pnull_params()
    km = dac_preset(p)[1]
    rng = np.random.default_rng(4)
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT)
    A2_star = (p.k1 / p.k2) ** (1 / float(p.q2 - p.q1))
    for x in D.sample_class(km, cls, 20, rng):
        try:
            found = D.find_steady_state(km, cls, x)
        except Exception:
            continue
        assert found[1] == pytest.approx(A2_star, rel=1e-8)


def test_stoich_class_floor_must_be_below_state(dac_negative):
    with pytest.raises(ValueError):
        D.StoichClassSpec.from_state(dac_negative[1], PNULL_INIT, eps=1.0)


# --- multistart -------------------------------------------------------------------


def test_probe_pnull_finds_one():
    _, km = load("pnull.crn")
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT)
    eq = D.multistart_probe(km, cls, 64, seed=1)
    assert len(eq) == 1


def test_probe_bistable_fixture_finds_two_and_is_deterministic():
    _, km = load("bistable.crn")
    cls = D.StoichClassSpec.from_state(km, BISTABLE_INIT)
    eq = D.multistart_probe(km, cls, 64, seed=3)
    assert len(eq) >= 2
    assert all(r < 1e-8 for r in eq.residuals)
    # analytic roots of 5 = 1/A2 + 5 A2
    roots = sorted(p[1] for p in eq.points)
    assert roots == pytest.approx([(5 - 5 ** 0.5) / 10, (5 + 5 ** 0.5) / 10], rel=1e-9)
    again = D.multistart_probe(km, cls, 64, seed=3)
    assert all(np.array_equal(a, b) for a, b in zip(eq.points, again.points))


def test_probe_rejects_zero_starts(dac_negative):
    cls = D.StoichClassSpec.from_state(dac_negative[1], PNULL_INIT)
    with pytest.raises(ValueError):
        D.multistart_probe(dac_negative[1], cls, 0)


def test_sampling_stays_in_class():
    _, km = load("bistable.crn")
    cls = D.StoichClassSpec.from_state(km, BISTABLE_INIT)
    pts = D.sample_class(km, cls, 50, np.random.default_rng(0))
    assert np.all(pts > 0)
    assert np.allclose(pts.sum(axis=1), 5.0, rtol=1e-12)


# --- reduction conditions --------------------------------------------------------------


def test_necessary_condition_backsolved(reduction_fixture):
    _, km = load("dac.crn")
    p = dac_parameters_from_model(km)
    x0 = np.array([reduction_fixture["init"][s] for s in ("A1", "A2", "A3", "A4", "A5")])
    A2_0, SUM_0 = x0[1], x0.sum() - x0[1]
    lam = reduction_fixture["lambda"]
    assert abs(D.necessary_condition_residual(p, A2_0, SUM_0, lam)) < 1e-10
    roots = D.necessary_condition_roots(p, A2_0, SUM_0)
    assert roots == pytest.approx([lam], abs=1e-8)
    # the steady state in that class has A2 = lam * A2_0
    cls = D.StoichClassSpec.from_state(km, x0)
    x = D.settle(km, x0)
    assert x[1] == pytest.approx(lam * A2_0, rel=1e-8)
    assert cls.totals[0] == pytest.approx(x.sum(), rel=1e-9)


def test_necessary_condition_at_equilibrium_start(dac_negative):
    p = dac_parameters_from_model(dac_negative[1])
    x = D.dac_equilibrium_parametrization(p, 2.0)
    res = D.necessary_condition_residual(p, x[1], x.sum() - x[1], 1.0 - 1e-15)
    assert abs(res) < 1e-9


def test_necessary_condition_without_sign_change(dac_negative):
    p = dac_parameters_from_model(dac_negative[1])
    # little A2 and a large total: the right-hand side never catches up on (0, 1)
    with pytest.raises(NoRoot):
        D.necessary_condition_roots(p, 0.1, 100.0)


def test_necessary_condition_rejects_null_classes():
    with pytest.raises(DegenerateClass):
        D.necessary_condition_residual(pnull_params(), 1.0, 2.0, 0.5)


def test_class_extrema_on_simplex(dac_negative):
    _, km = dac_negative
    x0 = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    cls = D.StoichClassSpec.from_state(km, x0)
    assert D.class_extremum(km, cls, [0, 2, 3, 4], "max").value == 15
    assert D.class_extremum(km, cls, range(5), "max").value == 15
    assert D.class_extremum(km, cls, range(5), "min").value == 15
    floored = D.StoichClassSpec.from_state(km, x0, eps=0.25)
    assert D.class_extremum(km, floored, [1], "min").value == Fraction(1, 4)
    assert D.class_extremum(km, floored, [0, 2, 3, 4], "max").value == Fraction(59, 4)


def test_class_extremum_errors():
    net = Network.build(["A"], [("in", {}, {"A": 1}), ("out", {"A": 1}, {})])
    km = KineticModel.mass_action(net, rate_values=(1, 1))
    cls = D.StoichClassSpec.from_state(km, [1.0])
    with pytest.raises(Unbounded):
        D.class_extremum(km, cls, [0], "max")
    _, km = dac_preset(pnull_params())
    cls = D.StoichClassSpec((1.0,) * 5, D.StoichClassSpec.from_state(km, np.ones(5)).W, (5.0,), eps=1.5)
    with pytest.raises(Infeasible):
        D.class_extremum(km, cls, [0], "max")


def test_pnull_condition_vacuous_at_zero_floor():
    _, km = dac_preset(pnull_params())
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT, eps=0.0)
    rep = D.check_sufficient_conditions(pnull_params(), km, cls, "p-null")
    assert rep.vacuous and rep.quantities["T-M''"] == 0
    assert rep.status is D.ConditionStatus.FAILS


def test_pnull_condition_holds_with_floor_and_simulation_agrees():
    p = pnull_params(k1=100, k2=0.01)
    _, km = dac_preset(p)
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT, eps=0.01)
    rep = D.check_sufficient_conditions(p, km, cls, "p-null")
    assert rep.status is D.ConditionStatus.HOLDS
    assert rep.quantities["T-M''"] == pytest.approx(0.01)
    assert rep.confirmed is True
    assert rep.steady_state[1] < PNULL_INIT[1]


def test_pnull_condition_fails_when_robust_level_exceeds_total():
    p = pnull_params(k1=0.001, k2=1.0)  # A2* = 1000 > T
    _, km = dac_preset(p)
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT, eps=0.01)
    assert D.check_sufficient_conditions(p, km, cls, "p-null").status is D.ConditionStatus.FAILS


def test_posneg_condition_not_applicable_to_pnull():
    _, km = dac_preset(pnull_params())
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT, eps=0.1)
    rep = D.check_sufficient_conditions(pnull_params(), km, cls, "pos-neg")
    assert rep.status is D.ConditionStatus.NOT_APPLICABLE


def test_posneg_condition_reports_quantities(dac_negative):
    _, km = dac_negative
    p = dac_parameters_from_model(km)
    cls = D.StoichClassSpec.from_state(km, PNULL_INIT, eps=0.5)
    rep = D.check_sufficient_conditions(p, km, cls, "pos-neg")
    assert rep.quantities["m'"] == pytest.approx(0.5)
    assert rep.quantities["M''"] == pytest.approx(14.5)
    assert {"lhs", "rhs", "T"} <= set(rep.quantities)


def test_dynamics_timing():
    _, km = load("bistable.crn")
    t = time.perf_counter()
    cls = D.StoichClassSpec.from_state(km, BISTABLE_INIT)
    D.multistart_probe(km, cls, 64, seed=0)
    assert time.perf_counter() - t < 30
