"""Numerical validation: integration, steady states, multistart probing and the
carbon-reduction conditions of the DAC model."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import lp
from .dac import DacParameters
from .errors import (
    DegenerateClass,
    Infeasible,
    NoConvergence,
    NonpositiveState,
    NoRoot,
    PNullShape,
    StepSizeUnderflow,
    Unbounded,
)
from .kinetics import KineticModel, evaluate_rates
from .linalg import to_fraction
from .network import conserved_quantity_basis, incidence_matrix, stoichiometric_matrix


@dataclass(frozen=True)
class Tolerances:
    """Every numerical default in one place."""

    rtol: float = 1e-8
    atol: float = 1e-10
    floor_factor: float = 1e-12  # positivity floor relative to the initial total
    max_steps: int = 1_000_000
    newton_tol: float = 1e-10
    newton_maxiter: int = 200
    dedup_rel: float = 1e-4


DEFAULTS = Tolerances()


# --- vector field ------------------------------------------------------------


def _positive(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(x > 0):
        raise NonpositiveState(f"state must be strictly positive, got {x.tolist()}")
    return x


def vector_field(km: KineticModel, x) -> np.ndarray:
    """dx/dt = N K(x)."""
    x = _positive(x)
    return stoichiometric_matrix(km.network).to_numpy() @ evaluate_rates(km, x)


def jacobian(km: KineticModel, x) -> np.ndarray:
    """d(N K(x))/dx = N diag(K(x)) F diag(1/x)."""
    x = _positive(x)
    N = stoichiometric_matrix(km.network).to_numpy()
    K = evaluate_rates(km, x)
    return N @ (K[:, None] * km.F.to_numpy() / x[None, :])


def complex_balance_residual(km: KineticModel, x) -> float:
    x = _positive(x)
    Ia = incidence_matrix(km.network).to_numpy()
    return float(np.max(np.abs(Ia @ evaluate_rates(km, x))))


class _Model:
    """Float matrices cached for the inner loops."""

    def __init__(self, km: KineticModel):
        if km.rate_values is None:
            raise ValueError("numeric rate constants are required")
        self.km = km
        self.N = stoichiometric_matrix(km.network).to_numpy()
        self.F = km.F.to_numpy()
        self.k = np.asarray(km.rate_values, dtype=float)
        self.W = np.array([[float(v) for v in w] for w in conserved_quantity_basis(km.network)]).reshape(
            -1, km.network.m
        )

    def rates(self, x):
        return self.k * np.exp(self.F @ np.log(x))

    def f(self, x):
        return self.N @ self.rates(x)

    def jac(self, x):
        K = self.rates(x)
        return self.N @ (K[:, None] * self.F / x[None, :])


# --- integration -------------------------------------------------------------

# Dormand-Prince 5(4)
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class Trajectory:
    species: list[str]
    t: np.ndarray
    x: np.ndarray  # shape (len(t), m)
    drift: float
    final_residual: float
    rejected_positivity: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]


def conservation_drift(W: np.ndarray, X: np.ndarray) -> float:
    if W.size == 0:
        return 0.0
    totals = X @ W.T
    ref = totals[0]
    return float(np.max(np.abs(totals - ref) / np.abs(ref)))


def integrate(km: KineticModel, x0, t_end: float, tol: Tolerances = DEFAULTS, floor: float | None = None) -> Trajectory:
    """Adaptive Dormand-Prince integration with a positivity guard.

    A step whose stages or result leave ``x > floor`` is retried at half the
    step size; this does not count as an error-control rejection.
    """
    model = _Model(km)
    x = _positive(x0).copy()
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if floor is None:
        floor = tol.floor_factor * float(np.sum(x))
    ts, xs = [0.0], [x.copy()]
    t = 0.0
    fx = model.f(x)
    scale = tol.atol + tol.rtol * np.abs(x)
    h = 0.01 * float(np.max(np.abs(x) / np.maximum(np.abs(fx), 1e-300))) if np.any(fx) else t_end
    h = min(max(h, 1e-12 * max(t_end, 1.0)), t_end) if t_end > 0 else 0.0
    positivity_rejects = 0
    steps = 0
    while t < t_end:
        if steps >= tol.max_steps:
            raise StepSizeUnderflow(f"step limit {tol.max_steps} reached at t={t}", t, x.copy())
        h = min(h, t_end - t)
        if h <= 1e-14 * max(abs(t), 1.0):
            raise StepSizeUnderflow(f"step size underflow at t={t}", t, x.copy())
        k = [fx]
        ok = True
        for s in range(1, 7):
            xs_ = x + h * sum(a * kk for a, kk in zip(_A[s], k))
            if not np.all(xs_ > floor):
                ok = False
                break
            k.append(model.f(xs_))
        if not ok:
            positivity_rejects += 1
            h *= 0.5
            continue
        K = np.array(k)
        x5 = x + h * (_B5 @ K)
        x4 = x + h * (_B4 @ K)
        if not np.all(x5 > floor):
            positivity_rejects += 1
            h *= 0.5
            continue
        scale = tol.atol + tol.rtol * np.maximum(np.abs(x), np.abs(x5))
        err = float(np.sqrt(np.mean(((x5 - x4) / scale) ** 2)))
        steps += 1
        if err <= 1.0:
            t += h
            x = x5
            fx = K[6]  # FSAL: last stage is f(x5)
            ts.append(t)
            xs.append(x.copy())
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** (-0.2)))
        if err > 1.0:
            factor = min(factor, 1.0)
        h *= factor
    X = np.array(xs)
    f_end = model.f(x)
    resid = float(np.max(np.abs(f_end)))
    return Trajectory(list(km.network.species_names), np.array(ts), X, conservation_drift(model.W, X), resid,
                      positivity_rejects)


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *traj.species])
    for t, row in zip(traj.t, traj.x):
        w.writerow([f"{t:.16e}", *(f"{v:.16e}" for v in row)])
    return buf.getvalue()


# --- stoichiometric classes and steady states -----------------------------------


@dataclass(frozen=True)
class StoichClassSpec:
    x0: tuple[float, ...]
    W: tuple[tuple[Fraction, ...], ...]  # conserved-quantity basis (exact)
    totals: tuple[float, ...]
    eps: float = 0.0

    @classmethod
    def from_state(cls, km: KineticModel, x0, eps: float = 0.0) -> "StoichClassSpec":
        x0 = tuple(float(v) for v in _positive(x0))
        W = tuple(conserved_quantity_basis(km.network))
        totals = tuple(float(sum(float(wi) * xi for wi, xi in zip(w, x0))) for w in W)
        if eps < 0 or (x0 and eps >= min(x0)):
            raise ValueError("positivity floor must satisfy 0 <= eps < min(x0)")
        return cls(x0, W, totals, eps)

    def W_float(self, m: int) -> np.ndarray:
        return np.array([[float(v) for v in w] for w in self.W]).reshape(-1, m)


def _independent_rows(km: KineticModel) -> list[int]:
    return stoichiometric_matrix(km.network).T.rref()[1]


def find_steady_state(km: KineticModel, cls: StoichClassSpec, guess, tol: Tolerances = DEFAULTS) -> np.ndarray:
    """Damped Newton on [independent rows of f(x); W x - T] in log coordinates.

    Each row of f is scaled by its gross flux (|N| K(x))_i, so a species with
    tiny turnover near the boundary cannot pass the test by being small.
    Working in u = log x keeps iterates positive; the line search halves the
    step until the scaled residual decreases.
    """
    model = _Model(km)
    m = km.network.m
    x = _positive(guess).copy()
    W = cls.W_float(m)
    T = np.asarray(cls.totals, dtype=float)
    if W.size and np.any(np.abs(W @ x - T) > 1e-8 * np.maximum(np.abs(T), 1e-300)):
        raise ValueError("initial guess does not lie in the stoichiometric class")
    rows = _independent_rows(km)
    absN = np.abs(model.N)
    tscale = np.maximum(np.abs(T), 1e-300)

    def residual(x):
        K = model.rates(x)
        gross = np.maximum(absN @ K, 1e-300)
        f = model.N @ K
        g = f[rows] / gross[rows]
        if W.size:
            g = np.concatenate([g, (W @ x - T) / tscale])
        return g, f, gross

    g, f, gross = residual(x)
    for _ in range(tol.newton_maxiter):
        if _converged(f, gross, W, x, T, tol):
            return x
        Ju = model.jac(x)[rows] * x[None, :] / gross[rows][:, None]
        if W.size:
            Ju = np.vstack([Ju, (W * x[None, :]) / tscale[:, None]])
        try:
            du = np.linalg.solve(Ju, -g)
        except np.linalg.LinAlgError:
            du = np.linalg.lstsq(Ju, -g, rcond=None)[0]
        du = np.clip(du, -20.0, 20.0)
        norm0 = np.linalg.norm(g)
        lam = 1.0
        while lam > 1e-12:
            xn = x * np.exp(lam * du)
            gn, fn, grossn = residual(xn)
            if np.all(np.isfinite(gn)) and np.linalg.norm(gn) < norm0:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search stalled at x={x.tolist()}")
        x, g, f, gross = xn, gn, fn, grossn
    if _converged(f, gross, W, x, T, tol):
        return x
    raise NoConvergence(f"no convergence after {tol.newton_maxiter} iterations; |f|={np.max(np.abs(f)):.3e}")


def _converged(f, gross, W, x, T, tol: Tolerances) -> bool:
    ok = bool(np.all(np.abs(f) < tol.newton_tol * gross))
    if W.size:
        ok = ok and bool(np.all(np.abs(W @ x - T) <= tol.newton_tol * np.maximum(np.abs(T), 1e-300)))
    return ok


def settle(km: KineticModel, x0, tol: Tolerances = DEFAULTS, t_max: float | None = None) -> np.ndarray:
    """Integrate towards an attracting steady state, polishing with Newton.

    Horizons double from 1/max(k) until Newton converges from the end point
    or ``t_max`` (default 100/min(k)) is reached.
    """
    rates = km.rate_values
    t_max = 100.0 / min(rates) if t_max is None else t_max
    x = _positive(x0).copy()
    cls = StoichClassSpec(tuple(float(v) for v in x), tuple(conserved_quantity_basis(km.network)), _totals(km, x))
    horizon = 1.0 / max(rates)
    elapsed = 0.0
    while True:
        step = min(horizon, t_max - elapsed)
        x = integrate(km, x, step, tol).final
        elapsed += step
        try:
            return find_steady_state(km, cls, x, tol)
        except NoConvergence:
            if elapsed >= t_max:
                raise
        horizon *= 2


def _totals(km: KineticModel, x) -> tuple[float, ...]:
    return tuple(float(sum(float(wi) * xi for wi, xi in zip(w, x))) for w in conserved_quantity_basis(km.network))


@dataclass
class EquilibriumSet:
    points: list[np.ndarray]
    residuals: list[float]
    seed: int
    n_starts: int
    n_converged: int
    threshold: float = DEFAULTS.dedup_rel

    def __len__(self) -> int:
        return len(self.points)


def sample_class(km: KineticModel, cls: StoichClassSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random positive points in the class.

    One positive conservation law: Dirichlet(1,..,1) on the simplex w.x = T.
    Otherwise: Gaussian steps in x0 + S, rejecting nonpositive points.
    """
    m = km.network.m
    W = cls.W_float(m)
    if W.shape[0] == 1 and np.all(W[0] > 0):
        y = rng.dirichlet(np.ones(m), size=n)
        return cls.totals[0] * y / W[0][None, :]
    x0 = np.asarray(cls.x0)
    S = stoichiometric_matrix(km.network).to_numpy()
    Q, _ = np.linalg.qr(S) if S.size else (np.zeros((m, 0)), None)
    rank = np.linalg.matrix_rank(S) if S.size else 0
    B = Q[:, :rank]
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 1000 * n:
            raise ValueError("could not sample positive points in the class")
        cand = x0 + B @ rng.normal(scale=np.linalg.norm(x0), size=rank)
        if np.all(cand > cls.eps) and np.all(cand > 0):
            out.append(cand)
    return np.array(out)


def multistart_probe(km: KineticModel, cls: StoichClassSpec, n_starts: int, seed: int = 0,
                     tol: Tolerances = DEFAULTS) -> EquilibriumSet:
    if n_starts < 1:
        raise ValueError("n_starts must be at least 1")
    rng = np.random.default_rng(seed)
    starts = sample_class(km, cls, n_starts, rng)
    model = _Model(km)
    found: list[np.ndarray] = []
    converged = 0
    for g in starts:
        try:
            x = find_steady_state(km, cls, g, tol)
        except NoConvergence:
            continue
        converged += 1
        if not any(np.max(np.abs(x - y)) <= tol.dedup_rel * np.max(np.abs(y)) for y in found):
            found.append(x)
    found.sort(key=lambda v: tuple(v))
    residuals = [float(np.max(np.abs(model.f(x)))) for x in found]
    return EquilibriumSet(found, residuals, seed, n_starts, converged, tol.dedup_rel)


# --- DAC-specific ------------------------------------------------------------


def dac_equilibrium_parametrization(params: DacParameters, A2: float) -> np.ndarray:
    """Positive equilibrium of a positive/negative DAC system with the given A2."""
    if params.p1 == params.p2:
        raise PNullShape("A1 is not determined by A2 when p1 = p2")
    if not A2 > 0:
        raise NonpositiveState("A2 must be positive")
    _require_rates(params)
    expo = float(params.q2 - params.q1)
    A1 = (params.k2 / params.k1 * A2 ** expo) ** (1.0 / float(params.p1 - params.p2))
    return np.array([A1, A2, A2 / params.beta, params.k5 / params.k4 * A2, params.k5 / params.k6 * A2])


def _require_rates(params: DacParameters) -> None:
    if not params.has_rates:
        raise ValueError("numeric rate constants are required")


def _require_pos_neg(params: DacParameters) -> None:
    if params.P == 0 or params.Q == 0:
        raise DegenerateClass("requires a positive or negative DAC system (p1 != p2 and q1 != q2)")


def necessary_condition_residual(params: DacParameters, A2_0: float, SUM_0: float, lam: float) -> float:
    """LHS - RHS of SUM0 + A2_0 = (k1/k2)^(1/P) (lam A2_0)^(-Rq) + storage * lam A2_0."""
    _require_pos_neg(params)
    _require_rates(params)
    P = float(params.P)
    Rq = float(params.Q / params.P)
    a2 = lam * A2_0
    rhs = (params.k1 / params.k2) ** (1.0 / P) * a2 ** (-Rq) + params.storage_factor() * a2
    return SUM_0 + A2_0 - rhs


def necessary_condition_roots(params: DacParameters, A2_0: float, SUM_0: float, grid: int = 4000,
                              xtol: float = 1e-15) -> list[float]:
    """All lam in (0, 1) where the residual changes sign on a uniform grid, refined by bisection."""
    _require_pos_neg(params)
    lams = np.linspace(0.0, 1.0, grid + 1)[1:-1]
    vals = [necessary_condition_residual(params, A2_0, SUM_0, float(l)) for l in lams]
    roots = []
    for i in range(len(lams) - 1):
        a, b = float(lams[i]), float(lams[i + 1])
        fa, fb = vals[i], vals[i + 1]
        if fa == 0:
            roots.append(a)
            continue
        if fa * fb < 0:
            while b - a > xtol:
                mid = 0.5 * (a + b)
                fm = necessary_condition_residual(params, A2_0, SUM_0, mid)
                if fm == 0:
                    a = b = mid
                    break
                if (fm < 0) == (fa < 0):
                    a, fa = mid, fm
                else:
                    b = mid
            roots.append(0.5 * (a + b))
    if vals and vals[-1] == 0:
        roots.append(float(lams[-1]))
    if not roots:
        raise NoRoot("no sign change of the necessary-condition residual on (0, 1)")
    return roots


@dataclass(frozen=True)
class Extremum:
    value: Fraction
    point: tuple[Fraction, ...]


def class_extremum(km: KineticModel, cls: StoichClassSpec, objective: Sequence[int], direction: str) -> Extremum:
    """Exact LP max/min of sum(x_i for i in objective) over {W x = T, x >= eps}.

    Totals are taken as the exact binary values of the float totals.
    """
    if direction not in ("max", "min"):
        raise ValueError("direction must be 'max' or 'min'")
    m = km.network.m
    c = [Fraction(0)] * m
    for i in objective:
        c[i] = Fraction(1 if direction == "min" else -1)
    eps = to_fraction(float(cls.eps))
    res = lp.linprog(
        c,
        A_eq=[list(w) for w in cls.W],
        b_eq=[to_fraction(t) for t in cls.totals],
        bounds=(eps, None),
    )
    if res.status == lp.INFEASIBLE:
        raise Infeasible("positivity floor leaves the class empty")
    if res.status == lp.UNBOUNDED:
        raise Unbounded("class is unbounded (network is not conservative)")
    value = res.fun if direction == "min" else -res.fun
    return Extremum(value, res.x)


class ConditionStatus(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not-applicable"


@dataclass
class ConditionReport:
    which: str
    status: ConditionStatus
    quantities: dict = field(default_factory=dict)
    vacuous: bool = False
    confirmed: bool | None = None  # simulation check when status is HOLDS
    steady_state: list[float] | None = None


def check_sufficient_conditions(params: DacParameters, km: KineticModel, cls: StoichClassSpec, which: str,
                                tol: Tolerances = DEFAULTS) -> ConditionReport:
    """Evaluate one of the two sufficient conditions for A2* < A2^0.

    ``which`` is "p-null" or "pos-neg". Extrema are taken over the class with
    the floor ``cls.eps``; when the condition holds, a steady state is solved
    from the initial state and A2* < A2^0 is checked.
    """
    _require_rates(params)
    P, Q = params.P, params.Q
    is_pnull = P == 0 and Q != 0
    is_posneg = P != 0 and Q != 0
    if (which == "p-null" and not is_pnull) or (which == "pos-neg" and not is_posneg):
        return ConditionReport(which, ConditionStatus.NOT_APPLICABLE)
    if which not in ("p-null", "pos-neg"):
        raise ValueError("which must be 'p-null' or 'pos-neg'")
    T = cls.totals[0]
    Mpp = class_extremum(km, cls, [0, 2, 3, 4], "max").value
    q: dict = {"T": T, "M''": float(Mpp), "eps": cls.eps, "A2_0": cls.x0[1]}
    vacuous = False
    if which == "p-null":
        A2_star = (params.k1 / params.k2) ** (1.0 / float(Q))
        bound = to_fraction(T) - Mpp
        q.update({"A2*": A2_star, "T-M''": float(bound)})
        vacuous = bound == 0
        holds = A2_star < float(bound)
    else:
        m_prime = float(class_extremum(km, cls, [1], "min").value)
        q["m'"] = m_prime
        if m_prime <= 0:
            vacuous = True
            holds = False
            q["lhs"] = None
        else:
            lhs = 1.0 + float(Mpp) / m_prime
            expo = 1.0 / float(params.p1 - params.p2)
            rhs = ((params.k2 / params.k1) ** expo * m_prime ** (float(Q) * expo)
                   + 1.0 / params.beta + params.k5 / params.k4 + params.k5 / params.k6)
            q.update({"lhs": lhs, "rhs": rhs})
            holds = lhs < rhs
    report = ConditionReport(which, ConditionStatus.HOLDS if holds else ConditionStatus.FAILS, q, vacuous)
    if holds:
        x = settle(km, np.asarray(cls.x0), tol)
        report.steady_state = x.tolist()
        report.confirmed = bool(x[1] < cls.x0[1])
    return report
