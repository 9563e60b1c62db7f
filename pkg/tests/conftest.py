import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from plkcrn.dac import DacParameters, dac_preset

FIXTURES = Path(__file__).parent / "fixtures"

RATES = dict(k1=0.8, k2=0.5, k4=0.2, k5=0.3, k6=0.1, a_m=1.5, beta=0.9)

# Initial states that go with the shipped fixtures.
BISTABLE_INIT = np.ones(5)
PNULL_INIT = np.array([1.0, 2.0, 3.0, 4.0, 5.0])


def dac_rhs(p: DacParameters, x) -> np.ndarray:
    """The five carbon balance equations written out by hand."""
    A1, A2, A3, A4, A5 = x
    land_in = p.k1 * A1 ** float(p.p1) * A2 ** float(p.q1)
    land_out = p.k2 * A1 ** float(p.p2) * A2 ** float(p.q2)
    return np.array([
        land_in - land_out,
        land_out - land_in - p.a_m * A2 + p.a_m * p.beta * A3 + p.k4 * A4 - p.k5 * A2,
        p.a_m * A2 - p.a_m * p.beta * A3,
        p.k6 * A5 - p.k4 * A4,
        p.k5 * A2 - p.k6 * A5,
    ])


def random_orders(rng, label=None, den=6, span=3):
    """Random rational (p1, p2, q1, q2); ``label`` in {positive, negative, None}."""
    def r():
        return Fraction(int(rng.integers(-span * den, span * den + 1)), den)

    while True:
        p1, p2, q1, q2 = r(), r(), r(), r()
        P, Q = p2 - p1, q2 - q1
        if P == 0 or Q == 0:
            continue
        if label == "positive" and P * Q < 0:
            continue
        if label == "negative" and P * Q > 0:
            continue
        return p1, p2, q1, q2


def random_rates(rng):
    vals = np.exp(rng.uniform(np.log(0.05), np.log(5.0), size=7))
    return dict(zip(("k1", "k2", "k4", "k5", "k6", "a_m", "beta"), vals.tolist()))


@pytest.fixture
def dac_negative():
    return dac_preset(DacParameters(Fraction(1, 2), 1, 2, 1, **RATES))


@pytest.fixture
def reduction_fixture():
    return json.loads((FIXTURES / "reduction.json").read_text())
