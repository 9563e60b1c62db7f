"""Builds reduction.json: an initial state on dac.crn whose steady state has
A2* = lam * A2^0 for a chosen lam.

The total carbon at the steady state is
    (k1/k2)^(1/P) * A2*^(-Q/P) + (1 + 1/beta + k5/k4 + k5/k6) * A2*,
so fixing lam and A2^0 fixes SUM^0 = total - A2^0, which is split over the
other pools in fixed proportions.

Run: python3 tests/fixtures/backsolve_reduction.py > tests/fixtures/reduction.json
"""

import json
from pathlib import Path

from plkcrn.dac import dac_parameters_from_model
from plkcrn.modelio import parse_network_file

LAM = 0.6
A2_0 = 3.0
SPLIT = (0.4, 0.2, 0.2, 0.2)  # shares of SUM^0 in A1, A3, A4, A5


def build():
    _, km = parse_network_file((Path(__file__).parent / "dac.crn").read_text())
    p = dac_parameters_from_model(km)
    P, Q = float(p.P), float(p.Q)
    a2 = LAM * A2_0
    total = (p.k1 / p.k2) ** (1 / P) * a2 ** (-Q / P) + p.storage_factor() * a2
    sum0 = total - A2_0
    a1, a3, a4, a5 = (s * sum0 for s in SPLIT)
    return {"lambda": LAM, "init": {"A1": a1, "A2": A2_0, "A3": a3, "A4": a4, "A5": a5}}


if __name__ == "__main__":
    print(json.dumps(build(), indent=2))
