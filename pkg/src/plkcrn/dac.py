"""The carbon-cycle model with direct air capture (DAC), as a power-law network.

Pools: A1 land, A2 atmosphere, A3 ocean, A4 geological stock, A5 DAC storage.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from fractions import Fraction

from .errors import ClassMismatch
from .kinetics import KineticModel
from .linalg import RationalMatrix, to_fraction
from .network import Network

SPECIES = ("A1", "A2", "A3", "A4", "A5")
RATE_NAMES = ("k1", "k2", "a_m", "a_m_beta", "k4", "k5", "k6")
ORDER_KEYS = ("p1", "p2", "q1", "q2")
RATE_KEYS = ("k1", "k2", "k4", "k5", "k6", "a_m", "beta")

_REACTIONS = (
    ("R1", {"A1": 1, "A2": 2}, {"A1": 2, "A2": 1}),
    ("R2", {"A1": 2, "A2": 1}, {"A1": 1, "A2": 2}),
    ("R3", {"A2": 1}, {"A3": 1}),
    ("R4", {"A3": 1}, {"A2": 1}),
    ("R5", {"A4": 1}, {"A2": 1}),
    ("R6", {"A2": 1}, {"A5": 1}),
    ("R7", {"A5": 1}, {"A4": 1}),
)


@dataclass(frozen=True)
class DacParameters:
    """Kinetic orders (exact rationals) and, optionally, rate constants."""

    p1: Fraction
    p2: Fraction
    q1: Fraction
    q2: Fraction
    k1: float | None = None
    k2: float | None = None
    k4: float | None = None
    k5: float | None = None
    k6: float | None = None
    a_m: float | None = None
    beta: float | None = None

    def __post_init__(self):
        for key in ORDER_KEYS:
            object.__setattr__(self, key, to_fraction(getattr(self, key)))
        given = [getattr(self, k) for k in RATE_KEYS]
        if any(v is not None for v in given) and any(v is None for v in given):
            missing = [k for k in RATE_KEYS if getattr(self, k) is None]
            raise ValueError(f"rate constants must be given together; missing {', '.join(missing)}")
        for k in RATE_KEYS:
            v = getattr(self, k)
            if v is not None:
                v = float(v)
                if not v > 0:
                    raise ValueError(f"{k} must be positive, got {v}")
                object.__setattr__(self, k, v)

    @classmethod
    def from_mapping(cls, values: dict) -> "DacParameters":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown DAC parameter(s): {', '.join(sorted(unknown))}")
        missing = [k for k in ORDER_KEYS if k not in values]
        if missing:
            raise ValueError(f"kinetic orders required: {', '.join(missing)}")
        return cls(**values)

    @property
    def has_rates(self) -> bool:
        return self.k1 is not None

    @property
    def P(self) -> Fraction:
        return self.p2 - self.p1

    @property
    def Q(self) -> Fraction:
        return self.q2 - self.q1

    def rate_values(self) -> tuple[float, ...] | None:
        if not self.has_rates:
            return None
        return (self.k1, self.k2, self.a_m, self.a_m * self.beta, self.k4, self.k5, self.k6)

    def with_(self, **changes) -> "DacParameters":
        return replace(self, **changes)

    def storage_factor(self) -> float:
        """1/beta + k5/k4 + k5/k6 + 1: total carbon per unit A2 outside the land pool."""
        return 1.0 / self.beta + self.k5 / self.k4 + self.k5 / self.k6 + 1.0


def dac_network() -> Network:
    return Network.build(SPECIES, _REACTIONS)


def kinetic_orders(params: DacParameters) -> RationalMatrix:
    p1, p2, q1, q2 = params.p1, params.p2, params.q1, params.q2
    return RationalMatrix(
        [
            [p1, q1, 0, 0, 0],
            [p2, q2, 0, 0, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 1, 0, 0],
            [0, 0, 0, 1, 0],
            [0, 1, 0, 0, 0],
            [0, 0, 0, 0, 1],
        ]
    )


def dac_preset(params: DacParameters) -> tuple[Network, KineticModel]:
    net = dac_network()
    return net, KineticModel(net, kinetic_orders(params), RATE_NAMES, params.rate_values())


def dac_parameters_from_model(km: KineticModel) -> DacParameters:
    """Recover DAC parameters from a model with exactly the DAC network and linear rows R3..R7."""
    net = km.network
    ref = dac_network()
    pairs = [(r.reactant, r.product) for r in net.reactions]
    if net.species_names != list(SPECIES) or pairs != [(r.reactant, r.product) for r in ref.reactions]:
        raise ClassMismatch("model is not the DAC network (species A1..A5, reactions R1..R7 in order)")
    F = km.F
    expected = kinetic_orders(DacParameters(F[0, 0], F[1, 0], F[0, 1], F[1, 1]))
    if F != expected:
        raise ClassMismatch("kinetic orders of R1/R2 must involve only A1, A2 and R3..R7 must be linear")
    p1, p2, q1, q2 = F[0, 0], F[1, 0], F[0, 1], F[1, 1]
    if km.rate_values is None:
        return DacParameters(p1, p2, q1, q2)
    k1, k2, am, ambeta, k4, k5, k6 = km.rate_values
    return DacParameters(p1, p2, q1, q2, k1=k1, k2=k2, k4=k4, k5=k5, k6=k6, a_m=am, beta=ambeta / am)
