"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linalg import to_fraction

Exponent = tuple[int, ...]


class MultivariatePolynomial:
    """Polynomial over a fixed, ordered tuple of variable names.

    Terms map exponent tuples to nonzero Fractions. Two polynomials can only be
    combined when they share the same variable tuple.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, object] | None = None):
        self.variables = tuple(variables)
        self.terms: dict[Exponent, Fraction] = {}
        for e, c in (terms or {}).items():
            if len(e) != len(self.variables):
                raise ValueError("exponent length does not match variable count")
            c = to_fraction(c)
            if c != 0:
                self.terms[tuple(e)] = self.terms.get(tuple(e), Fraction(0)) + c
        self.terms = {e: c for e, c in self.terms.items() if c != 0}

    @classmethod
    def constant(cls, variables: Sequence[str], value) -> "MultivariatePolynomial":
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def monomial(cls, variables: Sequence[str], powers: Mapping[str, int], coeff=1) -> "MultivariatePolynomial":
        pos = {v: i for i, v in enumerate(variables)}
        e = [0] * len(variables)
        for name, p in powers.items():
            e[pos[name]] += p
        return cls(variables, {tuple(e): coeff})

    def _check(self, other: "MultivariatePolynomial") -> None:
        if self.variables != other.variables:
            raise ValueError("polynomials over different variables")

    def _coerce(self, other) -> "MultivariatePolynomial":
        if isinstance(other, MultivariatePolynomial):
            self._check(other)
            return other
        return MultivariatePolynomial.constant(self.variables, other)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other) -> "MultivariatePolynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, Fraction(0)) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultivariatePolynomial(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "MultivariatePolynomial":
        return MultivariatePolynomial(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultivariatePolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultivariatePolynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MultivariatePolynomial":
        if not isinstance(other, MultivariatePolynomial):
            c = to_fraction(other)
            return MultivariatePolynomial(self.variables, {e: v * c for e, v in self.terms.items()})
        self._check(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MultivariatePolynomial(self.variables, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, MultivariatePolynomial):
            return self.variables == other.variables and self.terms == other.terms
        try:
            return self == self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        """Terms in descending lexicographic exponent order (canonical)."""
        return sorted(self.terms.items(), key=lambda t: t[0], reverse=True)

    def __len__(self) -> int:
        return len(self.terms)

    def coefficient(self, powers: Mapping[str, int] | Exponent) -> Fraction:
        if isinstance(powers, Mapping):
            pos = {v: i for i, v in enumerate(self.variables)}
            e = [0] * len(self.variables)
            for name, p in powers.items():
                e[pos[name]] += p
            powers = tuple(e)
        return self.terms.get(tuple(powers), Fraction(0))

    def degree(self, subset: Iterable[str] | None = None) -> set[int]:
        """Set of total degrees of the monomials, counting only ``subset`` variables."""
        idx = range(len(self.variables)) if subset is None else [self.variables.index(v) for v in subset]
        return {sum(e[i] for i in idx) for e in self.terms}

    def is_homogeneous(self, subset: Iterable[str] | None = None) -> bool:
        return len(self.degree(subset)) <= 1

    def evaluate(self, values: Mapping[str, object] | Sequence) -> Fraction:
        if isinstance(values, Mapping):
            vals = [to_fraction(values[v]) for v in self.variables]
        else:
            vals = [to_fraction(v) for v in values]
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for x, p in zip(vals, e):
                if p:
                    t *= x ** p
            total += t
        return total

    def evaluate_float(self, values: Sequence[float]) -> float:
        total = 0.0
        for e, c in self.terms.items():
            t = float(c)
            for x, p in zip(values, e):
                if p:
                    t *= x ** p
            total += t
        return total

    def format_monomial(self, e: Exponent) -> str:
        parts = []
        for v, p in zip(self.variables, e):
            if p == 1:
                parts.append(v)
            elif p > 1:
                parts.append(f"{v}^{p}")
        return "*".join(parts) or "1"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for e, c in self.sorted_terms():
            mono = self.format_monomial(e)
            if mono == "1":
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            sign = "-" if c < 0 else "+"
            out.append(f"{sign} {body}")
        s = " ".join(out)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self) -> str:
        return f"MultivariatePolynomial({self})"
