"""Text formats (.crn networks, .box box models) and the JSON report.

Both formats are line oriented; ``#`` starts a comment.

.crn::

    species: A1 A2
    reaction R1: A1 + 2 A2 -> 2 A1 + A2 rate=k1 orders: A1=1/2 A2=-1
    param k1 = 0.3

.box::

    pool A1
    pool A2
    transfer A2 -> A1 modifiers: A1 A2 rate=k1 orders: A1=1 A2=1
    param k1 = 0.3

Omitted ``orders:`` means mass action in .crn files and ``{source: 1}`` in
.box files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import InvalidNetwork, NonpositiveRate, ParseError, SelfTransfer, UndeclaredSpecies
from .kinetics import KineticModel
from .linalg import RationalMatrix
from .network import Complex, Network

_TOKEN = re.compile(
    r"(?P<arrow>->)"
    r"|(?P<punct>[+=:])"
    r"|(?P<num>-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?(?:/[0-9]+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<bad>\S)"
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int  # 1-based


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    for mt in _TOKEN.finditer(line):
        kind = mt.lastgroup
        if kind == "bad":
            raise ParseError(f"unexpected character {mt.group()!r}", lineno, mt.start() + 1)
        toks.append(_Tok(kind, mt.group(), mt.start() + 1))
    return toks


class _Cursor:
    def __init__(self, toks: list[_Tok], lineno: int, line: str):
        self.toks, self.i, self.lineno, self.line = toks, 0, lineno, line

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, msg: str, tok: _Tok | None = None, cls=ParseError):
        tok = tok or self.peek()
        col = tok.col if tok else len(self.line.rstrip()) + 1
        return cls(msg, self.lineno, col)

    def take(self, kind: str | None = None, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None or (kind and tok.kind != kind) or (text and tok.text != text):
            want = repr(text) if text else kind
            got = "end of line" if tok is None else repr(tok.text)
            raise self.error(f"expected {want}, got {got}")
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.i += 1
            return True
        return False

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def expect_end(self):
        if not self.done():
            raise self.error(f"unexpected {self.peek().text!r}")


def _rational(cur: _Cursor, tok: _Tok) -> Fraction:
    try:
        return Fraction(tok.text)
    except (ValueError, ZeroDivisionError):
        raise cur.error(f"bad number {tok.text!r}", tok) from None


def _lines(text: str) -> Iterable[tuple[int, str, list[_Tok]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokenize(line, lineno)
        if toks:
            yield lineno, line, toks


def _parse_side(cur: _Cursor, declared: dict[str, int], stop: set[str]) -> dict[str, Fraction]:
    tok = cur.peek()
    if tok is not None and tok.text == "0":
        cur.take()
        return {}
    out: dict[str, Fraction] = {}
    while True:
        coeff = Fraction(1)
        tok = cur.peek()
        if tok is not None and tok.kind == "num":
            coeff = _rational(cur, cur.take())
            if coeff <= 0:
                raise cur.error("stoichiometric coefficients must be positive", tok)
        name = cur.take("name")
        if name.text not in declared:
            raise cur.error(f"species {name.text!r} is not declared", name, UndeclaredSpecies)
        out[name.text] = out.get(name.text, Fraction(0)) + coeff
        nxt = cur.peek()
        if nxt is None or nxt.text in stop or (nxt.kind == "name" and nxt.text in stop):
            return out
        cur.take("punct", "+")


def _parse_orders(cur: _Cursor, declared: dict[str, int]) -> dict[str, Fraction]:
    cur.take("punct", ":")
    orders: dict[str, Fraction] = {}
    while not cur.done():
        name = cur.take("name")
        if name.text not in declared:
            raise cur.error(f"species {name.text!r} is not declared", name, UndeclaredSpecies)
        if name.text in orders:
            raise cur.error(f"order for {name.text} given twice", name)
        cur.take("punct", "=")
        orders[name.text] = _rational(cur, cur.take("num"))
    return orders


def _parse_rate(cur: _Cursor, uses: dict[str, tuple[int, int]]) -> str:
    cur.take("name", "rate")
    cur.take("punct", "=")
    tok = cur.take("name")
    uses.setdefault(tok.text, (cur.lineno, tok.col))
    return tok.text


def _parse_param(cur: _Cursor, params: dict[str, float], where: dict[str, tuple[int, int]]):
    name = cur.take("name")
    cur.take("punct", "=")
    tok = cur.take("num")
    value = _rational(cur, tok)
    cur.expect_end()
    if name.text in params:
        raise cur.error(f"parameter {name.text} given twice", name)
    if value <= 0:
        raise cur.error(f"rate constant {name.text} must be positive", tok, NonpositiveRate)
    params[name.text] = float(value)
    where[name.text] = (cur.lineno, name.col)


def _check_params(params: dict[str, float], where: dict, uses: dict) -> None:
    for p in params:
        if p not in uses:
            raise ParseError(f"parameter {p} is not used by any reaction", *where[p])
    if params:
        for name, loc in uses.items():
            if name not in params:
                raise ParseError(f"no value for rate constant {name}", *loc)


def _assemble(species: list[str], reactions: list, orders: list, rate_names: list[str],
              params: dict[str, float]) -> tuple[Network, KineticModel]:
    if not species:
        raise ParseError("no species declared", 1, 1)
    if not reactions:
        raise ParseError("no reactions", 1, 1)
    net = Network.build(species, reactions)
    pos = {n: i for i, n in enumerate(species)}
    rows = []
    for r, ords in zip(net.reactions, orders):
        if ords is None:
            rows.append(list(r.reactant.vector(net.m)))
        else:
            row = [Fraction(0)] * net.m
            for name, v in ords.items():
                row[pos[name]] = v
            rows.append(row)
    F = RationalMatrix(rows, cols=net.m)
    values = tuple(params[n] for n in rate_names) if params else None
    return net, KineticModel(net, F, tuple(rate_names), values)


def parse_network_file(text: str) -> tuple[Network, KineticModel]:
    species: list[str] = []
    declared: dict[str, int] = {}
    reactions, orders, rate_names = [], [], []
    labels: set[str] = set()
    params: dict[str, float] = {}
    where: dict[str, tuple[int, int]] = {}
    uses: dict[str, tuple[int, int]] = {}
    for lineno, line, toks in _lines(text):
        cur = _Cursor(toks, lineno, line)
        head = cur.take("name")
        if head.text == "species":
            cur.take("punct", ":")
            while not cur.done():
                name = cur.take("name")
                if name.text in declared:
                    raise cur.error(f"species {name.text} declared twice", name)
                declared[name.text] = len(species)
                species.append(name.text)
        elif head.text == "reaction":
            label = cur.take("name")
            if label.text in labels:
                raise cur.error(f"duplicate reaction label {label.text}", label)
            labels.add(label.text)
            cur.take("punct", ":")
            lhs = _parse_side(cur, declared, {"->"})
            cur.take("arrow")
            rhs = _parse_side(cur, declared, {"rate"})
            if lhs == rhs:
                raise SelfTransfer(f"line {lineno}: reaction {label.text} has equal reactant and product")
            rate = _parse_rate(cur, uses)
            ords = None
            if cur.accept("orders"):
                ords = _parse_orders(cur, declared)
            cur.expect_end()
            reactions.append((label.text, lhs, rhs))
            orders.append(ords)
            rate_names.append(rate)
        elif head.text == "param":
            _parse_param(cur, params, where)
        else:
            raise cur.error(f"unknown statement {head.text!r}", head)
    _check_params(params, where, uses)
    return _assemble(species, reactions, orders, rate_names, params)


def _fmt_rational(q: Fraction) -> str:
    return str(q)


def _fmt_complex(c: Complex, names: list[str]) -> str:
    if not c.coeffs:
        return "0"
    return " + ".join(names[i] if v == 1 else f"{_fmt_rational(v)} {names[i]}" for i, v in c.coeffs)


def render_network_file(net: Network, km: KineticModel) -> str:
    """Canonical .crn text; orders are written unless they equal mass action."""
    names = net.species_names
    lines = ["species: " + " ".join(names)]
    for k, r in enumerate(net.reactions):
        line = f"reaction {r.label}: {_fmt_complex(r.reactant, names)} -> {_fmt_complex(r.product, names)}"
        line += f" rate={km.rate_names[k]}"
        row = km.F.row(k)
        if row != r.reactant.vector(net.m):
            line += " orders:" + "".join(f" {names[j]}={_fmt_rational(v)}" for j, v in enumerate(row) if v != 0)
        lines.append(line)
    if km.rate_values is not None:
        seen = {}
        for name, v in zip(km.rate_names, km.rate_values):
            seen.setdefault(name, v)
        lines += [f"param {name} = {v!r}" for name, v in seen.items()]
    return "\n".join(lines) + "\n"


# --- box models --------------------------------------------------------------


@dataclass(frozen=True)
class Transfer:
    source: str
    target: str
    rate: str
    modifiers: tuple[str, ...] = ()
    translation: tuple[str, ...] = ()
    orders: tuple[tuple[str, Fraction], ...] | None = None  # None -> {source: 1}


@dataclass
class BoxModel:
    pools: list[str]
    transfers: list[Transfer]
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.pools)
        if len(known) != len(self.pools):
            raise InvalidNetwork("pool names must be unique")
        for t in self.transfers:
            for name in (t.source, t.target, *t.modifiers, *t.translation):
                if name not in known:
                    raise UndeclaredSpecies(f"pool {name!r} is not declared")
            if t.orders is not None:
                allowed = {t.source, *t.modifiers}
                bad = [n for n, _ in t.orders if n not in allowed]
                if bad:
                    raise InvalidNetwork(
                        f"transfer {t.source}->{t.target}: order on {bad[0]} which is neither source nor modifier"
                    )
        for name, v in self.params.items():
            if not v > 0:
                raise NonpositiveRate(f"rate constant {name} must be positive")


def box_model_to_crn(bm: BoxModel) -> tuple[Network, KineticModel]:
    """Each transfer becomes (source + modifiers + translation) -> (target + modifiers + translation)."""
    pos = {n: i for i, n in enumerate(bm.pools)}
    m = len(bm.pools)
    reactions, rows = [], []
    for k, t in enumerate(bm.transfers):
        if t.source == t.target:
            raise SelfTransfer(f"transfer {k + 1}: source and target are both {t.source}")
        context: dict[str, Fraction] = {}
        for n in (*t.modifiers, *t.translation):
            context[n] = context.get(n, Fraction(0)) + 1
        lhs = dict(context)
        lhs[t.source] = lhs.get(t.source, Fraction(0)) + 1
        rhs = dict(context)
        rhs[t.target] = rhs.get(t.target, Fraction(0)) + 1
        reactions.append((f"R{k + 1}", lhs, rhs))
        row = [Fraction(0)] * m
        for n, v in (t.orders if t.orders is not None else ((t.source, Fraction(1)),)):
            row[pos[n]] = Fraction(v)
        rows.append(row)
    net = Network.build(bm.pools, reactions)
    for k, t in enumerate(bm.transfers):
        expected = [Fraction(0)] * m
        expected[pos[t.target]] += 1
        expected[pos[t.source]] -= 1
        assert list(net.reaction_vector(k)) == expected
    names = tuple(t.rate for t in bm.transfers)
    values = None
    if bm.params:
        missing = [n for n in names if n not in bm.params]
        if missing:
            raise ParseError(f"no value for rate constant {missing[0]}")
        values = tuple(bm.params[n] for n in names)
    return net, KineticModel(net, RationalMatrix(rows, cols=m), names, values)


def _name_list(cur: _Cursor, declared: dict[str, int], stop: set[str]) -> tuple[str, ...]:
    out = []
    while not cur.done() and cur.peek().text not in stop:
        tok = cur.take("name")
        if tok.text not in declared:
            raise cur.error(f"pool {tok.text!r} is not declared", tok, UndeclaredSpecies)
        out.append(tok.text)
    if not out:
        raise cur.error("expected at least one pool name")
    return tuple(out)


def parse_box_file(text: str) -> BoxModel:
    pools: list[str] = []
    declared: dict[str, int] = {}
    transfers: list[Transfer] = []
    params: dict[str, float] = {}
    where: dict[str, tuple[int, int]] = {}
    uses: dict[str, tuple[int, int]] = {}
    for lineno, line, toks in _lines(text):
        cur = _Cursor(toks, lineno, line)
        head = cur.take("name")
        if head.text == "pool":
            name = cur.take("name")
            cur.expect_end()
            if name.text in declared:
                raise cur.error(f"pool {name.text} declared twice", name)
            declared[name.text] = len(pools)
            pools.append(name.text)
        elif head.text == "transfer":
            src = cur.take("name")
            cur.take("arrow")
            dst = cur.take("name")
            for tok in (src, dst):
                if tok.text not in declared:
                    raise cur.error(f"pool {tok.text!r} is not declared", tok, UndeclaredSpecies)
            if src.text == dst.text:
                raise SelfTransfer(f"line {lineno}: transfer from {src.text} to itself")
            modifiers: tuple[str, ...] = ()
            translation: tuple[str, ...] = ()
            stop = {"modifiers", "translate", "rate"}
            if cur.accept("modifiers"):
                cur.take("punct", ":")
                modifiers = _name_list(cur, declared, stop)
            if cur.accept("translate"):
                cur.take("punct", ":")
                translation = _name_list(cur, declared, stop)
            rate = _parse_rate(cur, uses)
            orders = None
            if cur.accept("orders"):
                first = cur.i
                ords = _parse_orders(cur, declared)
                allowed = {src.text, *modifiers}
                for tok in cur.toks[first:cur.i]:
                    if tok.kind == "name" and tok.text not in allowed:
                        raise cur.error(f"order on {tok.text}, which is neither the source nor a modifier", tok)
                orders = tuple(ords.items())
            cur.expect_end()
            transfers.append(Transfer(src.text, dst.text, rate, modifiers, translation, orders))
        elif head.text == "param":
            _parse_param(cur, params, where)
        else:
            raise cur.error(f"unknown statement {head.text!r}", head)
    _check_params(params, where, uses)
    return BoxModel(pools, transfers, params)


def load_model(text: str, kind: str) -> tuple[Network, KineticModel]:
    """``kind`` is "crn" or "box"."""
    if kind == "box":
        return box_model_to_crn(parse_box_file(text))
    if kind == "crn":
        return parse_network_file(text)
    raise ValueError(f"unknown model format {kind!r}")


# --- report ------------------------------------------------------------------

SCHEMA_VERSION = 1


def rational_json(q) -> dict:
    q = Fraction(q)
    return {"num": str(q.numerator), "den": str(q.denominator)}


def vector_json(v) -> list:
    return [rational_json(x) for x in v]


def to_jsonable(obj):
    """Fractions become {"num","den"}; tuples become lists; floats stay floats."""
    if isinstance(obj, Fraction):
        return rational_json(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "tolist"):
        return to_jsonable(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_report(doc: dict) -> str:
    """Deterministic JSON: sorted keys, schema_version, exact rationals."""
    body = dict(doc)
    body["schema_version"] = SCHEMA_VERSION
    return json.dumps(to_jsonable(body), sort_keys=True, indent=2, allow_nan=False) + "\n"
