"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 verdict inconsistency, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dynamics
from .analysis import analyze, report_document, text_report
from .dac import ORDER_KEYS, RATE_KEYS, DacParameters, dac_parameters_from_model, dac_preset
from .errors import (
    ClassMismatch,
    CRNError,
    DegenerateClass,
    InvalidNetwork,
    NoConvergence,
    NoRoot,
    ParseError,
    StepSizeUnderflow,
)
from .kinetics import KineticModel, evaluate_rates
from .modelio import emit_report, load_model
from .structural import Verdict

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3
EXIT_NUMERIC = 4

DEFAULT_SEED = 0


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    preset: str | None = None
    input: Path | None = None
    overrides: dict[str, str] = field(default_factory=dict)
    init: dict[str, str] = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    eps: float = 0.0
    json_path: str | None = None
    csv_path: str | None = None
    tol: dynamics.Tolerances = dynamics.DEFAULTS
    t_end: float = 100.0
    starts: int = 64
    quiet: bool = False


def _pairs(items: list[str] | None, what: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"{what}: expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _number(key: str, text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{key}: not a number: {text!r}") from None


def load(cfg: RunConfig) -> tuple:
    """(network, kinetic model) from a preset or a file, with overrides applied."""
    if cfg.preset is not None:
        if cfg.preset != "dac":
            raise InputError(f"unknown preset {cfg.preset!r}")
        values = {}
        for k, v in cfg.overrides.items():
            if k not in ORDER_KEYS and k not in RATE_KEYS:
                raise InputError(f"unknown DAC parameter {k!r} (known: {', '.join(ORDER_KEYS + RATE_KEYS)})")
            q = _number(k, v)
            values[k] = q if k in ORDER_KEYS else float(q)
        try:
            params = DacParameters.from_mapping(values)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return dac_preset(params)
    path = cfg.input
    kind = "box" if path.suffix == ".box" else "crn"
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        net, km = load_model(text, kind)
    except ParseError as exc:
        raise InputError(f"{path}: {exc}") from None
    except InvalidNetwork as exc:
        raise InputError(f"{path}: {exc}") from None
    if cfg.overrides:
        km = _override_rates(km, cfg.overrides)
    return net, km


def _override_rates(km: KineticModel, overrides: dict[str, str]) -> KineticModel:
    unknown = [k for k in overrides if k not in km.rate_names]
    if unknown:
        raise InputError(f"unknown rate constant {unknown[0]!r}")
    current = dict(zip(km.rate_names, km.rate_values)) if km.rate_values is not None else {}
    for k, v in overrides.items():
        val = float(_number(k, v))
        if not val > 0:
            raise InputError(f"rate constant {k} must be positive")
        current[k] = val
    missing = [n for n in km.rate_names if n not in current]
    if missing:
        raise InputError(f"no value for rate constant {missing[0]}")
    return km.with_rates([current[n] for n in km.rate_names])


def initial_state(cfg: RunConfig, km: KineticModel) -> np.ndarray:
    names = km.network.species_names
    if not cfg.init:
        raise InputError("an initial state is required: --init " + " ".join(f"{n}=VALUE" for n in names))
    unknown = [k for k in cfg.init if k not in names]
    if unknown:
        raise InputError(f"--init: unknown species {unknown[0]!r}")
    missing = [n for n in names if n not in cfg.init]
    if missing:
        raise InputError(f"--init: missing species {missing[0]}")
    x = np.array([float(_number(n, cfg.init[n])) for n in names])
    if not np.all(x > 0):
        raise InputError("--init: all initial values must be positive")
    return x


def _require_rates(km: KineticModel):
    if km.rate_values is None:
        raise InputError("numeric rate constants are required (use --set or param lines)")


def _write(path: str | None, text: str, out) -> None:
    if path is None:
        return
    if path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def verdict_consistency(analysis) -> str | None:
    """Reason string when structural results contradict each other."""
    v = analysis.verdict.verdict
    if v is Verdict.MULTISTATIONARY and analysis.existence is False:
        return "multistationary verdict for a network without positive steady states"
    if v is Verdict.MULTISTATIONARY and analysis.acr:
        c = analysis.classification
        if c is not None and c.label.value in ("p-null", "q-null"):
            return "multistationary verdict for a class with absolute concentration robustness"
    return None


# --- commands ----------------------------------------------------------------


def cmd_analyze(cfg: RunConfig, out) -> int:
    net, km = load(cfg)
    a = analyze(net, km)
    if not cfg.quiet:
        out.write(text_report(a))
    _write(cfg.json_path, emit_report(report_document(a)), out)
    problem = verdict_consistency(a)
    if problem:
        print(f"inconsistent verdicts: {problem}", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out) -> int:
    net, km = load(cfg)
    _require_rates(km)
    x0 = initial_state(cfg, km)
    traj = dynamics.integrate(km, x0, cfg.t_end, cfg.tol)
    names = net.species_names
    f_end = dynamics.vector_field(km, traj.final)
    summary = {
        "t_end": cfg.t_end,
        "steps": len(traj.t) - 1,
        "final_state": dict(zip(names, traj.final.tolist())),
        "conservation_drift": traj.drift,
        "final_residual": traj.final_residual,
        "converged": bool(traj.final_residual < 1e-8 * float(np.max(evaluate_rates(km, traj.final)))),
        "positivity_retries": traj.rejected_positivity,
    }
    if not cfg.quiet:
        out.write(f"t_end               {cfg.t_end}\n")
        out.write(f"accepted steps      {summary['steps']}\n")
        for n, v in zip(names, traj.final):
            out.write(f"final {n:<13} {v:.10g}\n")
        out.write(f"conservation drift  {traj.drift:.3e}\n")
        out.write(f"|f| at final state  {float(np.max(np.abs(f_end))):.3e}\n")
        out.write(f"converged           {'yes' if summary['converged'] else 'no'}\n")
    _write(cfg.csv_path, dynamics.trajectory_csv(traj), out)
    if cfg.json_path:
        _write(cfg.json_path, emit_report({"simulation": summary}), out)
    return EXIT_OK


def cmd_probe(cfg: RunConfig, out) -> int:
    net, km = load(cfg)
    _require_rates(km)
    if cfg.starts < 1:
        raise InputError("--starts must be at least 1")
    x0 = initial_state(cfg, km)
    cls = dynamics.StoichClassSpec.from_state(km, x0, cfg.eps)
    eq = dynamics.multistart_probe(km, cls, cfg.starts, cfg.seed, cfg.tol)
    a = analyze(net, km)
    names = net.species_names
    doc = {
        "probe": {
            "seed": eq.seed,
            "starts": eq.n_starts,
            "converged_starts": eq.n_converged,
            "distinct": len(eq),
            "dedup_threshold": eq.threshold,
            "equilibria": [
                {"state": dict(zip(names, p.tolist())), "residual": r} for p, r in zip(eq.points, eq.residuals)
            ],
        },
        "verdict": a.verdict.verdict.value,
    }
    if not cfg.quiet:
        out.write(f"seed {eq.seed}, starts {eq.n_starts}, converged {eq.n_converged}, distinct {len(eq)}\n")
        for i, (p, r) in enumerate(zip(eq.points, eq.residuals)):
            vals = "  ".join(f"{n}={v:.10g}" for n, v in zip(names, p))
            out.write(f"  [{i}] {vals}  |f|={r:.2e}\n")
        out.write(f"structural verdict: {a.verdict.verdict.value}\n")
    if cfg.json_path:
        _write(cfg.json_path, emit_report(doc), out)
    if len(eq) >= 2 and a.verdict.verdict is Verdict.MONOSTATIONARY:
        print("inconsistent verdicts: several equilibria found for a monostationary system", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_reduction(cfg: RunConfig, out) -> int:
    net, km = load(cfg)
    params = dac_parameters_from_model(km)
    _require_rates(km)
    x0 = initial_state(cfg, km)
    cls = dynamics.StoichClassSpec.from_state(km, x0, cfg.eps)
    A2_0 = float(x0[1])
    SUM_0 = float(x0[0] + x0[2] + x0[3] + x0[4])
    doc: dict = {"T": cls.totals[0], "SUM_0": SUM_0, "A2_0": A2_0, "eps": cfg.eps}
    lines = [f"T = {cls.totals[0]:.12g}", f"SUM^0 = {SUM_0:.12g}", f"A2^0 = {A2_0:.12g}", f"eps = {cfg.eps}"]
    try:
        roots = dynamics.necessary_condition_roots(params, A2_0, SUM_0)
        doc["lambda_roots"] = roots
        lines.append("lambda roots in (0,1): " + ", ".join(f"{r:.12g}" for r in roots))
    except DegenerateClass:
        doc["lambda_roots"] = None
        lines.append("lambda roots: not applicable (P = 0 or Q = 0)")
    except NoRoot:
        doc["lambda_roots"] = []
        lines.append("lambda roots: none in (0,1)")
    conditions = {}
    for which in ("p-null", "pos-neg"):
        rep = dynamics.check_sufficient_conditions(params, km, cls, which, cfg.tol)
        conditions[which] = {
            "status": rep.status.value,
            "quantities": rep.quantities,
            "vacuous": rep.vacuous,
            "confirmed": rep.confirmed,
            "steady_state": rep.steady_state,
        }
        lines.append(f"{which} sufficient condition: {rep.status.value}")
        for k, v in rep.quantities.items():
            lines.append(f"    {k} = {v:.12g}" if isinstance(v, float) else f"    {k} = {v}")
        if rep.vacuous:
            lines.append("    warning: vacuous on this class (T - M'' = 0 or m' = 0); raise --eps")
        if rep.confirmed is not None:
            lines.append(f"    simulation confirms A2* < A2^0: {'yes' if rep.confirmed else 'no'}")
    doc["conditions"] = conditions
    if not cfg.quiet:
        out.write("\n".join(lines) + "\n")
    if cfg.json_path:
        _write(cfg.json_path, emit_report({"reduction": doc}), out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "probe": cmd_probe, "reduction": cmd_reduction}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plkcrn", description="Power-law reaction network analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("analyze", "structural analysis (no rate values needed)"),
        ("simulate", "integrate the ODEs and write a CSV trajectory"),
        ("probe", "multistart search for steady states in one class"),
        ("reduction", "atmospheric carbon reduction conditions (DAC model)"),
    ):
        p = sub.add_parser(name, help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", choices=["dac"])
        src.add_argument("--input", type=Path, help=".crn or .box file")
        p.add_argument("--set", dest="overrides", action="extend", nargs="+", metavar="KEY=VALUE", default=[])
        p.add_argument("--json", dest="json_path", metavar="PATH", help="write the JSON report ('-' for stdout)")
        p.add_argument("--quiet", action="store_true", help="suppress the text report")
        if name != "analyze":
            p.add_argument("--init", action="extend", nargs="+", metavar="SPECIES=VALUE", default=[])
            p.add_argument("--tol-rel", type=float, default=dynamics.DEFAULTS.rtol)
            p.add_argument("--tol-abs", type=float, default=dynamics.DEFAULTS.atol)
        if name == "simulate":
            p.add_argument("--t-end", type=float, default=100.0)
            p.add_argument("--csv", dest="csv_path", metavar="PATH", help="trajectory CSV ('-' for stdout)")
        if name in ("probe", "reduction"):
            p.add_argument("--eps", type=float, default=0.0, help="positivity floor for the class")
        if name == "probe":
            p.add_argument("--starts", type=int, default=64)
            p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    tol = dynamics.DEFAULTS
    if hasattr(ns, "tol_rel"):
        tol = dynamics.Tolerances(rtol=ns.tol_rel, atol=ns.tol_abs)
    return RunConfig(
        command=ns.command,
        preset=ns.preset,
        input=ns.input,
        overrides=_pairs(ns.overrides, "--set"),
        init=_pairs(getattr(ns, "init", None), "--init"),
        seed=getattr(ns, "seed", DEFAULT_SEED),
        eps=getattr(ns, "eps", 0.0),
        json_path=ns.json_path,
        csv_path=getattr(ns, "csv_path", None),
        tol=tol,
        t_end=getattr(ns, "t_end", 100.0),
        starts=getattr(ns, "starts", 64),
        quiet=ns.quiet,
    )


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg, out)
    except (InputError, ParseError, InvalidNetwork, ClassMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StepSizeUnderflow as exc:
        state = None if exc.state is None else np.asarray(exc.state).tolist()
        print(f"numerical failure: {exc}; last state {state}", file=sys.stderr)
        return EXIT_NUMERIC
    except NoConvergence as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CRNError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
