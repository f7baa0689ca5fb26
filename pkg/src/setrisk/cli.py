"""Command-line front end.

Exit status: 0 on success, 1 for I/O problems, 2 when the model is malformed
or invalid, 3 when a computation is refused because its hypotheses fail
(no strictly consistent pricing process, non-convex or incompatible
acceptance set, empty AV@R dual set).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources
from typing import Sequence

from . import acceptance as acc
from . import model_io as io
from . import riskmeasure as rm
from . import superhedge as sh
from .linalg import frac
from .polyhedra import Polyhedron

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_REFUSED = 0, 1, 2, 3

VERBOSITY_ENV = "SETRISK_VERBOSITY"

FIXTURES = ("toy", "illiq", "bin2")

EXPLAIN = {
    "validate": (
        "Market validation.\n"
        "  every solvency cone K satisfies R^d_+ <= K != R^d;\n"
        "  M meets R^d_+ outside 0 and K_I^M = K_I & M != {0}.\n"
        "  operations: market.validate_market"
    ),
    "risk": (
        "Primal risk evaluation.\n"
        "  R_A(X) = {u in M : X + u1 in A}\n"
        "  scenario:   A = L(K_T) = {X : X(w) in K_T(w)}\n"
        "  worst-case: A = L(K_T) + K_I^M 1 (smallest market-compatible acceptance set)\n"
        "  scalarization: phi_v(X) = inf {v.u : u in R(X)}\n"
        "  operations: acceptance.*_acceptance, riskmeasure.evaluate, riskmeasure.scalarize"
    ),
    "dual": (
        "Dual representation of a closed coherent market-compatible risk measure.\n"
        "  R(X) = intersection over (Q, w) of (E^Q[-X] + G(w)) & M,  G(w) = {x : w.x >= 0}\n"
        "  (Q, w) ranges over the extreme rays Y = diag(w) dQ/dP of the dual acceptance cone\n"
        "  operations: riskmeasure.dual_generators, riskmeasure.dual_evaluate"
    ),
    "scalarize": (
        "Scalarization of a set-valued risk measure.\n"
        "  phi_v(X) = inf {v.u : u in R(X)}; +inf when R(X) is empty\n"
        "  for v in K_I^+ the value is unchanged by augmenting A with K_I^M 1\n"
        "  operations: riskmeasure.scalarize (exact simplex)"
    ),
    "var": (
        "Set-valued value at risk.\n"
        "  A = {X : P(X in D) >= 1 - alpha}, D(w) = K_T(w) by default\n"
        "  computed as a union over inclusion-minimal scenario sets of probability >= 1 - alpha\n"
        "  operations: acceptance.var_acceptance, riskmeasure.evaluate"
    ),
    "avar": (
        "Set-valued average value at risk, defined through its dual variables.\n"
        "  densities Y with Y(w) in K_T^+(w) and diag(E[Y]) mu - Y(w) in K_T^+(w), mu = 1/lambda\n"
        "  A is the dual cone of that density cone\n"
        "  operations: acceptance.avar_acceptance, riskmeasure.evaluate"
    ),
    "superhedge": (
        "Superhedging prices on a scenario tree.\n"
        "  primal: {u : u + V_T = X for a self-financing V with V_t - V_{t-1} in -K_t}\n"
        "  dual:   intersection over consistent pricing processes Z of {u : E[X^T Z_T] <= Z_0.u}\n"
        "  the dual side needs a strictly consistent pricing process (robust no-arbitrage)\n"
        "  operations: superhedge.superhedge_set, superhedge.superhedge_dual"
    ),
    "check": (
        "Verification suites.\n"
        "  --primal-dual: evaluate(A, X) equals the dual intersection exactly\n"
        "  --axioms: monotonicity, market compatibility, convexity, cone property,\n"
        "            graph identity and translativity R(X + u1) = R(X) - u\n"
        "  operations: riskmeasure.primal_dual_check, riskmeasure.axiom_harness"
    ),
}


class Refused(Exception):
    pass


def _vector(text: str) -> tuple:
    try:
        return tuple(frac(t.strip()) for t in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a comma-separated rational vector: {text!r}") from None


def _scalar(text: str) -> Fraction:
    try:
        return frac(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setrisk", description="Exact set-valued risk measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, measure=True):
        p.add_argument("model", help="model file, or fixture:NAME for a shipped fixture")
        p.add_argument("--claim", help="claim name (default: the task's claim, else the first claim)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--output", help="write the result here instead of stdout")
        if measure:
            p.add_argument("--measure", choices=io.MEASURES)
            p.add_argument("--alpha", type=_scalar)
            p.add_argument("--lambda", dest="lam", type=_vector)
            p.add_argument("--augment", action="store_true", help="add K_I^M 1 to the acceptance set")

    p = sub.add_parser("validate", help="check the market invariants")
    p.add_argument("model")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output")
    for name in ("risk", "scalarize"):
        p = sub.add_parser(name, help=f"{name} task")
        common(p)
        p.add_argument("--v", type=_vector, help="scalarization direction, e.g. 1,1")
    p = sub.add_parser("dual", help="dual pairs and the dual intersection")
    common(p)
    p = sub.add_parser("var", help="value-at-risk risk set")
    common(p, measure=False)
    p.add_argument("--alpha", type=_scalar)
    p.add_argument("--v", type=_vector)
    p.add_argument("--augment", action="store_true")
    p = sub.add_parser("avar", help="average-value-at-risk risk set")
    common(p, measure=False)
    p.add_argument("--lambda", dest="lam", type=_vector)
    p.add_argument("--v", type=_vector)
    p = sub.add_parser("superhedge", help="superhedging price set on a tree model")
    common(p, measure=False)
    p.add_argument("--dual", action="store_true", help="also compute the dual intersection")
    p = sub.add_parser("check", help="verification suites")
    common(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--primal-dual", action="store_true", default=True)
    g.add_argument("--axioms", action="store_true")
    p = sub.add_parser("explain", help="describe what a task computes")
    p.add_argument("task", choices=sorted(EXPLAIN))
    return parser


# ---------------------------------------------------------------------------
# helpers


def _read_model(path: str, validate: bool = True) -> io.ModelDocument:
    if path.startswith("fixture:"):
        name = path.split(":", 1)[1]
        if name not in FIXTURES:
            raise FileNotFoundError(f"no fixture named {name!r}")
        text = resources.files("setrisk").joinpath("fixtures", f"{name}.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return io.parse(text, validate=validate)


def _task_defaults(doc: io.ModelDocument, kinds: Sequence[str]) -> dict:
    for t in doc.tasks:
        if t.kind in kinds:
            return dict(t.params)
    return {}


def _claim(doc: io.ModelDocument, args, params: dict):
    name = args.claim or params.get("claim") or (next(iter(doc.claims)) if doc.claims else None)
    if name is None:
        raise ValueError("the model has no claims")
    if name not in doc.claims:
        raise ValueError(f"unknown claim {name!r}")
    return name, doc.claims[name]


def _pick(args, params: dict, attr: str, key: str, default=None):
    val = getattr(args, attr, None)
    # identity checks: a legitimate 0 compares equal to False
    if val is not None and val is not False:
        return val
    return params.get(key, default)


def _need_market(doc: io.ModelDocument):
    if doc.market is None:
        raise ValueError("this command needs a one-period market model")
    return doc.market


def _acceptance(m, measure: str, alpha, lam, augment: bool) -> acc.AcceptanceSet:
    if measure == "worst-case":
        a = acc.worst_case_acceptance(m)
    elif measure == "scenario":
        a = acc.scenario_acceptance(m)
    elif measure == "orthant":
        a = acc.orthant_acceptance(m)
    elif measure == "var":
        if alpha is None:
            raise ValueError("var needs --alpha")
        a = acc.var_acceptance(m, alpha)
    elif measure == "avar":
        if lam is None:
            raise ValueError("avar needs --lambda")
        try:
            a = acc.avar_acceptance(m, lam)
        except acc.EmptyDualSet as exc:
            raise Refused(str(exc)) from None
    else:
        raise ValueError(f"unknown measure {measure!r}")
    if augment:
        a = acc.augment_union(a) if a.is_union else acc.augment(a)
    return a


def _measure_args(doc, args, kinds, forced=None):
    params = _task_defaults(doc, kinds)
    measure = forced or _pick(args, params, "measure", "measure", "worst-case")
    alpha = _pick(args, params, "alpha", "alpha")
    lam = _pick(args, params, "lam", "lambda")
    augment = bool(_pick(args, params, "augment", "augment", False))
    return params, measure, alpha, lam, augment


def _vars(dim: int, ambient: bool) -> list:
    return [f"u{i + 1}" if ambient else f"c{i + 1}" for i in range(dim)]


def _term(coef: Fraction, name: str, first: bool) -> str:
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    body = name if mag == 1 else f"{mag}{name}" if mag.denominator == 1 else f"({mag}){name}"
    return f"{sign}{body}" if first else f" {sign} {body}"


def format_polyhedron(p: Polyhedron, names: Sequence[str]) -> str:
    """``{u : u1 + 2u2 >= 16, ...}`` from the canonical H-representation."""
    if p.is_empty:
        return "{}  (empty)"
    h = p.hrep
    parts = []
    for rows, op in ((h.equalities, "="), (h.inequalities, ">=")):
        for a, b in rows:
            lhs = ""
            for coef, name in zip(a, names):
                if coef:
                    lhs += _term(Fraction(coef), name, not lhs)
            parts.append(f"{lhs} {op} {b}")
    var = names[0][0] if names else "u"
    if not parts:
        return f"{{{var} : all}}  (whole space)"
    return f"{{{var} : " + ", ".join(parts) + "}"


def _format_riskset(r: rm.RiskSet) -> str:
    full = r.market.eligible.is_full
    polys = r.members if full else r.ambient
    names = _vars(r.market.d, True)
    text = " U ".join(format_polyhedron(p, names) for p in polys)
    return text


def _fmt_scalar(x) -> str:
    if isinstance(x, float):
        return "+inf" if x > 0 else "-inf"
    return str(x)


def _fmt_vec(v) -> str:
    return "(" + ", ".join(str(Fraction(t)) for t in v) + ")"


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> tuple[int, dict, list]:
    doc = _read_model(args.model, validate=False)
    report = io.validate_document(doc)
    lines = ["valid"] if not report else [f"invalid: {r}" for r in report]
    if doc.market is not None and not report:
        lines.append(f"no-arbitrage ((L(K_T) + K_I 1) meets -L(R^d_+) only at 0): {acc.no_arbitrage(doc.market)}")
    if doc.tree is not None and not report:
        lines.append(f"strictly consistent pricing process exists: {sh.strict_cpp_exists(doc.tree)}")
    return (EXIT_OK if not report else EXIT_INVALID), {"valid": not report, "report": report}, lines


def cmd_risk(args) -> tuple[int, dict, list]:
    doc = _read_model(args.model)
    m = _need_market(doc)
    forced = {"var": "var", "avar": "avar"}.get(args.command)
    kinds = (args.command,) if forced else ("risk", "scalarize")
    params, measure, alpha, lam, augment = _measure_args(doc, args, kinds, forced)
    name, x = _claim(doc, args, params)
    a = _acceptance(m, measure, alpha, lam, augment)
    r = rm.evaluate(a, x)
    v = _pick(args, params, "v", "v")
    if args.command == "scalarize" and v is None:
        raise ValueError("scalarize needs --v")
    data: dict = {"measure": a.label, "claim": name, "risk_set": r}
    lines = [f"measure: {a.label}", f"claim: {name}", f"R(X) = {_format_riskset(r)}"]
    if v is not None:
        val = rm.scalarize(a, x, v)
        data["v"] = list(v)
        data["scalarization"] = val
        lines.append(f"scalarization v={_fmt_vec(v)}: {_fmt_scalar(val)}")
    data["accepts"] = rm.accepts(a, x)
    lines.append(f"X acceptable: {data['accepts']}")
    return EXIT_OK, data, lines


def cmd_dual(args) -> tuple[int, dict, list]:
    doc = _read_model(args.model)
    m = _need_market(doc)
    params, measure, alpha, lam, augment = _measure_args(doc, args, ("dual",))
    name, x = _claim(doc, args, params)
    a = _acceptance(m, measure, alpha, lam, augment)
    if a.is_union:
        raise Refused("the acceptance set is a union; dual representation needs convexity")
    if not a.region.is_cone:
        raise Refused("the acceptance set is not a cone")
    pairs = rm.dual_generators(a)
    nulls = rm.null_densities(a)
    if not pairs:
        raise Refused("no dual pair with E[Y] outside M^perp")
    r = rm.dual_evaluate(m, pairs, None, x, null=nulls)
    lines = [f"measure: {a.label}", f"dual pairs: {len(pairs)}"]
    for k, pr in enumerate(pairs, 1):
        q = "; ".join(_fmt_vec(row) for row in pr.Q)
        lines.append(f"  ({k}) w = {_fmt_vec(pr.w)}  Q = [{q}]  halfspace {_format_riskset(rm.pair_halfspace(m, pr, x))}")
    if nulls:
        lines.append(f"densities with E[Y] in M^perp: {len(nulls)}")
    lines.append(f"dual R(X) = {_format_riskset(r)}")
    data = {"measure": a.label, "claim": name, "pairs": pairs, "null_densities": [list(y) for y in nulls], "risk_set": r}
    return EXIT_OK, data, lines


def cmd_superhedge(args) -> tuple[int, dict, list]:
    doc = _read_model(args.model)
    tree = doc.tree if doc.tree is not None else sh.ScenarioTree.from_market(_need_market(doc))
    params = _task_defaults(doc, ("superhedge",))
    name, x = _claim(doc, args, params)
    s = sh.superhedge_set(tree, x)
    names = _vars(tree.d, True)
    lines = [f"claim: {name}", f"superhedging prices = {format_polyhedron(s, names)}"]
    data: dict = {"claim": name, "superhedge_set": s}
    if args.dual:
        try:
            dset = sh.superhedge_dual(tree, x)
        except sh.NoArbitrageViolated as exc:
            raise Refused(str(exc)) from None
        data["superhedge_dual"] = dset
        data["equal"] = dset == s
        lines.append(f"dual intersection = {format_polyhedron(dset, names)}")
        lines.append("equal" if dset == s else "NOT equal")
    return EXIT_OK, data, lines


def cmd_check(args) -> tuple[int, dict, list]:
    doc = _read_model(args.model)
    m = _need_market(doc)
    params, measure, alpha, lam, augment = _measure_args(doc, args, ("check",))
    name, x = _claim(doc, args, params)
    a = _acceptance(m, measure, alpha, lam, augment)
    xs = [x] + [c for n, c in doc.claims.items() if n != name]
    if args.axioms:
        shifts = [(0,) * m.eligible.m, (1,) * m.eligible.m, tuple(range(m.eligible.m))]
        rep = rm.axiom_harness(a, xs, shifts=shifts)
        flags = {
            "monotone": rep.monotone,
            "kT_compatible": rep.kT_compatible,
            "kI_compatible": rep.kI_compatible,
            "convex": rep.convex,
            "cone": rep.cone,
            "graph_failures": len(rep.graph_failures),
            "translativity_failures": len(rep.translativity_failures),
            "subadditivity_failures": len(rep.subadditivity_failures),
        }
        lines = [f"measure: {a.label}"] + [f"{k}: {v}" for k, v in flags.items()]
        return (EXIT_OK if rep.ok else EXIT_REFUSED), flags, lines
    try:
        rep = rm.primal_dual_check(a, xs)
    except (rm.PreconditionViolated, acc.UnionNotSupported) as exc:
        raise Refused(str(exc)) from None
    lines = [f"measure: {a.label}", "equal" if rep.equal else "NOT equal"]
    for xx in xs:
        primal = rm.evaluate(a, xx)
        lines.append(f"primal R(X) = {_format_riskset(primal)}")
    for xx, primal, dual in rep.counterexamples:
        lines.append(f"counterexample X = {[_fmt_vec(r) for r in xx.values]}")
        lines.append(f"  primal {_format_riskset(primal)}")
        lines.append(f"  dual   {_format_riskset(dual) if dual is not None else 'none'}")
    if rep.equal:
        pairs = rm.dual_generators(a)
        dual = rm.dual_evaluate(m, pairs, None, x, null=rm.null_densities(a))
        lines.append(f"dual   R(X) = {_format_riskset(dual)}")
    data = {"measure": a.label, "equal": rep.equal, "pairs": rep.pairs, "counterexamples": len(rep.counterexamples)}
    return (EXIT_OK if rep.equal else EXIT_REFUSED), data, lines


COMMANDS = {
    "validate": cmd_validate,
    "risk": cmd_risk,
    "scalarize": cmd_risk,
    "var": cmd_risk,
    "avar": cmd_risk,
    "dual": cmd_dual,
    "superhedge": cmd_superhedge,
    "check": cmd_check,
}


def explain(task: str) -> str:
    return EXPLAIN[task]


def _emit(args, data, lines) -> None:
    if args.format == "json":
        text = io.serialize_result(data)
    else:
        verbose = os.environ.get(VERBOSITY_ENV, "1")
        text = "\n".join(lines if verbose != "0" else lines[-1:]) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "explain":
        sys.stdout.write(explain(args.task) + "\n")
        return EXIT_OK
    try:
        status, data, lines = COMMANDS[args.command](args)
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except io.ValidationError as exc:
        for r in exc.report:
            sys.stderr.write(f"invalid: {r}\n")
        return EXIT_INVALID
    except io.ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_INVALID
    except Refused as exc:
        sys.stderr.write(f"refused: {exc}\n")
        return EXIT_REFUSED
    except (ValueError, acc.AxiomViolation) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    try:
        _emit(args, data, lines)
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
