"""JSON model documents and canonical result serialization.

Every number is written as a string (``"3"``, ``"-1/3"``) so that values
round-trip exactly; JSON numbers are accepted on input only when they are
integers.  The format is documented in ``docs/format.md``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .linalg import frac
from .market import (
    EligibleSpace,
    OnePeriodMarket,
    RandomPortfolio,
    ScenarioSpace,
    SolvencyCone,
    validate_market,
)
from .polyhedra import HRep, Polyhedron, VRep

__all__ = [
    "FORMAT_VERSION",
    "ParseError",
    "ValidationError",
    "Task",
    "ModelDocument",
    "parse",
    "load",
    "serialize",
    "serialize_result",
    "result_data",
    "walk_2d",
]

FORMAT_VERSION = "1"

TASK_KINDS = ("validate", "risk", "dual", "scalarize", "var", "avar", "superhedge", "check")
MEASURES = ("worst-case", "scenario", "orthant", "var", "avar")


class ParseError(ValueError):
    """Malformed document; ``path`` is a JSON-pointer-like location."""

    def __init__(self, message: str, path: str = "$", line: int | None = None):
        where = path if line is None else f"{path} (line {line})"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class ValidationError(ValueError):
    """Well-formed document describing an invalid market."""

    def __init__(self, report: list[str]):
        super().__init__("; ".join(report))
        self.report = list(report)


@dataclass(frozen=True)
class Task:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ModelDocument:
    version: str
    market: OnePeriodMarket | None = None
    tree: Any = None  # ScenarioTree; typed loosely to avoid an import cycle
    claims: dict = field(default_factory=dict)
    tasks: tuple = ()

    @property
    def d(self) -> int:
        return self.market.d if self.market is not None else self.tree.d


# ---------------------------------------------------------------------------
# parsing


def _rational(x, path: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ParseError("rationals must be strings like \"p/q\" or integers", path)
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return frac(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"not a rational: {x!r}", path) from None
    raise ParseError(f"expected a rational, got {type(x).__name__}", path)


def _vector(x, path: str, length: int | None = None) -> tuple:
    if not isinstance(x, list):
        raise ParseError("expected a list", path)
    v = tuple(_rational(t, f"{path}[{i}]") for i, t in enumerate(x))
    if length is not None and len(v) != length:
        raise ParseError(f"expected {length} entries, got {len(v)}", path)
    return v


def _matrix(x, path: str, ncols: int | None = None) -> tuple:
    if not isinstance(x, list):
        raise ParseError("expected a list of rows", path)
    rows = tuple(_vector(r, f"{path}[{i}]", ncols) for i, r in enumerate(x))
    if rows and ncols is None:
        n = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ParseError(f"expected {n} entries, got {len(r)}", f"{path}[{i}]")
    return rows


def _obj(x, path: str, allowed: set, required: set = frozenset()) -> dict:
    if not isinstance(x, dict):
        raise ParseError("expected an object", path)
    extra = set(x) - allowed
    if extra:
        raise ParseError(f"unknown field(s) {sorted(extra)}", path)
    missing = set(required) - set(x)
    if missing:
        raise ParseError(f"missing field(s) {sorted(missing)}", path)
    return x


def _cone(x, path: str, d: int | None) -> SolvencyCone:
    o = _obj(x, path, {"inequalities", "equalities", "generators"})
    if ("generators" in o) == ("inequalities" in o or "equalities" in o):
        raise ParseError("a cone needs either generators or inequalities", path)
    if "generators" in o:
        g = _obj(o["generators"], f"{path}.generators", {"rays", "lineality"})
        rays = _matrix(g.get("rays", []), f"{path}.generators.rays", d)
        lin = _matrix(g.get("lineality", []), f"{path}.generators.lineality", d)
        dim = d if d is not None else len((rays or lin or [[]])[0])
        if not dim:
            raise ParseError("cannot infer the dimension of an empty generator list", path)
        return SolvencyCone(Polyhedron.cone(rays, lin, dim=dim).canonicalize())
    ineqs = _matrix(o.get("inequalities", []), f"{path}.inequalities", d)
    eqs = _matrix(o.get("equalities", []), f"{path}.equalities", d)
    dim = d if d is not None else len((ineqs or eqs or [[]])[0])
    if not dim:
        raise ParseError("cannot infer the dimension of an empty constraint list", path)
    h = HRep(dim, tuple((a, 0) for a in ineqs), tuple((a, 0) for a in eqs))
    return SolvencyCone(Polyhedron(h).canonicalize())


def _cone_dim(x) -> int | None:
    try:
        if "generators" in x:
            g = x["generators"]
            rows = g.get("rays") or g.get("lineality")
        else:
            rows = x.get("inequalities") or x.get("equalities")
        return len(rows[0])
    except (TypeError, KeyError, IndexError, AttributeError):
        return None


def _market(x, eligible, path: str) -> OnePeriodMarket:
    o = _obj(x, path, {"probabilities", "initial_cone", "terminal_cones"}, {"probabilities", "initial_cone", "terminal_cones"})
    probs = _vector(o["probabilities"], f"{path}.probabilities")
    if not probs:
        raise ParseError("need at least one scenario", f"{path}.probabilities")
    if any(p <= 0 for p in probs):
        raise ParseError("probabilities must be positive", f"{path}.probabilities")
    if sum(probs) != 1:
        raise ParseError(f"probabilities sum to {sum(probs)}, not 1", f"{path}.probabilities")
    d = _cone_dim(o["initial_cone"])
    ki = _cone(o["initial_cone"], f"{path}.initial_cone", d)
    d = ki.d
    tc = o["terminal_cones"]
    if not isinstance(tc, list) or len(tc) != len(probs):
        raise ParseError("need one terminal cone per scenario", f"{path}.terminal_cones")
    kt = tuple(_cone(c, f"{path}.terminal_cones[{i}]", d) for i, c in enumerate(tc))
    e = _eligible(eligible, d, "$.eligible")
    return OnePeriodMarket(ScenarioSpace(probs), ki, kt, e)


def _eligible(x, d: int, path: str) -> EligibleSpace:
    if x is None or x == "full":
        return EligibleSpace.full(d)
    o = _obj(x, path, {"basis"}, {"basis"})
    basis = _matrix(o["basis"], f"{path}.basis", d)
    if not basis:
        raise ParseError("basis must not be empty", f"{path}.basis")
    try:
        return EligibleSpace(d, basis)
    except ValueError as exc:
        raise ParseError(str(exc), f"{path}.basis") from None


def _tree(x, path: str):
    from .superhedge import InvalidTree, ScenarioTree

    o = _obj(x, path, {"nodes"}, {"nodes"})
    nodes = o["nodes"]
    if not isinstance(nodes, list) or not nodes:
        raise ParseError("need a nonempty node list", f"{path}.nodes")
    d = _cone_dim(nodes[0].get("cone") if isinstance(nodes[0], dict) else None)
    parents, probs, cones = [], [], []
    for i, nd in enumerate(nodes):
        p = f"{path}.nodes[{i}]"
        nd = _obj(nd, p, {"parent", "prob", "cone"}, {"parent", "cone"})
        par = nd["parent"]
        if par is not None and (not isinstance(par, int) or isinstance(par, bool)):
            raise ParseError("parent must be an integer index or null", f"{p}.parent")
        parents.append(par)
        probs.append(_rational(nd.get("prob", "1"), f"{p}.prob") if par is not None else None)
        cones.append(_cone(nd["cone"], f"{p}.cone", d))
    try:
        return ScenarioTree(tuple(parents), tuple(probs), tuple(cones))
    except InvalidTree as exc:
        raise ParseError(str(exc), f"{path}.nodes") from None


_TASK_FIELDS = {
    "validate": set(),
    "risk": {"measure", "claim", "v", "alpha", "lambda", "augment"},
    "dual": {"measure", "claim", "alpha", "lambda", "augment"},
    "scalarize": {"measure", "claim", "v", "alpha", "lambda", "augment"},
    "var": {"claim", "alpha", "v", "augment"},
    "avar": {"claim", "lambda", "v"},
    "superhedge": {"claim"},
    "check": {"measure", "claim", "alpha", "lambda", "augment"},
}


def _task(x, path: str, d: int, claims: dict) -> Task:
    if not isinstance(x, dict):
        raise ParseError("expected an object", path)
    kind = x.get("kind")
    if kind not in TASK_KINDS:
        raise ParseError(f"kind must be one of {', '.join(TASK_KINDS)}", f"{path}.kind")
    _obj(x, path, _TASK_FIELDS[kind] | {"kind"})
    params: dict = {}
    for key, val in x.items():
        p = f"{path}.{key}"
        if key == "kind":
            continue
        if key == "measure":
            if val not in MEASURES:
                raise ParseError(f"measure must be one of {', '.join(MEASURES)}", p)
            params[key] = val
        elif key == "claim":
            if val not in claims:
                raise ParseError(f"unknown claim {val!r}", p)
            params[key] = val
        elif key in ("v", "lambda"):
            params[key] = _vector(val, p, d)
        elif key == "alpha":
            params[key] = _rational(val, p)
        elif key == "augment":
            if not isinstance(val, bool):
                raise ParseError("augment must be true or false", p)
            params[key] = val
    return Task(kind, params)


def parse(text: str, validate: bool = True) -> ModelDocument:
    """Parse and validate a model document.

    Raises :class:`ParseError` for malformed input and, when ``validate`` is
    set, :class:`ValidationError` carrying the market validation report.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, "$", exc.lineno) from None
    top = _obj(raw, "$", {"version", "market", "tree", "eligible", "claims", "tasks"}, {"version"})
    version = top["version"]
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported version {version!r}", "$.version")
    if ("market" in top) == ("tree" in top):
        raise ParseError("exactly one of market or tree is required", "$")
    market = tree = None
    if "market" in top:
        market = _market(top["market"], top.get("eligible"), "$.market")
        d, n = market.d, market.n
    else:
        if "eligible" in top:
            raise ParseError("tree models have no eligible block", "$.eligible")
        tree = _tree(top["tree"], "$.tree")
        d, n = tree.d, len(tree.leaves)
    claims = {}
    craw = top.get("claims", {})
    if not isinstance(craw, dict):
        raise ParseError("expected an object of named claims", "$.claims")
    for name, rows in craw.items():
        p = f"$.claims.{name}"
        vals = _matrix(rows, p, d)
        if len(vals) != n:
            raise ParseError(f"expected {n} rows (one per scenario), got {len(vals)}", p)
        claims[name] = RandomPortfolio(vals)
    traw = top.get("tasks", [])
    if not isinstance(traw, list):
        raise ParseError("expected a list", "$.tasks")
    tasks = tuple(_task(t, f"$.tasks[{i}]", d, claims) for i, t in enumerate(traw))
    doc = ModelDocument(version, market, tree, claims, tasks)
    if validate:
        report = validate_document(doc)
        if report:
            raise ValidationError(report)
    return doc


def validate_document(doc: ModelDocument) -> list[str]:
    if doc.market is not None:
        return validate_market(doc.market)
    report = []
    for k, c in enumerate(doc.tree.cones):
        report += c.violations(f"K(node {k})")
    return report


def load(path) -> ModelDocument:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# serialization


def _s(x) -> str:
    return str(Fraction(x))


def _vs(v) -> list:
    return [_s(t) for t in v]


def _cone_data(c: SolvencyCone) -> dict:
    h = c.cone.hrep
    out: dict = {"inequalities": [_vs(a) for a, _ in h.inequalities]}
    if h.equalities:
        out["equalities"] = [_vs(a) for a, _ in h.equalities]
    return out


def document_data(doc: ModelDocument) -> dict:
    out: dict = {"version": doc.version}
    if doc.market is not None:
        m = doc.market
        out["market"] = {
            "probabilities": _vs(m.probs),
            "initial_cone": _cone_data(m.k_initial),
            "terminal_cones": [_cone_data(k) for k in m.k_terminal],
        }
        if not m.eligible.is_full:
            out["eligible"] = {"basis": [_vs(b) for b in m.eligible.basis]}
    else:
        t = doc.tree
        nodes = []
        for k in range(t.size):
            nd: dict = {"parent": t.parents[k], "cone": _cone_data(t.cones[k])}
            if t.parents[k] is not None:
                nd["prob"] = _s(t.probs[k])
            nodes.append(nd)
        out["tree"] = {"nodes": nodes}
    out["claims"] = {name: [_vs(r) for r in x.values] for name, x in doc.claims.items()}
    tasks = []
    for task in doc.tasks:
        t: dict = {"kind": task.kind}
        for key, val in task.params.items():
            if key in ("v", "lambda"):
                t[key] = _vs(val)
            elif key == "alpha":
                t[key] = _s(val)
            else:
                t[key] = val
        tasks.append(t)
    out["tasks"] = tasks
    return out


def _dump(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def serialize(doc: ModelDocument) -> str:
    """Canonical text of a document (cones written from their canonical H-form)."""
    return _dump(document_data(doc))


def _cmp_key(v):
    return tuple(v)


def walk_2d(p: Polyhedron) -> list:
    """Boundary of a planar polyhedron as an ordered list of entries.

    Entries are ``{"vertex": v}`` and ``{"ray": r}``; a pointed unbounded set
    starts and ends with a ray, a polygon lists its vertices counterclockwise.
    Sets with lineality emit one ``{"line": point, "direction": l}`` per
    boundary line instead.
    """
    if p.dim != 2:
        raise ValueError("walks are only defined in the plane")
    if p.is_empty:
        return []
    v = p.vrep
    if v.lineality:
        if len(v.lineality) == 2:
            return []
        lin = v.lineality[0]
        return [{"line": x, "direction": lin} for x in v.vertices]
    verts = list(v.vertices)
    rays = list(v.rays)
    if len(verts) == 1 and not rays:
        return [{"vertex": verts[0]}]
    c = [sum(x[i] for x in verts) / len(verts) for i in range(2)]
    for r in rays:
        c = [c[i] + r[i] for i in range(2)]
    if not rays:
        # angular sort around an interior point, exact via half-planes and cross products
        def key(x):
            dx, dy = x[0] - c[0], x[1] - c[1]
            half = 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1
            return half, dx, dy

        import functools

        def cmp(a, b):
            ka, kb = key(a), key(b)
            if ka[0] != kb[0]:
                return ka[0] - kb[0]
            cross = ka[1] * kb[2] - ka[2] * kb[1]
            return -1 if cross > 0 else (1 if cross < 0 else 0)

        return [{"vertex": x} for x in sorted(verts, key=functools.cmp_to_key(cmp))]
    # unbounded pointed: with r the sum of the extreme rays, every line parallel
    # to r meets the boundary once, so vertices are ordered by cross(r, x)
    r = [sum(t[i] for t in rays) for i in range(2)]
    cross = lambda x: r[0] * x[1] - r[1] * x[0]
    path = sorted(verts, key=cross)
    lo = min(rays, key=cross)
    hi = max(rays, key=cross)
    order = [lo] + path + [hi]
    # orient counterclockwise: the interior must lie left of the first edge
    first, d0 = path[0], (-lo[0], -lo[1])
    if d0[0] * (c[1] - first[1]) - d0[1] * (c[0] - first[0]) < 0:
        order = order[::-1]
    return [{"ray": order[0]}] + [{"vertex": x} for x in order[1:-1]] + [{"ray": order[-1]}]


def polyhedron_data(p: Polyhedron) -> dict:
    p = p.canonicalize()
    if p.is_empty:
        return {"dim": p.dim, "empty": True}
    h, v = p.hrep, p.vrep
    out: dict = {
        "dim": p.dim,
        "empty": False,
        "hrep": {
            "inequalities": [{"normal": _vs(a), "offset": _s(b)} for a, b in h.inequalities],
            "equalities": [{"normal": _vs(a), "offset": _s(b)} for a, b in h.equalities],
        },
        "vrep": {
            "vertices": [_vs(x) for x in v.vertices],
            "rays": [_vs(x) for x in v.rays],
            "lineality": [_vs(x) for x in v.lineality],
        },
    }
    if p.dim == 2:
        out["walk"] = [{k: _vs(val) for k, val in entry.items()} for entry in walk_2d(p)]
    return out


def result_data(obj) -> Any:
    """JSON-ready data for polyhedra, risk sets, dual pairs, reports and scalars."""
    from .riskmeasure import DualPair, PenaltyValue, RiskSet

    if isinstance(obj, Polyhedron):
        return polyhedron_data(obj)
    if isinstance(obj, RiskSet):
        return {
            "union": obj.is_union,
            "coordinates": [polyhedron_data(p) for p in obj.members],
            "ambient": [polyhedron_data(p) for p in obj.ambient],
        }
    if isinstance(obj, DualPair):
        return {"Q": [_vs(r) for r in obj.Q], "w": _vs(obj.w)}
    if isinstance(obj, PenaltyValue):
        out = {"kind": obj.kind}
        if obj.offset is not None:
            out["offset"] = _s(obj.offset)
        return out
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, float):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, (int, Fraction)):
        return _s(obj)
    if isinstance(obj, dict):
        return {str(k): result_data(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [result_data(v) for v in obj]
    if isinstance(obj, HRep):
        return polyhedron_data(Polyhedron(obj))
    if isinstance(obj, VRep):
        return polyhedron_data(Polyhedron(vrep=obj))
    if isinstance(obj, RandomPortfolio):
        return [_vs(r) for r in obj.values]
    if hasattr(obj, "as_dict"):
        return result_data(obj.as_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def serialize_result(obj) -> str:
    return _dump(result_data(obj))
