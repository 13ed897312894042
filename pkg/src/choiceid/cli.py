"""``choiceid`` command-line front end.

Exit codes: 0 success, 1 domain rejection (not rationalizable, infeasible,
guard exceeded), 2 malformed input.  Every failure prints an error document
with a machine-readable ``reason``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from fractions import Fraction
from typing import Any, Callable, Iterator, Sequence

from . import extmodels as ext
from . import jsonio as io
from .choicecore import ChoiceError, SizeCapExceeded, Universe, obs_equiv, phi, validate_measure, validate_rule
from .dag import DagError, PathCapExceeded, validate_quasiflow
from .idset import InfeasibleError, bounds, extreme_points, is_extreme, is_identifying_support
from .linalg import format_rational
from .ordered import is_swap_progressive, swap_progressive_rule
from .rum import build_rum_graph, bm_flow, is_rationalizable
from .ryser import enumerate_swaps, ryser_basis

log = logging.getLogger("choiceid")


class Rejected(Exception):
    def __init__(self, message: str, reason: str, detail: Any = None) -> None:
        super().__init__(message)
        self.reason = reason
        self.detail = detail


@contextmanager
def parsing() -> Iterator[None]:
    """Anything raised while reading inputs is a malformed-input error."""
    try:
        yield
    except (io.InputError, SizeCapExceeded):
        raise
    except (ChoiceError, DagError, ValueError, KeyError, TypeError) as exc:
        raise io.InputError(str(exc) or exc.__class__.__name__, "invalid-value") from None


class Ctx:
    """Per-invocation guard settings."""

    def __init__(self, cap: int | None) -> None:
        self.cap = cap
        if cap is not None:
            log.warning("size guards overridden with --cap %d", cap)

    @property
    def max_size(self) -> int | None:
        return None if self.cap is None else max(8, self.cap)

    def path_cap(self, default: int) -> int:
        return default if self.cap is None else self.cap

    def allow_large(self, n_prefs: int) -> bool:
        return self.cap is not None and self.cap >= n_prefs


def _support(path: str | None, u: Universe) -> list[str] | None:
    if path is None:
        return None
    doc = io.load(path, "support")
    if "alternatives" in doc and sorted(doc["alternatives"]) != list(u.labels):
        raise io.InputError("support alternatives do not match the data", "invalid-value")
    return list(doc["support"])


def _measure_out(m: dict[str, Fraction]) -> dict[str, str]:
    return io.emit_rationals(dict(sorted(m.items())), drop_zero=True)


# ---------------------------------------------------------------------------
# RUM commands


def cmd_rationalize(a, ctx: Ctx) -> dict:
    with parsing():
        u, rule = io.read_rule(io.load(a.rule, "choice-rule"), ctx.max_size)
        rule = validate_rule(u, rule)
    res = is_rationalizable(rule, u)
    if not res.ok:
        detail = [{"menu": m, "alternative": x, "value": format_rational(v)} for m, x, v in res.negative_edges]
        raise Rejected("choice rule is not rationalizable by random utility", "not-rationalizable", {"rationalizable": False, "negative_edges": detail})
    return {"rationalizable": True, "witness": io.write_distribution(u, res.witness)}


def cmd_phi(a, ctx: Ctx) -> dict:
    with parsing():
        u, mu = io.read_distribution(io.load(a.distribution, "distribution"), ctx.max_size)
        mu = validate_measure(u, mu)
    return io.write_rule(u, phi(mu, u))


def cmd_bm(a, ctx: Ctx) -> dict:
    with parsing():
        u, rule = io.read_rule(io.load(a.rule, "choice-rule"), ctx.max_size)
        rule = validate_rule(u, rule)
    g = build_rum_graph(u)
    f = bm_flow(rule, u)
    return {
        "alternatives": list(u.labels),
        "flow": io.emit_rationals(dict(sorted(f.items()))),
        "edges": [{"id": e, "menu": g.key_of[e][0], "alternative": g.key_of[e][1], "value": format_rational(f[e])} for e in sorted(f)],
        "rationalizable": all(v >= 0 for v in f.values()),
    }


def cmd_equiv(a, ctx: Ctx) -> dict:
    with parsing():
        u1, mu = io.read_distribution(io.load(a.first, "distribution"), ctx.max_size)
        u2, nu = io.read_distribution(io.load(a.second, "distribution"), ctx.max_size)
        if u1 != u2:
            raise io.InputError("distributions are over different alternatives", "invalid-value")
        mu, nu = validate_measure(u1, mu), validate_measure(u1, nu)
    return {"equivalent": obs_equiv(mu, nu, u1)}


def cmd_ryser_basis(a, ctx: Ctx) -> dict:
    with parsing():
        u = Universe.of(a.alternatives, **({} if ctx.max_size is None else {"max_size": ctx.max_size}))
        support = _support(a.support, u)
        if support is not None:
            support = [u.check_preference(p) for p in support]
    allow = ctx.allow_large(len(support) if support else len(u.preferences()))
    try:
        basis = ryser_basis(u, support, allow_large=allow)
        swaps = enumerate_swaps(u, support, allow_large=allow) if a.swaps else None
    except ChoiceError as exc:
        raise Rejected(str(exc), "cap-exceeded") from None
    out = {"alternatives": list(u.labels), "dimension": basis.dimension, "basis": [_measure_out(v) for v in basis.vectors]}
    if swaps is not None:
        out["swaps"] = [s.to_json() for s in swaps]
    return out


def cmd_bounds(a, ctx: Ctx) -> dict:
    with parsing():
        q = io.load(a.query, "bounds-query")
        if "base" in q:
            u, base = io.read_distribution(q["base"], ctx.max_size)
            base = validate_measure(u, base, probability=True)
            rule = None
        else:
            u, rule = io.read_rule(q["rule"], ctx.max_size)
            rule, base = validate_rule(u, rule), None
        functional = io.rationals(q["functional"])
        for p in functional:
            u.check_preference(p)
        support = [u.check_preference(p) for p in q["support"]] if "support" in q else None
        method = a.method or q.get("method", "ryser")
    try:
        b = bounds(u, functional, base=base, rule=rule, support=support, method=method, allow_large=ctx.allow_large(len(u.preferences())))
    except InfeasibleError as exc:
        raise Rejected(str(exc), "infeasible") from None
    return _bounds_out(b)


def _bounds_out(b) -> dict:
    return {
        "min": format_rational(b.min),
        "max": format_rational(b.max),
        "argmin": _measure_out(b.argmin),
        "argmax": _measure_out(b.argmax),
    }


def cmd_extreme(a, ctx: Ctx) -> dict:
    with parsing():
        u, mu = io.read_distribution(io.load(a.distribution, "distribution"), ctx.max_size)
        mu = validate_measure(u, mu, probability=True)
        support = _support(a.support, u) or [p for p, w in mu.items() if w]
    try:
        return {"extreme": is_extreme(mu, support, u)}
    except ChoiceError as exc:
        raise Rejected(str(exc), "outside-support") from None


def cmd_extreme_points(a, ctx: Ctx) -> dict:
    with parsing():
        u, rule = io.read_rule(io.load(a.rule, "choice-rule"), ctx.max_size)
        rule = validate_rule(u, rule)
        support = _support(a.support, u) or u.preferences()
    try:
        pts = extreme_points(rule, support, u, ctx.path_cap(64))
    except InfeasibleError as exc:
        raise Rejected(str(exc), "infeasible") from None
    except ChoiceError as exc:
        raise Rejected(str(exc), "cap-exceeded") from None
    return {"alternatives": list(u.labels), "points": [_measure_out(p) for p in pts]}


def cmd_support_id(a, ctx: Ctx) -> dict:
    with parsing():
        doc = io.load(a.support, "support")
        u = Universe.of(doc.get("alternatives") or sorted(doc["support"][0]), **({} if ctx.max_size is None else {"max_size": ctx.max_size}))
        support = [u.check_preference(p) for p in doc["support"]]
    return {"identifying": is_identifying_support(support, u)}


def cmd_swap_progressive(a, ctx: Ctx) -> dict:
    with parsing():
        u, rule = io.read_rule(io.load(a.rule, "choice-rule"), ctx.max_size)
        rule = validate_rule(u, rule)
        order = io.read_order(io.load(a.order, "order"))
        if sorted(order) != list(u.labels):
            raise io.InputError("order must rank every alternative exactly once", "invalid-value")
    try:
        mu = swap_progressive_rule(rule, order, u)
    except ChoiceError as exc:
        raise Rejected(str(exc), "not-rationalizable") from None
    return io.write_distribution(u, mu, swap_progressive=is_swap_progressive(mu, order, u))


# ---------------------------------------------------------------------------
# parametric probe


def cmd_param_check(a, ctx: Ctx) -> dict:
    from . import param

    with parsing():
        spec = io.load(a.model, "model-spec")
        cfg = io.load(a.config, "probe-config") if a.config else {}
        m = param.builtin(spec["model"], spec["n"])
        grid = None
        if "grid" in cfg:
            g = cfg["grid"]
            if len(g["lower"]) != m.dim or len(g["upper"]) != m.dim:
                raise io.InputError(f"grid must have {m.dim} coordinates", "invalid-value")
            grid = param.GridSpec(g["lower"], g["upper"], g["points"])
        elif "points" in cfg:
            grid = [list(p) for p in cfg["points"]]
        rays = []
        for r in cfg.get("rays", []):
            if len(r["from"]) != m.dim or len(r["to"]) != m.dim:
                raise io.InputError(f"ray {r['name']!r} must have {m.dim} coordinates", "invalid-value")
            rays.append((r["name"], param.segment_ray(r["from"], r["to"])))
        if "habit_curve_ray" in cfg:
            if not spec["model"].startswith("habit"):
                raise io.InputError("habit_curve_ray only applies to habit models", "invalid-value")
            hc = cfg["habit_curve_ray"]
            rays.append(("habit-curve", param.habit_curve_ray(spec["n"], hc.get("start", 3.0), hc.get("variant", "consistent"))))
    tol = cfg.get("tolerance", 1e-10)
    try:
        local = param.check_local(m, grid, tol) if grid is not None else None
        ray_results = param.properness_probe(
            m,
            rays,
            auto_rays=cfg.get("auto_rays", True),
            steps=cfg.get("steps", 30),
            acc_tol=cfg.get("accumulation_tolerance", 1e-6),
            match_tol=cfg.get("match_tolerance", 1e-6),
            margin=cfg.get("margin", 1e-3),
            seed=cfg.get("seed", 0),
        )
        coll_cfg = cfg.get("collision", {})
        collision = None
        if coll_cfg is not None:
            collision = param.collision_search(
                m,
                coll_cfg.get("attempts", 50),
                coll_cfg.get("tolerance", 1e-9),
                target=coll_cfg.get("target", "submodel"),
                separation=coll_cfg.get("separation", 1e-3),
                seed=coll_cfg.get("seed", 0),
                starts=[(r.last_params, r.interior_preimage) for r in ray_results if r.violation],
            )
    except param.DomainError as exc:
        raise Rejected(str(exc), "domain-error") from None
    report = param.ProbeReport(local, ray_results, collision).to_json()
    report["model"] = {"name": m.name, "dim": m.dim}
    report["tolerances"] = {
        "jacobian": tol,
        "accumulation": cfg.get("accumulation_tolerance", 1e-6),
        "match": cfg.get("match_tolerance", 1e-6),
        "collision": None if coll_cfg is None else coll_cfg.get("tolerance", 1e-9),
        "separation": None if coll_cfg is None else coll_cfg.get("separation", 1e-3),
    }
    return report


# ---------------------------------------------------------------------------
# extension models


def _rc_model(doc: dict, u: Universe) -> ext.GraphModel:
    if "menus" not in doc:
        raise io.InputError("rc documents need an explicit \"menus\" list", "invalid-value")
    return ext.build_rc_graph(u, doc["menus"])


def _load_ext_data(kind: str, path: str, ctx: Ctx):
    return _ext_data(kind, io.load(path, "ddc" if kind == "ddc" else "choice-rule"), ctx)


def _ext_data(kind: str, doc: dict, ctx: Ctx):
    """Read a data document into ``(universe, model, flow)``."""
    if kind == "ddc":
        u, d = io.read_ddc(io.check(doc, "ddc"), ctx.max_size)
        m = ext.build_ddc_graph(u, d.horizon)
        return u, m, ext.ddc_flow(m, d, u)
    io.check(doc, "choice-rule")
    u, rule = io.read_rule(doc, ctx.max_size) if kind == "rc" else _fd_rule(doc, ctx)
    if kind == "rc":
        m = _rc_model(doc, u)
        return u, m, ext.rc_flow(m, rule, u)
    m = ext.build_fd_graph(u)
    return u, m, ext.fd_flow(m, rule, u)


def _fd_rule(doc: dict, ctx: Ctx):
    u = io.universe_of(doc, ctx.max_size)
    return u, {k: io.rationals(v) for k, v in doc["probabilities"].items()}


def _ext_dist(kind: str, doc: dict, ctx: Ctx):
    """Read a distribution over the model's types into ``(universe, model, mu)``."""
    u, mu = io.read_distribution(doc, ctx.max_size)
    if kind == "rc":
        m = _rc_model(doc, u)
    elif kind == "ddc":
        if "T" not in doc:
            raise io.InputError("ddc distributions need a horizon \"T\"", "invalid-value")
        m = ext.build_ddc_graph(u, doc["T"])
    else:
        m = ext.build_fd_graph(u)
    for k in mu:
        m.key_path(k)
    return u, m, mu


def _ext_extra(kind: str, m: ext.GraphModel) -> dict:
    if kind == "rc":
        return {"menus": list(m.sigma)}  # type: ignore[attr-defined]
    if kind == "ddc":
        return {"T": m.horizon}  # type: ignore[attr-defined]
    return {}


def _ext_phi_doc(kind: str, m: ext.GraphModel, mu: dict, u: Universe) -> dict:
    if kind == "rc":
        return io.write_rule(u, ext.rc_phi(m, mu), menus=list(m.sigma))  # type: ignore[attr-defined]
    if kind == "ddc":
        return io.write_ddc(ext.ddc_phi(mu, u, m.horizon))  # type: ignore[attr-defined]
    rule = ext.fd_phi(mu, u)
    return {"alternatives": list(u.labels), "probabilities": {a: io.emit_rationals(r) for a, r in rule.items()}}


def ext_commands(kind: str) -> dict[str, Callable]:
    def rationalize(a, ctx: Ctx) -> dict:
        with parsing():
            u, m, f = _load_ext_data(kind, a.data, ctx)
        res = ext.graph_rationalize(m, f)
        if not res.ok:
            raise Rejected(f"data is not rationalizable: {res.problem}", "not-rationalizable", {"rationalizable": False})
        return {"rationalizable": True, "witness": io.write_distribution(u, res.witness, **_ext_extra(kind, m))}

    def phi_cmd(a, ctx: Ctx) -> dict:
        with parsing():
            u, m, mu = _ext_dist(kind, io.load(a.distribution, "distribution"), ctx)
        return _ext_phi_doc(kind, m, mu, u)

    def equiv(a, ctx: Ctx) -> dict:
        with parsing():
            u1, m, mu = _ext_dist(kind, io.load(a.first, "distribution"), ctx)
            doc2 = io.load(a.second, "distribution")
            u2, m2, nu = _ext_dist(kind, doc2, ctx)
            if u1 != u2 or _ext_extra(kind, m) != _ext_extra(kind, m2):
                raise io.InputError("distributions are over different models", "invalid-value")
        return {"equivalent": ext.graph_equiv(m, mu, nu)}

    def basis(a, ctx: Ctx) -> dict:
        with parsing():
            u = Universe.of(a.alternatives, **({} if ctx.max_size is None else {"max_size": ctx.max_size}))
            if kind == "rc":
                if not a.menus:
                    raise io.InputError("rc-ryser-basis needs --menus", "invalid-value")
                m = ext.build_rc_graph(u, a.menus.split(","))
            elif kind == "ddc":
                m = ext.build_ddc_graph(u, a.horizon)
            else:
                m = ext.build_fd_graph(u)
            support = _support(a.support, u)
            if support is not None:
                for k in support:
                    m.key_path(k)
        try:
            b = ext.graph_basis(m, support, ctx.path_cap(ext.DEFAULT_SWAP_PATH_CAP))
        except PathCapExceeded as exc:
            raise Rejected(str(exc), "cap-exceeded") from None
        return {"alternatives": list(u.labels), **_ext_extra(kind, m), "dimension": b.dimension, "basis": [_measure_out(v) for v in b.vectors]}

    def bounds_cmd(a, ctx: Ctx) -> dict:
        with parsing():
            q = io.load(a.query, "bounds-query")
            if "base" in q:
                u, m, mu = _ext_dist(kind, q["base"], ctx)
                if sum(mu.values(), Fraction(0)) != 1 or any(w < 0 for w in mu.values()):
                    raise io.InputError("base must be a probability distribution", "invalid-value")
                f = m.flow_of(mu)
            else:
                u, m, f = _ext_data(kind, q["rule"], ctx)
            functional = io.rationals(q["functional"])
            support = q.get("support")
            for k in list(functional) + list(support or []):
                m.key_path(k)
        try:
            b = ext.graph_bounds(m, f, functional, support)
        except InfeasibleError as exc:
            raise Rejected(str(exc), "infeasible") from None
        return _bounds_out(b)

    def swap_prog(a, ctx: Ctx) -> dict:
        with parsing():
            u, m, f = _load_ext_data(kind, a.data, ctx)
            order = io.read_order(io.load(a.order, "order"))
            if sorted(order) != list(u.labels):
                raise io.InputError("order must rank every alternative exactly once", "invalid-value")
        report = validate_quasiflow(m.dag, f, unit=True)
        if not report.ok:
            raise Rejected(f"data is not rationalizable: {report.first.kind} at {report.first.where}", "not-rationalizable")
        return io.write_distribution(u, ext.graph_swap_progressive(m, f, order), **_ext_extra(kind, m))

    def extreme_pts(a, ctx: Ctx) -> dict:
        with parsing():
            u, m, f = _load_ext_data(kind, a.data, ctx)
            support = _support(a.support, u)
            for k in support or []:
                m.key_path(k)
        report = validate_quasiflow(m.dag, f, unit=True)
        if not report.ok:
            raise Rejected("data is not rationalizable", "not-rationalizable")
        try:
            pts = ext.graph_extreme_points(m, f, support, ctx.path_cap(64))
        except ChoiceError as exc:
            raise Rejected(str(exc), "cap-exceeded") from None
        return {"alternatives": list(u.labels), **_ext_extra(kind, m), "points": [_measure_out(p) for p in pts]}

    return {
        "rationalize": rationalize,
        "phi": phi_cmd,
        "equiv": equiv,
        "ryser-basis": basis,
        "bounds": bounds_cmd,
        "swap-progressive": swap_prog,
        "extreme-points": extreme_pts,
    }


# ---------------------------------------------------------------------------
# argument parsing


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so usage errors get an error document."""

    def error(self, message: str):
        raise _ArgError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="choiceid", description="Identification analysis for random utility and related choice models.")
    p.add_argument("--schema", metavar="NAME", help="print the JSON schema NAME and exit")
    p.add_argument("--cap", type=int, metavar="N", help="override size and path-count guards (logged)")
    p.add_argument("-o", "--output", metavar="PATH", help="write the result here instead of stdout")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def add(name: str, fn: Callable, helptext: str, *args: tuple) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=helptext)
        for spec in args:
            flags, kw = spec[0], spec[1] if len(spec) > 1 else {}
            sp.add_argument(*flags, **kw) if isinstance(flags, tuple) else sp.add_argument(flags, **kw)
        sp.set_defaults(func=fn)
        return sp

    add("rationalize", cmd_rationalize, "test a choice rule for random-utility rationalizability", ("rule",))
    add("phi", cmd_phi, "choice probabilities of a distribution", ("distribution",))
    add("bm", cmd_bm, "Block-Marschak flow of a choice rule", ("rule",))
    add("equiv", cmd_equiv, "observational equivalence of two distributions", ("first",), ("second",))
    add(
        "ryser-basis",
        cmd_ryser_basis,
        "basis of the swap span",
        (("--alternatives", "-a"), {"required": True}),
        (("--support",), {}),
        (("--swaps",), {"action": "store_true", "help": "also list the generating swaps"}),
    )
    add("bounds", cmd_bounds, "bounds on a linear functional over the identified set", ("query",), (("--method",), {"choices": ["ryser", "simplex"]}))
    add("extreme", cmd_extreme, "is a distribution extreme in its identified set", ("distribution",), (("--support",), {}))
    add("extreme-points", cmd_extreme_points, "vertices of the identified set", ("rule",), (("--support",), {}))
    add("support-id", cmd_support_id, "does a support restriction identify", ("support",))
    add("swap-progressive", cmd_swap_progressive, "swap-progressive rationalization under an order", ("rule",), ("order",))
    add("param-check", cmd_param_check, "numerical identification probe for a parametric model", ("model",), ("config", {"nargs": "?"}))

    for kind in ("rc", "ddc", "fd"):
        cmds = ext_commands(kind)
        data_help = {"rc": "choice-rule document with menus", "ddc": "ddc document", "fd": "frame-dependent rule document"}[kind]
        add(f"{kind}-rationalize", cmds["rationalize"], f"{kind}: decompose data into a distribution", ("data", {"help": data_help}))
        add(f"{kind}-phi", cmds["phi"], f"{kind}: observable probabilities of a distribution", ("distribution",))
        add(f"{kind}-equiv", cmds["equiv"], f"{kind}: observational equivalence", ("first",), ("second",))
        basis_args: list[tuple] = [(("--alternatives", "-a"), {"required": True}), (("--support",), {})]
        if kind == "rc":
            basis_args.append((("--menus",), {"help": "comma-separated menus"}))
        if kind == "ddc":
            basis_args.append((("--horizon", "-T"), {"type": int, "required": True}))
        add(f"{kind}-ryser-basis", cmds["ryser-basis"], f"{kind}: basis of the swap span", *basis_args)
        add(f"{kind}-bounds", cmds["bounds"], f"{kind}: bounds on a linear functional", ("query",))
        add(f"{kind}-swap-progressive", cmds["swap-progressive"], f"{kind}: swap-progressive decomposition", ("data",), ("order",))
        add(f"{kind}-extreme-points", cmds["extreme-points"], f"{kind}: vertices of the identified set", ("data",), (("--support",), {}))
    return p


def _error(message: str, reason: str, detail: Any = None) -> dict:
    err = {"reason": reason, "message": message}
    if detail is not None:
        err["detail"] = detail
    return {"error": err}


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="choiceid: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        a = build_parser().parse_args(argv)
    except _ArgError as exc:
        out.write(io.dumps(_error(str(exc), "usage")))
        return 2

    def emit(doc: dict) -> None:
        text = io.dumps(doc)
        if a.output:
            with open(a.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            out.write(text)

    if a.schema:
        try:
            out.write(io.dumps(io.schema(a.schema)))
            return 0
        except io.InputError as exc:
            out.write(io.dumps(_error(str(exc), exc.reason)))
            return 2
    if not getattr(a, "func", None):
        out.write(io.dumps(_error("no command given", "usage")))
        return 2
    try:
        emit(a.func(a, Ctx(a.cap)))
        return 0
    except io.InputError as exc:
        out.write(io.dumps(_error(str(exc), exc.reason)))
        return 2
    except Rejected as exc:
        out.write(io.dumps(_error(str(exc), exc.reason, exc.detail)))
        return 1
    except (PathCapExceeded, SizeCapExceeded) as exc:
        out.write(io.dumps(_error(str(exc), "cap-exceeded")))
        return 1
    except (ChoiceError, DagError) as exc:
        out.write(io.dumps(_error(str(exc), "domain-rejection")))
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
