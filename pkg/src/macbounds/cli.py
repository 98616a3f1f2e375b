"""Command line front end.

    macbounds bounds --channel ch.json --setting 1 --params params.json --out bounds.csv
    macbounds verify theorem1 --seed 42 --count 500
    macbounds region --channel ch.json --n 2 --eps 0 --grid 0:2:41,0:2:41 --out region.csv

Exit codes: 0 ok, 1 a verification suite failed, 2 parse error,
3 precondition failure, 4 usage error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time

import numpy as np

from . import __version__
from . import classical as cb
from . import quantum as qb
from .decoders import min_error
from .errors import MacBoundsError, ParseError
from .fileio import canonical_json, complex_array, csv_text, load_channel, load_json, real_array, write_atomic
from .model import (
    ClassicalMAC,
    CodebookPair,
    Distribution,
    EncoderPair,
    induced_input,
    joint_from_setting1,
    joint_from_setting2,
    lifted_channel,
    setting3_embed,
)
from .spectrum import SigmaTriple, region_grid
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_PRECONDITION, EXIT_USAGE = 0, 1, 2, 3, 4

BOUND_HEADER = [
    "bound", "setting", "params", "raw", "clamped", "probability_term", "penalty",
    "positive_part_sum", "min_error",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# parameter parsing
# ---------------------------------------------------------------------------


def _sweep(entry: dict, triple_keys=("alpha", "gammas"), scalar_keys=("gamma", "gammap")):
    """Expand list-valued parameters into the Cartesian product of points."""
    axes = []
    for key, val in entry.items():
        if key in triple_keys and isinstance(val, list) and val and isinstance(val[0], list):
            axes.append([(key, v) for v in val])
        elif key in scalar_keys and isinstance(val, list):
            axes.append([(key, v) for v in val])
    if not axes:
        yield dict(entry)
        return
    for combo in itertools.product(*axes):
        point = dict(entry)
        point.update(dict(combo))
        yield point


def _triple(v, where):
    return tuple(real_array(v, (3,), where))


def _classical_family(spec, joint, where):
    if spec in (None, "output"):
        return cb.DominatedFamily.output_only(joint)
    if spec == "marginals":
        return cb.DominatedFamily.marginals(joint)
    if isinstance(spec, dict):
        n1, n2, m = joint.shape
        return cb.DominatedFamily(
            real_array(spec.get("q"), (m,), f"{where}.q"),
            real_array(spec.get("q1"), (n1, m), f"{where}.q1"),
            real_array(spec.get("q2"), (n2, m), f"{where}.q2"),
        )
    raise ParseError(f"{where}: expected 'output', 'marginals' or an object with q, q1, q2")


def _quantum_family(spec, p, Wq, where, require_order=True):
    if spec in (None, "constructive"):
        return qb.constructive_family(p, Wq)
    if spec == "wp":
        wp, wx1p, wpx2 = qb.averaged_states(p, Wq)
        if require_order:
            return qb.SigmaFamily(wp, wx1p, wpx2)
        p1 = p.probs.sum(axis=1)
        p2 = p.probs.sum(axis=0)
        s1 = np.array([wx1p[i] / p1[i] if p1[i] > 0 else Wq.states[i].mean(axis=0) for i in range(Wq.n1)])
        s2 = np.array([wpx2[j] / p2[j] if p2[j] > 0 else Wq.states[:, j].mean(axis=0) for j in range(Wq.n2)])
        return qb.SigmaFamily(wp, s1, s2, require_order=False)
    if isinstance(spec, dict):
        d = Wq.dim
        return qb.SigmaFamily(
            complex_array(spec.get("sigma"), (d, d), f"{where}.sigma"),
            complex_array(spec.get("sigma1"), (Wq.n1, d, d), f"{where}.sigma1"),
            complex_array(spec.get("sigma2"), (Wq.n2, d, d), f"{where}.sigma2"),
            require_order=require_order,
        )
    raise ParseError(f"{where}: expected 'constructive', 'wp' or an object with sigma, sigma1, sigma2")


def _qcond(spec, W, where):
    if spec in (None, "W"):
        return W
    return ClassicalMAC(real_array(spec, W.shape, where))


def _input(setting, doc, ch):
    inp = doc.get("input", {})
    if not isinstance(inp, dict):
        raise ParseError("input: expected an object")
    n1, n2 = ch.n1, ch.n2
    if setting in ("1", "q1"):
        if "p" not in inp:
            return Distribution.uniform(n1, n2)
        return Distribution(real_array(inp["p"], (n1, n2), "input.p"))
    if setting in ("2", "q2"):
        f1, f2 = inp.get("f1"), inp.get("f2")
        if not isinstance(f1, list) or not isinstance(f2, list):
            raise ParseError("input: setting 2 needs encoder matrices f1 and f2")
        return EncoderPair(
            real_array(f1, (len(f1), n1), "input.f1"), real_array(f2, (len(f2), n2), "input.f2")
        )
    if setting == "3":
        c1, c2 = inp.get("c1"), inp.get("c2")
        if not isinstance(c1, list) or not isinstance(c2, list) or not all(isinstance(v, int) for v in c1 + c2):
            raise ParseError("input: setting 3 needs integer codebooks c1 and c2")
        code = CodebookPair(tuple(c1), tuple(c2))
        code.check_against(n1=n1, n2=n2)
        return code
    raise UsageError(f"unknown setting {setting!r}")


def _params_str(point: dict) -> str:
    keep = {k: v for k, v in point.items() if k not in ("name", "family", "q", "q1c", "q2c", "qcond")}
    if isinstance(point.get("family"), str):
        keep["family"] = point["family"]
    return json.dumps(keep, sort_keys=True, separators=(",", ":"))


def _evaluate(setting, ch, inp, point, idx):
    name = point.get("name")
    where = f"bounds[{idx}]"
    classical = setting in ("1", "2", "3")
    if classical and not isinstance(ch, ClassicalMAC):
        raise UsageError(f"setting {setting} needs a classical channel")
    if not classical and not isinstance(ch, qb.CqMAC):
        raise UsageError(f"setting {setting} needs a quantum channel")

    if setting in ("1", "3"):
        if setting == "1":
            joint = joint_from_setting1(inp, ch)
        else:
            p, sub = setting3_embed(inp, ch)
            joint = joint_from_setting1(p, sub)
        floor = min_error(joint)
        if name == "theorem1":
            return cb.theorem1_bound(joint, _classical_family(point.get("family"), joint, where), _triple(point.get("alpha"), f"{where}.alpha")), floor
        if name == "cor1":
            return cb.cor1_bound(joint, _classical_family(point.get("family"), joint, where), _triple(point.get("alpha"), f"{where}.alpha")), floor
        if name == "cor2":
            return cb.cor2_bound(joint, _triple(point.get("alpha"), f"{where}.alpha")), floor
        if setting == "3":
            if name == "han":
                return cb.han_bound(ch, inp, float(point.get("gamma", 0))), floor
            if name == "yo":
                return cb.yo_specialized(ch, inp, float(point.get("gamma", 0))), floor
            if name == "yagi_oohama":
                pi = real_array(point.get("pi"), (3,), f"{where}.pi")
                return cb.yagi_oohama_bound(ch, inp, _qcond(point.get("qcond"), ch, f"{where}.qcond"), pi, float(point.get("gammap", 0))), floor
    elif setting == "2":
        floor = min_error(joint_from_setting1(Distribution.uniform(inp.M1, inp.M2), lifted_channel(ch, inp)))
        if name == "cor3":
            joint = joint_from_setting2(inp, ch)
            m = ch.m
            q = real_array(point["q"], (m,), f"{where}.q") if "q" in point else joint.p_y
            q1c = real_array(point["q1c"], (ch.n1, m), f"{where}.q1c") if "q1c" in point else np.tile(q, (ch.n1, 1))
            q2c = real_array(point["q2c"], (ch.n2, m), f"{where}.q2c") if "q2c" in point else np.tile(q, (ch.n2, 1))
            return cb.cor3_bound(ch, inp, q, q1c, q2c, _triple(point.get("gammas"), f"{where}.gammas")), floor
        if name == "cor4":
            pi = real_array(point.get("pi"), (3,), f"{where}.pi")
            return cb.cor4_bound(ch, inp, _qcond(point.get("qcond"), ch, f"{where}.qcond"), pi, float(point.get("gamma", 0))), floor
    elif setting == "q1":
        if name == "theorem2":
            fam = _quantum_family(point.get("family"), inp, ch, where)
            return qb.theorem2_bound(inp, ch, fam, _triple(point.get("alpha"), f"{where}.alpha")), None
        if name == "cor5":
            fam = _quantum_family(point.get("family"), inp, ch, where)
            return qb.cor5_bound(inp, ch, fam, _triple(point.get("alpha"), f"{where}.alpha")), None
        if name == "cor6":
            return qb.cor6_bound(inp, ch, _triple(point.get("alpha"), f"{where}.alpha")), None
    elif setting == "q2":
        if name == "cor7":
            p1, p2 = induced_input(inp)
            p = Distribution(np.multiply.outer(p1.probs, p2.probs))
            fam = _quantum_family(point.get("family", "wp"), p, ch, where, require_order=False)
            return qb.cor7_bound(ch, inp, fam, _triple(point.get("gammas"), f"{where}.gammas")), None
    raise UsageError(f"{where}: bound {name!r} is not available in setting {setting}")


def cmd_bounds(args) -> int:
    ch, ch_digest = load_channel(args.channel)
    doc, params_digest = load_json(args.params)
    if not isinstance(doc, dict) or not isinstance(doc.get("bounds"), list):
        raise ParseError("params: expected an object with a 'bounds' list")
    inp = _input(args.setting, doc, ch)
    rows, report_rows = [], []
    for idx, entry in enumerate(doc["bounds"]):
        if not isinstance(entry, dict):
            raise ParseError(f"bounds[{idx}]: expected an object")
        for point in _sweep(entry):
            rep, floor = _evaluate(args.setting, ch, inp, point, idx)
            rows.append([
                rep.name, args.setting, _params_str(point), rep.bound, rep.clamped,
                rep.probability_term, rep.penalty_term, rep.positive_part_sum, floor,
            ])
            report_rows.append({
                "bound": rep.name, "params": _params_str(point), "raw": rep.bound,
                "clamped": rep.clamped, "probability_term": rep.probability_term,
                "penalty": rep.penalty_term, "positive_part_sum": rep.positive_part_sum,
                "min_error": floor, "details": rep.details,
            })
    text = csv_text(BOUND_HEADER, rows)
    _emit(args.out, text)
    if args.report:
        body = {
            "tool": "macbounds", "version": __version__, "command": "bounds", "setting": args.setting,
            "inputs": {"channel": ch_digest, "params": params_digest}, "rows": report_rows,
        }
        _emit_report(args.report, body, args.t0)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    res = run_suite(args.suite, args.seed, args.count)
    body = {"tool": "macbounds", "version": __version__, "command": "verify", **res.body()}
    for f in res.failures:
        print(f"FAIL {f['what']} slack={f['slack']:.3e} instance={json.dumps(f['instance'])}", file=sys.stderr)
    _emit_report(args.out, body, args.t0)
    return EXIT_OK if res.passed else EXIT_FAIL


def _parse_grid(text: str):
    try:
        axes = []
        for part in text.split(","):
            lo, hi, steps = part.split(":")
            axes.append((float(lo), float(hi), int(steps)))
        if len(axes) != 2:
            raise ValueError
        return tuple(axes)
    except ValueError:
        raise UsageError(f"--grid must look like R1min:R1max:steps,R2min:R2max:steps, got {text!r}") from None


def _load_triple(path, Wn_dims, p1, p2):
    doc, _ = load_json(path)
    n1, n2, d = Wn_dims
    if not isinstance(doc, dict):
        raise ParseError("triple file must be a JSON object")
    return SigmaTriple(
        complex_array(doc.get("sigma"), (d, d), "sigma"),
        complex_array(doc.get("sigma1"), (n1, d, d), "sigma1"),
        complex_array(doc.get("sigma2"), (n2, d, d), "sigma2"),
        p1, p2,
    )


def cmd_region(args) -> int:
    from .model import product_distribution

    ch, ch_digest = load_channel(args.channel)
    if isinstance(ch, ClassicalMAC):
        ch = qb.CqMAC.from_classical(ch)
    grid = _parse_grid(args.grid)
    p1, p2 = Distribution.uniform(ch.n1), Distribution.uniform(ch.n2)
    if args.params:
        doc, _ = load_json(args.params)
        if not isinstance(doc, dict):
            raise ParseError("params: expected an object")
        if "p1" in doc:
            p1 = Distribution(real_array(doc["p1"], (ch.n1,), "p1"))
        if "p2" in doc:
            p2 = Distribution(real_array(doc["p2"], (ch.n2,), "p2"))
    triple = None
    if args.triple != "wp":
        q1, q2 = product_distribution(p1, args.n), product_distribution(p2, args.n)
        triple = _load_triple(args.triple, (q1.size, q2.size, ch.dim**args.n), q1, q2)
    reg = region_grid(ch, args.n, p1, p2, triple, args.eps, grid)
    _emit(args.out, csv_text(["R1", "R2", "k_term", "member"], reg.rows()))
    for v in reg.monotonicity_violations:
        print(f"warning: k_term decreases along {v[0]} from {v[1]} to {v[2]} at {v[3]} by {v[4]:.3e}", file=sys.stderr)
    if args.report:
        body = {
            "tool": "macbounds", "version": __version__, "command": "region", "n": args.n, "eps": args.eps,
            "grid": [list(a) for a in grid], "inputs": {"channel": ch_digest},
            "members": int(reg.member.sum()), "points": int(reg.member.size),
            "monotonicity_violations": reg.monotonicity_violations, "note": reg.note,
        }
        _emit_report(args.report, body, args.t0)
    return EXIT_OK


def _emit(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _emit_report(path, body: dict, t0: float):
    """Report = deterministic ``body`` plus a ``meta`` block with timing."""
    doc = {"body": body, "meta": {"wall_clock_s": round(time.perf_counter() - t0, 6)}}
    _emit(path, canonical_json(doc))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="macbounds", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"macbounds {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("bounds", help="evaluate lower bounds for one channel")
    b.add_argument("--channel", required=True)
    b.add_argument("--setting", required=True, choices=["1", "2", "3", "q1", "q2"])
    b.add_argument("--params", required=True)
    b.add_argument("--out", default="-", help="CSV destination (default stdout)")
    b.add_argument("--report", help="also write a JSON run report here")
    b.add_argument("--seed", type=int, default=0, help="accepted for uniformity; bounds are deterministic")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify", help="run a randomized verification suite")
    v.add_argument("suite", help=", ".join(SUITES))
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--count", type=int, default=None, help="number of random instances")
    v.add_argument("--out", default="-", help="JSON report destination (default stdout)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("region", help="finite-n rate region bitmap")
    r.add_argument("--channel", required=True)
    r.add_argument("--n", type=int, default=1)
    r.add_argument("--eps", type=float, default=0.0)
    r.add_argument("--grid", default="0:2:41,0:2:41")
    r.add_argument("--triple", default="wp", help="'wp' or a JSON file with sigma, sigma1, sigma2")
    r.add_argument("--params", help="JSON with input distributions p1, p2 (default uniform)")
    r.add_argument("--out", default="-")
    r.add_argument("--report")
    r.add_argument("--seed", type=int, default=0, help="accepted for uniformity; regions are deterministic")
    r.set_defaults(func=cmd_region)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.t0 = time.perf_counter()
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MacBoundsError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
