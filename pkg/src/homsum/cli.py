"""Single entry-point command exposing every computation.

Subcommands read kernel/law JSON files, run the exact or Monte Carlo
machinery, and emit JSON, CSV or aligned-text reports; every run echoes its
fully resolved configuration.  Exit codes: 0 success, 2 precondition or
validation failure (with a machine-readable error record), 1 internal error,
64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, is_dataclass
from fractions import Fraction

from . import __version__
from .partitions import (
    DEFAULT_SIZE_CAP,
    PartitionFilter,
    SetPartition,
    SizeCapError,
    enumerate_partitions,
    kernel_of,
    lattice_join,
    lattice_meet,
    moebius_to_top,
    special_count,
)
from . import kernels as K
from . import laws as L
from . import moments as M
from . import orthopoly as O
from . import stochsim as S


class UsageParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(64)


class CliValidationError(ValueError):
    def __init__(self, code: str, message: str, field: str = ""):
        super().__init__(message)
        self.record = {"code": code, "message": message, "field": field}


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return {"re": float(f"{x.real:.12g}"), "im": float(f"{x.imag:.12g}")}
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if is_dataclass(x) and not isinstance(x, type):
        return _jsonable(asdict(x))
    if isinstance(x, SetPartition):
        return str(x)
    if hasattr(x, "tolist"):
        return _jsonable(x.tolist())
    return x


def _text_table(rows: list[dict]) -> str:
    if not rows:
        return "(empty)\n"
    cols = list(rows[0].keys())
    table = [[str(_jsonable(r.get(c, ""))) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in table)) for i, c in enumerate(cols)]
    out = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    for row in table:
        out.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def emit(report: dict, config: dict, fmt: str, output: str | None) -> None:
    payload = {"config": _jsonable(config), "result": _jsonable(report)}
    if fmt == "json":
        text = json.dumps(payload, indent=2) + "\n"
    elif fmt == "csv":
        rows = report.get("rows")
        if rows is None:
            raise CliValidationError("format", "this report has no tabular rows; use json or text", "format")
        buf = io.StringIO()
        for k, v in payload["config"].items():
            buf.write(f"# {k}={v}\n")
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: _jsonable(v) for k, v in r.items()})
        text = buf.getvalue()
    else:
        buf = io.StringIO()
        for k, v in payload["config"].items():
            buf.write(f"# {k}={v}\n")
        rows = report.get("rows")
        if rows is not None:
            buf.write(_text_table(rows))
            rest = {k: v for k, v in payload["result"].items() if k != "rows"}
        else:
            rest = payload["result"]
        for k, v in rest.items():
            buf.write(f"{k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}\n")
        text = buf.getvalue()
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_kernel(path: str, mode: str) -> K.Kernel:
    try:
        with open(path) as fh:
            k = K.kernel_from_json(fh.read())
    except FileNotFoundError:
        raise CliValidationError("kernel-file", f"kernel file not found: {path}", "kernel")
    except (json.JSONDecodeError, KeyError, K.KernelError) as e:
        raise CliValidationError("kernel-parse", f"bad kernel file: {e}", "kernel")
    if mode == "float" and k.mode == "exact":
        k = k.to_float()
    if mode == "exact" and k.mode == "float":
        raise CliValidationError("mode", "float kernel cannot be promoted to exact mode", "mode")
    return k


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise CliValidationError("law-param", f"expected key=value, got {item!r}", "law-param")
        key, val = item.split("=", 1)
        out[key] = val
    return out


def _load_law(args, max_order: int = 10) -> L.LawSpec:
    name = args.law
    if name is None:
        raise CliValidationError("law", "a --law is required", "law")
    if name.endswith(".json") or os.path.sep in name:
        try:
            with open(name) as fh:
                return L.law_from_json(fh.read())
        except FileNotFoundError:
            raise CliValidationError("law-file", f"law file not found: {name}", "law")
    params = {k: Fraction(v) for k, v in _parse_params(getattr(args, "law_param", None)).items()}
    try:
        return L.builtin_law(name, max_order=max_order, **params)
    except (L.LawError, TypeError) as e:
        raise CliValidationError("law", str(e), "law")


def _law_functional(args, need_order: int) -> O.MomentFunctional:
    law = _load_law(args, max_order=max(need_order, 10))
    return O.MomentFunctional.from_law(law)


# ---------------------------------------------------------------------------
# subcommand handlers (each returns a report dict)


def cmd_partitions(args, cap):
    filt = PartitionFilter(
        noncrossing=args.noncrossing,
        allowed_block_sizes=frozenset({2}) if args.pairings else None,
        min_block_size=args.min_block_size,
        respects=SetPartition.parse(args.respects) if args.respects else None,
    )
    parts = list(enumerate_partitions(args.n, filt, cap))
    rows = [{"partition": str(p), "blocks": len(p.blocks)} for p in parts]
    if args.moebius:
        mode = "noncrossing" if args.noncrossing else "classical"
        for row, p in zip(rows, parts):
            row["moebius_to_top"] = moebius_to_top(p, mode, cap)
    return {"count": len(parts), "rows": rows}


def cmd_kernel_validate(args, cap):
    k = _load_kernel(args.kernel, args.mode)
    return K.validate(k, args.flavor)


def cmd_contract(args, cap):
    f = _load_kernel(args.kernel, args.mode)
    g = _load_kernel(args.other, args.mode) if args.other else f
    if args.star:
        out = K.star_contraction(f, g, args.order)
    else:
        out = K.contraction(f, g, args.order)
    return {
        "degree": out.d,
        "norm_sq": out.norm_sq(),
        "entries": [{"idx": list(i), "val": v} for i, v in sorted(out.support())],
    }


def cmd_influence(args, cap):
    f = _load_kernel(args.kernel, args.mode)
    inf = K.influence(f)
    return {
        "influences": inf,
        "tau_max": max(inf, default=0),
        "sum": sum(inf),
    }


def cmd_moment(args, cap):
    f = _load_kernel(args.kernel, "exact")
    law = _load_law(args, max_order=max(10, args.order * f.d))
    spec = M.SumSpec(f, law)
    value = M.moment_exact(spec, args.order, cap)
    rep = {"value": value, "order": args.order, "law": law.name, "kind": law.kind}
    if args.with_oracle:
        rep["oracle"] = M.moment_oracle(spec, args.order)
        rep["oracle_agrees"] = rep["oracle"] == value
    return rep


def cmd_fourth_moment(args, cap):
    f = _load_kernel(args.kernel, "exact")
    law = _load_law(args)
    return M.fourth_moment_formula(M.SumSpec(f, law), cap)


def cmd_fmt_check(args, cap):
    f = _load_kernel(args.kernel, "exact")
    law = _load_law(args)
    tol = Fraction(args.tol) if args.tol else None
    return M.fmt_report(M.SumSpec(f, law), tolerance=tol, cap=cap)


def cmd_noncentral_check(args, cap):
    f = _load_kernel(args.kernel, "exact")
    law = _load_law(args)
    return M.noncentral_report(M.SumSpec(f, law), args.target, Fraction(args.param), cap)


def cmd_joint_moment(args, cap):
    ks = [_load_kernel(p, "exact") for p in args.kernel]
    law = _load_law(args, max_order=12)
    word = tuple(int(w) for w in args.word.split(","))
    if any(w < 0 or w >= len(ks) for w in word):
        raise CliValidationError("word", "word entries must index the kernel list", "word")
    return {"value": M.joint_moment(ks, word, law, cap), "word": list(word)}


def cmd_stein_bound(args, cap):
    f = _load_kernel(args.kernel, "exact")
    law = _load_law(args)
    return M.stein_wasserstein_bound(
        M.SumSpec(f, law),
        abs_third_moment=args.abs_third_moment,
        rosenthal_c3=args.rosenthal,
        cap=cap,
    )


def cmd_gops(args, cap):
    F = _law_functional(args, 2 * args.n)
    p_det = O.gops_determinant(F, args.n, args.m)
    rep = {
        "determinant_route": O.poly_to_strings(p_det),
        "orthogonality": O.orthogonality_check(F, p_det, args.n, args.m),
    }
    if args.with_expectation_route:
        p_exp = O.gops_expectation(F, args.n, args.m)
        rep["expectation_route"] = O.poly_to_strings(p_exp)
        rep["route_ratio"] = O.gops_route_ratio(F, args.n, args.m)
    return rep


def cmd_recurrence(args, cap):
    F = _law_functional(args, 2 * args.n)
    rec = O.recurrence_coeffs(F, args.n)
    return {
        "alphas": rec["alphas"],
        "betas": rec["betas"],
        "polys": [O.poly_to_strings(p) for p in rec["polys"]],
    }


def cmd_quadrature(args, cap):
    F = _law_functional(args, 2 * args.n)
    rule = O.quadrature_rule(F, args.n, tol=args.tol_float)
    rows = [
        {
            "node_re": z.real,
            "node_im": z.imag,
            "weight_re": w.real,
            "weight_im": w.imag,
        }
        for z, w in zip(rule.nodes, rule.weights)
    ]
    return {
        "rows": rows,
        "exactness_degree": rule.exactness_degree,
        "node_kind": rule.node_kind,
        "max_residual": rule.max_residual,
    }


def cmd_discriminant(args, cap):
    need = 2 * (args.k * (args.N - 1) + 1)
    F = _law_functional(args, need)
    val = O.discriminant_moment(F, args.N, args.k, args.method)
    return {"value": val, "method": args.method, "N": args.N, "k": args.k}


def cmd_sylvester(args, cap):
    need = max(2 * args.n * (2 * args.k - 1), 4 * args.n)
    F = _law_functional(args, need)
    dec = O.sylvester_decompose(F, args.n, args.k, mode=args.sylvester_mode)
    return {
        "mode": dec.mode,
        "degree": dec.degree,
        "poly": O.poly_to_strings(dec.poly),
        "rows": [
            {"node_re": z.real, "node_im": z.imag, "weight_re": w.real, "weight_im": w.imag}
            for z, w in zip(dec.nodes, dec.weights)
        ],
        "weight_sum_re": dec.weight_sum.real,
        "weight_sum_im": dec.weight_sum.imag,
        "target": dec.target,
        "residual": dec.residual,
        "consistent": dec.consistent,
    }


_FAMILIES = {
    "offdiag": K.offdiag_kernel,
    "star": K.star_kernel,
    "avoid-first": K.avoid_first_kernel,
}


def cmd_simulate_invariance(args, cap):
    try:
        family = _FAMILIES[args.family]
    except KeyError:
        raise CliValidationError("family", f"unknown family {args.family!r}; known: {sorted(_FAMILIES)}", "family")
    rows = S.invariance_decay_experiment(
        family,
        S.Sampler(args.sampler_a, seed=args.seed),
        S.Sampler(args.sampler_b, seed=args.seed + 1),
        sizes=[int(x) for x in args.sizes.split(",")],
        trials=args.trials,
    )
    return {"rows": rows}


def cmd_simulate_levy(args, cap):
    jump = S.Sampler(args.jumps, seed=args.seed + 13)
    rows = []
    orders = [int(x) for x in args.orders.split(",")]
    rep = S.variations_cumulant_check(
        lam=args.rate,
        jump_sampler=jump,
        jump_law=jump.law_spec(max(8, 2 * sum(orders))),
        sigma2=args.sigma2,
        horizon=args.horizon,
        orders=orders,
        paths=args.paths,
        seed=args.seed,
    )
    return rep


def cmd_kstat(args, cap):
    if args.measure == "gaussian":
        cell = S.gaussian_cell_sampler
        target = args.horizon if args.order == 2 else 0.0
    elif args.measure == "compound_poisson":
        jump = S.Sampler(args.jumps, seed=args.seed + 13)
        jl = jump.law_spec(max(8, 2 * args.order))

        def cell(measure, rng, _j=jump):
            count = int(rng.poisson(args.rate * measure))
            if not count:
                return 0.0
            sub = S.Sampler(_j.law, seed=int(rng.integers(0, 2**31)), params=_j.params)
            return float(sub.draw(count).sum())

        target = args.horizon * args.rate * float(jl.moment(args.order))
    else:
        raise CliValidationError("measure", "measure must be gaussian or compound_poisson", "measure")
    return S.kstat_experiment(cell, target, args.order, args.refinement, args.paths, args.horizon, args.seed)


HANDLERS = {
    "partitions": cmd_partitions,
    "kernel-validate": cmd_kernel_validate,
    "contract": cmd_contract,
    "influence": cmd_influence,
    "moment": cmd_moment,
    "fourth-moment": cmd_fourth_moment,
    "fmt-check": cmd_fmt_check,
    "noncentral-check": cmd_noncentral_check,
    "joint-moment": cmd_joint_moment,
    "stein-bound": cmd_stein_bound,
    "gops": cmd_gops,
    "recurrence": cmd_recurrence,
    "quadrature": cmd_quadrature,
    "discriminant": cmd_discriminant,
    "sylvester": cmd_sylvester,
    "simulate-invariance": cmd_simulate_invariance,
    "simulate-levy": cmd_simulate_levy,
    "kstat": cmd_kstat,
}


def build_parser() -> UsageParser:
    parser = UsageParser(prog="homsum", description=__doc__)
    parser.add_argument("--version", action="version", version=f"homsum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, law=False, kernel=False):
        p.add_argument("--mode", choices=["exact", "float"], default="exact",
                       help="scalar mode (default exact)")
        p.add_argument("--seed", type=int, default=0, help="seed for any randomized step (default 0)")
        p.add_argument("--cap", type=int, default=None,
                       help=f"partition-size cap (default {DEFAULT_SIZE_CAP}; env HOMSUM_CAP overrides the default)")
        p.add_argument("--format", choices=["json", "csv", "text"], default="json",
                       help="output format (default json)")
        p.add_argument("--output", default=None, help="output path (default stdout)")
        p.add_argument("--tol", default=None, help="rational tolerance for verdicts (default exact zero)")
        p.add_argument("--tol-float", type=float, default=1e-9, help="float tolerance (default 1e-9)")
        if law:
            p.add_argument("--law", default=None, help="builtin law name or a law JSON path")
            p.add_argument("--law-param", action="append", default=[],
                           help="law parameter key=value (repeatable), e.g. sigma2=1")
        if kernel:
            p.add_argument("--kernel", required=True, help="kernel JSON path")

    p = sub.add_parser("partitions", help="enumerate set / non-crossing partitions")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pairings", action="store_true", help="blocks of size 2 only")
    p.add_argument("--noncrossing", action="store_true")
    p.add_argument("--min-block-size", type=int, default=1)
    p.add_argument("--respects", default=None, help='partition text form, e.g. "1,2|3,4"')
    p.add_argument("--moebius", action="store_true", help="include Moebius values to the top")

    p = sub.add_parser("kernel-validate", help="admissibility report for a kernel")
    common(p, kernel=True)
    p.add_argument("--flavor", choices=["classical", "free", "mirror"], required=True)

    p = sub.add_parser("contract", help="contraction or star contraction of kernels")
    common(p, kernel=True)
    p.add_argument("--other", default=None, help="second kernel JSON (default: same kernel)")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--star", action="store_true", help="star contraction instead of plain")

    p = sub.add_parser("influence", help="influence profile and tau_max")
    common(p, kernel=True)

    p = sub.add_parser("moment", help="exact moment of a homogeneous sum")
    common(p, law=True, kernel=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--with-oracle", action="store_true", help="also run the brute-force oracle")

    p = sub.add_parser("fourth-moment", help="fourth-moment decomposition record")
    common(p, law=True, kernel=True)

    p = sub.add_parser("fmt-check", help="fourth-moment-theorem diagnostic report")
    common(p, law=True, kernel=True)

    p = sub.add_parser("noncentral-check", help="gamma / free-Poisson approximation diagnostic")
    common(p, law=True, kernel=True)
    p.add_argument("--target", choices=["gamma", "free_poisson"], required=True)
    p.add_argument("--param", required=True, help="nu or lambda (rational)")

    p = sub.add_parser("joint-moment", help="mixed moment of several homogeneous sums")
    common(p, law=True)
    p.add_argument("--kernel", action="append", required=True, help="kernel JSON path (repeatable)")
    p.add_argument("--word", required=True, help="comma-separated kernel indices, e.g. 0,1,0")

    p = sub.add_parser("stein-bound", help="quadratic Stein-pair Wasserstein bound")
    common(p, law=True, kernel=True)
    p.add_argument("--abs-third-moment", type=float, required=True, help="E|X|^3 of the law")
    p.add_argument("--rosenthal", type=float, default=4.0, help="Rosenthal constant R3 (default 4)")

    p = sub.add_parser("gops", help="generalized orthogonal polynomial p_{nm}")
    common(p, law=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--with-expectation-route", action="store_true")

    p = sub.add_parser("recurrence", help="Jacobi-Szego coefficients and monic OPs")
    common(p, law=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("quadrature", help="Gauss rule: nodes, Christoffel weights, exactness")
    common(p, law=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("discriminant", help="E[Delta^(2k)] by quadrature/expansion/closed form")
    common(p, law=True)
    p.add_argument("--N", type=int, required=True, help="sample size")
    p.add_argument("--k", type=int, required=True, help="half the Vandermonde power")
    p.add_argument("--method", choices=["expansion", "quadrature", "lu_gaussian"], default="expansion")

    p = sub.add_parser("sylvester", help="Sylvester power-sum decompositions")
    common(p, law=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--sylvester-mode", choices=["discriminant", "appel"], default="discriminant")

    p = sub.add_parser("simulate-invariance", help="invariance-decay trajectory experiment")
    common(p)
    p.add_argument("--family", choices=sorted(_FAMILIES), default="offdiag")
    p.add_argument("--sampler-a", default="gaussian")
    p.add_argument("--sampler-b", default="rademacher")
    p.add_argument("--sizes", default="4,8,16,32")
    p.add_argument("--trials", type=int, default=20000)

    p = sub.add_parser("simulate-levy", help="variations-cumulant Monte Carlo check")
    common(p)
    p.add_argument("--rate", type=float, default=2.0)
    p.add_argument("--sigma2", type=float, default=0.0)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--jumps", default="rademacher", help="jump sampler law")
    p.add_argument("--orders", default="3", help="comma-separated variation orders")
    p.add_argument("--paths", type=int, default=10000)

    p = sub.add_parser("kstat", help="diagonal-measure kappa-statistic experiment")
    common(p)
    p.add_argument("--measure", choices=["gaussian", "compound_poisson"], default="gaussian")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--refinement", type=int, default=100)
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=2.0)
    p.add_argument("--jumps", default="rademacher")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cap = args.cap
    if cap is None:
        cap = int(os.environ.get("HOMSUM_CAP", DEFAULT_SIZE_CAP))
    config = {
        "command": args.command,
        "cap": cap,
        "mode": getattr(args, "mode", "exact"),
        "seed": getattr(args, "seed", 0),
        "format": args.format,
        "version": __version__,
    }
    for key in ("law", "kernel", "n", "m", "N", "k", "order", "method", "target"):
        if getattr(args, key, None) is not None:
            config[key] = getattr(args, key)
    try:
        report = HANDLERS[args.command](args, cap)
    except CliValidationError as e:
        emit({"error": e.record}, config, "json", getattr(args, "output", None))
        return 2
    except (SizeCapError, M.FeasibilityError, M.AssumptionError, O.OrthopolyError,
            K.KernelError, L.LawError, ValueError) as e:
        emit(
            {"error": {"code": type(e).__name__, "message": str(e), "field": ""}},
            config,
            "json",
            getattr(args, "output", None),
        )
        return 2
    except Exception as e:  # internal error
        sys.stderr.write(f"internal error: {type(e).__name__}: {e}\n")
        return 1
    emit(report, config, args.format, args.output)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
