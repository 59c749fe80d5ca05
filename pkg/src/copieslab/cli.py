"""Command-line front end.

Every subcommand prints ``{"manifest": ..., "result": ...}`` as JSON on
stdout.  Two runs with the same manifest print the same bytes apart from
the timestamp.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from . import __version__
from . import constructions as con
from . import discrepancy as disc
from . import kernel as ker
from . import measure as mea
from . import patterns as pat
from . import sets
from .errors import CopiesLabError
from .sampling import DEFAULT_SEED, SamplerConfig, thread_count

SUBCOMMANDS = ("kernel", "measure", "construct", "certify-ap", "discrepancy", "search", "bounds")


class ComputationFailed(Exception):
    pass


# -- parsing helpers ---------------------------------------------------------


def _int(text: str) -> int:
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}")


# -- JSON --------------------------------------------------------------------


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return _plain(obj.to_dict())
        if hasattr(obj, "to_json"):
            return _plain(obj.to_json())
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return format(obj, ".17g")
        return '"inf"' if obj > 0 else ('"-inf"' if obj < 0 else '"nan"')
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- set construction --------------------------------------------------------


def _add_set_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--set", dest="set_kind", default="ball",
                   choices=["ball", "annular", "bourgain", "halfspace", "everything", "empty", "periodic", "cube"])
    p.add_argument("--dim", type=_int, default=2)
    p.add_argument("--set-radius", type=float, default=1.0, help="radius of a ball set")
    p.add_argument("--set-center", type=_floats, default=None)
    p.add_argument("--gap", type=float, default=0.05, help="eps of the annular set")
    p.add_argument("--s", type=float, default=0.1, help="s of the Bourgain set")
    p.add_argument("--density", type=float, default=0.9, help="density of the periodic set")
    p.add_argument("--half-side", type=float, default=1.0, help="half side of the cube set")


def _build_set(a) -> sets.SetOracle:
    d = a.dim
    if a.set_kind == "ball":
        return sets.ball(a.set_center or [0.0] * d, a.set_radius)
    if a.set_kind == "annular":
        return con.AnnularSet(d, a.gap).oracle()
    if a.set_kind == "bourgain":
        return con.BourgainSet(d, a.s).oracle()
    if a.set_kind == "halfspace":
        e = np.zeros(d)
        e[0] = 1.0
        return sets.halfspace(e)
    if a.set_kind == "everything":
        return sets.everything(d)
    if a.set_kind == "empty":
        return sets.empty(d)
    if a.set_kind == "periodic":
        return sets.periodic_cell(d, a.density)
    return sets.cube(a.half_side, d)


def _center(a, d: int) -> list[float]:
    c = a.center if a.center is not None else [0.0] * d
    if len(c) != d:
        raise argparse.ArgumentTypeError("--center has the wrong dimension")
    return c


# -- subcommands -------------------------------------------------------------


def cmd_kernel(a):
    spec = ker.KernelSpec(a.dim, a.radius)
    out = {"dimension": a.dim, "radius": a.radius, "surface_area": ker.surface_area(spec)}
    if a.v is not None:
        out["v_norm"] = a.v
        out["kernel_value"] = float(ker.kernel_profile(spec, a.v))
    if a.check_integral:
        lhs = ker.kernel_integral(spec, a.quadrature_points)
        rhs = ker.surface_area(spec) ** 2
        out.update(lhs=lhs, rhs=rhs, relative_error=abs(lhs - rhs) / rhs)
    if a.deltas:
        if a.v is None:
            raise argparse.ArgumentTypeError("--deltas needs --v")
        sampler = SamplerConfig(a.seed, a.samples)
        table = ker.phi_convergence_table(spec, a.v, a.deltas, sampler, a.method)
        rows = [dataclasses.asdict(r) for r in table.rows]
        out["convergence"] = {"rows": rows, "fitted_order": table.fitted_order, "l1_ratios": table.l1_ratios}
        header = ["delta", "phi", "phi_se", "kernel", "gap", "l1_mass", "l1_gap"]
        for path in (a.csv, a.plot_data):
            if path:
                _write_csv(path, header, [[r[h] for h in header] for r in rows])
    return out


def cmd_measure(a):
    oracle = _build_set(a)
    d = a.dim
    sampler = SamplerConfig(a.seed, a.samples, a.mode)
    center = _center(a, d)
    if a.op == "density":
        ball = sets.BallRegion(tuple(center), a.radius)
        p, se = mea.ball_density(oracle, ball, sampler)
        return {"fraction": p, "std_error": se}
    if a.op == "coverage":
        return mea.sphere_coverage(oracle, center, a.radius, sampler)
    if a.op == "densest":
        region = sets.BallRegion(tuple(center), a.region_radius)
        return mea.densest_ball_scan(oracle, a.radius, region, a.grid_step, sampler, a.threads)
    if a.op == "scan":
        region = sets.BallRegion(tuple(center), a.region_radius)
        cands = region.grid(a.grid_step)
        radii = a.radii or [a.radius]
        return mea.concentric_sphere_scan(oracle, cands, radii, a.rho_prime, sampler)
    region_radius = a.region_radius
    if oracle.bounded and region_radius is None:
        h = oracle.bounding_hint
        region_radius = float(np.linalg.norm(h.center_array - np.asarray(center))) + h.radius + a.radius
    region = sets.BallRegion(tuple(center), region_radius or 1.0)
    if a.op == "mean-identity":
        chk = mea.mean_identity_check(oracle, a.radius, region, sampler, a.inner_samples, a.threads)
    else:
        chk = mea.meansq_identity_check(oracle, a.radius, region, sampler, a.inner_samples, a.pair_samples, a.threads)
    return {"lhs": chk.lhs, "rhs": chk.rhs, "lhs_se": chk.lhs_se, "rhs_se": chk.rhs_se,
            "combined_se": chk.combined_se, "relative_gap": chk.relative_gap}


def _scale_dd(a):
    if a.r_squared is not None:
        return (a.r_squared, 0.0)
    return con.AdmissibleScale(a.offset).r_squared_dd


def cmd_construct(a):
    if a.op == "epsilon":
        eps, void = con.epsilon_of_n(a.n)
        return {"n": a.n, "epsilon": eps, "void": void}
    if a.op == "scale":
        s = con.admissible_scale(a.offset)
        return {"offset": a.offset, "r": s.r, "r_squared": s.r_squared}
    seq = con.quadratic_sequence(con.QuadraticSeq(_scale_dd(a), a.A, a.B, a.n))
    if a.op == "sequence":
        if a.csv:
            _write_csv(a.csv, ["k", "a_k_mod_1"], list(enumerate(seq.tolist())))
        return {"n": a.n, "terms": seq}
    if a.op == "gap-hit":
        return {"n": a.n, "eps": a.eps, "index": con.gap_hit_test(seq, a.eps)}
    hits = con.bourgain_triple_search(_scale_dd(a), a.s, a.step)
    return {"s": a.s, "step": a.step, "solutions": hits}


def cmd_certify(a):
    scale = con.AdmissibleScale(a.offset)
    if a.eps0 is None:
        cert = con.calibrated_certificate(a.n, scale, a.a_grid_step, a.factor, a.threads)
    else:
        cert = con.ap_avoidance_certificate(a.n, scale, a.eps0, a.a_grid_step, a.threads)
    out = cert.to_dict()
    if a.verify_samples:
        misses = con.certificate_spot_check(cert, a.verify_samples, a.seed)
        out["verify_samples"] = a.verify_samples
        out["verify_misses"] = len(misses)
    if a.expect_pass and not (cert.verdict and out.get("verify_misses", 0) == 0):
        raise ComputationFailed(out)
    return out


def cmd_discrepancy(a):
    scale = con.AdmissibleScale(a.offset)
    if a.op == "golden":
        return disc.golden_quality(a.q_max)
    if a.op == "viete":
        value, (p, q) = disc.viete_minimum(a.bound)
        return {"bound": a.bound, "minimum": value, "p": p, "q": q}
    if a.op == "final":
        fb = disc.final_bound(a.n)
        return {"n": a.n, "h": fb.H, "m": fb.M, "value": fb.value, "theorem_bound": disc.theorem_bound(a.n)}
    if a.full:
        report, rows = disc.full_report(a.n, scale, a.A, a.B)
        if a.csv:
            _write_csv(a.csv, ["m", "exact_sum", "analytic_bound"], rows)
        if a.plot_data:
            ns = np.unique(np.round(np.logspace(5, 12, 50)).astype(np.int64))
            series = [(int(n), disc.final_bound(int(n)).value, disc.theorem_bound(int(n))) for n in ns]
            _write_csv(a.plot_data, ["n", "final_bound", "theorem_bound"], series)
        return report
    seq = con.quadratic_sequence(con.QuadraticSeq(scale.r_squared_dd, a.A, a.B, a.n))
    M = a.M or disc.frequency_cutoff(a.n)
    return {
        "n": a.n,
        "exact_star": disc.star_discrepancy_exact(seq),
        "exact_extreme": disc.extreme_discrepancy_exact(seq),
        "m": M,
        "et_bound": disc.erdos_turan_bound(seq, M),
    }


def _pattern(a) -> pat.Pattern:
    if a.pattern:
        return pat.Pattern.load(a.pattern)
    if a.pattern_kind == "triangle":
        return pat.equilateral_triangle(1.0, a.dim)
    return pat.progression(a.pattern_n, 1.0, a.dim)


def cmd_search(a):
    oracle = _build_set(a)
    P = _pattern(a)
    region = sets.BallRegion.at_origin(a.dim, a.region_radius) if a.region_radius else None
    config = pat.SearchConfig(a.rotation_samples, a.grid_step, region, a.seed)
    if a.kind == "rotation":
        x0 = a.x0 if a.x0 is not None else P.points[0].tolist()
        rm = pat.rotation_success_measure(oracle, x0, P, a.rotation_samples, a.seed)
        return rm
    stats = pat.pattern_stats(P)
    out = {"kind": a.kind, "scale": a.scale, "sep": stats[0], "diam": stats[1]}
    if a.kind == "translated":
        z = pat.find_translated_copy(oracle, P, a.scale, config)
        out["translation"] = z
        out["found"] = z is not None
    else:
        pl = pat.find_similar_copy(oracle, P, a.scale, config)
        out["placement"] = pl.to_json() if pl else None
        out["found"] = pl is not None
    if a.expect_pass and not out["found"]:
        raise ComputationFailed(out)
    return out


def cmd_bounds(a):
    lower, upper = pat.rho_min_bounds(a.n)
    eps, void = con.epsilon_of_n(a.n)
    return {"lower": lower, "upper": upper, "epsilon": eps, "void": void}


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copieslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
        p.add_argument("--threads", type=_int, default=None)
        p.add_argument("--json-out", default=None)
        p.add_argument("--csv", default=None)
        p.add_argument("--plot-data", default=None)
        return p

    p = common(sub.add_parser("kernel", help="surface areas, kernel values, integral and convergence checks"))
    p.add_argument("--dim", type=_int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--v", type=float, default=None, help="norm of the displacement v")
    p.add_argument("--check-integral", action="store_true")
    p.add_argument("--quadrature-points", type=_int, default=101)
    p.add_argument("--deltas", type=_floats, default=None)
    p.add_argument("--samples", type=_int, default=1_000_000)
    p.add_argument("--method", choices=[ker.CONDITIONAL, ker.BINOMIAL], default=ker.CONDITIONAL)
    p.set_defaults(func=cmd_kernel)

    p = common(sub.add_parser("measure", help="densities, coverages and identity checks"))
    _add_set_args(p)
    p.add_argument("--op", required=True,
                   choices=["density", "coverage", "densest", "scan", "mean-identity", "meansq-identity"])
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--center", type=_floats, default=None)
    p.add_argument("--samples", type=_int, default=100_000)
    p.add_argument("--mode", choices=["uniform-monte-carlo", "lattice-grid"], default="uniform-monte-carlo")
    p.add_argument("--inner-samples", type=_int, default=128)
    p.add_argument("--pair-samples", type=_int, default=1_000_000)
    p.add_argument("--region-radius", type=float, default=None)
    p.add_argument("--grid-step", type=float, default=0.5)
    p.add_argument("--radii", type=_floats, default=None)
    p.add_argument("--rho-prime", type=float, default=0.5)
    p.set_defaults(func=cmd_measure)

    p = common(sub.add_parser("construct", help="annular-set sequences and scales"))
    p.add_argument("--op", required=True, choices=["sequence", "epsilon", "scale", "gap-hit", "bourgain"])
    p.add_argument("--n", type=_int, default=16)
    p.add_argument("--offset", type=_int, default=1)
    p.add_argument("--r-squared", type=float, default=None)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--step", type=float, default=1e-3)
    p.set_defaults(func=cmd_construct)

    p = common(sub.add_parser("certify-ap", help="certificate that an annular set avoids n-term progressions"))
    p.add_argument("--n", type=_int, required=True)
    p.add_argument("--offset", type=_int, default=1)
    p.add_argument("--eps0", type=float, default=None, help="omit to calibrate from the grid maximum")
    p.add_argument("--factor", type=float, default=1.05)
    p.add_argument("--a-grid-step", type=float, default=1e-4)
    p.add_argument("--verify-samples", type=_int, default=0)
    p.add_argument("--expect-pass", action="store_true")
    p.set_defaults(func=cmd_certify)

    p = common(sub.add_parser("discrepancy", help="exact discrepancy and the bound chain"))
    p.add_argument("--op", choices=["sequence", "golden", "viete", "final"], default="sequence")
    p.add_argument("--n", type=_int, default=100_000)
    p.add_argument("--offset", type=_int, default=1)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--M", type=_int, default=None)
    p.add_argument("--full", action="store_true")
    p.add_argument("--q-max", type=_int, default=1_000_000)
    p.add_argument("--bound", type=_int, default=10_000)
    p.set_defaults(func=cmd_discrepancy)

    p = common(sub.add_parser("search", help="translated or similar copies of a pattern"))
    _add_set_args(p)
    p.add_argument("--kind", choices=["similar", "translated", "rotation"], default="similar")
    p.add_argument("--pattern", default=None, help="JSON pattern file")
    p.add_argument("--pattern-kind", choices=["triangle", "progression"], default="triangle")
    p.add_argument("--pattern-n", type=_int, default=3)
    p.add_argument("--scale", type=float, default=40.0)
    p.add_argument("--x0", type=_floats, default=None)
    p.add_argument("--region-radius", type=float, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--rotation-samples", type=_int, default=10_000)
    p.add_argument("--expect-pass", action="store_true")
    p.set_defaults(func=cmd_search)

    p = common(sub.add_parser("bounds", help="bracket for the critical density"))
    p.add_argument("--n", type=_int, required=True)
    p.set_defaults(func=cmd_bounds)
    return parser


_NON_PARAMETERS = {"func", "subcommand", "seed", "json_out", "csv", "plot_data", "threads"}


def manifest(a) -> dict:
    params = {k: v for k, v in sorted(vars(a).items()) if k not in _NON_PARAMETERS}
    return {
        "subcommand": a.subcommand,
        "parameters": params,
        "seed": a.seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    a = parser.parse_args(argv)
    if a.threads is None:
        a.threads = thread_count()
    status = 0
    try:
        result = a.func(a)
    except ComputationFailed as exc:
        result, status = exc.args[0], 1
        _progress("computation did not meet --expect-pass")
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except CopiesLabError as exc:
        _progress(f"error: {exc}")
        result, status = {"error": type(exc).__name__, "message": str(exc)}, 1
    text = dumps(_plain({"manifest": manifest(a), "result": result}))
    print(text, file=stdout)
    if a.json_out:
        Path(a.json_out).write_text(text + "\n")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
