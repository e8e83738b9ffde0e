"""supbound command line.

Exit codes: 0 success, 1 config or schema error, 2 existence or
feasibility failure, 3 numeric non-convergence, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np
from pydantic import ValidationError

from . import bounds, field, growth, orlicz, spectral, verify
from .config import load_config
from .errors import (
    InvalidParameter,
    NonConvergence,
    SchemaError,
    SeriesDiverges,
    SWindowEmpty,
    UnsupportedMeasure,
)

log = logging.getLogger("supbound")

EXIT_OK, EXIT_CONFIG, EXIT_EXISTENCE, EXIT_NONCONV, EXIT_VERIFY = 0, 1, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


def _load(args):
    if not args.config:
        raise _Exit(EXIT_CONFIG, "--config is required")
    try:
        return load_config(args.config)
    except (OSError, ValidationError, ValueError) as exc:
        raise _Exit(EXIT_CONFIG, f"config error: {exc}") from None


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _existence(cfg):
    m, z, eq = cfg.spectral.build(), cfg.z.build(), cfg.equation.build()
    cl = spectral.existence_classical(m, z, eq)
    gen = spectral.existence_generalized(m, z, eq)
    rep = {
        "classical": cl.satisfied,
        "generalized": gen.satisfied,
        "values": {"classical": cl.value, "generalized": gen.value},
    }
    f = cfg.phi.build()
    if f.kind is orlicz.NKind.POWER_ALPHA:
        expo = cfg.existence.log_exponent
        if expo is None:
            expo = z.alpha if z.kind.value == "log_power" else 1.0
        try:
            pp = spectral.existence_power_phi(m, expo, f.alpha, eq)
            rep["power_phi"] = pp.satisfied
            rep["values"]["power_phi"] = pp.value
        except InvalidParameter as exc:
            rep["power_phi"] = None
            rep["power_phi_error"] = str(exc)
    return rep


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "nan"
    return obj


def cmd_check_existence(args):
    cfg = _load(args)
    rep = _existence(cfg)
    _emit(json.dumps(_json_safe(rep), indent=2) + "\n", args.out)
    return EXIT_OK if rep["generalized"] else EXIT_EXISTENCE


def _inputs(cfg):
    if cfg.domain is None:
        raise _Exit(EXIT_CONFIG, "config has no domain")
    try:
        return bounds.BoundInputs(
            cfg.phi.build(), cfg.z.build(), cfg.spectral.build(), cfg.equation.build(), cfg.domain.build(), cfg.C_y
        )
    except InvalidParameter as exc:
        raise _Exit(EXIT_EXISTENCE, f"bound hypotheses fail: {exc}") from None


def cmd_bound(args):
    cfg = _load(args)
    if cfg.bounds is None:
        raise _Exit(EXIT_CONFIG, "config has no bounds section")
    if not _existence(cfg)["generalized"]:
        raise _Exit(EXIT_EXISTENCE, "generalized existence integral diverges")
    inp = _inputs(cfg)
    bc = cfg.bounds
    us = np.linspace(bc.u_min, bc.u_max, bc.u_steps)
    rep = bounds.bound_report(inp, us, prefactor2=bc.prefactor2)
    log.info("Gamma=%.6g C_Z=%.6g gamma0=%.6g", rep.gamma, rep.c_z, rep.gamma0)
    _write(bounds.write_bound_csv, rep, args.out)
    return EXIT_OK


def _write(writer, obj, out):
    writer(obj, out if out else sys.stdout)


def cmd_simulate(args):
    cfg = _load(args)
    if cfg.domain is None:
        raise _Exit(EXIT_CONFIG, "config has no domain")
    sc = cfg.simulate
    seed = sc.seed if args.seed is None else args.seed
    reps = sc.replications if args.replications is None else args.replications
    if reps < 0:
        raise _Exit(EXIT_CONFIG, "replications must be >= 0")
    try:
        samples = field.simulate_sup_samples(
            cfg.equation.build(), cfg.spectral.build(), cfg.domain.build(), sc.nt, sc.nx, seed, reps, n_bins=sc.n_bins
        )
    except UnsupportedMeasure as exc:
        raise _Exit(EXIT_CONFIG, str(exc)) from None
    _write(field.write_sup_csv, samples, args.out)
    return EXIT_OK


def cmd_verify(args):
    if not (args.bounds and args.samples):
        raise _Exit(EXIT_CONFIG, "verify needs --bounds and --samples")
    conf = args.confidence
    if conf is None:
        conf = _load(args).verify.confidence if args.config else 0.95
    if not 0.5 < conf < 1:
        raise _Exit(EXIT_CONFIG, "confidence must lie in (0.5, 1)")
    try:
        rows = verify.verify_rows(verify.read_bound_csv(args.bounds), verify.read_sup_csv(args.samples), conf)
    except (SchemaError, OSError) as exc:
        raise _Exit(EXIT_CONFIG, str(exc)) from None
    _write(lambda r, p: verify.write_verify_csv(r, p, conf), rows, args.out)
    failed = [r for r in rows if not r.passed]
    print(f"# {verify.GRID_CAVEAT}", file=sys.stderr)
    print(f"verify: {len(rows) - len(failed)}/{len(rows)} feasible levels pass", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def build_growth(cfg):
    gc = cfg.growth
    inp = _inputs(cfg)
    k_start = 1 if gc.k_start == "auto" and gc.L is not None else (0 if gc.k_start == "auto" else gc.k_start)
    seg = growth.Segmentation(
        A=gc.A, b=tuple(gc.b) if gc.b is not None else None, L=gc.L, k_start=k_start, k_end=gc.k_end, K_max=gc.K_max
    )
    theta = 0.5 if gc.theta is None else gc.theta
    if gc.weight == "iterated_log":
        s = 1.0 if gc.s is None else gc.s
        w = growth.iterated_log_weights(gc.L, gc.A, gc.delta, s, theta, growth.eps_k(inp, seg, 0))
    elif gc.weight == "constant":
        w = growth.WeightFunction.constant(gc.c)
    else:
        w = growth.WeightFunction.from_values(gc.values)
    return inp, seg, w


def cmd_growth(args):
    cfg = _load(args)
    gc = cfg.growth
    if gc is None:
        raise _Exit(EXIT_CONFIG, "config has no growth section")
    try:
        inp, seg, w = build_growth(cfg)
    except InvalidParameter as exc:
        raise _Exit(EXIT_CONFIG, f"growth config invalid: {exc}") from None
    us = np.linspace(gc.u_min, gc.u_max, gc.u_steps)
    try:
        rep = growth.growth_report(
            inp, seg, w, us, s=gc.s, theta=gc.theta, threshold_rule=gc.threshold_rule, auto_start=gc.k_start == "auto"
        )
    except SWindowEmpty as exc:
        raise _Exit(EXIT_EXISTENCE, str(exc)) from None
    except SeriesDiverges as exc:
        raise _Exit(EXIT_NONCONV, str(exc)) from None
    th = rep.threshold
    log.info(
        "k_start=%d t_min=%.6g threshold(%s)=%.6g sup_segments=%.6g first_segment=%.6g",
        rep.k_start, rep.t_min, th.rule, th.value, th.sup_segments, th.first_segment,
    )
    _write(growth.write_growth_csv, rep, args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="supbound", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
        return sp

    common(sub.add_parser("check-existence", help="convergence of the existence integrals")).set_defaults(
        fn=cmd_check_existence
    )
    common(sub.add_parser("bound", help="bounded-domain supremum bound curve")).set_defaults(fn=cmd_bound)
    sp = common(sub.add_parser("simulate", help="Monte-Carlo grid suprema of the Gaussian field"))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--replications", type=int)
    sp.set_defaults(fn=cmd_simulate)
    sp = common(sub.add_parser("verify", help="check a bound curve against supremum samples"))
    sp.add_argument("--bounds", metavar="CSV")
    sp.add_argument("--samples", metavar="CSV")
    sp.add_argument("--confidence", type=float)
    sp.set_defaults(fn=cmd_verify)
    common(sub.add_parser("growth", help="growth-rate bound on the half-strip")).set_defaults(fn=cmd_growth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.fn(args)
    except _Exit as exc:
        print(f"supbound: {exc}", file=sys.stderr)
        return exc.code
    except NonConvergence as exc:
        print(f"supbound: numeric non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
