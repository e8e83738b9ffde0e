"""Acceptance checks, one PASS/FAIL line per criterion.

Run ``python tests/test_acceptance.py`` for the report, or collect the same
checks with pytest.
"""

import math
import os
import sys
import tempfile
import time
from contextlib import contextmanager

import numpy as np
from scipy import stats

from supbound import admissible as adm
from supbound import bounds, cli, field, growth, orlicz, spectral, verify
from supbound.errors import SupboundError
from supbound.field import DomainRect

sys.path.insert(0, os.path.dirname(__file__))
from helpers import AIRY_CFG, airy_inputs  # noqa: E402

E = math.e


def report(n, name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} [{n:>2}] {name}: {detail}")
    return ok, detail


@contextmanager
def env(**kw):
    old = {k: os.environ.get(k) for k in kw}
    os.environ.update({k: str(v) for k, v in kw.items()})
    try:
        yield
    finally:
        for k, v in old.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v


def midpoint(g, a, b, n=10**7, chunk=10**6):
    h = (b - a) / n
    parts = []
    for i0 in range(0, n, chunk):
        i = np.arange(i0, min(i0 + chunk, n), dtype=float)
        parts.append(float(np.sum(g(a + (i + 0.5) * h))))
    return math.fsum(parts) * h


# closed-form pieces for Gaussian phi and Z = ln(u + 1), written out here
# so the oracles share nothing with the library integrands


def _psi_gauss(v):
    return np.sqrt(np.maximum(v, 0.0) / 2.0)


def _ln_w_log1(c):
    # ln(exp(c) - e) for c > 1
    return c + np.log1p(-np.exp(1.0 - c))


def _sqrt_sub(f, delta):
    # int_0^delta f(s) ds = int_0^1 f(delta x^2) 2 delta x dx
    return lambda x: f(delta * x * x) * 2.0 * delta * x


def check_1():
    xs = np.linspace(-10.0, 10.0, 1000)
    t0 = time.perf_counter()
    g = orlicz.NFunction.gaussian()
    err_g = np.max(np.abs(orlicz.numeric_conjugate(g, xs) - xs**2 / 2))
    errs = [err_g]
    for a in (3.0, 4.0):
        f = orlicz.NFunction("piecewise_power", a)
        ax, p = np.abs(xs), a / (a - 1)
        want = np.where(ax <= 2 / a, a * ax**2 / 4, np.where(ax <= 1, ax - 1 / a, ax**p / p))
        errs.append(np.max(np.abs(orlicz.numeric_conjugate(f, xs) - want)))
        errs.append(np.max(np.abs(orlicz.conjugate(f, xs) - want)))
    dt = time.perf_counter() - t0
    err = float(max(errs))
    return report(1, "conjugate correctness", err < 1e-8 and dt < 1.0, f"max abs err {err:.2e}, {dt:.3f} s")


CATALOG = [
    orlicz.NFunction.gaussian(),
    orlicz.NFunction("power_alpha", 1.5),
    orlicz.NFunction("piecewise_power", 3.0),
    orlicz.NFunction("exp_power", 1.5),
]


def check_2():
    rng = np.random.default_rng(2)
    worst = []
    for f in CATALOG:
        x = rng.uniform(-8, 8, 10**5)
        y = rng.uniform(-8, 8, 10**5)
        gap = x * y - orlicz.eval_phi(f, x) - orlicz.conjugate(f, y)
        worst.append((f.kind.value, float(np.max(gap))))
    ok = all(v <= 1e-9 for _, v in worst)
    return report(2, "Young-Fenchel", ok, ", ".join(f"{k} max(xy-phi-phi*)={v:.2e}" for k, v in worst))


Z_FAMILIES = [
    adm.AdmissibleFunction("power", 0.5),
    adm.AdmissibleFunction("power", 1.0),
    adm.AdmissibleFunction("log_power", 1.0),
    adm.AdmissibleFunction("log_power", 2.0),
]


def check_3():
    rng = np.random.default_rng(3)
    bad = []
    for z in Z_FAMILIES:
        u = rng.choice([-1, 1], 10**5) * 10 ** rng.uniform(-4, 3, 10**5)
        v = rng.choice([-1, 1], 10**5) * 10 ** rng.uniform(-4, 3, 10**5)
        bad.append(int(np.sum(np.abs(np.sin(u / v)) > adm.sin_ratio_bound(z, u, v))))
    return report(3, "sin-ratio inequality", sum(bad) == 0, f"violations per family {bad}")


def check_4():
    t0 = time.perf_counter()
    inp = airy_inputs()
    c2 = 2.0 * inp.C_Z * inp.C_y
    rel = {}

    # entropy integral on [0,1] x [-1,1]: half sides 1/2 and 1
    delta = 0.5

    def f_ent(s):
        lw = _ln_w_log1(c2 / s)
        return _psi_gauss(np.logaddexp(math.log(0.5) + lw, 0) + np.logaddexp(lw, 0))

    want = midpoint(_sqrt_sub(f_ent, delta), 0.0, 1.0)
    rel["entropy_integral"] = abs(bounds.entropy_integral(inp, delta=delta) / want - 1)

    # segment k = 3 of A = 0.5, L = 1: width e^3 (e - 1)
    seg = growth.Segmentation(A=0.5, L=1.0, k_start=0)
    lwk = math.log(E**3 * (E - 1) / 2)

    def f_seg(s):
        lw = _ln_w_log1(c2 / s)
        return _psi_gauss(np.logaddexp(math.log(0.5) + lw, 0) + np.logaddexp(lwk + lw, 0))

    want = midpoint(_sqrt_sub(f_seg, delta), 0.0, 1.0)
    rel["i_phi_k"] = abs(growth.i_phi_k(inp, seg, 3, delta) / want - 1)

    # C_Z^2 for a standard normal density with Z = ln(u + 1), P = lam^3
    m = spectral.SpectralMeasure.from_density(spectral.Density.gaussian(1.0, 1.0))
    z = adm.AdmissibleFunction("log_power", 1.0)

    def f_cz(lam):
        g = np.log(lam / 2 + E) + np.log(lam**3 / 2 + E)
        return 2 * g * g * np.exp(-lam * lam / 2) / math.sqrt(2 * math.pi)

    want = midpoint(f_cz, 0.0, 40.0)
    rel["c_z_squared"] = abs(spectral.c_z_squared(m, z, spectral.EquationSpec.airy()) / want - 1)

    eps = 0.1

    def f_adm(s):
        return _psi_gauss(_ln_w_log1(1.0 / s))

    want = midpoint(_sqrt_sub(f_adm, eps), 0.0, 1.0)
    rel["admissibility_integral"] = abs(adm.admissibility_integral(z, orlicz.NFunction.gaussian(), eps) / want - 1)
    dt = time.perf_counter() - t0
    ok = all(v < 1e-5 for v in rel.values()) and dt < 60
    return report(4, "quadrature oracles", ok, ", ".join(f"{k} rel {v:.1e}" for k, v in rel.items()) + f", {dt:.1f} s")


def check_5():
    n, bad, worst = 0, 0, 0.0
    doms = [DomainRect(0.0, 1.0, -1.0, 1.0), DomainRect(0.0, 4.0, -3.0, 3.0)]
    for alpha in (0.75, 1.0, 2.0):
        for dom in doms:
            inp = airy_inputs(adm.AdmissibleFunction("log_power", alpha), dom)
            for d in np.geomspace(1e-4, 2 * bounds.gamma0(inp), 20):
                r = bounds.entropy_integral(inp, delta=d) / bounds.closed_form_log(inp, d)
                n += 1
                bad += r > 1
                worst = max(worst, r)
    for alpha in (0.5, 1.0):
        inp = airy_inputs(adm.AdmissibleFunction("power", alpha))
        for beta in alpha * np.arange(1, 11) / 11:
            for d in np.geomspace(1e-4, 2 * bounds.gamma0(inp), 10):
                r = bounds.entropy_integral(inp, delta=d) / bounds.closed_form_power_beta(inp, d, beta)
                n += 1
                bad += r > 1
                worst = max(worst, r)
    return report(
        5, "closed-form domination", bad == 0 and n >= 100, f"{n} probes, {bad} violations, max I/closed {worst:.8f}"
    )


def check_6():
    inp = airy_inputs()
    z, c2 = inp.z, 2.0 * inp.C_y * inp.C_Z

    def sigma(h):
        return c2 / math.log(1.0 / h + z.u0 + 1.0)

    def log_sigma_inv(v):
        # sigma_inv(v) = 1 / (Z^{-1}(c2/v) - u0)
        c = c2 / np.asarray(v, float)
        return np.where(c > 1, -_ln_w_log1(np.maximum(c, 1.0 + 1e-300)), np.inf)

    rng = np.random.default_rng(6)
    worst = 0.0
    G = bounds.gamma_big(inp)
    for _ in range(50):
        th = float(rng.uniform(0.05, 0.95))
        u = bounds.threshold_u(inp, theta=th) + float(rng.uniform(0.5, 15.0))
        a = bounds.bound_at(inp, u, th)
        b = bounds.generic_entropy_bound(
            sigma, None, inp.f, inp.dom, G, u, th, log_sigma_inv=log_sigma_inv, kink=(c2,)
        )
        worst = max(worst, abs(a - b) / a)
    return report(6, "specialization consistency", worst <= 1e-9, f"max rel diff {worst:.1e} over 50 probes")


def check_7():
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as d, env(SUPBOUND_THREADS=1):
        b, s, v = (os.path.join(d, n) for n in ("b.csv", "s.csv", "v.csv"))
        codes = [
            cli.main(["bound", "--config", str(AIRY_CFG), "--out", b]),
            cli.main(["simulate", "--config", str(AIRY_CFG), "--out", s]),
            cli.main(["verify", "--bounds", b, "--samples", s, "--confidence", "0.95", "--out", v]),
        ]
        brows = verify.read_bound_csv(b)
        samples = verify.read_sup_csv(s)
    dt = time.perf_counter() - t0
    rows = verify.verify_rows(brows, samples, 0.95)
    # recompute the upper limits here from the raw counts
    ok_rows = [
        stats.beta.ppf(0.95, r.exceedances + 1, r.replications - r.exceedances) <= r.bound
        if r.exceedances < r.replications
        else False
        for r in rows
    ]
    ok = codes == [0, 0, 0] and len(rows) > 0 and all(ok_rows) and samples.size == 10**4 and dt < 300
    lo = min(r.bound for r in rows) if rows else math.nan
    return report(
        7,
        "Monte-Carlo domination (bounded domain)",
        ok,
        f"exit {codes}, {sum(ok_rows)}/{len(rows)} feasible levels pass (u in [25, 30], min bound {lo:.2e}), {dt:.0f} s",
    )


def check_8():
    t0 = time.perf_counter()
    inp = airy_inputs()
    A, L, delta, s, theta = 0.5, 1.0, 1.0, 1.0, 0.5
    seg = growth.Segmentation(A=A, L=L, k_start=1, k_end=3)
    w = growth.iterated_log_weights(L, A, delta, s, theta, growth.eps_k(inp, seg, 1))
    nt, nx, R = 64, 64, 10**4
    gt = np.linspace(E, E**3, nt + 1)[1:]
    gx = np.linspace(-A, A, nx)
    scale = np.repeat(1.0 / w.c_t(gt), nx)
    lam, mass = inp.m.discretize()
    sups = field.grid_sup_samples(inp.eq, lam, np.sqrt(mass), gt, gx, 20240611, R, scale=scale, threads=1)
    us = np.linspace(4.0, 12.0, 5)
    lines, ok = [], True
    for u in us:
        x = int(np.sum(sups > u))
        up = verify.clopper_pearson_upper(x, R, 0.95)
        try:
            bnd = growth.growth_bound(inp, seg, w, u, s, theta, threshold_rule="first_segment")
        except SupboundError as exc:
            ok = False
            lines.append(f"u={u:g}: {x}/{R} exceed, no bound ({type(exc).__name__})")
            continue
        ok &= up <= bnd
        lines.append(f"u={u:g}: CP {up:.2e} vs bound {bnd:.2e}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    low = growth.s_window_low(inp, seg, w, theta)
    c = w.c_k(seg, seg.indices())
    lines.append(f"c_k on k=1,2 = {np.round(c, 4).tolist()}, s-window low end {low:g}; {dt:.0f} s")
    return report(8, "Monte-Carlo domination (growth, t in (e, e^3])", ok, "; ".join(lines))


def check_9():
    inp = airy_inputs()
    seg = growth.Segmentation(A=0.5, L=1.0, k_start=3)
    w = growth.iterated_log_weights(1.0, 0.5, 1.0, 1.0, 0.5, growth.eps_k(inp, seg, 3))
    r1, r2 = (growth.series_sum(inp, seg, w, 1.0, 0.5) for _ in range(2))
    c = growth.WeightFunction.constant(1.0)
    n1, n2 = (growth.series_sum(inp, seg, c, 1.0, 0.5) for _ in range(2))
    ok = r1.converged and r1 == r2 and not n1.converged and n1 == n2
    return report(
        9,
        "series behaviour",
        ok,
        f"iterated-log converged={r1.converged} sum={r1.total:.12g} k={r1.k_used}; "
        f"constant converged={n1.converged} ({n1.reason})",
    )


def check_10():
    outs = []
    with tempfile.TemporaryDirectory() as d:
        for i, th in enumerate((1, 1, 8)):
            p = os.path.join(d, f"s{i}.csv")
            with env(SUPBOUND_THREADS=th):
                code = cli.main(
                    ["simulate", "--config", str(AIRY_CFG), "--seed", "7", "--replications", "1000", "--out", p]
                )
            with open(p, "rb") as fh:
                outs.append((code, fh.read()))
    ok = all(c == 0 for c, _ in outs) and outs[0][1] == outs[1][1] == outs[2][1] and len(outs[0][1]) > 0
    return report(10, "determinism", ok, f"{len(outs[0][1])} bytes, runs identical={ok}")


def _tail_exponent_converges(order, alpha, classical):
    # |lam|^-2 density: integrand ~ |lam|^e with e = 2 order alpha (+ 2 order) - 2
    e = 2 * order * alpha + (2 * order if classical else 0) - 2
    return e < -1


def check_11():
    m = spectral.SpectralMeasure.from_density(spectral.Density.cauchy(1.0, 1.0))
    z = adm.AdmissibleFunction("power", 0.1)
    eq = spectral.EquationSpec.airy()
    cl = spectral.existence_classical(m, z, eq)
    gen = spectral.existence_generalized(m, z, eq)
    want = (_tail_exponent_converges(eq.order, 0.1, True), _tail_exponent_converges(eq.order, 0.1, False))
    ok = (cl.satisfied, gen.satisfied) == want == (False, True)
    return report(11, "existence gate", ok, f"classical={cl.satisfied} ({cl.value}), generalized={gen.satisfied} ({gen.value:.6g})")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10, check_11]


def test_conjugate_correctness():
    assert check_1()[0]


def test_young_fenchel():
    assert check_2()[0]


def test_sin_ratio_inequality():
    assert check_3()[0]


def test_quadrature_oracles():
    assert check_4()[0]


def test_closed_form_domination():
    assert check_5()[0]


def test_specialization_consistency():
    assert check_6()[0]


def test_monte_carlo_bounded_domain():
    assert check_7()[0]


def test_monte_carlo_growth():
    ok, detail = check_8()
    assert ok, detail


def test_series_behaviour():
    assert check_9()[0]


def test_determinism():
    assert check_10()[0]


def test_existence_gate():
    assert check_11()[0]


if __name__ == "__main__":
    results = [c()[0] for c in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria pass")
