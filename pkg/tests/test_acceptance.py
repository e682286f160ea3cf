"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line (printed immediately and again in the
terminal summary) before asserting, so a failing criterion still reports
the measured numbers.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, cached_batch
from lpdist.cli import main
from lpdist.clt_theory import clt_center, report_from_batch, sphere_cdf, sphere_mean, sphere_variance
from lpdist.ldp_rate import (
    cube_log_mgf,
    cube_rate,
    legendre2,
    log_mgf,
    rate_ball,
    rate_boundary,
    rate_curve,
)
from lpdist.sampler import RandomStream, sample_pgauss
from lpdist.specfun import abs_moment
from lpdist.stats import empirical_moments, empirical_tail_rate, ks_statistic, tail_rates_shared

SEED = 1


def record(label, ok, detail):
    ok = bool(ok)
    ACCEPTANCE_LINES.append((label, ok, detail))
    print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    assert ok, f"{label}: {detail}"


def test_c01_exact_sphere_law():
    t0 = time.perf_counter()
    parts, ok = [], True
    for n in (3, 10, 100):
        b = cached_batch(2.0, n, "boundary", 100_000, SEED)
        ks = ks_statistic(b.values, lambda t, n=n: sphere_cdf(n, t))
        ok &= ks <= 0.006
        parts.append(f"n={n} ks={ks:.5f}")
    secs = time.perf_counter() - t0
    ok &= secs < 60
    record("C1 exact sphere law", ok, ", ".join(parts) + f" (<= 0.006), {secs:.1f}s")


def test_c02_sphere_moments():
    e3 = abs(sphere_mean(3) - 4 / 3)
    e2 = abs(sphere_mean(2) - 4 / math.pi)
    n = 10**5
    prod = 2 * n * sphere_variance(n)
    b = cached_batch(2.0, 3, "boundary", 1_000_000, SEED)
    m = empirical_moments(b)
    zse = abs(m.mean - 4 / 3) / m.std_error_mean
    ok = e3 <= 1e-12 and e2 <= 1e-12 and 0.999 <= prod <= 1.001 and zse <= 4
    record(
        "C2 sphere moments",
        ok,
        f"|mean(3)-4/3|={e3:.1e} |mean(2)-4/pi|={e2:.1e} 2n var(1e5)={prod:.7f} MC z={zse:.2f}",
    )


def test_c03_clt_centers():
    n, parts, ok = 1000, [], True
    for p in (1.0, 2.0, 4.0, "inf"):
        for dom in ("boundary", "ball"):
            m = empirical_moments(cached_batch(p, n, dom, 100_000, SEED))
            gap = abs(m.mean - clt_center(p))
            allow = 4 * m.std_error_mean + 0.5 / n
            good = gap <= allow
            ok &= good
            parts.append(f"p={p} {dom}: gap={gap:.2e}/allow={allow:.2e}{'' if good else ' X'}")
    record("C3 CLT centers", ok, "; ".join(parts))


def test_c04_cube_clt_variance():
    rep = report_from_batch(cached_batch("inf", 200, "ball", 100_000, SEED))
    rel = abs(rep.var_z - 7 / 30) / (7 / 30)
    ok = rel <= 0.05 and rep.ks_vs_theory <= 0.01
    record("C4 cube CLT variance", ok, f"var_z={rep.var_z:.5f} (rel {rel:.3%}) ks={rep.ks_vs_theory:.5f} (<= 0.01)")


def test_c05_p2_variance_adjudication():
    rep = report_from_batch(cached_batch(2.0, 500, "boundary", 100_000, SEED))
    v = rep.verdicts
    logged = rep.ks_vs_theory is not None and rep.ks_vs_alternate is not None
    d = rep.to_dict()
    logged &= "ks" in d and "ks_alternate" in d
    ok = logged and v["variance_separation_se"] >= 10 and v["decision_unambiguous"]
    record(
        "C5 p=2 variance adjudication",
        ok,
        f"var_z={rep.var_z:.4f} se={rep.se_var_z:.4f} separation={v['variance_separation_se']:.0f} se, "
        f"ks(1)={rep.ks_vs_theory:.4f} ks(1/2)={rep.ks_vs_alternate:.4f}, "
        f"ks prefers {v['preferred_by_ks']}, variance prefers {v['preferred_by_variance']}",
    )


def test_c06_log_mgf_gaussian_oracle():
    worst = 0.0
    for t1 in np.linspace(-0.6, 0.15, 7):
        for t2 in np.linspace(-0.6, 0.25, 7):
            q = log_mgf(2, t1, t2, method="quadrature").value
            a = log_mgf(2, t1, t2, method="analytic").value
            worst = max(worst, abs(q - a))
    record("C6 log-MGF p=2 oracle", worst <= 1e-8, f"max |quad - closed form| = {worst:.2e} on 7x7 grid")


def test_c07_conjugate_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for p in (2.0, 3.0):
        for _ in range(20):
            t1, t2 = rng.uniform(-0.5, 0.15), rng.uniform(-0.5, 0.15)
            ev = log_mgf(p, t1, t2)
            x, y = ev.grad
            worst = max(worst, abs(legendre2(p, x, y) - (x * t1 + y * t2 - ev.value)))
    zb = max(rate_boundary(p, clt_center(p)) for p in (2, 3, 4))
    zv = max(rate_ball(p, clt_center(p)) for p in (2, 3, 4))
    zc = cube_rate(math.sqrt(2 / 3))
    secs = time.perf_counter() - t0
    ok = worst <= 1e-6 and zb <= 1e-6 and zv <= 1e-6 and zc <= 1e-8 and secs < 300
    record(
        "C7 conjugate identities",
        ok,
        f"Fenchel max err={worst:.1e}, max boundary rate at center={zb:.1e}, "
        f"ball={zv:.1e}, cube={zc:.1e}, {secs:.0f}s",
    )


def test_c08_cube_constants():
    h = 1e-4
    l0 = cube_log_mgf(0.0)
    d1 = (cube_log_mgf(h) - cube_log_mgf(-h)) / (2 * h)
    d2 = (cube_log_mgf(h) - 2 * l0 + cube_log_mgf(-h)) / h**2
    ok = abs(l0) <= 1e-11 and abs(d1 - 2 / 3) <= 1e-6 and abs(d2 - 28 / 45) <= 1e-5
    record("C8 cube log-MGF constants", ok, f"L(0)={l0:.1e} L'(0)={d1:.9f} L''(0)={d2:.7f}")


@pytest.mark.parametrize("p,domain", [(2.0, "boundary"), (3.0, "ball"), ("inf", "ball")])
def test_c09_rate_curve_shape(p, domain):
    t0 = time.perf_counter()
    zs = clt_center(p)
    curve = rate_curve(p, domain, 0.2 * zs, 1.8 * zs, 50)
    r = np.array(curve.rates)
    z = np.array(curve.z_grid)
    fin = np.isfinite(r)
    step = z[1] - z[0]
    nonneg = bool(np.all(r[fin] >= -1e-10))
    i = int(np.argmin(r))
    # z* generally falls between grid points, so locate the zero at grid resolution:
    # the parabola through the smallest grid value and its neighbours must dip to
    # <= 1e-4 within one step of z*
    j = min(max(i, 1), len(r) - 2)
    c2, c1, c0 = np.polyfit(z[j - 1 : j + 2], r[j - 1 : j + 2], 2)
    zv = -c1 / (2 * c2) if c2 > 0 else z[i]
    rv = c0 - c1 * c1 / (4 * c2) if c2 > 0 else r[i]
    zero = abs(z[i] - zs) <= step and abs(zv - zs) <= step and rv <= 1e-4
    # second differences over runs of consecutive finite values
    d2 = [r[k - 1] - 2 * r[k] + r[k + 1] for k in range(1, len(r) - 1) if fin[k - 1] and fin[k] and fin[k + 1]]
    d2min = min(d2) if d2 else 0.0
    secs = time.perf_counter() - t0
    ok = nonneg and zero and d2min >= -1e-4 and secs < 600
    record(
        f"C9 rate curve p={p} {domain}",
        ok,
        f"min grid rate={r[i]:.1e} at z={z[i]:.4f}, parabola min={rv:.1e} at {zv:.4f} "
        f"(z*={zs:.4f}, step {step:.4f}), "
        f"min 2nd diff={d2min:.1e}, {int((~fin).sum())} infinite, "
        f"converged {sum(curve.converged)}/50, {secs:.0f}s",
    )


def test_c10_tail_rate_trend():
    n, trials = 40, 10_000_000
    b = cached_batch("inf", n, "ball", trials, SEED)
    rows = tail_rates_shared(b, [0.95, 1.05])
    parts, ok = [], True
    for z, emp, hits in rows:
        th = cube_rate(z)
        ratio = max(emp / th, th / emp)
        ok &= ratio <= 2
        parts.append(f"z={z}: empirical={emp:.5f} ({hits} hits) theory={th:.5f} ratio={ratio:.2f}")
    single, _ = empirical_tail_rate("inf", n, "ball", 1.05, 100_000, SEED)
    grid = tail_rates_shared(b, np.linspace(0.9, 1.1, 21))
    mono = all(b2[1] >= a2[1] for a2, b2 in zip(grid, grid[1:]))
    ok &= mono and math.isfinite(single)
    record("C10 tail-rate trend", ok, "; ".join(parts) + f"; monotone={mono}")


def test_c11_moment_oracles():
    m = 10_000_000
    parts, ok = [], True

    def within(name, est, se, target):
        nonlocal ok
        z = abs(est - target) / se
        ok &= z <= 4
        parts.append(f"{name} z={z:.2f}")

    for j, p in enumerate((1.0, 2.0, 3.0, 4.0, "inf")):
        g = sample_pgauss(RandomStream(SEED, 2 * j), p, m)
        gp = sample_pgauss(RandomStream(SEED, 2 * j + 1), p, m)
        ag = np.abs(g)
        for k in (1.0, 2.0, 4.0):
            v = ag**k
            within(f"p={p} E|g|^{k:g}", v.mean(), v.std() / math.sqrt(m), abs_moment(p, k))
        m2, m4 = abs_moment(p, 2), abs_moment(p, 4)
        a = (g - gp) ** 2
        ca = a - a.mean()
        within(f"p={p} Var|g-g'|^2", np.mean(ca**2), np.std(ca**2) / math.sqrt(m), 2 * m4 + 2 * m2 * m2)
        if p == "inf":
            continue
        bp = np.abs(gp) ** p
        cb = bp - bp.mean()
        within(f"p={p} E|g|^p", bp.mean(), bp.std() / math.sqrt(m), 1.0)
        within(f"p={p} Var|g|^p", np.mean(cb**2), np.std(cb**2) / math.sqrt(m), p)
        within(f"p={p} Cov", np.mean(ca * cb), np.std(ca * cb) / math.sqrt(m), 2 * m2)
        v = np.abs(g) ** (p + 2)
        within(f"p={p} E|g|^(p+2)", v.mean(), v.std() / math.sqrt(m), 3 * m2)
        del g, gp, a, ca, bp, cb, v
    record("C11 moment oracles", ok, "; ".join(parts))


def _value_columns(path):
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        body = json.loads(text)
        body.pop("manifest", None)
        return json.dumps(body, sort_keys=True)
    return text


def test_c12_cli_reproducibility(tmp_path, monkeypatch):
    monkeypatch.delenv("LPDIST_WORKERS", raising=False)
    commands = {
        "sample": (["sample", "--p", "3", "--n", "20", "--trials", "200000", "--seed", "5"], "csv"),
        "clt-check": (["clt-check", "--p", "2", "--n", "50", "--domain", "boundary", "--trials", "100000", "--seed", "5"], "json"),
        "sphere-exact": (["sphere-exact", "--n", "7", "--t", "1.3"], "json"),
        "rate": (["rate", "--p", "inf", "--domain", "ball", "--z-min", "0.3", "--z-max", "1.9", "--steps", "9"], "csv"),
        "rate-p3": (["rate", "--p", "3", "--domain", "boundary", "--z-min", "1.2", "--z-max", "2.0", "--steps", "3"], "csv"),
        "tail": (["tail", "--p", "4", "--n", "30", "--trials", "200000", "--seed", "5", "--z", "1.2", "1.4"], "csv"),
    }
    mismatched = []
    for name, (args, kind) in commands.items():
        outs = []
        for run, workers in enumerate(("1", "1", "4")):
            path = tmp_path / f"{name}-{run}.{kind}"
            extra = [] if name == "sphere-exact" else ["--workers", workers]
            code = main(args + extra + [f"--{kind}", str(path)])
            assert code == 0, f"{name} exited {code}"
            outs.append(_value_columns(path))
        if len(set(outs)) != 1:
            mismatched.append(name)
    record(
        "C12 reproducibility",
        not mismatched,
        f"{len(commands)} commands x (rerun, workers=4): " + ("identical" if not mismatched else f"differ: {mismatched}"),
    )
