"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` / ``[FAIL]`` line (visible in the pytest
output) before asserting, so a full run doubles as the acceptance report.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from vkg.experiments import ibp_residual_scaling, lifespan_probe
from vkg.grid import GridSpec
from vkg.normal_form import cancellation_verdict, cubic_coefficients_at_origin
from vkg.resonance import (
    SIGN_TUPLES_2,
    SIGN_TUPLES_3,
    geometric_ladder,
    is_resonant,
    phase_floor,
    phi2,
    phi3,
    vanishing_order,
)
from vkg.simulator import RunConfig, Stepper, decay_fit, init_field, run
from vkg.spectral_core import SystemParams, collision_threshold, decay_scan, eigenvalues, propagator

P = SystemParams(alpha=1.0, kappa=1.0, beta=1.0)
LINEAR = SystemParams(alpha=1.0, kappa=0.0, beta=0.0)


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number, title, ok, detail, limit):
        elapsed = time.perf_counter() - start
        ok = bool(ok) and elapsed < limit
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] AC{number:02d} {title}: {detail} ({elapsed:.2f} s, limit {limit:g} s)")
        return ok

    return emit


def test_ac01_eigenvalue_algebra(report):
    k = np.linspace(-10, 10, 10_000)
    worst = 0.0
    for a in (0.5, 1.0, 2.0):
        ev = eigenvalues(SystemParams(alpha=a), k)
        trace = np.abs(ev.lambda_plus + ev.lambda_minus + a * k * k) / np.maximum(1.0, a * k * k)
        det = np.abs(ev.lambda_plus * ev.lambda_minus - (1 + k * k)) / (1 + k * k)
        worst = max(worst, trace.max(), det.max())
    assert report(1, "eigenvalue algebra", worst <= 1e-12, f"max relative error {worst:.2e}", 1)


def test_ac02_critical_real_part(report):
    k1 = collision_threshold(P)
    k = np.linspace(-0.9 * k1, 0.9 * k1, 10_001)
    ev = eigenvalues(P, k)
    err = max(np.abs(ev.lambda_plus.real + k * k / 2).max(), np.abs(ev.lambda_minus.real + k * k / 2).max())
    assert report(2, "critical real part", err <= 1e-14, f"max |Re lambda + k^2/2| = {err:.1e}", 1)


def test_ac03_semigroup_bound(report):
    k0 = collision_threshold(P) / 2
    scan = decay_scan(P, k0, np.linspace(k0 / 2, 10, 1000), np.linspace(0, 50, 501))
    ok = scan.theta0 >= 0.05 and scan.C <= 100
    assert report(3, "semigroup bound", ok, f"theta0 = {scan.theta0:g}, C = {scan.C:.4f}", 30)


def test_ac04_quadratic_phase_floor(report):
    rep = phase_floor(P, 2, 0.1, 0.005)
    origin = {abs(complex(phi2(P, j, 0.0, 0.0))) for j in SIGN_TUPLES_2}
    ok = rep.floor >= 0.9 and origin == {1.0, 3.0}
    assert report(4, "quadratic phase floor", ok, f"min |phi2| = {rep.floor:.6f}, origin values {sorted(origin)}", 10)


def test_ac05_cubic_phases_at_origin(report):
    res = [abs(complex(phi3(P, j, 0.0, 0.0, 0.0))) for j in SIGN_TUPLES_3 if is_resonant(j)]
    other = [abs(complex(phi3(P, j, 0.0, 0.0, 0.0))) for j in SIGN_TUPLES_3 if not is_resonant(j)]
    ok = len(res) == 6 and max(res) <= 1e-15 and len(other) == 10 and set(other) <= {2.0, 4.0}
    detail = f"resonant max {max(res):.1e}, non-resonant values {sorted(set(other))}"
    assert report(5, "cubic phases at origin", ok, detail, 1)


def test_ac06_coefficient_table(report):
    table = cubic_coefficients_at_origin(P)
    expected = {(1, -1, 1, 1): 2 / 3, (1, 1, -1, 1): 2.0, (1, 1, 1, -1): 2 / 3}
    err = max(
        max(abs(table.n3(j) - 1 / 2j), abs(table.q3(j) - q / 2j)) for j, q in expected.items()
    )
    anti = all(
        table.n3(tuple(-s for s in j)) == -table.n3(j) and table.q3(tuple(-s for s in j)) == -table.q3(j)
        for j in table.tuples
    )
    verdict = cancellation_verdict(table)
    ok = err <= 1e-14 and anti and verdict.determinant == Fraction(4, 3) and verdict.only_trivial
    assert report(6, "cubic coefficient table", ok, f"max error {err:.1e}, antisymmetric {anti}, {verdict.summary()}", 1)


def test_ac07_integrator(report):
    grid = GridSpec(40.0, 256)
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(256, 2)) + 1j * rng.normal(size=(256, 2))
    lin_err = 0.0
    for dt in (0.01, 0.05, 0.1):
        out = Stepper(grid, LINEAR, dt)(vals)
        lin_err = max(lin_err, np.abs(out - np.einsum("kij,kj->ki", propagator(LINEAR, grid.k, dt), vals)).max())
    base = RunConfig(params=P, grid=grid, t_end=2.0, epsilon=0.5, stride=1000)
    finals = [run(base.replace(dt=dt), validate=False).final.values for dt in (0.1, 0.05, 0.025)]
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    ok = lin_err <= 1e-12 and 3.4 <= ratio <= 4.6
    assert report(7, "integrator", ok, f"linear error {lin_err:.1e}, Richardson ratio {ratio:.3f}", 60)


@pytest.mark.slow
def test_ac08_decay_rate(report):
    cfg = RunConfig(params=P, grid=GridSpec(200.0, 4096), dt=0.01, t_end=500.0, epsilon=0.05, stride=100)
    res = run(cfg)
    slope = decay_fit(res.records, 20.0, 500.0)
    ok = -0.65 <= slope <= -0.35 and res.blowup_time is None
    detail = f"exponent {slope:.4f} over [20, 500], boundary fraction {res.boundary_fraction:.1e}"
    assert report(8, "decay rate", ok, detail, 600)


@pytest.mark.slow
def test_ac09_ibp_remainder(report):
    template = RunConfig(params=P, grid=GridSpec(100.0, 1024), dt=1e-3, t_end=4.0, stride=1000)
    out = ibp_residual_scaling(template, [2e-2, 1e-2, 5e-3], snapshot_every=5)
    ok = out.residual_order >= 3.5 and abs(out.lhs_order - 2.0) <= 0.2
    detail = f"residual order {out.residual_order:.3f}, quadratic term order {out.lhs_order:.3f}"
    assert report(9, "integration-by-parts remainder", ok, detail, 600)


def test_ac10_vanishing_order(report):
    orders = [vanishing_order(P, (1, -1, 1, 1), d, geometric_ladder()) for d in np.eye(3)]
    ok = all(abs(o - 2.0) <= 0.1 for o in orders)
    assert report(10, "vanishing order", ok, "orders " + ", ".join(f"{o:.4f}" for o in orders), 5)


@pytest.mark.slow
def test_ac11_lifespan_monotone(report):
    template = RunConfig(params=P, grid=GridSpec(200.0, 2048), dt=0.01, t_end=200.0, stride=10)
    table = lifespan_probe(template, [0.4, 0.2, 0.1], budget=200.0)
    ok = table.is_monotone() and "not verifiable" in table.note
    rows = ", ".join(f"eps={e:g}: {b:g}" for e, b in table.rows)
    assert report(11, "lifespan monotonicity", ok, f"{rows}; note: {table.note}", 900)


def test_ac12_zero_mode_rotation(report):
    cfg = RunConfig(params=LINEAR, grid=GridSpec(40.0, 256), dt=0.1, t_end=100.0, epsilon=0.3, stride=1000)
    n0 = np.linalg.norm(init_field(cfg).values[0])
    res = run(cfg, snapshot_every=10, validate=False)
    drift = max(abs(np.linalg.norm(v[0]) - n0) for _, v in res.snapshots)
    ok = drift <= 1e-10 and res.snapshots[-1][0] == pytest.approx(100.0)
    assert report(12, "zero-mode rotation", ok, f"max drift of |U(t, 0)| {drift:.1e} over [0, 100]", 10)
