"""Fast invariant suite behind ``vkg verify``.

Every check is a small function returning ``(ok, detail)``; the suite runs in a
few seconds and covers each module. Random sample points come from ``seed``.
"""
from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grid import GridSpec, SpectralField
from .normal_form import cancellation_verdict, contract_at_origin, cubic_coefficients_at_origin
from .resonance import (
    SIGN_TUPLES_2,
    SIGN_TUPLES_3,
    is_resonant,
    phase_floor,
    phi2,
    phi3,
    geometric_ladder,
    vanishing_order,
)
from .simulator import NormRecord, RunConfig, Stepper, decay_fit, field_from_data, init_field, run
from .spectral_core import (
    SystemParams,
    collision_threshold,
    decay_scan,
    default_cutoff,
    eigenvalues,
    propagator,
)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _eigen_algebra(rng):
    worst = 0.0
    k = np.linspace(-10, 10, 10_000)
    for a in (0.5, 1.0, 2.0):
        ev = eigenvalues(SystemParams(alpha=a), k)
        s = np.abs(ev.lambda_plus + ev.lambda_minus + a * k * k) / (a * k * k + 1)
        p = np.abs(ev.lambda_plus * ev.lambda_minus - (1 + k * k)) / (1 + k * k)
        worst = max(worst, float(s.max()), float(p.max()))
    return worst <= 1e-12, f"max relative error {worst:.2e}"


def _critical_real_part(rng):
    p = SystemParams()
    k = np.linspace(-0.9, 0.9, 2001) * collision_threshold(p)
    ev = eigenvalues(p, k)
    err = max(np.max(np.abs(ev.lambda_plus.real + 0.5 * k * k)), np.max(np.abs(ev.lambda_minus.real + 0.5 * k * k)))
    return err <= 1e-14, f"max |Re lambda + k^2/2| = {err:.2e}"


def _semigroup(rng):
    p = SystemParams()
    k0 = default_cutoff(p)
    scan = decay_scan(p, k0, np.linspace(k0 / 2, 10, 400), np.linspace(0, 50, 201))
    k = rng.uniform(-3, 3, 20)
    comp = np.einsum("kij,kjl->kil", propagator(p, k, 0.7), propagator(p, k, 1.3))
    err = float(np.max(np.abs(comp - propagator(p, k, 2.0))))
    ok = scan.theta0 >= 0.05 and scan.C <= 100 and err < 1e-12
    return ok, f"theta0={scan.theta0:g} C={scan.C:.4g}; semigroup defect {err:.1e}"


def _quadratic_floor(rng):
    p = SystemParams()
    rep = phase_floor(p, 2, 0.1, 0.005)
    origin = sorted({round(abs(complex(phi2(p, j, 0.0, 0.0))), 15) for j in SIGN_TUPLES_2})
    return rep.floor >= 0.9 and origin == [1.0, 3.0], f"floor {rep.floor:.6f}; |phi2(0,0)| in {origin}"


def _cubic_origin(rng):
    p = SystemParams()
    res = [abs(complex(phi3(p, j, 0.0, 0.0, 0.0))) for j in SIGN_TUPLES_3 if is_resonant(j)]
    non = sorted({abs(complex(phi3(p, j, 0.0, 0.0, 0.0))) for j in SIGN_TUPLES_3 if not is_resonant(j)})
    ok = len(res) == 6 and max(res) <= 1e-15 and non == [2.0, 4.0]
    return ok, f"{len(res)} resonant tuples, max |phi3| {max(res):.1e}; others in {non}"


def _coefficients(rng):
    p = SystemParams(kappa=1.0, beta=1.0)
    table = cubic_coefficients_at_origin(p)
    expected = {(1, -1, 1, 1): Fraction(2, 3), (1, 1, -1, 1): Fraction(2), (1, 1, 1, -1): Fraction(2, 3)}
    ok = all(table.q3_unit[j] == v and table.n3_unit[j] == 1 for j, v in expected.items())
    for j in table.tuples:
        neg = tuple(-s for s in j)
        ok &= table.n3_unit[neg] == -table.n3_unit[j] and table.q3_unit[neg] == -table.q3_unit[j]
        n3, q3 = contract_at_origin(p, j)
        ok &= abs(n3 - table.n3(j)) <= 1e-14 and abs(q3 - table.q3(j)) <= 1e-14
    rep = cancellation_verdict(table)
    ok &= rep.determinant == Fraction(4, 3) and rep.only_trivial
    return bool(ok), rep.summary()


def _vanishing(rng):
    p = SystemParams()
    s = geometric_ladder()
    orders = [vanishing_order(p, (1, -1, 1, 1), d, s) for d in np.eye(3)]
    return all(abs(o - 2) <= 0.1 for o in orders), "orders " + ", ".join(f"{o:.4f}" for o in orders)


def _linear_step(rng):
    p = SystemParams(kappa=0.0, beta=0.0)
    grid = GridSpec(20.0, 128)
    vals = rng.normal(size=(128, 2)) + 1j * rng.normal(size=(128, 2))
    out = Stepper(grid, p, 0.05)(vals)
    ref = np.einsum("kij,kj->ki", propagator(p, grid.k, 0.05), vals)
    err = float(np.max(np.abs(out - ref)))
    cfg = RunConfig(params=p, grid=GridSpec(40.0, 256), dt=0.1, t_end=100.0, stride=50, epsilon=0.1)
    res = run(cfg, validate=False)
    n0 = np.linalg.norm(init_field(cfg).values[0])
    drift = abs(np.linalg.norm(res.final.values[0]) - n0)
    return err <= 1e-12 and drift <= 1e-10, f"step vs propagator {err:.1e}; k=0 drift {drift:.1e} over t=100"


def _reality(rng):
    p = SystemParams()
    grid = GridSpec(20.0, 128)
    u0 = 0.3 * np.exp(-grid.x ** 2) * (1 + 0.1 * rng.normal(size=grid.n_modes))
    field = field_from_data(grid, p, u0, np.zeros_like(u0))
    stepper = Stepper(grid, p, 0.01)
    vals = field.values
    for _ in range(50):
        vals = stepper(vals)
    out = SpectralField(grid, vals)
    imag = float(np.max(np.abs(grid.inverse(vals[:, 0]).imag)))
    return imag <= 1e-10 and out.conjugate_defect() <= 1e-12, f"max imaginary part {imag:.1e}"


def _decay_fit_synthetic(rng):
    t = np.linspace(0, 1000, 201)
    recs = [NormRecord(x, 0, 0, 0, 0, (1 + x) ** -0.5, 0) for x in t]
    slope = decay_fit(recs, 10, 1000)
    return abs(slope + 0.5) <= 1e-6, f"slope {slope:.9f}"


def _round_trips(rng):
    from .config import ECHO_NAME, parse_config, to_text
    from .io import read_snapshot, read_trajectory, write_snapshot, write_trajectory

    grid = GridSpec(20.0, 128)
    field = SpectralField(grid, rng.normal(size=(128, 2)) + 1j * rng.normal(size=(128, 2)))
    recs = [NormRecord(*rng.uniform(0, 1, 7)) for _ in range(5)]
    with tempfile.TemporaryDirectory() as tmp:
        write_snapshot(os.path.join(tmp, "s.csv"), field, 1.25)
        back, t = read_snapshot(os.path.join(tmp, "s.csv"))
        write_trajectory(os.path.join(tmp, "t.csv"), recs)
        recs2 = read_trajectory(os.path.join(tmp, "t.csv"))
        cfg_path = os.path.join(tmp, "c.txt")
        with open(cfg_path, "w") as fh:
            fh.write(f"alpha = 1\nepsilon = 0.05\nout_dir = {tmp}\n")
        cfg = parse_config(cfg_path)
        again = parse_config(os.path.join(tmp, ECHO_NAME), echo=False)
        ok = np.array_equal(back.values, field.values) and t == 1.25 and recs2 == recs
        ok &= again == cfg and to_text(again) == to_text(cfg)
    return bool(ok), "snapshot, trajectory and config round trips"


CHECKS = (
    ("eigenvalue algebra", _eigen_algebra),
    ("critical real part", _critical_real_part),
    ("semigroup bound", _semigroup),
    ("quadratic phase floor", _quadratic_floor),
    ("cubic phases at origin", _cubic_origin),
    ("cubic coefficient table", _coefficients),
    ("vanishing order", _vanishing),
    ("linear integrator", _linear_step),
    ("reality of the flow", _reality),
    ("decay fit", _decay_fit_synthetic),
    ("artifact round trips", _round_trips),
)


def run_checks(seed: int = 0) -> list:
    results = []
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results


def all_passed(results) -> bool:
    return bool(results) and all(r.ok for r in results)
