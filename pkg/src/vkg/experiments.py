"""Simulation experiments built on :mod:`vkg.simulator`.

``ibp_residual_scaling`` checks numerically that integrating the quadratic
Duhamel term by parts in time leaves a remainder of quartic order in the data
size. ``lifespan_probe`` records how long the template function stays near its
initial plateau for a ladder of data sizes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureTooCoarse
from .grid import SpectralField
from .normal_form import n2_kernel
from .resonance import SIGN_TUPLES_2, phi2
from .spectral_core import (
    DEFAULT_MARGIN,
    ModeFilter,
    SystemParams,
    collision_threshold,
    projections,
    propagator,
    to_diffusive,
)
from .simulator import RunConfig, run

LIFESPAN_NOTE = (
    "bounded_until is a finite-budget proxy: the exponential lifespan law "
    "T_eps = exp(eps0/eps) - 2 is not verifiable at desk scale"
)


def thread_count(threads=None) -> int:
    """Parallelism cap from ``threads`` or ``VKG_THREADS`` (0 or unset = auto)."""
    if threads is None:
        try:
            threads = int(os.environ.get("VKG_THREADS", "0"))
        except ValueError:
            threads = 0
    return threads if threads > 0 else (os.cpu_count() or 1)


class Q2Operator:
    """Integrated quadratic normal-form operator on index windows of a grid.

    Evaluates ``dk * sum_l Q2(k, l)(U(k - l), V(l))`` for output indices
    ``out`` with ``U`` given on the signed index window ``u_window`` and ``V``
    on ``v_window``. Phases and projections are precomputed once.
    """

    def __init__(self, params: SystemParams, dk: float, out, u_window, v_window, margin=DEFAULT_MARGIN):
        self.dk = dk
        out = np.arange(out[0], out[1] + 1)
        u_idx = np.arange(u_window[0], u_window[1] + 1)
        v_idx = np.arange(v_window[0], v_window[1] + 1)
        self.u_lo = u_idx[0]
        pos = out[:, None] - v_idx[None, :] - self.u_lo
        valid = (pos >= 0) & (pos < len(u_idx))
        self.pos = np.where(valid, pos, 0)
        self.valid = valid
        k = out * dk
        l = v_idx * dk
        kk = np.broadcast_to(k[:, None], valid.shape)[valid]
        ll = np.broadcast_to(l[None, :], valid.shape)[valid]
        pref = params.kappa / (1.0 + kk * kk)
        self.weights = {}
        for j in SIGN_TUPLES_2:
            w = np.zeros(valid.shape, dtype=complex)
            w[valid] = pref / phi2(params, j, kk, ll, margin)
            self.weights[j] = w
        pkl = projections(params, kk - ll, margin)
        self.row_kl = {}
        for sign, p in ((1, pkl.p_plus), (-1, pkl.p_minus)):
            r = np.zeros(valid.shape + (2,), dtype=complex)
            r[valid] = p[:, 0, :]
            self.row_kl[sign] = r
        pl = projections(params, l, margin)
        self.row_l = {1: pl.p_plus[:, 0, :], -1: pl.p_minus[:, 0, :]}
        pk = projections(params, k, margin)
        self.col_k = {1: pk.p_plus[:, :, 1], -1: pk.p_minus[:, :, 1]}

    def __call__(self, u_vals: np.ndarray, v_vals: np.ndarray) -> np.ndarray:
        gathered = u_vals[self.pos]
        a = {s: np.sum(self.row_kl[s] * gathered, axis=-1) for s in (1, -1)}
        b = {s: np.sum(self.row_l[s] * v_vals, axis=-1) for s in (1, -1)}
        out = 0
        for j0 in (1, -1):
            acc = 0
            for j1 in (1, -1):
                for j2 in (1, -1):
                    acc = acc + (self.weights[(j0, j1, j2)] * a[j1]) @ b[j2]
            out = out + self.col_k[j0] * acc[:, None]
        return self.dk * out


def n2_convolution(params: SystemParams, dk: float, u_vals, u_window, v_vals, v_window):
    """``int N2(k, l)(U, V) dl`` on the full output window ``u_window + v_window``."""
    conv = dk * np.convolve(u_vals[:, 0], v_vals[:, 0])
    lo = u_window[0] + v_window[0]
    k = np.arange(lo, lo + len(conv)) * dk
    return n2_kernel(params, k, 0.0, conv, 1.0)


def simpson_weights(n_points: int, h: float) -> np.ndarray:
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number (>= 3) of points")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def bandlimited_data(template: RunConfig, epsilon: float, width: float) -> SpectralField:
    """Smooth, compactly supported spectrum on ``|k| < width`` with ``max u0 = eps``."""
    grid = template.grid
    u_hat = ModeFilter(width)(grid.k).astype(complex)
    peak = float(np.max(np.abs(grid.inverse(u_hat).real)))
    u_hat *= epsilon / peak
    v_hat = to_diffusive(u_hat, np.zeros_like(u_hat), template.params, grid.k)
    return SpectralField(grid, np.stack([u_hat, v_hat], axis=1))


@dataclass
class IBPTerms:
    epsilon: float
    lhs: float
    boundary: float
    cubic: float
    residual: float
    quadrature_error: float


@dataclass
class IBPScaling:
    rows: list
    residual_order: float
    lhs_order: float
    k0: float


def _fit_order(eps, values) -> float:
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        return float("nan")
    slope, _ = np.polyfit(np.log(eps), np.log(values), 1)
    return float(slope)


def ibp_terms(template: RunConfig, epsilon: float, k0: float, snapshot_every: int = 5) -> IBPTerms:
    """Both sides of the integration-by-parts identity at ``t = t_end``.

    The quadratic Duhamel integral over ``U_c`` is compared with the boundary
    term built from ``Q2`` plus the time integral of the ``Q3`` term, all time
    integrals by composite Simpson on stored snapshots. Norms are ``dk * sum |.|``
    over the critical band.
    """
    params = template.params
    grid = template.grid
    dk = grid.dk
    n = grid.n_modes
    c = int(math.ceil(k0 / dk)) - 1
    crit = np.arange(-c, c + 1)
    filt = ModeFilter(k0)
    chi = filt(crit * dk)[:, None]

    n_steps = template.n_steps
    if n_steps % (4 * snapshot_every):
        raise ValueError("t_end / dt must be a multiple of 4 * snapshot_every")
    initial = bandlimited_data(template, epsilon, 0.25 * k0)
    result = run(template.replace(epsilon=epsilon), initial=initial, snapshot_every=snapshot_every, validate=False)
    if result.blowup_time is not None:
        raise RuntimeError(f"trajectory blew up at t = {result.blowup_time}")
    times = np.array([s[0] for s in result.snapshots])
    t = times[-1]
    uc = np.array([vals[crit % n] * chi for _, vals in result.snapshots])

    window = (-c, c)
    wide = (-2 * c, 2 * c)
    q2_cc = Q2Operator(params, dk, window, window, window)
    q2_nc = Q2Operator(params, dk, window, wide, window)
    q2_cn = Q2Operator(params, dk, window, window, wide)

    lhs_integrand = np.empty_like(uc)
    cubic_integrand = np.empty_like(uc)
    boundary_vals = []
    for i, u in enumerate(uc):
        n2c = n2_convolution(params, dk, u, window, u, window)
        lhs_integrand[i] = n2c[c:3 * c + 1]
        cubic_integrand[i] = q2_nc(n2c, u) + q2_cn(u, n2c)
        if i in (0, len(uc) - 1):
            boundary_vals.append(q2_cc(u, u))

    prop = propagator(params, (crit * dk)[None, :], (t - times)[:, None])

    def integrate(f, stride=1):
        pts = np.einsum("sknm,skm->skn", prop[::stride], f[::stride])
        w = simpson_weights(len(pts), stride * (times[1] - times[0]))
        return np.einsum("s,skn->kn", w, pts)

    lhs = integrate(lhs_integrand)
    cubic = integrate(cubic_integrand)
    qerr = (
        np.abs(lhs - integrate(lhs_integrand, 2)) + np.abs(cubic - integrate(cubic_integrand, 2))
    ) / 15.0
    e_t = propagator(params, crit * dk, t)
    boundary = -(boundary_vals[1] - np.einsum("knm,km->kn", e_t, boundary_vals[0]))
    residual = lhs - boundary - cubic

    def l1(v):
        return dk * float(np.sum(np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))))

    terms = IBPTerms(epsilon, l1(lhs), l1(boundary), l1(cubic), l1(residual), dk * float(np.sum(qerr)))
    if terms.quadrature_error > 0 and terms.boundary < 10 * terms.quadrature_error:
        raise QuadratureTooCoarse(
            f"boundary term {terms.boundary:.3e} below 10x quadrature error {terms.quadrature_error:.3e}"
        )
    return terms


def ibp_cutoff(params: SystemParams, k0=None) -> float:
    """Critical band used by the residual experiment: ``2 k0`` must stay below the
    collision so projections exist at every interaction frequency."""
    cap = 0.45 * collision_threshold(params)
    return cap if k0 is None else min(float(k0), cap)


def ibp_residual_scaling(template: RunConfig, eps_ladder, snapshot_every: int = 5, k0=None) -> IBPScaling:
    """Fit the order in ``eps`` of the integration-by-parts remainder.

    Data are band-limited to a quarter of the critical band so that quadratic
    interactions stay where the cut-off equals one; the remainder is then of
    quartic order while each individual term is quadratic.
    """
    eps = sorted(float(e) for e in eps_ladder)
    if len(eps) < 3:
        raise ValueError("need at least three epsilon values")
    k0 = ibp_cutoff(template.params, k0 if k0 is not None else template.k0)
    rows = [ibp_terms(template, e, k0, snapshot_every) for e in eps]
    return IBPScaling(
        rows=rows,
        residual_order=_fit_order(eps, [r.residual for r in rows]),
        lhs_order=_fit_order(eps, [r.lhs for r in rows]),
        k0=k0,
    )


@dataclass
class LifespanTable:
    rows: list  # (epsilon, bounded_until), sorted by epsilon
    budget: float
    factor: float
    note: str = LIFESPAN_NOTE

    def is_monotone(self) -> bool:
        """Smaller epsilon never stays bounded for a shorter time."""
        times = [b for _, b in sorted(self.rows)]
        return all(a >= b for a, b in zip(times, times[1:]))


def _bounded_until(template: RunConfig, epsilon: float, budget: float, factor: float, plateau_time: float) -> float:
    cfg = template.replace(epsilon=epsilon, t_end=budget)
    state = {"plateau": None, "crossed": None}

    def stop(rec):
        if state["plateau"] is None:
            if rec.t >= plateau_time:
                state["plateau"] = rec.eta
            return False
        if rec.eta > factor * state["plateau"]:
            state["crossed"] = rec.t
            return True
        return False

    result = run(cfg, stop=stop, validate=False)
    if state["crossed"] is not None:
        return state["crossed"]
    if result.blowup_time is not None:
        return result.blowup_time
    return budget


def lifespan_probe(
    template: RunConfig,
    eps_ladder,
    budget: float,
    factor: float = 4.0,
    plateau_time: float = 1.0,
    threads=None,
) -> LifespanTable:
    """First time ``eta`` exceeds ``factor`` times its plateau (``eta`` at
    ``plateau_time``), or ``budget`` if it never does.
    """
    if not (math.isfinite(budget) and budget > 0):
        raise ValueError("budget must be finite and positive")
    eps = sorted(float(e) for e in eps_ladder)
    plateau_time = min(plateau_time, budget)

    def one(e):
        if e == 0:
            return budget
        return _bounded_until(template, e, budget, factor, plateau_time)

    workers = min(thread_count(threads), len(eps))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            times = list(pool.map(one, eps))
    else:
        times = [one(e) for e in eps]
    return LifespanTable(rows=list(zip(eps, times)), budget=budget, factor=factor)
