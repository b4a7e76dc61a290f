"""Fourier symbol, eigenstructure and propagators of the linear system.

Writing ``v = (1 - dx^2)^{-1} (u_t - (alpha/2) dx^2 u)`` turns the viscous
Klein-Gordon equation

    u_tt + u - u_xx - alpha u_xxt = kappa u^2 + beta u^3

into ``U_t = Lambda U + N(U)`` with ``U = (u, v)``. Every function here acts
mode by mode on the 2x2 symbol ``Lambda^(k)`` and broadcasts over array
arguments; 2x2 matrices are numpy arrays with trailing shape ``(2, 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateSymbol, GridTooCoarse, ScanFailed, ValidationError
from .grid import SpectralField

DEFAULT_MARGIN = 1e-3


@dataclass(frozen=True)
class SystemParams:
    """PDE instance: viscosity ``alpha`` and nonlinearity ``kappa u^2 + beta u^3``."""

    alpha: float = 1.0
    kappa: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError("alpha", f"alpha > 0 required, got {self.alpha}")
        for name in ("kappa", "beta"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(name, "must be finite")


@dataclass(frozen=True)
class EigenData:
    k: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    mu: np.ndarray

    def select(self, sign):
        """``lambda_plus`` where ``sign > 0`` and ``lambda_minus`` elsewhere."""
        return np.where(np.asarray(sign) > 0, self.lambda_plus, self.lambda_minus)


class ProjectionPair(NamedTuple):
    p_plus: np.ndarray
    p_minus: np.ndarray


def symbol(params: SystemParams, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    a = params.alpha
    k2 = k * k
    out = np.empty(k.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -0.5 * a * k2
    out[..., 0, 1] = 1.0 + k2
    out[..., 1, 0] = -1.0 + 0.25 * a * a * k2 * k2 / (1.0 + k2)
    out[..., 1, 1] = -0.5 * a * k2
    return out


def eigenvalues(params: SystemParams, k) -> EigenData:
    """``lambda_pm = -alpha k^2 / 2 +- mu`` with ``mu`` the principal root of
    ``alpha^2 k^4 / 4 - 1 - k^2``.

    Below the collision threshold the discriminant is negative and ``mu`` is
    ``+i sqrt(|disc|)``, so the real parts equal ``-alpha k^2 / 2`` exactly.
    """
    k = np.asarray(k, dtype=float)
    a = params.alpha
    k2 = k * k
    disc = 0.25 * a * a * k2 * k2 - 1.0 - k2
    mu = np.sqrt(disc.astype(complex))
    centre = -0.5 * a * k2
    return EigenData(k=k, lambda_plus=centre + mu, lambda_minus=centre - mu, mu=mu)


def collision_threshold(params) -> float:
    """Frequency ``k1`` at which ``lambda_+`` and ``lambda_-`` coincide."""
    a = params.alpha if isinstance(params, SystemParams) else float(params)
    return float(np.sqrt((2.0 + 2.0 * np.sqrt(1.0 + a * a)) / (a * a)))


def near_collision(params: SystemParams, k, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    return np.abs(np.abs(np.asarray(k, dtype=float)) - collision_threshold(params)) <= margin


def projections(params: SystemParams, k, margin: float = DEFAULT_MARGIN) -> ProjectionPair:
    """Spectral projections ``P_pm = (Lambda^ - lambda_mp I) / (lambda_pm - lambda_mp)``.

    Raises
    ------
    DegenerateSymbol
        If any ``|k|`` lies within ``margin`` of the collision threshold.
    """
    k = np.asarray(k, dtype=float)
    if np.any(near_collision(params, k, margin)):
        raise DegenerateSymbol(
            f"projections undefined within {margin:g} of |k| = {collision_threshold(params):.10g}"
        )
    lam = symbol(params, k)
    ev = eigenvalues(params, k)
    eye = np.eye(2)
    gap = (ev.lambda_plus - ev.lambda_minus)[..., None, None]
    p_plus = (lam - ev.lambda_minus[..., None, None] * eye) / gap
    p_minus = (lam - ev.lambda_plus[..., None, None] * eye) / (-gap)
    return ProjectionPair(p_plus, p_minus)


def expm2(a: np.ndarray, theta: float = 0.5, order: int = 18) -> np.ndarray:
    """Matrix exponential of a stack of 2x2 matrices by scaling and squaring.

    Each matrix is scaled by ``2**-s`` until its 1-norm is below ``theta``,
    exponentiated by a truncated Taylor series and squared back ``s`` times.
    Matrices are grouped by ``s`` so that small ones are not over-squared.
    """
    a = np.asarray(a, dtype=complex)
    shape = a.shape
    flat = a.reshape(-1, 2, 2)
    norm1 = np.max(np.sum(np.abs(flat), axis=-2), axis=-1)
    with np.errstate(divide="ignore"):
        s_all = np.maximum(0, np.ceil(np.log2(np.maximum(norm1, 1e-300) / theta))).astype(int)
    out = np.empty_like(flat)
    eye = np.eye(2, dtype=complex)
    for s in np.unique(s_all):
        idx = s_all == s
        b = flat[idx] / (2.0 ** s)
        term = np.broadcast_to(eye, b.shape).copy()
        total = term.copy()
        for n in range(1, order + 1):
            term = term @ b / n
            total += term
        for _ in range(s):
            total = total @ total
        out[idx] = total
    return out.reshape(shape)


def propagator(params: SystemParams, k, t, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """``exp(t Lambda^(k))``, broadcasting ``k`` against ``t``.

    Uses ``e^{lambda_+ t} P_+ + e^{lambda_- t} P_-`` away from the collision and
    falls back to :func:`expm2` within ``margin`` of it.
    """
    k, t = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    out = np.empty(k.shape + (2, 2), dtype=complex)
    bad = near_collision(params, k, margin)
    good = ~bad
    if np.any(good):
        kg, tg = k[good], t[good]
        ev = eigenvalues(params, kg)
        pp, pm = projections(params, kg, margin)
        out[good] = (
            np.exp(ev.lambda_plus * tg)[:, None, None] * pp
            + np.exp(ev.lambda_minus * tg)[:, None, None] * pm
        )
    if np.any(bad):
        out[bad] = expm2(symbol(params, k[bad]) * t[bad][:, None, None])
    return out


def opnorm2(m: np.ndarray) -> np.ndarray:
    """Spectral norm of a stack of 2x2 matrices (closed form)."""
    fro2 = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    root = np.sqrt(np.maximum(fro2 * fro2 - 4.0 * np.abs(det) ** 2, 0.0))
    return np.sqrt(0.5 * (fro2 + root))


class DecayScan(NamedTuple):
    theta0: float
    C: float


def theta_ladder(params: SystemParams, levels: int = 11) -> np.ndarray:
    """Candidate rates ``2**-m / alpha`` for ``m = 0 .. levels-1``, largest first."""
    return (1.0 / params.alpha) * 2.0 ** -np.arange(levels)


def decay_scan(
    params: SystemParams,
    k0: float,
    k_grid,
    t_grid,
    c_max: float = 100.0,
    ladder=None,
) -> DecayScan:
    """Largest ladder rate ``theta0`` with ``||e^{Lambda^ t}|| <= C e^{-theta0 t}``
    on the grid and ``C <= c_max``; ``C`` is the smallest such constant.

    ``k_grid`` must avoid the critical band ``(-k0/2, k0/2)``.
    """
    k_grid = np.asarray(k_grid, dtype=float).ravel()
    t_grid = np.asarray(t_grid, dtype=float).ravel()
    if np.any(np.abs(k_grid) < 0.5 * k0):
        raise ValueError("k_grid must lie outside (-k0/2, k0/2)")
    if np.any(t_grid < 0):
        raise ValueError("t_grid must be non-negative")
    norms = opnorm2(propagator(params, k_grid[:, None], t_grid[None, :]))
    if ladder is None:
        ladder = theta_ladder(params)
    for theta in sorted(np.asarray(ladder, dtype=float), reverse=True):
        if theta <= 0:
            continue
        c = float(np.max(norms * np.exp(theta * t_grid)[None, :]))
        if np.isfinite(c) and c <= c_max:
            return DecayScan(float(theta), c)
    raise ScanFailed(f"no positive rate in the ladder admits C <= {c_max:g}")


def pointwise_decay_rate(params: SystemParams, k: float, t_grid) -> float:
    """Least-squares slope of ``-log ||e^{Lambda^(k) t}||`` against ``t``."""
    t_grid = np.asarray(t_grid, dtype=float)
    norms = opnorm2(propagator(params, np.full_like(t_grid, k), t_grid))
    slope, _ = np.polyfit(t_grid, np.log(norms), 1)
    return float(-slope)


def default_cutoff(params: SystemParams) -> float:
    return 0.5 * collision_threshold(params)


def smooth_step(s):
    """C-infinity step, 0 for ``s <= 0`` and 1 for ``s >= 1``, built from exp(-1/s)."""
    s = np.asarray(s, dtype=float)

    def bump(z):
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    f0 = bump(s)
    f1 = bump(1.0 - s)
    return f0 / (f0 + f1)


@dataclass(frozen=True)
class ModeFilter:
    """Smooth cut-off ``chi``: 1 on ``|k| <= k0/2``, 0 on ``|k| >= k0``."""

    k0: float

    def __post_init__(self):
        if not self.k0 > 0:
            raise ValueError(f"k0 must be positive, got {self.k0}")

    def __call__(self, k) -> np.ndarray:
        return mode_filter_chi(self, k)


def mode_filter_chi(filt: ModeFilter, k):
    k = np.abs(np.asarray(k, dtype=float))
    half = 0.5 * filt.k0
    return 1.0 - smooth_step((k - half) / half)


def split_modes(field: SpectralField, filt: ModeFilter):
    """``(U_c, U_s)`` with ``U_c = chi U`` and ``U_s = U - U_c``."""
    k = field.k
    inside = int(np.count_nonzero(np.abs(k) <= filt.k0))
    if inside < 16:
        raise GridTooCoarse(f"only {inside} grid points inside [-k0, k0] (need 16)")
    chi = mode_filter_chi(filt, k)
    uc = field.values * chi[:, None]
    return SpectralField(field.grid, uc), SpectralField(field.grid, field.values - uc)


def decompose(field: SpectralField, filt: ModeFilter, params: SystemParams, margin: float = DEFAULT_MARGIN):
    """``(P_+ U_c, P_- U_c, U_s)``; the three parts sum back to ``field``."""
    uc, us = split_modes(field, filt)
    k = field.k
    support = np.abs(k) < filt.k0
    plus = np.zeros_like(field.values)
    minus = np.zeros_like(field.values)
    pp, pm = projections(params, k[support], margin)
    plus[support] = np.einsum("nij,nj->ni", pp, uc.values[support])
    minus[support] = np.einsum("nij,nj->ni", pm, uc.values[support])
    grid = field.grid
    return SpectralField(grid, plus), SpectralField(grid, minus), us


def to_diffusive(u_hat, w_hat, params: SystemParams, k):
    """``v^ = (w^ + (alpha/2) k^2 u^) / (1 + k^2)`` from position/velocity data."""
    k2 = np.asarray(k, dtype=float) ** 2
    return (np.asarray(w_hat) + 0.5 * params.alpha * k2 * np.asarray(u_hat)) / (1.0 + k2)


def from_diffusive(u_hat, v_hat, params: SystemParams, k):
    """Inverse of :func:`to_diffusive`; returns ``(u^, w^)``."""
    k2 = np.asarray(k, dtype=float) ** 2
    u_hat = np.asarray(u_hat)
    return u_hat, (1.0 + k2) * np.asarray(v_hat) - 0.5 * params.alpha * k2 * u_hat
