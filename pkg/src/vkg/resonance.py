"""Quadratic and cubic resonance phases near the critical frequency ``k = 0``.

A phase is the output eigenvalue minus the input eigenvalues,

    phi2_j(k, l)      = lam_j0(k) - lam_j1(k - l) - lam_j2(l)
    phi3_j(k, l1, l2) = lam_j0(k) - lam_j1(k - l1) - lam_j2(l1 - l2) - lam_j3(l2)

with ``lam_{+1} = lambda_+`` and ``lam_{-1} = lambda_-``. Sign tuples are plain
tuples of ``+1`` / ``-1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSymbol, RankDeficientFit
from .spectral_core import (
    DEFAULT_MARGIN,
    SystemParams,
    collision_threshold,
    eigenvalues,
    near_collision,
)

SIGN_TUPLES_2 = tuple(itertools.product((1, -1), repeat=3))
SIGN_TUPLES_3 = tuple(itertools.product((1, -1), repeat=4))

_RESONANT = (
    (1, -1, 1, 1),
    (1, 1, -1, 1),
    (1, 1, 1, -1),
    (-1, 1, -1, -1),
    (-1, -1, 1, -1),
    (-1, -1, -1, 1),
)


def format_signs(j) -> str:
    return "".join("+" if s > 0 else "-" for s in j)


def parse_signs(text: str) -> tuple:
    try:
        return tuple({"+": 1, "-": -1}[c] for c in text.strip())
    except KeyError:
        raise ValueError(f"not a sign string: {text!r}") from None


def _check_signs(j, n):
    j = tuple(int(s) for s in j)
    if len(j) != n or any(s not in (1, -1) for s in j):
        raise ValueError(f"expected {n} signs in {{-1, +1}}, got {j}")
    return j


def _lam(params, sign, k, margin):
    if np.any(near_collision(params, k, margin)):
        raise DegenerateSymbol("phase argument within the collision margin")
    return eigenvalues(params, k).select(sign)


def phi2(params: SystemParams, j, k, l, margin: float = DEFAULT_MARGIN):
    j0, j1, j2 = _check_signs(j, 3)
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    return _lam(params, j0, k, margin) - _lam(params, j1, k - l, margin) - _lam(params, j2, l, margin)


def phi3(params: SystemParams, j, k, l1, l2, margin: float = DEFAULT_MARGIN):
    j0, j1, j2, j3 = _check_signs(j, 4)
    k = np.asarray(k, dtype=float)
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    return (
        _lam(params, j0, k, margin)
        - _lam(params, j1, k - l1, margin)
        - _lam(params, j2, l1 - l2, margin)
        - _lam(params, j3, l2, margin)
    )


def resonant_set() -> list:
    """The six cubic sign tuples whose phase vanishes at the origin."""
    return list(_RESONANT)


def is_resonant(j) -> bool:
    j0, j1, j2, j3 = _check_signs(j, 4)
    return j0 - j1 - j2 - j3 == 0


@dataclass(frozen=True)
class PhaseFloorReport:
    order: int
    radius: float
    grid_step: float
    floor: float
    argmin_signs: tuple
    argmin_point: tuple


def phase_floor(
    params: SystemParams,
    order: int,
    radius: float,
    grid_step: float,
    include_resonant: bool = False,
) -> PhaseFloorReport:
    """Brute-force minimum of ``|phi|`` over ``[-radius, radius]^order`` and all
    non-resonant sign tuples (all eight tuples for ``order == 2``).

    Ties are broken by the first occurrence in tuple order, then C order of the
    grid, so the reported argmin is reproducible.
    """
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    if not 0 < radius < 0.9 * collision_threshold(params):
        raise ValueError("radius must lie in (0, 0.9 k1)")
    if not 0 < grid_step <= radius / 10 + 1e-15:
        raise ValueError("grid_step must be positive and <= radius / 10")
    n = int(round(radius / grid_step))
    axis = np.linspace(-n * grid_step, n * grid_step, 2 * n + 1)
    best = (np.inf, None, None)
    if order == 2:
        kk, ll = np.meshgrid(axis, axis, indexing="ij")
        candidates = [(j, np.abs(phi2(params, j, kk, ll))) for j in SIGN_TUPLES_2]
        grids = (kk, ll)
    else:
        kk, l1, l2 = np.meshgrid(axis, axis, axis, indexing="ij")
        tuples = SIGN_TUPLES_3 if include_resonant else [j for j in SIGN_TUPLES_3 if not is_resonant(j)]
        candidates = [(j, np.abs(phi3(params, j, kk, l1, l2))) for j in tuples]
        grids = (kk, l1, l2)
    for j, mag in candidates:
        i = int(np.argmin(mag))
        if mag.flat[i] < best[0]:
            best = (float(mag.flat[i]), j, tuple(float(g.flat[i]) for g in grids))
    return PhaseFloorReport(order, float(radius), float(grid_step), best[0], best[1], best[2])


def vanishing_order(params: SystemParams, j, direction, scales) -> float:
    """Fitted exponent ``p`` in ``|phi3_j(s d)| ~ s**p`` along a ray.

    Ordinary least squares of ``log |phi3|`` against ``log s``.
    """
    j = _check_signs(j, 4)
    d = np.asarray(direction, dtype=float)
    if d.shape != (3,) or not np.any(d):
        raise ValueError("direction must be a nonzero 3-vector")
    d = d / np.linalg.norm(d)
    s = np.asarray(scales, dtype=float)
    if s.size < 5:
        raise ValueError("need at least 5 scales")
    if np.any(s <= 0) or np.any(s > 0.1):
        raise ValueError("scales must lie in (0, 0.1]")
    vals = np.abs(phi3(params, j, s * d[0], s * d[1], s * d[2]))
    if np.all(vals < 1e-14):
        raise RankDeficientFit("phase below 1e-14 at every scale")
    keep = vals >= 1e-14
    if np.count_nonzero(keep) < 2:
        raise RankDeficientFit("fewer than two usable scales")
    slope, _ = np.polyfit(np.log(s[keep]), np.log(vals[keep]), 1)
    return float(slope)


def geometric_ladder(start: float = 1e-1, stop: float = 1e-3, num: int = 9) -> np.ndarray:
    return np.geomspace(start, stop, num)
