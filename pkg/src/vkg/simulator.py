"""Dealiased pseudo-spectral integration of ``U_t = Lambda U + N(U)``.

The linear flow is applied exactly per mode through :func:`spectral_core.propagator`;
the nonlinearity ``(1 + k^2)^{-1} (kappa u^2 + beta u^3) e2`` is evaluated in
physical space on a grid padded by a factor of two, which makes the discrete
products exact convolutions through cubic order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional

import numpy as np

from .errors import BadInitialData, InsufficientWindow, Overflow, ValidationError
from .grid import GridSpec, SpectralField
from .spectral_core import (
    DEFAULT_MARGIN,
    ModeFilter,
    SystemParams,
    collision_threshold,
    decay_scan,
    default_cutoff,
    propagator,
    split_modes,
    to_diffusive,
)

log = logging.getLogger(__name__)

BLOWUP_SENTINEL = 1e6
MAX_DT = 0.1


@dataclass
class RunConfig:
    params: SystemParams = field(default_factory=SystemParams)
    grid: GridSpec = field(default_factory=lambda: GridSpec(200.0, 4096))
    dt: float = 0.01
    t_end: float = 500.0
    epsilon: float = 0.05
    ic_kind: str = "gaussian"
    ic_width: float = 1.0
    seed: int = 0
    stride: int = 10
    k0: Optional[float] = None
    out_dir: str = "."

    def __post_init__(self):
        if not (math.isfinite(self.dt) and 0 < self.dt <= MAX_DT):
            raise ValidationError("dt", f"need 0 < dt <= {MAX_DT}, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end >= self.dt):
            raise ValidationError("t_end", f"need t_end >= dt, got {self.t_end}")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValidationError("epsilon", f"need epsilon >= 0, got {self.epsilon}")
        if not (math.isfinite(self.ic_width) and self.ic_width > 0):
            raise ValidationError("ic_width", "must be positive")
        if not (self.ic_kind == "gaussian" or self.ic_kind.startswith("custom:")):
            raise ValidationError("ic_kind", f"expected 'gaussian' or 'custom:<path>', got {self.ic_kind!r}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValidationError("stride", "must be a positive integer")
        k1 = collision_threshold(self.params)
        if self.grid.nyquist < 4 * k1:
            raise ValidationError(
                "n_modes", f"Nyquist frequency {self.grid.nyquist:.4g} below 4 k1 = {4 * k1:.4g}"
            )
        if self.k0 is not None and not (0 < self.k0 < k1 - DEFAULT_MARGIN):
            raise ValidationError("k0", f"need 0 < k0 < k1 = {k1:.6g}")

    @property
    def cutoff(self) -> float:
        return default_cutoff(self.params) if self.k0 is None else float(self.k0)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def replace(self, **changes) -> "RunConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RunConfig(**values)


def field_from_data(grid: GridSpec, params: SystemParams, u0, w0) -> SpectralField:
    """Spectral state ``(u^, v^)`` from physical samples of ``u`` and ``u_t`` on ``grid.x``."""
    u0 = np.asarray(u0, dtype=float)
    w0 = np.asarray(w0, dtype=float)
    if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(w0))):
        raise BadInitialData("initial data contains non-finite values")
    u_hat = grid.forward(u0)
    w_hat = grid.forward(w0)
    v_hat = to_diffusive(u_hat, w_hat, params, grid.k)
    return SpectralField(grid, np.stack([u_hat, v_hat], axis=1))


def _read_profile(path: str):
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise BadInitialData(f"cannot read initial data from {path}: {exc}") from exc
    if data.shape[1] not in (2, 3):
        raise BadInitialData("custom initial data needs columns x,u0[,w0]")
    if not np.all(np.isfinite(data)):
        raise BadInitialData("custom initial data contains non-finite values")
    order = np.argsort(data[:, 0])
    data = data[order]
    w = data[:, 2] if data.shape[1] == 3 else np.zeros(len(data))
    return data[:, 0], data[:, 1], w


def init_field(config: RunConfig) -> SpectralField:
    """Initial state of size ``epsilon``.

    ``gaussian``: ``u0 = eps exp(-x^2 / sigma^2)``, ``w0 = 0``.
    ``custom:<path>``: CSV with columns ``x,u0[,w0]`` interpolated onto the grid
    (zero outside the sampled range) and scaled by ``eps``.
    """
    grid = config.grid
    x = grid.x
    if config.ic_kind == "gaussian":
        u0 = config.epsilon * np.exp(-((x / config.ic_width) ** 2))
        w0 = np.zeros_like(x)
    else:
        xs, us, ws = _read_profile(config.ic_kind.split(":", 1)[1])
        u0 = config.epsilon * np.interp(x, xs, us, left=0.0, right=0.0)
        w0 = config.epsilon * np.interp(x, xs, ws, left=0.0, right=0.0)
    return field_from_data(grid, config.params, u0, w0)


def _nonlinear_values(values: np.ndarray, grid: GridSpec, params: SystemParams) -> np.ndarray:
    n = grid.n_modes
    m = 2 * n
    half = n // 2
    spec = np.zeros(m // 2 + 1, dtype=complex)
    spec[:half] = values[:half, 0]
    u = np.fft.irfft(spec, n=m) * (m * grid.dk)
    nl = u * u * params.kappa
    if params.beta:
        nl += params.beta * u * u * u
    g = np.fft.rfft(nl) * (2.0 * grid.half_length / m / (2.0 * np.pi))
    out = np.zeros((n, 2), dtype=complex)
    col = out[:, 1]
    col[:half] = g[:half]
    col[half + 1:] = np.conj(g[1:half][::-1])
    k = grid.k
    col /= 1.0 + k * k
    return out


def rhs_nonlinear(state: SpectralField, params: SystemParams) -> SpectralField:
    """``F[(1 - dx^2)^{-1} (kappa u^2 + beta u^3)] e2`` for a conjugate-symmetric state.

    The Nyquist mode is dropped; zero padding by a factor of two makes the
    quadratic and cubic products alias-free.
    """
    return SpectralField(state.grid, _nonlinear_values(state.values, state.grid, params))


class Stepper:
    """Exponential (Lawson) midpoint rule with the exact per-mode linear flow.

    ``U* = E(h/2) (U + h/2 N(U))``, ``U+ = E(h) U + h E(h/2) N(U*)``. The scheme
    is second order and reproduces the linear flow exactly when ``N = 0``.
    """

    def __init__(self, grid: GridSpec, params: SystemParams, dt: float):
        if not 0 < dt <= MAX_DT:
            raise ValueError(f"dt must lie in (0, {MAX_DT}]")
        self.grid = grid
        self.params = params
        self.dt = dt
        k = grid.k
        self.full = propagator(params, k, dt)
        self.half = propagator(params, k, 0.5 * dt)
        self.linear = params.kappa == 0 and params.beta == 0

    def __call__(self, values: np.ndarray, t: float = 0.0) -> np.ndarray:
        h = self.dt
        full, half = self.full, self.half
        if self.linear:
            new = np.einsum("nij,nj->ni", full, values)
        else:
            n0 = _nonlinear_values(values, self.grid, self.params)
            mid = np.einsum("nij,nj->ni", half, values + 0.5 * h * n0)
            n1 = _nonlinear_values(mid, self.grid, self.params)
            new = np.einsum("nij,nj->ni", full, values) + h * np.einsum("nij,nj->ni", half, n1)
        peak = float(np.max(np.abs(new)))
        if not peak <= BLOWUP_SENTINEL:
            raise Overflow(t + h, peak)
        return new


def step(state: SpectralField, dt: float, params: SystemParams, t: float = 0.0) -> SpectralField:
    """Advance ``state`` by one step of length ``dt`` (builds a :class:`Stepper`)."""
    return SpectralField(state.grid, Stepper(state.grid, params, dt)(state.values, t))


@dataclass(frozen=True)
class NormRecord:
    t: float
    uc_l1hat: float
    uc_linfhat: float
    us_l1hat: float
    us_linfhat: float
    u_linf_proxy: float
    eta: float

    COLUMNS = ("t", "uc_l1hat", "uc_linfhat", "us_l1hat", "us_linfhat", "u_linf_proxy", "eta")

    def as_tuple(self):
        return tuple(getattr(self, c) for c in self.COLUMNS)


def eta_template(t, uc_l1, uc_linf, us_l1, us_linf):
    s = math.sqrt(1.0 + t)
    return uc_linf + s * uc_l1 + s * us_linf + (1.0 + t) * us_l1


def norm_record(state: SpectralField, filt: ModeFilter, t: float, eta_prev: float = 0.0) -> NormRecord:
    """Discrete hat-norms of the critical/stable split; ``eta`` is a running supremum."""
    dk = state.grid.dk
    uc, us = split_modes(state, filt)
    a_c = uc.pointwise_norm()
    a_s = us.pointwise_norm()
    rec = dict(
        uc_l1hat=dk * float(np.sum(a_c)),
        uc_linfhat=float(np.max(a_c)),
        us_l1hat=dk * float(np.sum(a_s)),
        us_linfhat=float(np.max(a_s)),
        u_linf_proxy=dk * float(np.sum(state.pointwise_norm())),
    )
    eta = eta_template(t, rec["uc_l1hat"], rec["uc_linfhat"], rec["us_l1hat"], rec["us_linfhat"])
    return NormRecord(t=float(t), eta=max(eta_prev, eta), **rec)


def boundary_fraction(state: SpectralField, fraction: float = 0.1) -> float:
    """Share of ``int |u|^2`` carried by the outer ``fraction`` of the periodic box."""
    u = state.grid.inverse(state.values[:, 0]).real
    energy = u * u
    total = float(np.sum(energy))
    if total == 0.0:
        return 0.0
    outer = np.abs(state.grid.x) >= (1.0 - fraction) * state.grid.half_length
    return float(np.sum(energy[outer])) / total


def validate_cutoff(params: SystemParams, k0: float, t_max: float = 50.0):
    """Certify a positive semigroup decay rate off the critical band for ``k0``."""
    k_hi = max(10.0, 2.5 * collision_threshold(params))
    return decay_scan(params, k0, np.linspace(0.5 * k0, k_hi, 300), np.linspace(0.0, t_max, 201))


@dataclass
class RunResult:
    config: RunConfig
    records: list
    final: SpectralField
    blowup_time: Optional[float] = None
    stopped_early: bool = False
    boundary_fraction: float = 0.0
    snapshots: list = field(default_factory=list)


def run(
    config: RunConfig,
    initial: Optional[SpectralField] = None,
    snapshot_every: Optional[int] = None,
    stop: Optional[Callable[[NormRecord], bool]] = None,
    validate: bool = True,
) -> RunResult:
    """Integrate from ``t = 0`` to ``t_end``, recording norms every ``stride`` steps.

    ``snapshot_every`` (in steps) stores ``(t, values)`` copies; ``stop`` may end
    the run after any record. An :class:`Overflow` ends the run gracefully with
    ``blowup_time`` set.
    """
    filt = ModeFilter(config.cutoff)
    if validate:
        validate_cutoff(config.params, filt.k0)
    state = init_field(config) if initial is None else initial.copy()
    stepper = Stepper(config.grid, config.params, config.dt)
    values = state.values
    rec = norm_record(state, filt, 0.0)
    result = RunResult(config=config, records=[rec], final=state)
    result.boundary_fraction = boundary_fraction(state)
    if snapshot_every:
        result.snapshots.append((0.0, values.copy()))
    t = 0.0
    for n in range(1, config.n_steps + 1):
        try:
            values = stepper(values, t)
        except Overflow as exc:
            log.warning("%s", exc)
            result.blowup_time = exc.t
            break
        t = n * config.dt
        if snapshot_every and n % snapshot_every == 0:
            result.snapshots.append((t, values.copy()))
        if n % config.stride == 0 or n == config.n_steps:
            current = SpectralField(config.grid, values)
            rec = norm_record(current, filt, t, rec.eta)
            result.records.append(rec)
            result.boundary_fraction = max(result.boundary_fraction, boundary_fraction(current))
            if stop is not None and stop(rec):
                result.stopped_early = True
                break
    result.final = SpectralField(config.grid, values)
    if result.boundary_fraction > 1e-6:
        log.warning("boundary energy fraction %.3e exceeds 1e-6; enlarge L", result.boundary_fraction)
    return result


def decay_fit(records, t_min: float, t_max: float) -> float:
    """Slope of ``log u_linf_proxy`` against ``log(1 + t)`` on ``[t_min, t_max]``."""
    if not (t_min > 0 and t_max / t_min >= 10):
        raise InsufficientWindow(f"window [{t_min}, {t_max}] spans less than a decade")
    t = np.array([r.t for r in records])
    y = np.array([r.u_linf_proxy for r in records])
    sel = (t >= t_min) & (t <= t_max)
    if np.count_nonzero(sel) < 3:
        raise InsufficientWindow("fewer than three records inside the window")
    if t[sel].max() / t[sel].min() < 10 - 1e-9:
        raise InsufficientWindow("records inside the window span less than a decade")
    if np.any(y[sel] <= 0):
        raise InsufficientWindow("non-positive norms inside the window")
    slope, _ = np.polyfit(np.log1p(t[sel]), np.log(y[sel]), 1)
    return float(slope)
