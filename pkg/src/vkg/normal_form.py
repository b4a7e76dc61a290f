"""Normal-form kernels from integrating the quadratic Duhamel term by parts in time.

Field arguments are 2-vectors (numpy arrays with a trailing axis of length 2)
already evaluated at the frequency the kernel reads them at:

* ``n2_kernel(k, l)`` reads ``U1(k - l)`` and ``V1(l)``,
* ``q2_kernel(k, l)`` reads ``U(k - l)`` and ``V(l)``,
* ``n3_kernel`` / ``q3_kernel(k, l1, l2)`` read ``U(k - l1)``, ``V(l1 - l2)``, ``W(l2)``.

The coefficient table at the origin is kept exact: every entry is a rational
multiple of ``1/(2i)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import OutOfSupport
from .resonance import SIGN_TUPLES_2, format_signs, phi2, resonant_set
from .spectral_core import DEFAULT_MARGIN, SystemParams, default_cutoff, projections

E2 = np.array([0.0, 1.0], dtype=complex)
RHO_PLUS = np.array([1.0, 1.0j])
RHO_MINUS = np.array([1.0, -1.0j])
RHO_STAR_PLUS = 0.5 * np.array([1.0, -1.0j])
RHO_STAR_MINUS = 0.5 * np.array([1.0, 1.0j])


def rho(sign) -> np.ndarray:
    """Eigenvector of the symbol at ``k = 0`` for ``lambda_sign(0) = sign * i``."""
    return RHO_PLUS if sign > 0 else RHO_MINUS


def rho_star(sign) -> np.ndarray:
    """Dual of :func:`rho` under the bilinear pairing."""
    return RHO_STAR_PLUS if sign > 0 else RHO_STAR_MINUS


def pairing(u, v):
    """Bilinear (not sesquilinear) pairing ``u1 v1 + u2 v2``."""
    u = np.asarray(u)
    v = np.asarray(v)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1]


def _on_e2(scalar):
    scalar = np.asarray(scalar, dtype=complex)
    out = np.zeros(scalar.shape + (2,), dtype=complex)
    out[..., 1] = scalar
    return out


def n2_kernel(params: SystemParams, k, l, u1, v1):
    """``kappa / (1 + k^2) * U1(k - l) * V1(l) * e2``."""
    k = np.asarray(k, dtype=float)
    return _on_e2(params.kappa / (1.0 + k * k) * np.asarray(u1) * np.asarray(v1))


def n3_kernel(params: SystemParams, k, l1, l2, u1, v1, w1):
    """``beta / (1 + k^2) * U1(k - l1) * V1(l1 - l2) * W1(l2) * e2``."""
    k = np.asarray(k, dtype=float)
    return _on_e2(params.beta / (1.0 + k * k) * np.asarray(u1) * np.asarray(v1) * np.asarray(w1))


def _apply(p, vec):
    return np.einsum("...ij,...j->...i", p, vec)


def _check_support(k0, **freqs):
    for name, value in freqs.items():
        if np.any(np.abs(value) > k0 * (1 + 1e-12)):
            raise OutOfSupport(f"{name} outside [-k0, k0] with k0 = {k0:.6g}")


def _q2_sum(params, k, l, u, v, margin):
    """Sum over j of ``P_j0(k) / phi2_j(k, l) * N2(k, l)(P_j1 U, P_j2 V)``."""
    pk = projections(params, k, margin)
    pkl = projections(params, k - l, margin)
    pl = projections(params, l, margin)
    # first components of the projected inputs, per sign
    a = {1: _apply(pkl.p_plus, u)[..., 0], -1: _apply(pkl.p_minus, u)[..., 0]}
    b = {1: _apply(pl.p_plus, v)[..., 0], -1: _apply(pl.p_minus, v)[..., 0]}
    out_col = {1: pk.p_plus[..., :, 1], -1: pk.p_minus[..., :, 1]}
    pref = params.kappa / (1.0 + k * k)
    total = 0
    for j in SIGN_TUPLES_2:
        j0, j1, j2 = j
        weight = pref * a[j1] * b[j2] / phi2(params, j, k, l, margin)
        total = total + out_col[j0] * weight[..., None]
    return np.broadcast_to(total, np.broadcast_shapes(np.shape(k), np.shape(l)) + (2,)).astype(complex)


def q2_kernel(params: SystemParams, k, l, u, v, k0=None, margin: float = DEFAULT_MARGIN):
    """Transformed quadratic kernel; finite thanks to the quadratic phase floor.

    Raises
    ------
    OutOfSupport
        If ``|k|``, ``|l|`` or ``|k - l|`` exceeds ``k0`` (default ``k1 / 2``).
    """
    k0 = default_cutoff(params) if k0 is None else k0
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    _check_support(k0, k=k, l=l, k_minus_l=k - l)
    return _q2_sum(params, k, l, np.asarray(u, dtype=complex), np.asarray(v, dtype=complex), margin)


def q3_kernel(params: SystemParams, k, l1, l2, u, v, w, k0=None, margin: float = DEFAULT_MARGIN):
    """Cubic kernel produced by the time derivative of the quadratic boundary term.

    Two summands: the inner quadratic interaction feeds the first slot at
    ``k - l2`` or the second slot at ``l1``.
    """
    k0 = default_cutoff(params) if k0 is None else k0
    k = np.asarray(k, dtype=float)
    l1 = np.asarray(l1, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    _check_support(k0, k=k, l1=l1, l2=l2, k_minus_l1=k - l1, l1_minus_l2=l1 - l2)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    inner_a = n2_kernel(params, k - l2, l1 - l2, u[..., 0], v[..., 0])
    inner_b = n2_kernel(params, l1, l2, v[..., 0], w[..., 0])
    return _q2_sum(params, k, l2, inner_a, w, margin) + _q2_sum(params, k, l1, u, inner_b, margin)


def contract_at_origin(params: SystemParams, j):
    """``(<N3(0,0,0)(rho_j1, rho_j2, rho_j3), rho*_j0>, <Q3(0,0,0)(...), rho*_j0>)``
    evaluated through the kernels."""
    j0, j1, j2, j3 = j
    args = (rho(j1), rho(j2), rho(j3))
    n3 = n3_kernel(params, 0.0, 0.0, 0.0, *(a[0] for a in args))
    q3 = q3_kernel(params, 0.0, 0.0, 0.0, *args)
    dual = rho_star(j0)
    return complex(pairing(n3, dual)), complex(pairing(q3, dual))


def _origin_phase(j0, j1, j2) -> int:
    """``phi2_j(0, 0) / i``; never zero."""
    return j0 - j1 - j2


@dataclass(frozen=True)
class CubicCoefficientTable:
    """Resonant cubic coefficients at the origin.

    ``n3(j) = beta * n3_unit[j] / (2i)`` and ``q3(j) = kappa^2 * q3_unit[j] / (2i)``
    with exact rational units.
    """

    kappa: float
    beta: float
    n3_unit: dict
    q3_unit: dict

    @property
    def tuples(self) -> list:
        return list(self.n3_unit)

    def n3(self, j) -> complex:
        return self.beta * float(self.n3_unit[tuple(j)]) / 2j

    def q3(self, j) -> complex:
        return self.kappa ** 2 * float(self.q3_unit[tuple(j)]) / 2j

    def rows(self):
        """``(label, n3, q3)`` for every tuple in the table."""
        return [(format_signs(j), self.n3(j), self.q3(j)) for j in self.tuples]


def cubic_coefficients_at_origin(params: SystemParams) -> CubicCoefficientTable:
    # 1/(2i) * 1/(m i) = -1/(2m), so each 1/phi2 contribution is a real rational
    n3_unit, q3_unit = {}, {}
    for j in resonant_set():
        j0, j1, _, j3 = j
        total = Fraction(0)
        for h in (1, -1):
            inv = Fraction(1, _origin_phase(j0, h, j3)) + Fraction(1, _origin_phase(j0, j1, h))
            total += h * Fraction(-1, 2) * inv
        n3_unit[j] = Fraction(j0)
        q3_unit[j] = j0 * total
    return CubicCoefficientTable(params.kappa, params.beta, n3_unit, q3_unit)


def _rank(rows) -> int:
    m = [list(r) for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        pivot = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(rank + 1, len(m)):
            f = m[i][col] / m[rank][col]
            m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


@dataclass(frozen=True)
class CancellationReport:
    tuples: list
    matrix: list  # rows [n3_unit, q3_unit] in unknowns (beta, kappa^2)
    rank: int
    determinant: Fraction  # of the rows (+,-,+,+) and (+,+,-,+)
    only_trivial: bool

    def summary(self) -> str:
        verdict = "no cancellation except kappa = beta = 0" if self.only_trivial else "nontrivial cancellation exists"
        return f"rank={self.rank} det={self.determinant} ({float(self.determinant):.12g}): {verdict}"


def cancellation_verdict(table: CubicCoefficientTable) -> CancellationReport:
    """Solve ``n3(j) + q3(j) = 0`` over the resonant set for ``(beta, kappa^2)``."""
    tuples = table.tuples
    matrix = [[table.n3_unit[j], table.q3_unit[j]] for j in tuples]
    a = table.n3_unit[(1, -1, 1, 1)], table.q3_unit[(1, -1, 1, 1)]
    b = table.n3_unit[(1, 1, -1, 1)], table.q3_unit[(1, 1, -1, 1)]
    det = a[0] * b[1] - a[1] * b[0]
    rank = _rank(matrix)
    return CancellationReport(tuples, matrix, rank, det, rank == 2)


def cancellation_residuals(table: CubicCoefficientTable, kappa: float, beta: float) -> dict:
    """``n3(j) + q3(j)`` for the given coefficients, per resonant tuple."""
    return {
        j: (beta * float(table.n3_unit[j]) + kappa ** 2 * float(table.q3_unit[j])) / 2j
        for j in table.tuples
    }
