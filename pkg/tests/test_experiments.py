import numpy as np
import pytest

from vkg.experiments import (
    LIFESPAN_NOTE,
    Q2Operator,
    bandlimited_data,
    ibp_cutoff,
    ibp_terms,
    lifespan_probe,
    n2_convolution,
    simpson_weights,
    thread_count,
)
from vkg.grid import GridSpec
from vkg.normal_form import n2_kernel, q2_kernel, q3_kernel
from vkg.simulator import RunConfig
from vkg.spectral_core import SystemParams, collision_threshold

P = SystemParams()
GRID = GridSpec(20.0, 128)
DK = GRID.dk
C = 5  # critical window -C..C, so 2 C dk stays below the collision


def _rand(rng, n):
    return rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))


def test_q2_operator_matches_kernel_sum():
    rng = np.random.default_rng(0)
    u = _rand(rng, 4 * C + 1)  # on -2C..2C
    v = _rand(rng, 2 * C + 1)  # on -C..C
    op = Q2Operator(P, DK, (-C, C), (-2 * C, 2 * C), (-C, C))
    got = op(u, v)
    big = 3 * C * DK
    want = np.zeros((2 * C + 1, 2), dtype=complex)
    for n in range(-C, C + 1):
        for m in range(-C, C + 1):
            if abs(n - m) <= 2 * C:
                want[n + C] += DK * q2_kernel(P, n * DK, m * DK, u[n - m + 2 * C], v[m + C], k0=big)
    assert np.allclose(got, want, atol=1e-13)


def test_n2_convolution_matches_kernel_sum():
    rng = np.random.default_rng(1)
    u = _rand(rng, 2 * C + 1)
    got = n2_convolution(P, DK, u, (-C, C), u, (-C, C))
    want = np.zeros((4 * C + 1, 2), dtype=complex)
    for n in range(-2 * C, 2 * C + 1):
        for m in range(-C, C + 1):
            if abs(n - m) <= C:
                want[n + 2 * C] += DK * n2_kernel(P, n * DK, m * DK, u[n - m + C, 0], u[m + C, 0])
    assert np.allclose(got, want, atol=1e-13)


def test_integrated_cubic_term_matches_q3_kernel():
    """The convolution form Q2(N2(U, U), U) + Q2(U, N2(U, U)) equals the double
    frequency integral of the cubic kernel."""
    rng = np.random.default_rng(2)
    u = _rand(rng, 2 * C + 1)
    n2u = n2_convolution(P, DK, u, (-C, C), u, (-C, C))
    fast = Q2Operator(P, DK, (-C, C), (-2 * C, 2 * C), (-C, C))(n2u, u)
    fast = fast + Q2Operator(P, DK, (-C, C), (-C, C), (-2 * C, 2 * C))(u, n2u)

    n, m1, m2 = np.meshgrid(*[np.arange(-2 * C, 2 * C + 1)] * 3, indexing="ij")
    ok = (np.abs(n) <= C) & (np.abs(n - m1) <= C) & (np.abs(m1 - m2) <= C) & (np.abs(m2) <= C)
    n, m1, m2 = n[ok], m1[ok], m2[ok]
    terms = q3_kernel(
        P, n * DK, m1 * DK, m2 * DK, u[n - m1 + C], u[m1 - m2 + C], u[m2 + C], k0=2 * C * DK + 1e-9
    )
    brute = np.zeros((2 * C + 1, 2), dtype=complex)
    np.add.at(brute, n + C, DK * DK * terms)
    assert np.allclose(fast, brute, atol=1e-12)


def test_simpson_weights():
    x = np.linspace(0, 2, 9)
    w = simpson_weights(9, x[1] - x[0])
    assert w @ x ** 3 == pytest.approx(4.0, rel=1e-14)
    with pytest.raises(ValueError):
        simpson_weights(8, 0.1)


def test_bandlimited_data():
    tpl = RunConfig(params=P, grid=GridSpec(100.0, 1024), dt=0.01, t_end=1.0)
    f = bandlimited_data(tpl, 0.02, 0.25)
    u = tpl.grid.inverse(f.values[:, 0])
    assert np.max(np.abs(u.real)) == pytest.approx(0.02, rel=1e-12)
    assert np.max(np.abs(u.imag)) < 1e-15
    assert np.all(f.values[np.abs(tpl.grid.k) >= 0.25] == 0)


def test_ibp_cutoff_keeps_interactions_below_collision():
    k0 = ibp_cutoff(P)
    assert 2 * k0 < collision_threshold(P)
    assert ibp_cutoff(P, 0.3) == 0.3


def _short_template(params):
    return RunConfig(params=params, grid=GridSpec(100.0, 1024), dt=1e-3, t_end=1.0, stride=100)


def test_ibp_without_quadratic_term_is_trivial():
    terms = ibp_terms(_short_template(SystemParams(kappa=0.0)), 0.02, ibp_cutoff(P))
    assert terms.lhs == terms.boundary == terms.cubic == terms.residual == 0.0


def test_ibp_residual_is_higher_order():
    terms = ibp_terms(_short_template(P), 0.02, ibp_cutoff(P))
    assert terms.lhs > 0 and terms.boundary > 0
    assert terms.residual < 1e-2 * terms.lhs
    with pytest.raises(ValueError):
        ibp_terms(_short_template(P), 0.02, ibp_cutoff(P), snapshot_every=7)


def test_lifespan_probe_orders_and_notes():
    tpl = RunConfig(params=P, grid=GridSpec(40.0, 256), dt=0.01, t_end=10.0, stride=10)
    table = lifespan_probe(tpl, [4.0, 0.0, 2.0, 1.0], budget=10.0)
    eps = [e for e, _ in table.rows]
    assert eps == sorted(eps)
    assert dict(table.rows)[0.0] == 10.0
    assert table.is_monotone()
    assert dict(table.rows)[4.0] < dict(table.rows)[1.0]
    assert table.note == LIFESPAN_NOTE and "not verifiable" in table.note
    with pytest.raises(ValueError):
        lifespan_probe(tpl, [0.1], budget=float("inf"))


def test_thread_count(monkeypatch):
    monkeypatch.setenv("VKG_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("VKG_THREADS", "0")
    assert thread_count() >= 1
    assert thread_count(2) == 2
