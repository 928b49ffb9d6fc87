import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgpwnn.mesh import build_uniform_mesh
from dgpwnn.problems import (
    InvalidBenchmarkError,
    error_norms,
    manufactured_maxwell_plane_wave,
    manufactured_plane_wave,
    maxwell_dipole,
    point_source_3d,
    waveguide_coefficients,
    waveguide_exact_2d,
)


def fd_laplacian(f, x, h):
    lap = 0
    for i in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[i] = h
        lap = lap + (f(x + e) - 2 * f(x) + f(x - e)) / h**2
    return lap


def fd_curl(F, x, h=1e-5):
    J = np.zeros((len(x), 3, 3), dtype=complex)  # J[:, i, j] = dF_i / dx_j
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[:, :, j] = (F(x + e) - F(x - e)) / (2 * h)
    return np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=1)


def test_waveguide_coefficients():
    wx, A, M = waveguide_coefficients(2 * np.pi, 1)
    assert wx == pytest.approx(np.pi * np.sqrt(3))
    assert np.linalg.norm(M @ A - np.array([-1j, 0])) < 1e-12
    p = waveguide_exact_2d(2 * np.pi)
    assert p.params["k"] == pytest.approx(1.0)


def test_waveguide_pde_and_gradient():
    rng = np.random.default_rng(0)
    p = waveguide_exact_2d(4 * np.pi)
    x = rng.uniform(0.05, 0.95, (100, 2))
    u = p.value(x)
    res = -fd_laplacian(p.value, x, 1e-4) - p.omega**2 * u
    assert np.max(np.abs(res)) < 1e-4 * p.omega**2 * np.max(np.abs(u))
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1e-6
        fd = (p.value(x + e) - p.value(x - e)) / 2e-6
        np.testing.assert_allclose(p.deriv(x)[:, i], fd, atol=1e-6 * np.max(np.abs(fd)))


def test_waveguide_evanescent_rejected():
    with pytest.raises(InvalidBenchmarkError):
        waveguide_exact_2d(np.pi, k=1)


def test_point_source_value_and_decay():
    p = point_source_3d(np.pi)
    r = np.sqrt(3)
    assert p.value(np.zeros((1, 3)))[0] == pytest.approx(np.exp(1j * np.pi * r) / (4 * np.pi * r), rel=1e-14)
    t = np.linspace(0, 1, 20)[:, None] * np.ones(3)
    assert np.all(np.diff(np.abs(p.value(t))) < 0)


def test_point_source_pde_residual():
    rng = np.random.default_rng(1)
    p = point_source_3d(np.pi)
    x = rng.uniform(0.1, 0.9, (50, 3))
    res = -fd_laplacian(p.value, x, 1e-4) - p.omega**2 * p.value(x)
    assert np.max(np.abs(res)) < 1e-5 * p.omega**2 * np.max(np.abs(p.value(x)))


@pytest.mark.parametrize("r0", [(0.5, 0.5, 0.5), (1.0, 0.0, 0.5)])
def test_point_source_inside_rejected(r0):
    with pytest.raises(InvalidBenchmarkError):
        point_source_3d(np.pi, r0=r0)


def test_dipole_rejected_inside():
    with pytest.raises(InvalidBenchmarkError):
        maxwell_dipole(np.pi, x0=(0.5, 0.0, 0.0))


def test_dipole_phi_magnitude():
    p = maxwell_dipole(np.pi, epsilon=1.0)
    k = p.params["kappa"]
    r = 0.6 * np.sqrt(3)
    phi = np.exp(1j * k * r) / (4 * np.pi * r)
    assert abs(phi) == pytest.approx(1 / (4 * np.pi * 0.6 * np.sqrt(3)))
    # with a real wavenumber, E at the origin is fixed by phi and its radial derivatives
    E = p.value(np.zeros((1, 3)))[0]
    assert np.all(np.isfinite(E))


def test_dipole_hessian_term_against_fd():
    # E = -i w mu I phi a + (I/(i w eps)) H(phi) a; recover H(phi) a from E and compare with FD of grad phi . a
    omega, eps = np.pi, 1 + 1j
    p = maxwell_dipole(omega, epsilon=eps)
    k, x0, a = p.params["kappa"], p.params["x0"], p.params["a"]

    def phi(x):
        r = np.linalg.norm(np.atleast_2d(x) - x0, axis=1)
        return np.exp(1j * k * r) / (4 * np.pi * r)

    x = np.zeros((1, 3))
    Ha = (p.value(x)[0] + 1j * omega * phi(x)[0] * a) * (1j * omega * eps)
    h = 1e-4
    fd = np.zeros(3, dtype=complex)
    for i in range(3):
        for s in (1, -1):
            e = np.zeros(3)
            e[i] = s * h
            # d/dx_i (grad phi . a) by nested central differences
            grad_a = (phi(x + e + h * a) - phi(x + e - h * a)) / (2 * h)
            fd[i] += s * grad_a[0] / (2 * h)
    assert np.linalg.norm(Ha - fd) < 1e-6 * np.linalg.norm(fd)


@pytest.mark.parametrize("mu", [1.0, 2.0])
def test_dipole_maxwell_residual(mu):
    rng = np.random.default_rng(2)
    omega, eps = np.pi, 1 + 1j
    p = maxwell_dipole(omega, epsilon=eps, mu=mu)
    x = rng.uniform(-0.4, 0.4, (20, 3))
    np.testing.assert_allclose(p.deriv(x), fd_curl(p.value, x), rtol=1e-6, atol=1e-7 * np.max(np.abs(p.deriv(x))))
    H = lambda y: p.deriv(y) / (1j * omega * mu)  # noqa: E731
    res = fd_curl(H, x) + 1j * omega * eps * p.value(x)
    assert np.max(np.abs(res)) < 1e-5 * omega * abs(eps) * np.max(np.abs(p.value(x)))


def test_maxwell_plane_wave_residual():
    rng = np.random.default_rng(3)
    p = manufactured_maxwell_plane_wave(np.pi, (1.0, 2.0, 2.0), "high", epsilon=1 + 1j)
    x = rng.uniform(0, 1, (10, 3))
    np.testing.assert_allclose(p.deriv(x), fd_curl(p.value, x), rtol=1e-7, atol=1e-8)
    res = fd_curl(lambda y: p.deriv(y) / (1j * np.pi), x) + 1j * np.pi * (1 + 1j) * p.value(x)
    assert np.max(np.abs(res)) < 1e-5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 5), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_boundary_datum_is_impedance_trace(face, s, t):
    p = maxwell_dipole(np.pi)
    axis, side = divmod(face, 2)
    x = np.zeros(3)
    x[axis] = 0.5 if side else -0.5
    others = [i for i in range(3) if i != axis]
    x[others] = s - 0.5, t - 0.5
    n = np.zeros(3)
    n[axis] = 1.0 if side else -1.0
    E, C = p.value(x[None]), p.deriv(x[None])
    ref = -np.cross(E, n) + (1 / (1j * np.pi)) * np.cross(np.cross(C, n), n)
    np.testing.assert_allclose(p.g(x[None], n), ref, rtol=1e-10, atol=1e-12)
    h = point_source_3d(np.pi)
    y = x + 0.5
    assert h.g(y[None], n)[0] == pytest.approx(h.deriv(y[None])[0] @ n + 1j * np.pi * h.value(y[None])[0])


def test_error_norms_of_zero_and_exact():
    mesh = build_uniform_mesh([0, 0], [1, 1], 2)
    p = manufactured_plane_wave(np.pi, (1.0, 0.0), amplitude=2.0)
    f = p.forms(mesh)
    l2, en = error_norms(None, p, mesh, f)
    assert l2 == pytest.approx(2.0, rel=1e-12)  # |u| = 2 on a unit square
    assert en == pytest.approx(f.energy_norm(p.exact))
    l2, en = error_norms([(1.0, p.exact)], p, mesh, f)
    assert l2 < 1e-14 and en < 1e-14
