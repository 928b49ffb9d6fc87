import numpy as np
import pytest

from conftest import random_expansion, same_directions
from dgpwnn.maxwell_forms import (
    MaxwellForms,
    MaxwellParams,
    a_form_maxwell,
    eta_maxwell,
    impedance_trace,
    l_form_maxwell,
    residual_maxwell,
    tangential_jump,
)
from dgpwnn.mesh import build_uniform_mesh
from dgpwnn.planewave import DirectionSet, PWExpansion, direction_vector, eval_maxwell_wave, polarization_frame
from dgpwnn.problems import manufactured_maxwell_plane_wave


def cube(div=1):
    return build_uniform_mesh([0, 0, 0], [1, 1, 1], div)


def test_tangential_jump():
    rng = np.random.default_rng(0)
    E = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    n = np.array([0.0, 0.0, 1.0])
    np.testing.assert_allclose(tangential_jump(E, E, n, -n), 0)
    np.testing.assert_allclose(tangential_jump(E, np.zeros(3), n, -n), np.cross(E, n))
    F = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    np.testing.assert_allclose(tangential_jump(E, F, n, -n), tangential_jump(F, E, -n, n))


@pytest.mark.parametrize("seed", range(4))
def test_hermitian_psd_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    f = MaxwellForms(cube(), MaxwellParams(np.pi, epsilon=1 + 1j, rho1=2.0, rho2=0.5))
    u, v = random_expansion(f, 2, rng), random_expansion(f, 3, rng)
    auv = f.a(u, v)
    assert abs(auv - np.conj(f.a(v, u))) <= 1e-12 * abs(auv)
    avv = f.a(v, v)
    assert avv.real > 0 and abs(avv.imag) < 1e-12 * abs(avv)
    assert abs(auv) <= f.energy_norm(u) * f.energy_norm(v) * (1 + 1e-10)
    z = same_directions(v, np.zeros_like(v.coeffs))
    assert f.a(z, z) == 0


def _oracle_boundary_energy(mu, kappa, omega, sigma, W, branch, order):
    """Independent tensor-Gauss integral of |impedance trace|^2 over the unit cube boundary."""
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = 0.5 * (x + 1), 0.5 * w
    frame = polarization_frame(W)
    total = 0.0
    for axis in range(3):
        for side in (0.0, 1.0):
            n = np.zeros(3)
            n[axis] = 1.0 if side else -1.0
            others = [a for a in range(3) if a != axis]
            for i in range(order):
                for j in range(order):
                    p = np.zeros(3)
                    p[axis], p[others[0]], p[others[1]] = side, x[i], x[j]
                    E, curl = eval_maxwell_wave(mu, kappa, frame, branch, p)
                    t = -np.cross(E, n) + sigma / (1j * omega * mu) * np.cross(np.cross(curl, n), n)
                    total += w[i] * w[j] * np.vdot(t, t).real
    return total


@pytest.mark.parametrize("branch", ["low", "high"])
def test_single_wave_energy_against_oracle(branch):
    params = MaxwellParams(2.0, mu=1.5, epsilon=1 + 0.5j, sigma=1.3)
    W = direction_vector(1.1, -0.4)
    f = MaxwellForms(cube(), params)
    # m*=1 gives two azimuths sharing one polar angle; only the first wave is switched on
    D = DirectionSet(3, np.array([[-0.4, 2.0, 1.1]]), m=1)
    np.testing.assert_allclose(D.vectors(0)[0], W)
    coeffs = np.zeros((1, 4))
    coeffs[0, 0 if branch == "low" else 2] = 1.0
    E = f.expansion(D, coeffs)
    oracle = _oracle_boundary_energy(params.mu, params.kappa, params.omega, params.sigma, W, branch, 24)
    assert f.a(E, E).real == pytest.approx(oracle, rel=1e-9)


def test_load_form_zero_manufactured_and_linear():
    rng = np.random.default_rng(1)
    mesh = cube(2)
    W = direction_vector(0.7, 2.0)
    prob = manufactured_maxwell_plane_wave(np.pi, W, "high", epsilon=1 + 1j)
    f = prob.forms(mesh)
    p0 = MaxwellParams(np.pi, epsilon=1 + 1j)
    v = random_expansion(f, 2, rng)
    assert l_form_maxwell(v, mesh, p0) == 0
    # the exact plane wave itself, written as an expansion on each element
    exact = prob.exact
    Te = f.trace(exact)
    bmask = f.boundary_rows()
    assert f.l(Te) == pytest.approx(np.vdot(Te[bmask], Te[bmask]), rel=1e-12)
    w = random_expansion(f, 2, rng)
    assert f.l([(1.0, v), (1.0, w)]) == pytest.approx(f.l(v) + f.l(w), rel=1e-12)


def test_residual_eta_contracts():
    rng = np.random.default_rng(2)
    mesh = cube(1)
    prob = manufactured_maxwell_plane_wave(np.pi, direction_vector(0.9, 0.3), "low", epsilon=1 + 1j)
    f = prob.forms(mesh)
    p = f.params
    v = random_expansion(f, 2, rng)
    assert residual_maxwell(None, v, mesh, p) == pytest.approx(l_form_maxwell(v, mesh, p).real)
    assert eta_maxwell(None, v, mesh, p) == pytest.approx(eta_maxwell(None, v.scaled(2.0), mesh, p), rel=1e-12)
    u_prev = random_expansion(f, 2, rng)
    err = f.energy_error(prob.exact, u_prev)
    e_dir = [(1 / err, prob.exact), (-1 / err, u_prev)]
    assert f.residual(u_prev, e_dir) == pytest.approx(err, rel=1e-10)
    assert abs(f.eta(u_prev, v)) <= err * (1 + 1e-10)


def test_quadrature_q_vs_q_plus_8():
    rng = np.random.default_rng(3)
    prob = manufactured_maxwell_plane_wave(np.pi, direction_vector(0.5, 1.0), "high", epsilon=1 + 1j)
    mesh = cube(2)
    f1, f2 = prob.forms(mesh, quad_order=10), prob.forms(mesh, quad_order=18)
    u, v = random_expansion(f1, 2, rng), random_expansion(f1, 2, rng)
    assert abs(f1.a(u, v) - f2.a(u, v)) <= 1e-9 * abs(f2.a(u, v))
    assert abs(f1.l(v) - f2.l(v)) <= 1e-9 * abs(f2.l(v))


def test_impedance_trace_shapes():
    rng = np.random.default_rng(4)
    E = rng.standard_normal((5, 3)) + 0j
    C = rng.standard_normal((5, 3)) + 0j
    n = np.array([1.0, 0, 0])
    t = impedance_trace(E, C, n, 2.0, 1.0, 1.0)
    ref = -np.cross(E, n) + (1 / 2j) * np.cross(np.cross(C, n), n)
    np.testing.assert_allclose(t, ref)


def test_params_validation_and_kappa():
    assert MaxwellParams(2.0, mu=1.0, epsilon=4.0).kappa == pytest.approx(4.0)
    k = MaxwellParams(np.pi, epsilon=1 + 1j).kappa
    assert k == pytest.approx(np.pi * np.sqrt(1 + 1j))
    for bad in (dict(omega=-1.0), dict(omega=1.0, rho1=0.0), dict(omega=1.0, mu=0.0)):
        with pytest.raises(ValueError):
            MaxwellParams(**bad)
