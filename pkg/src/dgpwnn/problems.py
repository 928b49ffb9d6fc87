"""Closed-form benchmark solutions and the impedance data they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .forms import GlobalField
from .helmholtz_forms import HelmholtzForms, HelmholtzParams
from .maxwell_forms import MaxwellForms, MaxwellParams, impedance_trace
from .mesh import InvalidConfigError
from .planewave import polarization_vectors


class InvalidBenchmarkError(ValueError):
    """Benchmark parameters outside the supported regime."""


@dataclass(eq=False)
class BenchmarkProblem:
    kind: str
    physics: str  # "helmholtz" | "maxwell"
    domain: tuple  # (lo, hi)
    omega: float
    value: Callable  # x (q, dim) -> (q,) or (q, 3)
    deriv: Callable  # gradient or curl, (q, dim) or (q, 3)
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.domain[0])

    @property
    def exact(self) -> GlobalField:
        return GlobalField(self.value, self.deriv)

    def g(self, x, normal):
        """Impedance trace of the exact solution at boundary points with outward ``normal``."""
        x = np.atleast_2d(x)
        v, d = self.value(x), self.deriv(x)
        if self.physics == "helmholtz":
            return d @ np.asarray(normal, dtype=float) + 1j * self.omega * v
        p = self.params
        return impedance_trace(v, d, normal, self.omega, p.get("mu", 1.0), p.get("sigma", 1.0))

    def forms(self, mesh, quad_order=None, **weights):
        """Form evaluator for this problem; ``weights`` override alpha/beta or rho1/rho2/sigma."""
        if self.physics == "helmholtz":
            params = HelmholtzParams(
                omega=self.omega, alpha=weights.get("alpha"), beta=weights.get("beta", 1.0), g=self.g
            )
            return HelmholtzForms(mesh, params, quad_order)
        sigma = weights.get("sigma", self.params.get("sigma", 1.0))
        if sigma != self.params.get("sigma", 1.0):
            raise InvalidConfigError("sigma must match the value used to build the boundary data")
        params = MaxwellParams(
            omega=self.omega,
            mu=self.params.get("mu", 1.0),
            epsilon=self.params.get("epsilon", 1.0),
            sigma=sigma,
            rho1=weights.get("rho1", 1.0),
            rho2=weights.get("rho2", 1.0),
            g=self.g,
        )
        return MaxwellForms(mesh, params, quad_order)


def waveguide_coefficients(omega, k):
    """Amplitudes of the two counter-propagating x-waves of the waveguide mode."""
    wx = np.sqrt(omega**2 - (k * np.pi) ** 2)
    M = np.array(
        [
            [wx, -wx],
            [(omega - wx) * np.exp(-2j * wx), (omega + wx) * np.exp(2j * wx)],
        ],
        dtype=complex,
    )
    A = np.linalg.solve(M, np.array([-1j, 0.0]))
    return wx, A, M


def waveguide_exact_2d(omega, k=None) -> BenchmarkProblem:
    """Propagating waveguide mode ``cos(k pi y)(A1 e^{-i wx x} + A2 e^{i wx x})`` on [0,1]^2."""
    if k is None:
        k = omega / np.pi - 1.0
    if not omega > k * np.pi:
        raise InvalidBenchmarkError(f"omega={omega} <= k*pi={k * np.pi}: evanescent mode")
    wx, A, _ = waveguide_coefficients(omega, k)
    kp = k * np.pi

    def xpart(x):
        return A[0] * np.exp(-1j * wx * x) + A[1] * np.exp(1j * wx * x)

    def value(x):
        x = np.atleast_2d(x)
        return np.cos(kp * x[:, 1]) * xpart(x[:, 0])

    def deriv(x):
        x = np.atleast_2d(x)
        X = xpart(x[:, 0])
        dX = 1j * wx * (-A[0] * np.exp(-1j * wx * x[:, 0]) + A[1] * np.exp(1j * wx * x[:, 0]))
        return np.stack([np.cos(kp * x[:, 1]) * dX, -kp * np.sin(kp * x[:, 1]) * X], axis=1)

    return BenchmarkProblem(
        "waveguide2d", "helmholtz", (np.zeros(2), np.ones(2)), float(omega), value, deriv,
        {"k": k, "omega_x": wx, "A": A},
    )


def _outside(point, lo, hi) -> bool:
    point = np.asarray(point, dtype=float)
    return bool(np.any(point < lo) or np.any(point > hi))


def point_source_3d(omega, r0=(-1.0, -1.0, -1.0), domain=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))) -> BenchmarkProblem:
    """Outgoing point source ``e^{i omega r} / (4 pi r)`` centred outside the box."""
    lo, hi = (np.asarray(d, dtype=float) for d in domain)
    r0 = np.asarray(r0, dtype=float)
    if not _outside(r0, lo, hi):
        raise InvalidBenchmarkError("source point must lie outside the closed domain")

    def value(x):
        r = np.linalg.norm(np.atleast_2d(x) - r0, axis=1)
        return np.exp(1j * omega * r) / (4 * np.pi * r)

    def deriv(x):
        d = np.atleast_2d(x) - r0
        r = np.linalg.norm(d, axis=1)
        u = np.exp(1j * omega * r) / (4 * np.pi * r)
        return ((1j * omega - 1.0 / r) * u / r)[:, None] * d

    return BenchmarkProblem("point_source_3d", "helmholtz", (lo, hi), float(omega), value, deriv, {"r0": r0})


def maxwell_dipole(
    omega,
    epsilon=1 + 1j,
    mu=1.0,
    x0=(0.6, 0.6, 0.6),
    a=(0.0, 0.0, 1.0),
    current=1.0,
    domain=((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5)),
    sigma=1.0,
) -> BenchmarkProblem:
    """Field of an electric dipole at ``x0`` with moment ``a`` and current ``current``.

    ``E = -i omega mu I phi a + (I / (i omega eps)) grad(grad phi . a)`` with
    ``phi = e^{i k r} / (4 pi r)`` and ``k = omega sqrt(mu eps)``.
    """
    lo, hi = (np.asarray(d, dtype=float) for d in domain)
    x0 = np.asarray(x0, dtype=float)
    a = np.asarray(a, dtype=float)
    if not _outside(x0, lo, hi):
        raise InvalidBenchmarkError("dipole location must lie outside the closed domain")
    k = omega * np.sqrt(complex(mu * epsilon))

    def radial(x):
        d = np.atleast_2d(x) - x0
        r = np.linalg.norm(d, axis=1)
        rhat = d / r[:, None]
        phi = np.exp(1j * k * r) / (4 * np.pi * r)
        return r, rhat, phi

    def value(x):
        r, rhat, phi = radial(x)
        s = 1j * k - 1.0 / r
        f1 = phi * s
        f2 = phi * (s * s + 1.0 / r**2)
        ra = rhat @ a
        # Hessian(phi) a = f'' (r.a) r + (f'/r)(a - (r.a) r)
        Ha = (f2 * ra)[:, None] * rhat + (f1 / r)[:, None] * (a[None, :] - ra[:, None] * rhat)
        return -1j * omega * mu * current * phi[:, None] * a[None, :] + (current / (1j * omega * epsilon)) * Ha

    def deriv(x):
        r, rhat, phi = radial(x)
        grad = (phi * (1j * k - 1.0 / r))[:, None] * rhat
        return -1j * omega * mu * current * np.cross(grad, a[None, :])

    return BenchmarkProblem(
        "maxwell_dipole", "maxwell", (lo, hi), float(omega), value, deriv,
        {"epsilon": epsilon, "mu": mu, "x0": x0, "a": a, "current": current, "sigma": sigma, "kappa": k},
    )


def manufactured_plane_wave(omega, W, amplitude=1.0, domain=None) -> BenchmarkProblem:
    """Helmholtz problem whose solution is the single plane wave ``amplitude e^{i omega W.x}``."""
    W = np.asarray(W, dtype=float)
    W = W / np.linalg.norm(W)
    dim = W.size
    if domain is None:
        domain = (np.zeros(dim), np.ones(dim))

    def value(x):
        return amplitude * np.exp(1j * omega * (np.atleast_2d(x) @ W))

    def deriv(x):
        return (1j * omega) * value(x)[:, None] * W[None, :]

    lo, hi = (np.asarray(d, dtype=float) for d in domain)
    return BenchmarkProblem("manufactured_plane_wave", "helmholtz", (lo, hi), float(omega), value, deriv, {"W": W})


def manufactured_maxwell_plane_wave(
    omega, W, branch="low", amplitude=1.0, epsilon=1.0, mu=1.0, domain=None, sigma=1.0
) -> BenchmarkProblem:
    """Maxwell problem whose solution is one polarized plane wave."""
    W = np.asarray(W, dtype=float)
    W = W / np.linalg.norm(W)
    G, _ = polarization_vectors(W[None, :])
    F = G[0] if branch == "low" else np.cross(G[0], W)
    kappa = omega * np.sqrt(complex(mu * epsilon))
    if domain is None:
        domain = (np.zeros(3), np.ones(3))

    def value(x):
        return amplitude * np.sqrt(mu) * np.exp(1j * kappa * (np.atleast_2d(x) @ W))[:, None] * F[None, :]

    def deriv(x):
        return (1j * kappa) * np.cross(W[None, :], value(x))

    lo, hi = (np.asarray(d, dtype=float) for d in domain)
    return BenchmarkProblem(
        "manufactured_plane_wave", "maxwell", (lo, hi), float(omega), value, deriv,
        {"W": W, "branch": branch, "epsilon": epsilon, "mu": mu, "sigma": sigma, "kappa": kappa},
    )


def error_norms(u_h, problem: BenchmarkProblem, mesh, forms, volume_order=None):
    """``(L2 error, energy error)`` of ``u_h`` against the exact solution.

    ``u_h`` may be None (the zero function), an expansion, or a list of
    ``(coefficient, function)`` pairs.
    """
    exact = problem.exact
    if u_h is None or (isinstance(u_h, (list, tuple)) and not u_h):
        energy = forms.energy_norm(exact)
        return forms.l2_error(exact, None, volume_order), energy
    return forms.l2_error(exact, u_h, volume_order), forms.energy_error(exact, u_h)
