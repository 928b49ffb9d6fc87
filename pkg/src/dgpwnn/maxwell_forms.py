"""Least-squares forms for time-harmonic Maxwell with a first-order absorbing condition.

The functional penalizes the impedance trace
``-E x n + (sigma / (i omega mu)) ((curl E) x n) x n - g`` on the boundary and
the tangential jumps of ``E`` and ``curl E / (i omega mu)`` across interior
faces, weighted by ``rho1`` and ``rho2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .forms import FaceForms
from .planewave import PWExpansion, cross, maxwell_columns


@dataclass
class MaxwellParams:
    omega: float
    mu: float = 1.0
    epsilon: complex = 1.0
    sigma: float = 1.0  # impedance coefficient
    rho1: float = 1.0
    rho2: float = 1.0
    g: Optional[Callable] = None  # g(x (q, 3), normal (3,)) -> (q, 3)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not (self.rho1 > 0 and self.rho2 > 0):
            raise ValueError("rho1 and rho2 must be positive")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def kappa(self) -> complex:
        k = self.omega * np.sqrt(complex(self.mu * self.epsilon))
        return k.real if k.imag == 0 else k


def _cross_normal(field, normal):
    n = np.asarray(normal, dtype=float).reshape((1, 3) + (1,) * (field.ndim - 2))
    return cross(field, n, axis=1)


def tangential_jump(E_k, E_j, n_k, n_j):
    """``E_k x n_k + E_j x n_j``."""
    return np.cross(E_k, n_k) + np.cross(E_j, n_j)


def impedance_trace(E, curl, normal, omega, mu=1.0, sigma=1.0):
    """``-E x n + (sigma / (i omega mu)) ((curl E) x n) x n`` for fields shaped ``(q, 3, ...)``."""
    cn = _cross_normal(curl, normal)
    return -_cross_normal(E, normal) + (sigma / (1j * omega * mu)) * _cross_normal(cn, normal)


class MaxwellForms(FaceForms):
    kind = "maxwell"
    value_comps = 3
    columns_per_direction = 2

    def __init__(self, mesh, params: MaxwellParams, quad_order=None):
        self.params = params
        self._s1 = np.sqrt(params.rho1)
        self._s2 = np.sqrt(params.rho2) / (1j * params.omega * params.mu)
        super().__init__(mesh, params.kappa, quad_order)

    def rows_per_point(self, face) -> int:
        return 3 if face.is_boundary else 6

    def boundary_operator(self, value, deriv, normal):
        p = self.params
        return impedance_trace(value, deriv, normal, p.omega, p.mu, p.sigma)

    def jump_operators(self, value, deriv, normal):
        return [self._s1 * _cross_normal(value, normal), self._s2 * _cross_normal(deriv, normal)]

    def columns(self, W, x, derivatives=False):
        return maxwell_columns(self.params.mu, self.params.kappa, W, x, derivatives)

    def boundary_datum(self, x, normal):
        if self.params.g is None:
            return np.zeros((x.shape[0], 3), dtype=complex)
        return self.params.g(x, normal)

    def expansion(self, directions, coeffs) -> PWExpansion:
        return PWExpansion(directions, coeffs, self.params.kappa, "maxwell", mu=self.params.mu)


def _forms(mesh, params, quad_order=None):
    return MaxwellForms(mesh, params, quad_order)


def a_form_maxwell(E, F, mesh, params, quad_order=None) -> complex:
    return _forms(mesh, params, quad_order).a(E, F)


def l_form_maxwell(F, mesh, params, quad_order=None) -> complex:
    return _forms(mesh, params, quad_order).l(F)


def energy_norm_maxwell(F, mesh, params, quad_order=None) -> float:
    return _forms(mesh, params, quad_order).energy_norm(F)


def residual_maxwell(E_prev, F, mesh, params, quad_order=None) -> float:
    return _forms(mesh, params, quad_order).residual(E_prev, F)


def eta_maxwell(E_prev, F, mesh, params, quad_order=None) -> float:
    return _forms(mesh, params, quad_order).eta(E_prev, F)
