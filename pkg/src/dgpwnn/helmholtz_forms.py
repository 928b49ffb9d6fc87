"""Least-squares forms for the homogeneous Helmholtz equation with impedance data.

For element-wise plane waves the functional penalizes the impedance trace
``(d/dn + i omega) u - g`` on the boundary and the value and normal-derivative
jumps across interior faces, weighted by ``alpha`` and ``beta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .forms import FaceForms
from .planewave import PWExpansion, scalar_columns


@dataclass
class HelmholtzParams:
    omega: float
    alpha: Optional[float] = None  # defaults to omega**2
    beta: float = 1.0
    g: Optional[Callable] = None  # g(x (q, dim), normal (dim,)) -> (q,)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.alpha is None:
            self.alpha = self.omega**2
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def _normal_component(deriv, normal):
    n = np.asarray(normal).reshape((1, -1) + (1,) * (deriv.ndim - 2))
    return np.sum(n * deriv, axis=1, keepdims=True)


class HelmholtzForms(FaceForms):
    kind = "scalar"

    def __init__(self, mesh, params: HelmholtzParams, quad_order=None):
        self.params = params
        self._sa = np.sqrt(params.alpha)
        self._sb = np.sqrt(params.beta)
        super().__init__(mesh, params.omega, quad_order)

    def rows_per_point(self, face) -> int:
        return 1 if face.is_boundary else 2

    def boundary_operator(self, value, deriv, normal):
        return _normal_component(deriv, normal) + 1j * self.params.omega * value

    def jump_operators(self, value, deriv, normal):
        return [self._sa * value, self._sb * _normal_component(deriv, normal)]

    def columns(self, W, x, derivatives=False):
        return scalar_columns(self.params.omega, W, x, derivatives)

    def boundary_datum(self, x, normal):
        if self.params.g is None:
            return np.zeros(x.shape[0], dtype=complex)
        return self.params.g(x, normal)

    def expansion(self, directions, coeffs) -> PWExpansion:
        return PWExpansion(directions, coeffs, self.params.omega, "scalar")


def _forms(mesh, params, quad_order=None):
    return HelmholtzForms(mesh, params, quad_order)


def a_form(u, v, mesh, params, quad_order=None) -> complex:
    return _forms(mesh, params, quad_order).a(u, v)


def l_form(v, mesh, params, quad_order=None) -> complex:
    return _forms(mesh, params, quad_order).l(v)


def energy_norm(v, mesh, params, quad_order=None) -> float:
    return _forms(mesh, params, quad_order).energy_norm(v)


def residual(u_prev, v, mesh, params, quad_order=None) -> float:
    return _forms(mesh, params, quad_order).residual(u_prev, v)


def eta(u_prev, v, mesh, params, quad_order=None) -> float:
    return _forms(mesh, params, quad_order).eta(u_prev, v)
