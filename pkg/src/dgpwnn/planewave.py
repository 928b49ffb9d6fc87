"""Plane-wave directions, polarizations and element-wise plane-wave expansions.

A 2D direction set stores one angle ``d`` per wave. A 3D set stores, per
element, ``t* = 2 m*`` azimuths followed by ``m*`` polar angles; wave
``l = m * t* + t`` uses ``(zeta_m, theta_t)``. Both are kept in a single
``(N, P)`` parameter array so the optimizer can treat them uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * np.pi
ZETA_THRESHOLD = 1e-3
ZETA_DISTURBANCE = 1e-2
POLARIZATION_TOL = 1e-8


def cross(a, b, axis=-1):
    """Cross product along ``axis`` with broadcasting (faster than ``np.cross`` for small axes)."""
    a = np.moveaxis(np.asarray(a), axis, 0)
    b = np.moveaxis(np.asarray(b), axis, 0)
    c = np.stack([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
    return np.moveaxis(c, 0, axis)


def wrap_angle(x):
    """Map angles onto (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    return x - TWO_PI * np.ceil((x - np.pi) / TWO_PI)


def direction_vector(*angles) -> np.ndarray:
    """``direction_vector(d)`` in 2D, ``direction_vector(zeta, theta)`` in 3D."""
    if len(angles) == 1:
        d = angles[0]
        return np.array([np.cos(d), np.sin(d)])
    zeta, theta = angles
    return np.array([np.sin(zeta) * np.cos(theta), np.sin(zeta) * np.sin(theta), np.cos(zeta)])


@dataclass(eq=False)
class DirectionSet:
    dim: int
    angles: np.ndarray  # (N, P)
    m: int = 0  # polar count m* (3D only)

    @property
    def n_elements(self) -> int:
        return self.angles.shape[0]

    @property
    def t(self) -> int:
        return 2 * self.m

    @property
    def width(self) -> int:
        """Number of plane-wave directions per element."""
        return self.angles.shape[1] if self.dim == 2 else self.m * self.t

    @property
    def d(self) -> np.ndarray:
        return self.angles

    @property
    def theta(self) -> np.ndarray:
        return self.angles[:, : self.t]

    @property
    def zeta(self) -> np.ndarray:
        return self.angles[:, self.t :]

    def copy(self) -> "DirectionSet":
        return replace(self, angles=self.angles.copy())

    def with_angles(self, angles) -> "DirectionSet":
        angles = np.asarray(angles, dtype=float).reshape(self.angles.shape)
        return replace(self, angles=angles.copy())

    def vectors(self, k: int) -> np.ndarray:
        """Unit directions ``(n, dim)`` on element ``k``."""
        if self.dim == 2:
            d = self.angles[k]
            return np.stack([np.cos(d), np.sin(d)], axis=1)
        zeta, theta = self.zeta[k], self.theta[k]
        sz, cz = np.sin(zeta)[:, None], np.cos(zeta)[:, None]
        st, ct = np.sin(theta)[None, :], np.cos(theta)[None, :]
        return np.stack(
            [(sz * ct).ravel(), (sz * st).ravel(), np.broadcast_to(cz, (self.m, self.t)).ravel()],
            axis=1,
        )

    def jacobian(self, k: int) -> np.ndarray:
        """``dW_l / dp`` with shape ``(n, dim, P)`` for element ``k``."""
        n, P = self.width, self.angles.shape[1]
        jac = np.zeros((n, self.dim, P))
        if self.dim == 2:
            d = self.angles[k]
            idx = np.arange(n)
            jac[idx, 0, idx] = -np.sin(d)
            jac[idx, 1, idx] = np.cos(d)
            return jac
        m, t = self.m, self.t
        zeta, theta = self.zeta[k], self.theta[k]
        for mi in range(m):
            sz, cz = np.sin(zeta[mi]), np.cos(zeta[mi])
            for ti in range(t):
                st, ct = np.sin(theta[ti]), np.cos(theta[ti])
                l = mi * t + ti
                jac[l, :, ti] = (-sz * st, sz * ct, 0.0)
                jac[l, :, t + mi] = (cz * ct, cz * st, -sz)
        return jac

    def normalized(self, threshold=ZETA_THRESHOLD, disturbance=ZETA_DISTURBANCE) -> "DirectionSet":
        """Wrap azimuths, clamp polar angles to [0, pi] and push them off the poles."""
        angles = self.angles.copy()
        if self.dim == 2:
            angles = wrap_angle(angles)
        else:
            angles[:, : self.t] = wrap_angle(angles[:, : self.t])
            zeta = np.clip(angles[:, self.t :], 0.0, np.pi)
            angles[:, self.t :] = correct_polar_angles(zeta, threshold, disturbance)
        return replace(self, angles=angles)


def init_directions(dim: int, width: int, n_elements: int) -> DirectionSet:
    """Uniform initial angles, identical on every element.

    ``width`` is the number of directions ``n`` in 2D and the polar count
    ``m*`` in 3D (``t* = 2 m*`` azimuths, ``n = 2 m*^2`` directions).
    """
    width = int(width)
    if dim == 2:
        if width < 1:
            raise ValueError("2D width must be >= 1")
        j = np.arange(1, width + 1)
        d = wrap_angle(-np.pi + TWO_PI * j / width)
        return DirectionSet(2, np.tile(d, (n_elements, 1)))
    if dim != 3:
        raise ValueError(f"unsupported dimension {dim}")
    if width < 2:
        raise ValueError("3D polar count m* must be >= 2")
    m, t = width, 2 * width
    zeta = polar_init(m)
    theta = wrap_angle(-np.pi + TWO_PI * np.arange(1, t + 1) / t)
    row = np.concatenate([theta, zeta])
    return DirectionSet(3, np.tile(row, (n_elements, 1)), m=m)


def polar_init_raw(m: int) -> np.ndarray:
    mi = np.arange(1, m + 1)
    return np.pi / (m - 1) * (mi - 1) + np.pi / (3 * m)


def polar_init(m: int) -> np.ndarray:
    # the last polar angle of the uniform formula overshoots pi; reflecting it
    # gives the same direction set (the azimuth grid is symmetric under +pi)
    zeta = polar_init_raw(m)
    return np.where(zeta > np.pi, TWO_PI - zeta, zeta)


def correct_polar_angles(zeta, threshold=ZETA_THRESHOLD, disturbance=ZETA_DISTURBANCE):
    """Move polar angles with ``|sin zeta| < threshold`` towards the interior of [0, pi]."""
    zeta = np.array(zeta, dtype=float, copy=True)
    bad = np.abs(np.sin(zeta)) < threshold
    step = np.where(zeta < 0.5 * np.pi, disturbance, -disturbance)
    zeta[bad] = np.clip(zeta[bad] + step[bad], 0.0, np.pi)
    return zeta


def eval_scalar_wave(omega, W, x):
    """Value ``exp(i omega W.x)`` and its gradient at a single point."""
    W = np.asarray(W, dtype=float)
    value = np.exp(1j * omega * np.dot(W, x))
    return value, 1j * omega * W * value


@dataclass(frozen=True, eq=False)
class PolarizationFrame:
    W: np.ndarray
    G: np.ndarray

    @property
    def F_low(self) -> np.ndarray:
        return self.G

    @property
    def F_high(self) -> np.ndarray:
        return np.cross(self.G, self.W)


def polarization_vectors(W, tol=POLARIZATION_TOL):
    """Unit polarizations ``G`` orthogonal to each row of ``W`` and ``dG/dW``.

    Returns ``G`` of shape ``(n, 3)`` and the Jacobian ``(n, 3, 3)`` indexed
    ``[l, component, w_component]``.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    n = W.shape[0]
    G = np.empty((n, 3))
    dG = np.zeros((n, 3, 3))
    a, b, c = W[:, 0], W[:, 1], W[:, 2]
    regular = np.abs(b) < 1.0 - tol
    if np.any(regular):
        ar, br, cr = a[regular], b[regular], c[regular]
        s = np.sqrt(1.0 - br * br)
        # (a b, -(1 - b^2), b (1 - b^2 - a^2) / c) / s with the c factor cancelled
        G[regular] = np.stack([ar * br / s, -s, br * cr / s], axis=1)
        s3 = s**3
        jac = np.zeros((ar.size, 3, 3))
        jac[:, 0, 0] = br / s
        jac[:, 0, 1] = ar / s3
        jac[:, 1, 1] = br / s
        jac[:, 2, 1] = cr / s3
        jac[:, 2, 2] = br / s
        dG[regular] = jac
    for l in np.flatnonzero(~regular):
        w = W[l]
        e = np.zeros(3)
        e[np.argmin(np.abs(w))] = 1.0
        u = e - np.dot(e, w) * w
        nu = np.linalg.norm(u)
        g = u / nu
        du = -np.outer(w, e) - np.dot(e, w) * np.eye(3)
        G[l] = g
        dG[l] = (np.eye(3) - np.outer(g, g)) @ du / nu
    return G, dG


def polarization_frame(W) -> PolarizationFrame:
    W = np.asarray(W, dtype=float)
    G, _ = polarization_vectors(W[None, :])
    return PolarizationFrame(W=W, G=G[0])


def eval_maxwell_wave(mu, kappa, frame: PolarizationFrame, branch: str, x):
    """Field ``sqrt(mu) F exp(i kappa W.x)`` and its curl at a single point."""
    F = frame.F_low if branch == "low" else frame.F_high
    if branch not in ("low", "high"):
        raise ValueError(f"branch must be 'low' or 'high', got {branch!r}")
    E = np.sqrt(mu) * F * np.exp(1j * kappa * np.dot(frame.W, x))
    return E, 1j * kappa * np.cross(frame.W, E)


def scalar_columns(omega, W, x, derivatives=False):
    """Plane waves ``exp(i omega W_j.x)`` evaluated at points ``x``.

    Returns ``value (q, 1, n)`` and ``grad (q, dim, n)``; with ``derivatives``
    also their derivatives with respect to the components of ``W_j``, with a
    trailing axis of length ``dim``.
    """
    phase = np.exp(1j * omega * (x @ W.T))
    value = phase[:, None, :]
    grad = (1j * omega) * W.T[None, :, :] * value
    if not derivatives:
        return value, grad
    dim = W.shape[1]
    p = phase[:, None, :, None]
    dvalue = (1j * omega) * x[:, None, None, :] * p
    dgrad = (1j * omega) * p * (
        np.eye(dim)[None, :, None, :] + (1j * omega) * W.T[None, :, :, None] * x[:, None, None, :]
    )
    return value, grad, dvalue, dgrad


def maxwell_columns(mu, kappa, W, x, derivatives=False):
    """Fields of the ``2n`` Maxwell plane waves (low branch first) at ``x``.

    Returns ``E (q, 3, 2n)`` and ``curl E (q, 3, 2n)``; with ``derivatives``
    also their derivatives with respect to the components of the underlying
    direction, trailing axis of length 3.
    """
    G, dG = polarization_vectors(W)
    H = np.cross(G, W)
    F = np.concatenate([G, H])
    Wc = np.concatenate([W, W])
    phase = np.exp(1j * kappa * (x @ Wc.T))
    amp = np.sqrt(mu)
    E = amp * F.T[None, :, :] * phase[:, None, :]
    Wt = Wc.T[None, :, :]
    curl = (1j * kappa) * cross(Wt, E, axis=1)
    if not derivatives:
        return E, curl
    eye = np.eye(3)
    # d(G x W)/dW_i = dG/dW_i x W + G x e_i
    dH = cross(dG, W[:, :, None], axis=1) + cross(G[:, :, None], eye[None, :, :], axis=1)
    dF = np.concatenate([dG, dH])  # (2n, 3, 3)
    p = phase[:, None, :, None]
    dE = amp * p * (
        np.transpose(dF, (1, 0, 2))[None] + (1j * kappa) * F.T[None, :, :, None] * x[:, None, None, :]
    )
    dcurl = (1j * kappa) * (
        cross(eye[None, :, None, :], E[..., None], axis=1) + cross(Wt[..., None], dE, axis=1)
    )
    return E, curl, dE, dcurl


@dataclass(eq=False)
class PWExpansion:
    """Element-wise plane-wave function ``sum_j c_j^(k) (plane wave j)`` on each element."""

    directions: DirectionSet
    coeffs: np.ndarray  # (N, n) scalar, (N, 2n) Maxwell
    wavenumber: complex
    kind: str = "scalar"
    mu: float = 1.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        ncol = self.directions.width * (2 if self.kind == "maxwell" else 1)
        if self.coeffs.shape != (self.directions.n_elements, ncol):
            raise ValueError(
                f"coefficient array {self.coeffs.shape} does not match "
                f"({self.directions.n_elements}, {ncol})"
            )

    def columns(self, k, x, derivatives=False):
        W = self.directions.vectors(k)
        if self.kind == "maxwell":
            return maxwell_columns(self.mu, self.wavenumber, W, x, derivatives)
        return scalar_columns(self.wavenumber, W, x, derivatives)

    def evaluate(self, x, k):
        """Value and derivative (gradient or curl) on element ``k`` at points ``x``."""
        x = np.atleast_2d(x)
        value, deriv = self.columns(k, x)
        c = self.coeffs[k]
        value, deriv = value @ c, deriv @ c
        if self.kind == "scalar":
            value = value[:, 0]
        return value, deriv

    def scaled(self, s) -> "PWExpansion":
        return replace(self, coeffs=self.coeffs * s)

    def amplitudes_and_wavevectors(self, k):
        W = self.directions.vectors(k)
        if self.kind == "maxwell":
            G, _ = polarization_vectors(W)
            F = np.concatenate([G, np.cross(G, W)])
            return np.sqrt(self.mu) * F, self.wavenumber * np.concatenate([W, W])
        return np.ones((W.shape[0], 1)), self.wavenumber * W.astype(complex)


def box_exponential_integral(q, lo, hi):
    """``int_box exp(i q.x) dx`` for complex wave vectors ``q (..., dim)``."""
    q = np.asarray(q, dtype=complex)
    L = np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
    z = 1j * q * L
    small = np.abs(z) < 1e-8
    zs = np.where(small, 1.0, z)
    phi = np.where(small, 1.0 + 0.5 * z, np.expm1(zs) / zs)
    return np.prod(np.exp(1j * q * lo) * L * phi, axis=-1)


def l2_norm(expansion: PWExpansion, mesh) -> float:
    """Closed-form L2(Omega) norm of a plane-wave expansion."""
    total = 0.0
    for k in range(mesh.n_elements):
        c = expansion.coeffs[k]
        amp, kv = expansion.amplitudes_and_wavevectors(k)
        gram = (amp @ amp.conj().T) * box_exponential_integral(
            kv[:, None, :] - kv.conj()[None, :, :], mesh.elem_lo[k], mesh.elem_hi[k]
        )
        total += np.real(c @ gram @ c.conj())
    return float(np.sqrt(max(total, 0.0)))
