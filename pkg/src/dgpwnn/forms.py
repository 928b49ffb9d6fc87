"""Shared machinery for least-squares face forms.

Every form used here is a sum of face integrals of products ``X(u) conj(X(v))``
for a handful of linear face operators ``X``. Evaluating each operator at
the quadrature nodes and scaling by ``sqrt(weight)`` turns a function into a
*weighted trace vector* ``T(u)``; then

    a(u, v) = vdot(T(v), T(u)),   L(v) = vdot(T(v), G),

where ``G`` holds the scaled boundary datum on boundary rows and zeros on
interior rows. Interior faces are visited once, the lower-indexed owner
contributing with sign +1 and the other owner with sign -1, so interior rows
hold jumps.
"""

from __future__ import annotations

import numpy as np

from .planewave import PWExpansion
from .quadrature import default_order, face_quadrature, volume_quadrature

NORM_FLOOR = 1e-14


class MeshMismatchError(ValueError):
    """Operands live on a different mesh or use a different wavenumber."""


class DegenerateCandidateError(ArithmeticError):
    """Energy norm of a candidate below the floor, so eta is undefined."""


class GlobalField:
    """A function defined on the whole domain by closed-form callables.

    ``value(x)`` returns ``(q,)`` or ``(q, 3)``; ``deriv(x)`` returns the
    gradient or curl with shape ``(q, d)``.
    """

    def __init__(self, value, deriv):
        self.value = value
        self.deriv = deriv

    def evaluate(self, x, k=None):
        return self.value(x), self.deriv(x)


class FaceForms:
    """Base class; subclasses define the face operators and the plane-wave columns."""

    kind = "scalar"
    value_comps = 1
    columns_per_direction = 1

    def __init__(self, mesh, wavenumber, quad_order=None):
        self.mesh = mesh
        self.wavenumber = wavenumber
        self.quad_order = quad_order
        self.rules = []
        self.face_slices = []
        start = 0
        for f in mesh.faces:
            order = quad_order if quad_order is not None else default_order(abs(wavenumber), f.width)
            rule = face_quadrature(f, order)
            self.rules.append(rule)
            nrows = len(rule) * self.rows_per_point(f)
            self.face_slices.append(slice(start, start + nrows))
            start += nrows
        self.n_rows = start
        self.sqrt_w = [np.sqrt(r.weights) for r in self.rules]
        self.element_layout = []
        self.element_rows = []
        for k in range(mesh.n_elements):
            layout, idx, pos = [], [], 0
            for fi, sign in mesh.element_faces[k]:
                sl = self.face_slices[fi]
                layout.append((fi, sign, slice(pos, pos + sl.stop - sl.start)))
                idx.append(np.arange(sl.start, sl.stop))
                pos += sl.stop - sl.start
            self.element_layout.append(layout)
            self.element_rows.append(np.concatenate(idx))
        self._load = None
        self._volume_rules = None
        self._pairs = None

    # -- physics hooks ---------------------------------------------------
    def rows_per_point(self, face) -> int:
        raise NotImplementedError

    def boundary_operator(self, value, deriv, normal):
        """Impedance trace with a component axis at position 1."""
        raise NotImplementedError

    def jump_operators(self, value, deriv, normal):
        """Weighted one-sided interface operators, each with a component axis at 1."""
        raise NotImplementedError

    def columns(self, W, x, derivatives=False):
        raise NotImplementedError

    def boundary_datum(self, x, normal):
        raise NotImplementedError

    def expansion(self, directions, coeffs) -> PWExpansion:
        raise NotImplementedError

    # -- trace assembly --------------------------------------------------
    def face_rows(self, fi, sign, value, deriv):
        """Weighted rows of face ``fi`` seen from an owner with orientation ``sign``.

        ``value`` and ``deriv`` carry the point axis first and the component
        axis second; any trailing axes (columns, direction derivatives) are
        passed through.
        """
        face = self.mesh.faces[fi]
        normal = face.normal if sign > 0 else -face.normal
        if face.is_boundary:
            blocks = [self.boundary_operator(value, deriv, normal)]
        else:
            # both owners use the lower owner's normal, so the difference of
            # the two contributions is the jump
            blocks = [sign * b for b in self.jump_operators(value, deriv, face.normal)]
        sw = self.sqrt_w[fi]
        out = []
        for b in blocks:
            b = b * sw.reshape((-1,) + (1,) * (b.ndim - 1))
            out.append(b.reshape((-1,) + b.shape[2:]))
        return np.concatenate(out, axis=0)

    def element_block(self, k, W, derivatives=False):
        """Trace columns of the plane waves ``W`` on element ``k``.

        Returns ``B (r_k, ncol)`` and, with ``derivatives``, ``dB (r_k, ncol, dim)``
        holding derivatives with respect to the components of each column's direction.
        """
        parts, dparts = [], []
        for fi, sign, _ in self.element_layout[k]:
            cols = self.columns(W, self.rules[fi].points, derivatives)
            parts.append(self.face_rows(fi, sign, cols[0], cols[1]))
            if derivatives:
                dparts.append(self.face_rows(fi, sign, cols[2], cols[3]))
        B = np.concatenate(parts, axis=0)
        if derivatives:
            return B, np.concatenate(dparts, axis=0)
        return B

    def interior_face_pairs(self):
        """``((k, local rows in k), (j, local rows in j))`` for every interior face."""
        if self._pairs is None:
            local = {}
            for k, layout in enumerate(self.element_layout):
                for fi, _, sl in layout:
                    local.setdefault(fi, []).append((k, sl))
            self._pairs = [tuple(local[fi]) for fi, f in enumerate(self.mesh.faces) if not f.is_boundary]
        return self._pairs

    def element_blocks(self, directions, derivatives=False):
        self.check_directions(directions)
        return [self.element_block(k, directions.vectors(k), derivatives) for k in range(self.mesh.n_elements)]

    def check_directions(self, directions):
        if directions.n_elements != self.mesh.n_elements:
            raise MeshMismatchError(
                f"directions cover {directions.n_elements} elements, mesh has {self.mesh.n_elements}"
            )

    def check_expansion(self, u: PWExpansion):
        self.check_directions(u.directions)
        if u.kind != self.kind or not np.isclose(u.wavenumber, self.wavenumber, rtol=1e-14, atol=0):
            raise MeshMismatchError("expansion uses a different physics or wavenumber")

    def _field_face(self, field, fi, k, sign):
        x = self.rules[fi].points
        value, deriv = field.evaluate(x, k)
        value = np.asarray(value)
        if value.ndim == 1:
            value = value[:, None]
        return self.face_rows(fi, sign, value, np.asarray(deriv))

    def trace(self, u) -> np.ndarray:
        """Weighted trace vector of ``u``.

        ``u`` may be a trace vector, a :class:`PWExpansion`, a sequence of
        ``(coefficient, function)`` pairs, or any object with ``evaluate(x, k)``.
        None stands for the zero function.
        """
        if u is None:
            return np.zeros(self.n_rows, dtype=complex)
        if hasattr(u, "trace") and isinstance(u.trace, np.ndarray) and u.trace.shape == (self.n_rows,):
            return u.trace
        if isinstance(u, np.ndarray):
            if u.shape != (self.n_rows,):
                raise MeshMismatchError(f"trace of length {u.shape} does not match {self.n_rows} rows")
            return u
        if isinstance(u, PWExpansion):
            self.check_expansion(u)
            T = np.zeros(self.n_rows, dtype=complex)
            for k in range(self.mesh.n_elements):
                B = self.element_block(k, u.directions.vectors(k))
                T[self.element_rows[k]] += B @ u.coeffs[k]
            return T
        if isinstance(u, (list, tuple)):
            T = np.zeros(self.n_rows, dtype=complex)
            for c, f in u:
                T += c * self.trace(f)
            return T
        if not hasattr(u, "evaluate"):
            raise TypeError(f"cannot take the trace of {type(u).__name__}")
        T = np.zeros(self.n_rows, dtype=complex)
        for fi, f in enumerate(self.mesh.faces):
            sl = self.face_slices[fi]
            k = f.owners[0]
            rows = self._field_face(u, fi, k, 1)
            if not f.is_boundary:
                rows = rows + self._field_face(u, fi, f.owners[1], -1)
            T[sl] = rows
        return T

    @property
    def load(self) -> np.ndarray:
        """Scaled boundary datum on boundary rows, zero on interior rows."""
        if self._load is None:
            G = np.zeros(self.n_rows, dtype=complex)
            for fi, f in enumerate(self.mesh.faces):
                if not f.is_boundary:
                    continue
                g = np.asarray(self.boundary_datum(self.rules[fi].points, f.normal), dtype=complex)
                if g.ndim == 1:
                    g = g[:, None]
                G[self.face_slices[fi]] = (g * self.sqrt_w[fi][:, None]).reshape(-1)
            self._load = G
        return self._load

    def boundary_rows(self) -> np.ndarray:
        mask = np.zeros(self.n_rows, dtype=bool)
        for fi, f in enumerate(self.mesh.faces):
            if f.is_boundary:
                mask[self.face_slices[fi]] = True
        return mask

    # -- forms -------------------------------------------------------------
    def a(self, u, v) -> complex:
        return complex(np.vdot(self.trace(v), self.trace(u)))

    def l(self, v) -> complex:
        return complex(np.vdot(self.trace(v), self.load))

    def energy_norm(self, v) -> float:
        return float(np.linalg.norm(self.trace(v)))

    def pre_residue(self, u_prev, v) -> complex:
        """``L(v) - a(u_prev, v)``."""
        return complex(np.vdot(self.trace(v), self.load - self.trace(u_prev)))

    def residual(self, u_prev, v) -> float:
        return self.pre_residue(u_prev, v).real

    def eta(self, u_prev, v) -> float:
        Tv = self.trace(v)
        nv = np.linalg.norm(Tv)
        if nv <= NORM_FLOOR:
            raise DegenerateCandidateError(f"candidate energy norm {nv:.3e} below floor")
        return float(np.vdot(Tv, self.load - self.trace(u_prev)).real / nv)

    def loss(self, u) -> float:
        """Least-squares functional ``J(u) = |||u|||^2 - 2 Re L(u) + |G|^2``."""
        return float(np.linalg.norm(self.trace(u) - self.load) ** 2)

    def energy_error(self, exact, u) -> float:
        return float(np.linalg.norm(self.trace(exact) - self.trace(u)))

    # -- volume evaluation ----------------------------------------------
    def volume_rules(self, order=None):
        if order is not None:
            return [
                volume_quadrature(self.mesh.elem_lo[k], self.mesh.elem_hi[k], order)
                for k in range(self.mesh.n_elements)
            ]
        if self._volume_rules is None:
            self._volume_rules = []
            for k in range(self.mesh.n_elements):
                lo, hi = self.mesh.elem_lo[k], self.mesh.elem_hi[k]
                o = default_order(abs(self.wavenumber), float(np.max(hi - lo)))
                self._volume_rules.append(volume_quadrature(lo, hi, o))
        return self._volume_rules

    def l2_error(self, exact, u, order=None) -> float:
        """``||exact - u||_{L2}`` by element volume quadrature; ``u`` may be None."""
        total = 0.0
        for k, rule in enumerate(self.volume_rules(order)):
            ve, _ = exact.evaluate(rule.points, k)
            diff = np.asarray(ve, dtype=complex)
            if u is not None:
                diff = diff - self._value(u, rule.points, k)
            total += float(np.sum(rule.weights[:, None] * np.abs(diff.reshape(len(rule), -1)) ** 2))
        return float(np.sqrt(total))

    def _value(self, u, x, k):
        if isinstance(u, (list, tuple)):
            return sum(c * self._value(f, x, k) for c, f in u)
        return np.asarray(u.evaluate(x, k)[0], dtype=complex)
