"""Uniform box meshes with enumerated interior and boundary faces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidConfigError(ValueError):
    """Raised for malformed mesh, schedule or run configuration."""


@dataclass(frozen=True, eq=False)
class Face:
    """An axis-aligned facet.

    ``owners`` is ``(k, j)`` with ``k < j`` for interior faces and ``(k,)`` for
    boundary faces. ``normal`` points out of ``owners[0]``.
    """

    kind: str
    owners: tuple
    axis: int
    coord: float
    lo: np.ndarray
    hi: np.ndarray
    normal: np.ndarray

    @property
    def is_boundary(self) -> bool:
        return self.kind == "boundary"

    @property
    def extents(self) -> np.ndarray:
        return np.delete(self.hi - self.lo, self.axis)

    @property
    def measure(self) -> float:
        return float(np.prod(self.extents))

    @property
    def width(self) -> float:
        return float(np.max(self.extents))


@dataclass(frozen=True, eq=False)
class Mesh:
    dim: int
    lo: np.ndarray
    hi: np.ndarray
    divisions: tuple
    elem_lo: np.ndarray
    elem_hi: np.ndarray
    faces: tuple
    # element -> tuple of (face index, sign); sign is +1 when the face normal
    # points out of the element
    element_faces: tuple = field(repr=False)

    @property
    def n_elements(self) -> int:
        return self.elem_lo.shape[0]

    @property
    def h(self) -> float:
        return mesh_width(self)

    @property
    def interior_faces(self) -> list:
        return [f for f in self.faces if not f.is_boundary]

    @property
    def boundary_faces(self) -> list:
        return [f for f in self.faces if f.is_boundary]

    def element_box(self, k: int):
        return self.elem_lo[k], self.elem_hi[k]

    def neighbours(self, k: int) -> list:
        out = []
        for fi, _ in self.element_faces[k]:
            f = self.faces[fi]
            if not f.is_boundary:
                out.append(f.owners[1] if f.owners[0] == k else f.owners[0])
        return out


def build_uniform_mesh(lo, hi, divisions) -> Mesh:
    """Partition the box ``[lo, hi]`` into ``prod(divisions)`` equal cells.

    Elements are numbered lexicographically over cell coordinates (last axis
    fastest), so the lower-indexed owner of every interior face is the cell on
    the low side of the face.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.ndim != 1 or lo.shape != hi.shape or lo.size not in (2, 3):
        raise InvalidConfigError("domain must be a 2D or 3D box")
    if np.any(hi <= lo):
        raise InvalidConfigError("degenerate domain: need hi > lo on every axis")
    dim = lo.size
    if np.isscalar(divisions):
        divisions = (int(divisions),) * dim
    divisions = tuple(int(d) for d in divisions)
    if len(divisions) != dim:
        raise InvalidConfigError(f"expected {dim} division counts, got {len(divisions)}")
    if any(d < 1 for d in divisions):
        raise InvalidConfigError(f"divisions must be >= 1, got {divisions}")

    step = (hi - lo) / np.array(divisions)
    cells = list(np.ndindex(*divisions))
    index = {c: k for k, c in enumerate(cells)}
    elem_lo = np.array([lo + step * np.array(c) for c in cells])
    elem_hi = np.array([lo + step * (np.array(c) + 1) for c in cells])
    # snap the outer layer onto the domain boundary exactly
    for a in range(dim):
        last = np.array([c[a] == divisions[a] - 1 for c in cells])
        elem_hi[last, a] = hi[a]

    faces = []
    for c in cells:
        k = index[c]
        for a in range(dim):
            if c[a] + 1 < divisions[a]:
                nb = list(c)
                nb[a] += 1
                j = index[tuple(nb)]
                flo, fhi = elem_lo[k].copy(), elem_hi[k].copy()
                flo[a] = fhi[a] = elem_hi[k, a]
                normal = np.zeros(dim)
                normal[a] = 1.0
                faces.append(Face("interior", (k, j), a, float(fhi[a]), flo, fhi, normal))
    for c in cells:
        k = index[c]
        for a in range(dim):
            for side, at_edge in ((-1.0, c[a] == 0), (1.0, c[a] == divisions[a] - 1)):
                if not at_edge:
                    continue
                flo, fhi = elem_lo[k].copy(), elem_hi[k].copy()
                x = elem_lo[k, a] if side < 0 else elem_hi[k, a]
                flo[a] = fhi[a] = x
                normal = np.zeros(dim)
                normal[a] = side
                faces.append(Face("boundary", (k,), a, float(x), flo, fhi, normal))

    element_faces = [[] for _ in cells]
    for fi, f in enumerate(faces):
        element_faces[f.owners[0]].append((fi, 1))
        if not f.is_boundary:
            element_faces[f.owners[1]].append((fi, -1))

    return Mesh(
        dim=dim,
        lo=lo,
        hi=hi,
        divisions=divisions,
        elem_lo=elem_lo,
        elem_hi=elem_hi,
        faces=tuple(faces),
        element_faces=tuple(tuple(ef) for ef in element_faces),
    )


def mesh_width(mesh: Mesh) -> float:
    """Largest element edge length."""
    return float(np.max(mesh.elem_hi - mesh.elem_lo))
