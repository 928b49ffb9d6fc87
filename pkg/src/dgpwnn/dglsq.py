"""Linear least-squares solve for the plane-wave coefficients at fixed directions.

With the directions frozen, maximizing the residual functional over the
coefficients is the least-squares problem ``min_c ||T c - r||`` where ``T``
stacks the weighted traces of all element-supported plane waves and ``r`` is
the trace residual ``G - T(u_prev)``. Its normal equations are
``A c = b`` with ``A_{kr,lj} = a(psi_lj, psi_kr)`` and
``b_kr = L(psi_kr) - a(u_prev, psi_kr)``.

Two solvers are provided. ``method="dense"`` forms ``A`` and solves it by a
truncated Hermitian eigendecomposition. ``method="block"`` (the default)
removes the ill-conditioning element by element: each element's trace block
is replaced by its truncated left singular basis, which turns the global
system into a sparse, well-conditioned one with identity diagonal blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

EIG_REL_TOL = 1e-12


class DegenerateSystemError(ArithmeticError):
    """The least-squares matrix is numerically zero."""


@dataclass(eq=False)
class LsqSystem:
    A: np.ndarray
    b: np.ndarray
    dof_map: np.ndarray  # (ndof, 2): element, local column


@dataclass(eq=False)
class DglsqResult:
    coeffs: np.ndarray  # (N, ncol)
    trace: np.ndarray  # weighted trace of the candidate
    rank: int
    blocks: list = field(default=None, repr=False)


def _residual_trace(forms, u_prev):
    if u_prev is None:
        return forms.load.copy()
    return forms.load - forms.trace(u_prev)


def _dense_trace_matrix(forms, blocks):
    ncols = [B.shape[1] for B in blocks]
    T = np.zeros((forms.n_rows, sum(ncols)), dtype=complex)
    start = 0
    for k, B in enumerate(blocks):
        T[forms.element_rows[k], start : start + ncols[k]] = B
        start += ncols[k]
    return T


def assemble_system(directions, u_prev, mesh, forms, blocks=None) -> LsqSystem:
    """Dense normal-equation system ``A c = b`` for the element-supported plane waves."""
    forms.check_directions(directions)
    if blocks is None:
        blocks = forms.element_blocks(directions)
    T = _dense_trace_matrix(forms, blocks)
    r = _residual_trace(forms, u_prev)
    A = T.conj().T @ T
    b = T.conj().T @ r
    dof_map = np.array([(k, j) for k, B in enumerate(blocks) for j in range(B.shape[1])], dtype=int)
    return LsqSystem(A=A, b=b, dof_map=dof_map)


def solve_regularized(system: LsqSystem, rel_tol: float = EIG_REL_TOL) -> np.ndarray:
    """Truncated-eigenspace solution of a Hermitian positive semidefinite system."""
    A, b = system.A, system.b
    if not np.any(b):
        return np.zeros_like(b, dtype=complex)
    lam, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    lam_max = lam[-1] if lam.size else 0.0
    if not lam_max > np.finfo(float).tiny:
        raise DegenerateSystemError("least-squares matrix is numerically zero")
    keep = lam > rel_tol * lam_max
    Vk = V[:, keep]
    return Vk @ ((Vk.conj().T @ b) / lam[keep])


def relative_residual(system: LsqSystem, c) -> float:
    nb = np.linalg.norm(system.b)
    return 0.0 if nb == 0 else float(np.linalg.norm(system.A @ c - system.b) / nb)


def _block_solve(forms, blocks, r, rel_tol):
    sv_tol = np.sqrt(rel_tol)
    n_el = len(blocks)
    bases, maps, sizes = [], [], []
    for B in blocks:
        U, s, Vh = np.linalg.svd(B, full_matrices=False)
        keep = s > sv_tol * s[0] if s.size and s[0] > 0 else np.zeros(s.size, dtype=bool)
        bases.append(U[:, keep])
        maps.append(Vh[keep].conj().T / s[keep])
        sizes.append(int(keep.sum()))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    R = int(offsets[-1])
    if R == 0:
        raise DegenerateSystemError("all element trace blocks vanish")
    # reduced matrix: identity diagonal blocks plus one coupling block per interior face
    rows, cols, vals = [np.arange(R)], [np.arange(R)], [np.ones(R, dtype=complex)]
    for (k, sk), (j, sj) in forms.interior_face_pairs():
        C = bases[k][sk].conj().T @ bases[j][sj]
        ri, ci = np.meshgrid(np.arange(offsets[k], offsets[k + 1]), np.arange(offsets[j], offsets[j + 1]), indexing="ij")
        rows += [ri.ravel(), ci.ravel()]
        cols += [ci.ravel(), ri.ravel()]
        vals += [C.ravel(), C.conj().ravel()]
    Ahat = scipy.sparse.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(R, R)
    )
    bhat = np.concatenate([bases[k].conj().T @ r[forms.element_rows[k]] for k in range(n_el)])
    if not np.any(bhat):
        chat = np.zeros(R, dtype=complex)
    else:
        chat = None
        try:
            chat = scipy.sparse.linalg.splu(Ahat).solve(bhat)
            if not np.all(np.isfinite(chat)):
                chat = None
        except RuntimeError:
            chat = None
        if chat is None:
            Ad = Ahat.toarray()
            lam, V = scipy.linalg.eigh(0.5 * (Ad + Ad.conj().T))
            keep = lam > rel_tol * lam[-1]
            chat = V[:, keep] @ ((V[:, keep].conj().T @ bhat) / lam[keep])
    coeffs, trace = [], np.zeros(forms.n_rows, dtype=complex)
    for k in range(n_el):
        ck = chat[offsets[k] : offsets[k + 1]]
        coeffs.append(maps[k] @ ck)
        trace[forms.element_rows[k]] += bases[k] @ ck
    return np.array(coeffs), trace, R


def dglsq_solve(forms, directions, u_prev=None, blocks=None, method="block", rel_tol=EIG_REL_TOL, residual=None):
    """Least-squares coefficients of the next candidate and its weighted trace.

    ``residual`` may supply the precomputed trace residual ``G - T(u_prev)``.
    """
    forms.check_directions(directions)
    if blocks is None:
        blocks = forms.element_blocks(directions)
    r = _residual_trace(forms, u_prev) if residual is None else residual
    if method == "block":
        coeffs, trace, rank = _block_solve(forms, blocks, r, rel_tol)
    elif method == "dense":
        T = _dense_trace_matrix(forms, blocks)
        system = LsqSystem(A=T.conj().T @ T, b=T.conj().T @ r, dof_map=None)
        c = solve_regularized(system, rel_tol)
        trace = T @ c
        ncol = blocks[0].shape[1]
        coeffs = c.reshape(len(blocks), ncol)
        rank = int(np.linalg.matrix_rank(system.A, hermitian=True, rtol=rel_tol)) if np.any(system.b) else 0
    else:
        raise ValueError(f"unknown dGLSQ method {method!r}")
    return DglsqResult(coeffs=coeffs, trace=trace, rank=rank, blocks=blocks)


def dglsq_r(directions, u_prev, mesh, forms, method="block"):
    """Coefficients and the (un-normalized) candidate expansion for fixed directions."""
    res = dglsq_solve(forms, directions, u_prev, method=method)
    return res.coeffs, forms.expansion(directions, res.coeffs)


def write_system(system: LsqSystem, path) -> None:
    """Text dump: header ``rows cols``, then ``A`` row-major, then ``b``, one ``re im`` pair per line."""
    n = system.A.shape[0]
    with open(path, "w") as fh:
        fh.write(f"{n} {system.A.shape[1]}\n")
        for z in system.A.ravel():
            fh.write(f"{z.real:.17e} {z.imag:.17e}\n")
        for z in system.b:
            fh.write(f"{z.real:.17e} {z.imag:.17e}\n")


def read_system(path) -> LsqSystem:
    with open(path) as fh:
        n, m = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    z = data[:, 0] + 1j * data[:, 1]
    return LsqSystem(A=z[: n * m].reshape(n, m), b=z[n * m :], dof_map=None)
