"""Outer Galerkin loop: grow a basis of trained plane-wave functions and re-solve.

Each iteration trains a normalized basis function ``phi_i`` that maximizes the
estimator against the current solution, appends it to the basis and solves
the small Gram system ``K u = F`` with ``K_lk = a(phi_k, phi_l)`` and
``F_l = L(phi_l)``. The loop stops once the estimator drops below ``tol``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .forms import DegenerateCandidateError
from .mesh import InvalidConfigError
from .planewave import l2_norm
from .trainer import BasisFunction, TrainConfig, augment_basis

CSV_HEADER = ["iteration", "width", "eta", "cond", "err_l2", "err_energy", "l2_indicator", "epochs"]
EPOCH_HEADER = ["iteration", "epoch", "eta", "grad_inf", "loss"]
TABLE_TITLE = "Condition number for the discontinuous Galerkin matrix at each iteration j."
STALL_FACTOR = 10.0


class SingularGramError(ArithmeticError):
    """The Gram matrix of the basis is not numerically positive definite."""


@dataclass(frozen=True)
class WidthSchedule:
    """Per-iteration network width: ``first + step * (i - 1)``.

    In 2D the width is the number of directions ``n``; in 3D it is the polar
    count ``m*`` (``2 m*^2`` directions).
    """

    first: int
    step: int = 0

    def __post_init__(self):
        if self.first < 1 or self.step < 0:
            raise InvalidConfigError(f"invalid width schedule first={self.first} step={self.step}")

    @classmethod
    def fixed(cls, n: int) -> "WidthSchedule":
        return cls(int(n), 0)

    @classmethod
    def growing(cls, first: int, dim: int = 2) -> "WidthSchedule":
        return cls(int(first), 2 if dim == 2 else 1)

    def width(self, i: int) -> int:
        return self.first + self.step * (i - 1)


@dataclass(eq=False)
class GalerkinState:
    basis: list = field(default_factory=list)
    K: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))
    F: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    solution_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    @property
    def solution(self) -> list:
        """The current solution as ``(coefficient, basis function)`` pairs."""
        return list(zip(self.solution_coeffs, self.basis))

    def trace(self, n_rows: int) -> np.ndarray:
        T = np.zeros(n_rows, dtype=complex)
        for c, phi in zip(self.solution_coeffs, self.basis):
            T += c * phi.trace
        return T


@dataclass
class IterationRow:
    iteration: int
    width: int
    eta: float
    cond: float
    err_l2: float
    err_energy: float
    l2_indicator: float
    epochs: int

    def values(self):
        return [getattr(self, h) for h in CSV_HEADER]


@dataclass(eq=False)
class RunReport:
    rows: list
    terminal_status: str  # converged | max_iter | stalled
    state: GalerkinState
    final_err_l2: float = float("nan")
    final_err_energy: float = float("nan")
    exact_l2: float = float("nan")
    exact_energy: float = float("nan")
    epoch_rows: list = field(default_factory=list)

    @property
    def final_rel_l2(self) -> float:
        return self.final_err_l2 / self.exact_l2

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r.values()])
        return buf.getvalue()

    def epochs_csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(EPOCH_HEADER)
        for r in self.epoch_rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def summary_table(self) -> str:
        js = ["j"] + [str(r.iteration) for r in self.rows]
        cs = ["cond(K^(j))"] + [f"{r.cond:.2f}" for r in self.rows]
        width = max(len(s) for s in js + cs)
        lines = [
            TABLE_TITLE,
            " ".join(s.rjust(width) for s in js),
            " ".join(s.rjust(width) for s in cs),
            f"status: {self.terminal_status}",
            f"final L2 error: {_fmt(self.final_err_l2)}",
            f"final energy error: {_fmt(self.final_err_energy)}",
        ]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.16e}"


def condition_number(K) -> float:
    """Ratio of the extreme eigenvalues of a Hermitian positive definite matrix."""
    K = np.asarray(K)
    if K.size == 0:
        return 1.0
    lam = np.linalg.eigvalsh(0.5 * (K + K.conj().T))
    if not lam[0] > 0:
        raise SingularGramError(f"Gram matrix is not positive definite (smallest eigenvalue {lam[0]:.3e})")
    return float(lam[-1] / lam[0])


def gram_matrix(traces) -> np.ndarray:
    """``K_lk = a(phi_k, phi_l)`` from the basis traces."""
    if not traces:
        return np.zeros((0, 0), dtype=complex)
    T = np.stack(traces, axis=1)
    return T.conj().T @ T


def dg_solve(state: GalerkinState, forms) -> np.ndarray:
    """Solve the Gram system of the current basis and store the coefficients."""
    traces = [phi.trace for phi in state.basis]
    state.K = gram_matrix(traces)
    state.F = np.array([np.vdot(t, forms.load) for t in traces], dtype=complex)
    if not traces:
        state.solution_coeffs = np.zeros(0, dtype=complex)
        return state.solution_coeffs
    if condition_number(state.K) > 1e14:
        raise SingularGramError("Gram matrix numerically singular: duplicate basis function")
    state.solution_coeffs = np.linalg.solve(state.K, state.F)
    return state.solution_coeffs


def l2_indicator(eta_value, phi: BasisFunction, mesh) -> float:
    """``eta * ||phi||_{L2}`` using the closed-form plane-wave Gram integrals."""
    if eta_value == 0:
        return 0.0
    return float(eta_value * l2_norm(phi.expansion, mesh))


class _L2Tracker:
    """Caches basis values at volume nodes to evaluate L2 errors cheaply."""

    def __init__(self, forms, exact, order=None):
        self.forms = forms
        self.rules = forms.volume_rules(order)
        self.weights = np.concatenate([r.weights for r in self.rules])
        self.exact = np.concatenate(
            [np.asarray(exact.evaluate(r.points, k)[0], dtype=complex).reshape(len(r), -1) for k, r in enumerate(self.rules)]
        )
        self.values = []

    def add(self, phi):
        self.values.append(
            np.concatenate(
                [np.asarray(phi.evaluate(r.points, k)[0], dtype=complex).reshape(len(r), -1) for k, r in enumerate(self.rules)]
            )
        )

    def error(self, coeffs) -> float:
        diff = self.exact.copy()
        for c, v in zip(coeffs, self.values):
            diff -= c * v
        return float(np.sqrt(np.sum(self.weights[:, None] * np.abs(diff) ** 2)))


def run(
    problem,
    mesh,
    schedule: WidthSchedule,
    tol: float = 1e-6,
    config: Optional[TrainConfig] = None,
    max_iter: int = 20,
    forms=None,
    track_errors: bool = True,
    volume_order=None,
    log=None,
) -> RunReport:
    """Grow the basis until ``eta <= tol``, ``max_iter`` iterations, or a stall.

    Every iteration ``i`` reports the estimator of the newly trained function
    against ``u_{i-1}`` together with the errors of ``u_{i-1}``.
    """
    if not tol > 0:
        raise InvalidConfigError("tol must be positive")
    if max_iter < 1:
        raise InvalidConfigError("max_iter must be >= 1")
    config = config or TrainConfig()
    if forms is None:
        forms = problem.forms(mesh)
    state = GalerkinState()
    exact_trace = forms.trace(problem.exact) if track_errors else None
    tracker = _L2Tracker(forms, problem.exact, volume_order) if track_errors else None
    exact_l2 = tracker.error([]) if track_errors else float("nan")
    exact_energy = float(np.linalg.norm(exact_trace)) if track_errors else float("nan")
    rows, epoch_rows = [], []
    status = "max_iter"
    prev_eta = None
    u_trace = np.zeros(forms.n_rows, dtype=complex)

    def errors():
        if not track_errors:
            return float("nan"), float("nan")
        return tracker.error(state.solution_coeffs), float(np.linalg.norm(exact_trace - u_trace))

    for i in range(1, max_iter + 1):
        width = schedule.width(i)
        err_l2, err_energy = errors()
        residual = forms.load - u_trace
        try:
            tr = augment_basis(None, width, mesh, forms, replace(config, seed=config.seed + i), residual=residual)
        except DegenerateCandidateError:
            cond = condition_number(state.K) if state.basis else 1.0
            rows.append(IterationRow(i, width, 0.0, cond, err_l2, err_energy, 0.0, 0))
            status = "converged"
            break
        epoch_rows.extend((i,) + h for h in tr.history)
        traces = [phi.trace for phi in state.basis] + [tr.phi.trace]
        cond = condition_number(gram_matrix(traces))
        row = IterationRow(i, width, tr.eta, cond, err_l2, err_energy, l2_indicator(tr.eta, tr.phi, mesh), tr.epochs)
        rows.append(row)
        if log is not None:
            log(row)
        if tr.eta <= tol:
            status = "converged"
            break
        if prev_eta is not None and tr.eta > STALL_FACTOR * prev_eta:
            status = "stalled"
            break
        prev_eta = tr.eta
        state.basis.append(tr.phi)
        if track_errors:
            tracker.add(tr.phi)
        dg_solve(state, forms)
        u_trace = state.trace(forms.n_rows)

    final_l2, final_energy = errors()
    return RunReport(
        rows=rows,
        terminal_status=status,
        state=state,
        final_err_l2=final_l2,
        final_err_energy=final_energy,
        exact_l2=exact_l2,
        exact_energy=exact_energy,
        epoch_rows=epoch_rows,
    )
