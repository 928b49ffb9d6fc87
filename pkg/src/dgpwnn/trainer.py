"""Training of one plane-wave basis function by gradient ascent on the estimator eta.

For fixed directions the coefficients come from the least-squares solve; the
directions are then moved by one Adam step along the gradient of
``eta(u_prev, v) = Re<r, v> / |||v|||``. Because the coefficients maximize
eta over the current span, the partial derivative at fixed coefficients is
the full derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dglsq import dglsq_solve
from .forms import NORM_FLOOR, DegenerateCandidateError
from .planewave import PWExpansion, init_directions


@dataclass
class TrainConfig:
    max_epochs: int = 500
    grad_tol: float = 1e-6
    lr0: float = 0.01
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    method: str = "block"
    # "relative" stops when ||grad||_inf < grad_tol * eta, "absolute" when < grad_tol
    grad_rule: str = "relative"

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not self.lr0 > 0:
            raise ValueError("lr0 must be positive")
        if self.grad_rule not in ("relative", "absolute"):
            raise ValueError(f"grad_rule must be 'relative' or 'absolute', got {self.grad_rule!r}")

    def converged(self, grad_inf: float, eta: float) -> bool:
        scale = abs(eta) if self.grad_rule == "relative" else 1.0
        return grad_inf < self.grad_tol * scale


@dataclass(eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr0: float = 0.01

    @classmethod
    def fresh(cls, shape, config: TrainConfig | None = None) -> "AdamState":
        c = config or TrainConfig()
        return cls(np.zeros(shape), np.zeros(shape), 0, c.beta1, c.beta2, c.eps_adam, c.lr0)


def adam_step(state: AdamState, D, gradient, ascend=True):
    """One bias-corrected Adam update with step size ``lr0 / sqrt(step)``.

    Returns the updated (wrapped and pole-corrected) directions and a new state.
    """
    g = np.asarray(gradient, dtype=float)
    if g.shape != state.m.shape:
        raise ValueError(f"gradient shape {g.shape} does not match optimizer state {state.m.shape}")
    t = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    m_hat = m / (1 - state.beta1**t)
    v_hat = v / (1 - state.beta2**t)
    lr = state.lr0 / np.sqrt(t)
    delta = lr * m_hat / (np.sqrt(v_hat) + state.eps)
    angles = D.angles + (delta if ascend else -delta)
    new_state = replace(state, m=m, v=v, step=t)
    return D.with_angles(angles).normalized(), new_state


def eta_gradient(forms, directions, coeffs, dblocks, cand_trace, residual, rng=None):
    """Gradient of eta with respect to every direction angle, shape ``(N, P)``.

    ``dblocks[k]`` is the derivative of element ``k``'s trace block with respect
    to the direction components; ``coeffs`` are held fixed.
    """
    nv = np.linalg.norm(cand_trace)
    if nv <= NORM_FLOOR:
        raise DegenerateCandidateError(f"candidate energy norm {nv:.3e} below floor")
    rv = np.vdot(cand_trace, residual).real
    Z = residual / nv - (rv / nv**3) * cand_trace
    n_dir = directions.width
    grad = np.zeros_like(directions.angles)
    for k in range(forms.mesh.n_elements):
        idx = forms.element_rows[k]
        dB = dblocks[k]
        if rng is not None:
            perm = rng.permutation(idx.size)
            idx, dB = idx[perm], dB[perm]
        # Y[j, i] = Re sum_r Z_r conj(c_j dB[r, j, i])
        Y = np.real(np.einsum("r,rji->ji", Z[idx], dB.conj()) * coeffs[k].conj()[:, None])
        Yd = Y.reshape(-1, n_dir, Y.shape[1]).sum(axis=0)  # merge the two Maxwell branches
        grad[k] = np.einsum("li,lip->p", Yd, directions.jacobian(k))
    return grad


def grad_eta(u_prev, candidate: PWExpansion, mesh, forms, rng=None):
    """Gradient of ``eta(u_prev, candidate)`` over the candidate's direction angles."""
    D = candidate.directions
    blocks = forms.element_blocks(D, derivatives=True)
    dblocks = [b[1] for b in blocks]
    residual = forms.load - forms.trace(u_prev)
    return eta_gradient(forms, D, candidate.coeffs, dblocks, forms.trace(candidate), residual, rng)


@dataclass(eq=False)
class BasisFunction:
    expansion: PWExpansion
    trace: np.ndarray  # weighted trace, unit norm

    @property
    def width(self) -> int:
        return self.expansion.directions.width

    def evaluate(self, x, k):
        return self.expansion.evaluate(x, k)


@dataclass(eq=False)
class TrainResult:
    phi: BasisFunction
    eta: float
    epochs: int
    grad_inf: float
    history: list = field(default_factory=list)  # (epoch, eta, grad_inf, loss)
    initial_eta: float = float("nan")


def _solve(forms, D, residual, method):
    blocks = forms.element_blocks(D, derivatives=True)
    res = dglsq_solve(forms, D, blocks=[b[0] for b in blocks], residual=residual, method=method)
    nv = np.linalg.norm(res.trace)
    if nv <= NORM_FLOOR:
        raise DegenerateCandidateError(f"candidate energy norm {nv:.3e} below floor")
    eta = float(np.vdot(res.trace, residual).real / nv)
    return res, [b[1] for b in blocks], eta


def augment_basis(u_prev, width, mesh, forms, config: TrainConfig | None = None, residual=None) -> TrainResult:
    """Train one normalized basis function of the given width against ``u_prev``.

    ``u_prev`` may be None, a trace vector or anything ``forms.trace`` accepts;
    ``residual`` may pass ``G - T(u_prev)`` directly. Raises
    :class:`DegenerateCandidateError` when the residual is already orthogonal
    to every candidate of this width.
    """
    config = config or TrainConfig()
    if width < 1:
        raise ValueError("width must be >= 1")
    if residual is None:
        residual = forms.load - forms.trace(u_prev)
    rng = np.random.default_rng(config.seed)
    D = init_directions(mesh.dim, width, mesh.n_elements)
    res, dblocks, eta = _solve(forms, D, residual, config.method)
    best = (eta, D, res)
    initial_eta = eta
    state = AdamState.fresh(D.angles.shape, config)
    history = []
    epochs = 0
    grad_inf = float("nan")
    for epoch in range(config.max_epochs + 1):
        grad = eta_gradient(forms, D, res.coeffs, dblocks, res.trace, residual, rng)
        grad_inf = float(np.max(np.abs(grad)))
        loss = float(np.linalg.norm(residual - res.trace) ** 2)
        history.append((epoch, eta, grad_inf, loss))
        if config.converged(grad_inf, eta) or epoch == config.max_epochs:
            break
        D, state = adam_step(state, D, grad, ascend=True)
        epochs += 1
        try:
            res, dblocks, eta = _solve(forms, D, residual, config.method)
        except DegenerateCandidateError:
            break
        if eta > best[0]:
            best = (eta, D, res)
    eta, D, res = best
    nv = np.linalg.norm(res.trace)
    phi = BasisFunction(forms.expansion(D, res.coeffs / nv), res.trace / nv)
    return TrainResult(phi=phi, eta=eta, epochs=epochs, grad_inf=grad_inf, history=history, initial_eta=initial_eta)
