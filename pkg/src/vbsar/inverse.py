"""Row solvers: damped Newton with filtered SVD steps, and BFGS variants.

All solvers act on one cross-track row. The data misfit is the stacked
real residual F(u) = [Re(D - I(u)); Im(D - I(u))] of length 2n. The
Newton solver (tag "nl") linearizes F and takes damped least-squares
steps built from the SVD of the Jacobian with filter factors
sigma/(sigma^2 + alpha), alpha defaulting to the squared largest
singular value. The functional-minimization solver (tag "fm") runs BFGS
on G(u) = 0.5 ||F(u)||^2 with the analytic gradient, computed fused with
the forward evaluation. The finite-difference baseline (tag "dfm") is
the identical BFGS driver with the gradient replaced by central
differences of G, costing 2n forward evaluations per gradient call.
All iterative solvers start from u = 0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import SolverOptions
from .forward import RowOperator

# strong Wolfe constants: standard sufficient-decrease and curvature values
WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
MAX_LINE_SEARCH_PROBES = 25
MAX_STEP_HALVINGS = 20


class SolverError(RuntimeError):
    """Raised when a linear-algebra step fails irrecoverably."""


@dataclass
class InversionResult:
    u_est: np.ndarray
    tag: str
    iterations: int
    residual_norms: list[float] = field(default_factory=list)
    seconds: float = 0.0
    converged: bool = False
    forward_evals: int = 0
    message: str = ""


def stack_complex(values: np.ndarray) -> np.ndarray:
    """[Re; Im] stacking of a complex row into a real vector."""
    return np.concatenate([values.real, values.imag])


def unstack_complex(stacked: np.ndarray) -> np.ndarray:
    half = stacked.shape[0] // 2
    return stacked[:half] + 1j * stacked[half:]


def residual(u: np.ndarray, data: np.ndarray, op: RowOperator) -> np.ndarray:
    """Stacked residual F(u) = stack(D - I(u))."""
    return stack_complex(data - op.image(u))


def residual_and_jacobian(u: np.ndarray, data: np.ndarray, op: RowOperator):
    """F(u) and its Jacobian dF/du as a real (2n, n) matrix."""
    image, dimg = op.image_and_jacobian(u)
    f = stack_complex(data - image)
    jac = np.vstack([-dimg.real, -dimg.imag])
    return f, jac


def tikhonov_step(jac: np.ndarray, f: np.ndarray, alpha: float | None = None) -> np.ndarray:
    """Damped least-squares step from the SVD of the Jacobian.

    h = -sum_i sigma_i/(sigma_i^2 + alpha) (u_i . F) v_i, with alpha the
    squared largest singular value unless overridden. A zero Jacobian
    yields a zero step.
    """
    try:
        u_svd, sigma, vt = np.linalg.svd(jac, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"SVD failed in the damped step: {exc}") from exc
    if sigma[0] == 0.0:
        return np.zeros(jac.shape[1])
    if alpha is None or alpha == 0.0:
        alpha = sigma[0] ** 2
    filtered = sigma / (sigma**2 + alpha) * (u_svd.T @ f)
    return -(vt.T @ filtered)


def newton_solve(data: np.ndarray, op: RowOperator, opts: SolverOptions) -> InversionResult:
    """Damped Newton iteration on the stacked residual (tag "nl").

    Steps that increase ||F|| are halved up to MAX_STEP_HALVINGS times;
    a step that cannot decrease the residual ends the iteration with the
    convergence flag still reflecting the tolerances.
    """
    t0 = time.perf_counter()
    n = op.n
    u = np.zeros(n)
    alpha = opts.regularization if opts.regularization > 0 else None
    f, jac = residual_and_jacobian(u, data, op)
    norm_f = float(np.linalg.norm(f))
    norm_data = float(np.linalg.norm(stack_complex(data)))
    norms = [norm_f]
    converged = False
    message = "iteration budget exhausted"
    iterations = 0
    for iterations in range(1, opts.max_iterations + 1):
        step = tikhonov_step(jac, f, alpha)
        if not np.any(step):
            converged = True
            message = "zero step (stationary residual)"
            iterations -= 1
            break
        scale = 1.0
        accepted = False
        for _ in range(MAX_STEP_HALVINGS):
            trial = u + scale * step
            trial_norm = float(np.linalg.norm(residual(trial, data, op)))
            if trial_norm <= norm_f:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            message = "damping failed to decrease the residual"
            iterations -= 1
            break
        u = u + scale * step
        f, jac = residual_and_jacobian(u, data, op)
        norm_f = float(np.linalg.norm(f))
        norms.append(norm_f)
        step_size = float(np.linalg.norm(scale * step))
        if step_size / max(1.0, float(np.linalg.norm(u))) < opts.step_tolerance:
            converged = True
            message = "step tolerance reached"
            break
        if norm_f < opts.residual_tolerance * norm_data:
            converged = True
            message = "residual tolerance reached"
            break
    if op.truncation_warning:
        message += "; forward truncation warning"
    return InversionResult(
        u_est=u, tag="nl", iterations=iterations, residual_norms=norms,
        seconds=time.perf_counter() - t0, converged=converged,
        forward_evals=op.value_evals + op.derivative_evals, message=message,
    )


def functional_gradient(u: np.ndarray, data: np.ndarray, op: RowOperator) -> np.ndarray:
    """Gradient of G(u) = 0.5 ||F(u)||^2 via the adjoint of the linearization.

    grad_j = -sum_r Re{ (d image_r / d u_j) * conj(D_r - image_r) },
    which equals J^T F for the stacked real formulation.
    """
    image, dimg = op.image_and_jacobian(u)
    misfit = data - image
    return -np.real(dimg.T @ np.conj(misfit))


def objective_with_gradient(data: np.ndarray, op: RowOperator):
    """Fused (G, grad G) callback for the analytic-gradient minimizer."""

    def value_and_gradient(u: np.ndarray):
        image, dimg = op.image_and_jacobian(u)
        misfit = data - image
        value = 0.5 * float(np.real(misfit @ np.conj(misfit)))
        grad = -np.real(dimg.T @ np.conj(misfit))
        return value, grad

    return value_and_gradient


def objective_fd_gradient(data: np.ndarray, op: RowOperator, fd_step: float = 0.0):
    """(G, grad G) callback using central differences of the discrete G.

    Each gradient costs exactly 2n forward evaluations plus one for the
    value itself. The per-coordinate step is eps_j = base * max(1, |u_j|)
    with base = sqrt(machine epsilon) unless overridden.
    """
    base = fd_step if fd_step > 0 else float(np.sqrt(np.finfo(float).eps))

    def value_only(u: np.ndarray) -> float:
        misfit = data - op.image(u)
        return 0.5 * float(np.real(misfit @ np.conj(misfit)))

    def value_and_gradient(u: np.ndarray):
        value = value_only(u)
        grad = np.empty_like(u)
        for j in range(u.shape[0]):
            eps = base * max(1.0, abs(u[j]))
            up = u.copy()
            up[j] += eps
            down = u.copy()
            down[j] -= eps
            grad[j] = (value_only(up) - value_only(down)) / (2.0 * eps)
        return value, grad

    return value_and_gradient


def _strong_wolfe(value_and_gradient, u, direction, f0, g0):
    """Bracket-and-zoom line search meeting strong Wolfe conditions.

    Evaluates value and gradient together at every probe. Returns
    (step, value, gradient) or None when no acceptable step is found.
    """
    dphi0 = float(g0 @ direction)
    if dphi0 >= 0.0:
        return None

    def probe(a):
        f, g = value_and_gradient(u + a * direction)
        return f, g, float(g @ direction)

    def zoom(lo, hi, f_lo):
        a, f, g = lo, f0, g0
        for _ in range(MAX_LINE_SEARCH_PROBES):
            a = 0.5 * (lo + hi)
            f, g, dphi = probe(a)
            if f > f0 + WOLFE_C1 * a * dphi0 or f >= f_lo:
                hi = a
            else:
                if abs(dphi) <= -WOLFE_C2 * dphi0:
                    return a, f, g
                if dphi * (hi - lo) >= 0.0:
                    hi = lo
                lo, f_lo = a, f
            if abs(hi - lo) < 1e-14 * max(1.0, abs(lo)):
                return a, f, g
        return a, f, g

    a_prev, f_prev = 0.0, f0
    a = 1.0
    for i in range(MAX_LINE_SEARCH_PROBES):
        f, g, dphi = probe(a)
        if f > f0 + WOLFE_C1 * a * dphi0 or (i > 0 and f >= f_prev):
            return zoom(a_prev, a, f_prev)
        if abs(dphi) <= -WOLFE_C2 * dphi0:
            return a, f, g
        if dphi >= 0.0:
            return zoom(a, a_prev, f)
        a_prev, f_prev = a, f
        a = 2.0 * a
    return None


def bfgs_minimize(value_and_gradient, n: int, opts: SolverOptions, tag: str,
                  op: RowOperator) -> InversionResult:
    """Dense BFGS with strong Wolfe line search, shared by "fm" and "dfm".

    Records sqrt(2 G) per iteration so the trace is comparable with the
    Newton solver's residual norms. A failed line search falls back to one
    steepest-descent restart; failing that too ends the run unconverged.
    """
    t0 = time.perf_counter()
    u = np.zeros(n)
    f, g = value_and_gradient(u)
    h_inv = np.eye(n)
    norms = [float(np.sqrt(2.0 * f))]
    converged = False
    message = "iteration budget exhausted"
    first_update = True
    iterations = 0
    for iterations in range(1, opts.max_iterations + 1):
        direction = -h_inv @ g
        found = _strong_wolfe(value_and_gradient, u, direction, f, g)
        if found is None:
            # restart from steepest descent with a simple backtracking probe
            h_inv = np.eye(n)
            direction = -g
            slope = float(g @ direction)
            a, ok = 1.0, False
            for _ in range(2 * MAX_STEP_HALVINGS):
                f_try, g_try = value_and_gradient(u + a * direction)
                if f_try <= f + WOLFE_C1 * a * slope:
                    ok = True
                    break
                a *= 0.5
            if not ok:
                message = "line search failed"
                iterations -= 1
                break
            found = (a, f_try, g_try)
        a, f_new, g_new = found
        step = a * direction
        y_diff = g_new - g
        sy = float(step @ y_diff)
        if first_update and sy > 0.0:
            # scale the initial inverse Hessian to the first curvature pair
            h_inv *= sy / float(y_diff @ y_diff)
            first_update = False
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(y_diff):
            rho = 1.0 / sy
            hy = h_inv @ y_diff
            h_inv -= np.outer(hy, step) * rho + np.outer(step, hy) * rho
            h_inv += np.outer(step, step) * (rho * rho * float(y_diff @ hy) + rho)
        u, f, g = u + step, f_new, g_new
        norms.append(float(np.sqrt(2.0 * f)))
        if np.linalg.norm(step) / max(1.0, float(np.linalg.norm(u))) < opts.step_tolerance:
            converged = True
            message = "step tolerance reached"
            break
        if float(np.linalg.norm(g)) < opts.residual_tolerance * (1.0 + f):
            converged = True
            message = "gradient tolerance reached"
            break
    if op.truncation_warning:
        message += "; forward truncation warning"
    return InversionResult(
        u_est=u, tag=tag, iterations=iterations, residual_norms=norms,
        seconds=time.perf_counter() - t0, converged=converged,
        forward_evals=op.value_evals + op.derivative_evals, message=message,
    )


def bfgs_solve(data: np.ndarray, op: RowOperator, opts: SolverOptions) -> InversionResult:
    """BFGS with the analytic functional gradient (tag "fm")."""
    return bfgs_minimize(objective_with_gradient(data, op), op.n, opts, "fm", op)


def dfm_solve(data: np.ndarray, op: RowOperator, opts: SolverOptions) -> InversionResult:
    """BFGS with central finite-difference gradients (tag "dfm")."""
    callback = objective_fd_gradient(data, op, opts.fd_step)
    return bfgs_minimize(callback, op.n, opts, "dfm", op)
