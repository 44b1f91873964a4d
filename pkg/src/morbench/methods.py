"""Reference implementations of balanced truncation with two Gramian backends.

Two in-repo "packages" are registered for the method ``bt``:

``sign``
    Algebraic backend. Controllability and observability Gramians are
    obtained as low-rank factors from a Newton iteration for the matrix
    sign function with determinant scaling, solving the (generalized)
    Lyapunov equations

        A P E^T + E P A^T + B B^T = 0,
        A^T Q E + E^T Q A + C^T C = 0.

``emp``
    Empirical backend. Gramians are assembled by trapezoidal quadrature
    of impulse-response snapshots computed with classical fourth-order
    Runge-Kutta; observability uses the dual system.

Both feed the same square-root balancing step, which truncates states by
Hankel singular value and returns a reduced model with an identity E.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import (
    BalanceError,
    DimensionMismatch,
    NonFinite,
    SchemaError,
    SignDivergence,
    SingularMatrix,
    UnknownMethod,
)
from .model import AlgorithmIsotope, LtiSystem, ReducedModel

#: Convergence threshold of the sign iteration, relative Frobenius norm.
SIGN_CONV_TOL = 1e-10

#: Iteration cap; stagnation short of convergence raises SignDivergence.
SIGN_MAX_ITER = 100

#: Defaults shared by every isotope.
DEFAULT_TOL = 1e-6

#: Defaults of the empirical backend's quadrature.
DEFAULT_T_FINAL = 10.0
DEFAULT_STEPS = 1000


@dataclass(frozen=True)
class GramianPair:
    """Low-rank Gramian factors: P = lp @ lp.T, Q = lq @ lq.T."""

    lp: np.ndarray
    lq: np.ndarray
    backend: str


@dataclass(frozen=True)
class MethodRegistryEntry:
    """One registered (method, implementation) pair."""

    method_id: str
    impl_id: str
    default_params: dict
    description: str
    reducer: callable


def _sign_iteration(a, f=None, maxiter=SIGN_MAX_ITER, conv_tol=SIGN_CONV_TOL):
    """Scaled Newton iteration a <- (c*a + inv(a)/c) / 2 for the matrix sign.

    ``c`` is the determinant scaling |det a|^(-1/n), computed from the LU
    diagonal in log space to avoid overflow. When ``f`` is given, the
    right-hand-side factor of a Lyapunov equation is propagated alongside
    as f <- [sqrt(c)*f, inv(a) @ f / sqrt(c)] / sqrt(2), with column
    compression once the factor grows past n columns.

    Returns ``(sign, f, converged)`` where ``converged`` reports whether
    the iteration reached -I; a False value means the iteration settled on
    a sign with at least one +1 eigendirection (a is not Hurwitz).

    Raises :class:`SignDivergence` if an iterate is numerically singular
    (spectrum touching the imaginary axis) or the iteration neither
    converges nor settles within ``maxiter`` steps.
    """
    n = a.shape[0]
    if n == 0:
        return a.copy(), None if f is None else f.copy(), True
    a = np.array(a, dtype=float)
    if f is not None:
        f = np.array(f, dtype=float)
    eye = np.eye(n)
    for _ in range(maxiter):
        try:
            lu = linalg.lu_factor(a)
        except SingularMatrix as exc:
            raise SignDivergence(f"singular iterate in sign iteration: {exc}")
        c = math.exp(-linalg.log_abs_det(lu) / n)
        a_inv = linalg.solve(lu, eye)
        a_next = 0.5 * (c * a + a_inv / c)
        if f is not None:
            sqrt_c = math.sqrt(c)
            f = np.hstack([sqrt_c * f, linalg.solve(lu, f) / sqrt_c]) / math.sqrt(2.0)
            if f.shape[1] > n:
                f, _ = linalg.cholesky_psd(f @ f.T, rank_tol=1e-14)
        norm_next = np.linalg.norm(a_next)
        err = np.linalg.norm(a_next + eye) / max(norm_next, 1e-300)
        step = np.linalg.norm(a_next - a) / max(np.linalg.norm(a), 1e-300)
        a = a_next
        if err <= conv_tol:
            return a, f, True
        if step <= 1e-13:
            # iteration settled on a sign different from -I
            return a, f, False
    raise SignDivergence(
        f"sign iteration did not settle within {maxiter} steps "
        "(eigenvalues on or near the imaginary axis)")


def matrix_sign(a, maxiter=SIGN_MAX_ITER):
    """Matrix sign function of a, raising SignDivergence on stagnation."""
    sign, _, _ = _sign_iteration(np.asarray(a, dtype=float), None, maxiter)
    return sign


def lyap_sign(a_hat, f, maxiter=SIGN_MAX_ITER):
    """Solve a_hat X + X a_hat^T + f f^T = 0 for a low-rank factor of X.

    ``a_hat`` must be Hurwitz (all eigenvalues in the open left
    half-plane); the solution is returned as Z with X = Z @ Z.T.

    Raises
    ------
    SignDivergence
        If the iteration hits a singular iterate, stagnates, or settles on
        a sign other than -I (a_hat not Hurwitz).
    """
    a_hat = np.asarray(a_hat, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if a_hat.shape[0] != f.shape[0]:
        raise DimensionMismatch(
            f"factor has {f.shape[0]} rows, matrix has order {a_hat.shape[0]}")
    sign, f_final, converged = _sign_iteration(a_hat, f, maxiter)
    if not converged:
        raise SignDivergence("matrix is not Hurwitz (sign differs from -I)")
    return f_final / math.sqrt(2.0)


def _standardized(system):
    """inv(E) A, inv(E) B and the dual pair inv(E^T) A^T, inv(E^T) C^T."""
    a, b, c, e = system.a, system.b, system.c, system.e
    if e is None:
        return a, b, a.T, c.T
    lu = linalg.lu_factor(e)
    lu_t = linalg.lu_factor(e.T)
    return (linalg.solve(lu, a), linalg.solve(lu, b),
            linalg.solve(lu_t, a.T), linalg.solve(lu_t, c.T))


def gramians_sign(system):
    """Gramian factors of a stable system from the sign-function solver.

    With a_std = inv(E) A the controllability factor solves the
    standardized equation for inv(E)B, and the observability factor uses
    the standardized dual pencil inv(E^T) A^T with inv(E^T) C^T, so that
    P = lp lp^T and Q = lq lq^T satisfy the generalized Lyapunov
    equations stated in the module docstring.
    """
    a_std, b_std, a_dual, c_dual = _standardized(system)
    lp = lyap_sign(a_std, b_std)
    lq = lyap_sign(a_dual, c_dual)
    return GramianPair(lp=lp, lq=lq, backend="sign")


def _rk4_flow(a_hat, h):
    """One-step propagator of x' = a_hat x for classical RK4 at step h."""
    n = a_hat.shape[0]
    eye = np.eye(n)
    ha = h * a_hat
    return eye + ha @ (eye + ha @ (eye / 2.0 + ha @ (eye / 6.0 + ha / 24.0)))


def _rk4_snapshots(a_hat, x0, t_final, steps):
    """Snapshots of x' = a_hat x at steps+1 uniform times including t=0."""
    phi = _rk4_flow(a_hat, t_final / steps)
    snaps = np.empty((steps + 1,) + x0.shape)
    snaps[0] = x0
    x = x0
    for k in range(steps):
        x = phi @ x
        if not np.all(np.isfinite(x)):
            raise NonFinite(
                f"state overflow at step {k + 1}/{steps}; the system may be "
                "unstable or the step too large for the fast modes")
        snaps[k + 1] = x
    return snaps


def simulate_impulse(system, t_final, steps):
    """Impulse-response state snapshots by fixed-step fourth-order Runge-Kutta.

    Integrates x' = inv(E) A x from x_j(0) = (inv(E) B) e_j for every
    input column j simultaneously, with h = t_final / steps. Returns a
    (steps+1) x n x m tensor including the initial state.

    Raises :class:`NonFinite` when the state overflows (unstable system or
    a step size outside the method's stability region).
    """
    if t_final <= 0:
        raise DimensionMismatch("t_final must be positive")
    if steps < 1:
        raise DimensionMismatch("steps must be at least 1")
    a_std, b_std, _, _ = _standardized(system)
    return _rk4_snapshots(a_std, b_std, float(t_final), int(steps))


def gramians_emp(system, t_final=DEFAULT_T_FINAL, steps=DEFAULT_STEPS):
    """Empirical Gramian factors by quadrature of impulse-response snapshots.

    P is approximated as sum_k w_k X(t_k) X(t_k)^T with trapezoidal
    weights over [0, t_final]; observability runs the dual system (the
    standardized transposed pencil, input matrix C^T). Factors come from
    the semidefinite Cholesky of the assembled sums.

    Accuracy depends on the horizon covering the slowest decay and on the
    step resolving the fastest mode; a too-short horizon truncates the
    integral (documented behavior, not an error).
    """
    if t_final <= 0:
        raise DimensionMismatch("t_final must be positive")
    if steps < 1:
        raise DimensionMismatch("steps must be at least 1")
    t_final = float(t_final)
    steps = int(steps)
    a_std, b_std, a_dual, c_dual = _standardized(system)
    h = t_final / steps
    sqrt_w = np.full(steps + 1, math.sqrt(h))
    sqrt_w[0] = sqrt_w[-1] = math.sqrt(h / 2.0)

    def assemble(a_mat, x0):
        snaps = _rk4_snapshots(a_mat, x0, t_final, steps)
        scaled = (snaps * sqrt_w[:, None, None]).transpose(1, 0, 2)
        stacked = scaled.reshape(snaps.shape[1], -1)
        factor, _ = linalg.cholesky_psd(stacked @ stacked.T)
        return factor

    lp = assemble(a_std, b_std)
    lq = assemble(a_dual, c_dual)
    return GramianPair(lp=lp, lq=lq, backend="emp")


def balance_truncate(system, gram, tol=DEFAULT_TOL, max_order=None):
    """Square-root balanced truncation given Gramian factors.

    The Hankel singular values are the singular values of
    ``lq.T @ E @ lp`` (E omitted when implicit). The reduced order r is
    the number of values above ``tol`` times the largest one, capped by
    ``max_order``; the resulting Petrov-Galerkin projection
    W = lq U_1 S_1^(-1/2), T = lp V_1 S_1^(-1/2) yields the reduced system
    (I, W^T A T, W^T B, C T, D). W^T E T = I is enforced to within 1e-8
    (a final bi-orthonormalization absorbs rounding from small singular
    values).

    A zero leading singular value (B or C zero) yields an order-0 model
    carrying only the feedthrough.
    """
    if max_order is None:
        max_order = system.n
    if max_order < 0:
        raise DimensionMismatch("max_order must be nonnegative")
    product = gram.lq.T @ (system.e @ gram.lp) if system.e is not None \
        else gram.lq.T @ gram.lp
    u, hsv, v = linalg.jacobi_svd(product)
    if hsv.size == 0 or hsv[0] == 0.0:
        empty = LtiSystem(a=np.zeros((0, 0)), b=np.zeros((0, system.m)),
                          c=np.zeros((system.q, 0)), d=system.d)
        return ReducedModel(system=empty, r=0, hsv=hsv, truncation_tail=0.0)

    r = int(np.sum(hsv > tol * hsv[0]))
    r = min(r, int(max_order), hsv.size)
    if r == 0:
        empty = LtiSystem(a=np.zeros((0, 0)), b=np.zeros((0, system.m)),
                          c=np.zeros((system.q, 0)), d=system.d)
        return ReducedModel(system=empty, r=0, hsv=hsv,
                            truncation_tail=float(np.sum(hsv)))

    scale = np.sqrt(hsv[:r])
    w_proj = gram.lq @ u[:, :r] / scale
    t_proj = gram.lp @ v[:, :r] / scale
    e_red = w_proj.T @ (system.e @ t_proj) if system.e is not None \
        else w_proj.T @ t_proj
    # absorb rounding so the reduced E is the identity exactly up to solve
    # accuracy; the column space of T (and hence the ROM) is unchanged
    t_proj = linalg.solve(linalg.lu_factor(e_red.T), t_proj.T).T
    e_check = w_proj.T @ (system.e @ t_proj) if system.e is not None \
        else w_proj.T @ t_proj
    defect = float(np.max(np.abs(e_check - np.eye(r))))
    if defect > 1e-8:
        raise BalanceError(
            f"projection lost bi-orthogonality (defect {defect:.2e}); "
            "Gramian factors are too ill-conditioned for this order")

    reduced = LtiSystem(
        a=w_proj.T @ system.a @ t_proj,
        b=w_proj.T @ system.b,
        c=system.c @ t_proj,
        d=system.d,
    )
    return ReducedModel(system=reduced, r=r, hsv=hsv,
                        truncation_tail=float(np.sum(hsv[r:])))


# --- method registry ---------------------------------------------------------

def _reduce_bt_sign(system, params):
    gram = gramians_sign(system)
    return balance_truncate(system, gram, tol=params["tol"],
                            max_order=params["max_order"])


def _reduce_bt_emp(system, params):
    gram = gramians_emp(system, t_final=params["t_final"], steps=params["steps"])
    return balance_truncate(system, gram, tol=params["tol"],
                            max_order=params["max_order"])


_REGISTRY = {
    ("bt", "sign"): MethodRegistryEntry(
        method_id="bt",
        impl_id="sign",
        default_params={"tol": DEFAULT_TOL, "max_order": None},
        description="balanced truncation, sign-function Lyapunov backend",
        reducer=_reduce_bt_sign,
    ),
    ("bt", "emp"): MethodRegistryEntry(
        method_id="bt",
        impl_id="emp",
        default_params={"tol": DEFAULT_TOL, "max_order": None,
                        "t_final": DEFAULT_T_FINAL, "steps": DEFAULT_STEPS},
        description="balanced truncation, empirical Gramian backend",
        reducer=_reduce_bt_emp,
    ),
}


def registry():
    """The built-in method registry, keyed by (method_id, impl_id)."""
    return dict(_REGISTRY)


def is_registered(method_id, impl_id):
    return (method_id, impl_id) in _REGISTRY


def validate_params(method_id, impl_id, params, path=""):
    """Check parameter names and values against a registry entry.

    Returns the merged parameter dict (defaults overridden by ``params``).
    Unknown names, out-of-range values, and wrong types raise
    :class:`SchemaError` with the offending path.
    """
    entry = _REGISTRY.get((method_id, impl_id))
    if entry is None:
        raise UnknownMethod(f"no registered implementation {method_id}-{impl_id}")
    merged = dict(entry.default_params)
    for key, value in params.items():
        where = f"{path}.{key}" if path else key
        if key not in entry.default_params:
            raise SchemaError(
                f"unknown parameter for {method_id}-{impl_id}", path=where)
        if key == "tol":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError("tol must be a number", path=where)
            if not 0.0 < value < 1.0:
                raise SchemaError("tol must lie in (0, 1)", path=where)
            value = float(value)
        elif key == "max_order":
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError("max_order must be an integer", path=where)
            if value < 1:
                raise SchemaError("max_order must be positive", path=where)
        elif key == "t_final":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError("t_final must be a number", path=where)
            if value <= 0:
                raise SchemaError("t_final must be positive", path=where)
            value = float(value)
        elif key == "steps":
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError("steps must be an integer", path=where)
            if value < 1:
                raise SchemaError("steps must be at least 1", path=where)
        merged[key] = value
    return merged


def reduce(system, isotope):
    """Run one algorithm isotope on a system and return its reduced model.

    Parameters are merged over the registry defaults; ``max_order``
    defaults to the full order n.
    """
    if not isinstance(isotope, AlgorithmIsotope):
        raise UnknownMethod("reduce expects an AlgorithmIsotope")
    entry = _REGISTRY.get((isotope.method_id, isotope.impl_id))
    if entry is None:
        raise UnknownMethod(
            f"no registered implementation {isotope.method_id}-{isotope.impl_id}")
    params = validate_params(isotope.method_id, isotope.impl_id,
                             isotope.params, path=isotope.label)
    if params.get("max_order") is None:
        params["max_order"] = system.n
    return entry.reducer(system, params)
