"""Proximal operators and dense linear-algebra kernels.

Building blocks for the alternating-direction solver in
:mod:`robustgraph.solver`: singular value thresholding (the proximal map of
the nuclear norm), elementwise soft thresholding (the proximal map of the
l1 norm), and a right-solve against a symmetric positive definite matrix.
All functions are pure; concurrent calls on distinct inputs are safe.
"""

import logging

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalError

logger = logging.getLogger(__name__)

# Relative residual every SPD solve must meet.
SPD_RESIDUAL_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Coerce to a 2-D float64 array, rejecting empty or non-finite input."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got {out.ndim} dimension(s)")
    if out.size == 0:
        raise InvalidInputError(f"{name} must be non-empty, got shape {out.shape}")
    if not np.isfinite(out).all():
        bad = np.argwhere(~np.isfinite(out))
        raise InvalidInputError(
            f"{name} has {len(bad)} non-finite entries, first at {tuple(bad[0])}"
        )
    return out


def svt(h, tau):
    """Shrink the singular values of ``h`` by ``tau``.

    Returns U diag((sigma - tau)+) V^T where U diag(sigma) V^T is the SVD
    of ``h``. This is the unique minimizer of

        ||D||_* + (1 / (2 tau)) ||D - h||_F^2,

    so the solver calls it with tau = 1/(2 mu) for its low-rank update.
    """
    h = as_matrix(h, "svt input")
    if tau < 0:
        raise InvalidInputError(f"svt threshold must be nonnegative, got {tau}")
    try:
        u, sigma, vt = np.linalg.svd(h, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge on a {h.shape} matrix") from exc
    shrunk = np.maximum(sigma - tau, 0.0)
    return (u * shrunk) @ vt


def soft_threshold(g, tau):
    """Elementwise shrinkage (|g_ij| - tau)+ * sign(g_ij).

    Minimizer of tau ||E||_1 + (1/2) ||E - g||_F^2; the solver calls it with
    tau = alpha/mu for its sparse-error update.
    """
    g = as_matrix(g, "soft_threshold input")
    if tau < 0:
        raise InvalidInputError(f"soft threshold must be nonnegative, got {tau}")
    return np.sign(g) * np.maximum(np.abs(g) - tau, 0.0)


def solve_spd(a, b):
    """Right-solve M A = B for symmetric positive definite ``a``.

    Factorizes ``a`` once (Cholesky) and solves for all rows of ``b``. On a
    pivot failure the solve is retried once with a tiny ridge
    (1e-10 * trace(a)/n on the diagonal), logged as a warning; a second
    failure raises :class:`NumericalError` naming the smallest eigenvalue.
    The returned M satisfies ||M A - B||_F / ||B||_F < 1e-10.
    """
    a = as_matrix(a, "spd matrix")
    b = as_matrix(b, "right-hand side")
    n = a.shape[0]
    if a.shape[1] != n:
        raise InvalidInputError(f"spd matrix must be square, got {a.shape}")
    if b.shape[1] != n:
        raise InvalidInputError(
            f"right-hand side must have {n} columns to right-solve, got {b.shape[1]}"
        )
    scale = float(np.abs(a).max())
    if not np.allclose(a, a.T, rtol=1e-12, atol=1e-12 * max(scale, 1.0)):
        raise InvalidInputError("spd matrix must be symmetric")
    try:
        factor = scipy.linalg.cho_factor(a, lower=True)
    except np.linalg.LinAlgError:
        ridge = 1e-10 * float(np.trace(a)) / n
        logger.warning("Cholesky pivot failure; retrying with ridge %.3e", ridge)
        try:
            factor = scipy.linalg.cho_factor(a + ridge * np.eye(n), lower=True)
        except np.linalg.LinAlgError as exc:
            lam_min = float(np.linalg.eigvalsh(a)[0])
            raise NumericalError(
                f"matrix is not positive definite (smallest eigenvalue {lam_min:.6e})"
            ) from exc
    m = scipy.linalg.cho_solve(factor, b.T).T
    b_norm = float(np.linalg.norm(b))
    if b_norm > 0.0:
        rel = float(np.linalg.norm(m @ a - b)) / b_norm
        if rel >= SPD_RESIDUAL_TOL:
            raise NumericalError(
                f"spd solve residual {rel:.3e} exceeds {SPD_RESIDUAL_TOL:.0e}"
            )
    return m
