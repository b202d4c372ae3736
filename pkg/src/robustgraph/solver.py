"""ADMM solver for joint low-rank/sparse decomposition with graph learning.

Splits the noisy data matrix X into a low-rank part D and a sparse error
part E while learning an adaptive-neighbor affinity graph S over the
samples, coupling the two through a Laplacian smoothness term on an
auxiliary copy Z of D. Each iteration performs, in order:

  1. D: singular value thresholding of (X + Z - E - (Y1 + Y2)/mu) / 2
     at threshold 1/(2 mu);
  2. E: elementwise soft thresholding of X - D - Y1/mu at alpha/mu;
  3. S: closed-form simplex row updates on the pairwise distances of Z's
     columns (skipped in the degenerate modes);
  4. Z: right-solve against 2 beta L + mu I, which collapses to
     Z = D + Y2/mu whenever the graph term is absent;
  5. dual ascent on the multipliers Y1 (for D + E = X) and Y2 (for D = Z).

Two degenerate modes are provided: plain low-rank/sparse decomposition
(no graph at all, beta must be 0) and a fixed precomputed graph whose
Laplacian regularizes the recovery without being relearned.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidInputError
from .graph import AffinityGraph, build_graph, laplacian, pairwise_sq_dists
from .prox import as_matrix, soft_threshold, solve_spd, svt

logger = logging.getLogger(__name__)

# Singular values below this do not count toward the diagnostic rank.
RANK_EPS = 1e-12


class Mode(Enum):
    RGC = "rgc"
    RPCA = "rpca"
    FIXED_GRAPH = "fixed-graph"


@dataclass
class SolverConfig:
    """Solver parameters.

    ``alpha`` defaults to 1/sqrt(max(m, n)) when left as None; ``beta``
    weighs the Laplacian smoothness term and has no sensible default, so
    callers must choose it. ``mu_growth`` > 1 turns on a multiplicative
    penalty escalation per iteration (off by default: mu stays fixed).
    ``seed`` is carried along for downstream consumers and manifests; the
    solver itself is deterministic.
    """

    beta: float
    alpha: float | None = None
    k: int = 10
    mu: float = 1.0
    tol: float = 1e-6
    max_iters: int = 300
    mode: Mode = Mode.RGC
    fixed_graph: AffinityGraph | None = None
    mu_growth: float = 1.0
    seed: int = 0

    def resolved_alpha(self, shape):
        if self.alpha is not None:
            return self.alpha
        return 1.0 / np.sqrt(max(shape))

    def validate(self, n_samples=None):
        if self.alpha is not None and not self.alpha > 0:
            raise InvalidInputError(f"alpha must be positive, got {self.alpha}")
        if self.beta < 0:
            raise InvalidInputError(f"beta must be nonnegative, got {self.beta}")
        if not self.mu > 0:
            raise InvalidInputError(f"mu must be positive, got {self.mu}")
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise InvalidInputError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.k < 1:
            raise InvalidInputError(f"neighbor count must be at least 1, got {self.k}")
        if self.mu_growth < 1.0:
            raise InvalidInputError(f"mu_growth must be >= 1, got {self.mu_growth}")
        if self.mode is Mode.RPCA and self.beta != 0.0:
            raise InvalidInputError("rpca mode solves the graph-free problem; set beta to 0")
        if self.mode is Mode.FIXED_GRAPH:
            if self.fixed_graph is None:
                raise InvalidInputError("fixed-graph mode needs a fixed_graph")
            if n_samples is not None and self.fixed_graph.n != n_samples:
                raise InvalidInputError(
                    f"fixed graph is over {self.fixed_graph.n} samples, data has {n_samples}"
                )
        return self


@dataclass
class RgcState:
    """One solver iterate: primal blocks, multipliers, penalty, counter."""

    D: np.ndarray
    E: np.ndarray
    S: AffinityGraph | None
    Z: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    mu: float
    iteration: int
    gamma: float = 0.0


@dataclass
class ConvergenceRecord:
    """Per-iteration diagnostics backing the exported convergence curve."""

    iteration: int
    objective: float
    res_x: float
    res_z: float
    rank_d: int
    nnz_e: int


@dataclass
class RgcResult:
    """Final iterates plus the full residual/objective history.

    ``converged`` is False when the iteration cap was reached first; the
    last history record then carries the final residuals.
    """

    D: np.ndarray
    E: np.ndarray
    S: AffinityGraph | None
    history: list
    converged: bool


def _effective_k(k, n):
    limit = n - 2
    if limit < 1:
        raise InvalidInputError(f"graph learning needs at least 3 samples, got {n}")
    if k > limit:
        logger.warning("neighbor count %d exceeds n-2=%d; clamped", k, limit)
        return limit
    return k


def init_state(x, cfg):
    """Initial iterate: Z = X, everything else zero, S not yet built."""
    x = as_matrix(x, "data matrix")
    cfg.validate(n_samples=x.shape[1])
    zeros = np.zeros_like(x)
    return RgcState(
        D=zeros.copy(),
        E=zeros.copy(),
        S=None,
        Z=x.copy(),
        Y1=zeros.copy(),
        Y2=zeros.copy(),
        mu=cfg.mu,
        iteration=0,
    )


def step(state, x, cfg):
    """One full ADMM sweep; returns the next state, inputs untouched."""
    mu = state.mu
    alpha = cfg.resolved_alpha(x.shape)

    h = 0.5 * (x + state.Z - state.E - (state.Y1 + state.Y2) / mu)
    d = svt(h, 1.0 / (2.0 * mu))

    e = soft_threshold(x - d - state.Y1 / mu, alpha / mu)

    if cfg.mode is Mode.RGC:
        profiles = pairwise_sq_dists(state.Z)
        k = _effective_k(cfg.k, x.shape[1])
        s, gamma = build_graph(profiles, k, cfg.beta)
    elif cfg.mode is Mode.FIXED_GRAPH:
        s, gamma = cfg.fixed_graph, 0.0
    else:
        s, gamma = None, 0.0

    if cfg.mode is Mode.RPCA or cfg.beta == 0.0:
        z = d + state.Y2 / mu
    else:
        lap = laplacian(s)
        n = x.shape[1]
        a = 2.0 * cfg.beta * lap.matrix + mu * np.eye(n)
        z = solve_spd(a, mu * d + state.Y2)

    y1 = state.Y1 + mu * (d + e - x)
    y2 = state.Y2 + mu * (d - z)

    return RgcState(
        D=d,
        E=e,
        S=s,
        Z=z,
        Y1=y1,
        Y2=y2,
        mu=mu * cfg.mu_growth,
        iteration=state.iteration + 1,
        gamma=gamma,
    )


def make_record(state, x, cfg):
    """Diagnostics for one iterate.

    The objective sums the nuclear norm of D, the weighted l1 norm of E,
    the Laplacian smoothness of Z and, when the graph is being learned,
    gamma ||S||_F^2 with that iteration's gamma; it is a diagnostic only,
    since gamma moves between iterations.
    """
    svals = np.linalg.svd(state.D, compute_uv=False)
    alpha = cfg.resolved_alpha(x.shape)
    obj = float(svals.sum()) + alpha * float(np.abs(state.E).sum())
    if state.S is not None and cfg.beta > 0.0:
        lap = laplacian(state.S)
        obj += cfg.beta * float(np.sum((state.Z @ lap.matrix) * state.Z))
        if cfg.mode is Mode.RGC:
            obj += state.gamma * state.S.frobenius_sq()
    res_x = float(np.max(np.abs(state.D + state.E - x)))
    res_z = float(np.max(np.abs(state.D - state.Z)))
    return ConvergenceRecord(
        iteration=state.iteration,
        objective=obj,
        res_x=res_x,
        res_z=res_z,
        rank_d=int(np.sum(svals > RANK_EPS)),
        nnz_e=int(np.count_nonzero(state.E)),
    )


def solve(x, cfg):
    """Iterate :func:`step` until both primal residuals drop below tol.

    Stops when max(||D + E - X||_inf, ||D - Z||_inf) < cfg.tol or after
    cfg.max_iters sweeps; hitting the cap is reported through
    ``RgcResult.converged`` (with a log warning), not an exception. The
    whole run is deterministic: identical inputs give identical histories.
    """
    x = as_matrix(x, "data matrix")
    cfg.validate(n_samples=x.shape[1])
    state = init_state(x, cfg)
    history = []
    converged = False
    for _ in range(cfg.max_iters):
        state = step(state, x, cfg)
        record = make_record(state, x, cfg)
        history.append(record)
        if max(record.res_x, record.res_z) < cfg.tol:
            converged = True
            break
    if not converged:
        last = history[-1]
        logger.warning(
            "no convergence after %d iterations (res_x=%.3e, res_z=%.3e)",
            last.iteration,
            last.res_x,
            last.res_z,
        )
    return RgcResult(
        D=state.D, E=state.E, S=state.S, history=history, converged=converged
    )
