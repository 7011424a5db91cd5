"""Dual quadratic program behind the large-margin classifiers.

The trainers maximize a concave quadratic ``L(beta) = -1/2 beta' A beta +
beta' tau`` over ``beta = (lam, alpha)``, where ``lam >= 0`` weights the
between-class-mean direction and the per-sample ``alpha`` lie in a box
``[0, c0]`` under the balance constraint ``sum_i y_i alpha_i = 0``.

``A`` is a Gram matrix: with ``delta = m_plus - m_minus`` and columns
``(delta, y_1 x_1, ..., y_n x_n)`` stacked into ``B``, ``A = B' B``. The
solver performs paired updates on ``(alpha_i, alpha_j)`` that preserve the
balance constraint, choosing the most violating pair, interleaved with an
exact one-dimensional update of ``lam``. The plain SVM is the same program
with the ``lam`` coordinate removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import (
    DegenerateMeans,
    DimensionMismatch,
    EmptyInput,
    InfeasibleProblem,
    MaxIterationsExceeded,
)

#: Iteration budget per sample when the caller does not set one.
MAX_ITER_PER_SAMPLE = 100_000

#: The population multiplier may not exceed this many multiples of c0.
POPULATION_CAP_FACTOR = 1e6

#: alpha values within this fraction of c0 from a box bound count as bound.
SUPPORT_THRESHOLD_REL = 1e-6


@dataclass(frozen=True)
class QPProblem:
    """Assembled dual program.

    ``a_matrix`` is ``(n+1, n+1)`` with the population coordinate first,
    ``tau`` is ``(c_const, 1, ..., 1)`` and ``equality_coeffs`` is
    ``(0, y_1, ..., y_n)``: the leading coordinate is exempt from the
    balance constraint and from the box upper bound.
    """

    a_matrix: np.ndarray
    tau: np.ndarray
    equality_coeffs: np.ndarray
    c0: float
    n: int

    def __post_init__(self):
        a = np.asarray(self.a_matrix, dtype=np.float64)
        tau = np.asarray(self.tau, dtype=np.float64)
        eq = np.asarray(self.equality_coeffs, dtype=np.float64)
        if a.shape != (self.n + 1, self.n + 1):
            raise DimensionMismatch(
                f"a_matrix must be ({self.n + 1}, {self.n + 1}), got {a.shape}"
            )
        if tau.shape != (self.n + 1,) or eq.shape != (self.n + 1,):
            raise DimensionMismatch("tau and equality_coeffs must have length n+1")
        if eq[0] != 0.0 or not np.all(np.abs(eq[1:]) == 1.0):
            raise ValueError("equality coefficients must be (0, +-1, ..., +-1)")
        if self.c0 <= 0.0:
            raise ValueError("c0 must be positive")
        for name, arr in (("a_matrix", a), ("tau", tau), ("equality_coeffs", eq)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "c0", float(self.c0))


@dataclass(frozen=True)
class KKTResiduals:
    """Violation magnitudes of the optimality conditions (all >= 0)."""

    stationarity: float
    equality: float
    box: float
    complementarity: float

    @property
    def max_residual(self) -> float:
        return max(self.stationarity, self.equality, self.box, self.complementarity)


@dataclass(frozen=True)
class DualSolution:
    """Solver output: the iterate, its objective, and fresh residuals."""

    beta: np.ndarray
    objective: float
    iterations: int
    kkt_residuals: KKTResiduals
    objective_trace: tuple[float, ...] | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=np.float64)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)


def assemble_dual(
    data: Dataset,
    m_plus: np.ndarray,
    m_minus: np.ndarray,
    c0: float,
    c_const: float,
) -> QPProblem:
    """Build the dual program for the population-guided classifier.

    Raises :class:`DegenerateMeans` when the class means coincide, since the
    population direction is then undefined.
    """
    if c0 <= 0.0:
        raise ValueError("c0 must be positive")
    if c_const <= 0.0:
        raise ValueError("c_const must be positive")
    m_plus = np.asarray(m_plus, dtype=np.float64)
    m_minus = np.asarray(m_minus, dtype=np.float64)
    if m_plus.shape != (data.d,) or m_minus.shape != (data.d,):
        raise DimensionMismatch("class means must match the feature dimension")
    delta = m_plus - m_minus
    if not np.any(delta):
        raise DegenerateMeans("class means coincide; no population direction")
    y = data.labels.astype(np.float64)
    b_cols = np.empty((data.d, data.n + 1))
    b_cols[:, 0] = delta
    b_cols[:, 1:] = (data.features * y[:, None]).T
    a = b_cols.T @ b_cols
    a += a.T.copy()
    a *= 0.5
    tau = np.ones(data.n + 1)
    tau[0] = c_const
    eq = np.concatenate(([0.0], y))
    return QPProblem(a_matrix=a, tau=tau, equality_coeffs=eq, c0=float(c0), n=data.n)


def solve_dual(
    problem: QPProblem,
    tol: float = 1e-6,
    max_iter: int | None = None,
    freeze_population: bool = False,
    track_objective: bool = False,
) -> DualSolution:
    """Maximize the assembled dual program.

    With ``freeze_population`` the leading coordinate is pinned at zero,
    which reduces the program to the plain SVM dual on the same samples.
    """
    return _solve_core(
        problem.a_matrix,
        problem.tau,
        problem.equality_coeffs[1:],
        problem.c0,
        tol=tol,
        max_iter=max_iter,
        population=True,
        freeze_population=freeze_population,
        track_objective=track_objective,
    )


def solve_svm_dual(
    data: Dataset,
    c0: float,
    tol: float = 1e-6,
    max_iter: int | None = None,
    track_objective: bool = False,
) -> DualSolution:
    """Solve the plain SVM dual (no population coordinate) for ``data``."""
    if c0 <= 0.0:
        raise ValueError("c0 must be positive")
    y = data.labels.astype(np.float64)
    b_cols = (data.features * y[:, None]).T
    q = b_cols.T @ b_cols
    q += q.T.copy()
    q *= 0.5
    return _solve_core(
        q,
        np.ones(data.n),
        y,
        float(c0),
        tol=tol,
        max_iter=max_iter,
        population=False,
        track_objective=track_objective,
    )


def kkt_check(
    problem: QPProblem, solution: DualSolution, intercept: float | None = None
) -> KKTResiduals:
    """Recompute all optimality residuals for ``solution`` from scratch.

    When ``intercept`` is omitted it is derived from the margin samples
    (multipliers strictly inside the box); complementarity then measures
    ``alpha_i * max(y_i f(x_i) - 1, 0)`` under that intercept.
    """
    beta = np.asarray(solution.beta, dtype=np.float64)
    if beta.shape != (problem.n + 1,):
        raise DimensionMismatch("solution does not match the problem size")
    return _residuals(
        problem.a_matrix,
        problem.tau,
        problem.equality_coeffs[1:],
        problem.c0,
        beta,
        population=True,
        optimize_population=True,
        intercept=intercept,
    )


def _derive_intercept(margins, y, alpha, c0, yg, up, lo):
    """Intercept consistent with the multiplier pattern.

    ``margins`` holds ``y_i (w . x_i)``. Uses the mean of ``y_i - w . x_i``
    over samples strictly inside the box; without any, falls back to the
    midpoint of the feasible interval ``[max yg[up], min yg[lo]]``.
    """
    thr = SUPPORT_THRESHOLD_REL * c0
    free = (alpha > thr) & (alpha < c0 - thr)
    if free.any():
        return float(np.mean((y * (1.0 - margins))[free]))
    if up.any() and lo.any():
        return 0.5 * float(np.max(yg[up]) + np.min(yg[lo]))
    return 0.0


def _residuals(
    a, tau, y, c0, beta, population, optimize_population, intercept=None
) -> KKTResiduals:
    off = 1 if population else 0
    abeta = a @ beta
    alpha = beta[off:]
    g = tau - abeta
    yg = y * g[off:]
    up = ((y > 0.0) & (alpha < c0)) | ((y < 0.0) & (alpha > 0.0))
    lo = ((y > 0.0) & (alpha > 0.0)) | ((y < 0.0) & (alpha < c0))
    gap = 0.0
    if up.any() and lo.any():
        gap = max(0.0, float(np.max(yg[up]) - np.min(yg[lo])))
    pop_res = 0.0
    if population and optimize_population:
        g0 = float(g[0])
        pop_res = abs(g0) if beta[0] > 0.0 else max(0.0, g0)
    equality = abs(float(y @ alpha))
    box = max(0.0, float(np.max(-beta)), float(np.max(alpha - c0)))
    margins = abeta[off:]
    if intercept is None:
        intercept = _derive_intercept(margins, y, alpha, c0, yg, up, lo)
    excess = np.maximum(margins + y * intercept - 1.0, 0.0)
    comp = float(np.max(alpha * excess)) if alpha.size else 0.0
    return KKTResiduals(
        stationarity=max(gap, pop_res),
        equality=equality,
        box=box,
        complementarity=comp,
    )


def _solve_core(
    a,
    tau,
    y,
    c0,
    tol,
    max_iter,
    population,
    freeze_population=False,
    track_objective=False,
):
    off = 1 if population else 0
    n = a.shape[0] - off
    if n == 0:
        raise EmptyInput("the dual program has no sample coordinates")
    y = np.asarray(y, dtype=np.float64)
    if not ((y > 0.0).any() and (y < 0.0).any()):
        raise InfeasibleProblem(
            "the balance constraint needs samples of both labels"
        )
    optimize_pop = population and not freeze_population
    a00 = float(a[0, 0]) if population else 0.0
    if optimize_pop and a00 <= 0.0:
        raise DegenerateMeans("population coordinate has zero curvature")
    if max_iter is None:
        max_iter = MAX_ITER_PER_SAMPLE * n
    lam_cap = POPULATION_CAP_FACTOR * c0

    beta = np.zeros(a.shape[0])
    abeta = np.zeros(a.shape[0])
    objective = 0.0
    trace: list[float] = []
    a_pop_col = a[:, 0] if population else None

    def snapshot() -> DualSolution:
        res = _residuals(
            a, tau, y, c0, beta, population, optimize_pop, intercept=None
        )
        fresh = a @ beta
        obj = float(tau @ beta - 0.5 * (beta @ fresh))
        return DualSolution(
            beta=beta.copy(),
            objective=obj,
            iterations=iterations,
            kkt_residuals=res,
            objective_trace=tuple(trace) if track_objective else None,
        )

    def population_step():
        nonlocal objective, abeta
        g0 = tau[0] - abeta[0]
        new = beta[0] + g0 / a00
        if new < 0.0:
            new = 0.0
        if new > lam_cap:
            raise MaxIterationsExceeded(
                f"population multiplier exceeded its cap {lam_cap:g}; "
                "the program looks unbounded in that direction",
                solution=snapshot(),
            )
        dl = new - beta[0]
        if dl != 0.0:
            beta[0] = new
            abeta += a_pop_col * dl
            if track_objective:
                objective += g0 * dl - 0.5 * a00 * dl * dl

    iterations = 0
    if optimize_pop:
        population_step()
    refreshed = False
    while True:
        alpha = beta[off:]
        g = tau - abeta
        yg = y * g[off:]
        up = ((y > 0.0) & (alpha < c0)) | ((y < 0.0) & (alpha > 0.0))
        lo = ((y > 0.0) & (alpha > 0.0)) | ((y < 0.0) & (alpha < c0))
        if up.any() and lo.any():
            i = int(np.argmax(np.where(up, yg, -np.inf)))
            j = int(np.argmin(np.where(lo, yg, np.inf)))
            gap = float(yg[i] - yg[j])
        else:
            i = j = -1
            gap = -math.inf
        if optimize_pop:
            g0 = float(g[0])
            pop_res = abs(g0) if beta[0] > 0.0 else max(0.0, g0)
        else:
            pop_res = 0.0
        if gap <= tol and pop_res <= tol:
            if refreshed:
                break
            # Incremental products drift; confirm convergence on a fresh one.
            abeta = a @ beta
            refreshed = True
            continue
        refreshed = False
        if iterations >= max_iter:
            raise MaxIterationsExceeded(
                f"no convergence within {max_iter} iterations "
                f"(violating-pair gap {max(gap, 0.0):.3e}, "
                f"population residual {pop_res:.3e})",
                solution=snapshot(),
            )
        yi = float(y[i])
        yj = float(y[j])
        ai = float(alpha[i])
        aj = float(alpha[j])
        room_i = (c0 - ai) if yi > 0.0 else ai
        room_j = aj if yj > 0.0 else (c0 - aj)
        tmax = room_i if room_i < room_j else room_j
        ii = i + off
        jj = j + off
        curv = float(a[ii, ii] + a[jj, jj] - 2.0 * yi * yj * a[ii, jj])
        if curv > 0.0:
            t = gap / curv
            if t > tmax:
                t = tmax
        else:
            t = tmax
        new_i = ai + yi * t
        new_j = aj - yj * t
        # Snap exactly onto a bound that was hit, so the strict masks above
        # keep identifying bound coordinates after rounding.
        if t >= room_i:
            new_i = c0 if yi > 0.0 else 0.0
        if t >= room_j:
            new_j = 0.0 if yj > 0.0 else c0
        dbi = new_i - ai
        dbj = new_j - aj
        if track_objective:
            objective += (
                g[ii] * dbi
                + g[jj] * dbj
                - 0.5
                * (
                    a[ii, ii] * dbi * dbi
                    + 2.0 * a[ii, jj] * dbi * dbj
                    + a[jj, jj] * dbj * dbj
                )
            )
        beta[ii] = new_i
        beta[jj] = new_j
        abeta += a[:, ii] * dbi + a[:, jj] * dbj
        iterations += 1
        if optimize_pop:
            population_step()
        if track_objective:
            trace.append(objective)
        if iterations % 50_000 == 0:
            abeta = a @ beta

    return snapshot()
