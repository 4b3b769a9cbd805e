"""Randomized coordinate descent on strongly convex quadratics.

Executable checks for the convergence theory behind coordinate methods:
descent with the 1/L_max step is exact on quadratics, the expected gap obeys
both a sublinear O(1/k) bound and a linear-rate bound, and the scalar
recurrence u_{n+1} = u_n - a*u_n^2 underlying the sublinear proof obeys
u_n <= 1/(n*a). Quadratics are used because every constant in the bounds
(sigma, L_i, f*, R0) is computable exactly, which makes the checks strict.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DescentProblem:
    """Quadratic f(x) = 0.5 x'Qx - b'x with everything the bounds need."""

    Q: np.ndarray
    b: np.ndarray
    x0: np.ndarray
    sigma: float = field(init=False)
    L: np.ndarray = field(init=False)
    L_max: float = field(init=False)
    x_star: np.ndarray = field(init=False)
    f_star: float = field(init=False)
    R0: float = field(init=False)

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        x0 = np.asarray(self.x0, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if np.abs(Q - Q.T).max() > 1e-10:
            raise ValueError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        off_diag = Q - np.diag(np.diag(Q))
        if not off_diag.any():
            eigs = np.sort(np.diag(Q))  # exact for diagonal Q
        else:
            eigs = np.linalg.eigvalsh(Q)
        if eigs[0] <= 0:
            raise ValueError("Q must be positive definite")
        for name, val in (("Q", Q), ("b", b), ("x0", x0)):
            arr = np.ascontiguousarray(val)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "sigma", float(eigs[0]))
        object.__setattr__(self, "L", np.diag(Q).copy())
        object.__setattr__(self, "L_max", float(np.diag(Q).max()))
        x_star = np.linalg.solve(Q, b)
        object.__setattr__(self, "x_star", x_star)
        object.__setattr__(self, "f_star", self.f(x_star))
        # tight radius of the initial sublevel set for a quadratic
        gap0 = self.f(x0) - self.f_star
        object.__setattr__(self, "R0", float(np.sqrt(max(2.0 * gap0, 0.0) / self.sigma)))

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def f(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.Q @ x) - self.b @ x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.Q @ x - self.b

    def initial_gap(self) -> float:
        return self.f(self.x0) - self.f_star

    def linear_rate(self) -> float:
        """Per-step contraction factor 1 - sigma/(n * L_max)."""
        return 1.0 - self.sigma / (self.n * self.L_max)


def make_quadratic(
    n: int, condition_number: float, seed: int, rotate: bool = True
) -> DescentProblem:
    """Random SPD quadratic with a log-spaced spectrum in [1, condition_number].

    The start point sits on a sphere of radius 10 around the minimizer. With
    ``rotate=False`` the spectrum goes straight on the diagonal, so the
    per-coordinate constants equal the eigenvalues.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if condition_number < 1:
        raise ValueError("condition_number must be >= 1")
    rng = np.random.default_rng(seed)
    eigs = np.logspace(0.0, np.log10(condition_number), n)
    if rotate and n > 1:
        A = rng.standard_normal((n, n))
        H, R = np.linalg.qr(A)
        H = H * np.sign(np.diag(R))  # canonical sign, keeps the factor unique
        Q = H @ np.diag(eigs) @ H.T
        Q = 0.5 * (Q + Q.T)
    else:
        Q = np.diag(eigs)
    x_star = rng.standard_normal(n)
    b = Q @ x_star
    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    x0 = x_star + 10.0 * direction
    return DescentProblem(Q=Q, b=b, x0=x0)


@dataclass(frozen=True)
class DescentTrace:
    values: np.ndarray        # f(x_k) for k = 0..n_steps
    indices: np.ndarray       # coordinate chosen at each step
    seed: int
    max_distance_to_opt: float

    def gaps(self, f_star: float) -> np.ndarray:
        return self.values - f_star


def rcd_run(
    p: DescentProblem, n_steps: int, seed: int, step_size: float | None = None
) -> DescentTrace:
    """Randomized coordinate descent: uniform coordinate, step 1/L_max.

    x_{k+1} = x_k - step * [grad f(x_k)]_i * e_i with i drawn i.i.d. uniform.
    ``step_size`` overrides the default 1/L_max (used for fault injection).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, p.n, size=n_steps)
    step = (1.0 / p.L_max) if step_size is None else step_size
    x = p.x0.copy()
    values = np.empty(n_steps + 1)
    values[0] = p.f(x)
    max_dist = float(np.linalg.norm(x - p.x_star))
    for k in range(n_steps):
        i = idx[k]
        g_i = p.Q[i] @ x - p.b[i]
        x[i] -= step * g_i
        values[k + 1] = p.f(x)
        max_dist = max(max_dist, float(np.linalg.norm(x - p.x_star)))
    return DescentTrace(values=values, indices=idx, seed=seed, max_distance_to_opt=max_dist)


@dataclass(frozen=True)
class BoundCheckReport:
    kind: str                 # sublinear | linear
    passed: bool
    bound_ok: bool
    descent_ok: bool
    max_ratio: float          # max over k of mean_gap / bound
    worst_k: int
    slack: float
    n_runs: int
    n_steps: int
    rate_factor: float | None
    mean_gap: np.ndarray = field(repr=False, default=None)
    bound: np.ndarray = field(repr=False, default=None)


def _mean_gaps(p, n_steps, n_runs, seed, step_size):
    traces = [rcd_run(p, n_steps, seed + j, step_size) for j in range(n_runs)]
    gaps = np.stack([t.gaps(p.f_star) for t in traces])
    tol = 1e-9 * max(1.0, p.initial_gap())
    descent_ok = bool((np.diff(gaps, axis=1) <= tol).all())
    return gaps.mean(axis=0), descent_ok


def _gap_floor(p: DescentProblem) -> float:
    # computed gaps bottom out at machine-precision scale; without this floor
    # an exponentially shrinking bound would flag converged runs as violations
    return 1e-12 * max(1.0, abs(p.f_star), p.initial_gap())


def _bound_report(kind, p, mean_gap, bound, k0, descent_ok, slack, n_runs, n_steps, rate):
    atol = _gap_floor(p)
    checked_gap = mean_gap[k0:]
    ratios = checked_gap / np.maximum(bound, atol)
    worst = int(np.argmax(ratios))
    bound_ok = bool((checked_gap <= bound * (1.0 + slack) + atol).all())
    return BoundCheckReport(
        kind=kind,
        passed=bound_ok and descent_ok,
        bound_ok=bound_ok,
        descent_ok=descent_ok,
        max_ratio=float(ratios[worst]),
        worst_k=worst + k0,
        slack=slack,
        n_runs=n_runs,
        n_steps=n_steps,
        rate_factor=rate,
        mean_gap=mean_gap,
        bound=np.concatenate(([np.inf] * k0, bound)),
    )


def check_sublinear_bound(
    p: DescentProblem,
    n_steps: int,
    n_runs: int,
    seed: int,
    slack: float = 0.05,
    step_size: float | None = None,
) -> BoundCheckReport:
    """Mean gap vs 2*n*L_max*R0^2 / k for all k >= 1, within ``slack``."""
    if n_runs < 30:
        raise ValueError("need at least 30 runs for a stable mean")
    mean_gap, descent_ok = _mean_gaps(p, n_steps, n_runs, seed, step_size)
    k = np.arange(1, n_steps + 1)
    bound = 2.0 * p.n * p.L_max * p.R0**2 / k
    return _bound_report(
        "sublinear", p, mean_gap, bound, 1, descent_ok, slack, n_runs, n_steps, None
    )


def check_linear_bound(
    p: DescentProblem,
    n_steps: int,
    n_runs: int,
    seed: int,
    slack: float = 0.05,
    step_size: float | None = None,
) -> BoundCheckReport:
    """Mean gap vs (1 - sigma/(n*L_max))^k times the initial gap, all k."""
    if n_runs < 30:
        raise ValueError("need at least 30 runs for a stable mean")
    mean_gap, descent_ok = _mean_gaps(p, n_steps, n_runs, seed, step_size)
    rate = p.linear_rate()
    k = np.arange(n_steps + 1)
    bound = rate**k * p.initial_gap()
    return _bound_report(
        "linear", p, mean_gap, bound, 0, descent_ok, slack, n_runs, n_steps, rate
    )


@dataclass(frozen=True)
class LemmaCheckReport:
    passed: bool
    max_ratio: float          # max over n >= 1 of u_n * n * a
    a: float
    u0: float
    n_terms: int


def lemma1_check(a: float, u0: float, n_terms: int) -> LemmaCheckReport:
    """Extremal recurrence u_{n+1} = u_n - a*u_n^2 must satisfy u_n <= 1/(n*a).

    Requires u0 in (0, 1/(4a)], the region where the recurrence stays
    non-negative and non-increasing.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if not 0.0 < u0 <= 0.25 / a:
        raise ValueError("u0 must lie in (0, 1/(4a)]")
    if n_terms < 1:
        raise ValueError("n_terms must be positive")
    u = u0
    max_ratio = 0.0
    passed = True
    for n in range(1, n_terms + 1):
        u_next = u - a * u * u
        if u_next > u or u_next < 0.0:
            passed = False
        u = u_next
        ratio = u * n * a
        max_ratio = max(max_ratio, ratio)
        if u > 1.0 / (n * a):
            passed = False
    return LemmaCheckReport(passed=passed, max_ratio=max_ratio, a=a, u0=u0, n_terms=n_terms)


def gradient_check(p: DescentProblem, n_points: int = 10, seed: int = 0, h: float = 1e-6) -> float:
    """Max relative error of the analytic gradient vs central differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        x = p.x_star + rng.standard_normal(p.n)
        g = p.grad(x)
        fd = np.empty(p.n)
        for i in range(p.n):
            e = np.zeros(p.n)
            e[i] = h
            fd[i] = (p.f(x + e) - p.f(x - e)) / (2.0 * h)
        denom = max(float(np.linalg.norm(g)), 1e-12)
        worst = max(worst, float(np.linalg.norm(fd - g)) / denom)
    return worst
