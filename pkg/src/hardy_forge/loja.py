"""Empirical Lojasiewicz exponents.

On any finite sample set every exponent is feasible with some positive
constant, so the fit asks a sharper question: does the best constant stay put
as the samples approach V(P)?  With u = log|P| and

    w_mu = log|grad P| - (1 - mu) u,

the samples are split into the third with the smallest u and the third with
the largest u, and D(mu) = min_low w_mu - min_high w_mu compares the feasible
constants of the two groups.  D is decreasing in mu; the fitted exponent is the
largest grid value with D(mu) >= -tau, i.e. the largest mu for which moving
toward the variety does not erode the constant by more than a factor e^tau.
The distance exponent is fitted the same way with v_nu = log|P| - nu log d.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .poly import Polynomial

GRID_STEP = 1.0 / 120
DEFAULT_TAU = 0.05


class LojasiewiczError(ValueError):
    pass


@dataclass
class LojasiewiczFit:
    kind: str
    exponent_hat: float
    constant_hat: float
    points: np.ndarray
    abs_p: np.ndarray
    other: np.ndarray
    residual: float
    seed: int
    tau: float = DEFAULT_TAU
    failures: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def samples(self) -> list[tuple[np.ndarray, float, float]]:
        return list(zip(self.points, self.abs_p, self.other))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "exponent_hat": round(self.exponent_hat, 10),
            "constant_hat": float(f"{self.constant_hat:.10e}"),
            "n_samples": int(len(self.abs_p)),
            "residual": float(f"{self.residual:.10e}"),
            "seed": self.seed,
            "tau": self.tau,
            "failures": self.failures,
        }


def _grad_numeric(P: Polynomial):
    grads = P.gradient()

    def g(x):
        return np.stack([q.numeric(x) for q in grads], axis=-1)

    return g


def sample_points(P: Polynomial, box, n_samples: int, seed: int, max_scale_exp: int = 10) -> np.ndarray:
    """Samples in the box, concentrated near V(P) and near the box center.

    Each point is drawn uniformly, shrunk toward the box center by 2^-j for a
    random j in 0..max_scale_exp, and every other point is then pushed toward
    V(P) by a partial Newton step that removes a random fraction of |P|.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    rng = np.random.default_rng(seed)
    n = box.shape[0]
    center = box.mean(axis=1)
    u = rng.uniform(box[:, 0], box[:, 1], size=(n_samples, n))
    j = rng.integers(0, max_scale_exp + 1, size=n_samples)
    x = center + (u - center) * (2.0 ** -j)[:, None]
    push = np.arange(n_samples) % 2 == 1
    frac = 1.0 - 10.0 ** -rng.uniform(0, 6, size=n_samples)
    grad = _grad_numeric(P)
    p = P.numeric(x)
    g = grad(x)
    g2 = np.sum(g * g, axis=-1)
    ok = push & (g2 > 0)
    step = np.zeros_like(x)
    step[ok] = (frac[ok] * p[ok] / g2[ok])[:, None] * g[ok]
    return x - step


def _groups(key: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(key, kind="stable")
    third = max(len(key) // 3, 1)
    return order[:third], order[-third:]


def _largest_feasible(stat, grid: np.ndarray, tau: float) -> float | None:
    feas = [g for g in grid if stat(g) >= -tau]
    return max(feas) if feas else None


def gradient_statistic(abs_p: np.ndarray, abs_grad: np.ndarray, mu: float) -> float:
    u = np.log(abs_p)
    w = np.log(abs_grad) - (1 - mu) * u
    low, high = _groups(u)
    return float(w[low].min() - w[high].min())


def fit_gradient_exponent(P: Polynomial, box=None, n_samples: int = 2000, seed: int = 0,
                          tau: float = DEFAULT_TAU, points: np.ndarray | None = None) -> LojasiewiczFit:
    """Fit mu in |grad P| >= c |P|^(1 - mu) on samples off V(P)."""
    if box is None:
        box = [(-1.0, 1.0)] * P.nvars
    x = sample_points(P, box, n_samples, seed) if points is None else np.asarray(points, dtype=float)
    ap = np.abs(P.numeric(x))
    ag = np.linalg.norm(_grad_numeric(P)(x), axis=-1)
    keep = (ap > 1e-300) & (ag > 1e-300) & np.isfinite(ap) & np.isfinite(ag)
    x, ap, ag = x[keep], ap[keep], ag[keep]
    if len(ap) < 3 or np.ptp(np.log(ap)) < 1e-9:
        raise LojasiewiczError("degenerate sample set: |P| takes a single value")
    grid = np.arange(1, 121) * GRID_STEP
    mu = _largest_feasible(lambda m: gradient_statistic(ap, ag, m), grid, tau)
    if mu is None:
        mu = GRID_STEP
    mu = float(round(mu * 120) / 120)
    logc = np.min(np.log(ag) - (1 - mu) * np.log(ap))
    return LojasiewiczFit("gradient", mu, float(np.exp(logc)), x, ap, ag, 0.0, seed, tau,
                          extra={"statistic": gradient_statistic(ap, ag, mu)})


# --- distance -----------------------------------------------------------------

def _line_roots(P: Polynomial, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Real roots t of t -> P(x + t v)."""
    d = P.degree()
    ts = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1))
    vals = P.numeric(x[None, :] + ts[:, None] * v[None, :])
    coef = np.polynomial.chebyshev.chebfit(ts, vals, d)
    poly = np.polynomial.Chebyshev(coef).convert(kind=np.polynomial.Polynomial)
    c = poly.coef
    while len(c) > 1 and abs(c[-1]) <= 1e-14 * max(np.max(np.abs(c)), 1e-300):
        c = c[:-1]
    if len(c) <= 1:
        return np.array([0.0]) if abs(c[0]) < 1e-14 else np.array([])
    r = np.roots(c[::-1])
    real = r[np.abs(r.imag) < 1e-7 * (1 + np.abs(r.real))].real
    return real


def distance_to_variety(P: Polynomial, x, tol: float = 1e-10, n_directions: int = 24, seed: int = 0,
                        box_radius: float = 10.0) -> float:
    """Upper-biased estimate of the distance from x to V(P).

    Candidate points of V come from real roots of P on lines through x
    (coordinate axes, the gradient direction and random directions); the best
    one is polished by a constrained local minimization of |y - x|^2.
    Returns +inf when no point of V is found within ``box_radius``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if abs(P.numeric(x)) <= tol:
        return 0.0
    rng = np.random.default_rng(seed)
    dirs = [np.eye(n)[i] for i in range(n)]
    g = _grad_numeric(P)(x)
    if np.linalg.norm(g) > 0:
        dirs.append(g / np.linalg.norm(g))
    for _ in range(n_directions):
        v = rng.standard_normal(n)
        dirs.append(v / np.linalg.norm(v))
    best, best_y = np.inf, None
    for v in dirs:
        for t in _line_roots(P, x, v):
            if abs(t) < best and abs(t) < box_radius:
                y = x + t * v
                if abs(P.numeric(y)) <= 1e-8 * (1 + np.linalg.norm(y)) ** P.degree():
                    best, best_y = abs(t), y
    if best_y is None:
        return np.inf
    grads = P.gradient()
    res = minimize(lambda y: float(np.sum((y - x) ** 2)), best_y, jac=lambda y: 2 * (y - x),
                   constraints=[{"type": "eq", "fun": lambda y: float(P.numeric(y)),
                                 "jac": lambda y: np.array([q.numeric(y) for q in grads], dtype=float)}],
                   method="SLSQP", options={"ftol": 1e-14, "maxiter": 200})
    if res.success and abs(P.numeric(res.x)) <= tol * max(1.0, np.linalg.norm(res.x) ** P.degree()):
        d = float(np.linalg.norm(res.x - x))
        if d < best:
            return d
    return float(best)


def distance_statistic(abs_p: np.ndarray, dist: np.ndarray, nu: float) -> float:
    ld = np.log(dist)
    v = np.log(abs_p) - nu * ld
    low, high = _groups(ld)
    return float(v[low].min() - v[high].min())


def fit_distance_exponent(P: Polynomial, box=None, n_samples: int = 300, seed: int = 0,
                          tau: float = DEFAULT_TAU, nu_max: float | None = None) -> LojasiewiczFit:
    """Fit nu in |P| >= c' d(x, V)^nu, nu >= 1; oracle failures are dropped and counted."""
    if box is None:
        box = [(-1.0, 1.0)] * P.nvars
    x = sample_points(P, box, n_samples, seed)
    ap = np.abs(P.numeric(x))
    dist = np.array([distance_to_variety(P, xi, seed=seed + i) for i, xi in enumerate(x)])
    keep = np.isfinite(dist) & (dist > 0) & (ap > 1e-300)
    failures = int(np.sum(~np.isfinite(dist)))
    x, ap, dist = x[keep], ap[keep], dist[keep]
    if len(ap) < 3 or np.ptp(np.log(dist)) < 1e-9:
        raise LojasiewiczError("degenerate sample set for the distance fit")
    nu_max = nu_max if nu_max is not None else 2.0 * max(P.degree(), 1)
    grid = 1.0 + np.arange(0, int(round((nu_max - 1) * 120)) + 1) * GRID_STEP
    feas = [g for g in grid if distance_statistic(ap, dist, g) >= -tau]
    nu = float(min(feas)) if feas else float(grid[-1])
    nu = float(round(nu * 120) / 120)
    logc = np.min(np.log(ap) - nu * np.log(dist))
    return LojasiewiczFit("distance", nu, float(np.exp(logc)), x, ap, dist, 0.0, seed, tau, failures,
                          extra={"capped": not feas})


def verify_conic_refinement(P: Polynomial, fit: LojasiewiczFit | None = None, box=None, n_samples: int = 2000,
                            seed: int = 0, tol: float = 0.05, stability: float = 0.02) -> dict:
    """Check mu_hat <= 1/deg(P) + tol and that refitting on the half box moves mu_hat by < ``stability``."""
    if not P.is_homogeneous():
        raise LojasiewiczError("the conic refinement applies to homogeneous polynomials")
    if box is None:
        box = [(-1.0, 1.0)] * P.nvars
    fit = fit or fit_gradient_exponent(P, box, n_samples, seed)
    half = [(lo / 2, hi / 2) for lo, hi in np.asarray(box, dtype=float)]
    refit = fit_gradient_exponent(P, half, n_samples, seed)
    m = P.degree()
    bound = 1.0 / m + tol
    report = {
        "degree": m,
        "mu_hat": fit.exponent_hat,
        "mu_hat_half_box": refit.exponent_hat,
        "bound": bound,
        "within_bound": fit.exponent_hat <= bound + 1e-12,
        "scale_stable": abs(fit.exponent_hat - refit.exponent_hat) < stability,
    }
    if not report["within_bound"]:
        w = np.log(fit.other) - (1 - bound) * np.log(fit.abs_p)
        report["witness"] = fit.points[int(np.argmin(w))].tolist()
    report["ok"] = report["within_bound"] and report["scale_stable"]
    return report
