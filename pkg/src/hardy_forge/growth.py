"""Sublevel-set integrals and their growth in the level.

    I(eta) = int phi(|P| / eta) phi(eps0 / |P|) zeta^2 dx

``phi`` is the smooth cutoff (1 below 1, 0 above 1 + width).  Profiles tabulate
I on a geometric eta-grid; the eta-derivative is taken two ways (central
differences in log eta and the integral identity obtained by differentiating
under the integral sign) and the doubling and differential inequalities are
fitted on the tabulated values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import profiles
from .poly import Polynomial
from .quadrature import QuadratureGrid, build_grid, integrate

GRID_RATIO_EXP = 8  # eta-grid ratio 2^(1/8)


class GrowthError(ValueError):
    pass


@dataclass(frozen=True)
class ZetaField:
    """Scalar weight with analytic gradient and its declared (gamma, delta)."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    gamma: float
    delta: float


def zeta_constant(c: float = 1.0) -> ZetaField:
    return ZetaField(f"const({c:g})", lambda x: np.full(x.shape[:-1], float(c)),
                     lambda x: np.zeros_like(x), 0.0, 0.0)


def zeta_exp_x1() -> ZetaField:
    def grad(x):
        g = np.zeros_like(x)
        g[..., 0] = np.exp(x[..., 0])
        return g

    return ZetaField("exp(x1)", lambda x: np.exp(x[..., 0]), grad, 1.0, 0.0)


def zeta_sin_x1() -> ZetaField:
    def grad(x):
        g = np.zeros_like(x)
        g[..., 0] = np.cos(x[..., 0])
        return g

    return ZetaField("sin(x1)", lambda x: np.sin(x[..., 0]), grad, 0.0, 1.0)


ZETAS = {"const": zeta_constant, "exp": zeta_exp_x1, "sin": zeta_sin_x1}


def gradient_estimate_check(zeta: ZetaField, gamma: float, delta: float, points) -> float:
    """max over the cloud of |grad zeta| - gamma |zeta| - delta; <= 0 means the estimate holds."""
    x = np.asarray(points, dtype=float)
    g = np.linalg.norm(zeta.gradient(x), axis=-1)
    return float(np.max(g - gamma * np.abs(zeta.value(x)) - delta))


def eta_grid(eta_min: float, eta_max: float, ratio_exp: int = GRID_RATIO_EXP) -> np.ndarray:
    """Geometric grid eta_min * 2^(j / ratio_exp) up to eta_max (inclusive within rounding)."""
    if not 0 < eta_min < eta_max:
        raise GrowthError("need 0 < eta_min < eta_max")
    steps = int(math.floor(ratio_exp * math.log2(eta_max / eta_min) + 1e-9))
    return eta_min * 2.0 ** (np.arange(steps + 1) / ratio_exp)


def default_box(P: Polynomial, level: float, seed: int = 0) -> list[tuple[float, float]]:
    """Cube containing {|P| <= level} for homogeneous P positive off the origin."""
    m = P.degree()
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((4096, P.nvars))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    lo = float(np.min(np.abs(P.numeric(u))))
    if not P.is_homogeneous() or lo < 1e-3:
        raise GrowthError("sublevel set not bounded; pass an explicit box")
    R = 1.05 * (level / (0.9 * lo)) ** (1.0 / m)
    return [(-R, R)] * P.nvars


@dataclass
class GrowthProfile:
    P: Polynomial
    zeta: ZetaField
    eps0: float
    eta_grid: np.ndarray
    box: list[tuple[float, float]]
    depth: int = 9
    width: float = profiles.DEFAULT_WIDTH
    I_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    _grid: QuadratureGrid | None = field(default=None, repr=False)

    @property
    def gamma(self) -> float:
        return self.zeta.gamma

    @property
    def delta(self) -> float:
        return self.zeta.delta

    @property
    def m(self) -> int:
        return self.P.degree()

    @property
    def grid(self) -> QuadratureGrid:
        if self._grid is None:
            self._grid = build_grid(self.box, depth=self.depth)
        return self._grid

    def to_json(self) -> dict:
        return {
            "zeta": self.zeta.name,
            "gamma": self.gamma,
            "delta": self.delta,
            "eps0": float(f"{self.eps0:.12e}"),
            "box": [list(b) for b in self.box],
            "depth": self.depth,
            "cutoff_width": self.width,
            "eta_grid": [float(f"{e:.12e}") for e in self.eta_grid],
            "I_values": [float(f"{v:.12e}") for v in self.I_values],
        }


def _lower(eps0: float, ap: np.ndarray, width: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        t = np.where(ap > 0, eps0 / np.where(ap > 0, ap, 1.0), np.inf)
    return np.where(np.isfinite(t), profiles.cutoff(np.where(np.isfinite(t), t, 0.0), width), 0.0)


def growth_integrand(profile: GrowthProfile, eta: float) -> Callable[[np.ndarray], np.ndarray]:
    P, w = profile.P, profile.width

    def f(x):
        ap = np.abs(P.numeric(x))
        z = profile.zeta.value(x)
        return profiles.cutoff(ap / eta, w) * _lower(profile.eps0, ap, w) * z * z

    return f


def growth_integral(profile: GrowthProfile, eta: float) -> float:
    if eta <= 0:
        raise GrowthError("eta must be positive")
    return integrate(profile.grid, growth_integrand(profile, eta))


def build_profile(P: Polynomial, zeta: ZetaField | None = None, eta_min: float = 0.01, eta_max: float = 1.0,
                  box=None, depth: int = 9, eps0: float | None = None, ratio_exp: int = GRID_RATIO_EXP,
                  width: float = profiles.DEFAULT_WIDTH, threads: int = 1) -> GrowthProfile:
    """Tabulate I on the geometric grid; eps0 defaults to eta_min / 8."""
    zeta = zeta or zeta_constant()
    eps0 = eta_min / 8 if eps0 is None else eps0
    if not 0 < eps0 < eta_min:
        raise GrowthError("need 0 < eps0 < eta_min")
    grid_eta = eta_grid(eta_min, eta_max, ratio_exp)
    box = box if box is not None else default_box(P, eta_max * (1 + width))
    prof = GrowthProfile(P, zeta, eps0, grid_eta, [tuple(map(float, b)) for b in box], depth, width)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(lambda e: growth_integral(prof, e), grid_eta))
    else:
        vals = [growth_integral(prof, e) for e in grid_eta]
    prof.I_values = np.asarray(vals)
    return prof


def _log_step(profile: GrowthProfile) -> float:
    g = profile.eta_grid
    return float(np.log(g[1] / g[0]))


def eta_dI(profile: GrowthProfile) -> tuple[np.ndarray, np.ndarray]:
    """(interior etas, eta dI/deta) by central differences in log eta."""
    if len(profile.eta_grid) < 3:
        raise GrowthError("empty interior grid")
    I = profile.I_values
    return profile.eta_grid[1:-1], (I[2:] - I[:-2]) / (2 * _log_step(profile))


def identity_rhs(profile: GrowthProfile, eta: float) -> float:
    """-int (P / |grad P|^2) zeta^2 grad P . grad[phi(|P| / eta)] phi(eps0 / |P|)."""
    P, w = profile.P, profile.width
    grads = P.gradient()

    def f(x):
        p = P.numeric(x)
        ap = np.abs(p)
        gp = np.stack([q.numeric(x) for q in grads], axis=-1)
        g2 = np.sum(gp * gp, axis=-1)
        lower = _lower(profile.eps0, ap, w)
        dphi = profiles.cutoff_deriv(ap / eta, w)
        active = (dphi != 0) & (lower != 0)
        if np.any(active & (g2 == 0)):
            bad = x[active & (g2 == 0)][0]
            raise GrowthError(f"grad P vanishes on the integration support at {bad.tolist()}")
        # grad phi(|P|/eta) = phi'(|P|/eta) sign(P) grad P / eta
        dot = np.where(active, dphi * np.sign(p) * g2 / eta, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(active, p / np.where(g2 > 0, g2, 1.0), 0.0)
        z = profile.zeta.value(x)
        return -ratio * z * z * dot * lower

    return integrate(profile.grid, f)


def eta_derivative_check(profile: GrowthProfile, eta: float) -> tuple[float, float, float]:
    """(lhs, rhs, relative gap) at an interior grid eta."""
    g = profile.eta_grid
    idx = int(np.argmin(np.abs(np.log(g / eta))))
    if not 0 < idx < len(g) - 1 or not math.isclose(g[idx], eta, rel_tol=1e-9):
        raise GrowthError("eta must be an interior grid point")
    lhs = float((profile.I_values[idx + 1] - profile.I_values[idx - 1]) / (2 * _log_step(profile)))
    rhs = identity_rhs(profile, float(g[idx]))
    scale = max(abs(lhs), abs(rhs))
    return lhs, rhs, abs(lhs - rhs) / scale if scale else 0.0


def pointwise_identity_gap(P: Polynomial, eta: float, points, width: float = profiles.DEFAULT_WIDTH) -> float:
    """max |eta d/deta phi(|P|/eta) - (-(P/|grad P|^2) grad P . grad phi(|P|/eta))| on the points."""
    x = np.asarray(points, dtype=float)
    p = P.numeric(x)
    ap = np.abs(p)
    gp = np.stack([q.numeric(x) for q in P.gradient()], axis=-1)
    g2 = np.sum(gp * gp, axis=-1)
    dphi = profiles.cutoff_deriv(ap / eta, width)
    lhs = -(ap / eta) * dphi
    grad_phi = (dphi * np.sign(p) / eta)[..., None] * gp
    rhs = -(p / g2) * np.sum(gp * grad_phi, axis=-1)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class InequalityFit:
    constant: float
    argmax_eta: float
    ratios: tuple[float, ...]

    def to_json(self) -> dict:
        return {"constant": float(f"{self.constant:.12e}"), "argmax_eta": float(f"{self.argmax_eta:.12e}")}


def fit_differential_inequality(profile: GrowthProfile) -> InequalityFit:
    """Smallest C with dI/deta <= C (gamma^2 eta^(2/m - 1) I + eta^(1/m)) on the interior grid."""
    etas, e_dI = eta_dI(profile)
    dI = e_dI / etas
    I = profile.I_values[1:-1]
    m = profile.m
    bound = profile.gamma**2 * etas ** (2.0 / m - 1) * I + etas ** (1.0 / m)
    ratios = dI / bound
    k = int(np.argmax(ratios))
    return InequalityFit(float(max(ratios[k], 0.0)), float(etas[k]), tuple(float(r) for r in ratios))


def doubling_pairs(profile: GrowthProfile) -> list[tuple[int, int]]:
    """Index pairs (i, j) with eta_j = eta_i / 2, keeping eta_i / 2 >= 2 eta_min."""
    g = profile.eta_grid
    steps = int(round(math.log(2) / _log_step(profile)))
    return [(i, i - steps) for i in range(steps, len(g)) if g[i - steps] >= 2 * g[0] * (1 - 1e-12)]


def doubling_ratios(profile: GrowthProfile) -> list[tuple[float, float]]:
    out = []
    for i, j in doubling_pairs(profile):
        hi, lo = profile.I_values[i], profile.I_values[j]
        if lo == 0:
            if hi > 0:
                raise GrowthError(f"I(eta/2) = 0 with I(eta) > 0 at eta = {profile.eta_grid[i]:.6g}")
            continue
        out.append((float(profile.eta_grid[i]), float(hi / lo)))
    return out


def doubling_check(profile: GrowthProfile, c1: float | None = None, c2: float | None = None,
                   baseline_c1: float | None = None) -> dict:
    """Check I(eta) <= c1 exp(c2 gamma^2 eta^(2/m)) I(eta/2) on every doubling pair.

    Without (c1, c2) the constants are fitted: c1 as the max ratio with c2 = 0,
    then c2 as the smallest value that works with c1 fixed at the gamma = 0
    baseline (the max ratio for zeta = 1 on the same grid unless supplied).
    """
    pairs = doubling_ratios(profile)
    if not pairs:
        raise GrowthError("no eta / eta/2 pairs on the grid")
    m, g2 = profile.m, profile.gamma**2
    out: dict = {"pairs": [{"eta": e, "ratio": r} for e, r in pairs]}
    if c1 is None:
        out["c1_at_c2_zero"] = max(r for _, r in pairs)
        if baseline_c1 is None:
            base = build_profile(profile.P, zeta_constant(), float(profile.eta_grid[0]), float(profile.eta_grid[-1]),
                                 profile.box, profile.depth, profile.eps0,
                                 int(round(math.log(2) / _log_step(profile))), profile.width)
            baseline_c1 = max(r for _, r in doubling_ratios(base))
        c1 = baseline_c1
        need = [math.log(r / c1) / (g2 * e ** (2.0 / m)) if g2 > 0 else (0.0 if r <= c1 else math.inf)
                for e, r in pairs]
        c2 = max(0.0, max(need))
        out["fitted"] = True
    c2 = 0.0 if c2 is None else c2
    holds = [r <= c1 * math.exp(c2 * g2 * e ** (2.0 / m)) * (1 + 1e-12) for e, r in pairs]
    out.update({"c1": c1, "c2": c2, "holds": holds, "all_hold": all(holds)})
    return out


def conic_step_check(P: Polynomial, c: float, points) -> float:
    """max of |P| / |grad P| - c |P|^(1/m) on the points (<= 0 when the conic step holds)."""
    x = np.asarray(points, dtype=float)
    ap = np.abs(P.numeric(x))
    ag = np.linalg.norm(np.stack([q.numeric(x) for q in P.gradient()], axis=-1), axis=-1)
    keep = (ap > 0) & (ag > 0)
    return float(np.max(ap[keep] / ag[keep] - c * ap[keep] ** (1.0 / P.degree())))


def area_oracle(eta: float, eps0: float, width: float = profiles.DEFAULT_WIDTH) -> float:
    """I(eta) for P = x1^2 + x2^2, zeta = 1: pi int_0^inf phi(t/eta) phi(eps0/t) dt by scipy quad."""
    from scipy.integrate import quad

    def f(t):
        return float(profiles.cutoff(np.array(t / eta), width) * profiles.cutoff(np.array(eps0 / t), width))

    lo = eps0 / (1 + width)
    hi = eta * (1 + width)
    pts: Sequence[float] = sorted({eps0, min(eta, hi)})
    val, _ = quad(f, lo, hi, points=pts, limit=200, epsabs=1e-13, epsrel=1e-11)
    return math.pi * val
