"""Multiplicity strata of a real hypersurface, tubes around them, and cutoffs.

The stratum of multiplicity k is the set of points of V(P) where P vanishes to
order exactly k.  Points are found numerically: starting from quasi-random
points, the residual vector of all partials of order below k is driven to zero
with a Levenberg-Marquardt solve, and the landing point is classified by its
numeric order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from . import profiles
from .poly import Polynomial, multi_indices, sum_sq_partials

SEARCH_BOX = 2.0
RESIDUAL_TOL = 1e-10
ORDER_RATIO = 1e-4
DEDUP_DIST = 1e-6
KEEP_LEVEL = 1e-9


class _PolyBatch:
    """Evaluate a list of polynomials at one point through a shared monomial table."""

    def __init__(self, polys: list[Polynomial], nvars: int):
        exps = sorted({e for q in polys for e in q.terms})
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), nvars)
        index = {e: i for i, e in enumerate(exps)}
        self.coef = np.zeros((len(polys), len(exps)))
        for r, q in enumerate(polys):
            for e, c in q.terms.items():
                self.coef[r, index[e]] = float(c)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if not len(self.exps):
            return np.zeros(len(self.coef))
        mono = np.prod(np.power(x[None, :], self.exps), axis=1)
        return self.coef @ mono


class _Partials:
    """Numeric evaluators for all partials of order <= kmax, grouped by order."""

    def __init__(self, p: Polynomial, kmax: int):
        self.p = p
        n = p.nvars
        self.by_order: list[list[Polynomial]] = []
        for k in range(kmax + 1):
            self.by_order.append([d for d in (p.derivative(j) for j in multi_indices(n, k)) if d])
        self.scale = float(max((abs(c) for c in p.terms.values()), default=1))
        self.degree = p.degree() or 0
        self._res = []
        self._jac = []
        self._lvl = []
        for k in range(kmax + 1):
            flat = [d for order in self.by_order[: k + 1] for d in order]
            self._res.append(_PolyBatch(flat, n))
            self._jac.append(_PolyBatch([g for d in flat for g in d.gradient()], n))
            self._lvl.append(_PolyBatch(self.by_order[k], n))

    def count(self, k: int) -> int:
        return sum(len(o) for o in self.by_order[: k + 1])

    def residuals(self, x: np.ndarray, k: int) -> np.ndarray:
        """Stacked values of all partials of order <= k at x (scaled)."""
        return self._res[k](np.asarray(x, dtype=float)) / self.scale

    def jacobian(self, x: np.ndarray, k: int) -> np.ndarray:
        return self._jac[k](np.asarray(x, dtype=float)).reshape(-1, self.p.nvars) / self.scale

    def level(self, x: np.ndarray, k: int) -> float:
        """P^k(x), normalized by coefficient size."""
        v = self._lvl[k](np.asarray(x, dtype=float))
        return float(np.dot(v, v)) / self.scale**2

    def numeric_order(self, x: np.ndarray, ratio: float = ORDER_RATIO) -> int:
        """Smallest k with P^k(x) above the relative threshold."""
        r2 = 1.0 + float(np.dot(x, x))
        for k in range(self.degree + 1):
            thresh = (RESIDUAL_TOL if k == 0 else ratio) * r2 ** (self.degree - k)
            if self.level(x, k) > thresh:
                return k
        return self.degree


def _project(part: _Partials, x0: np.ndarray, k: int, basis: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Drive all partials of order <= k to zero starting from x0.

    With ``basis`` (orthonormal rows) the search is restricted to the affine
    subspace x0 + span(basis), which slices positive-dimensional strata so the
    solve cannot slide along them toward a more singular point.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    B = np.eye(n) if basis is None else np.asarray(basis, dtype=float)
    if len(B) == 0:
        return x0, float(np.sum(part.residuals(x0, k) ** 2))

    def fun(z):
        return part.residuals(x0 + z @ B, k)

    def jac(z):
        return part.jacobian(x0 + z @ B, k) @ B.T

    method = "lm" if part.count(k) >= len(B) else "trf"
    res = least_squares(fun, np.zeros(len(B)), jac=jac, method=method,
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    x = x0 + res.x @ B
    return x, float(np.sum(part.residuals(x, k) ** 2))


def _slice_basis(n: int, cuts: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of the complement of ``cuts`` random directions."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q[:, cuts:].T


def _project_to_order(part: _Partials, x0: np.ndarray, k: int, rng: np.random.Generator):
    """Find a point of order exactly k near x0, slicing by more hyperplanes as needed.

    Returns (point, residual, order) of the last attempt.
    """
    n = len(x0)
    x, r = _project(part, x0, k - 1)
    if r > RESIDUAL_TOL or part.numeric_order(x) <= k:
        return x, r, part.numeric_order(x)
    for cuts in range(1, n):
        y, ry = _project(part, x0, k - 1, _slice_basis(n, cuts, rng))
        if ry <= RESIDUAL_TOL and part.numeric_order(y) == k:
            return y, ry, k
    return x, r, part.numeric_order(x)


def _classify(part: _Partials, x: np.ndarray, k: int) -> list[tuple[int, np.ndarray, float]]:
    """Sort a point of V_k into strata.

    A loose order test flags points that look more singular than k; those are
    polished onto the higher stratum.  If polishing moves the point, the
    original point is kept as a genuine order-k point as well.
    """
    j = part.numeric_order(x)
    if j <= k:
        return [(max(j, 1), x, 0.0)]
    y, r = _project(part, x, j - 1)
    out = []
    if r < RESIDUAL_TOL:
        jy = part.numeric_order(y)
        if jy >= j:
            out.append((jy, y, r))
    if np.linalg.norm(y - x) > 1e-4 or not out:
        # least squares may slide along the higher stratum, so distance alone does not
        # certify x; also require P^k(x) clearly away from zero
        if part.level(x, k) > KEEP_LEVEL * (1.0 + float(np.dot(x, x))) ** (part.degree - k):
            out.append((k, x, 0.0))
    return out


@dataclass
class Stratum:
    k: int
    Vk_def: Polynomial
    witnesses: list[np.ndarray] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    codim: int | None = None

    @property
    def empty_at_budget(self) -> bool:
        return not self.witnesses


@dataclass
class Stratification:
    P: Polynomial
    strata: list[Stratum]
    sample_budget: int

    @property
    def max_mult(self) -> int:
        found = [s.k for s in self.strata if s.witnesses]
        return max(found, default=0)

    def stratum(self, k: int) -> Stratum:
        for s in self.strata:
            if s.k == k:
                return s
        raise KeyError(k)

    def to_json(self) -> dict:
        return {
            "max_mult": self.max_mult,
            "sample_budget": self.sample_budget,
            "strata": [
                {
                    "k": s.k,
                    "codim": s.codim,
                    "empty_at_budget": s.empty_at_budget,
                    "witnesses": [[round(float(v), 12) for v in w] for w in s.witnesses],
                    "residuals": [float(f"{r:.3e}") for r in s.residuals],
                }
                for s in self.strata
            ],
        }


def _starts(n: int, count: int, seed: int) -> np.ndarray:
    if count <= 0:
        return np.zeros((0, n))
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(count, 2))))
    pts = sob.random_base2(m)[:count]
    return (2 * pts - 1) * SEARCH_BOX


def stratify(P: Polynomial, sample_budget: int = 64, seed: int = 0, estimate_codim: bool = True) -> Stratification:
    """Sample the multiplicity strata of V(P).

    ``sample_budget`` is the number of starting points per level k.  Strata
    that no search lands in are kept in the result with no witnesses.
    """
    if P.is_zero():
        raise ValueError("stratify needs a nonzero polynomial")
    d = P.degree()
    if d == 0:
        return Stratification(P, [], sample_budget)
    part = _Partials(P, d)
    strata = {k: Stratum(k, sum_sq_partials(P, k)) for k in range(1, d + 1)}
    rng = np.random.default_rng(seed)
    for k in range(1, d + 1):
        for x0 in _starts(P.nvars, sample_budget, seed + 7919 * k):
            x, r, _ = _project_to_order(part, x0, k, rng)
            if r > RESIDUAL_TOL or np.max(np.abs(x)) > 4 * SEARCH_BOX:
                continue
            for order, y, ry in _classify(part, x, k):
                st = strata[order]
                if any(np.linalg.norm(y - w) < DEDUP_DIST for w in st.witnesses):
                    continue
                st.witnesses.append(y)
                st.residuals.append(max(r, ry))
    out = Stratification(P, [strata[k] for k in range(1, d + 1)], sample_budget)
    if estimate_codim:
        for st in out.strata:
            if st.witnesses:
                st.codim = estimate_codimension(P, st.k, st.witnesses[0], rng=rng, part=part)
    return out


def local_cloud(P: Polynomial, k: int, x: np.ndarray, n_points: int = 24, radius: float = 1e-3,
                rng: np.random.Generator | None = None, part: _Partials | None = None) -> np.ndarray:
    """Points of the order-k stratum near x, by perturb-and-project."""
    rng = rng or np.random.default_rng(0)
    part = part or _Partials(P, P.degree())
    pts = []
    tries = 0
    while len(pts) < n_points and tries < 6 * n_points:
        tries += 1
        y0 = x + radius * rng.standard_normal(P.nvars)
        y, r, order = _project_to_order(part, y0, k, rng)
        if r < RESIDUAL_TOL and np.linalg.norm(y - x) < 10 * radius and order == k:
            pts.append(y)
    return np.array(pts).reshape(-1, P.nvars)


def estimate_codimension(P: Polynomial, k: int, x: np.ndarray, radius: float = 1e-3, rel_cut: float = 1e-3,
                         rng: np.random.Generator | None = None, part: _Partials | None = None) -> int | None:
    """Codimension of the stratum at x from the PCA rank of a local cloud of at least 20 points."""
    cloud = local_cloud(P, k, x, radius=radius, rng=rng, part=part)
    if len(cloud) < 20:
        return None
    s = np.linalg.svd(cloud - cloud.mean(axis=0), compute_uv=False)
    if s[0] < rel_cut * radius * np.sqrt(len(cloud)):
        return P.nvars
    dim = int(np.sum(s > rel_cut * s[0]))
    return P.nvars - dim


# --- tubes and cutoffs --------------------------------------------------------

class TubeSpec:
    """Plain tube {|P| < eps} or stratum tube {Q_k < eps^2} with Q_k = sum_{j<=k} P^j."""

    def __init__(self, P: Polynomial, epsilon: float, k: int | None = None):
        if not epsilon > 0:
            raise ValueError("tube epsilon must be positive")
        self.P = P
        self.epsilon = float(epsilon)
        self.k = k
        self.Qk_def = None
        if k is not None:
            self.Qk_def = sum((sum_sq_partials(P, j) for j in range(k + 1)), Polynomial.zero(P.nvars))

    def field(self, x) -> np.ndarray:
        """The scalar compared against the tube width: |P| or Q_k."""
        if self.k is None:
            return np.abs(self.P.numeric(x))
        return self.Qk_def.numeric(x)

    def width(self) -> float:
        return self.epsilon if self.k is None else self.epsilon**2

    def inside(self, x) -> np.ndarray:
        return self.field(x) < self.width()

    def signed(self, x) -> np.ndarray | None:
        # sign changes of P across a cell reveal a crossing even when no sample lands in the tube
        return self.P.numeric(x)

    def scaled(self, factor: float) -> "TubeSpec":
        return TubeSpec(self.P, self.epsilon * factor, self.k)

    def __repr__(self) -> str:
        return f"TubeSpec({self.P}, eps={self.epsilon:g}, k={self.k})"


def in_tube(spec: TubeSpec, x) -> bool | np.ndarray:
    out = spec.inside(np.asarray(x, dtype=float))
    return bool(out) if np.ndim(out) == 0 else out


def tube_ladder(epsilon: float, max_mult: int) -> dict[int, float]:
    """Default stratum tube widths eps_k = eps^(k / mu)."""
    mu = max(max_mult, 1)
    return {k: epsilon ** (k / mu) for k in range(1, mu + 1)}


class SmoothCutoff:
    """x -> phi(field(x) / width) with analytic gradient."""

    def __init__(self, spec: TubeSpec, width: float = profiles.DEFAULT_WIDTH):
        self.spec = spec
        self.width = width
        self._grad = spec.P.gradient() if spec.k is None else spec.Qk_def.gradient()

    def _t(self, x):
        return self.spec.field(x) / self.spec.width()

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return profiles.cutoff(self._t(x), self.width)

    __call__ = value

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dphi = profiles.cutoff_deriv(self._t(x), self.width)
        g = np.stack([q.numeric(x) for q in self._grad], axis=-1)
        if self.spec.k is None:
            g = g * np.sign(self.spec.P.numeric(x))[..., None]
        return dphi[..., None] * g / self.spec.width()


def smooth_cutoff(spec: TubeSpec, width: float = profiles.DEFAULT_WIDTH) -> SmoothCutoff:
    return SmoothCutoff(spec, width)


# --- class gH heuristic -----------------------------------------------------

def _slice_space(P: Polynomial, x: np.ndarray, rng: np.random.Generator, radius: float) -> np.ndarray:
    """Orthonormal basis of E = span of gradients of P at points of V near x."""
    part = _Partials(P, 1)
    grads = []
    grad_polys = P.gradient()
    for _ in range(40):
        y, r = _project(part, x + radius * rng.standard_normal(P.nvars), 0)
        if r < RESIDUAL_TOL and np.linalg.norm(y - x) < 10 * radius:
            g = np.array([q.numeric(y) for q in grad_polys])
            nrm = np.linalg.norm(g)
            if nrm > 1e-12:
                grads.append(g / nrm)
    if not grads:
        return np.zeros((0, P.nvars))
    _, s, vt = np.linalg.svd(np.array(grads))
    rank = int(np.sum(s > 1e-3 * s[0]))
    return vt[:rank]


def class_gH_check(P: Polynomial, strat: Stratification, sample_budget: int = 64, seed: int = 0,
                   radius: float = 1e-2) -> dict[int, str]:
    """Per-stratum verdict: "passes", "fails" or "inconclusive".

    Strata whose codimension is not 2 pass vacuously.  For a codimension-2
    stratum, E is estimated as the span of unit gradients of P at points of
    V near a witness x, and the slice x + E is searched for points of V away
    from x.  Finding one is reported as "passes"; not finding one only makes
    the result "inconclusive", since sampling cannot certify absence.
    """
    out: dict[int, str] = {}
    rng = np.random.default_rng(seed)
    part = _Partials(P, 0)
    for st in strat.strata:
        if sample_budget <= 0 or not st.witnesses or st.codim is None:
            out[st.k] = "inconclusive"
            continue
        if st.codim != 2:
            out[st.k] = "passes"
            continue
        x = st.witnesses[0]
        E = _slice_space(P, x, rng, radius)
        if len(E) == 0:
            out[st.k] = "inconclusive"
            continue
        found = False
        for _ in range(sample_budget):
            c0 = radius * rng.standard_normal(len(E))

            def res(c):
                return part.residuals(x + c @ E, 0)

            sol = least_squares(res, c0, method="trf", xtol=1e-14, ftol=1e-14, max_nfev=200)
            dist = np.linalg.norm(sol.x)
            if np.sum(res(sol.x) ** 2) < RESIDUAL_TOL and radius * 1e-2 < dist < 10 * radius:
                found = True
                break
        out[st.k] = "passes" if found else "inconclusive"
    return out
