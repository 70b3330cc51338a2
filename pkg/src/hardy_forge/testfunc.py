"""Test functions vanishing on a tube around V(P).

    f(x) = A * b(|x - c|^2 / R^2) * (1 - phi(|P(x)| / eps)) * |P(x)|^a

``b`` is the radial bump, ``phi`` the tube cutoff and ``a >= 0`` an optional
vanishing exponent.  Value and gradient are analytic numpy code; derivative
tensors of order 2 to 4 come from jax forward-mode differentiation of the same
formula, and higher orders from nested central differences.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace

import numpy as np

from . import profiles
from .poly import Polynomial

JAX_MAX_ORDER = 4
_CHUNK = 32768


@functools.lru_cache(maxsize=1)
def _jax():
    import jax

    jax.config.update("jax_enable_x64", True)
    import jax.numpy as jnp

    return jax, jnp


@dataclass(frozen=True)
class TestFunction:
    P: Polynomial
    center: tuple[float, ...]
    radius: float
    tube_eps: float
    amplitude: float = 1.0
    vanishing: float = 0.0
    cutoff_width: float = profiles.DEFAULT_WIDTH

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.radius <= 0 or self.tube_eps <= 0:
            raise ValueError("radius and tube_eps must be positive")
        if len(self.center) != self.P.nvars:
            raise ValueError("center dimension does not match nvars")

    @property
    def nvars(self) -> int:
        return self.P.nvars

    @functools.cached_property
    def _grad_polys(self):
        return self.P.gradient()

    def support_box(self) -> list[tuple[float, float]]:
        return [(c - self.radius, c + self.radius) for c in self.center]

    def _parts(self, x):
        c = np.asarray(self.center)
        d = x - c
        q = np.sum(d * d, axis=-1) / self.radius**2
        p = self.P.numeric(x)
        ap = np.abs(p)
        live = ap > self.tube_eps
        safe = np.where(live, ap, 2 * self.tube_eps)
        t = safe / self.tube_eps
        cut = np.where(live, 1.0 - profiles.cutoff(t, self.cutoff_width), 0.0)
        pw = np.where(live, safe**self.vanishing, 0.0)
        return d, q, p, live, safe, t, cut, pw

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        _, q, _, _, _, _, cut, pw = self._parts(x)
        return self.amplitude * profiles.bump_q(q) * cut * pw

    __call__ = value

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d, q, p, live, safe, t, cut, pw = self._parts(x)
        b = profiles.bump_q(q)
        db = profiles.bump_q_deriv(q)
        C = cut * pw
        # d/dp of (1 - phi(|p|/eps)) |p|^a
        dphi = profiles.cutoff_deriv(t, self.cutoff_width)
        a = self.vanishing
        dC_abs = np.where(live, -dphi / self.tube_eps * safe**a
                          + (cut * a * safe ** (a - 1) if a else 0.0), 0.0)
        dC = dC_abs * np.sign(p)
        gp = np.stack([g.numeric(x) for g in self._grad_polys], axis=-1)
        return self.amplitude * (db[..., None] * 2 * d / self.radius**2 * C[..., None]
                                 + b[..., None] * dC[..., None] * gp)

    # --- jax formula ---------------------------------------------------------

    @functools.cached_property
    def _jax_scalar(self):
        jax, jnp = _jax()
        terms = [(tuple(int(e) for e in exp), float(c)) for exp, c in self.P.sorted_terms()]
        c0 = jnp.asarray(self.center, dtype=jnp.float64)
        R2 = self.radius**2
        eps = self.tube_eps
        a = float(self.vanishing)
        A = self.amplitude
        w = self.cutoff_width

        def poly(x):
            out = 0.0
            for exp, c in terms:
                t = c
                for i, e in enumerate(exp):
                    if e:
                        t = t * x[i] ** e
                out = out + t
            return out

        def f(x):
            d = x - c0
            q = jnp.sum(d * d) / R2
            b = profiles.bump_q(q, xp=jnp)
            p = poly(x)
            live = jnp.abs(p) > eps
            ap = jnp.where(live, jnp.abs(jnp.where(live, p, 2 * eps)), 2 * eps)
            cut = 1.0 - profiles.cutoff(ap / eps, w, xp=jnp)
            pw = ap**a if a else 1.0
            return A * b * jnp.where(live, cut * pw, 0.0)

        return f

    @functools.lru_cache(maxsize=8)
    def _jax_tensor_fn(self, order: int):
        jax, jnp = _jax()
        g = self._jax_scalar
        for _ in range(order):
            g = jax.jacfwd(g)

        def norm2(x):
            t = g(x)
            return jnp.sum(t * t)

        return jax.jit(jax.vmap(norm2))

    def derivative_norm2(self, x, order: int, fd_step: float | None = None) -> np.ndarray:
        """|nabla^order f|^2 summed over all ordered index tuples."""
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.value(x) ** 2
        if order == 1:
            g = self.gradient(x)
            return np.sum(g * g, axis=-1)
        if order <= JAX_MAX_ORDER:
            fn = self._jax_tensor_fn(order)
            flat = x.reshape(-1, self.nvars)
            out = np.concatenate([np.asarray(fn(flat[i:i + _CHUNK])) for i in range(0, len(flat), _CHUNK)]) \
                if len(flat) else np.zeros(0)
            return out.reshape(x.shape[:-1])
        return self._fd_norm2(x, order, fd_step or 1e-2 * self.radius)

    def derivative_tensor(self, x, order: int) -> np.ndarray:
        """Full derivative tensor at a single point (jax up to order 4)."""
        jax, _ = _jax()
        g = self._jax_scalar
        for _ in range(order):
            g = jax.jacfwd(g)
        return np.asarray(g(np.asarray(x, dtype=float)))

    def _fd_norm2(self, x, order: int, h: float) -> np.ndarray:
        # nested central differences of the order-4 tensor; accuracy degrades like h^2 per level
        jax, jnp = _jax()
        g = self._jax_scalar
        for _ in range(JAX_MAX_ORDER):
            g = jax.jacfwd(g)
        base = jax.jit(jax.vmap(g))
        n = self.nvars
        extra = order - JAX_MAX_ORDER

        def tensor(pts, level):
            if level == 0:
                return np.asarray(base(pts))
            parts = []
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                parts.append((tensor(pts + e, level - 1) - tensor(pts - e, level - 1)) / (2 * h))
            return np.stack(parts, axis=-1)

        flat = x.reshape(-1, n)
        t = tensor(flat, extra)
        return np.sum(t.reshape(len(flat), -1) ** 2, axis=-1).reshape(x.shape[:-1])

    # --- transformations ----------------------------------------------------

    def with_eps(self, eps: float) -> "TestFunction":
        return replace(self, tube_eps=eps)

    def scaled(self, lam: float) -> "TestFunction":
        """The function x -> f(lam x), valid for homogeneous P."""
        if not self.P.is_homogeneous():
            raise ValueError("scaling needs a homogeneous polynomial")
        d = self.P.degree()
        return replace(self, center=tuple(c / lam for c in self.center), radius=self.radius / lam,
                       tube_eps=self.tube_eps / lam**d, amplitude=self.amplitude * lam ** (d * self.vanishing))

    def to_json(self) -> dict:
        return {
            "center": [round(float(c), 12) for c in self.center],
            "radius": round(float(self.radius), 12),
            "tube_eps": float(f"{self.tube_eps:.12e}"),
            "amplitude": self.amplitude,
            "vanishing": self.vanishing,
        }


@dataclass(frozen=True)
class LogBump1D:
    """One-dimensional profile on (0, inf) written in t = log x.

    f(x) = x^beta * sum_i w_i b(((log x - m_i) / s_i)^2)
    """

    beta: float
    mids: tuple[float, ...]
    scales: tuple[float, ...]
    weights: tuple[float, ...]

    def t_support(self) -> tuple[float, float]:
        lo = min(m - s for m, s in zip(self.mids, self.scales))
        hi = max(m + s for m, s in zip(self.mids, self.scales))
        return lo, hi

    def h(self, t):
        """The log-variable profile h(t) = x^-beta f(x)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m, s, w in zip(self.mids, self.scales, self.weights):
            out = out + w * profiles.bump_q(((t - m) / s) ** 2)
        return out

    def dh(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for m, s, w in zip(self.mids, self.scales, self.weights):
            u = (t - m) / s
            out = out + w * profiles.bump_q_deriv(u * u) * 2 * u / s
        return out

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return x**self.beta * self.h(np.log(x))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        t = np.log(x)
        return x ** (self.beta - 1) * (self.beta * self.h(t) + self.dh(t))


@dataclass(frozen=True)
class Bump1D:
    """f(x) = b(((x - c) / r)^2) on the line, with jax derivatives of any order."""

    c: float
    r: float

    def support(self) -> tuple[float, float]:
        return self.c - self.r, self.c + self.r

    def value(self, x):
        return profiles.bump_q(((np.asarray(x, dtype=float) - self.c) / self.r) ** 2)

    @functools.lru_cache(maxsize=8)
    def _deriv_fn(self, order: int):
        jax, jnp = _jax()
        c, r = self.c, self.r

        def f(x):
            return profiles.bump_q(((x - c) / r) ** 2, xp=jnp)

        g = f
        for _ in range(order):
            g = jax.grad(g)
        return jax.jit(jax.vmap(g))

    def derivative(self, x, order: int = 1):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.value(x)
        return np.asarray(self._deriv_fn(order)(x.reshape(-1))).reshape(x.shape)
