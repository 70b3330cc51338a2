"""Local resolution of a hypersurface singularity by coordinate blow-ups.

The loop at each node of a resolution tree is:

1. make the polynomial regular in the last variable by a linear change,
2. split it as Q * x_n^m + sum_{k<m} c_k x_n^k (Weierstrass-style division),
   translating x_n to kill c_{m-1} when Q is constant,
3. read off the exponent vector gamma when every c_k is a power of one
   monomial x^gamma times a cofactor and one cofactor is a unit,
4. blow up the center {x_i = 0, i in I} ∩ {x_n = 0} and recurse in every chart.

All algebra is exact; every node keeps the composite map back to the root
coordinates, the exceptional factor and the volume Jacobian as polynomials.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .poly import Polynomial, PolynomialError, format_poly, identity_images

Gamma = tuple[Fraction, ...]


class ResolutionError(RuntimeError):
    pass


# --- charts ---------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    """Chart k of the blow-up of {x_i = 0 : i in blown}.

    In the chart, x_k = y_k, x_j = y_k * y_j for the other blown-up j, and the
    carried variables are unchanged.
    """

    nvars: int
    blown: tuple[int, ...]
    k: int

    def __post_init__(self):
        if self.k not in self.blown:
            raise ValueError("chart index must be one of the blown-up variables")
        if len(set(self.blown)) != len(self.blown) or not all(0 <= i < self.nvars for i in self.blown):
            raise ValueError("bad blown-up variable set")

    @property
    def codim(self) -> int:
        return len(self.blown)

    @property
    def jacobian_exponent(self) -> int:
        return self.codim - 1

    def images(self) -> list[Polynomial]:
        n = self.nvars
        y = identity_images(n)
        return [y[self.k] * y[i] if (i in self.blown and i != self.k) else y[i] for i in range(n)]

    def jacobian(self) -> Polynomial:
        exp = [0] * self.nvars
        exp[self.k] = self.jacobian_exponent
        return Polynomial.monomial(exp)

    def forward(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        x = y.copy()
        for j in self.blown:
            if j != self.k:
                x[..., j] = y[..., self.k] * y[..., j]
        return x

    def inverse(self, x: Sequence) -> list:
        """Chart coordinates of a point with x_k != 0 (exact for rationals)."""
        if not x[self.k]:
            raise ZeroDivisionError("point lies on the exceptional locus of this chart")
        y = list(x)
        for j in self.blown:
            if j != self.k:
                y[j] = x[j] / x[self.k] if isinstance(x[j], float) else Fraction(x[j]) / Fraction(x[self.k])
        return y

    def to_json(self) -> dict:
        return {"nvars": self.nvars, "blown": list(self.blown), "k": self.k, "codim": self.codim}

    def describe(self) -> str:
        parts = []
        for i in range(self.nvars):
            if i in self.blown and i != self.k:
                parts.append(f"x{i + 1}=y{self.k + 1}*y{i + 1}")
            elif i == self.k:
                parts.append(f"x{i + 1}=y{i + 1}")
        return ", ".join(parts)


def apply_chart(P: Polynomial, chart: Chart, m: int) -> tuple[Polynomial, Polynomial]:
    """Total transform and strict transform (total / y_k^m)."""
    if P.nvars != chart.nvars:
        raise PolynomialError("chart and polynomial disagree on nvars")
    total = P.substitute(chart.images())
    strict = total.factor_out_variable_power(chart.k, m)
    return total, strict


def ykm(nvars: int, k: int, m: int) -> Polynomial:
    exp = [0] * nvars
    exp[k] = m
    return Polynomial.monomial(exp)


# --- regularity and division -------------------------------------------------------

@dataclass(frozen=True)
class Regularization:
    """x = a + M y with M an exact rational matrix (rows index x)."""

    matrix: tuple[tuple[Fraction, ...], ...]
    kind: str

    def images(self) -> list[Polynomial]:
        n = len(self.matrix)
        y = identity_images(n)
        return [sum((y[j] * c for j, c in enumerate(row) if c), Polynomial.zero(n)) for row in self.matrix]

    def det(self) -> Fraction:
        return _det(self.matrix)


def _det(M) -> Fraction:
    A = [list(map(Fraction, row)) for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            for j in range(c, n):
                A[r][j] -= f * A[c][j]
    return det


def _candidate_matrices(n: int, max_shear: int = 3):
    eye = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    yield "identity", eye
    for i in range(n - 1):
        M = [row[:] for row in eye]
        M[i], M[n - 1] = M[n - 1], M[i]
        yield f"swap x{i + 1}<->x{n}", M
    if n == 1:
        return
    vecs = [v for v in itertools.product(range(-max_shear, max_shear + 1), repeat=n - 1) if any(v)]
    vecs.sort(key=lambda v: (max(abs(c) for c in v), [abs(c) for c in v], [-c for c in v]))
    for v in vecs:
        M = [row[:] for row in eye]
        for i, c in enumerate(v):
            M[i][n - 1] = Fraction(c)
        yield "shear " + ",".join(str(c) for c in v), M


def rotate_to_regular(P: Polynomial, a: Sequence | None = None) -> tuple[Regularization, Polynomial]:
    """Linear change after which the initial form at ``a`` is nonzero on the x_n-axis.

    Returns the change and P(a + M y).  Tries the identity, then swapping each
    axis into last position, then integer shears x_i -> x_i + c_i x_n in a fixed
    order (smallest max-norm first).
    """
    n = P.nvars
    a = tuple(Fraction(v) for v in (a if a is not None else (0,) * n))
    base = P.translate(a) if any(a) else P
    if base.is_zero():
        raise ResolutionError("zero polynomial has no regular direction")
    init = base.homogeneous_component(base.min_degree())
    for kind, M in _candidate_matrices(n):
        direction = [row[n - 1] for row in M]
        if init.evaluate(direction) != 0:
            reg = Regularization(tuple(tuple(r) for r in M), kind)
            out = base if kind == "identity" else base.substitute(reg.images())
            return reg, out
    raise ResolutionError("shear sequence exhausted without a regular direction")


@dataclass(frozen=True)
class WeierstrassData:
    m: int
    Q: Polynomial
    coeffs: tuple[Polynomial, ...]
    translation: Polynomial
    poly: Polynomial
    flags: tuple[str, ...] = ()

    def reconstruct(self) -> Polynomial:
        n = self.poly.nvars
        xn = Polynomial.variable(n, n - 1)
        out = self.Q * xn**self.m
        for k, c in enumerate(self.coeffs):
            out = out + c * xn**k
        return out

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "Q": format_poly(self.Q),
            "coeffs": [format_poly(c) for c in self.coeffs],
            "translation": format_poly(self.translation),
            "flags": list(self.flags),
        }


def _split(P: Polynomial, m: int) -> tuple[Polynomial, list[Polynomial]]:
    n = P.nvars
    groups = P.coefficients_in(n - 1)
    xn = Polynomial.variable(n, n - 1)
    Q = Polynomial.zero(n)
    for k, c in groups.items():
        if k >= m:
            Q = Q + c * xn ** (k - m)
    coeffs = [groups.get(k, Polynomial.zero(n)) for k in range(m)]
    return Q, coeffs


def weierstrass_split(P: Polynomial, m: int) -> WeierstrassData:
    """Split P = Q x_n^m + sum c_k x_n^k and translate x_n to kill c_{m-1} when Q is constant."""
    n = P.nvars
    Q, coeffs = _split(P, m)
    if Q.constant_term() == 0:
        raise ResolutionError("P is not regular of the given order in the last variable")
    shift = Polynomial.zero(n)
    flags = []
    if m >= 1 and coeffs[m - 1]:
        if Q.is_constant():
            shift = coeffs[m - 1] / (m * Q.constant_term())
            images = identity_images(n)
            images[n - 1] = images[n - 1] - shift
            P = P.substitute(images)
            Q, coeffs = _split(P, m)
            if coeffs[m - 1]:
                raise ResolutionError("translation failed to remove c_{m-1}")
        else:
            flags.append("translation_skipped")
    return WeierstrassData(m, Q, tuple(coeffs), shift, P, tuple(flags))


def aux_function(W: WeierstrassData) -> Polynomial:
    """Product of the nonzero c_k^(m!/(m-k)) and their nonzero pairwise differences."""
    m = W.m
    fm = math.factorial(m)
    powers = [c ** (fm // (m - k)) for k, c in enumerate(W.coeffs) if c]
    out = Polynomial.constant(W.poly.nvars, 1)
    for p in powers:
        out = out * p
    for p, q in itertools.combinations(powers, 2):
        diff = p - q
        if diff:
            out = out * diff
    return out


def case_star_check(W: WeierstrassData) -> Gamma | None:
    """The exponent gamma when every c_k = (x^gamma)^(m-k) * c_k* with some c_k*(0) != 0.

    gamma is indexed by the first n-1 variables.  Returns None when the
    candidate exponents have no least element or no cofactor at gamma is a unit.
    """
    m = W.m
    n = W.poly.nvars
    cands = []
    for k, c in enumerate(W.coeffs):
        if not c:
            continue
        omega = c.monomial_content()
        norm = tuple(Fraction(e, m - k) for e in omega[: n - 1])
        cands.append((k, omega, norm))
    if not cands:
        return None
    gamma = None
    for _, _, g in cands:
        if all(all(gi <= hi for gi, hi in zip(g, h)) for _, _, h in cands):
            gamma = g
            break
    if gamma is None:
        return None
    for k, omega, g in cands:
        if g == gamma and W.coeffs[k].divide_by_monomial(omega).constant_term() != 0:
            return gamma
    return None


def select_center(gamma: Sequence[Fraction], m: int | None = None) -> tuple[int, ...]:
    """Minimal-cardinality I with sum_{i in I} gamma_i >= 1, lexicographically first."""
    gamma = [Fraction(g) for g in gamma]
    if sum(gamma) < 1:
        raise ResolutionError("|gamma| < 1: no admissible center, the order must already drop")
    for size in range(1, len(gamma) + 1):
        for I in itertools.combinations(range(len(gamma)), size):
            s = sum(gamma[i] for i in I)
            if s >= 1 and all(s - 1 < gamma[i] for i in I):
                return I
    raise ResolutionError("no admissible center found")


def is_normal_crossings(P: Polynomial, a: Sequence | None = None) -> bool:
    """Monomial times a unit after moving ``a`` to the origin."""
    base = P.translate(a) if a is not None and any(a) else P
    if base.is_zero():
        return False
    cof = base.divide_by_monomial(base.monomial_content())
    return cof.constant_term() != 0


# --- the tree ---------------------------------------------------------------------

@dataclass
class ResolutionNode:
    id: int
    parent: int | None
    depth: int
    poly: Polynomial
    mult: int
    chart: Chart | None
    to_root: list[Polynomial]
    exc_factor: Polynomial
    jacobian: Polynomial
    status: str = "pending"
    regularization: Regularization | None = None
    weierstrass: WeierstrassData | None = None
    gamma: Gamma | None = None
    center: tuple[int, ...] | None = None
    children: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    gen_mult: int | None = None
    gen_gamma: Gamma | None = None
    gen_count: int = 0
    predicted_gamma: Gamma | None = None
    edge_exact: bool | None = None

    @property
    def exc_exponents(self) -> dict[int, int] | None:
        return _monomial_exponents(self.exc_factor)

    @property
    def jac_exponents(self) -> dict[int, int] | None:
        return _monomial_exponents(self.jacobian)

    @property
    def gamma_descent_ok(self) -> bool | None:
        if self.predicted_gamma is None or self.gamma is None:
            return None
        return self.gamma == self.predicted_gamma

    def to_json(self) -> dict:
        def fr(g):
            return None if g is None else [str(v) for v in g]

        return {
            "id": self.id,
            "parent": self.parent,
            "depth": self.depth,
            "status": self.status,
            "poly": self.poly.to_json(),
            "poly_text": format_poly(self.poly),
            "mult": self.mult,
            "chart": None if self.chart is None else self.chart.to_json(),
            "regularization": None if self.regularization is None else self.regularization.kind,
            "weierstrass": None if self.weierstrass is None else self.weierstrass.to_json(),
            "gamma": fr(self.gamma),
            "predicted_gamma": fr(self.predicted_gamma),
            "center": None if self.center is None else list(self.center),
            "children": self.children,
            "flags": self.flags,
            "exc_factor": format_poly(self.exc_factor),
            "jacobian": format_poly(self.jacobian),
            "generation": {"mult": self.gen_mult, "gamma": fr(self.gen_gamma), "count": self.gen_count},
            "edge_exact": self.edge_exact,
        }


def _monomial_exponents(p: Polynomial) -> dict[int, int] | None:
    if len(p) != 1:
        return None
    (exp, _), = p.terms.items()
    return {i: e for i, e in enumerate(exp) if e}


@dataclass
class ResolutionTree:
    P: Polynomial
    point: tuple[Fraction, ...]
    nodes: list[ResolutionNode]
    max_nodes: int

    @property
    def root(self) -> ResolutionNode:
        return self.nodes[0]

    def leaves(self) -> list[ResolutionNode]:
        return [nd for nd in self.nodes if not nd.children]

    def children(self, node: ResolutionNode) -> list[ResolutionNode]:
        return [self.nodes[i] for i in node.children]

    @property
    def exhausted(self) -> bool:
        return any(nd.status == "unresolved" for nd in self.nodes)

    @property
    def resolved(self) -> bool:
        return all(nd.status in ("resolved", "normal_crossings") for nd in self.leaves())

    @property
    def depth(self) -> int:
        return max(nd.depth for nd in self.nodes)

    def edges(self):
        for nd in self.nodes:
            if nd.parent is not None:
                yield self.nodes[nd.parent], nd

    def bound_violations(self) -> list[int]:
        """Nodes whose generation used more than |gamma| m! center blow-ups."""
        out = []
        for nd in self.nodes:
            if nd.parent is None:
                continue
            par = self.nodes[nd.parent]
            used = par.gen_count + 1
            if par.gen_gamma is not None and used > generation_bound(par.gen_gamma, par.gen_mult):
                out.append(nd.id)
        return out

    def generation_counts(self) -> list[dict]:
        """Per path generation records: (mult, gamma, blow-ups used, bound)."""
        out = []
        for nd in self.nodes:
            if nd.parent is None:
                continue
            par = self.nodes[nd.parent]
            if nd.mult < par.mult or not nd.children:
                out.append({
                    "leaf": nd.id,
                    "mult": par.gen_mult,
                    "gamma": [str(g) for g in par.gen_gamma],
                    "blowups": par.gen_count + 1,
                    "bound": str(generation_bound(par.gen_gamma, par.gen_mult)),
                })
        return out

    def check_root_identity(self, node: ResolutionNode) -> bool:
        """P(a + to_root) == exc_factor * poly, exactly."""
        base = self.P.translate(self.point) if any(self.point) else self.P
        return base.substitute(node.to_root) == node.exc_factor * node.poly

    def to_json(self) -> dict:
        return {
            "poly": format_poly(self.P),
            "point": [str(v) for v in self.point],
            "max_nodes": self.max_nodes,
            "resolved": self.resolved,
            "exhausted": self.exhausted,
            "depth": self.depth,
            "nodes": [nd.to_json() for nd in self.nodes],
            "generations": self.generation_counts(),
        }

    def trace(self) -> str:
        lines = []

        def walk(nd: ResolutionNode, indent: int):
            pad = "  " * indent
            head = f"{pad}[{nd.id}] "
            if nd.chart is not None:
                head += f"chart {nd.chart.describe()}: "
            head += f"{format_poly(nd.poly)}  (order {nd.mult}, {nd.status})"
            if nd.gamma is not None:
                head += f" gamma=({', '.join(str(g) for g in nd.gamma)})"
            if nd.center is not None:
                head += " center {" + ", ".join(f"x{i + 1}" for i in nd.center) + "}"
            if nd.flags:
                head += " flags=" + ",".join(nd.flags)
            lines.append(head)
            for c in nd.children:
                walk(self.nodes[c], indent + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def generation_bound(gamma: Sequence[Fraction], m: int) -> Fraction:
    return sum(gamma, Fraction(0)) * math.factorial(m)


def resolve(P: Polynomial, a: Sequence | None = None, max_nodes: int = 512,
            stop_at_normal_crossings: bool = False) -> ResolutionTree:
    """Breadth-first local resolution of V(P) at ``a``.

    Leaves are marked ``resolved`` (order <= 1 at the chart origin),
    ``normal_crossings`` (P = Q x_n^m with Q a unit, or any monomial-times-unit
    node when ``stop_at_normal_crossings`` is set), ``case_star_unreached``
    (the prepared form is not reached; no preparatory blow-ups are improvised),
    or ``unresolved`` (node budget exhausted).
    """
    n = P.nvars
    a = tuple(Fraction(v) for v in (a if a is not None else (0,) * n))
    base = P.translate(a) if any(a) else P
    if base.is_zero():
        raise ResolutionError("cannot resolve the zero polynomial")
    root = ResolutionNode(
        id=0, parent=None, depth=0, poly=base, mult=base.min_degree(), chart=None,
        to_root=identity_images(n), exc_factor=Polynomial.constant(n, 1),
        jacobian=Polynomial.constant(n, 1),
    )
    tree = ResolutionTree(P, a, [root], max_nodes)
    queue = deque([root])
    while queue:
        nd = queue.popleft()
        _expand(tree, nd, queue, stop_at_normal_crossings)
    return tree


def _expand(tree: ResolutionTree, nd: ResolutionNode, queue: deque, stop_nc: bool) -> None:
    n = nd.poly.nvars
    m = nd.mult
    if m <= 1:
        nd.status = "resolved"
        return
    if stop_nc and is_normal_crossings(nd.poly):
        nd.status = "normal_crossings"
        return
    reg, P1 = rotate_to_regular(nd.poly)
    nd.regularization = reg
    W = weierstrass_split(P1, m)
    nd.weierstrass = W
    nd.flags.extend(W.flags)
    if not any(W.coeffs):
        nd.status = "normal_crossings"
        return
    gamma = case_star_check(W)
    nd.gamma = gamma
    if gamma is None:
        nd.status = "case_star_unreached"
        nd.flags.append("case_star_unreached")
        return
    # a generation is a run of center blow-ups at constant order
    par = tree.nodes[nd.parent] if nd.parent is not None else None
    if par is None or par.gen_mult != m:
        nd.gen_mult, nd.gen_gamma, nd.gen_count = m, gamma, 0
    else:
        nd.gen_mult, nd.gen_gamma, nd.gen_count = par.gen_mult, par.gen_gamma, par.gen_count + 1
    I = select_center(gamma, m)
    nd.center = I
    blown = tuple(sorted(set(I) | {n - 1}))
    if len(tree.nodes) + len(blown) > tree.max_nodes:
        nd.status = "unresolved"
        nd.flags.append("budget_exhausted")
        return
    nd.status = "internal"
    # node coordinates -> regularized and translated coordinates
    y = identity_images(n)
    z = list(y)
    z[n - 1] = y[n - 1] - W.translation
    prep = [im.substitute(z) for im in reg.images()]
    det = reg.det()
    for k in blown:
        chart = Chart(n, blown, k)
        total, strict = apply_chart(W.poly, chart, m)
        child_images = [im.substitute(chart.images()) for im in prep]
        to_root = [im.substitute(child_images) for im in nd.to_root]
        child = ResolutionNode(
            id=len(tree.nodes), parent=nd.id, depth=nd.depth + 1, poly=strict,
            mult=strict.min_degree() if strict else 0, chart=chart, to_root=to_root,
            exc_factor=nd.exc_factor.substitute(child_images) * ykm(n, k, m),
            jacobian=nd.jacobian.substitute(child_images) * det * chart.jacobian(),
        )
        child.edge_exact = total == ykm(n, k, m) * strict
        if k != n - 1:
            s = sum((gamma[i] for i in I), Fraction(0))
            pred = list(gamma)
            pred[k] = s - 1
            if child.mult == m:
                child.predicted_gamma = tuple(pred)
        if child.mult > m:
            child.flags.append("order_increased")
        tree.nodes.append(child)
        nd.children.append(child.id)
        queue.append(child)


def volume_weight(node: ResolutionNode) -> dict[int, int]:
    """Exponents of the accumulated Jacobian monomial (empty at the root).

    Raises ValueError when intermediate linear changes made the Jacobian a
    non-monomial polynomial; ``node.jacobian`` holds it exactly in that case.
    """
    exps = node.jac_exponents
    if exps is None:
        raise ValueError(f"Jacobian {format_poly(node.jacobian)} is not a monomial")
    return exps


def divisor_orders(strict: Polynomial, k: int, n_samples: int = 100, seed: int = 0,
                   spread: int = 5) -> list[int]:
    """Exact orders of the strict transform at random rational points of {y_k = 0}."""
    rng = np.random.default_rng(seed)
    n = strict.nvars
    out = []
    for _ in range(n_samples):
        pt = [Fraction(int(rng.integers(-spread * 4, spread * 4 + 1)), 4) for _ in range(n)]
        pt[k] = Fraction(0)
        out.append(strict.order_at(pt) if strict else 0)
    return out


# --- logarithmic vector fields ---------------------------------------------------

LogField = dict  # {variable index: coefficient} meaning sum_i a_i x_i d/dx_i


def euler_field(nvars: int) -> LogField:
    return {i: Fraction(1) for i in range(nvars)}


def vector_field_transform(field_spec, chart: Chart) -> LogField:
    """Rewrite a combination of D_{x_i} = x_i d/dx_i in chart coordinates.

    ``field_spec`` is ``("D", i)``, ``("E",)`` or a dict of coefficients.  Uses
    D_{x_i} = D_{y_i} for i != k and D_{x_k} = D_{y_k} - sum_{j blown, j != k} D_{y_j}.
    """
    if isinstance(field_spec, tuple):
        if field_spec[0] == "D":
            spec = {int(field_spec[1]): Fraction(1)}
        elif field_spec[0] == "E":
            spec = euler_field(chart.nvars)
        else:
            raise ValueError(f"unsupported field kind {field_spec[0]!r}")
    elif isinstance(field_spec, dict):
        spec = {int(i): Fraction(c) for i, c in field_spec.items()}
    else:
        raise ValueError("unsupported field specification")
    out: dict[int, Fraction] = {}
    for i, c in spec.items():
        out[i] = out.get(i, Fraction(0)) + c
        if i == chart.k:
            for j in chart.blown:
                if j != chart.k:
                    out[j] = out.get(j, Fraction(0)) - c
    return {i: c for i, c in out.items() if c}


def apply_log_field(field_spec: LogField, f: Polynomial) -> Polynomial:
    n = f.nvars
    out = Polynomial.zero(n)
    for i, c in field_spec.items():
        out = out + Polynomial.variable(n, i) * f.partial(i) * c
    return out


def check_field_transform(field_spec, chart: Chart, f: Polynomial) -> bool:
    """Exact check (X f) o sigma == X' (f o sigma) for a polynomial f."""
    if isinstance(field_spec, tuple) and field_spec[0] == "E":
        x_field = euler_field(chart.nvars)
    elif isinstance(field_spec, tuple):
        x_field = {int(field_spec[1]): Fraction(1)}
    else:
        x_field = dict(field_spec)
    spec = vector_field_transform(x_field, chart)
    lhs = apply_log_field(x_field, f).substitute(chart.images())
    rhs = apply_log_field(spec, f.substitute(chart.images()))
    return lhs == rhs


def numeric_log_field(field_spec: LogField, grad: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = grad(x)
    return sum(float(c) * x[..., i] * g[..., i] for i, c in field_spec.items())


def radial_euler_check(f: Callable[[np.ndarray], np.ndarray], grad: Callable[[np.ndarray], np.ndarray],
                       x: np.ndarray, h: float = 1e-5) -> float:
    """|E f(x) - d/dt f(t x)|_{t=1}| with E the Euler field; E = r d/dr."""
    x = np.asarray(x, dtype=float)
    ef = numeric_log_field(euler_field(x.shape[-1]), grad, x)
    radial = (f((1 + h) * x) - f((1 - h) * x)) / (2 * h)
    return float(np.max(np.abs(ef - radial)))


def volume_pullback_integrals(chart: Chart, g: Callable[[np.ndarray], np.ndarray], x_box, y_box,
                              depth: int = 8) -> tuple[float, float]:
    """Integral of g over ``x_box`` and of (g o sigma)|y_k|^(c-1) over ``y_box``."""
    from .quadrature import build_grid, integrate

    gx = build_grid(x_box, depth=depth)
    gy = build_grid(y_box, depth=depth)
    ambient = integrate(gx, g)
    cexp = chart.jacobian_exponent

    def pulled(y):
        return g(chart.forward(y)) * np.abs(y[..., chart.k]) ** cexp

    return ambient, integrate(gy, pulled)
