"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` maps exponent tuples to nonzero :class:`fractions.Fraction`
coefficients.  Everything structural (derivatives, substitutions, orders at
points) is exact; floats only appear when a polynomial is evaluated at a float
point, through :meth:`Polynomial.numeric`.

Variables are indexed from 0 in the Python API and printed as ``x1 .. xn``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


class PolynomialError(ValueError):
    """Base class for polynomial errors."""


class PolynomialSyntaxError(PolynomialError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DivisibilityError(PolynomialError):
    def __init__(self, message: str, term: Exponent | None = None):
        super().__init__(message)
        self.term = term


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def _grlex_key(exp: Exponent):
    return (-sum(exp), tuple(-e for e in exp))


class NumericPolynomial:
    """Float evaluator for a polynomial, vectorized over the leading axes."""

    def __init__(self, poly: "Polynomial"):
        self.nvars = poly.nvars
        items = poly.sorted_terms()
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), poly.nvars)
        self.coefs = np.array([float(c) for _, c in items], dtype=float)
        self.maxdeg = int(self.exps.max()) if len(items) else 0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.nvars:
            raise PolynomialError(f"point has {x.shape[-1]} coordinates, expected {self.nvars}")
        out = np.zeros(x.shape[:-1])
        if not len(self.coefs):
            return out
        powers = [[np.ones(x.shape[:-1])] for _ in range(self.nvars)]
        for i in range(self.nvars):
            xi = x[..., i]
            for _ in range(int(self.exps[:, i].max())):
                powers[i].append(powers[i][-1] * xi)
        for exp, c in zip(self.exps, self.coefs):
            term = np.full(x.shape[:-1], c)
            for i, e in enumerate(exp):
                if e:
                    term = term * powers[i][e]
            out = out + term
        return out


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables over the rationals."""

    __slots__ = ("nvars", "_terms", "_numeric", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        if nvars < 1:
            raise PolynomialError("nvars must be positive")
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars or any(e < 0 for e in exp):
                raise PolynomialError(f"bad exponent vector {exp} for nvars={nvars}")
            c = _to_fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self.nvars = nvars
        self._terms = clean
        self._numeric = None
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = {e: c for e, c in terms.items() if c}
        p._numeric = None
        p._hash = None
        return p

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        return cls._raw(nvars, {(0,) * nvars: _to_fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise PolynomialError(f"variable index {i} out of range for nvars={nvars}")
        exp = [0] * nvars
        exp[i] = 1
        return cls._raw(nvars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> "Polynomial":
        return cls(len(exp), {tuple(exp): c})

    # basic access
    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({(0,) * self.nvars: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise PolynomialError(f"nvars mismatch: {self.nvars} vs {other.nvars}")
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            try:
                c = _to_fraction(other)
            except TypeError:
                return NotImplemented
            return Polynomial._raw(self.nvars, {e: a * c for e, a in self._terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial._raw(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Polynomial":
        c = _to_fraction(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / c)

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise PolynomialError("exponent must be a nonnegative integer")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # structure
    def degree(self) -> int | None:
        """Total degree; ``None`` for the zero polynomial (degree undefined)."""
        if not self._terms:
            return None
        return max(sum(e) for e in self._terms)

    def min_degree(self) -> int | None:
        if not self._terms:
            return None
        return min(sum(e) for e in self._terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def homogeneous_component(self, k: int) -> "Polynomial":
        return Polynomial._raw(self.nvars, {e: c for e, c in self._terms.items() if sum(e) == k})

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self._terms), default=0)

    def variables_used(self) -> set[int]:
        return {i for e in self._terms for i, a in enumerate(e) if a}

    def partial(self, i: int) -> "Polynomial":
        if not 0 <= i < self.nvars:
            raise PolynomialError(f"variable index {i} out of range for nvars={self.nvars}")
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Polynomial._raw(self.nvars, out)

    def derivative(self, multi_index: Sequence[int]) -> "Polynomial":
        p = self
        for i, k in enumerate(multi_index):
            for _ in range(k):
                p = p.partial(i)
        return p

    def gradient(self) -> list["Polynomial"]:
        return [self.partial(i) for i in range(self.nvars)]

    def laplacian(self) -> "Polynomial":
        return sum((self.partial(i).partial(i) for i in range(self.nvars)), Polynomial.zero(self.nvars))

    def euler(self) -> "Polynomial":
        """The Euler operator sum_i x_i d/dx_i; multiplies each term by its degree."""
        return Polynomial._raw(self.nvars, {e: c * sum(e) for e, c in self._terms.items()})

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Compose: replace variable i by ``images[i]``; images share one nvars."""
        if len(images) != self.nvars:
            raise PolynomialError(f"need {self.nvars} images, got {len(images)}")
        m = images[0].nvars
        if any(im.nvars != m for im in images):
            raise PolynomialError("substitution images must share nvars")
        cache: dict[tuple[int, int], Polynomial] = {}

        def power(i: int, k: int) -> Polynomial:
            if (i, k) not in cache:
                cache[(i, k)] = images[i] ** k
            return cache[(i, k)]

        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            term = Polynomial.constant(m, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            for te, tc in term._terms.items():
                out[te] = out.get(te, 0) + tc
        return Polynomial._raw(m, out)

    def translate(self, a: Sequence) -> "Polynomial":
        """P(x + a) as a polynomial in x."""
        if len(a) != self.nvars:
            raise PolynomialError("dimension mismatch")
        images = [Polynomial.variable(self.nvars, i) + _to_fraction(ai) for i, ai in enumerate(a)]
        return self.substitute(images)

    def factor_out_variable_power(self, i: int, m: int) -> "Polynomial":
        """Exact division by x_i^m."""
        out = {}
        for e, c in self._terms.items():
            if e[i] < m:
                raise DivisibilityError(
                    f"x{i + 1}^{m} does not divide term with exponent {e}", term=e)
            ne = list(e)
            ne[i] -= m
            out[tuple(ne)] = c
        return Polynomial._raw(self.nvars, out)

    def monomial_content(self) -> Exponent:
        """Componentwise minimum exponent: the largest monomial dividing P."""
        if not self._terms:
            return (0,) * self.nvars
        return tuple(min(col) for col in zip(*self._terms))

    def divide_by_monomial(self, exp: Sequence[int]) -> "Polynomial":
        p = self
        for i, k in enumerate(exp):
            if k:
                p = p.factor_out_variable_power(i, k)
        return p

    def coefficients_in(self, i: int) -> dict[int, "Polynomial"]:
        """Collect powers of x_i: {k: coefficient polynomial (free of x_i)}."""
        groups: dict[int, dict[Exponent, Fraction]] = {}
        for e, c in self._terms.items():
            ne = list(e)
            k = ne[i]
            ne[i] = 0
            groups.setdefault(k, {})[tuple(ne)] = c
        return {k: Polynomial._raw(self.nvars, t) for k, t in groups.items()}

    def order_at(self, a: Sequence | None = None) -> int:
        """Multiplicity at ``a``: lowest total degree after moving ``a`` to the origin."""
        if not self._terms:
            raise PolynomialError("order of the zero polynomial is undefined")
        p = self if a is None or not any(a) else self.translate(a)
        return p.min_degree()

    def initial_form(self, a: Sequence | None = None) -> "Polynomial":
        """Lowest-degree homogeneous component of P translated so that ``a`` is the origin."""
        if not self._terms:
            raise PolynomialError("initial form of the zero polynomial is undefined")
        p = self if a is None or not any(a) else self.translate(a)
        return p.homogeneous_component(p.min_degree())

    # evaluation
    def evaluate(self, x: Sequence):
        """Exact value at a rational point; float value at a float point."""
        if len(x) != self.nvars:
            raise PolynomialError(f"point has {len(x)} coordinates, expected {self.nvars}")
        if all(isinstance(v, (int, Fraction)) for v in x):
            total = Fraction(0)
            for e, c in self._terms.items():
                t = c
                for v, k in zip(x, e):
                    if k:
                        t *= Fraction(v) ** k
                total += t
            return total
        return float(self.numeric(np.asarray(x, dtype=float)))

    __call__ = evaluate

    def numeric(self, x) -> np.ndarray:
        """Vectorized float evaluation over an array of shape (..., nvars)."""
        if self._numeric is None:
            self._numeric = NumericPolynomial(self)
        return self._numeric(x)

    # serialization
    def to_json(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [{"exp": list(e), "coef": str(c)} for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Polynomial":
        return cls(int(data["nvars"]), {tuple(t["exp"]): Fraction(t["coef"]) for t in data["terms"]})


# --- module level operations -------------------------------------------------

def sum_sq_partials(p: Polynomial, k: int) -> Polynomial:
    """P^k: sum over multi-indices |j| = k of (d^j P)^2, each multi-index once.

    ``k = 0`` gives P^2.
    """
    if k < 0:
        raise PolynomialError("k must be nonnegative")
    total = Polynomial.zero(p.nvars)
    deg = p.degree()
    if deg is None or k > deg:
        return total
    for j in multi_indices(p.nvars, k):
        d = p.derivative(j)
        if d:
            total = total + d * d
    return total


def multi_indices(n: int, k: int) -> Iterable[tuple[int, ...]]:
    """All j in N^n with |j| = k, in lexicographically decreasing order."""
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in multi_indices(n - 1, k - first):
            yield (first,) + rest


def partials_of_order(p: Polynomial, k: int) -> list[Polynomial]:
    """All nonzero k-th partial derivatives d^j P, |j| = k."""
    return [d for d in (p.derivative(j) for j in multi_indices(p.nvars, k)) if d]


def lcm_denominator(p: Polynomial) -> int:
    return reduce(math.lcm, (c.denominator for c in p._terms.values()), 1)


# --- text format -------------------------------------------------------------

def _format_monomial(exp: Exponent) -> str:
    parts = []
    for i, k in enumerate(exp):
        if k == 1:
            parts.append(f"x{i + 1}")
        elif k > 1:
            parts.append(f"x{i + 1}^{k}")
    return "*".join(parts)


def format_poly(p: Polynomial) -> str:
    """Canonical text form, terms in graded-lex order (highest degree first)."""
    if not p:
        return "0"
    out = []
    for idx, (e, c) in enumerate(p.sorted_terms()):
        mono = _format_monomial(e)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if idx == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise PolynomialSyntaxError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2):
            tokens.append(("var", int(m.group(2)[1:]), start))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, nvars: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.nvars = nvars

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        tok = self.take()
        if tok[0] != "op" or tok[1] != op:
            raise PolynomialSyntaxError(f"expected {op!r}", tok[2])

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            raise PolynomialSyntaxError("empty expression", 0)
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolynomialSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            tok = self.take()
            q = self.unary()
            if tok[1] == "*":
                p = p * q
            else:
                if not q.is_constant():
                    raise PolynomialSyntaxError("division only by a constant", tok[2])
                if not q:
                    raise PolynomialSyntaxError("division by zero", tok[2])
                p = p / q.constant_term()
        return p

    def unary(self) -> Polynomial:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            p = self.unary()
            return -p if tok[1] == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num":
                raise PolynomialSyntaxError("exponent must be a nonnegative integer", tok[2])
            base = base ** tok[1]
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Polynomial.constant(self.nvars, val)
        if kind == "var":
            if not 1 <= val <= self.nvars:
                raise PolynomialSyntaxError(f"variable x{val} out of range for nvars={self.nvars}", pos)
            return Polynomial.variable(self.nvars, val - 1)
        if kind == "op" and val == "(":
            p = self.expr()
            self.expect_op(")")
            return p
        raise PolynomialSyntaxError("unexpected " + ("end of input" if kind == "end" else repr(val)), pos)


def parse(text: str, nvars: int | None = None) -> Polynomial:
    """Parse ``text`` in variables x1..xn; ``nvars`` defaults to the largest index used."""
    if nvars is None:
        used = [int(v) for v in re.findall(r"x(\d+)", text)]
        nvars = max(used, default=1)
    return _Parser(text, nvars).parse()


def as_fraction_point(x: Iterable) -> tuple[Fraction, ...]:
    return tuple(_to_fraction(v) for v in x)


def identity_images(nvars: int) -> list[Polynomial]:
    return [Polynomial.variable(nvars, i) for i in range(nvars)]


def linear_images(matrix: Sequence[Sequence], shift: Sequence | None = None) -> list[Polynomial]:
    """Images x_i = sum_j M[i][j] y_j (+ shift_i) for an exact rational matrix."""
    n = len(matrix)
    out = []
    for i, row in enumerate(matrix):
        terms = {}
        for j, c in enumerate(row):
            if c:
                e = [0] * n
                e[j] = 1
                terms[tuple(e)] = _to_fraction(c)
        if shift is not None and shift[i]:
            terms[(0,) * n] = _to_fraction(shift[i])
        out.append(Polynomial(n, terms))
    return out


__all__ = [
    "DivisibilityError", "Polynomial", "PolynomialError", "PolynomialSyntaxError",
    "format_poly", "identity_images", "linear_images", "multi_indices", "parse",
    "partials_of_order", "sum_sq_partials", "as_fraction_point",
]
