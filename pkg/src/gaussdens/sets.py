"""Expression language for sets of Gaussian integers in the open first quadrant.

A Gaussian integer m + i*n with m, n >= 1 is identified with the pair (m, n).
Sets are described symbolically:

* ``IntSetExpr`` describes subsets of the positive integers (used for the
  horizontal/vertical factors of product sets).
* ``GaussSetExpr`` describes subsets of the quadrant, closed under union,
  intersection, complement (relative to the full quadrant), difference,
  translation, dilation, and delimitation between two bound functions.
* ``BoundFn`` is a concrete delimiting function: a constant, c*m^alpha,
  or c*a^m.  A delimited set collects the points with
  ``lower(m) <= n <= upper(m)``.

Expressions are immutable after construction and every operation here is a
pure function, so values can be shared freely between threads.

Membership is decided by :func:`contains` (the semantic ground truth), by
:func:`predicate` (the same decision procedure, partially evaluated into a
closure for tight loops), and by :func:`grid_mask` (the same decision
procedure vectorised over a rectangle of points).  Row/column sections are
partial evaluations of ``contains`` with one coordinate fixed.

Boundary convention: coordinates with m = 0 or n = 0 are outside every set;
constructors and membership reject them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "ValidationError",
    "IntSetExpr",
    "FullP",
    "FiniteSet",
    "Multiples",
    "IntUnion",
    "IntIntersection",
    "IntComplement",
    "BoundFn",
    "Constant",
    "Power",
    "Exponential",
    "GaussSetExpr",
    "Empty",
    "FullQuadrant",
    "FinitePairs",
    "Product",
    "Lattice",
    "Translate",
    "Dilate",
    "Union",
    "Intersection",
    "Complement",
    "Difference",
    "UpperQuadrant",
    "Delimited",
    "contains",
    "predicate",
    "row_section",
    "col_section",
    "normalize",
    "int_contains",
    "int_mask",
    "grid_mask",
    "snap_to_int",
]

INT_SNAP = 1e-9            # floats this close to an integer are snapped before rounding
_HUGE = 2 ** 62            # bound values beyond this are treated as "effectively infinite"
_LOG_HUGE = math.log(float(_HUGE))
FINITE_PAIRS_CAP = 10 ** 6

NumberLike = Union[int, float, str, Fraction]


class ValidationError(ValueError):
    """Raised when an expression violates a structural invariant."""


def _as_fraction(x: NumberLike, what: str) -> Fraction:
    try:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, bool):
            raise TypeError
        if isinstance(x, (int, str)):
            return Fraction(x)
        if isinstance(x, float):
            return Fraction(x)  # exact binary expansion
    except (TypeError, ValueError, ZeroDivisionError):
        pass
    raise ValidationError(f"{what} must be a rational number, got {x!r}")


def snap_to_int(x: float) -> float:
    """Snap values within INT_SNAP of an integer before ceil/floor rounding."""
    r = round(x)
    if abs(x - r) <= INT_SNAP:
        return float(r)
    return x


def _check_positive_int(value, what: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ValidationError(f"{what} must be an integer >= {minimum}, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# One-dimensional sets
# ---------------------------------------------------------------------------

class IntSetExpr:
    """Symbolic description of a subset of the positive integers."""

    __slots__ = ()


@dataclass(frozen=True)
class FullP(IntSetExpr):
    """All positive integers."""


@dataclass(frozen=True)
class FiniteSet(IntSetExpr):
    elements: tuple[int, ...]

    def __post_init__(self):
        elems = tuple(sorted(set(self.elements)))
        for e in elems:
            _check_positive_int(e, "FiniteSet element")
        object.__setattr__(self, "elements", elems)


@dataclass(frozen=True)
class Multiples(IntSetExpr):
    """The set M_p of positive multiples of p."""

    modulus: int

    def __post_init__(self):
        _check_positive_int(self.modulus, "Multiples modulus")


@dataclass(frozen=True)
class IntUnion(IntSetExpr):
    left: IntSetExpr
    right: IntSetExpr


@dataclass(frozen=True)
class IntIntersection(IntSetExpr):
    left: IntSetExpr
    right: IntSetExpr


@dataclass(frozen=True)
class IntComplement(IntSetExpr):
    inner: IntSetExpr


def int_contains(e: IntSetExpr, m: int) -> bool:
    """Membership of a positive integer in a one-dimensional set."""
    if m < 1:
        return False
    if isinstance(e, FullP):
        return True
    if isinstance(e, FiniteSet):
        return m in e.elements
    if isinstance(e, Multiples):
        return m % e.modulus == 0
    if isinstance(e, IntUnion):
        return int_contains(e.left, m) or int_contains(e.right, m)
    if isinstance(e, IntIntersection):
        return int_contains(e.left, m) and int_contains(e.right, m)
    if isinstance(e, IntComplement):
        return not int_contains(e.inner, m)
    raise TypeError(f"unknown IntSetExpr node {e!r}")


def int_mask(e: IntSetExpr, values: np.ndarray) -> np.ndarray:
    """Vectorised membership over an array of positive integers."""
    if isinstance(e, FullP):
        return np.ones(values.shape, dtype=bool)
    if isinstance(e, FiniteSet):
        return np.isin(values, np.asarray(e.elements, dtype=values.dtype))
    if isinstance(e, Multiples):
        return values % e.modulus == 0
    if isinstance(e, IntUnion):
        return int_mask(e.left, values) | int_mask(e.right, values)
    if isinstance(e, IntIntersection):
        return int_mask(e.left, values) & int_mask(e.right, values)
    if isinstance(e, IntComplement):
        return ~int_mask(e.inner, values)
    raise TypeError(f"unknown IntSetExpr node {e!r}")


def _int_predicate(e: IntSetExpr) -> Callable[[int], bool]:
    if isinstance(e, FullP):
        return lambda m: m >= 1
    if isinstance(e, FiniteSet):
        elems = frozenset(e.elements)
        return lambda m: m in elems
    if isinstance(e, Multiples):
        p = e.modulus
        return lambda m: m % p == 0
    if isinstance(e, IntUnion):
        f, g = _int_predicate(e.left), _int_predicate(e.right)
        return lambda m: f(m) or g(m)
    if isinstance(e, IntIntersection):
        f, g = _int_predicate(e.left), _int_predicate(e.right)
        return lambda m: f(m) and g(m)
    if isinstance(e, IntComplement):
        f = _int_predicate(e.inner)
        return lambda m: m >= 1 and not f(m)
    raise TypeError(f"unknown IntSetExpr node {e!r}")


# ---------------------------------------------------------------------------
# Bound functions
# ---------------------------------------------------------------------------

class BoundFn:
    """Concrete delimiting function, always evaluated at integer m >= 1."""

    __slots__ = ()

    def value(self, m: int) -> float:
        raise NotImplementedError

    def log_value(self, m: int) -> float:
        raise NotImplementedError

    def exact_int(self, m: int) -> Optional[int]:
        """Exact integer value when the parameters make one available."""
        return None

    def with_coefficient(self, c: NumberLike) -> "BoundFn":
        raise NotImplementedError

    # -- integer cut points -------------------------------------------------

    def snapped(self, m: int) -> float:
        exact = self.exact_int(m)
        if exact is not None:
            return float(min(exact, _HUGE))
        if self.log_value(m) >= _LOG_HUGE:
            return float(_HUGE)
        return snap_to_int(self.value(m))

    def ceil_at(self, m: int) -> int:
        """ceil of the (snapped) value: first admissible integer above."""
        exact = self.exact_int(m)
        if exact is not None:
            return min(exact, _HUGE)
        return int(math.ceil(self.snapped(m)))

    def floor_at(self, m: int) -> int:
        """floor of the (snapped) value, saturating at a huge sentinel."""
        exact = self.exact_int(m)
        if exact is not None:
            return min(exact, _HUGE)
        return int(math.floor(self.snapped(m)))


def _frac_is_int(x: Fraction) -> bool:
    return x.denominator == 1


@dataclass(frozen=True)
class Constant(BoundFn):
    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k", _as_fraction(self.k, "Constant level"))
        if self.k < 1:
            raise ValidationError(f"Constant bound requires k >= 1, got {self.k}")

    def value(self, m: int) -> float:
        return float(self.k)

    def log_value(self, m: int) -> float:
        return math.log(float(self.k))

    def exact_int(self, m: int) -> Optional[int]:
        return int(self.k) if _frac_is_int(self.k) else None

    def with_coefficient(self, c: NumberLike) -> "Constant":
        return Constant(c)


@dataclass(frozen=True)
class Power(BoundFn):
    """m |-> c * m^alpha with c > 0 and alpha >= 0."""

    c: Fraction
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", _as_fraction(self.c, "Power coefficient"))
        object.__setattr__(self, "alpha", _as_fraction(self.alpha, "Power exponent"))
        if self.c <= 0:
            raise ValidationError(f"Power coefficient must be > 0, got {self.c}")
        if self.alpha < 0:
            raise ValidationError(f"Power exponent must be >= 0, got {self.alpha}")

    def value(self, m: int) -> float:
        return float(self.c) * float(m) ** float(self.alpha)

    def log_value(self, m: int) -> float:
        return math.log(float(self.c)) + float(self.alpha) * math.log(m)

    def exact_int(self, m: int) -> Optional[int]:
        if _frac_is_int(self.c) and _frac_is_int(self.alpha):
            a = int(self.alpha)
            if a * math.log(max(m, 2)) >= _LOG_HUGE:
                return _HUGE
            return int(self.c) * m ** a
        return None

    def with_coefficient(self, c: NumberLike) -> "Power":
        return Power(c, self.alpha)


@dataclass(frozen=True)
class Exponential(BoundFn):
    """m |-> c * a^m with c > 0 and a > 1."""

    c: Fraction
    a: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", _as_fraction(self.c, "Exponential coefficient"))
        object.__setattr__(self, "a", _as_fraction(self.a, "Exponential base"))
        if self.c <= 0:
            raise ValidationError(f"Exponential coefficient must be > 0, got {self.c}")
        if self.a <= 1:
            raise ValidationError(f"Exponential base must be > 1, got {self.a}")

    def value(self, m: int) -> float:
        lv = self.log_value(m)
        if lv >= _LOG_HUGE:
            return float(_HUGE)
        return float(self.c) * float(self.a) ** m

    def log_value(self, m: int) -> float:
        return math.log(float(self.c)) + m * math.log(float(self.a))

    def exact_int(self, m: int) -> Optional[int]:
        if _frac_is_int(self.c) and _frac_is_int(self.a):
            if self.log_value(m) >= _LOG_HUGE:
                return _HUGE
            return int(self.c) * int(self.a) ** m
        return None

    def with_coefficient(self, c: NumberLike) -> "Exponential":
        return Exponential(c, self.a)


def _bound_ge_one(f: BoundFn) -> bool:
    """Does f(m) >= 1 hold for every integer m >= 1?

    Every variant is nondecreasing in m, so the minimum sits at m = 1.
    """
    if isinstance(f, Constant):
        return True  # k >= 1 by construction
    if isinstance(f, Power):
        return f.c >= 1
    if isinstance(f, Exponential):
        return f.c * f.a >= 1
    raise TypeError(f"unknown BoundFn {f!r}")


def _dominates(upper: BoundFn, lower: BoundFn) -> bool:
    """Does upper(m) >= lower(m) hold for every integer m >= 1?

    Decided per variant pair: compare growth classes first, then coefficients;
    a finite scan covers the window where an eventually-dominant ratio may
    still dip (power below exponential dips until m ~ alpha / ln a).
    """
    lo_kind = type(lower)
    up_kind = type(upper)

    def as_power(b: BoundFn) -> tuple[Fraction, Fraction]:
        if isinstance(b, Constant):
            return b.k, Fraction(0)
        assert isinstance(b, Power)
        return b.c, b.alpha

    if up_kind in (Constant, Power) and lo_kind in (Constant, Power):
        c_up, a_up = as_power(upper)
        c_lo, a_lo = as_power(lower)
        if a_up > a_lo:
            return c_up >= c_lo  # ratio increasing, minimum at m = 1
        if a_up == a_lo:
            return c_up >= c_lo
        return False  # upper grows strictly slower: fails for large m

    if up_kind is Exponential and lo_kind in (Constant, Power):
        c_lo, a_lo = as_power(lower)
        # ratio upper/lower decreases until m* = alpha / ln(a), then increases
        m_star = float(a_lo) / math.log(float(upper.a))
        scan_to = int(math.ceil(m_star)) + 2
        for m in range(1, max(scan_to, 2) + 1):
            if upper.log_value(m) < lower.log_value(m) - 1e-12:
                return False
        return True

    if up_kind in (Constant, Power) and lo_kind is Exponential:
        return False  # exponential lower overtakes any power upper

    if up_kind is Exponential and lo_kind is Exponential:
        if upper.a > lower.a:
            return upper.c * upper.a >= lower.c * lower.a
        if upper.a == lower.a:
            return upper.c >= lower.c
        return False

    raise TypeError(f"unknown BoundFn pair {upper!r}, {lower!r}")


# ---------------------------------------------------------------------------
# Two-dimensional sets
# ---------------------------------------------------------------------------

class GaussSetExpr:
    """Symbolic description of a subset of the open first quadrant."""

    __slots__ = ()


@dataclass(frozen=True)
class Empty(GaussSetExpr):
    pass


@dataclass(frozen=True)
class FullQuadrant(GaussSetExpr):
    pass


@dataclass(frozen=True)
class FinitePairs(GaussSetExpr):
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple(sorted(set((int(m), int(n)) for m, n in self.pairs)))
        if len(pairs) > FINITE_PAIRS_CAP:
            raise ValidationError(f"FinitePairs capped at {FINITE_PAIRS_CAP} elements")
        for m, n in pairs:
            _check_positive_int(m, "FinitePairs first coordinate")
            _check_positive_int(n, "FinitePairs second coordinate")
        object.__setattr__(self, "pairs", pairs)


@dataclass(frozen=True)
class Product(GaussSetExpr):
    """Cartesian product h x v of two one-dimensional sets."""

    h: IntSetExpr
    v: IntSetExpr


@dataclass(frozen=True)
class Lattice(GaussSetExpr):
    """M_(p,q): multiples of p crossed with multiples of q."""

    p: int
    q: int

    def __post_init__(self):
        _check_positive_int(self.p, "Lattice p")
        _check_positive_int(self.q, "Lattice q")


@dataclass(frozen=True)
class Translate(GaussSetExpr):
    """Shift every point by a nonnegative offset; (0,0) is the identity."""

    inner: GaussSetExpr
    offset: tuple[int, int]

    def __post_init__(self):
        m0, n0 = self.offset
        _check_positive_int(m0, "Translate offset", minimum=0)
        _check_positive_int(n0, "Translate offset", minimum=0)
        object.__setattr__(self, "offset", (m0, n0))


@dataclass(frozen=True)
class Dilate(GaussSetExpr):
    """Scale coordinates by (a, b); membership demands exact divisibility."""

    factor: tuple[int, int]
    inner: GaussSetExpr

    def __post_init__(self):
        a, b = self.factor
        _check_positive_int(a, "Dilate factor")
        _check_positive_int(b, "Dilate factor")
        object.__setattr__(self, "factor", (a, b))


@dataclass(frozen=True)
class Union(GaussSetExpr):
    left: GaussSetExpr
    right: GaussSetExpr


@dataclass(frozen=True)
class Intersection(GaussSetExpr):
    left: GaussSetExpr
    right: GaussSetExpr


@dataclass(frozen=True)
class Complement(GaussSetExpr):
    """Complement relative to the full quadrant."""

    inner: GaussSetExpr


@dataclass(frozen=True)
class Difference(GaussSetExpr):
    """left minus right (relative complement of right in left)."""

    left: GaussSetExpr
    right: GaussSetExpr


@dataclass(frozen=True)
class UpperQuadrant(GaussSetExpr):
    """The tail region {m >= m0 and n >= n0}."""

    m0: int
    n0: int

    def __post_init__(self):
        _check_positive_int(self.m0, "UpperQuadrant m0")
        _check_positive_int(self.n0, "UpperQuadrant n0")


@dataclass(frozen=True)
class Delimited(GaussSetExpr):
    """Points with lower(m) <= n <= upper(m).

    Construction requires upper(m) >= lower(m) >= 1 for every integer m >= 1,
    decided analytically per bound-function pair.
    """

    lower: BoundFn
    upper: BoundFn

    def __post_init__(self):
        if not _bound_ge_one(self.lower):
            raise ValidationError(
                f"delimited lower bound must stay >= 1 for all m >= 1: {self.lower}"
            )
        if not _dominates(self.upper, self.lower):
            raise ValidationError(
                f"delimited upper bound must dominate the lower bound: "
                f"{self.upper} < {self.lower} somewhere"
            )


def delimited_row_bounds(e: Delimited, m: int) -> tuple[int, int]:
    """Integer n-range [lo, hi] of row m; empty when lo > hi.

    hi saturates at a huge sentinel when the upper bound overflows the
    representable range (only its logarithm matters there).
    """
    return e.lower.ceil_at(m), e.upper.floor_at(m)


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

def contains(e: GaussSetExpr, point: tuple[int, int]) -> bool:
    """Semantic membership test; total over points with m, n >= 1."""
    m, n = point
    _check_positive_int(m, "point m")
    _check_positive_int(n, "point n")
    return _contains(e, m, n)


def _contains(e: GaussSetExpr, m: int, n: int) -> bool:
    if isinstance(e, Empty):
        return False
    if isinstance(e, FullQuadrant):
        return True
    if isinstance(e, FinitePairs):
        return (m, n) in e.pairs
    if isinstance(e, Product):
        return int_contains(e.h, m) and int_contains(e.v, n)
    if isinstance(e, Lattice):
        return m % e.p == 0 and n % e.q == 0
    if isinstance(e, Translate):
        m0, n0 = e.offset
        return m > m0 and n > n0 and _contains(e.inner, m - m0, n - n0)
    if isinstance(e, Dilate):
        a, b = e.factor
        return m % a == 0 and n % b == 0 and _contains(e.inner, m // a, n // b)
    if isinstance(e, Union):
        return _contains(e.left, m, n) or _contains(e.right, m, n)
    if isinstance(e, Intersection):
        return _contains(e.left, m, n) and _contains(e.right, m, n)
    if isinstance(e, Complement):
        return not _contains(e.inner, m, n)
    if isinstance(e, Difference):
        return _contains(e.left, m, n) and not _contains(e.right, m, n)
    if isinstance(e, UpperQuadrant):
        return m >= e.m0 and n >= e.n0
    if isinstance(e, Delimited):
        lo, hi = delimited_row_bounds(e, m)
        return lo <= n <= hi
    raise TypeError(f"unknown GaussSetExpr node {e!r}")


def predicate(e: GaussSetExpr) -> Callable[[int, int], bool]:
    """Partial evaluation of ``contains``: compile e into a closure.

    The closure decides exactly the same membership relation; it exists so
    hot loops do not pay the structural recursion per point.
    """
    if isinstance(e, Empty):
        return lambda m, n: False
    if isinstance(e, FullQuadrant):
        return lambda m, n: True
    if isinstance(e, FinitePairs):
        pts = frozenset(e.pairs)
        return lambda m, n: (m, n) in pts
    if isinstance(e, Product):
        f, g = _int_predicate(e.h), _int_predicate(e.v)
        return lambda m, n: f(m) and g(n)
    if isinstance(e, Lattice):
        p, q = e.p, e.q
        return lambda m, n: m % p == 0 and n % q == 0
    if isinstance(e, Translate):
        m0, n0 = e.offset
        f = predicate(e.inner)
        return lambda m, n: m > m0 and n > n0 and f(m - m0, n - n0)
    if isinstance(e, Dilate):
        a, b = e.factor
        f = predicate(e.inner)
        return lambda m, n: m % a == 0 and n % b == 0 and f(m // a, n // b)
    if isinstance(e, Union):
        f, g = predicate(e.left), predicate(e.right)
        return lambda m, n: f(m, n) or g(m, n)
    if isinstance(e, Intersection):
        f, g = predicate(e.left), predicate(e.right)
        return lambda m, n: f(m, n) and g(m, n)
    if isinstance(e, Complement):
        f = predicate(e.inner)
        return lambda m, n: not f(m, n)
    if isinstance(e, Difference):
        f, g = predicate(e.left), predicate(e.right)
        return lambda m, n: f(m, n) and not g(m, n)
    if isinstance(e, UpperQuadrant):
        m0, n0 = e.m0, e.n0
        return lambda m, n: m >= m0 and n >= n0
    if isinstance(e, Delimited):
        lower, upper = e.lower, e.upper
        bounds_memo: dict[int, tuple[int, int]] = {}

        def delim_pred(m, n):
            b = bounds_memo.get(m)
            if b is None:
                b = (lower.ceil_at(m), upper.floor_at(m))
                bounds_memo[m] = b
            return b[0] <= n <= b[1]

        return delim_pred
    raise TypeError(f"unknown GaussSetExpr node {e!r}")


def row_section(e: GaussSetExpr, n: int) -> Callable[[int], bool]:
    """The row n of e as a predicate over m (the construction A_n)."""
    _check_positive_int(n, "row index")
    pred = predicate(e)
    return lambda m: m >= 1 and pred(m, n)


def col_section(e: GaussSetExpr, m: int) -> Callable[[int], bool]:
    """The column m of e as a predicate over n (the construction A^m)."""
    _check_positive_int(m, "column index")
    pred = predicate(e)
    return lambda n: n >= 1 and pred(m, n)


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------

def _normalize_int(e: IntSetExpr) -> IntSetExpr:
    if isinstance(e, Multiples) and e.modulus == 1:
        return FullP()
    if isinstance(e, IntUnion):
        return IntUnion(_normalize_int(e.left), _normalize_int(e.right))
    if isinstance(e, IntIntersection):
        return IntIntersection(_normalize_int(e.left), _normalize_int(e.right))
    if isinstance(e, IntComplement):
        inner = _normalize_int(e.inner)
        if isinstance(inner, IntComplement):
            return inner.inner
        return IntComplement(inner)
    return e


def normalize(e: GaussSetExpr) -> GaussSetExpr:
    """Apply membership-preserving rewrites, bottom up.

    Rules: dilation of a lattice scales its moduli; intersection of lattices
    is the lattice of coordinatewise lcms; a product of multiples (with the
    full line read as multiples of 1) becomes a lattice; Multiples(1) becomes
    the full line; nested translations add their offsets and nested dilations
    multiply their factors; identity translations/dilations and double
    complements are dropped.  The result denotes exactly the same set.
    """
    if isinstance(e, Product):
        h = _normalize_int(e.h)
        v = _normalize_int(e.v)
        ph = 1 if isinstance(h, FullP) else (h.modulus if isinstance(h, Multiples) else None)
        pv = 1 if isinstance(v, FullP) else (v.modulus if isinstance(v, Multiples) else None)
        if ph is not None and pv is not None:
            return Lattice(ph, pv)
        return Product(h, v)
    if isinstance(e, Intersection):
        left = normalize(e.left)
        right = normalize(e.right)
        if isinstance(left, Lattice) and isinstance(right, Lattice):
            return Lattice(math.lcm(left.p, right.p), math.lcm(left.q, right.q))
        return Intersection(left, right)
    if isinstance(e, Dilate):
        inner = normalize(e.inner)
        a, b = e.factor
        if isinstance(inner, Dilate):
            a2, b2 = inner.factor
            return normalize(Dilate((a * a2, b * b2), inner.inner))
        if isinstance(inner, Lattice):
            return Lattice(a * inner.p, b * inner.q)
        if a == 1 and b == 1:
            return inner
        return Dilate((a, b), inner)
    if isinstance(e, Translate):
        inner = normalize(e.inner)
        m0, n0 = e.offset
        if isinstance(inner, Translate):
            m1, n1 = inner.offset
            return normalize(Translate(inner.inner, (m0 + m1, n0 + n1)))
        if m0 == 0 and n0 == 0:
            return inner
        return Translate(inner, (m0, n0))
    if isinstance(e, Complement):
        inner = normalize(e.inner)
        if isinstance(inner, Complement):
            return inner.inner
        return Complement(inner)
    if isinstance(e, Union):
        return Union(normalize(e.left), normalize(e.right))
    if isinstance(e, Difference):
        return Difference(normalize(e.left), normalize(e.right))
    return e


# ---------------------------------------------------------------------------
# Vectorised membership over a rectangle
# ---------------------------------------------------------------------------

def grid_mask(e: GaussSetExpr, m_lo: int, m_hi: int, n_hi: int) -> np.ndarray:
    """Boolean membership over rows m_lo..m_hi and columns 1..n_hi.

    Decides the same relation as ``contains`` on every grid point; row i of
    the result corresponds to m = m_lo + i.
    """
    if m_lo < 1 or m_hi < m_lo or n_hi < 1:
        raise ValidationError("grid_mask requires 1 <= m_lo <= m_hi and n_hi >= 1")
    rows = m_hi - m_lo + 1
    ms = np.arange(m_lo, m_hi + 1, dtype=np.int64)
    ns = np.arange(1, n_hi + 1, dtype=np.int64)

    if isinstance(e, Empty):
        return np.zeros((rows, n_hi), dtype=bool)
    if isinstance(e, FullQuadrant):
        return np.ones((rows, n_hi), dtype=bool)
    if isinstance(e, FinitePairs):
        out = np.zeros((rows, n_hi), dtype=bool)
        for m, n in e.pairs:
            if m_lo <= m <= m_hi and n <= n_hi:
                out[m - m_lo, n - 1] = True
        return out
    if isinstance(e, Product):
        return np.outer(int_mask(e.h, ms), int_mask(e.v, ns))
    if isinstance(e, Lattice):
        return np.outer(ms % e.p == 0, ns % e.q == 0)
    if isinstance(e, UpperQuadrant):
        return np.outer(ms >= e.m0, ns >= e.n0)
    if isinstance(e, Union):
        return grid_mask(e.left, m_lo, m_hi, n_hi) | grid_mask(e.right, m_lo, m_hi, n_hi)
    if isinstance(e, Intersection):
        return grid_mask(e.left, m_lo, m_hi, n_hi) & grid_mask(e.right, m_lo, m_hi, n_hi)
    if isinstance(e, Complement):
        return ~grid_mask(e.inner, m_lo, m_hi, n_hi)
    if isinstance(e, Difference):
        return grid_mask(e.left, m_lo, m_hi, n_hi) & ~grid_mask(e.right, m_lo, m_hi, n_hi)
    if isinstance(e, Translate):
        m0, n0 = e.offset
        out = np.zeros((rows, n_hi), dtype=bool)
        in_lo = max(m_lo - m0, 1)
        in_hi = m_hi - m0
        in_cols = n_hi - n0
        if in_hi >= in_lo and in_cols >= 1:
            inner = grid_mask(e.inner, in_lo, in_hi, in_cols)
            out[(in_lo + m0) - m_lo:, n0:] = inner
        return out
    if isinstance(e, Dilate):
        a, b = e.factor
        out = np.zeros((rows, n_hi), dtype=bool)
        u_lo = (m_lo + a - 1) // a
        u_hi = m_hi // a
        v_hi = n_hi // b
        if u_hi >= u_lo and v_hi >= 1:
            inner = grid_mask(e.inner, u_lo, u_hi, v_hi)
            row_idx = np.arange(u_lo, u_hi + 1) * a - m_lo
            col_idx = np.arange(1, v_hi + 1) * b - 1
            out[np.ix_(row_idx, col_idx)] = inner
        return out
    if isinstance(e, Delimited):
        lo = np.empty(rows, dtype=np.int64)
        hi = np.empty(rows, dtype=np.int64)
        for i, m in enumerate(range(m_lo, m_hi + 1)):
            lo[i], hi[i] = delimited_row_bounds(e, m)
        hi = np.minimum(hi, n_hi)
        return (ns[None, :] >= lo[:, None]) & (ns[None, :] <= hi[:, None])
    raise TypeError(f"unknown GaussSetExpr node {e!r}")
