"""Closed-form density rules, applied by structural recursion.

Each rule is one of the proved identities for the quadrant density: products
multiply factor densities, lattices give 1/(pq), translation leaves the
density alone, dilation by (a, b) divides it by ab, intersections of lattices
reduce through coordinatewise lcms, a set with a provably finite axis section
has density zero, the tail region UPPER(m0, n0) has unit density (so
intersecting with it changes nothing), and delimited sets between power-type
bounds carry density 1/(1+alpha) - 1/(1+beta) independent of the bound
coefficients.

When no rule applies the result is Unknown -- never a guess.  Every known
value carries a trace of the rule names used to derive it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .sets import (
    BoundFn,
    Complement,
    Constant,
    Delimited,
    Difference,
    Dilate,
    Empty,
    Exponential,
    FiniteSet,
    FinitePairs,
    FullP,
    FullQuadrant,
    GaussSetExpr,
    IntComplement,
    IntIntersection,
    IntSetExpr,
    IntUnion,
    Intersection,
    Lattice,
    Multiples,
    Power,
    Product,
    Translate,
    Union,
    UpperQuadrant,
    int_contains,
    normalize,
)

__all__ = [
    "DensityValue",
    "exact_density",
    "exact_density_1d",
    "axis_section_finite",
]

# ExactReal is only used when a bound parameter is not a readable rational
# (e.g. a float without a small exact form); exact rationals keep their
# Fraction representation.
_RATIONAL_DENOMINATOR_CAP = 10 ** 6


@dataclass(frozen=True)
class DensityValue:
    """Exact density: a rational, a real with a symbolic form, or Unknown."""

    kind: str                      # "rational" | "real" | "unknown"
    rational: Optional[Fraction]
    value: Optional[float]
    symbolic: Optional[str]
    trace: tuple[str, ...]

    def __post_init__(self):
        if self.kind == "rational":
            assert self.rational is not None and 0 <= self.rational <= 1
        elif self.kind == "real":
            assert self.value is not None and -1e-12 <= self.value <= 1 + 1e-12
        elif self.kind == "unknown":
            assert self.rational is None and self.value is None
        else:
            raise ValueError(f"bad DensityValue kind {self.kind!r}")
        if self.kind != "unknown":
            assert self.trace, "known densities must carry a derivation trace"

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_fraction(x: Fraction, trace: tuple[str, ...]) -> "DensityValue":
        return DensityValue("rational", x, float(x), None, trace)

    @staticmethod
    def from_real(value: float, symbolic: str, trace: tuple[str, ...]) -> "DensityValue":
        return DensityValue("real", None, value, symbolic, trace)

    @staticmethod
    def unknown() -> "DensityValue":
        return DensityValue("unknown", None, None, None, ())

    # -- accessors ------------------------------------------------------------

    @property
    def is_known(self) -> bool:
        return self.kind != "unknown"

    def as_float(self) -> float:
        if not self.is_known:
            raise ValueError("density is unknown")
        return float(self.value)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "trace": list(self.trace)}
        if self.is_known:
            out["value"] = repr(float(self.value))
        if self.kind == "rational":
            out["numerator"] = self.rational.numerator
            out["denominator"] = self.rational.denominator
        if self.symbolic is not None:
            out["symbolic"] = self.symbolic
        return out


def _known_fraction(x: Fraction, *traces: tuple[str, ...] | str) -> DensityValue:
    items: list[str] = []
    for t in traces:
        if isinstance(t, str):
            items.append(t)
        else:
            items.extend(t)
    dedup = tuple(_dedup(items))
    return DensityValue.from_fraction(x, dedup)


def _dedup(items: list[str]) -> list[str]:
    out: list[str] = []
    for x in items:
        if not out or out[-1] != x:
            out.append(x)
    return out


def _merge_traces(*parts) -> tuple[str, ...]:
    items: list[str] = []
    for p in parts:
        if isinstance(p, str):
            items.append(p)
        else:
            items.extend(p)
    return tuple(_dedup(items))


# ---------------------------------------------------------------------------
# One-dimensional density
# ---------------------------------------------------------------------------

def _intersect_1d(a: IntSetExpr, b: IntSetExpr) -> Optional[IntSetExpr]:
    """Structural intersection simplification; None when nothing applies."""
    if isinstance(a, FullP):
        return b
    if isinstance(b, FullP):
        return a
    if isinstance(a, FiniteSet):
        return FiniteSet(tuple(m for m in a.elements if int_contains(b, m)))
    if isinstance(b, FiniteSet):
        return FiniteSet(tuple(m for m in b.elements if int_contains(a, m)))
    if isinstance(a, Multiples) and isinstance(b, Multiples):
        return Multiples(math.lcm(a.modulus, b.modulus))
    if isinstance(a, IntComplement) and a.inner == b:
        return FiniteSet(())
    if isinstance(b, IntComplement) and b.inner == a:
        return FiniteSet(())
    return None


def exact_density_1d(e: IntSetExpr) -> DensityValue:
    """Dirichlet density of a one-dimensional set, when a rule applies."""
    if isinstance(e, FullP):
        return _known_fraction(Fraction(1), "full-line")
    if isinstance(e, FiniteSet):
        return _known_fraction(Fraction(0), "finite-null")
    if isinstance(e, Multiples):
        return _known_fraction(Fraction(1, e.modulus), "multiples-rule")
    if isinstance(e, IntComplement):
        inner = exact_density_1d(e.inner)
        if inner.kind == "rational":
            return _known_fraction(1 - inner.rational, "complement-rule", inner.trace)
        return DensityValue.unknown()
    if isinstance(e, IntIntersection):
        merged = _intersect_1d(e.left, e.right)
        if merged is not None:
            sub = exact_density_1d(merged)
            if sub.kind == "rational":
                return _known_fraction(sub.rational, "lcm-intersection", sub.trace)
        return DensityValue.unknown()
    if isinstance(e, IntUnion):
        da = exact_density_1d(e.left)
        db = exact_density_1d(e.right)
        merged = _intersect_1d(e.left, e.right)
        if merged is None or da.kind != "rational" or db.kind != "rational":
            return DensityValue.unknown()
        dab = exact_density_1d(merged)
        if dab.kind != "rational":
            return DensityValue.unknown()
        val = da.rational + db.rational - dab.rational
        return _known_fraction(val, "inclusion-exclusion", da.trace, db.trace, dab.trace)
    return DensityValue.unknown()


# ---------------------------------------------------------------------------
# Axis sections
# ---------------------------------------------------------------------------

def _axis_1d(e: IntSetExpr) -> str:
    if isinstance(e, (FullP, Multiples)):
        return "infinite"
    if isinstance(e, FiniteSet):
        return "finite"
    if isinstance(e, IntUnion):
        a, b = _axis_1d(e.left), _axis_1d(e.right)
        if "infinite" in (a, b):
            return "infinite"
        if a == b == "finite":
            return "finite"
        return "unknown"
    if isinstance(e, IntIntersection):
        a, b = _axis_1d(e.left), _axis_1d(e.right)
        if "finite" in (a, b):
            return "finite"
        return "unknown"
    if isinstance(e, IntComplement):
        if _axis_1d(e.inner) == "finite":
            return "infinite"  # cofinite set
        return "unknown"
    return "unknown"


def axis_section_finite(e: GaussSetExpr) -> tuple[str, str]:
    """Conservative finiteness of the horizontal/vertical axis sections.

    Returns a pair of tri-states in {"finite", "infinite", "unknown"}.
    "finite" is only reported when provable; a finite axis section forces
    density zero.
    """
    if isinstance(e, Empty):
        return ("finite", "finite")
    if isinstance(e, FinitePairs):
        return ("finite", "finite")
    if isinstance(e, Product):
        return (_axis_1d(e.h), _axis_1d(e.v))
    if isinstance(e, (Lattice, FullQuadrant, UpperQuadrant, Delimited)):
        return ("infinite", "infinite")
    if isinstance(e, Union):
        ah, av = axis_section_finite(e.left)
        bh, bv = axis_section_finite(e.right)

        def join(a, b):
            if "infinite" in (a, b):
                return "infinite"
            if a == b == "finite":
                return "finite"
            return "unknown"

        return (join(ah, bh), join(av, bv))
    if isinstance(e, Intersection):
        ah, av = axis_section_finite(e.left)
        bh, bv = axis_section_finite(e.right)

        def meet(a, b):
            if "finite" in (a, b):
                return "finite"
            return "unknown"

        return (meet(ah, bh), meet(av, bv))
    if isinstance(e, Difference):
        ah, av = axis_section_finite(e.left)
        return (ah if ah == "finite" else "unknown", av if av == "finite" else "unknown")
    if isinstance(e, Complement):
        return ("unknown", "unknown")
    if isinstance(e, (Translate, Dilate)):
        return axis_section_finite(e.inner)
    raise TypeError(f"unknown GaussSetExpr node {e!r}")


# ---------------------------------------------------------------------------
# Affine progression products (for intersections of shifted/scaled lattices)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Prog:
    """Arithmetic progression {first + k*step : k >= 0} with first >= 1."""

    step: int
    first: int


def _axis_progs(e: GaussSetExpr) -> Optional[tuple[_Prog, _Prog]]:
    """Represent e as a product of arithmetic progressions, if it is one."""
    if isinstance(e, FullQuadrant):
        return (_Prog(1, 1), _Prog(1, 1))
    if isinstance(e, Lattice):
        return (_Prog(e.p, e.p), _Prog(e.q, e.q))
    if isinstance(e, UpperQuadrant):
        return (_Prog(1, e.m0), _Prog(1, e.n0))
    if isinstance(e, Product):
        def prog_1d(s: IntSetExpr) -> Optional[_Prog]:
            if isinstance(s, FullP):
                return _Prog(1, 1)
            if isinstance(s, Multiples):
                return _Prog(s.modulus, s.modulus)
            return None

        h, v = prog_1d(e.h), prog_1d(e.v)
        if h is None or v is None:
            return None
        return (h, v)
    if isinstance(e, Translate):
        inner = _axis_progs(e.inner)
        if inner is None:
            return None
        m0, n0 = e.offset
        (h, v) = inner
        return (_Prog(h.step, h.first + m0), _Prog(v.step, v.first + n0))
    if isinstance(e, Dilate):
        inner = _axis_progs(e.inner)
        if inner is None:
            return None
        a, b = e.factor
        (h, v) = inner
        return (_Prog(a * h.step, a * h.first), _Prog(b * v.step, b * v.first))
    return None


def _prog_intersect(a: _Prog, b: _Prog) -> Optional[_Prog]:
    """CRT intersection of two progressions; None when they are disjoint."""
    g = math.gcd(a.step, b.step)
    if (b.first - a.first) % g != 0:
        return None
    step = math.lcm(a.step, b.step)
    # solve x = a.first (mod a.step), x = b.first (mod b.step)
    t = ((b.first - a.first) // g * pow(a.step // g, -1, b.step // g)) % (b.step // g)
    x0 = a.first + a.step * t
    lo = max(a.first, b.first)
    if x0 < lo:
        x0 += ((lo - x0 + step - 1) // step) * step
    return _Prog(step, x0)


# ---------------------------------------------------------------------------
# Two-dimensional density
# ---------------------------------------------------------------------------

def _delimited_density(e: Delimited) -> DensityValue:
    lower, upper = e.lower, e.upper

    def power_exponent(b: BoundFn) -> Optional[Fraction]:
        if isinstance(b, Constant):
            return Fraction(0)
        if isinstance(b, Power):
            return b.alpha
        return None

    if isinstance(lower, Exponential):
        # thins faster than any power band; the power value 1/(1+alpha)
        # vanishes as alpha grows without bound
        return _known_fraction(Fraction(0), "exp-lower-null")

    alpha = power_exponent(lower)
    if alpha is None:
        return DensityValue.unknown()

    if isinstance(upper, Exponential):
        if alpha == 0:
            return _known_fraction(Fraction(1), "exp-upper-full")
        value = Fraction(1) / (1 + alpha)
        return _rational_or_real(value, alpha, None, ("power-lower-exp-upper",))

    beta = power_exponent(upper)
    if beta is None:
        return DensityValue.unknown()
    value = Fraction(1) / (1 + alpha) - Fraction(1) / (1 + beta)
    return _rational_or_real(value, alpha, beta, ("power-bounds",))


def _rational_or_real(
    value: Fraction, alpha: Fraction, beta: Optional[Fraction], trace: tuple[str, ...]
) -> DensityValue:
    simple = alpha.denominator <= _RATIONAL_DENOMINATOR_CAP and (
        beta is None or beta.denominator <= _RATIONAL_DENOMINATOR_CAP
    )
    if simple:
        return _known_fraction(value, trace)
    if beta is None:
        symbolic = f"1/(1+{float(alpha)!r})"
    else:
        symbolic = f"1/(1+{float(alpha)!r}) - 1/(1+{float(beta)!r})"
    return DensityValue.from_real(float(value), symbolic, trace)


def exact_density(e: GaussSetExpr) -> DensityValue:
    """Density of a quadrant set by the closed-form rule system."""
    normalized = normalize(e)
    value = _dens(normalized)
    if normalized != e and value.is_known:
        return DensityValue(
            value.kind,
            value.rational,
            value.value,
            value.symbolic,
            _merge_traces("normalize", value.trace),
        )
    return value


def _dens(e: GaussSetExpr) -> DensityValue:
    if isinstance(e, Empty):
        return _known_fraction(Fraction(0), "empty-set")
    if isinstance(e, FullQuadrant):
        return _known_fraction(Fraction(1), "full-quadrant")
    if isinstance(e, FinitePairs):
        return _known_fraction(Fraction(0), "finite-pairs")
    if isinstance(e, UpperQuadrant):
        return _known_fraction(Fraction(1), "upper-quadrant-unit")
    if isinstance(e, Lattice):
        return _known_fraction(Fraction(1, e.p * e.q), "product-rule", "multiples-rule")
    if isinstance(e, Product):
        dh = exact_density_1d(e.h)
        dv = exact_density_1d(e.v)
        if dh.kind == "rational" and dv.kind == "rational":
            return _known_fraction(dh.rational * dv.rational, "product-rule", dh.trace, dv.trace)
        return _axis_fallback(e)
    if isinstance(e, Translate):
        inner = _dens(e.inner)
        if inner.is_known:
            return DensityValue(
                inner.kind,
                inner.rational,
                inner.value,
                inner.symbolic,
                _merge_traces("translation-invariance", inner.trace),
            )
        return DensityValue.unknown()
    if isinstance(e, Dilate):
        inner = _dens(e.inner)
        a, b = e.factor
        if inner.kind == "rational":
            return _known_fraction(inner.rational / (a * b), "dilation-scaling", inner.trace)
        if inner.kind == "real":
            return DensityValue.from_real(
                inner.value / (a * b),
                f"({inner.symbolic})/{a * b}",
                _merge_traces("dilation-scaling", inner.trace),
            )
        return DensityValue.unknown()
    if isinstance(e, Difference):
        db = _dens(e.left)
        dab = _dens(Intersection(e.right, e.left))
        return _combine(db, dab, lambda x, y: x - y, "difference-rule")
    if isinstance(e, Complement):
        da = _dens(e.inner)
        if da.kind == "rational":
            return _known_fraction(1 - da.rational, "complement-rule", da.trace)
        if da.kind == "real":
            return DensityValue.from_real(
                1.0 - da.value, f"1 - ({da.symbolic})",
                _merge_traces("complement-rule", da.trace),
            )
        return DensityValue.unknown()
    if isinstance(e, Union):
        da = _dens(e.left)
        db = _dens(e.right)
        dab = _dens(Intersection(e.left, e.right))
        if not (da.is_known and db.is_known and dab.is_known):
            return _axis_fallback(e)
        if da.kind == db.kind == dab.kind == "rational":
            return _known_fraction(
                da.rational + db.rational - dab.rational,
                "inclusion-exclusion", da.trace, db.trace, dab.trace,
            )
        return DensityValue.from_real(
            da.value + db.value - dab.value,
            f"{da.value!r} + {db.value!r} - {dab.value!r}",
            _merge_traces("inclusion-exclusion", da.trace, db.trace, dab.trace),
        )
    if isinstance(e, Intersection):
        return _intersection_density(e)
    if isinstance(e, Delimited):
        return _delimited_density(e)
    raise TypeError(f"unknown GaussSetExpr node {e!r}")


def _combine(da: DensityValue, db: DensityValue, op, rule: str) -> DensityValue:
    if not (da.is_known and db.is_known):
        return DensityValue.unknown()
    if da.kind == db.kind == "rational":
        return _known_fraction(op(da.rational, db.rational), rule, da.trace, db.trace)
    value = float(op(da.as_float(), db.as_float()))
    return DensityValue.from_real(
        value, f"{da.value!r}, {db.value!r} via {rule}",
        _merge_traces(rule, da.trace, db.trace),
    )


def _intersection_density(e: Intersection) -> DensityValue:
    left, right = e.left, e.right
    # the tail region has unit density, so it absorbs
    if isinstance(right, UpperQuadrant):
        inner = _dens(left)
        if inner.is_known:
            return DensityValue(
                inner.kind, inner.rational, inner.value, inner.symbolic,
                _merge_traces("heavy-tail", inner.trace),
            )
    if isinstance(left, UpperQuadrant):
        inner = _dens(right)
        if inner.is_known:
            return DensityValue(
                inner.kind, inner.rational, inner.value, inner.symbolic,
                _merge_traces("heavy-tail", inner.trace),
            )
    # products intersect coordinatewise
    if isinstance(left, Product) and isinstance(right, Product):
        return _dens_of_product_pair(left, right)
    # shifted/scaled lattices: CRT on each axis
    pa = _axis_progs(left)
    pb = _axis_progs(right)
    if pa is not None and pb is not None:
        h = _prog_intersect(pa[0], pb[0])
        v = _prog_intersect(pa[1], pb[1])
        if h is None or v is None:
            return _known_fraction(Fraction(0), "progression-intersection", "empty-set")
        return _known_fraction(
            Fraction(1, h.step * v.step),
            "progression-intersection", "translation-invariance",
            "product-rule", "multiples-rule",
        )
    return _axis_fallback(e)


def _dens_of_product_pair(a: Product, b: Product) -> DensityValue:
    h = _intersect_1d(a.h, b.h)
    v = _intersect_1d(a.v, b.v)
    if h is None or v is None:
        return _axis_fallback(Intersection(a, b))
    sub = _dens(normalize(Product(h, v)))
    if sub.is_known:
        return DensityValue(
            sub.kind, sub.rational, sub.value, sub.symbolic,
            _merge_traces("product-intersection", sub.trace),
        )
    return _axis_fallback(Intersection(a, b))


def _axis_fallback(e: GaussSetExpr) -> DensityValue:
    h, v = axis_section_finite(e)
    if h == "finite" or v == "finite":
        return _known_fraction(Fraction(0), "finite-axis-section")
    return DensityValue.unknown()
