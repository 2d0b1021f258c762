"""Built-in golden corpus: named expressions with known densities.

Used by the invariant test suite and the CLI ``check`` command.  Tags select
entries for particular checks:

* ``oracle``    -- cheap enough for the brute-force equivalence runs
* ``counting``  -- families where the box-counting ratio matches the density
* ``near``      -- estimates need a near-limit schedule (delimited sets)
* ``estimate``  -- exercised by the extrapolation agreement suite
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .sets import (
    Complement,
    Constant,
    Delimited,
    Difference,
    Dilate,
    Exponential,
    FiniteSet,
    FinitePairs,
    FullP,
    FullQuadrant,
    GaussSetExpr,
    IntComplement,
    Intersection,
    Lattice,
    Multiples,
    Power,
    Product,
    Translate,
    Union,
    UpperQuadrant,
)

__all__ = ["CorpusEntry", "CORPUS", "by_tag", "entry"]


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    expr: GaussSetExpr
    density: Optional[Fraction]   # None when the exact engine has no rule
    tags: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "tags", frozenset(self.tags))


def _e(name, expr, density, *tags) -> CorpusEntry:
    dens = None if density is None else Fraction(density)
    return CorpusEntry(name, expr, dens, frozenset(tags))


CORPUS: tuple[CorpusEntry, ...] = (
    _e("full_quadrant", FullQuadrant(), 1, "oracle", "counting", "estimate"),
    _e("lattice_2_3", Lattice(2, 3), Fraction(1, 6), "oracle", "counting", "estimate"),
    _e("lattice_4_5", Lattice(4, 5), Fraction(1, 20), "oracle", "counting", "estimate"),
    _e("lattice_7_11", Lattice(7, 11), Fraction(1, 77), "oracle", "counting", "estimate"),
    _e("intersect_lattices", Intersection(Lattice(2, 3), Lattice(3, 2)),
       Fraction(1, 36), "oracle", "counting", "estimate"),
    _e("product_odds_full", Product(IntComplement(Multiples(2)), FullP()),
       Fraction(1, 2), "oracle", "counting", "estimate"),
    _e("product_finite_row", Product(FiniteSet((3,)), FullP()),
       Fraction(0), "oracle", "counting"),
    _e("finite_pairs", FinitePairs(((1, 1), (2, 5), (10, 3))),
       Fraction(0), "oracle", "counting"),
    _e("upper_5_5", UpperQuadrant(5, 5), 1, "oracle", "counting", "near", "estimate"),
    _e("translate_lattice_1_1", Translate(Lattice(2, 2), (1, 1)),
       Fraction(1, 4), "oracle", "counting", "estimate"),
    _e("translate_product_4_4", Translate(Product(Multiples(2), Multiples(3)), (4, 4)),
       Fraction(1, 6), "oracle", "estimate"),
    _e("dilate_full_2_5", Dilate((2, 5), FullQuadrant()),
       Fraction(1, 10), "oracle", "counting", "estimate"),
    _e("dilate_lattice", Dilate((2, 3), Lattice(2, 1)),
       Fraction(1, 12), "counting", "estimate"),
    _e("union_lattices", Union(Lattice(2, 3), Lattice(3, 2)),
       Fraction(11, 36), "oracle", "estimate"),
    _e("union_disjoint_shift", Union(Lattice(2, 2), Translate(Lattice(2, 2), (1, 1))),
       Fraction(1, 2), "oracle", "estimate"),
    _e("complement_lattice", Complement(Lattice(2, 2)),
       Fraction(3, 4), "oracle", "estimate"),
    _e("difference_lattices", Difference(Lattice(2, 2), Lattice(4, 4)),
       Fraction(3, 16), "oracle", "estimate"),
    _e("heavy_tail_lattice", Intersection(Lattice(2, 3), UpperQuadrant(5, 5)),
       Fraction(1, 6), "oracle", "estimate"),
    _e("delim_sqrt_square", Delimited(Power(1, Fraction(1, 2)), Power(1, 2)),
       Fraction(1, 3), "oracle", "near", "estimate"),
    _e("delim_linear_cubic", Delimited(Power(1, 1), Power(1, 3)),
       Fraction(1, 4), "oracle", "near", "estimate"),
    _e("delim_const_square", Delimited(Constant(1), Power(1, 2)),
       Fraction(2, 3), "oracle", "near", "estimate"),
    _e("delim_coeff_band", Delimited(Power(2, Fraction(1, 2)), Power(3, 2)),
       Fraction(1, 3), "near", "estimate"),
    _e("delim_exponential", Delimited(Constant(1), Exponential(1, 2)),
       1, "oracle", "near", "estimate"),
    _e("delim_exp_lower", Delimited(Exponential(1, 2), Exponential(1, 3)),
       Fraction(0), "near"),
)


def by_tag(tag: str) -> tuple[CorpusEntry, ...]:
    return tuple(c for c in CORPUS if tag in c.tags)


def entry(name: str) -> CorpusEntry:
    for c in CORPUS:
        if c.name == name:
            return c
    raise KeyError(name)
