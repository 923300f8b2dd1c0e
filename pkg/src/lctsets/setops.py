"""Constructors on symbolic families: affine images, unions, clips,
Minkowski sums, sum closure, and the classical standard-set builders."""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .setfam import (
    Atom,
    FiniteAtom,
    Monomial,
    Parameter,
    PolyAtom,
    SetFamily,
    UnknownResult,
    atom_bounds,
    family,
    finite,
    is_empty,
    phantom_free,
    rat,
)
from .derived import is_acc, is_dcc, min_positive


def _map_atom_affine(a: Atom, mul: Fraction, add: Fraction) -> Atom:
    if isinstance(a, FiniteAtom):
        return FiniteAtom(tuple(sorted(mul * e + add for e in a.elements)))
    monos = tuple(
        Monomial(mul * m.coeff, m.support) for m in a.monomials
    )
    return PolyAtom(mul * a.base + add, monos, a.params)


def translate(F: SetFamily, a) -> SetFamily:
    """Exact image {x + a : x in F}."""
    a = rat(a)
    clip = None if F.clip is None else (F.clip[0] + a, F.clip[1] + a)
    return family([_map_atom_affine(x, Fraction(1), a) for x in F.atoms], clip)


def scale(F: SetFamily, c) -> SetFamily:
    """Exact image {c * x : x in F}; c must be nonzero."""
    c = rat(c)
    if c == 0:
        raise ValueError("scale factor must be nonzero")
    if F.clip is None:
        clip = None
    else:
        lo, hi = F.clip[0] * c, F.clip[1] * c
        clip = (lo, hi) if lo <= hi else (hi, lo)
    return family([_map_atom_affine(x, c, Fraction(0)) for x in F.atoms], clip)


def _drop_redundant_clip(F: SetFamily) -> SetFamily:
    if F.clip is None:
        return F
    if phantom_free(F):
        return SetFamily(F.atoms, None, F.note)
    return F


def union(F: SetFamily, G: SetFamily) -> SetFamily:
    """Union of two families; the single stored clip must be reconcilable."""
    Fu, Gu = _drop_redundant_clip(F), _drop_redundant_clip(G)
    if Fu.clip == Gu.clip:
        return family(Fu.atoms + Gu.atoms, Fu.clip)
    if Fu.clip is None or Gu.clip is None:
        raise ValueError("cannot union families with incompatible clips")
    raise ValueError("cannot union families with incompatible clips")


def clip(F: SetFamily, lo, hi) -> SetFamily:
    """Intersect with the closed interval [lo, hi] (empty interval gives the
    empty family, not an error)."""
    lo, hi = rat(lo), rat(hi)
    if F.clip is not None:
        lo, hi = max(lo, F.clip[0]), min(hi, F.clip[1])
    return family(F.atoms, (lo, hi))


def _freshened(atoms: Iterable[Atom]) -> List[Atom]:
    """Deterministically rename parameters p1, p2, ... across an atom list."""
    out: List[Atom] = []
    counter = itertools.count(1)
    for a in atoms:
        if isinstance(a, FiniteAtom):
            out.append(a)
            continue
        ren = {p.id: f"p{next(counter)}" for p in a.params}
        monos = tuple(
            Monomial(m.coeff, frozenset(ren[i] for i in m.support))
            for m in a.monomials
        )
        params = tuple(
            Parameter(ren[p.id], p.min, p.q, p.r) for p in a.params
        )
        out.append(PolyAtom(a.base, monos, params))
    return out


def _atom_sum(a: Atom, b: Atom, counter) -> List[Atom]:
    if isinstance(a, FiniteAtom) and isinstance(b, FiniteAtom):
        return [finite(x + y for x in a.elements for y in b.elements)]
    if isinstance(a, FiniteAtom):
        return [_map_atom_affine(b, Fraction(1), e) for e in a.elements]
    if isinstance(b, FiniteAtom):
        return [_map_atom_affine(a, Fraction(1), e) for e in b.elements]
    ren_a = {p.id: f"p{next(counter)}" for p in a.params}
    ren_b = {p.id: f"p{next(counter)}" for p in b.params}
    monos = tuple(
        Monomial(m.coeff, frozenset(ren_a[i] for i in m.support))
        for m in a.monomials
    ) + tuple(
        Monomial(m.coeff, frozenset(ren_b[i] for i in m.support))
        for m in b.monomials
    )
    params = tuple(Parameter(ren_a[p.id], p.min, p.q, p.r) for p in a.params) + tuple(
        Parameter(ren_b[p.id], p.min, p.q, p.r) for p in b.params
    )
    return [PolyAtom(a.base + b.base, monos, params)]


def sum_families(F: SetFamily, G: SetFamily) -> SetFamily:
    """Pairwise sums {x + y}; parameters of the two sides are independent.
    Clips are dropped (noted on the result) and must be re-applied."""
    counter = itertools.count(1)
    out: List[Atom] = []
    for a in F.atoms:
        for b in G.atoms:
            out.extend(_atom_sum(a, b, counter))
    note = None
    if F.clip is not None or G.clip is not None:
        note = "clips dropped by sum; re-apply explicitly"
    return family(_freshened(out), None, note)


def _check_unit_interval(F: SetFamily) -> None:
    for a in F.atoms:
        b = atom_bounds(a)
        if b is None:
            continue
        lo, hi = b
        if F.clip is not None:
            lo, hi = max(lo, F.clip[0]), min(hi, F.clip[1])
        if lo < 0 or hi > 1:
            raise UnknownResult(
                "cannot certify the family lies inside [0, 1]"
            )


def gamma_plus(F: SetFamily) -> SetFamily:
    """Sum closure: {0} together with all finite sums of elements, clipped to
    [0, 1].  Needs a DCC family inside [0, 1]; the number of summands is
    bounded by floor(1 / min positive element)."""
    _check_unit_interval(F)
    if not is_dcc(F):
        raise UnknownResult("sum closure needs a DCC family")
    base = _drop_redundant_clip(F)
    if is_empty(base):
        return family([finite([0])], (Fraction(0), Fraction(1)))
    gbar = min(Fraction(1), min_positive(F))
    k_max = int(Fraction(1) / gbar)
    terms: List[Atom] = [finite([0])]
    cur = base
    terms.extend(cur.atoms)
    for _ in range(1, k_max):
        cur = sum_families(cur, base)
        terms.extend(cur.atoms)
    return family(_freshened(terms), (Fraction(0), Fraction(1)))


def dgamma(F: SetFamily) -> SetFamily:
    """The family {(m - 1 + g) / m : g in sum closure of F, m >= 1}."""
    gp = gamma_plus(F)
    counter = itertools.count(1)
    out: List[Atom] = []
    for a in gp.atoms:
        if isinstance(a, FiniteAtom):
            for e in a.elements:
                mid = f"p{next(counter)}"
                out.append(
                    PolyAtom(
                        Fraction(1),
                        (Monomial(-(1 - e), frozenset({mid})),),
                        (Parameter(mid),),
                    )
                )
        else:
            mid = f"p{next(counter)}"
            monos = [Monomial(-(1 - a.base), frozenset({mid}))]
            for m in a.monomials:
                monos.append(Monomial(m.coeff, m.support | {mid}))
            out.append(
                PolyAtom(Fraction(1), tuple(monos), a.params + (Parameter(mid),))
            )
    return family(_freshened(out), (Fraction(0), Fraction(1)))


def n_zero(F: SetFamily) -> SetFamily:
    """The family {(1 - g) / n : g in F, n >= 1} together with {0}.

    The caller supplies a sum-closed F when the classical operator is wanted.
    """
    _check_unit_interval(F)
    counter = itertools.count(1)
    out: List[Atom] = [finite([0])]
    for a in F.atoms:
        if isinstance(a, FiniteAtom):
            for e in a.elements:
                if e == 1:
                    continue
                nid = f"p{next(counter)}"
                out.append(
                    PolyAtom(
                        Fraction(0),
                        (Monomial(1 - e, frozenset({nid})),),
                        (Parameter(nid),),
                    )
                )
        else:
            nid = f"p{next(counter)}"
            monos = []
            if a.base != 1:
                monos.append(Monomial(1 - a.base, frozenset({nid})))
            for m in a.monomials:
                monos.append(Monomial(-m.coeff, m.support | {nid}))
            out.append(
                PolyAtom(Fraction(0), tuple(monos), a.params + (Parameter(nid),))
            )
    return family(_freshened(out), (Fraction(0), Fraction(1)))


def standard_set() -> SetFamily:
    """{1 - 1/n : n >= 1} together with {1}."""
    return family(
        [
            PolyAtom(Fraction(1), (Monomial(Fraction(-1), frozenset({"n"})),), (Parameter("n"),)),
            finite([1]),
        ]
    )


def hyperstandard(g0: Iterable) -> SetFamily:
    """{1 - g/n : g in g0, n >= 1} clipped to [0, 1]; g0 must contain 0 and 1."""
    vals = sorted({rat(g) for g in g0})
    if any(v < 0 for v in vals):
        raise ValueError("hyperstandard source values must be nonnegative")
    if Fraction(0) not in vals or Fraction(1) not in vals:
        raise ValueError("hyperstandard source must contain 0 and 1")
    atoms: List[Atom] = []
    counter = itertools.count(1)
    for v in vals:
        if v == 0:
            atoms.append(finite([1]))
        else:
            nid = f"p{next(counter)}"
            atoms.append(
                PolyAtom(Fraction(1), (Monomial(-v, frozenset({nid})),), (Parameter(nid),))
            )
    return family(atoms, (Fraction(0), Fraction(1)))


def quotient_by_n(F: SetFamily) -> SetFamily:
    """The family {g / n : g in F, n >= 1}; needs a clip-free presentation."""
    base = _drop_redundant_clip(F)
    if base.clip is not None:
        raise UnknownResult(
            "quotient needs a clip-free family (clipped values would pollute the image)"
        )
    counter = itertools.count(1)
    out: List[Atom] = []
    for a in base.atoms:
        if isinstance(a, FiniteAtom):
            for e in a.elements:
                if e == 0:
                    out.append(finite([0]))
                    continue
                nid = f"p{next(counter)}"
                out.append(
                    PolyAtom(Fraction(0), (Monomial(e, frozenset({nid})),), (Parameter(nid),))
                )
        else:
            nid = f"p{next(counter)}"
            monos = []
            if a.base != 0:
                monos.append(Monomial(a.base, frozenset({nid})))
            for m in a.monomials:
                monos.append(Monomial(m.coeff, m.support | {nid}))
            out.append(
                PolyAtom(Fraction(0), tuple(monos), a.params + (Parameter(nid),))
            )
    return family(_freshened(out))


def mld1(gammas: Iterable) -> SetFamily:
    """{1} together with {1 - g : g in gammas} for a finite coefficient set."""
    vals = {Fraction(1)}
    vals.update(1 - rat(g) for g in gammas)
    return family([finite(vals)])
