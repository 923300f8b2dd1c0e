"""Symbolic families of rationals built from reciprocal-polynomial atoms.

Every scalar is a ``fractions.Fraction``; all arithmetic on any decision path
is exact.  A family is a finite union of atoms, optionally intersected with a
closed rational interval.  An atom is either a finite set of rationals or a
value family

    base + sum_i coeff_i * prod_{j in support_i} 1 / (q_j * n_j + r_j)

over independent integer parameters n_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Tuple, Union

Rational = Fraction

#: node budget used by `member` when the caller does not supply one
DEFAULT_MEMBER_CAP = 4000


class UnknownResult(Exception):
    """Raised when an exact answer cannot be certified within budget."""


def rat(x: Union[int, str, Fraction]) -> Fraction:
    """Coerce an int, 'p/q' string, or Fraction to an exact rational."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.replace(" ", ""))
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True, order=True)
class Parameter:
    """Integer parameter ranging over the progression {q*n + r : n >= min}.

    All progression values must be >= 1.  `min` may be 0 so that progressions
    whose first term is smaller than the step (e.g. {2, 6, 10, ...}) are
    representable.
    """

    id: str
    min: int = 1
    q: int = 1
    r: int = 0

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError(f"parameter {self.id}: modulus must be >= 1")
        if self.r < 0:
            raise ValueError(f"parameter {self.id}: offset must be >= 0")
        if self.min < 0:
            raise ValueError(f"parameter {self.id}: min index must be >= 0")
        if self.q * self.min + self.r < 1:
            raise ValueError(f"parameter {self.id}: values must be >= 1")

    def value(self, n: int) -> int:
        return self.q * n + self.r

    @property
    def first(self) -> int:
        return self.q * self.min + self.r

    def index_of(self, v: Fraction) -> Optional[int]:
        """Index n with q*n + r == v, or None if v is not in the progression."""
        if v.denominator != 1:
            return None
        n, rem = divmod(int(v) - self.r, self.q)
        if rem != 0 or n < self.min:
            return None
        return n


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    support: frozenset

    def sort_key(self):
        return (len(self.support), tuple(sorted(self.support)))


@dataclass(frozen=True)
class FiniteAtom:
    elements: Tuple[Fraction, ...]


@dataclass(frozen=True)
class PolyAtom:
    base: Fraction
    monomials: Tuple[Monomial, ...]
    params: Tuple[Parameter, ...]

    def param(self, pid: str) -> Parameter:
        for p in self.params:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def value(self, assignment: Mapping[str, int]) -> Fraction:
        """Exact value at an assignment of parameter indices."""
        vals = {p.id: p.value(assignment[p.id]) for p in self.params}
        total = self.base
        for m in self.monomials:
            num, den = m.coeff.numerator, m.coeff.denominator
            for pid in m.support:
                den *= vals[pid]
            total += Fraction(num, den)
        return total


Atom = Union[FiniteAtom, PolyAtom]


def finite(elements: Iterable) -> FiniteAtom:
    return FiniteAtom(tuple(sorted({rat(e) for e in elements})))


def poly(base, monomials, params) -> Atom:
    """Build a reciprocal-polynomial atom; normalizes on the way in."""
    monos = tuple(
        Monomial(rat(c), frozenset(s)) for c, s in monomials
    )
    return normalize(PolyAtom(rat(base), monos, tuple(params)))


def normalize(a: Atom) -> Atom:
    """Canonical form: merge equal supports, drop zero coefficients and dead
    parameters; an atom left with no monomials collapses to a finite atom.
    Idempotent."""
    if isinstance(a, FiniteAtom):
        return FiniteAtom(tuple(sorted(set(a.elements))))
    merged: dict = {}
    for m in a.monomials:
        if not m.support:
            raise ValueError("monomial with empty support")
        merged[m.support] = merged.get(m.support, Fraction(0)) + m.coeff
    monos = tuple(
        sorted(
            (Monomial(c, s) for s, c in merged.items() if c != 0),
            key=Monomial.sort_key,
        )
    )
    if not monos:
        return FiniteAtom((a.base,))
    used = frozenset().union(*(m.support for m in monos))
    params = tuple(sorted((p for p in a.params if p.id in used)))
    declared = {p.id for p in params}
    if used - declared:
        raise ValueError(f"undeclared parameters {sorted(used - declared)}")
    return PolyAtom(a.base, monos, params)


def substitute(a: PolyAtom, pid: str, n: int) -> Atom:
    """Pin one parameter to index n, folding it into the coefficients."""
    p = a.param(pid)
    v = Fraction(p.value(n))
    base = a.base
    merged: dict = {}
    for m in a.monomials:
        if pid in m.support:
            s = m.support - {pid}
            c = m.coeff / v
            if s:
                merged[s] = merged.get(s, Fraction(0)) + c
            else:
                base += c
        else:
            merged[m.support] = merged.get(m.support, Fraction(0)) + m.coeff
    monos = tuple(
        sorted(
            (Monomial(c, s) for s, c in merged.items() if c != 0),
            key=Monomial.sort_key,
        )
    )
    if not monos:
        return FiniteAtom((base,))
    used = frozenset().union(*(m.support for m in monos))
    params = tuple(sorted(q for q in a.params if q.id in used and q.id != pid))
    return PolyAtom(base, monos, params)


def collapse(a: PolyAtom, drop: frozenset) -> Atom:
    """Limit atom in the directions `drop`: delete every monomial whose
    support meets `drop`; the remaining parameters still range."""
    monos = tuple(m for m in a.monomials if not (m.support & drop))
    if not monos:
        return FiniteAtom((a.base,))
    used = frozenset().union(*(m.support for m in monos))
    params = tuple(sorted(p for p in a.params if p.id in used))
    return PolyAtom(a.base, monos, params)


def atom_bounds(a: Atom) -> Optional[Tuple[Fraction, Fraction]]:
    """Closed outer bounds on the atom's value set (None for an empty atom)."""
    if isinstance(a, FiniteAtom):
        if not a.elements:
            return None
        return (min(a.elements), max(a.elements))
    lo = hi = a.base
    firsts = {p.id: p.first for p in a.params}
    for m in a.monomials:
        den = 1
        for pid in m.support:
            den *= firsts[pid]
        t = abs(m.coeff) / den
        if m.coeff > 0:
            hi += t
        else:
            lo -= t
    return (lo, hi)


def pinned_bounds(a: PolyAtom, pid: str, n: int) -> Tuple[Fraction, Fraction]:
    """Outer bounds with parameter `pid` pinned at index n, computed term by
    term (no coefficient merging), so the interval shrinks as n grows."""
    firsts = {p.id: p.first for p in a.params}
    firsts[pid] = a.param(pid).value(n)
    lo = hi = a.base
    for m in a.monomials:
        den = 1
        for q in m.support:
            den *= firsts[q]
        t = abs(m.coeff) / den
        if m.coeff > 0:
            hi += t
        else:
            lo -= t
    return (lo, hi)


def direction_tail_bound(a: PolyAtom, pid: str, n: int) -> Fraction:
    """Upper bound on |sum of monomials containing pid| when its index is
    >= n and every other parameter is at its first value."""
    firsts = {p.id: p.first for p in a.params}
    v = a.param(pid).value(n)
    tot = Fraction(0)
    for m in a.monomials:
        if pid not in m.support:
            continue
        den = v
        for q in m.support:
            if q != pid:
                den *= firsts[q]
        tot += abs(m.coeff) / den
    return tot


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class SetFamily:
    """Finite union of atoms, optionally clipped to a closed interval."""

    atoms: Tuple[Atom, ...]
    clip: Optional[Tuple[Fraction, Fraction]] = None
    note: Optional[str] = field(default=None, compare=False)


def _alpha_key(a: Atom):
    """Structural key modulo order-preserving parameter renaming."""
    if isinstance(a, FiniteAtom):
        return ("fin", a.elements)
    order: dict = {}
    for m in a.monomials:
        for pid in sorted(m.support):
            if pid not in order:
                order[pid] = len(order)
    by_id = {p.id: p for p in a.params}
    monos = tuple(
        (m.coeff, tuple(sorted(order[pid] for pid in m.support)))
        for m in a.monomials
    )
    params = tuple(
        sorted(
            (order[p.id], p.min, p.q, p.r) for p in a.params
        )
    )
    return ("poly", a.base, monos, params)


def family(atoms: Iterable[Atom], clip=None, note=None) -> SetFamily:
    """Normalized family: atoms normalized and deduplicated, finite atoms
    merged and filtered by the clip, provably out-of-clip atoms dropped."""
    if clip is not None:
        lo, hi = rat(clip[0]), rat(clip[1])
        if lo > hi:
            return SetFamily((), None, note)
        clip = (lo, hi)
    fin: set = set()
    polys = []
    seen = set()
    for raw in atoms:
        a = normalize(raw)
        if isinstance(a, FiniteAtom):
            fin.update(a.elements)
        else:
            key = _alpha_key(a)
            if key in seen:
                continue
            seen.add(key)
            if clip is not None:
                b = atom_bounds(a)
                if b is not None and (b[1] < clip[0] or b[0] > clip[1]):
                    continue
            polys.append(a)
    if clip is not None:
        fin = {e for e in fin if clip[0] <= e <= clip[1]}
    out: list = []
    if fin:
        out.append(FiniteAtom(tuple(sorted(fin))))
    out.extend(sorted(polys, key=_alpha_key))
    return SetFamily(tuple(out), clip, note)


def finite_family(elements: Iterable, clip=None) -> SetFamily:
    return family([finite(elements)], clip=clip)


def empty_family() -> SetFamily:
    return SetFamily(())


def is_empty(F: SetFamily) -> bool:
    return not F.atoms


def max_param_count(F: SetFamily) -> int:
    return max(
        (len(a.params) for a in F.atoms if isinstance(a, PolyAtom)), default=0
    )


def phantom_free(F: SetFamily) -> bool:
    """True when no atom can take values outside the clip, so the clip is a
    faithful restriction rather than a lazy filter."""
    if F.clip is None:
        return True
    lo, hi = F.clip
    for a in F.atoms:
        b = atom_bounds(a)
        if b is None:
            continue
        if b[0] < lo or b[1] > hi:
            return False
    return True


# ---------------------------------------------------------------------------
# membership


@dataclass(frozen=True)
class In:
    atom_index: int
    witness: Tuple[Tuple[str, int], ...]  # (parameter id, index) pairs


@dataclass(frozen=True)
class Out:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str = ""


Verdict = Union[In, Out, Unknown]


class _Budget:
    __slots__ = ("left", "exhausted")

    def __init__(self, n: int):
        self.left = n
        self.exhausted = False

    def spend(self) -> bool:
        if self.left <= 0:
            self.exhausted = True
            return False
        self.left -= 1
        return True


def _solve_single(a: PolyAtom, q: Fraction) -> Optional[dict]:
    """Solve base + B/v = q for a one-parameter atom (one merged monomial)."""
    (p,) = a.params
    b = Fraction(0)
    for m in a.monomials:
        b += m.coeff  # supports all equal {p.id} after normalization
    if b == 0:
        return {p.id: p.min} if a.base == q else None
    if q == a.base:
        return None
    v = b / (q - a.base)
    n = p.index_of(v)
    return None if n is None else {p.id: n}


def _member_atom(a: Atom, q: Fraction, bud: _Budget) -> Optional[dict]:
    if isinstance(a, FiniteAtom):
        return {} if q in a.elements else None
    if len(a.params) == 1:
        return _solve_single(a, q)
    t = a.params[0]
    n = t.min
    while bud.spend():
        lo, hi = pinned_bounds(a, t.id, n)
        if q < lo or q > hi:
            # pinned interval shrinks as n grows: no solution beyond n either
            return None
        sub = substitute(a, t.id, n)
        if isinstance(sub, FiniteAtom):
            got = {} if q in sub.elements else None
        else:
            got = _member_atom(sub, q, bud)
        if got is not None:
            got[t.id] = n
            return got
        if bud.exhausted:
            return None
        n += 1
    return None


def member(F: SetFamily, q, cap: int = DEFAULT_MEMBER_CAP) -> Verdict:
    """Decide q in F.  In/Out are exact; Unknown is returned only when the
    search exceeds `cap` node expansions without certifying Out."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    q = rat(q)
    if F.clip is not None and not (F.clip[0] <= q <= F.clip[1]):
        return Out()
    undecided = False
    for i, a in enumerate(F.atoms):
        bud = _Budget(cap)
        got = _member_atom(a, q, bud)
        if got is not None:
            return In(i, tuple(sorted(got.items())))
        if bud.exhausted:
            undecided = True
    if undecided:
        return Unknown("search budget exhausted")
    return Out()


def family_values_example_check(F: SetFamily, verdict: In, q) -> bool:
    """Re-evaluate an In witness exactly."""
    q = rat(q)
    a = F.atoms[verdict.atom_index]
    if isinstance(a, FiniteAtom):
        return q in a.elements
    return a.value(dict(verdict.witness)) == q
