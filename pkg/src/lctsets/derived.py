"""Derived-set operators, chain-condition tests, and standardization
certificates for symbolic families.

The k-th derived family is computed by the collapse construction: for every
reciprocal-polynomial atom and every nonempty parameter subset T, delete each
monomial whose support meets T and let the remaining parameters range.  The
result is always a superset of the true set of k-th order accumulation points
and is exact for nondegenerate atoms; degenerate or clip-straddling inputs
downgrade refutations to Unknown rather than ever certifying a wrong answer.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from .setfam import (
    Atom,
    FiniteAtom,
    In,
    Monomial,
    Out,
    Parameter,
    PolyAtom,
    SetFamily,
    Unknown,
    UnknownResult,
    _Budget,
    atom_bounds,
    collapse,
    direction_tail_bound,
    family,
    is_empty,
    max_param_count,
    member,
    phantom_free,
    pinned_bounds,
    rat,
    substitute,
)

DEFAULT_CAP = 4000
_SEARCH_NODES = 200_000
_MAX_STRAYS = 64
_DIRECT_SOLVE_PREFIX = 64


# ---------------------------------------------------------------------------
# derived-set operators


def _require_family(F) -> SetFamily:
    if not isinstance(F, SetFamily):
        raise TypeError(
            "derived-set operators need a symbolic SetFamily; generators "
            "support bounded enumeration only (use oracle.detect_accumulation)"
        )
    return F


_MAX_COLLAPSE_PARAMS = 16


def derived_step(F: SetFamily) -> SetFamily:
    """One application of the limit construction (superset of the true
    derived set; exact for nondegenerate atoms)."""
    _require_family(F)
    out: List[Atom] = []
    for a in F.atoms:
        if not isinstance(a, PolyAtom):
            continue
        ids = [p.id for p in a.params]
        if len(ids) > _MAX_COLLAPSE_PARAMS:
            raise UnknownResult(
                f"derived set of a {len(ids)}-parameter atom is too large"
            )
        # distinct collapses are indexed by which monomials survive, so
        # deduplicate subset directions through survivor bitmasks
        mono_masks = []
        for m in a.monomials:
            mask = 0
            for i, pid in enumerate(ids):
                if pid in m.support:
                    mask |= 1 << i
            mono_masks.append(mask)
        seen = set()
        for tmask in range(1, 1 << len(ids)):
            surv = 0
            for j, mm in enumerate(mono_masks):
                if not (mm & tmask):
                    surv |= 1 << j
            if surv in seen:
                continue
            seen.add(surv)
            drop = frozenset(
                pid for i, pid in enumerate(ids) if tmask & (1 << i)
            )
            out.append(collapse(a, drop))
    return family(out, clip=F.clip)


def derived_set(F: SetFamily, k: int) -> SetFamily:
    """k-th derived family; k = 0 returns the closure."""
    _require_family(F)
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return closure(F)
    cur = F
    for _ in range(k):
        cur = derived_step(cur)
        if is_empty(cur):
            break
    return cur


def closure(F: SetFamily) -> SetFamily:
    _require_family(F)
    return family(F.atoms + derived_step(F).atoms, clip=F.clip)


def level_families(F: SetFamily) -> List[SetFamily]:
    """[closure, d^1, d^2, ...] down to (and including) the first empty level."""
    levels = [closure(F)]
    guard = max_param_count(F) + 2
    while not is_empty(levels[-1]) and len(levels) <= guard:
        levels.append(derived_step(levels[-1]))
    return levels


# ---------------------------------------------------------------------------
# exact equation solving on atoms


def _merged_single(a: PolyAtom) -> Fraction:
    tot = Fraction(0)
    for m in a.monomials:
        tot += m.coeff
    return tot


def _progression_values_in(p: Parameter, lo: Fraction, hi: Fraction):
    """Indices n with lo <= q*n + r <= hi."""
    if hi < lo:
        return
    n0 = max(p.min, -(-(lo.numerator * 1 - 0) // 1) if False else p.min)
    # ceil((lo - r)/q), floor((hi - r)/q)
    lo_n = (lo - p.r) / p.q
    hi_n = (hi - p.r) / p.q
    start = max(p.min, math.ceil(lo_n))
    stop = math.floor(hi_n)
    for n in range(start, stop + 1):
        yield n


def _solve_one_var(a: PolyAtom, target: Fraction) -> Optional[List[Dict[str, int]]]:
    (p,) = a.params
    b = _merged_single(a)
    if b == 0:
        # value identically equals base
        return None if a.base == target else []
    if target == a.base:
        return []
    v = b / (target - a.base)
    n = p.index_of(v)
    return [] if n is None else [{p.id: n}]


def _coeff_of(a: PolyAtom, support: frozenset) -> Fraction:
    for m in a.monomials:
        if m.support == support:
            return m.coeff
    return Fraction(0)


def _solve_two_var(
    a: PolyAtom, target: Fraction, bud: _Budget
) -> Optional[List[Dict[str, int]]]:
    """All grid solutions of a bilinear atom equation, or None when the
    solution set is provably infinite or undecided."""
    px, py = a.params
    c1 = _coeff_of(a, frozenset({px.id}))
    c2 = _coeff_of(a, frozenset({py.id}))
    c12 = _coeff_of(a, frozenset({px.id, py.id}))
    A = a.base - target  # A*x*y + c1*y + c2*x + c12 = 0
    sols: List[Dict[str, int]] = []

    def try_pair(x: Fraction, y: Fraction):
        nx, ny = px.index_of(x), py.index_of(y)
        if nx is not None and ny is not None:
            s = {px.id: nx, py.id: ny}
            if s not in sols:
                sols.append(s)

    if A == 0:
        # c1*y + c2*x + c12 = 0 over the grid
        if c1 == 0 and c2 == 0:
            return [] if c12 != 0 else None
        if c1 == 0:
            x = -Fraction(c12) / c2
            return None if px.index_of(x) is not None else []
        if c2 == 0:
            y = -Fraction(c12) / c1
            return None if py.index_of(y) is not None else []
        slope = -c2 / c1
        if slope > 0:
            # infinitely many real solutions; decide existence over the grid
            g = math.gcd(abs(c1.numerator * py.q * c2.denominator),
                         abs(c2.numerator * px.q * c1.denominator))
            # fall back to a bounded scan for existence, then report None
            for n in range(px.min, px.min + 4 * py.q * px.q + 64):
                if not bud.spend():
                    return None
                x = Fraction(px.value(n))
                y = -(c2 * x + c12) / c1
                if py.index_of(y) is not None:
                    return None  # one solution on a positive-slope line: infinitely many
            return None  # undecided: be conservative
        # slope < 0: y decreases as x grows, so x is bounded
        first_y = Fraction(py.first)
        # c1*y = -(c2*x + c12); y >= first_y bounds x
        out: List[Dict[str, int]] = []
        n = px.min
        while True:
            if not bud.spend():
                return None
            x = Fraction(px.value(n))
            y = -(c2 * x + c12) / c1
            if y < first_y:
                break
            ny = py.index_of(y)
            if ny is not None:
                out.append({px.id: n, py.id: ny})
            n += 1
        return out

    # A != 0: y = -(c2*x + c12) / (A*x + c1)
    n = px.min
    seenx = set()
    for _ in range(_DIRECT_SOLVE_PREFIX):
        if not bud.spend():
            return None
        x = Fraction(px.value(n))
        den = A * x + c1
        num = -(c2 * x + c12)
        if den == 0:
            if num == 0:
                return None  # y free at this x: infinitely many solutions
        else:
            y = num / den
            ny = py.index_of(y)
            if ny is not None:
                try_pair(x, y)
        seenx.add(x)
        n += 1
    # tail regime: y(x) -> -c2/A with deviation N0/(A*(A*x+c1))
    y_inf = -c2 / A
    dev_num = c1 * c2 - A * c12
    if dev_num == 0:
        # y(x) == y_inf identically: infinitely many solutions iff y_inf on grid
        return None if py.index_of(y_inf) is not None else sols
    x0 = Fraction(px.value(n))
    while A * x0 + c1 == 0 or (A * x0 + c1) * (A * (x0 + px.q) + c1) < 0:
        x0 += px.q
    delta = abs(dev_num) / (abs(A) * abs(A * x0 + c1))
    # enlarge x0 until the y-window is small
    while delta > 4 * py.q:
        x0 *= 2
        delta = abs(dev_num) / (abs(A) * abs(A * x0 + c1))
        if not bud.spend():
            return None
    for ny in _progression_values_in(py, y_inf - delta, y_inf + delta):
        if not bud.spend():
            return None
        y = Fraction(py.value(ny))
        den = A * y + c2
        if den == 0:
            continue
        x = -(c1 * y + c12) / den
        if x in seenx:
            continue
        nx = px.index_of(x)
        if nx is not None and x > 0:
            try_pair(x, y)
    return sols


def solve_all_atom(
    a: Atom,
    target: Fraction,
    gap: Optional[Fraction],
    bud: _Budget,
) -> Optional[List[Dict[str, int]]]:
    """Every assignment with atom value == target, or None when the set is
    infinite or could not be certified within budget.

    `gap` is a positive lower bound on |target - w| over limit points w of the
    atom with w != target; it makes the outer loops terminate.
    """
    if isinstance(a, FiniteAtom):
        return [{}] if target in a.elements else []
    k = len(a.params)
    if k == 1:
        return _solve_one_var(a, target)
    if k == 2:
        return _solve_two_var(a, target, bud)
    t = a.params[0]
    out: List[Dict[str, int]] = []
    n = t.min
    while True:
        if not bud.spend():
            return None
        lo, hi = pinned_bounds(a, t.id, n)
        if target < lo or target > hi:
            break
        if gap is not None and direction_tail_bound(a, t.id, n) < gap:
            break
        sub = substitute(a, t.id, n)
        if isinstance(sub, FiniteAtom):
            got: Optional[List[Dict[str, int]]] = (
                [{}] if target in sub.elements else []
            )
            if got and len(a.params) > 1:
                return None  # constant in remaining params: infinitely many
        else:
            got = solve_all_atom(sub, target, gap, bud)
        if got is None:
            return None
        for s in got:
            s[t.id] = n
            out.append(s)
        n += 1
    return out


# ---------------------------------------------------------------------------
# exact nearest-distance bounds (separation radii)


def _nearest_one_var(a: PolyAtom, g0: Fraction) -> Optional[Fraction]:
    """Smallest attained |value - g0| over a one-parameter atom, excluding
    values equal to g0; None when no attained value can undercut the tail
    limit |base - g0| (that limit is accounted for at the next level)."""
    (p,) = a.params
    b = _merged_single(a)
    if b == 0:
        return None
    diff = g0 - a.base
    if diff == 0:
        # values base + b/v accumulate at g0; infimum 0 (caller gates this)
        return abs(b) / p.value(p.min + 2)
    if (b > 0) != (diff > 0):
        return None  # distances decrease monotonically to |base - g0|
    vstar = b / diff
    cands = {p.min, p.min + 1}
    approx = (vstar - p.r) / p.q
    mid = math.floor(approx)
    for n in range(mid - 2, mid + 3):
        if n >= p.min:
            cands.add(n)
    best: Optional[Fraction] = None
    for n in sorted(cands):
        val = a.base + b / p.value(n)
        d = abs(val - g0)
        if d == 0:
            continue
        if best is None or d < best:
            best = d
    return best


def _nearest_attained(
    a: Atom, g0: Fraction, gap: Optional[Fraction], bud: _Budget
) -> Tuple[bool, Optional[Fraction]]:
    """(ok, distance): smallest attained distance that could undercut `gap`
    (None when nothing relevant is attained).  ok=False on budget exhaustion."""
    if isinstance(a, FiniteAtom):
        best = None
        for e in a.elements:
            if e == g0:
                continue
            d = abs(e - g0)
            if best is None or d < best:
                best = d
        return True, best
    if len(a.params) == 1:
        return True, _nearest_one_var(a, g0)
    t = a.params[0]
    n = t.min
    best: Optional[Fraction] = None
    while True:
        if not bud.spend():
            return False, best
        lo, hi = pinned_bounds(a, t.id, n)
        if g0 < lo:
            floor_d = lo - g0
        elif g0 > hi:
            floor_d = g0 - hi
        else:
            floor_d = Fraction(0)
        if gap is not None:
            floor_d = max(floor_d, gap - direction_tail_bound(a, t.id, n))
        stop = best if best is not None else gap
        if stop is not None and floor_d >= stop:
            break
        sub = substitute(a, t.id, n)
        ok, d = _nearest_attained(sub, g0, gap, bud)
        if not ok:
            return False, best
        if d is not None and (best is None or d < best):
            best = d
        n += 1
    return True, best


def level_gaps(
    levels: List[SetFamily], g0: Fraction, bud: _Budget
) -> Optional[List[Optional[Fraction]]]:
    """gaps[j] = exact positive lower bound on dist(g0, level-(j+1) values
    excluding g0), computed deepest level first.  None entries mean the level
    holds no other points.  Returns None on budget exhaustion."""
    gaps: List[Optional[Fraction]] = [None] * (len(levels) + 1)
    for j in range(len(levels) - 1, -1, -1):
        best = gaps[j + 1]
        for a in levels[j].atoms:
            ok, d = _nearest_attained(a, g0, gaps[j + 1], bud)
            if not ok:
                return None
            if d is not None and (best is None or d < best):
                best = d
        gaps[j] = best
    return gaps


# ---------------------------------------------------------------------------
# routes (harmonic pencils) into a point


def _route_coeff(a: PolyAtom, t: Parameter, w: Dict[str, int]) -> Optional[Fraction]:
    """Residual coefficient along direction t at kept assignment w, i.e. the
    beta with atom value = limit + beta / (q*n + r).  None when the residual
    involves a parameter not pinned by w (caller gates those)."""
    beta = Fraction(0)
    by_id = {p.id: p for p in a.params}
    for m in a.monomials:
        if t.id not in m.support:
            continue
        term = m.coeff
        for pid in m.support:
            if pid == t.id:
                continue
            if pid not in w:
                return None
            term /= by_id[pid].value(w[pid])
        beta += term
    return beta


def _collect_routes(
    F: SetFamily, g0: Fraction, gap2: Optional[Fraction], bud: _Budget
) -> Optional[Set[Fraction]]:
    coeffs: Set[Fraction] = set()
    for a in F.atoms:
        if not isinstance(a, PolyAtom):
            continue
        for t in a.params:
            C = collapse(a, frozenset({t.id}))
            if isinstance(C, FiniteAtom):
                if g0 not in C.elements:
                    continue
                if len(a.monomials) == 1:
                    # value = base + b/(product of progression values), and the
                    # product ranges over positive integers: one pencil
                    coeffs.add(a.monomials[0].coeff)
                    continue
                return None  # several free residual monomials: gated earlier
            sols = solve_all_atom(C, g0, gap2, bud)
            if sols is None:
                return None
            for w in sols:
                beta = _route_coeff(a, t, w)
                if beta is None:
                    return None
                coeffs.add(beta)
    return coeffs


# ---------------------------------------------------------------------------
# stray absorption: exhaustive search of the window off the pencils


def _covered(offset: Fraction, coeffs: Set[Fraction]) -> bool:
    for b in coeffs:
        if b == 0:
            continue
        n = b / offset
        if n.denominator == 1 and n >= 1:
            return True
    return False


def _stray_rec(
    a: Atom,
    g0: Fraction,
    eps: Fraction,
    clip,
    coeffs: Set[Fraction],
    strays: Set[Fraction],
    gap1: Optional[Fraction],
    bud: _Budget,
) -> bool:
    wl, wh = g0 - eps, g0 + eps
    if isinstance(a, FiniteAtom):
        for e in a.elements:
            if e == g0 or not (wl < e < wh):
                continue
            if clip is not None and not (clip[0] <= e <= clip[1]):
                continue
            if not _covered(e - g0, coeffs):
                strays.add(e - g0)
        return True
    if len(a.params) == 1:
        (p,) = a.params
        b = _merged_single(a)
        if b == 0:
            return True
        if a.base == g0:
            coeffs.add(b)  # the whole tail lies on this pencil
            return True
        # base sits outside the closed window: finitely many values inside
        alo, ahi = wl - a.base, wh - a.base
        if b > 0:
            if ahi <= 0:
                return True
            vlo = b / ahi
            vhi = (b / alo) if alo > 0 else None
        else:
            if alo >= 0:
                return True
            vlo = b / alo
            vhi = (b / ahi) if ahi < 0 else None
        n = max(p.min, math.ceil((vlo - p.r) / p.q))
        while True:
            if not bud.spend():
                return False
            v = p.value(n)
            if vhi is not None and v > vhi:
                break
            val = a.base + b / v
            if wl < val < wh and val != g0:
                if clip is None or (clip[0] <= val <= clip[1]):
                    if not _covered(val - g0, coeffs):
                        strays.add(val - g0)
                        if len(strays) > _MAX_STRAYS:
                            return False
            n += 1
            if vhi is None and abs(b) / v < min(abs(alo), abs(ahi)):
                break
        return True
    t = a.params[0]
    if gap1 is None:
        # every collapse value equals g0, so all tails are registered pencils;
        # a single monomial over a progression product is one pencil
        return len(a.monomials) == 1
    n = t.min
    while True:
        if not bud.spend():
            return False
        lo, hi = pinned_bounds(a, t.id, n)
        if hi < wl or lo > wh:
            break
        if direction_tail_bound(a, t.id, n) < gap1 - eps:
            break  # beyond here the window only holds pencil values
        sub = substitute(a, t.id, n)
        sb = atom_bounds(sub)
        if sb is None or not (sb[1] < wl or sb[0] > wh):
            if not _stray_rec(sub, g0, eps, clip, coeffs, strays, gap1, bud):
                return False
        if len(strays) > _MAX_STRAYS:
            return False
        n += 1
    return True


# ---------------------------------------------------------------------------
# degeneracy analysis


def _residual_atom(a: PolyAtom, t: Parameter) -> Tuple[Fraction, Optional[PolyAtom]]:
    """The direction-t residual coefficient as a function of the kept
    parameters: returns (constant part, atom for the variable part or None)."""
    const = Fraction(0)
    monos: Dict[frozenset, Fraction] = {}
    for m in a.monomials:
        if t.id not in m.support:
            continue
        s = m.support - {t.id}
        if not s:
            const += m.coeff
        else:
            monos[s] = monos.get(s, Fraction(0)) + m.coeff
    monos = {s: c for s, c in monos.items() if c != 0}
    if not monos:
        return const, None
    used = frozenset().union(*monos.keys())
    params = tuple(sorted(p for p in a.params if p.id in used))
    atom = PolyAtom(
        const,
        tuple(sorted((Monomial(c, s) for s, c in monos.items()), key=Monomial.sort_key)),
        params,
    )
    return const, atom


def atom_nondegenerate(a: PolyAtom, bud: Optional[_Budget] = None) -> Optional[bool]:
    """True if no kept-parameter assignment annihilates any direction
    residual (so the collapse construction is exact for this atom); False
    when a harmful annihilation is confirmed; None when undecided."""
    bud = bud or _Budget(_SEARCH_NODES)
    undecided = False
    for t in a.params:
        dropped = [m for m in a.monomials if t.id in m.support]
        if len(dropped) == 1:
            continue
        signs = {m.coeff > 0 for m in dropped}
        if len(signs) == 1:
            continue
        const, ratom = _residual_atom(a, t)
        if ratom is None:
            if const != 0:
                continue
            return False  # residual identically zero
        b = atom_bounds(ratom)
        if b is not None and (b[0] > 0 or b[1] < 0):
            continue
        sols = solve_all_atom(ratom, Fraction(0), None, bud)
        if sols is None:
            undecided = True
            continue
        if not sols:
            continue
        # annihilating assignments exist: check whether each claimed limit
        # point is still reached through a non-annihilated assignment
        C = collapse(a, frozenset({t.id}))
        if isinstance(C, FiniteAtom):
            # the single claimed point is the base, and the residual is not
            # formally zero, so some assignment still converges to it
            continue
        if {p.id for p in ratom.params} != {p.id for p in C.params}:
            undecided = True
            continue
        harmful = False
        for w in sols:
            pt = C.value(w)
            alts = solve_all_atom(C, pt, None, bud)
            if alts is None:
                undecided = True
                break
            ok = False
            for w2 in alts:
                beta = _route_coeff(a, t, w2)
                if beta is not None and beta != 0:
                    ok = True
                    break
            if not ok:
                harmful = True
                break
        if harmful:
            return False
    return None if undecided else True


def family_nondegenerate(F: SetFamily, bud: Optional[_Budget] = None) -> Optional[bool]:
    result = True
    for a in F.atoms:
        if not isinstance(a, PolyAtom):
            continue
        r = atom_nondegenerate(a, bud)
        if r is False:
            return False
        if r is None:
            result = None
    return result


# ---------------------------------------------------------------------------
# standardized-near decision


@dataclass(frozen=True)
class Witness:
    """Certificate that a family is standardized near gamma0: within eps of
    gamma0 every family element lies in {gamma0 + b/n : b in coeffs}."""

    gamma0: Fraction
    eps: Fraction
    coeffs: Tuple[Fraction, ...]
    integer_i: Optional[int] = None


@dataclass(frozen=True)
class No:
    reason: str
    point: Optional[Fraction] = None


def _default_eps(F: SetFamily) -> Fraction:
    best: Optional[Fraction] = None
    for a in F.atoms:
        if not isinstance(a, PolyAtom):
            continue
        firsts = {p.id: p.first for p in a.params}
        for m in a.monomials:
            den = 1
            for pid in m.support:
                den *= firsts[pid]
            t = abs(m.coeff) / den
            if best is None or t < best:
                best = t
    return best / 2 if best is not None else Fraction(1, 2)


def _lcm_of_coeffs(coeffs) -> Optional[int]:
    nums = [abs(b.numerator) for b in coeffs if b != 0]
    if not nums:
        return 1
    return math.lcm(*nums)


def standardized_near(F: SetFamily, gamma0, cap: int = DEFAULT_CAP):
    """Decide whether F is standardized near gamma0.

    Returns a Witness, a No (gamma0 is a second-order accumulation point), or
    Unknown when exact classification is blocked by degeneracy or budget.
    """
    _require_family(F)
    g0 = rat(gamma0)
    bud = _Budget(_SEARCH_NODES)
    levels = level_families(F)[1:]  # [d^1, d^2, ...]
    L1 = levels[0] if levels else family([])
    L2 = levels[1] if len(levels) > 1 else family([])

    m2 = member(L2, g0, cap)
    if isinstance(m2, Unknown):
        return Unknown("membership in the second derived set undecided")
    if isinstance(m2, In):
        if not phantom_free(F):
            return Unknown(
                "clip may exclude the sequences witnessing the second-order point"
            )
        nd = family_nondegenerate(F, bud)
        if nd is True:
            nd1 = family_nondegenerate(L1, bud)
            if nd1 is True:
                return No(f"{g0} is a second-order accumulation point", g0)
        return Unknown("degenerate atom prevents exact level-2 classification")

    m1 = member(L1, g0, cap)
    if isinstance(m1, Unknown):
        return Unknown("membership in the derived set undecided")

    gaps = level_gaps(levels, g0, bud)
    if gaps is None:
        return Unknown("separation search budget exhausted")

    if isinstance(m1, Out):
        # isolated or exterior point: any separating radius works
        d0 = gaps[0]
        for a in F.atoms:
            ok, d = _nearest_attained(a, g0, gaps[0], bud)
            if not ok:
                return Unknown("separation search budget exhausted")
            if d is not None and (d0 is None or d < d0):
                d0 = d
        eps = d0 / 2 if d0 is not None else Fraction(1)
        coeffs = (Fraction(0),)
        return Witness(g0, eps, coeffs, 1)

    gap1, gap2 = gaps[0], gaps[1] if len(gaps) > 1 else None
    if gap1 is None or gap1 <= 0:
        gap1 = None
    routes = _collect_routes(F, g0, gap2, bud)
    if routes is None:
        return Unknown("route solving was inconclusive")
    coeffs: Set[Fraction] = set(routes)
    self_member = member(F, g0, cap)
    if not isinstance(self_member, Out):
        coeffs.add(Fraction(0))

    eps0 = gap1 / 2 if gap1 is not None else _default_eps(F)
    eps = eps0
    for _ in range(4):
        trial = set(coeffs)
        strays: Set[Fraction] = set()
        ok = True
        for a in F.atoms:
            if not _stray_rec(a, g0, eps, F.clip, trial, strays, gap1, bud):
                ok = False
                break
        if ok:
            final = set(trial)
            for d in strays:
                final.add(Fraction(d.numerator))
            out = tuple(sorted(final))
            return Witness(g0, eps, out, _lcm_of_coeffs(out))
        eps = eps / 2
        if bud.exhausted:
            break
    return Unknown("stray absorption did not stabilize")


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CertLevel:
    k: int
    family: SetFamily
    witnesses: Tuple[Witness, ...]


@dataclass(frozen=True)
class Certificate:
    verdict: str  # "standardized" | "not_standardized" | "unknown"
    depth: int
    levels: Tuple[CertLevel, ...]
    reason: str = ""
    fail_level: Optional[int] = None
    fail_point: Optional[Fraction] = None


def _finite_points(F: SetFamily) -> List[Fraction]:
    pts: Set[Fraction] = set()
    for a in F.atoms:
        if isinstance(a, FiniteAtom):
            pts.update(a.elements)
    return sorted(pts)


def certify(F: SetFamily, cap: int = DEFAULT_CAP) -> Certificate:
    """Standardization certificate: the derived filtration down to the empty
    level plus a witness at every explicitly represented accumulation point."""
    _require_family(F)
    levels = level_families(F)
    if not is_empty(levels[-1]):
        return Certificate("unknown", 0, (), "derived chain did not terminate")
    depth = len(levels) - 1
    if depth == 0:
        # empty family: empty closure
        return Certificate("standardized", 1, (CertLevel(0, levels[0], ()),))

    bud = _Budget(_SEARCH_NODES)
    for k in range(depth):
        nd = family_nondegenerate(levels[k], bud)
        if nd is False:
            return Certificate(
                "unknown", depth, (), f"degenerate atom at level {k}", k
            )
        if nd is None:
            return Certificate(
                "unknown", depth, (), f"degeneracy undecided at level {k}", k
            )

    out_levels: List[CertLevel] = []
    for k in range(depth):
        nxt = levels[k + 1]
        nn = levels[k + 2] if k + 2 < len(levels) else family([])
        wits: List[Witness] = []
        for pt in _finite_points(nxt):
            deeper = member(nn, pt, cap)
            if isinstance(deeper, Unknown):
                return Certificate(
                    "unknown", depth, (), "deep membership undecided", k, pt
                )
            if isinstance(deeper, In):
                continue  # handled at a later level
            sn = standardized_near(levels[k], pt, cap)
            if isinstance(sn, Witness):
                wits.append(sn)
            elif isinstance(sn, No):
                return Certificate(
                    "not_standardized", depth, tuple(out_levels), sn.reason, k, pt
                )
            else:
                return Certificate("unknown", depth, (), sn.reason, k, pt)
        out_levels.append(CertLevel(k, levels[k], tuple(wits)))
    return Certificate("standardized", depth, tuple(out_levels))


# ---------------------------------------------------------------------------
# chain conditions


def _group_vertex_range(
    a: PolyAtom, u: Parameter
) -> Tuple[Fraction, Fraction]:
    """Range of the direction-u residual coefficient over box vertices (each
    kept reciprocal at 0 or its maximum); multilinearity makes the vertex
    range the exact range capability over the grid closure."""
    terms = []
    firsts = {p.id: p.first for p in a.params}
    var_ids: Set[str] = set()
    for m in a.monomials:
        if u.id not in m.support:
            continue
        vs = tuple(sorted(m.support - {u.id}))
        terms.append((m.coeff, vs))
        var_ids.update(vs)
    vlist = sorted(var_ids)
    lo = hi = None
    for bits in itertools.product((0, 1), repeat=len(vlist)):
        on = {v for v, b in zip(vlist, bits) if b}
        tot = Fraction(0)
        for c, vs in terms:
            if set(vs) <= on:
                t = c
                for v in vs:
                    t /= firsts[v]
                tot += t
        if lo is None or tot < lo:
            lo = tot
        if hi is None or tot > hi:
            hi = tot
    return lo, hi


def _confirm_chain_violation(
    a: PolyAtom, u: Parameter, want_negative: bool, clip
) -> Optional[bool]:
    """Search a concrete kept assignment whose direction-u residual has the
    wanted sign and whose limit point is approachable inside the clip."""
    others = [p for p in a.params if p.id != u.id]
    idx_choices = []
    for p in others:
        big = p.min + 4096
        idx_choices.append([p.min, p.min + 1, p.min + 2, p.min + 7, big])
    C = collapse(a, frozenset({u.id}))
    for combo in itertools.product(*idx_choices):
        w = {p.id: n for p, n in zip(others, combo)}
        beta = _route_coeff(a, u, w)
        if beta is None:
            continue
        if (beta < 0) != want_negative or beta == 0:
            continue
        if isinstance(C, FiniteAtom):
            limit = C.elements[0]
        else:
            limit = C.value({pid: w[pid] for pid in (p.id for p in C.params)})
        if clip is None:
            return True
        lo, hi = clip
        if want_negative:  # increasing to the limit from below
            if lo < limit <= hi:
                return True
        else:  # decreasing to the limit from above
            if lo <= limit < hi:
                return True
    return None


def _chain_ok(F: SetFamily, ascending: bool) -> bool:
    """ascending=True checks ACC (no strictly increasing sequence)."""
    _require_family(F)
    pending = False
    for a in F.atoms:
        if not isinstance(a, PolyAtom):
            continue
        for u in a.params:
            lo, hi = _group_vertex_range(a, u)
            capable = lo < 0 if ascending else hi > 0
            if not capable:
                continue
            if F.clip is None:
                return False
            got = _confirm_chain_violation(a, u, ascending, F.clip)
            if got:
                return False
            pending = True
    if pending:
        raise UnknownResult(
            "chain-condition violation candidate could not be settled under the clip"
        )
    return True


def is_acc(F: SetFamily) -> bool:
    """True iff every increasing sequence in F stabilizes."""
    return _chain_ok(F, ascending=True)


def is_dcc(F: SetFamily) -> bool:
    """True iff every decreasing sequence in F stabilizes."""
    return _chain_ok(F, ascending=False)


# ---------------------------------------------------------------------------
# minimal positive element (used by the sum-closure constructor)


def _min_positive_atom(a: Atom, best, clip, bud: _Budget):
    if isinstance(a, FiniteAtom):
        for e in a.elements:
            if e > 0 and (clip is None or clip[0] <= e <= clip[1]):
                if best is None or e < best:
                    best = e
        return True, best
    if len(a.params) == 1:
        (p,) = a.params
        b = _merged_single(a)
        if b > 0:
            # decreasing tail base + b/v
            if a.base >= 0:
                # all values positive, infimum base never attained: the
                # family has no minimal positive element along this tail
                return False, best
            n = p.min
            while bud.spend():
                val = a.base + b / p.value(n)
                if val <= 0:
                    return True, best
                ok = clip is None or clip[0] <= val <= clip[1]
                if ok and (best is None or val < best):
                    best = val
                n += 1
            return False, best
        # b < 0: values increase to base; the first admissible one is minimal
        if a.base <= 0:
            return True, best
        n = p.min
        while bud.spend():
            val = a.base + b / p.value(n)
            if val > 0:
                if clip is not None and val > clip[1]:
                    return True, best  # increasing: never re-enters the clip
                if clip is None or clip[0] <= val:
                    if best is None or val < best:
                        best = val
                    return True, best
            n += 1
        return False, best
    t = a.params[0]
    Csub = collapse(a, frozenset({t.id}))
    okc, mu = _min_positive_atom(Csub, None, clip, bud)
    if not okc:
        return False, best
    n = t.min
    while True:
        if not bud.spend():
            return False, best
        lo, hi = pinned_bounds(a, t.id, n)
        if hi <= 0:
            break
        if best is not None and lo >= best:
            break
        r = direction_tail_bound(a, t.id, n)
        if best is not None and mu is not None and mu - r >= best:
            break
        sub = substitute(a, t.id, n)
        ok, best = _min_positive_atom(sub, best, clip, bud)
        if not ok:
            return False, best
        n += 1
    return True, best


def min_positive(F: SetFamily, cap_nodes: int = _SEARCH_NODES) -> Fraction:
    """Exact minimal positive element of a DCC family.

    Raises UnknownResult when it cannot be certified within budget or when no
    positive element exists.
    """
    _require_family(F)
    bud = _Budget(cap_nodes)
    best = None
    for a in F.atoms:
        ok, best = _min_positive_atom(a, best, F.clip, bud)
        if not ok:
            raise UnknownResult("minimal positive element search exhausted")
    if best is None:
        raise UnknownResult("family has no certified positive element")
    return best
