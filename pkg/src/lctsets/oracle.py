"""Brute-force ground truth: exact windowed enumeration, empirical
accumulation-point detection, and the bounded-numerator standardization
fitter.

The detector works on exact rationals.  Three consecutive sorted values of a
harmonic pencil L + b/(q*n + r) determine L exactly through the gap-ratio
extrapolation L = v1 - g1*(rho + 1)/(rho - 1) with rho = g2/g1, so pencil
tails vote for their limit with exact agreement while unrelated triples
scatter.  A candidate needs several exactly agreeing triples backed by enough
distinct sample values, which keeps spurious consensus out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .setfam import (
    FiniteAtom,
    In,
    PolyAtom,
    SetFamily,
    Unknown,
    atom_bounds,
    member,
    rat,
)
from .derived import derived_set, level_families, solve_all_atom, _Budget
from .geomsets import Generator

DETECT_THRESHOLD = 10
DETECT_MIN_VOTES = 5
DETECT_MIN_OCTAVES = 4
DETECT_MIN_CHAIN = 5
DEFAULT_NUMERATOR_BOUND = 64
DEFAULT_RESOLUTION = Fraction(1, 512)
_FULL_BOX_LIMIT = 60
_BOOST_SIDE_CAP = 12


@dataclass(frozen=True)
class Sample:
    """Sorted distinct exact values of a family inside a window."""

    values: Tuple[Fraction, ...]
    window: Tuple[Fraction, Fraction]
    cap: int
    exhaustive: bool


def _window(window) -> Tuple[Fraction, Fraction]:
    lo, hi = rat(window[0]), rat(window[1])
    if hi < lo:
        raise ValueError("window must satisfy lo <= hi")
    return lo, hi


def _atom_values_int(
    a: PolyAtom, boxes: Iterable[Tuple[range, ...]], lo: Fraction, hi: Fraction, clip
) -> Set[Tuple[int, int]]:
    """Evaluate an atom over index boxes with integer arithmetic."""
    lon, lod = lo.numerator, lo.denominator
    hin, hid = hi.numerator, hi.denominator
    if clip is not None:
        cl, ch = clip
        if cl > lo:
            lon, lod = cl.numerator, cl.denominator
        if ch < hi:
            hin, hid = ch.numerator, ch.denominator
    params = a.params
    monos = [
        (m.coeff.numerator, m.coeff.denominator, tuple(sorted(m.support)))
        for m in a.monomials
    ]
    pos = {p.id: i for i, p in enumerate(params)}
    cb_num, cb_den = a.base.numerator, a.base.denominator
    out: Set[Tuple[int, int]] = set()
    seen_idx: Set[Tuple[int, ...]] = set()
    for box in boxes:
        idx = [r.start for r in box]
        sizes = [len(r) for r in box]
        if any(s == 0 for s in sizes):
            continue
        total = 1
        for s in sizes:
            total *= s
        ranges = [list(r) for r in box]
        for flat in range(total):
            rem = flat
            for i, s in enumerate(sizes):
                idx[i] = ranges[i][rem % s]
                rem //= s
            key = tuple(idx)
            if key in seen_idx:
                continue
            seen_idx.add(key)
            vals = [p.q * n + p.r for p, n in zip(params, idx)]
            num, den = cb_num, cb_den
            for bn, bd, sup in monos:
                d = bd
                for pid in sup:
                    d *= vals[pos[pid]]
                num = num * d + bn * den
                den *= d
            # window test by cross multiplication (den > 0 always)
            if num * lod < lon * den or num * hid > hin * den:
                continue
            g = math.gcd(num, den)
            out.add((num // g, den // g))
    return out


def _atom_boxes(a: PolyAtom, cap: int) -> List[Tuple[range, ...]]:
    k = len(a.params)
    if k <= 2 or cap <= _FULL_BOX_LIMIT:
        return [tuple(range(p.min, cap + 1) for p in a.params)]
    # high-arity atoms at large caps: a full box plus one boosted range per
    # direction, so every harmonic tail is deeply populated
    boxes = [tuple(range(p.min, _FULL_BOX_LIMIT + 1) for p in a.params)]
    for j, p in enumerate(a.params):
        box = []
        for i, q in enumerate(a.params):
            if i == j:
                box.append(range(q.min, cap + 1))
            else:
                box.append(range(q.min, min(cap, q.min + _BOOST_SIDE_CAP) + 1))
        boxes.append(tuple(box))
    return boxes


def _atom_exhaustive(a: PolyAtom, cap: int, lo: Fraction, hi: Fraction) -> bool:
    """True when every assignment with some index beyond cap provably falls
    outside [lo, hi]."""
    if len(a.params) > 2 and cap > _FULL_BOX_LIMIT:
        return False  # boosted boxes do not cover the full cap box
    firsts = {p.id: p.first for p in a.params}
    for t in a.params:
        vals = dict(firsts)
        vals[t.id] = t.value(cap + 1)
        blo = bhi = a.base
        for m in a.monomials:
            den = 1
            for pid in m.support:
                den *= vals[pid]
            term = abs(m.coeff) / den
            if m.coeff > 0:
                bhi += term
            else:
                blo -= term
        if not (bhi < lo or blo > hi):
            return False
    return True


def enumerate_family(src, window, cap: int) -> Sample:
    """Exact, deduplicated, sorted values of a family or generator inside a
    closed window; the exhaustive flag is set only when derivable pruning
    bounds prove the cap covers the window."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    lo, hi = _window(window)
    if isinstance(src, Generator):
        vals = tuple(src.values((lo, hi), cap))
        return Sample(vals, (lo, hi), cap, False)
    if not isinstance(src, SetFamily):
        raise TypeError("enumerate needs a SetFamily or a Generator")
    acc: Set[Tuple[int, int]] = set()
    exhaustive = True
    for a in src.atoms:
        if isinstance(a, FiniteAtom):
            for e in a.elements:
                if lo <= e <= hi:
                    acc.add((e.numerator, e.denominator))
            continue
        acc |= _atom_values_int(a, _atom_boxes(a, cap), lo, hi, src.clip)
        if not _atom_exhaustive(a, cap, lo, hi):
            exhaustive = False
    fracs = [Fraction(n, d) for n, d in acc]
    fracs.sort(key=float)
    # exact fix-up of any float ties
    for i in range(1, len(fracs)):
        if fracs[i - 1] > fracs[i]:
            fracs.sort()
            break
    return Sample(tuple(fracs), (lo, hi), cap, exhaustive)


# ---------------------------------------------------------------------------
# accumulation detection


@dataclass(frozen=True)
class Cluster:
    """Candidate accumulation interval (never asserted as an exact point)."""

    lo: Fraction
    hi: Fraction
    center: Fraction
    votes: int
    support: int

    def contains(self, x) -> bool:
        x = rat(x)
        return self.lo <= x <= self.hi


def _aitken(v1: Fraction, v2: Fraction, v3: Fraction) -> Optional[Fraction]:
    g1, g2 = v2 - v1, v3 - v2
    if g1 <= 0 or g2 <= 0 or g1 == g2:
        return None
    if g2 > g1:  # gaps grow away from a limit below v1
        rho = g2 / g1
        return v1 - g1 * (rho + 1) / (rho - 1)
    rho = g1 / g2  # gaps shrink toward a limit above v3
    return v3 + g2 * (rho + 1) / (rho - 1)


def detect_accumulation(
    s: Sample,
    resolution=DEFAULT_RESOLUTION,
    threshold: int = DETECT_THRESHOLD,
    min_votes: int = DETECT_MIN_VOTES,
    min_octaves: int = DETECT_MIN_OCTAVES,
    min_chain: int = DETECT_MIN_CHAIN,
) -> List[Cluster]:
    """Empirical accumulation candidates from exact gap-ratio consensus.

    Every three consecutive distinct values cast a vote for the limit they
    would have as a harmonic pencil; a candidate needs `min_votes` exactly
    agreeing votes supported by at least `threshold` distinct values whose
    offsets from the candidate span at least `min_octaves` binary scales,
    including `min_chain` votes at consecutive sorted positions.  A genuine
    tail eventually owns the neighborhood of its limit, which produces long
    consecutive runs on one pencil; mediant-line coincidences stay
    interleaved and short, so these gates keep them out.
    """
    resolution = rat(resolution)
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    vals = s.values
    if len(vals) < 3:
        return []
    floats = [float(v) for v in vals]
    buckets: Dict[int, List[int]] = {}
    scale = 8 / float(resolution)
    for i in range(len(vals) - 2):
        g1 = floats[i + 1] - floats[i]
        g2 = floats[i + 2] - floats[i + 1]
        if g1 <= 0 or g2 <= 0:
            continue
        ratio = g2 / g1
        if 0.999999 <= ratio <= 1.000001:
            continue
        if ratio > 1:
            lf = floats[i] - g1 * (ratio + 1) / (ratio - 1)
        else:
            rho = 1 / ratio
            lf = floats[i + 2] + g2 * (rho + 1) / (rho - 1)
        if not (floats[0] - 2 * float(resolution) - 1 <= lf <= floats[-1] + 2 * float(resolution) + 1):
            continue
        buckets.setdefault(round(lf * scale), []).append(i)
    exact_votes: Dict[Fraction, Set[int]] = {}
    seen_keys = set(buckets)
    for key, idxs in buckets.items():
        # merge neighbor buckets so borderline float rounding cannot split votes
        group = list(idxs)
        for nb in (key - 1, key + 1):
            if nb in seen_keys and nb in buckets:
                group += buckets[nb]
        if len(set(group)) < min_votes:
            continue
        for i in set(group):
            L = _aitken(vals[i], vals[i + 1], vals[i + 2])
            if L is None:
                continue
            exact_votes.setdefault(L, set()).add(i)
    out: List[Cluster] = []
    used: Set[Fraction] = set()
    for L in sorted(exact_votes, key=lambda x: (-len(exact_votes[x]), x)):
        idxs = exact_votes[L]
        if len(idxs) < min_votes:
            continue
        support = set()
        for i in idxs:
            support.update((vals[i], vals[i + 1], vals[i + 2]))
        if len(support) < threshold:
            continue
        octaves = set()
        reach = Fraction(0)
        for v in support:
            d = abs(v - L)
            if d > reach:
                reach = d
            off = float(d)
            if off > 0:
                octaves.add(math.floor(math.log2(off)))
        if len(octaves) < min_octaves:
            continue
        if reach < 4 * resolution:
            continue  # all evidence below the resolving power: no tail
        run = best_run = 1
        prev = None
        for i in sorted(idxs):
            run = run + 1 if prev is not None and i == prev + 1 else 1
            best_run = max(best_run, run)
            prev = i
        if best_run < min_chain:
            continue
        if any(abs(L - u) <= resolution for u in used):
            continue
        used.add(L)
        half = resolution / 2
        out.append(Cluster(L - half, L + half, L, len(idxs), len(support)))
    out.sort(key=lambda c: c.center)
    return out


# ---------------------------------------------------------------------------
# bounded-numerator standardization fitter


@dataclass(frozen=True)
class FitReport:
    gamma0: Fraction
    numerators: Tuple[int, ...]
    verdict: str  # "consistent" | "inconsistent" | "insufficient"
    integer_i: Optional[int] = None
    coeffs: Tuple[int, ...] = ()
    evidence: Optional[Fraction] = None


def fit_standardized(
    s: Sample, gamma0, numerator_bound: int = DEFAULT_NUMERATOR_BOUND
) -> FitReport:
    """Finite-scale falsifier for the bounded-numerator picture near gamma0.

    Offsets of sampled values from gamma0 are reduced exactly; bounded
    numerators are consistent with finitely many harmonic pencils, while
    numerator growth as the values approach gamma0 refutes it.  A consistent
    report is a non-refutation at this sample size, not a theorem.
    """
    if numerator_bound < 1:
        raise ValueError("numerator bound must be >= 1")
    g0 = rat(gamma0)
    offsets = [(v - g0) for v in s.values if v != g0]
    if len([v for v in s.values if s.window[0] <= v <= s.window[1]]) < 5:
        return FitReport(g0, (), "insufficient")
    nums = sorted({o.numerator for o in offsets})
    too_big = [o for o in offsets if abs(o.numerator) > numerator_bound]
    if too_big:
        evidence = min(too_big, key=lambda o: abs(o))
        return FitReport(
            g0, tuple(nums), "inconsistent", evidence=g0 + evidence
        )
    coeffs = tuple(sorted({abs(n) for n in nums if n != 0})) or (1,)
    integer_i = math.lcm(*coeffs)
    # soundness re-check: every sampled offset must equal I*s/n exactly
    for o in offsets:
        n = integer_i * o.denominator
        if n % abs(o.numerator) != 0:
            return FitReport(g0, tuple(nums), "inconsistent", evidence=g0 + o)
    return FitReport(g0, tuple(nums), "consistent", integer_i, coeffs)


# ---------------------------------------------------------------------------
# symbolic-vs-empirical derived-set cross check


@dataclass(frozen=True)
class CrossCheckReport:
    matched: Tuple[Fraction, ...]
    empirical_only: Tuple[Fraction, ...]
    symbolic_only: Tuple[Tuple[Fraction, str], ...]  # (point, explanation)

    @property
    def clean(self) -> bool:
        return not self.empirical_only and all(
            why for _, why in self.symbolic_only
        )

    @property
    def unexplained_symbolic(self) -> Tuple[Fraction, ...]:
        return tuple(p for p, why in self.symbolic_only if not why)


def _excuse_for(
    F: SetFamily,
    pt: Fraction,
    neighbors: List[Fraction],
    cap: int,
    threshold: int,
    window: Tuple[Fraction, Fraction],
    resolution: Fraction,
) -> str:
    """Why a symbolic derived point may legitimately lack an empirical
    cluster at this cap (empty string = unexplained)."""
    if min(pt - window[0], window[1] - pt) < 4 * resolution:
        return "within the detector's reach of the window edge"
    second = derived_set(F, 2)
    v = member(second, pt, 2000)
    if isinstance(v, In):
        return "second-order point: first-order clusters are confounded"
    if isinstance(v, Unknown):
        return "second-order membership undecided"
    sep = None
    for q in neighbors:
        if q != pt:
            d = abs(q - pt)
            if sep is None or d < sep:
                sep = d
    if sep is None:
        return ""
    # a clean pencil run of threshold+2 values needs indices of order
    # beta/sep; report the estimate when it exceeds the cap
    beta_max = Fraction(0)
    for a in F.atoms:
        if not isinstance(a, PolyAtom):
            continue
        for m in a.monomials:
            if abs(m.coeff) > beta_max:
                beta_max = abs(m.coeff)
    if beta_max == 0:
        return ""
    est = math.ceil(2 * (threshold + 2) * beta_max / sep)
    if est > cap:
        return f"cap too small to populate the cluster (needs about {est})"
    return ""


def cross_check_derived(
    F: SetFamily,
    window,
    cap: int,
    resolution=DEFAULT_RESOLUTION,
    symbolic_cap: Optional[int] = None,
    threshold: int = DETECT_THRESHOLD,
) -> CrossCheckReport:
    """Compare symbolic first-derived points inside the window with the
    empirical clusters of an enumeration at `cap`."""
    if not isinstance(F, SetFamily):
        raise TypeError("cross check needs a symbolic family")
    lo, hi = _window(window)
    resolution = rat(resolution)
    d1 = derived_set(F, 1)
    scap = symbolic_cap if symbolic_cap is not None else max(8, cap // 25)
    sym = enumerate_family(d1, (lo, hi), scap).values
    emp = enumerate_family(F, (lo, hi), cap)
    clusters = detect_accumulation(emp, resolution, threshold=threshold)
    tol = Fraction(1, 10_000)
    matched: List[Fraction] = []
    symbolic_only: List[Tuple[Fraction, str]] = []
    used_clusters: Set[int] = set()
    for pt in sym:
        hit = None
        for j, c in enumerate(clusters):
            if c.lo - tol <= pt <= c.hi + tol:
                hit = j
                break
        if hit is None:
            why = _excuse_for(F, pt, list(sym), cap, threshold, (lo, hi), resolution)
            symbolic_only.append((pt, why))
        else:
            used_clusters.add(hit)
            matched.append(pt)
    empirical_only = [
        c.center for j, c in enumerate(clusters) if j not in used_clusters
    ]
    return CrossCheckReport(tuple(matched), tuple(empirical_only), tuple(symbolic_only))
