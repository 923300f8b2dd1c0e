"""Concrete threshold families: diagonal-polynomial thresholds, the planar
threshold set and its branch pencils, threefold-threshold branches, surface
and terminal-threefold discrepancy branches, the guessed interval family
above 5/6, and the K-moduli wall list.

Branch constructors assert their defining rational identity at build time so
a transcription slip fails immediately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple

from .setfam import (
    FiniteAtom,
    Monomial,
    Parameter,
    PolyAtom,
    SetFamily,
    family,
    finite,
    rat,
)

Window = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Generator:
    """Enumeration-only set: exposes bounded exact enumeration but no
    symbolic derived-set operator."""

    kind: str
    enumerate_values: Callable[[Window, int], List[Fraction]]

    def values(self, window, cap: int) -> List[Fraction]:
        lo, hi = rat(window[0]), rat(window[1])
        if hi < lo:
            return []
        return self.enumerate_values((lo, hi), cap)


def diag_lct(d: int) -> SetFamily:
    """Thresholds of d-variable diagonal polynomials: {sum 1/c_i} in [0, 1]."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    params = tuple(Parameter(f"c{i + 1}") for i in range(d))
    monos = tuple(Monomial(Fraction(1), frozenset({p.id})) for p in params)
    atom = PolyAtom(Fraction(0), monos, params)
    return family([atom], (Fraction(0), Fraction(1)))


def ht1() -> SetFamily:
    """Thresholds on the line: {1/k} together with {0}."""
    atom = PolyAtom(Fraction(0), (Monomial(Fraction(1), frozenset({"k"})),), (Parameter("k"),))
    return family([atom, finite([0])])


def ct2() -> SetFamily:
    """Surface canonical thresholds: {1/n} together with {0}."""
    return ht1()


def _ht2_value(a1: int, a2: int, c1: int, c2: int) -> Optional[Fraction]:
    den = c1 * c2 + a1 * c2 + a2 * c1
    if den <= 0:
        return None
    return Fraction(c1 + c2, den)


def _ht2_admissible(a1: int, a2: int, c1: int, c2: int) -> bool:
    return a1 + c1 >= max(2, a2) and a2 + c2 >= max(2, a1)


def _ht2_enumerate(window: Window, cap: int) -> List[Fraction]:
    lo, hi = window
    vals = set()
    for a1 in range(cap + 1):
        for a2 in range(cap + 1):
            for c1 in range(cap + 1):
                if a1 + c1 < max(2, a2):
                    continue
                # value <= 1/c1 + 1/c2 and <= (c1+c2)/(a1 c2 + a2 c1):
                # once even the c2-limit 1/(c1 + a1) falls below lo, larger
                # c1 cannot reach the window for this (a1, a2)
                for c2 in range(cap + 1):
                    if a2 + c2 < max(2, a1):
                        continue
                    v = _ht2_value(a1, a2, c1, c2)
                    if v is None:
                        continue
                    if lo <= v <= hi:
                        vals.add(v)
                if c1 > 0 and a2 > 0 and Fraction(c1 + cap, a2 * c1) < lo:
                    break
    return sorted(vals)


def ht2() -> Generator:
    """Planar threshold set (a1, a2, c1, c2 >= 0 with the two side
    constraints); zero denominators are excluded."""
    return Generator("HT2", _ht2_enumerate)


def ht2_branch(a1: int, a2: int, c2: int) -> SetFamily:
    """One-parameter pencil of planar thresholds with c1 running:
    {1/k + (c2 (k - a1) / k) / (k c1 + a1 c2)} where k = a2 + c2."""
    if min(a1, a2, c2) < 0:
        raise ValueError("branch data must be nonnegative integers")
    k = a2 + c2
    if k < 1:
        raise ValueError("branch needs a2 + c2 >= 1")
    if a1 > k:
        raise ValueError("branch normal form needs a1 <= k")
    coeff = Fraction(c2 * (k - a1), k)
    # identity check at the smallest admissible running value
    for c1 in (1, 2):
        lhs = _ht2_value(a1, a2, c1, c2)
        rhs = Fraction(1, k) + coeff / (k * c1 + a1 * c2)
        assert lhs == rhs, "branch identity failed"
    if coeff == 0:
        return family([finite([Fraction(1, k)])])
    p = Parameter("c1", min=1, q=k, r=a1 * c2)
    atom = PolyAtom(Fraction(1, k), (Monomial(coeff, frozenset({p.id})),), (p,))
    return family([atom])


def ct3_branch(k: int, iprime: int) -> SetFamily:
    """Threefold canonical-threshold pencil {1/k + I'/(k(ka - I'))} over
    integers a with ka - I' >= 1."""
    if k <= 1:
        raise ValueError("branch needs k >= 2")
    if iprime < 1:
        raise ValueError("branch needs a positive integer I'")
    a_min = (iprime + 1 + k - 1) // k  # smallest a with k*a - I' >= 1
    # identity a/(ka - I') = 1/k + I'/(k(ka - I')) at the smallest value
    a = a_min
    assert Fraction(a, k * a - iprime) == Fraction(1, k) + Fraction(
        iprime, k * (k * a - iprime)
    ), "threshold identity failed"
    # denominator progression k(ka - I') = k^2 * a - k*I', a >= a_min
    q = k * k
    first = q * a_min - k * iprime
    n_min, r = divmod(first, q)
    p = Parameter("a", min=n_min, q=q, r=r)
    atom = PolyAtom(Fraction(1, k), (Monomial(Fraction(iprime), frozenset({p.id})),), (p,))
    return family([atom])


def mld2_branch(alpha, beta, delta) -> SetFamily:
    """Surface-discrepancy pencil {(alpha A + beta)/(A + delta)} over
    integers A >= 1, rewritten as alpha + (beta - alpha delta)/(A + delta)."""
    alpha, beta, delta = rat(alpha), rat(beta), rat(delta)
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if beta <= 0:
        raise ValueError("beta must be positive")
    top = beta - alpha * delta
    # clear delta's denominator into the progression: A + p/q = (qA + p)/q
    qd, pd = delta.denominator, delta.numerator
    for A in (1, 2):
        assert (alpha * A + beta) / (A + delta) == alpha + top / (A + delta)
    if top == 0:
        return family([finite([alpha])])
    p = Parameter("A", min=1, q=qd, r=pd)
    atom = PolyAtom(alpha, (Monomial(top * qd, frozenset({p.id})),), (p,))
    return family([atom])


def mld3_terminal_branch(gamma) -> SetFamily:
    """Terminal threefold-discrepancy pencil {1 + gamma/I} over I >= 1."""
    gamma = rat(gamma)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    p = Parameter("I")
    atom = PolyAtom(Fraction(1), (Monomial(gamma, frozenset({p.id})),), (p,))
    return family([atom])


def gamma16() -> SetFamily:
    """The guessed decomposition tail above 5/6:
    {(5n + m)/(6n + m) : 1 <= m <= 5} together with {12/13}."""
    atoms = []
    for m in range(1, 6):
        # (5n+m)/(6n+m) = 5/6 + m/(36n + 6m)
        assert Fraction(5 + m, 6 + m) == Fraction(5, 6) + Fraction(m, 36 + 6 * m)
        p = Parameter(f"n{m}", min=1, q=36, r=6 * m)
        atoms.append(
            PolyAtom(Fraction(5, 6), (Monomial(Fraction(m), frozenset({p.id})),), (p,))
        )
    atoms.append(finite([Fraction(12, 13)]))
    return family(atoms)


KMODULI_WALL_INDICES = (6, 8, 10, 12, 13, 14, 16, 18, 22)


def kmoduli_walls() -> SetFamily:
    """The K-moduli wall list {1 - 4/n} over the nine published indices."""
    return family([finite(Fraction(n - 4, n) for n in KMODULI_WALL_INDICES)])


def dc_generator(F: SetFamily, c) -> Generator:
    """Enumeration-only set {(m - 1 + g + k c)/m : m, k >= 1, g enumerated
    from F} intersected with [0, 1]; the ratio part is dense, so there is no
    symbolic atom form."""
    c = rat(c)
    if c <= 0:
        raise ValueError("c must be positive")
    if not isinstance(F, SetFamily):
        raise TypeError("the source of the shifted-boundary set must be symbolic")

    def _enum(window: Window, cap: int) -> List[Fraction]:
        from .oracle import enumerate_family

        lo, hi = window
        lo = max(lo, Fraction(0))
        hi = min(hi, Fraction(1))
        if hi < lo:
            return []
        gs = enumerate_family(F, (Fraction(0), Fraction(1)), cap).values
        vals = set()
        for m in range(1, cap + 1):
            for k in range(1, cap + 1):
                for g in gs:
                    v = (Fraction(m - 1) + g + k * c) / m
                    if lo <= v <= hi:
                        vals.add(v)
        return sorted(vals)

    return Generator("Dc", _enum)
