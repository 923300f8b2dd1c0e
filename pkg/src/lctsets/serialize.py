"""Bit-exact JSON/CSV codecs.  Rationals always serialize as strings so no
binary float ever enters a data path."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import List, Optional

from .setfam import (
    Atom,
    FiniteAtom,
    Monomial,
    Parameter,
    PolyAtom,
    SetFamily,
    family,
    rat,
)
from .derived import Certificate, Witness
from .oracle import FitReport, Sample


def rat_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _atom_obj(a: Atom) -> dict:
    if isinstance(a, FiniteAtom):
        return {"elements": [rat_str(e) for e in a.elements]}
    return {
        "base": rat_str(a.base),
        "monomials": [
            {"coeff": rat_str(m.coeff), "support": sorted(m.support)}
            for m in a.monomials
        ],
        "params": [
            {"id": p.id, "min": p.min, "q": p.q, "r": p.r} for p in a.params
        ],
    }


def family_to_obj(F: SetFamily) -> dict:
    obj: dict = {"atoms": [_atom_obj(a) for a in F.atoms]}
    obj["clip"] = None if F.clip is None else [rat_str(F.clip[0]), rat_str(F.clip[1])]
    return obj


def family_from_obj(obj: dict) -> SetFamily:
    atoms: List[Atom] = []
    for ao in obj["atoms"]:
        if "elements" in ao:
            atoms.append(FiniteAtom(tuple(sorted(rat(e) for e in ao["elements"]))))
            continue
        monos = tuple(
            Monomial(rat(m["coeff"]), frozenset(m["support"]))
            for m in ao["monomials"]
        )
        params = tuple(
            Parameter(p["id"], p["min"], p["q"], p["r"]) for p in ao["params"]
        )
        atoms.append(PolyAtom(rat(ao["base"]), monos, params))
    clip = obj.get("clip")
    if clip is not None:
        clip = (rat(clip[0]), rat(clip[1]))
    return family(atoms, clip)


def witness_to_obj(w: Witness) -> dict:
    obj = {
        "gamma0": rat_str(w.gamma0),
        "eps": rat_str(w.eps),
        "coeffs": [rat_str(b) for b in w.coeffs],
    }
    if w.integer_i is not None:
        obj["I"] = w.integer_i
    return obj


def certificate_to_obj(c: Certificate) -> dict:
    obj: dict = {
        "verdict": c.verdict,
        "depth": c.depth,
        "levels": [
            {
                "k": lv.k,
                "family": family_to_obj(lv.family),
                "witnesses": [witness_to_obj(w) for w in lv.witnesses],
            }
            for lv in c.levels
        ],
    }
    if c.reason:
        obj["reason"] = c.reason
    if c.fail_level is not None:
        obj["level"] = c.fail_level
    if c.fail_point is not None:
        obj["point"] = rat_str(c.fail_point)
    return obj


def sample_to_obj(s: Sample) -> dict:
    return {
        "values": [rat_str(v) for v in s.values],
        "window": [rat_str(s.window[0]), rat_str(s.window[1])],
        "cap": s.cap,
        "exhaustive": s.exhaustive,
    }


def fit_to_obj(r: FitReport) -> dict:
    obj: dict = {"gamma0": rat_str(r.gamma0), "verdict": r.verdict}
    if r.verdict == "consistent":
        obj["I"] = r.integer_i
        obj["coeffs"] = list(r.coeffs)
    if r.evidence is not None:
        obj["evidence"] = rat_str(r.evidence)
    obj["numerators"] = list(r.numerators)
    return obj


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False)


def sample_to_csv(s: Sample) -> str:
    return "".join(rat_str(v) + "\n" for v in s.values)
