"""Scenario bundle (G, κ, T, α, ν) and its JSON file format.

Example file::

    {
      "name": "single-coordinate",
      "group": {"kind": "DirectSumZ2"},
      "kappa": {"atoms": [["{1}", "1"]]},
      "base": {"kind": "HaarOdometer"},
      "cocycle": {"kind": "canonical"},
      "nu": {"family": "constant", "epsilon": "ln(2)"}
    }

Weights are exact rationals (``"1/3"``) or decimals; decimals are read as
exact rationals too. ``epsilon``-type numbers may be written ``"ln(x)"``.
"""
from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .actions import (CONSTANT, DIRECT_SUM, FINITE_CYCLE, HAAR_ODOMETER, INTEGERS, TABLE,
                      BaseSystem, CocycleSpec, GroupSpec, KappaMeasure, evaluate_cocycle)
from .cantor import Deformation, GroupElement, ProductMeasureSpec
from .errors import ScenarioError, UnreachableElement


@dataclass(frozen=True)
class Scenario:
    group: GroupSpec
    kappa: KappaMeasure
    base: BaseSystem
    cocycle: CocycleSpec
    nu: ProductMeasureSpec
    name: str = ""
    description: str = ""

    def __post_init__(self):
        validate(self)

    def with_nu(self, nu: ProductMeasureSpec) -> "Scenario":
        return dataclasses.replace(self, nu=nu)


def validate(s: Scenario) -> None:
    if s.base.group != s.group:
        raise ScenarioError(f"group/base mismatch: {s.base.kind} is acted on by {s.base.group.kind}, "
                            f"scenario declares {s.group.kind}")
    c = s.cocycle
    if c.kind == TABLE and (not s.base.finite or len(c.table) != s.base.m):
        raise ScenarioError("cocycle/base mismatch: GeneratorTable needs a FiniteCycle base "
                            "with one table entry per point")
    if c.canonical and s.base.kind != HAAR_ODOMETER:
        raise ScenarioError("cocycle/base mismatch: the canonical cocycle lives on HaarOdometer")
    for g in s.kappa.enumeration:
        if not s.group.contains(g):
            raise ScenarioError(f"kappa atom {g!r} is not an element of {s.group.kind}")
    try:
        if c.kind == CONSTANT and not c.canonical:
            c.homomorphism(s.group)
        for g in s.kappa.enumeration:
            evaluate_cocycle(c, s.base, g, 0 if s.base.finite else None)
    except UnreachableElement as exc:
        raise ScenarioError(f"kappa atom unreachable by the cocycle: {exc}") from exc
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


# --------------------------------------------------------------------------
# parsing

_LN = re.compile(r"^\s*(?:ln|log)\(\s*([^)]+)\s*\)\s*$")


def parse_real(value, where: str) -> float:
    if isinstance(value, bool):
        raise ScenarioError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _LN.match(value)
        try:
            if m:
                return math.log(float(Fraction(m.group(1).strip())))
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ScenarioError(f"{where}: cannot parse {value!r} as a number") from exc
    raise ScenarioError(f"{where}: expected a number, got {value!r}")


def parse_weight(value, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ScenarioError(f"{where}: expected a weight, got {value!r}")
    try:
        if isinstance(value, (int, float, str)):
            return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ScenarioError(f"{where}: cannot parse weight {value!r} (use 'p/q' or a decimal)") from exc
    raise ScenarioError(f"{where}: expected a weight, got {value!r}")


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: expected an object")
    if key not in d:
        raise ScenarioError(f"{where}.{key}: missing field")
    return d[key]


def _element(group: GroupSpec, value, where: str):
    try:
        return group.parse(value)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _pairs(value, where: str) -> list:
    if isinstance(value, dict):
        return list(value.items())
    if isinstance(value, list) and all(isinstance(p, list) and len(p) == 2 for p in value):
        return [tuple(p) for p in value]
    raise ScenarioError(f"{where}: expected [[key, value], ...] or an object")


def scenario_from_dict(d: dict[str, Any]) -> Scenario:
    if not isinstance(d, dict):
        raise ScenarioError("scenario: top level must be an object")
    kind = _need(_need(d, "group", "scenario"), "kind", "group")
    if kind not in (INTEGERS, DIRECT_SUM):
        raise ScenarioError(f"group.kind: expected {INTEGERS} or {DIRECT_SUM}, got {kind!r}")
    group = GroupSpec(kind)

    kd = _need(d, "kappa", "scenario")
    atoms = []
    for i, pair in enumerate(_pairs(_need(kd, "atoms", "kappa"), "kappa.atoms")):
        g = _element(group, pair[0], f"kappa.atoms[{i}][0]")
        atoms.append((g, parse_weight(pair[1], f"kappa.atoms[{i}][1]")))
    if "enumeration" in kd:
        order = [_element(group, v, f"kappa.enumeration[{i}]") for i, v in enumerate(kd["enumeration"])]
        lookup = dict(atoms)
        if sorted(map(str, order)) != sorted(str(g) for g, _ in atoms) or len(set(order)) != len(order):
            raise ScenarioError("kappa.enumeration: must list every atom exactly once")
        atoms = [(g, lookup[g]) for g in order]
    try:
        kappa = KappaMeasure(tuple(atoms))
    except ValueError as exc:
        raise ScenarioError(f"kappa: {exc}") from exc

    bd = _need(d, "base", "scenario")
    bkind = _need(bd, "kind", "base")
    if bkind == FINITE_CYCLE:
        m = _need(bd, "m", "base")
        if not isinstance(m, int) or m < 1:
            raise ScenarioError("base.m: expected a positive integer")
        base = BaseSystem.finite_cycle(m)
    elif bkind == HAAR_ODOMETER:
        base = BaseSystem.haar_odometer()
    else:
        raise ScenarioError(f"base.kind: expected {FINITE_CYCLE} or {HAAR_ODOMETER}, got {bkind!r}")

    cd = _need(d, "cocycle", "scenario")
    ckind = _need(cd, "kind", "cocycle")
    proj = cd.get("projection")
    if ckind == "canonical":
        cocycle = CocycleSpec(CONSTANT, canonical=True)
    elif ckind == "identity":
        cocycle = CocycleSpec(CONSTANT)
    elif ckind == CONSTANT:
        labels = []
        for i, (g, v) in enumerate(_pairs(cd.get("table", []), "cocycle.table")):
            labels.append((_element(group, g, f"cocycle.table[{i}][0]"),
                           _element(GroupSpec(DIRECT_SUM), v, f"cocycle.table[{i}][1]")))
        cocycle = CocycleSpec(CONSTANT, labels=tuple(labels))
    elif ckind == TABLE:
        tab = _need(cd, "table", "cocycle")
        if not isinstance(tab, list):
            raise ScenarioError("cocycle.table: expected a list of group elements")
        cocycle = CocycleSpec(TABLE, table=tuple(
            _element(GroupSpec(DIRECT_SUM), v, f"cocycle.table[{i}]") for i, v in enumerate(tab)))
    else:
        raise ScenarioError(f"cocycle.kind: unknown kind {ckind!r}")
    if proj is not None:
        try:
            cocycle = dataclasses.replace(cocycle, projection=tuple(proj))
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"cocycle.projection: {exc}") from exc

    nu = nu_from_dict(_need(d, "nu", "scenario"))
    try:
        return Scenario(group, kappa, base, cocycle, nu,
                        name=str(d.get("name", "")), description=str(d.get("description", "")))
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def nu_from_dict(nd: dict) -> ProductMeasureSpec:
    fam = _need(nd, "family", "nu")
    try:
        if fam == "zero":
            spec = ProductMeasureSpec.zero()
        elif fam == "constant":
            spec = ProductMeasureSpec.constant(parse_real(_need(nd, "epsilon", "nu"), "nu.epsilon"))
        elif fam == "power":
            spec = ProductMeasureSpec.power(parse_real(_need(nd, "c", "nu"), "nu.c"),
                                            parse_real(_need(nd, "a", "nu"), "nu.a"))
        elif fam == "periodic":
            vals = _need(nd, "values", "nu")
            spec = ProductMeasureSpec.periodic(
                parse_real(v, f"nu.values[{i}]") for i, v in enumerate(vals))
        else:
            raise ScenarioError(f"nu.family: expected zero/constant/power/periodic, got {fam!r}")
        over = {}
        for i, (n, pair) in enumerate(_pairs(nd.get("overrides", []), "nu.overrides")):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ScenarioError(f"nu.overrides[{i}]: expected [p0, p1]")
            over[int(n)] = (parse_real(pair[0], f"nu.overrides[{i}][0]"),
                            parse_real(pair[1], f"nu.overrides[{i}][1]"))
        if over:
            spec = spec.with_overrides(over)
        dd = nd.get("deformation")
        if dd is not None:
            spec = dataclasses.replace(spec, deformation=Deformation(
                int(_need(dd, "n0", "nu.deformation")),
                parse_real(_need(dd, "theta", "nu.deformation"), "nu.deformation.theta")))
    except ScenarioError:
        raise
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"nu: {exc}") from exc
    return spec


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return scenario_from_dict(data)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# writing


def _weight_str(w) -> str:
    return str(w) if isinstance(w, (Fraction, int)) else repr(float(w))


def nu_to_dict(nu: ProductMeasureSpec) -> dict:
    d: dict[str, Any] = {"family": nu.family}
    if nu.family == "constant":
        d["epsilon"] = nu.epsilon
    elif nu.family == "power":
        d["c"], d["a"] = nu.c, nu.a
    elif nu.family == "periodic":
        d["values"] = list(nu.values)
    if nu.overrides:
        d["overrides"] = [[n, list(p)] for n, p in nu.overrides]
    if nu.deformation is not None:
        d["deformation"] = {"n0": nu.deformation.n0, "theta": nu.deformation.theta}
    return d


def scenario_to_dict(s: Scenario) -> dict:
    g = s.group
    c = s.cocycle
    if c.canonical:
        cd: dict[str, Any] = {"kind": "canonical"}
    elif c.kind == CONSTANT:
        cd = {"kind": CONSTANT, "table": [[g.format(k), str(v)] for k, v in c.labels]}
    else:
        cd = {"kind": TABLE, "table": [str(v) for v in c.table]}
    if c.projection is not None:
        cd["projection"] = list(c.projection)
    bd: dict[str, Any] = {"kind": s.base.kind}
    if s.base.finite:
        bd["m"] = s.base.m
    return {
        "name": s.name,
        "description": s.description,
        "group": {"kind": g.kind},
        "kappa": {"atoms": [[g.format(a), _weight_str(w)] for a, w in s.kappa.atoms]},
        "base": bd,
        "cocycle": cd,
        "nu": nu_to_dict(s.nu),
    }
