"""
Table de bornes sur H(I, J) et Y(I, J) avec provenance.

Chaque amélioration d'une borne est enregistrée comme une RuleApplication
qui référence les applications dont elle dépend ; la table forme ainsi un
graphe acyclique. Les applications constructives peuvent être rejouées par
materialize_witness pour produire un système qui atteint la borne.

Règles, appliquées dans cet ordre jusqu'au point fixe :
  R1  H(a+b, J) <= H(a, J) + H(b, J)
  R2  H(a+b, J) <= H(a, J) + H(b, J-1) + b        (si H(a, J) >= H(b, J-1))
  R3  H(2a, J) <= 2 H(a, J-1) + 2a
  R5  H(2, J-1) <= H(1, J) + 1
  R6  H(I, J) = IJ par composition de cellules régulières ou presque
  R4w insertion dans le plus grand trou réel d'un témoin
  R4  insertion dans un trou, largeur plancher ceil((H - aJ) / (aJ - 1))
  R8  monotonie (retrait d'une règle ou des marques maximales)
  R7  Y >= H, Y(I+1, J) <= Y(I, J) + J, Y(1, J) <= H(1, 5J), Y croissant en I
"""

import copy
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.utils.known_values import prime_power_facts, trivial_h, trivial_y

from .constructions import (
    concat_compose,
    gap_double,
    gap_merge,
    shift_pair,
    singer_ruler,
    thm3_double,
    thm3_extend,
)
from .core import DgrSystem, Ruler, find_gaps, largest_gap, regular_system, translate, verify_dgr
from .exceptions import (
    BoundsContradictionError,
    ConstructionError,
    DgrError,
    FieldError,
    MissingWitnessError,
    NonConstructiveChainError,
)
from .formats import FORMAT_VERSION
from .search import SearchConfig, SearchStatus, exists_dgr_in, min_n
from .witness_store import WitnessStore

logger = logging.getLogger(__name__)

Key = Tuple[int, int]


class RuleId(Enum):
    SEARCH = "search"
    TRIVIAL = "trivial"
    SINGER = "singer"
    PRIME_POWER = "prime-power"
    R1_CONCAT = "R1"
    R2_EXTEND = "R2"
    R3_DOUBLE = "R3"
    R4_GAP_FLOOR = "R4"
    R4_GAP_WITNESS = "R4w"
    R5_SHIFT = "R5"
    R6_REGULAR = "R6"
    R7_Y = "R7"
    R8_MONOTONE = "R8"
    FALSIFIER = "falsifier"


# applications dont le témoin est fourni de l'extérieur, jamais recalculé
SEED_RULES = {RuleId.SEARCH, RuleId.TRIVIAL, RuleId.SINGER}


class BoundKind(Enum):
    H_LOWER = "h_lower"
    H_UPPER = "h_upper"
    Y_LOWER = "y_lower"
    Y_UPPER = "y_upper"

    @property
    def is_upper(self) -> bool:
        return self in (BoundKind.H_UPPER, BoundKind.Y_UPPER)

    @property
    def symbol(self) -> str:
        return "<=" if self.is_upper else ">="

    @property
    def quantity(self) -> str:
        return "H" if self in (BoundKind.H_LOWER, BoundKind.H_UPPER) else "Y"


@dataclass(frozen=True)
class RuleApplication:
    app_id: int
    rule: RuleId
    target: Key
    kind: BoundKind
    value: int
    antecedents: Tuple[Key, ...] = ()
    sources: Tuple[int, ...] = ()
    constructive: bool = False
    params: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)
    witness_ref: Optional[str] = None

    def describe(self) -> str:
        quantity = self.kind.quantity
        text = f"#{self.app_id} {self.rule.value}: {quantity}{self.target} {self.kind.symbol} {self.value}"
        if self.antecedents:
            text += " depuis " + ", ".join(str(k) for k in self.antecedents)
        if self.params:
            text += " " + json.dumps(self.params, sort_keys=True)
        if not self.constructive and self.kind is BoundKind.H_UPPER:
            text += " [non constructif]"
        return text

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.app_id,
            "rule": self.rule.value,
            "target": list(self.target),
            "kind": self.kind.value,
            "value": self.value,
            "antecedents": [list(k) for k in self.antecedents],
            "sources": list(self.sources),
            "constructive": self.constructive,
            "params": dict(self.params),
            "witness_ref": self.witness_ref,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RuleApplication":
        return cls(
            app_id=int(data["id"]),
            rule=RuleId(data["rule"]),
            target=tuple(data["target"]),
            kind=BoundKind(data["kind"]),
            value=int(data["value"]),
            antecedents=tuple(tuple(k) for k in data.get("antecedents", [])),
            sources=tuple(int(s) for s in data.get("sources", [])),
            constructive=bool(data.get("constructive", False)),
            params=dict(data.get("params", {})),
            witness_ref=data.get("witness_ref"),
        )


@dataclass
class BoundCell:
    """
    Bornes sur H(i, j) et Y(i, j).

    h_upper et y_upper valent None tant qu'aucune règle ne les fixe ;
    h_lower part de i * j.
    """

    i: int
    j: int
    h_lower: int
    h_upper: Optional[int] = None
    y_lower: Optional[int] = None
    y_upper: Optional[int] = None
    provenance: List[int] = field(default_factory=list)
    lower_source: Optional[int] = None
    upper_source: Optional[int] = None
    y_lower_source: Optional[int] = None
    y_upper_source: Optional[int] = None
    annotations: List[str] = field(default_factory=list)

    @property
    def key(self) -> Key:
        return (self.i, self.j)

    @property
    def exact(self) -> bool:
        return self.h_upper is not None and self.h_lower == self.h_upper

    @property
    def regular(self) -> bool:
        return self.exact and self.h_upper == self.i * self.j

    def value(self, kind: BoundKind) -> Optional[int]:
        return getattr(self, kind.value)

    def source(self, kind: BoundKind) -> Optional[int]:
        return getattr(self, {
            BoundKind.H_LOWER: "lower_source",
            BoundKind.H_UPPER: "upper_source",
            BoundKind.Y_LOWER: "y_lower_source",
            BoundKind.Y_UPPER: "y_upper_source",
        }[kind])

    def _set(self, kind: BoundKind, value: int, app_id: int) -> None:
        setattr(self, kind.value, value)
        setattr(self, {
            BoundKind.H_LOWER: "lower_source",
            BoundKind.H_UPPER: "upper_source",
            BoundKind.Y_LOWER: "y_lower_source",
            BoundKind.Y_UPPER: "y_upper_source",
        }[kind], app_id)


@dataclass(frozen=True)
class ExactSeed:
    """Valeur exacte prouvée par la recherche, avec son témoin."""

    i: int
    j: int
    value: int
    witness: DgrSystem


@dataclass(frozen=True)
class Candidate:
    """Borne proposée par une règle pour une cellule."""

    value: int
    antecedents: Tuple[Key, ...]
    sources: Tuple[int, ...]
    constructive: bool
    params: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)
    witness: Optional[DgrSystem] = None


class BoundsTable:
    """Table des cellules (i, j) pour 1 <= i <= max_i, 1 <= j <= max_j."""

    def __init__(self, max_i: int, max_j: int):
        if max_i < 1 or max_j < 1:
            raise ValueError("max_i et max_j doivent être >= 1")
        self.max_i = max_i
        self.max_j = max_j
        self.cells: Dict[Key, BoundCell] = {
            (i, j): BoundCell(i, j, h_lower=i * j)
            for i in range(1, max_i + 1)
            for j in range(1, max_j + 1)
        }
        self.applications: Dict[int, RuleApplication] = {}
        self.witnesses: Dict[int, DgrSystem] = {}

    def keys(self) -> List[Key]:
        return sorted(self.cells)

    def get(self, i: int, j: int) -> Optional[BoundCell]:
        return self.cells.get((i, j))

    def cell(self, i: int, j: int) -> BoundCell:
        found = self.get(i, j)
        if found is None:
            raise KeyError(f"cellule ({i}, {j}) hors de la table {self.max_i}x{self.max_j}")
        return found

    def upper(self, i: int, j: int) -> Optional[int]:
        c = self.get(i, j)
        return None if c is None else c.h_upper

    def upper_app(self, i: int, j: int) -> Optional[RuleApplication]:
        c = self.get(i, j)
        if c is None or c.upper_source is None:
            return None
        return self.applications[c.upper_source]

    def copy(self) -> "BoundsTable":
        return copy.deepcopy(self)

    def exact_values(self) -> Dict[Key, int]:
        return {k: c.h_upper for k, c in sorted(self.cells.items()) if c.exact}

    def chain(self, app_id: Optional[int]) -> List[str]:
        """Descriptions de l'application et de ses ancêtres, ancêtres d'abord."""
        if app_id is None:
            return []
        ordered: List[int] = []
        seen = set()

        def visit(current: int) -> None:
            if current in seen:
                return
            seen.add(current)
            for src in self.applications[current].sources:
                visit(src)
            ordered.append(current)

        visit(app_id)
        return [self.applications[a].describe() for a in ordered]

    def _lower_chain(self, c: BoundCell, kind: BoundKind) -> List[str]:
        source = c.source(kind)
        if source is None and kind is BoundKind.H_LOWER:
            return [f"I*J = {c.i * c.j}"]
        return self.chain(source)

    def record(
        self,
        rule: RuleId,
        target: Key,
        kind: BoundKind,
        value: int,
        antecedents: Sequence[Key] = (),
        sources: Sequence[int] = (),
        constructive: bool = False,
        params: Optional[Dict[str, Any]] = None,
        witness: Optional[DgrSystem] = None,
        always: bool = False,
    ) -> Optional[RuleApplication]:
        """
        Enregistre une borne si elle améliore strictement la cellule.

        Args:
            always: Ajoute l'application à la provenance même sans amélioration

        Returns:
            L'application créée, ou None si rien n'a été enregistré

        Raises:
            BoundsContradictionError: borne supérieure < borne inférieure
        """
        c = self.cell(*target)
        current = c.value(kind)
        improves = current is None or (value < current if kind.is_upper else value > current)
        if not improves and not always:
            return None
        app = RuleApplication(
            app_id=len(self.applications) + 1,
            rule=rule,
            target=tuple(target),
            kind=kind,
            value=value,
            antecedents=tuple(tuple(k) for k in antecedents),
            sources=tuple(sources),
            constructive=constructive,
            params=dict(params or {}),
        )
        self.applications[app.app_id] = app
        if witness is not None:
            self.witnesses[app.app_id] = witness
        c.provenance.append(app.app_id)
        if improves:
            c._set(kind, value, app.app_id)
            logger.debug("%s", app.describe())
            self._check(c)
        return app

    def _check(self, c: BoundCell) -> None:
        if c.h_upper is not None and c.h_upper < c.h_lower:
            error = BoundsContradictionError(
                c.key, c.h_lower, c.h_upper,
                self._lower_chain(c, BoundKind.H_LOWER), self.chain(c.upper_source),
            )
            logger.error("%s", error.dump())
            raise error
        if c.y_upper is not None and c.y_lower is not None and c.y_upper < c.y_lower:
            error = BoundsContradictionError(
                c.key, c.y_lower, c.y_upper,
                self.chain(c.y_lower_source), self.chain(c.y_upper_source), quantity="Y",
            )
            logger.error("%s", error.dump())
            raise error

    def to_dataframe(self) -> pd.DataFrame:
        rows = []
        for key in self.keys():
            c = self.cells[key]
            upper_app = self.applications.get(c.upper_source) if c.upper_source else None
            lower_app = self.applications.get(c.lower_source) if c.lower_source else None
            rows.append({
                "i": c.i,
                "j": c.j,
                "h_lower": c.h_lower,
                "h_upper": c.h_upper,
                "exact": c.exact,
                "regular": c.regular,
                "y_lower": c.y_lower,
                "y_upper": c.y_upper,
                "upper_rule": upper_app.rule.value if upper_app else None,
                "lower_rule": lower_app.rule.value if lower_app else "IJ",
                "constructive": bool(upper_app and upper_app.constructive),
            })
        frame = pd.DataFrame(rows)
        for column in ("h_upper", "y_lower", "y_upper"):
            frame[column] = frame[column].astype("Int64")
        return frame

    def to_dict(self) -> Dict[str, Any]:
        cells = []
        for key in self.keys():
            c = self.cells[key]
            upper_app = self.applications.get(c.upper_source) if c.upper_source else None
            cells.append({
                "i": c.i, "j": c.j,
                "h_lower": c.h_lower, "h_upper": c.h_upper, "exact": c.exact,
                "y_lower": c.y_lower, "y_upper": c.y_upper,
                "lower_source": c.lower_source, "upper_source": c.upper_source,
                "y_lower_source": c.y_lower_source, "y_upper_source": c.y_upper_source,
                "provenance": [
                    {
                        "id": a,
                        "rule": self.applications[a].rule.value,
                        "antecedents": [list(k) for k in self.applications[a].antecedents],
                    }
                    for a in c.provenance
                ],
                "witness_ref": upper_app.witness_ref if upper_app else None,
                "annotations": list(c.annotations),
            })
        return {
            "format_version": FORMAT_VERSION,
            "max_i": self.max_i,
            "max_j": self.max_j,
            "cells": cells,
            "applications": [self.applications[a].to_dict() for a in sorted(self.applications)],
        }

    def save(self, path: Union[str, Path], store: Optional[WitnessStore] = None) -> Path:
        """
        Écrit la table en JSON ; les témoins des graines vont dans le stockage
        (par défaut le répertoire 'witnesses' à côté du fichier).
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        store = store or WitnessStore(str(path.parent / "witnesses"))
        for app_id, system in sorted(self.witnesses.items()):
            app = self.applications[app_id]
            if app.rule in SEED_RULES:
                ref = store.put(system)
                self.applications[app_id] = _with_ref(app, ref)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        logger.info("Table %sx%s sauvegardée dans %s", self.max_i, self.max_j, path)
        return path

    @classmethod
    def load(cls, path: Union[str, Path], store: Optional[WitnessStore] = None) -> "BoundsTable":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        if data.get("format_version") != FORMAT_VERSION:
            raise DgrError(f"format_version {data.get('format_version')!r} non supportée")
        table = cls(int(data["max_i"]), int(data["max_j"]))
        for raw in data["applications"]:
            app = RuleApplication.from_dict(raw)
            table.applications[app.app_id] = app
        for raw in data["cells"]:
            c = table.cell(raw["i"], raw["j"])
            c.h_lower = raw["h_lower"]
            c.h_upper = raw["h_upper"]
            c.y_lower = raw["y_lower"]
            c.y_upper = raw["y_upper"]
            c.lower_source = raw["lower_source"]
            c.upper_source = raw["upper_source"]
            c.y_lower_source = raw["y_lower_source"]
            c.y_upper_source = raw["y_upper_source"]
            c.provenance = [entry["id"] for entry in raw["provenance"]]
            c.annotations = list(raw.get("annotations", []))
        refs = [a for a in table.applications.values() if a.witness_ref and a.rule in SEED_RULES]
        if refs:
            store = store or WitnessStore(str(path.parent / "witnesses"))
            for app in refs:
                table.witnesses[app.app_id] = store.get(app.witness_ref)
        return table


def _with_ref(app: RuleApplication, ref: str) -> RuleApplication:
    return RuleApplication(
        app.app_id, app.rule, app.target, app.kind, app.value, app.antecedents,
        app.sources, app.constructive, app.params, ref,
    )


# ---------------------------------------------------------------- graines

def _check_seed_witness(key: Key, value: int, witness: Optional[DgrSystem]) -> None:
    if witness is None:
        raise MissingWitnessError(f"graine H{key} = {value} sans témoin")
    report = verify_dgr(witness)
    if not report.valid or witness.header != (key[0], key[1], value):
        raise ConstructionError(f"témoin de la graine H{key} = {value} invalide", report.violations)


def seed_table(
    max_i: int,
    max_j: int,
    exact: Iterable[ExactSeed] = (),
    lower: Optional[Dict[Key, int]] = None,
    include_prime_power: bool = True,
    include_singer: bool = False,
    gf_limit: int = 4096,
) -> BoundsTable:
    """
    Initialise une table : I*J en borne inférieure, valeurs triviales (J <= 2),
    valeurs exactes issues de la recherche, faits du registre et, en option,
    règles de Singer.

    Args:
        max_i: Plus grand I de la table
        max_j: Plus grand J de la table
        exact: Valeurs exactes avec témoins vérifiés
        lower: Bornes inférieures prouvées (recherche interrompue)
        include_prime_power: Ajoute les faits H(p+1, p), H(p, p-1), H(p-1, p)
        include_singer: Ajoute H(1, q+1) <= longueur Singer + 1

    Raises:
        BoundsContradictionError: graine sous I*J ou incompatible avec une autre
    """
    table = BoundsTable(max_i, max_j)

    for key in table.keys():
        i, j = key
        value = trivial_h(i, j)
        if value is None:
            continue
        witness = regular_system(i, j)
        up = table.record(RuleId.TRIVIAL, key, BoundKind.H_UPPER, value, constructive=True,
                          params={"statement": f"H(I, {j}) = {j}I"}, witness=witness)
        table.record(RuleId.TRIVIAL, key, BoundKind.H_LOWER, value, sources=(up.app_id,) if up else ())
        y_value = trivial_y(i, j)
        table.record(RuleId.TRIVIAL, key, BoundKind.Y_UPPER, y_value, params={"statement": f"Y(I, {j}) = {j}I"})
        table.record(RuleId.TRIVIAL, key, BoundKind.Y_LOWER, y_value)

    for seed in exact:
        key = (seed.i, seed.j)
        if key not in table.cells:
            continue
        _check_seed_witness(key, seed.value, seed.witness)
        up = table.record(RuleId.SEARCH, key, BoundKind.H_UPPER, seed.value, constructive=True,
                          witness=seed.witness, always=True)
        table.record(RuleId.SEARCH, key, BoundKind.H_LOWER, seed.value,
                     params={"refuted_below": seed.value}, always=True,
                     sources=(up.app_id,) if up else ())

    for key, value in sorted((lower or {}).items()):
        if key in table.cells:
            table.record(RuleId.SEARCH, key, BoundKind.H_LOWER, value, params={"refuted_below": value})

    if include_prime_power:
        for fact in prime_power_facts(max_i, max_j):
            key = (fact.i, fact.j)
            params = {"p": fact.p, "statement": fact.statement}
            table.record(RuleId.PRIME_POWER, key, BoundKind.H_UPPER, fact.value, params=params, always=True)
            if fact.kind == "exact":
                table.record(RuleId.PRIME_POWER, key, BoundKind.H_LOWER, fact.value, params=params, always=True)

    if include_singer:
        q = 2
        while q + 1 <= max_j:
            try:
                singer = singer_ruler(q, gf_limit)
            except FieldError:
                q += 1
                continue
            system = singer.as_system()
            table.record(RuleId.SINGER, (1, q + 1), BoundKind.H_UPPER, system.n_span, constructive=True,
                         params={"q": q, "modulus": singer.modulus}, witness=system)
            q += 1

    logger.info("Table %sx%s initialisée: %s applications", max_i, max_j, len(table.applications))
    return table


def search_seeds(max_i: int, max_j: int, cfg: Optional[SearchConfig] = None) -> Tuple[List[ExactSeed], Dict[Key, int]]:
    """
    Calcule les graines par recherche exacte pour 3 <= J <= max_j.

    Le budget de cfg s'applique à chaque cellule ; une cellule non résolue
    fournit seulement sa borne inférieure prouvée.
    """
    exact: List[ExactSeed] = []
    lower: Dict[Key, int] = {}
    for i in range(1, max_i + 1):
        for j in range(3, max_j + 1):
            result = min_n(i, j, cfg)
            if result.value is not None:
                exact.append(ExactSeed(i, j, result.value, result.witness))
            else:
                lower[(i, j)] = result.lower_bound
    logger.info("Graines par recherche: %s exactes, %s bornes inférieures", len(exact), len(lower))
    return exact, lower


# ---------------------------------------------------------------- règles

def _upper(table: BoundsTable, i: int, j: int) -> Optional[Tuple[int, RuleApplication]]:
    app = table.upper_app(i, j)
    if app is None:
        return None
    return app.value, app


def _constructive(*apps: RuleApplication) -> bool:
    return all(a.constructive for a in apps)


def _best(candidates: Iterable[Candidate]) -> Optional[Candidate]:
    best = None
    for cand in candidates:
        if best is None or cand.value < best.value:
            best = cand
    return best


def rule_concat(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    def generate():
        for a in range(1, i // 2 + 1):
            left, right = _upper(table, a, j), _upper(table, i - a, j)
            if left is None or right is None:
                continue
            yield Candidate(left[0] + right[0], ((a, j), (i - a, j)), (left[1].app_id, right[1].app_id),
                            _constructive(left[1], right[1]), {"a": a, "b": i - a})
    return _best(generate())


def rule_extend(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    if j < 2:
        return None

    def generate():
        for a in range(1, i):
            b = i - a
            left, right = _upper(table, a, j), _upper(table, b, j - 1)
            if left is None or right is None or left[0] < right[0]:
                continue
            yield Candidate(left[0] + right[0] + b, ((a, j), (b, j - 1)), (left[1].app_id, right[1].app_id),
                            _constructive(left[1], right[1]), {"a": a, "b": b})
    return _best(generate())


def rule_double(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    if j < 2 or i % 2:
        return None
    a = i // 2
    source = _upper(table, a, j - 1)
    if source is None:
        return None
    return Candidate(2 * source[0] + 2 * a, ((a, j - 1),), (source[1].app_id,), source[1].constructive, {"a": a})


def rule_shift(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    if i != 2 or j < 2:
        return None
    source = _upper(table, 1, j + 1)
    if source is None:
        return None
    return Candidate(source[0] + 1, ((1, j + 1),), (source[1].app_id,), source[1].constructive, {})


def rule_regular(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    """Composition de cellules régulières ou à une position vide près."""
    if i < 2:
        return None
    k = i // 2
    if i % 2 == 0:
        source = _upper(table, k, j)
        if source is None or source[0] > k * j + 1:
            return None
        mode = "concat" if source[0] == k * j else "double"
        return Candidate(i * j, ((k, j),), (source[1].app_id,), source[1].constructive, {"k": k, "mode": mode})
    left, right = _upper(table, k, j), _upper(table, k + 1, j)
    if left is None or right is None or left[0] + right[0] > i * j + 1:
        return None
    if left[0] + right[0] == i * j:
        mode, ordered = "concat", (left, right)
    elif left[0] == k * j + 1:
        mode, ordered = "merge", (left, right)
    else:
        mode, ordered = "merge", (right, left)
    keys = tuple(a.target for _, a in ordered)
    return Candidate(i * j, keys, tuple(a.app_id for _, a in ordered),
                     _constructive(left[1], right[1]), {"k": k, "mode": mode})


def _gap_floor_value(h: int, a: int, j: int) -> int:
    return math.ceil((h - a * j) / (a * j - 1))


def rule_gap_floor(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    """Version analytique : la largeur du trou est le plancher garanti."""

    def generate():
        for a in range(1, i):
            source = _upper(table, a, j)
            if source is None or a * j < 2 or source[0] < a * j + 1:
                continue
            w = _gap_floor_value(source[0], a, j)
            b = i - a
            if b == a:
                yield Candidate(2 * source[0] - 2 * w, ((a, j),), (source[1].app_id,), False,
                                {"a": a, "w": w, "mode": "double"})
            other = _upper(table, b, j)
            if other is None or w > other[0]:
                continue
            yield Candidate(source[0] + other[0] - w, ((a, j), (b, j)), (source[1].app_id, other[1].app_id),
                            False, {"a": a, "b": b, "w": w, "mode": "merge"})
    return _best(generate())


def rule_gap_witness(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    """Version témoin : largeur du plus grand trou du témoin matérialisé."""

    def generate():
        for a in range(1, i):
            source = _upper(table, a, j)
            if source is None or not source[1].constructive:
                continue
            try:
                sa = _materialize(table, source[1])
            except DgrError:
                continue
            gap = largest_gap(sa)
            if gap is None:
                continue
            b = i - a
            if b == a:
                try:
                    built = gap_double(sa, gap).system
                except DgrError:
                    built = None
                if built is not None:
                    yield Candidate(built.n_span, ((a, j),), (source[1].app_id,), True,
                                    {"a": a, "w": gap.width, "mode": "double"}, witness=built)
            other = _upper(table, b, j)
            if other is None or not other[1].constructive:
                continue
            try:
                sb = _materialize(table, other[1])
                built = gap_merge(sa, gap, sb).system
            except DgrError:
                continue
            yield Candidate(built.n_span, ((a, j), (b, j)), (source[1].app_id, other[1].app_id), True,
                            {"a": a, "b": b, "w": gap.width, "mode": "merge"}, witness=built)
    return _best(generate())


def rule_monotone_upper(table: BoundsTable, i: int, j: int) -> Optional[Candidate]:
    def generate():
        bigger_i = _upper(table, i + 1, j)
        if bigger_i is not None:
            yield Candidate(bigger_i[0] - 1, ((i + 1, j),), (bigger_i[1].app_id,), bigger_i[1].constructive,
                            {"mode": "drop-ruler"})
        bigger_j = _upper(table, i, j + 1)
        if bigger_j is not None:
            yield Candidate(bigger_j[0] - 1, ((i, j + 1),), (bigger_j[1].app_id,), bigger_j[1].constructive,
                            {"mode": "drop-mark"})
    return _best(generate())


RULES: Dict[str, Callable[[BoundsTable, int, int], Optional[Candidate]]] = {
    "R1": rule_concat,
    "R2": rule_extend,
    "R3": rule_double,
    "R5": rule_shift,
    "R6": rule_regular,
    "R4w": rule_gap_witness,
    "R4": rule_gap_floor,
    "R8": rule_monotone_upper,
}

_RULE_IDS = {
    "R1": RuleId.R1_CONCAT,
    "R2": RuleId.R2_EXTEND,
    "R3": RuleId.R3_DOUBLE,
    "R5": RuleId.R5_SHIFT,
    "R6": RuleId.R6_REGULAR,
    "R4": RuleId.R4_GAP_FLOOR,
    "R4w": RuleId.R4_GAP_WITNESS,
    "R8": RuleId.R8_MONOTONE,
}


def _apply_upper_rule(table: BoundsTable, name: str) -> int:
    changes = 0
    for key in table.keys():
        cand = RULES[name](table, *key)
        if cand is None:
            continue
        app = table.record(_RULE_IDS[name], key, BoundKind.H_UPPER, cand.value, cand.antecedents,
                           cand.sources, cand.constructive, cand.params, cand.witness)
        if app is not None:
            changes += 1
    return changes


def _apply_lower_monotone(table: BoundsTable) -> int:
    changes = 0
    for key in table.keys():
        i, j = key
        for prev in ((i - 1, j), (i, j - 1)):
            before = table.get(*prev)
            if before is None:
                continue
            app = table.record(RuleId.R8_MONOTONE, key, BoundKind.H_LOWER, before.h_lower + 1, (prev,),
                               (before.lower_source,) if before.lower_source else (),
                               params={"mode": "drop-ruler" if prev[0] < i else "drop-mark"})
            if app is not None:
                changes += 1
    return changes


def _apply_y_rules(table: BoundsTable) -> int:
    changes = 0

    def record(*args, **kwargs):
        nonlocal changes
        if table.record(*args, **kwargs) is not None:
            changes += 1

    for key in table.keys():
        i, j = key
        c = table.cells[key]
        record(RuleId.R7_Y, key, BoundKind.Y_LOWER, c.h_lower, (key,),
               (c.lower_source,) if c.lower_source else (), params={"statement": "Y >= H"})
        prev = table.get(i - 1, j)
        if prev is not None and prev.y_lower is not None:
            record(RuleId.R7_Y, key, BoundKind.Y_LOWER, prev.y_lower, (prev.key,),
                   (prev.y_lower_source,) if prev.y_lower_source else (), params={"statement": "Y croissant en I"})
        if prev is not None and prev.y_upper is not None and j >= 3:
            record(RuleId.R7_Y, key, BoundKind.Y_UPPER, prev.y_upper + j, (prev.key,),
                   (prev.y_upper_source,), params={"statement": "Y(I+1, J) <= Y(I, J) + J"})
        if i == 1:
            wide = _upper(table, 1, 5 * j)
            if wide is not None:
                record(RuleId.R7_Y, key, BoundKind.Y_UPPER, wide[0], ((1, 5 * j),), (wide[1].app_id,),
                       params={"statement": "Y(1, J) <= H(1, 5J)"})
    return changes


def propagate(table: BoundsTable, max_rounds: int = 1000) -> BoundsTable:
    """
    Ferme la table sous toutes les règles et retourne une nouvelle table.

    Ordre déterministe : règles dans l'ordre de RULES puis monotonie des
    bornes inférieures puis règles sur Y ; cellules dans l'ordre (I, J).

    Raises:
        BoundsContradictionError: une borne supérieure passe sous une borne inférieure
    """
    result = table.copy()
    for round_number in range(1, max_rounds + 1):
        changes = sum(_apply_upper_rule(result, name) for name in RULES)
        changes += _apply_lower_monotone(result)
        changes += _apply_y_rules(result)
        logger.debug("Tour %s: %s améliorations", round_number, changes)
        if changes == 0:
            logger.info("Point fixe atteint après %s tours (%s applications)", round_number, len(result.applications))
            return result
    raise DgrError(f"pas de point fixe après {max_rounds} tours")  # pragma: no cover


# ---------------------------------------------------------------- matérialisation

def _drop_top_ruler(s: DgrSystem) -> DgrSystem:
    top = max(s.union())
    rulers = tuple(r for r in s.rulers if top not in r)
    return DgrSystem(s.i_count - 1, s.j_marks, s.n_span - 1, rulers)


def _drop_top_marks(s: DgrSystem) -> DgrSystem:
    rulers = tuple(Ruler(r.marks[:-1]) for r in s.rulers)
    return DgrSystem(s.i_count, s.j_marks - 1, s.n_span - 1, rulers)


def _build(table: BoundsTable, app: RuleApplication, inputs: List[DgrSystem]) -> DgrSystem:
    rule = app.rule
    mode = app.params.get("mode")
    if rule is RuleId.R1_CONCAT:
        return concat_compose(*inputs).system
    if rule is RuleId.R2_EXTEND:
        return thm3_extend(*inputs).system
    if rule is RuleId.R3_DOUBLE:
        return thm3_double(inputs[0]).system
    if rule is RuleId.R5_SHIFT:
        ruler = inputs[0].rulers[0]
        n = inputs[0].n_span
        return shift_pair(translate(ruler, n - ruler.marks[-1]), n).system
    if rule is RuleId.R6_REGULAR:
        if mode == "concat" and len(inputs) == 1:
            return concat_compose(inputs[0], inputs[0]).system
        if mode == "concat":
            return concat_compose(*inputs).system
        gap = find_gaps(inputs[0])[0]
        if mode == "double":
            return gap_double(inputs[0], gap).system
        return gap_merge(inputs[0], gap, inputs[1]).system
    if rule is RuleId.R4_GAP_WITNESS:
        gap = largest_gap(inputs[0])
        if gap is None or gap.width != app.params["w"]:
            raise ConstructionError(f"trou de largeur {app.params['w']} introuvable pour {app.describe()}")
        if mode == "double":
            return gap_double(inputs[0], gap).system
        return gap_merge(inputs[0], gap, inputs[1]).system
    if rule is RuleId.R8_MONOTONE:
        if mode == "drop-ruler":
            return _drop_top_ruler(inputs[0])
        return _drop_top_marks(inputs[0])
    raise NonConstructiveChainError(f"règle {rule.value} sans construction")


def _first_non_constructive(table: BoundsTable, app: RuleApplication) -> RuleApplication:
    for src in app.sources:
        parent = table.applications[src]
        if not parent.constructive:
            return _first_non_constructive(table, parent)
    return app


def _materialize(table: BoundsTable, app: RuleApplication) -> DgrSystem:
    cached = table.witnesses.get(app.app_id)
    if cached is not None:
        return cached
    if app.kind is not BoundKind.H_UPPER:
        raise NonConstructiveChainError(f"{app.describe()} n'est pas une borne supérieure sur H")
    if not app.constructive:
        culprit = _first_non_constructive(table, app)
        raise NonConstructiveChainError(f"étape non constructive: {culprit.describe()}")
    if app.rule in SEED_RULES:
        raise MissingWitnessError(f"témoin absent pour {app.describe()}")
    inputs = [_materialize(table, table.applications[src]) for src in app.sources]
    system = _build(table, app, inputs)
    expected = (app.target[0], app.target[1], app.value)
    report = verify_dgr(system)
    if not report.valid or system.header != expected:
        raise ConstructionError(f"{app.describe()} a produit {system.header}", report.violations)
    table.witnesses[app.app_id] = system
    return system


def materialize_witness(table: BoundsTable, target: Union[Key, int, RuleApplication]) -> DgrSystem:
    """
    Rejoue la chaîne constructive d'une borne supérieure.

    Args:
        table: Table propagée
        target: Cellule (i, j), identifiant d'application ou application

    Returns:
        Système valide dont l'étendue est exactement la borne

    Raises:
        NonConstructiveChainError: la chaîne passe par un fait non constructif
        MissingWitnessError: cellule sans borne ou témoin de graine absent
    """
    if isinstance(target, RuleApplication):
        app = target
    elif isinstance(target, int):
        app = table.applications[target]
    else:
        app = table.upper_app(*target)
        if app is None:
            raise MissingWitnessError(f"aucune borne supérieure pour H{tuple(target)}")
    return _materialize(table, app)


# ---------------------------------------------------------------- Y et rapports

def record_falsifier(
    table: BoundsTable,
    i: int,
    j: int,
    counterexample: Sequence[int],
    cfg: Optional[SearchConfig] = None,
) -> Optional[RuleApplication]:
    """
    Y(I, J) >= |A| + 1 pour un ensemble A sans I règles disjointes.

    L'absence est revérifiée par une recherche exhaustive dans A avant
    l'enregistrement.

    Raises:
        DgrError: A n'est pas un ensemble d'entiers positifs, contient I
            règles disjointes, ou la revérification n'a pas pu conclure
    """
    values = sorted(set(int(x) for x in counterexample))
    if len(values) != len(counterexample) or not values or values[0] < 1:
        raise DgrError("le contre-exemple doit être un ensemble d'entiers positifs")
    outcome = exists_dgr_in(i, j, values, cfg)
    if outcome.status is SearchStatus.FOUND:
        raise DgrError(f"{values} contient {i} règles disjointes à {j} marques: {outcome.witness}")
    if outcome.status is not SearchStatus.EXHAUSTED:
        raise DgrError(f"revérification de {values} interrompue ({outcome.status.value})")
    return table.record(RuleId.FALSIFIER, (i, j), BoundKind.Y_LOWER, len(values) + 1,
                        params={"set": values})


@dataclass(frozen=True)
class RegularityEntry:
    """
    Observation par J : début de la queue régulière observée dans la table
    et minorant (H(1, J) - 2) / (J - 1) < iota(J) quand H(1, J) est exact.
    """

    j: int
    regular_from: Optional[int]
    iota_lower_exclusive: Optional[float]


def regularity_report(table: BoundsTable) -> List[RegularityEntry]:
    entries = []
    for j in range(1, table.max_j + 1):
        start = None
        for i in range(table.max_i, 0, -1):
            if table.cell(i, j).regular:
                start = i
            else:
                break
        first = table.cell(1, j)
        bound = None
        if first.exact and j >= 2:
            bound = (first.h_upper - 2) / (j - 1)
        entries.append(RegularityEntry(j, start, bound))
    return entries


@dataclass(frozen=True)
class SquareAnnotation:
    i: int
    j: int
    target: int
    status: str
    in_scope: bool


def square_cell_annotations(table: BoundsTable) -> List[SquareAnnotation]:
    """
    Suit H(I, I-1) = I^2 - I et H(I-1, I) = I^2 - I sur les cellules
    présentes ; seul I >= 4 est dans le champ de la remarque.
    """
    notes = []
    for i in range(2, max(table.max_i, table.max_j) + 2):
        target = i * i - i
        for key in ((i, i - 1), (i - 1, i)):
            c = table.get(*key)
            if c is None:
                continue
            if c.exact:
                status = "égal" if c.h_upper == target else "différent"
            elif c.h_lower > target:
                status = "différent"
            elif c.h_upper is not None and c.h_upper < target:
                status = "différent"
            else:
                status = "inconnu"
            note = SquareAnnotation(key[0], key[1], target, status, i >= 4)
            text = f"H{key} vs I^2-I = {target}: {status}"
            if text not in c.annotations:
                c.annotations.append(text)
            notes.append(note)
    return notes
