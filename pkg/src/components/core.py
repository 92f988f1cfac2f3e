"""
Règles de Golomb et systèmes de règles disjointes (DGR).

Ce module définit les types de base (Ruler, DgrSystem, Gap, ValidationReport)
et les primitives géométriques sur lesquelles reposent les constructions,
la recherche et le tableau de bornes : vérification, translation, réflexion,
détection des trous et forme canonique.
"""

import hashlib
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Tuple

import numpy as np

from .exceptions import InvalidRulerError

logger = logging.getLogger(__name__)

Header = Tuple[int, int, int]


@dataclass(frozen=True)
class Ruler:
    """
    Ensemble fini de marques entières non négatives, stocké trié.

    Les doublons et les marques négatives sont refusés à la construction ;
    toutes les opérations peuvent donc supposer des marques strictement
    croissantes.
    """

    marks: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(sorted(int(m) for m in self.marks))
        if any(m < 0 for m in values):
            raise InvalidRulerError(f"Marque négative dans {values}")
        if len(set(values)) != len(values):
            raise InvalidRulerError(f"Marques dupliquées dans {values}")
        object.__setattr__(self, "marks", values)

    @classmethod
    def of(cls, *marks: int) -> "Ruler":
        return cls(tuple(marks))

    def __iter__(self) -> Iterator[int]:
        return iter(self.marks)

    def __len__(self) -> int:
        return len(self.marks)

    def __contains__(self, mark: object) -> bool:
        return mark in self.marks

    @property
    def length(self) -> int:
        """Différence entre la plus grande et la plus petite marque."""
        if not self.marks:
            return 0
        return self.marks[-1] - self.marks[0]

    def __str__(self) -> str:
        return "{" + ",".join(str(m) for m in self.marks) + "}"


@dataclass(frozen=True)
class DgrSystem:
    """
    Candidat (I, J, n)-DGR : I règles de J marques dans {1, ..., n}.

    La construction ne valide rien (verify_dgr accepte des candidats
    arbitraires) ; un système vide (I = 0) est admis pour les cas dégénérés
    des constructions.
    """

    i_count: int
    j_marks: int
    n_span: int
    rulers: Tuple[Ruler, ...]

    def __post_init__(self):
        object.__setattr__(self, "rulers", tuple(
            r if isinstance(r, Ruler) else Ruler(tuple(r)) for r in self.rulers
        ))

    @classmethod
    def build(cls, rulers: Iterable[Iterable[int]], n_span: int) -> "DgrSystem":
        """Construit un système en déduisant I et J des règles fournies."""
        built = tuple(r if isinstance(r, Ruler) else Ruler(tuple(r)) for r in rulers)
        j_marks = len(built[0]) if built else 0
        return cls(len(built), j_marks, n_span, built)

    @classmethod
    def empty(cls, j_marks: int, n_span: int = 0) -> "DgrSystem":
        return cls(0, j_marks, n_span, ())

    @property
    def header(self) -> Header:
        return (self.i_count, self.j_marks, self.n_span)

    def union(self) -> Tuple[int, ...]:
        """Union triée des marques de toutes les règles."""
        return tuple(sorted(m for r in self.rulers for m in r))

    def with_span(self, n_span: int) -> "DgrSystem":
        """Même système vu dans un intervalle {1, ..., n_span}."""
        return DgrSystem(self.i_count, self.j_marks, n_span, self.rulers)

    def __str__(self) -> str:
        body = ",".join(str(r) for r in self.rulers)
        return f"{self.header}{{{body}}}"


@dataclass(frozen=True)
class Gap:
    """Trou maximal {t+1, ..., t+w} dans l'union d'un système."""

    t_offset: int
    width: int

    @property
    def positions(self) -> range:
        return range(self.t_offset + 1, self.t_offset + self.width + 1)


class ViolationKind(Enum):
    DUPLICATE_DIFFERENCE = "duplicate-difference"
    OVERLAP = "overlap"
    OUT_OF_RANGE = "out-of-range"
    WRONG_CARDINALITY = "wrong-cardinality"
    WRONG_RULER_COUNT = "wrong-ruler-count"
    BAD_HEADER = "bad-header"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    message: str
    details: Tuple[Tuple[str, object], ...] = ()

    def to_dict(self) -> Dict[str, object]:
        return {"kind": self.kind.value, "message": self.message, **dict(self.details)}

    def __str__(self) -> str:
        return f"[{self.kind.value}] {self.message}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def of_kind(self, kind: ViolationKind) -> List[Violation]:
        return [v for v in self.violations if v.kind is kind]

    def to_dict(self) -> Dict[str, object]:
        return {"valid": self.valid, "violations": [v.to_dict() for v in self.violations]}


@dataclass(frozen=True)
class DifferenceEntry:
    """Différence a_j - a_i (i < j) et indicateur de répétition."""

    value: int
    low: int
    high: int
    duplicate: bool


def difference_list(r: Ruler) -> List[DifferenceEntry]:
    """
    Liste toutes les différences positives d'une règle.

    Ordre : pour chaque i croissant, les a_j - a_i avec j > i. Une entrée est
    marquée dupliquée dès que sa valeur apparaît plusieurs fois.

    Args:
        r: Règle à analyser

    Returns:
        k(k-1)/2 entrées
    """
    pairs = [(b - a, a, b) for idx, a in enumerate(r.marks) for b in r.marks[idx + 1:]]
    counts = Counter(value for value, _, _ in pairs)
    return [DifferenceEntry(value, a, b, counts[value] > 1) for value, a, b in pairs]


def is_golomb(r: Ruler) -> bool:
    """Vrai si toutes les différences positives de la règle sont distinctes."""
    seen = set()
    marks = r.marks
    for idx, a in enumerate(marks):
        for b in marks[idx + 1:]:
            d = b - a
            if d in seen:
                return False
            seen.add(d)
    return True


def _duplicate_pairs(r: Ruler) -> Dict[int, List[Tuple[int, int]]]:
    by_value: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for entry in difference_list(r):
        if entry.duplicate:
            by_value[entry.value].append((entry.low, entry.high))
    return dict(by_value)


def verify_dgr(s: DgrSystem) -> ValidationReport:
    """
    Vérifie toutes les propriétés d'un (I, J, n)-DGR.

    Toutes les violations sont listées, pas seulement la première.
    """
    report = ValidationReport()
    add = report.violations.append

    if s.i_count < 0 or s.j_marks < 1 or s.n_span < 0:
        add(Violation(ViolationKind.BAD_HEADER, f"en-tête invalide {s.header}"))
    if len(s.rulers) != s.i_count:
        add(Violation(
            ViolationKind.WRONG_RULER_COUNT,
            f"{len(s.rulers)} règles au lieu de {s.i_count}",
            (("expected", s.i_count), ("found", len(s.rulers))),
        ))

    owner: Dict[int, int] = {}
    for idx, ruler in enumerate(s.rulers, start=1):
        if len(ruler) != s.j_marks:
            add(Violation(
                ViolationKind.WRONG_CARDINALITY,
                f"règle {idx} a {len(ruler)} marques au lieu de {s.j_marks}",
                (("ruler", idx), ("expected", s.j_marks), ("found", len(ruler))),
            ))
        for mark in ruler:
            if mark < 1 or mark > s.n_span:
                add(Violation(
                    ViolationKind.OUT_OF_RANGE,
                    f"marque {mark} de la règle {idx} hors de [1, {s.n_span}]",
                    (("ruler", idx), ("mark", mark)),
                ))
            if mark in owner:
                add(Violation(
                    ViolationKind.OVERLAP,
                    f"règles {owner[mark]} et {idx} partagent la marque {mark}",
                    (("ruler_a", owner[mark]), ("ruler_b", idx), ("mark", mark)),
                ))
            else:
                owner[mark] = idx
        for value, pairs in sorted(_duplicate_pairs(ruler).items()):
            add(Violation(
                ViolationKind.DUPLICATE_DIFFERENCE,
                f"règle {idx}: différence {value} répétée par {pairs}",
                (("ruler", idx), ("difference", value), ("pairs", [list(p) for p in pairs])),
            ))

    if report.valid and s.i_count * s.j_marks > s.n_span:
        add(Violation(ViolationKind.BAD_HEADER, f"I*J = {s.i_count * s.j_marks} > n = {s.n_span}"))
    return report


def translate(r: Ruler, delta: int) -> Ruler:
    """
    Décale toutes les marques de delta.

    Raises:
        InvalidRulerError: si une marque deviendrait négative
    """
    if r.marks and r.marks[0] + delta < 0:
        raise InvalidRulerError(f"translation de {r} par {delta} produit une marque négative")
    return Ruler(tuple(m + delta for m in r.marks))


def translate_system(s: DgrSystem, delta: int, n_span: int = None) -> DgrSystem:
    """Translate toutes les règles ; l'étendue vaut n + delta sauf indication contraire."""
    span = s.n_span + delta if n_span is None else n_span
    return DgrSystem(s.i_count, s.j_marks, span, tuple(translate(r, delta) for r in s.rulers))


def reflect_ruler(r: Ruler, n: int) -> Ruler:
    """Image de la règle par x -> n + 1 - x."""
    return Ruler(tuple(n + 1 - m for m in r.marks))


def reflect_system(s: DgrSystem) -> DgrSystem:
    """Réflexion x -> n + 1 - x de chaque règle ; involution qui préserve la validité."""
    return DgrSystem(s.i_count, s.j_marks, s.n_span, tuple(reflect_ruler(r, s.n_span) for r in s.rulers))


def occupancy(s: DgrSystem) -> np.ndarray:
    """Masque booléen des positions 1..n occupées (indice 0 = position 1)."""
    mask = np.zeros(max(s.n_span, 0), dtype=bool)
    marks = np.fromiter((m for m in s.union() if 1 <= m <= s.n_span), dtype=np.int64)
    if marks.size:
        mask[marks - 1] = True
    return mask


def find_gaps(s: DgrSystem) -> List[Gap]:
    """
    Trous maximaux de l'union dans [1, n], triés par t.

    Les trous qui touchent 1 ou n sont inclus ; les constructions
    appliquent elles-mêmes leurs exigences d'intériorité.
    """
    empty = ~occupancy(s)
    if not empty.any():
        return []
    padded = np.concatenate(([False], empty, [False])).astype(np.int8)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    # starts[k] est l'indice 0-based de la première position vide, donc t = starts[k]
    return [Gap(int(a), int(b - a)) for a, b in zip(starts, ends)]


def largest_gap(s: DgrSystem):
    """Premier des trous de largeur maximale, ou None si l'union est pleine."""
    gaps = find_gaps(s)
    if not gaps:
        return None
    widest = max(g.width for g in gaps)
    return next(g for g in gaps if g.width == widest)


def gap_floor(n_span: int, i_count: int, j_marks: int) -> int:
    """
    Largeur minimale garantie du plus grand trou d'un témoin serré.

    Un témoin qui occupe 1 et n laisse n - IJ positions vides réparties en au
    plus IJ - 1 trous intérieurs.
    """
    used = i_count * j_marks
    if n_span <= used or used < 2:
        return 0
    return math.ceil((n_span - used) / (used - 1))


def _canonical_key(s: DgrSystem) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
    return (s.union(), tuple(r.marks for r in s.rulers))


def _sorted_rulers(s: DgrSystem) -> DgrSystem:
    ordered = tuple(sorted(s.rulers, key=lambda r: (r.marks[0] if r.marks else -1, r.marks)))
    return DgrSystem(s.i_count, s.j_marks, s.n_span, ordered)


def canonical_form(s: DgrSystem) -> DgrSystem:
    """
    Forme canonique : règles triées par marque minimale, puis choix entre s et
    sa réflexion de celui dont l'union triée est lexicographiquement la plus
    petite (égalité départagée par la suite des règles).
    """
    direct = _sorted_rulers(s)
    mirrored = _sorted_rulers(reflect_system(s))
    return min(direct, mirrored, key=_canonical_key)


def canonical_hash(s: DgrSystem) -> str:
    """Empreinte sha256 (16 hex) du texte canonique, utilisée pour le stockage."""
    from .formats import emit_dgr

    text = emit_dgr(canonical_form(s))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def regular_system(i_count: int, j_marks: int) -> DgrSystem:
    """Système régulier trivial pour J <= 2 : blocs consécutifs de J marques."""
    if j_marks > 2:
        raise InvalidRulerError("construction triviale réservée à J <= 2")
    rulers = tuple(Ruler(tuple(range(k * j_marks + 1, (k + 1) * j_marks + 1))) for k in range(i_count))
    return DgrSystem(i_count, j_marks, i_count * j_marks, rulers)
