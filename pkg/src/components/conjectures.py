"""
Vérificateurs de conjectures sur les tables calculées.

Chaque vérificateur retourne un ConjectureReport ; une violation dans le
champ de la conjecture est journalisée en WARNING, un budget épuisé ne
donne lieu à aucune conclusion.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import pandas as pd

from src.utils.known_values import OPTIMAL_GOLOMB_LENGTHS

from .bounds import BoundsTable
from .core import DgrSystem, Ruler, is_golomb
from .formats import FORMAT_VERSION, system_to_dict
from .search import (
    SearchConfig,
    SearchStats,
    SearchStatus,
    counterexample_search,
    exists_dgr,
    exists_dgr_in,
    min_n,
)

logger = logging.getLogger(__name__)

CONFIRMED = "confirmed"
VIOLATED = "violated"
BUDGET_EXCEEDED = "budget-exceeded"
NOT_APPLICABLE = "not-applicable"
EMPTY = "empty"
INCONCLUSIVE = "inconclusive"

STATEMENTS = {
    1: "tout ensemble A avec |A| = H(I, J) contient I règles de Golomb disjointes à J marques",
    2: "H(I+1, J) <= H(I, J) + J pour J >= 3",
    3: "si H(I0, J) = I0*J alors H(I, J) = IJ pour tout I > I0",
    4: "si H(I, J) = IJ, toute règle A1 dans {1..(I+1)J} se complète en un (I+1, J, (I+1)J)-DGR",
    5: "H(I, I+2) = I(I+2) pour I >= 4",
    6: "G(k+2) < k^2 + k pour k >= 6 (et G(k) < k^2)",
}


@dataclass
class ConjectureReport:
    """Résultat d'un vérificateur : une ligne par cas évalué."""

    conjecture: int
    status: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    unevaluated: List[Any] = field(default_factory=list)
    witness: Optional[DgrSystem] = None
    stats: Optional[SearchStats] = None
    detail: str = ""

    @property
    def statement(self) -> str:
        return STATEMENTS[self.conjecture]

    @property
    def violations(self) -> List[Dict[str, Any]]:
        return [r for r in self.rows if not r.get("holds", True) and r.get("in_scope", True)]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "conjecture": self.conjecture,
            "statement": self.statement,
            "status": self.status,
            "rows": list(self.rows),
            "violations": len(self.violations),
            "unevaluated": list(self.unevaluated),
            "witness": system_to_dict(self.witness) if self.witness else None,
            "stats": self.stats.to_dict() if self.stats else None,
            "detail": self.detail,
        }


def _status_from_rows(report: ConjectureReport) -> str:
    if not report.rows:
        return EMPTY
    return VIOLATED if report.violations else CONFIRMED


def _warn(report: ConjectureReport) -> None:
    for row in report.violations:
        logger.warning("Conjecture %s violée: %s", report.conjecture, row)


@dataclass(frozen=True)
class GolombLengthEntry:
    k: int
    g_value: int
    published: Optional[int]

    @property
    def matches(self) -> Optional[bool]:
        return None if self.published is None else self.published == self.g_value


def golomb_lengths(table: BoundsTable) -> List[GolombLengthEntry]:
    """G(k) = H(1, k) - 1 pour chaque H(1, k) exact de la table."""
    entries = []
    for k in range(1, table.max_j + 1):
        c = table.cell(1, k)
        if not c.exact:
            continue
        entry = GolombLengthEntry(k, c.h_upper - 1, OPTIMAL_GOLOMB_LENGTHS.get(k))
        if entry.matches is False:
            logger.error("G(%s) = %s diffère de la valeur publiée %s", k, entry.g_value, entry.published)
        entries.append(entry)
    return entries


def check_conjecture2(table: BoundsTable) -> ConjectureReport:
    report = ConjectureReport(2, EMPTY)
    for (i, j), c in sorted(table.cells.items()):
        if j < 3:
            continue
        nxt = table.get(i + 1, j)
        if nxt is None:
            continue
        if not (c.exact and nxt.exact):
            report.unevaluated.append([i, j])
            continue
        limit = c.h_upper + j
        report.rows.append({
            "i": i, "j": j, "h": c.h_upper, "h_next": nxt.h_upper,
            "limit": limit, "holds": nxt.h_upper <= limit, "margin": limit - nxt.h_upper,
        })
    report.status = _status_from_rows(report)
    _warn(report)
    return report


def check_conjecture5(i_count: int, cfg: Optional[SearchConfig] = None) -> ConjectureReport:
    """
    Cherche un (I, I+2, I(I+2))-DGR ; la borne inférieure IJ est automatique.

    Raises:
        ValueError: I < 4
    """
    if i_count < 4:
        raise ValueError(f"la conjecture 5 porte sur I >= 4, reçu {i_count}")
    j_marks = i_count + 2
    n_span = i_count * j_marks
    outcome = exists_dgr(i_count, j_marks, n_span, cfg)
    row = {"i": i_count, "j": j_marks, "n": n_span, "search": outcome.status.value,
           "holds": outcome.status is not SearchStatus.EXHAUSTED, "in_scope": True}
    report = ConjectureReport(5, CONFIRMED, [row], witness=outcome.witness, stats=outcome.stats)
    if outcome.status is SearchStatus.BUDGET_EXCEEDED:
        report.status = BUDGET_EXCEEDED
        logger.warning("Conjecture 5 pour I=%s: budget épuisé, aucune conclusion", i_count)
    elif outcome.status is SearchStatus.EXHAUSTED:
        report.status = VIOLATED
        _warn(report)
    return report


def check_conjecture6(table: BoundsTable) -> ConjectureReport:
    """
    Évalue G(k) < k^2 et G(k+2) < k^2 + k sur les G(k) exacts de la table.

    Seuls les k >= 6 sont dans le champ de la seconde inégalité ; les k
    dont une valeur manque sont listés comme non évalués.
    """
    report = ConjectureReport(6, EMPTY)
    lengths = {e.k: e.g_value for e in golomb_lengths(table)}
    for k in range(1, table.max_j + 1):
        if k not in lengths:
            report.unevaluated.append(k)
            continue
        bound = k * k
        report.rows.append({
            "k": k, "form": "G(k) < k^2", "g": lengths[k], "bound": bound,
            "holds": lengths[k] < bound, "margin": bound - lengths[k], "in_scope": True,
        })
        if k + 2 in lengths:
            bound = k * k + k
            report.rows.append({
                "k": k, "form": "G(k+2) < k^2+k", "g": lengths[k + 2], "bound": bound,
                "holds": lengths[k + 2] < bound, "margin": bound - lengths[k + 2], "in_scope": k >= 6,
            })
    report.status = _status_from_rows(report)
    _warn(report)
    return report


def check_conjecture1(i_count: int, j_marks: int, universe_max: int, cfg: Optional[SearchConfig] = None) -> ConjectureReport:
    """
    Sonde la conjecture 1 : cherche un ensemble de H(I, J) entiers de
    [1, universe_max] sans I règles disjointes.

    Un contre-exemple réfute la conjecture ; une recherche épuisée ne
    prouve rien au-delà de l'univers exploré.
    """
    cfg = cfg or SearchConfig()
    h = min_n(i_count, j_marks, cfg)
    if h.value is None:
        return ConjectureReport(1, BUDGET_EXCEEDED, stats=h.stats, detail=f"H({i_count}, {j_marks}) >= {h.lower_bound}")
    outcome = counterexample_search(i_count, j_marks, h.value, max(universe_max, h.value), cfg)
    row = {"i": i_count, "j": j_marks, "h": h.value, "universe_max": max(universe_max, h.value),
           "checked": outcome.checked, "holds": outcome.status is not SearchStatus.FOUND, "in_scope": True}
    if outcome.counterexample:
        row["counterexample"] = list(outcome.counterexample)
    report = ConjectureReport(1, INCONCLUSIVE, [row], stats=outcome.stats)
    if outcome.status is SearchStatus.FOUND:
        report.status = VIOLATED
        _warn(report)
    elif outcome.status is SearchStatus.BUDGET_EXCEEDED:
        report.status = BUDGET_EXCEEDED
    else:
        report.detail = "aucun contre-exemple dans l'univers exploré"
    return report


def check_conjecture3(i0: int, j_marks: int, cfg: Optional[SearchConfig] = None) -> ConjectureReport:
    """Si (I0, J) est régulier, cherche un (I0+1, J, (I0+1)J)-DGR."""
    cfg = cfg or SearchConfig()
    base = exists_dgr(i0, j_marks, i0 * j_marks, cfg)
    if base.status is SearchStatus.BUDGET_EXCEEDED:
        return ConjectureReport(3, BUDGET_EXCEEDED, stats=base.stats)
    if base.status is SearchStatus.EXHAUSTED:
        return ConjectureReport(3, NOT_APPLICABLE, stats=base.stats,
                                detail=f"H({i0}, {j_marks}) > {i0 * j_marks}")
    nxt = exists_dgr(i0 + 1, j_marks, (i0 + 1) * j_marks, cfg)
    row = {"i": i0 + 1, "j": j_marks, "n": (i0 + 1) * j_marks, "search": nxt.status.value,
           "holds": nxt.status is not SearchStatus.EXHAUSTED, "in_scope": True}
    report = ConjectureReport(3, CONFIRMED, [row], witness=nxt.witness, stats=nxt.stats)
    if nxt.status is SearchStatus.BUDGET_EXCEEDED:
        report.status = BUDGET_EXCEEDED
    elif nxt.status is SearchStatus.EXHAUSTED:
        report.status = VIOLATED
        _warn(report)
    return report


def _golomb_subsets(j_marks: int, top: int):
    for combo in itertools.combinations(range(1, top + 1), j_marks):
        ruler = Ruler(combo)
        if is_golomb(ruler):
            yield ruler


def check_conjecture4(i_count: int, j_marks: int, cfg: Optional[SearchConfig] = None) -> ConjectureReport:
    """
    Pour chaque règle A1 à J marques dans {1..(I+1)J}, cherche I règles
    disjointes dans le complément.
    """
    cfg = cfg or SearchConfig()
    top = (i_count + 1) * j_marks
    base = exists_dgr(i_count, j_marks, i_count * j_marks, cfg)
    if base.status is SearchStatus.BUDGET_EXCEEDED:
        return ConjectureReport(4, BUDGET_EXCEEDED, stats=base.stats)
    if base.status is SearchStatus.EXHAUSTED:
        return ConjectureReport(4, NOT_APPLICABLE, stats=base.stats,
                                detail=f"H({i_count}, {j_marks}) > {i_count * j_marks}")
    report = ConjectureReport(4, EMPTY, stats=SearchStats())
    for ruler in _golomb_subsets(j_marks, top):
        rest = [x for x in range(1, top + 1) if x not in ruler]
        outcome = exists_dgr_in(i_count, j_marks, rest, cfg)
        report.stats.absorb(outcome.stats)
        if outcome.status is SearchStatus.BUDGET_EXCEEDED:
            report.unevaluated.append(list(ruler.marks))
            continue
        report.rows.append({"a1": list(ruler.marks), "holds": outcome.found, "in_scope": True})
    report.status = _status_from_rows(report)
    if report.unevaluated and report.status == CONFIRMED:
        report.status = BUDGET_EXCEEDED
    _warn(report)
    return report
