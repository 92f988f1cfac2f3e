"""
Recherche exacte de systèmes DGR par retour arrière élagué.

Les positions candidates sont parcourues en ordre croissant ; chacune est
affectée à une règle ou laissée libre. Chaque règle garde un masque de bits
de ses différences (entier Python), mis à jour en O(J) par placement.

Brisure de symétrie (activée par défaut) :
  - les règles sont ouvertes dans l'ordre, donc leurs minima sont croissants ;
  - sur {1..n}, la position 1 est toujours utilisée (translation) ;
  - sur {1..n}, entre un témoin et son image par réflexion on ne garde que
    celui dont l'écart entre les deux premières marques de la règle de 1 est
    au plus l'écart entre la marque maximale et l'avant-dernière marque de
    sa règle.
"""

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from enum import Enum
from multiprocessing import Manager
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .core import DgrSystem, Ruler, is_golomb, verify_dgr

logger = logging.getLogger(__name__)

_CHECK_INTERVAL = 1024
_SKIP = -1


class SearchStatus(Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"
    BUDGET_EXCEEDED = "budget-exceeded"


@dataclass(frozen=True)
class SearchConfig:
    """
    Paramètres d'une recherche.

    Le budget de noeuds s'applique à chaque sous-arbre distribué quand
    thread_count > 1, et au total pour une recherche séquentielle.
    """

    node_budget: Optional[int] = None
    time_budget: Optional[float] = None
    thread_count: int = 1
    symmetry_breaking: bool = True
    split_depth: int = 0

    def __post_init__(self):
        if self.node_budget is not None and self.node_budget <= 0:
            raise ValueError("node_budget doit être positif")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time_budget doit être positif")
        if self.thread_count < 1:
            raise ValueError("thread_count doit être >= 1")
        if self.split_depth < 0:
            raise ValueError("split_depth doit être >= 0")


@dataclass
class SearchStats:
    nodes: int = 0
    max_depth: int = 0
    elapsed: float = 0.0
    tasks: int = 1

    def absorb(self, other: "SearchStats") -> None:
        self.nodes += other.nodes
        self.max_depth = max(self.max_depth, other.max_depth)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nodes": self.nodes,
            "max_depth": self.max_depth,
            "elapsed": round(self.elapsed, 6),
            "tasks": self.tasks,
        }


@dataclass
class SearchOutcome:
    status: SearchStatus
    witness: Optional[DgrSystem] = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def found(self) -> bool:
        return self.status is SearchStatus.FOUND


class _BudgetExceeded(Exception):
    pass


class _Stopped(Exception):
    pass


class _Backtracker:
    """Arbre de recherche sur une liste triée de positions."""

    def __init__(
        self,
        i_count: int,
        j_marks: int,
        positions: Sequence[int],
        symmetry: bool,
        anchored: bool,
        reflective: bool,
        node_budget: Optional[int] = None,
        deadline: Optional[float] = None,
        stop_event=None,
    ):
        self.i_count = i_count
        self.j_marks = j_marks
        self.positions = tuple(positions)
        self.top = self.positions[-1] if self.positions else 0
        self.total = i_count * j_marks
        self.symmetry = symmetry
        self.anchored = anchored
        self.reflective = reflective and j_marks >= 2
        self.node_budget = node_budget
        self.deadline = deadline
        self.stop_event = stop_event

        self.marks: List[List[int]] = [[] for _ in range(i_count)]
        self.masks = [0] * i_count
        self.opened = 0
        self.placed = 0
        self.nodes = 0
        self.max_depth = 0

    def stats(self) -> SearchStats:
        return SearchStats(nodes=self.nodes, max_depth=self.max_depth)

    def witness(self) -> List[Tuple[int, ...]]:
        return [tuple(m) for m in self.marks]

    def _tick(self, depth: int) -> None:
        self.nodes += 1
        if depth > self.max_depth:
            self.max_depth = depth
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise _BudgetExceeded()
        if self.nodes % _CHECK_INTERVAL == 0:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise _BudgetExceeded()
            if self.stop_event is not None and self.stop_event.is_set():
                raise _Stopped()

    def _reflection_gap(self) -> int:
        first = self.marks[0]
        return first[1] - first[0]

    def _bits(self, ruler: int, v: int) -> int:
        bits = 0
        for m in self.marks[ruler]:
            bits |= 1 << (v - m)
        return bits

    def _admissible(self, ruler: int, v: int) -> bool:
        marks = self.marks[ruler]
        if marks and self.masks[ruler] & self._bits(ruler, v):
            return False
        if not self.reflective or not self.marks[0]:
            return True
        size = len(marks)
        if self.placed + 1 == self.total and size >= 1:
            if ruler == 0 and size == 1:
                return True
            return v - marks[-1] >= self._reflection_gap()
        if self.i_count == 1 and self.j_marks >= 3 and size == self.j_marks - 2:
            # pour J = 3 cette marque fixe elle-même l'écart de tête
            gap = v - marks[0] if size == 1 else self._reflection_gap()
            return v <= self.top - gap
        return True

    def _choices(self, idx: int) -> List[int]:
        v = self.positions[idx]
        if self.symmetry:
            choices = [r for r in range(self.opened) if len(self.marks[r]) < self.j_marks and self._admissible(r, v)]
            if self.opened < self.i_count and self._admissible(self.opened, v):
                choices.append(self.opened)
        else:
            choices = [r for r in range(self.i_count) if len(self.marks[r]) < self.j_marks and self._admissible(r, v)]
        if not (self.anchored and idx == 0):
            choices.append(_SKIP)
        return choices

    def _feasible(self, idx: int) -> bool:
        remaining_slots = self.total - self.placed
        if len(self.positions) - idx < remaining_slots:
            return False
        v = self.positions[idx]
        for marks in self.marks:
            k = self.j_marks - len(marks)
            if k == 0:
                continue
            if marks:
                needed = max(marks[-1] + k * (k + 1) // 2, v + k * (k - 1) // 2)
            else:
                needed = v + k * (k - 1) // 2
            if needed > self.top:
                return False
        return True

    def _apply(self, ruler: int, v: int) -> None:
        if ruler == _SKIP:
            return
        self.masks[ruler] |= self._bits(ruler, v)
        if self.symmetry and ruler == self.opened:
            self.opened += 1
        self.marks[ruler].append(v)
        self.placed += 1

    def _undo(self, ruler: int, v: int) -> None:
        if ruler == _SKIP:
            return
        self.marks[ruler].pop()
        self.placed -= 1
        self.masks[ruler] ^= self._bits(ruler, v)
        if self.symmetry and not self.marks[ruler] and ruler == self.opened - 1:
            self.opened -= 1

    def search(self, idx: int = 0) -> bool:
        self._tick(idx)
        if self.placed == self.total:
            return True
        if idx >= len(self.positions) or not self._feasible(idx):
            return False
        v = self.positions[idx]
        for ruler in self._choices(idx):
            self._apply(ruler, v)
            if self.search(idx + 1):
                return True
            self._undo(ruler, v)
        return False

    def prefixes(self, depth: int) -> List[Tuple[int, ...]]:
        """Préfixes de choix admissibles de longueur depth (ou terminaux)."""
        found: List[Tuple[int, ...]] = []

        def walk(idx: int, path: List[int]) -> None:
            if len(path) == depth or self.placed == self.total or idx >= len(self.positions):
                found.append(tuple(path))
                return
            if not self._feasible(idx):
                return
            v = self.positions[idx]
            for ruler in self._choices(idx):
                self._apply(ruler, v)
                path.append(ruler)
                walk(idx + 1, path)
                path.pop()
                self._undo(ruler, v)

        walk(0, [])
        return found

    def replay(self, prefix: Sequence[int]) -> None:
        for idx, ruler in enumerate(prefix):
            self._apply(ruler, self.positions[idx])


def _solve_prefix(task: Dict[str, Any]) -> Tuple[str, Optional[List[Tuple[int, ...]]], int, int]:
    """Tâche de travail : rejoue un préfixe puis explore le sous-arbre."""
    bt = _Backtracker(
        task["i_count"], task["j_marks"], task["positions"], task["symmetry"],
        task["anchored"], task["reflective"], task["node_budget"], task["deadline"], task["stop_event"],
    )
    prefix = task["prefix"]
    bt.replay(prefix)
    try:
        if bt.search(len(prefix)):
            task["stop_event"].set()
            return SearchStatus.FOUND.value, bt.witness(), bt.nodes, bt.max_depth
        return SearchStatus.EXHAUSTED.value, None, bt.nodes, bt.max_depth
    except _BudgetExceeded:
        return SearchStatus.BUDGET_EXCEEDED.value, None, bt.nodes, bt.max_depth
    except _Stopped:
        return "stopped", None, bt.nodes, bt.max_depth


def _auto_depth(thread_count: int, n_positions: int) -> int:
    depth = 1
    while (depth < n_positions) and (2 ** depth) < 8 * thread_count:
        depth += 1
    return depth


def _build_witness(i_count: int, j_marks: int, n_span: int, rulers: Sequence[Sequence[int]]) -> DgrSystem:
    system = DgrSystem(i_count, j_marks, n_span, tuple(Ruler(tuple(r)) for r in rulers))
    report = verify_dgr(system)
    if not report.valid:
        raise AssertionError(f"témoin invalide produit par la recherche: {report.violations}")
    return system


def _run(
    i_count: int,
    j_marks: int,
    positions: Sequence[int],
    n_span: int,
    cfg: SearchConfig,
    anchored: bool,
    reflective: bool,
    deadline: Optional[float],
) -> SearchOutcome:
    started = time.monotonic()
    if cfg.thread_count == 1:
        bt = _Backtracker(i_count, j_marks, positions, cfg.symmetry_breaking, anchored, reflective, cfg.node_budget, deadline)
        try:
            found = bt.search()
        except _BudgetExceeded:
            stats = bt.stats()
            stats.elapsed = time.monotonic() - started
            return SearchOutcome(SearchStatus.BUDGET_EXCEEDED, None, stats)
        stats = bt.stats()
        stats.elapsed = time.monotonic() - started
        if found:
            return SearchOutcome(SearchStatus.FOUND, _build_witness(i_count, j_marks, n_span, bt.witness()), stats)
        return SearchOutcome(SearchStatus.EXHAUSTED, None, stats)
    return _run_parallel(i_count, j_marks, positions, n_span, cfg, anchored, reflective, deadline, started)


def _run_parallel(i_count, j_marks, positions, n_span, cfg, anchored, reflective, deadline, started) -> SearchOutcome:
    depth = cfg.split_depth or _auto_depth(cfg.thread_count, len(positions))
    splitter = _Backtracker(i_count, j_marks, positions, cfg.symmetry_breaking, anchored, reflective, None, None)
    prefixes = splitter.prefixes(depth)
    logger.debug("Découpage en %s préfixes (profondeur %s)", len(prefixes), depth)

    stats = SearchStats(tasks=len(prefixes))
    witness = None
    budget_hit = False
    with Manager() as manager:
        stop_event = manager.Event()
        tasks = [
            {
                "i_count": i_count, "j_marks": j_marks, "positions": tuple(positions),
                "symmetry": cfg.symmetry_breaking, "anchored": anchored, "reflective": reflective,
                "node_budget": cfg.node_budget, "deadline": deadline, "stop_event": stop_event,
                "prefix": prefix,
            }
            for prefix in prefixes
        ]
        with ProcessPoolExecutor(max_workers=cfg.thread_count) as executor:
            futures = [executor.submit(_solve_prefix, task) for task in tasks]
            for future in as_completed(futures):
                status, rulers, nodes, max_depth = future.result()
                stats.absorb(SearchStats(nodes=nodes, max_depth=max_depth))
                if status == SearchStatus.FOUND.value and witness is None:
                    witness = rulers
                elif status == SearchStatus.BUDGET_EXCEEDED.value:
                    budget_hit = True
                    stop_event.set()
    stats.elapsed = time.monotonic() - started
    if witness is not None:
        return SearchOutcome(SearchStatus.FOUND, _build_witness(i_count, j_marks, n_span, witness), stats)
    if budget_hit:
        return SearchOutcome(SearchStatus.BUDGET_EXCEEDED, None, stats)
    return SearchOutcome(SearchStatus.EXHAUSTED, None, stats)


def _deadline(cfg: SearchConfig) -> Optional[float]:
    return None if cfg.time_budget is None else time.monotonic() + cfg.time_budget


def exists_dgr(i_count: int, j_marks: int, n_span: int, cfg: Optional[SearchConfig] = None, deadline: Optional[float] = None) -> SearchOutcome:
    """
    Décide l'existence d'un (I, J, n)-DGR.

    Args:
        i_count: Nombre de règles I >= 1
        j_marks: Marques par règle J >= 1
        n_span: Étendue n
        cfg: Configuration (budgets, parallélisme, symétries)
        deadline: Échéance absolue (time.monotonic) partagée par l'appelant

    Returns:
        SearchOutcome ; FOUND implique un témoin vérifié
    """
    cfg = cfg or SearchConfig()
    if i_count < 1 or j_marks < 1:
        raise ValueError("I et J doivent être >= 1")
    if n_span < i_count * j_marks:
        return SearchOutcome(SearchStatus.EXHAUSTED)
    if deadline is None:
        deadline = _deadline(cfg)
    symmetry = cfg.symmetry_breaking
    outcome = _run(i_count, j_marks, range(1, n_span + 1), n_span, cfg, symmetry, symmetry, deadline)
    logger.debug("exists_dgr(%s, %s, %s) -> %s en %s noeuds", i_count, j_marks, n_span, outcome.status.value, outcome.stats.nodes)
    return outcome


def exists_dgr_in(i_count: int, j_marks: int, positions: Sequence[int], cfg: Optional[SearchConfig] = None, deadline: Optional[float] = None) -> SearchOutcome:
    """
    Existence de I règles disjointes à J marques dans un ensemble quelconque
    d'entiers positifs (ni ancrage ni réflexion, seulement l'ordre des minima).
    """
    cfg = cfg or SearchConfig()
    values = sorted(set(int(x) for x in positions))
    if any(x < 1 for x in values):
        raise ValueError("les positions doivent être des entiers positifs")
    if len(values) < i_count * j_marks:
        return SearchOutcome(SearchStatus.EXHAUSTED)
    if deadline is None:
        deadline = _deadline(cfg)
    return _run(i_count, j_marks, values, values[-1], cfg, False, False, deadline)


@dataclass
class MinNResult:
    value: Optional[int]
    witness: Optional[DgrSystem]
    status: SearchStatus
    stats: SearchStats
    refuted: List[int] = field(default_factory=list)
    lower_bound: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "status": self.status.value,
            "refuted": list(self.refuted),
            "lower_bound": self.lower_bound,
            "stats": self.stats.to_dict(),
        }


def _remaining(cfg: SearchConfig, used: int) -> SearchConfig:
    if cfg.node_budget is None:
        return cfg
    return replace(cfg, node_budget=max(cfg.node_budget - used, 1))


def min_n(i_count: int, j_marks: int, cfg: Optional[SearchConfig] = None) -> MinNResult:
    """
    Calcule H(I, J) en balayant n vers le haut depuis I*J.

    Le budget de temps est une échéance commune à tout le balayage ; le
    budget de noeuds est cumulé.

    Returns:
        MinNResult ; en cas de dépassement, value est None et lower_bound
        vaut le plus petit n non réfuté
    """
    cfg = cfg or SearchConfig()
    deadline = _deadline(cfg)
    stats = SearchStats()
    refuted: List[int] = []
    started = time.monotonic()
    n_span = i_count * j_marks
    while True:
        outcome = exists_dgr(i_count, j_marks, n_span, _remaining(cfg, stats.nodes), deadline)
        stats.absorb(outcome.stats)
        stats.tasks = max(stats.tasks, outcome.stats.tasks)
        stats.elapsed = time.monotonic() - started
        if outcome.status is SearchStatus.FOUND:
            if n_span not in outcome.witness.union():
                raise AssertionError(f"témoin minimal n'utilisant pas n = {n_span}")
            logger.info("H(%s, %s) = %s (%s noeuds)", i_count, j_marks, n_span, stats.nodes)
            return MinNResult(n_span, outcome.witness, SearchStatus.FOUND, stats, refuted, n_span)
        if outcome.status is SearchStatus.BUDGET_EXCEEDED or (
            cfg.node_budget is not None and stats.nodes >= cfg.node_budget
        ):
            logger.warning("Budget épuisé pour H(%s, %s): H >= %s", i_count, j_marks, n_span)
            status = SearchStatus.BUDGET_EXCEEDED
            lower = n_span + 1 if outcome.status is SearchStatus.EXHAUSTED else n_span
            if outcome.status is SearchStatus.EXHAUSTED:
                refuted.append(n_span)
            return MinNResult(None, None, status, stats, refuted, lower)
        refuted.append(n_span)
        n_span += 1


@dataclass
class CounterexampleOutcome:
    status: SearchStatus
    counterexample: Optional[Tuple[int, ...]]
    checked: int
    stats: SearchStats

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "counterexample": list(self.counterexample) if self.counterexample else None,
            "checked": self.checked,
            "stats": self.stats.to_dict(),
        }


def counterexample_search(i_count: int, j_marks: int, n_size: int, universe_max: int, cfg: Optional[SearchConfig] = None) -> CounterexampleOutcome:
    """
    Cherche un ensemble de n entiers de [1, universe_max] sans I règles de
    Golomb disjointes à J marques, ce qui prouverait Y(I, J) > n.

    Les ensembles sont énumérés dans l'ordre lexicographique ; on se limite
    à ceux qui contiennent 1 (l'existence est invariante par translation).

    Returns:
        FOUND avec le contre-exemple, EXHAUSTED si aucun dans l'univers
        borné (aucune conclusion sur Y), ou BUDGET_EXCEEDED
    """
    cfg = cfg or SearchConfig()
    if universe_max < n_size or n_size < 1:
        raise ValueError("universe_max doit être >= n >= 1")
    # un sous-problème par ensemble : pas de découpage parallèle ici
    inner = replace(cfg, thread_count=1)
    deadline = _deadline(cfg)
    stats = SearchStats()
    checked = 0
    started = time.monotonic()
    for rest in itertools.combinations(range(2, universe_max + 1), n_size - 1):
        candidate = (1,) + rest
        outcome = exists_dgr_in(i_count, j_marks, candidate, _remaining(inner, stats.nodes), deadline)
        stats.absorb(outcome.stats)
        checked += 1
        stats.elapsed = time.monotonic() - started
        if outcome.status is SearchStatus.EXHAUSTED:
            logger.info("Contre-exemple pour Y(%s, %s) > %s: %s", i_count, j_marks, n_size, candidate)
            return CounterexampleOutcome(SearchStatus.FOUND, candidate, checked, stats)
        if outcome.status is SearchStatus.BUDGET_EXCEEDED or (
            cfg.node_budget is not None and stats.nodes >= cfg.node_budget
        ):
            return CounterexampleOutcome(SearchStatus.BUDGET_EXCEEDED, None, checked, stats)
    return CounterexampleOutcome(SearchStatus.EXHAUSTED, None, checked, stats)


def naive_exists_dgr(i_count: int, j_marks: int, n_span: int) -> Optional[DgrSystem]:
    """Énumérateur de référence : I sous-ensembles de Golomb disjoints de {1..n}."""
    if i_count * j_marks > n_span:
        return None
    candidates = [
        Ruler(combo)
        for combo in itertools.combinations(range(1, n_span + 1), j_marks)
        if is_golomb(Ruler(combo))
    ]

    def pick(start: int, chosen: List[Ruler], used: set) -> Optional[List[Ruler]]:
        if len(chosen) == i_count:
            return list(chosen)
        for idx in range(start, len(candidates)):
            ruler = candidates[idx]
            if used.isdisjoint(ruler.marks):
                chosen.append(ruler)
                result = pick(idx + 1, chosen, used | set(ruler.marks))
                if result is not None:
                    return result
                chosen.pop()
        return None

    rulers = pick(0, [], set())
    if rulers is None:
        return None
    return DgrSystem(i_count, j_marks, n_span, tuple(rulers))
