"""
Constructions certifiées de systèmes DGR.

Chaque construction est une fonction totale sur ses entrées valides : elle
vérifie ses préconditions, construit le système, le passe à verify_dgr,
contrôle l'en-tête promis par l'inégalité correspondante et retourne le
système accompagné de sa trace.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

from .core import (
    DgrSystem,
    Gap,
    Header,
    Ruler,
    find_gaps,
    is_golomb,
    reflect_system,
    translate,
    verify_dgr,
)
from .exceptions import ConstructionError, FieldError
from .formats import FORMAT_VERSION
from .gf import DEFAULT_SIZE_LIMIT, singer_difference_set

logger = logging.getLogger(__name__)


class RuleName(Enum):
    CONCAT = "concat"
    THM3_EXTEND = "thm3-extend"
    THM3_DOUBLE = "thm3-double"
    GAP_MERGE = "gap-merge"
    GAP_DOUBLE = "gap-double"
    SHIFT_PAIR = "shift-pair"
    SINGER = "singer"


@dataclass(frozen=True)
class ConstructionTrace:
    rule_name: RuleName
    inputs: Tuple[Header, ...]
    claimed_output: Header
    case_taken: Optional[str] = None
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "rule": self.rule_name.value,
            "case": self.case_taken,
            "params": dict(self.parameters),
            "input_headers": [list(h) for h in self.inputs],
            "output_header": list(self.claimed_output),
        }


@dataclass(frozen=True)
class ConstructionResult:
    system: DgrSystem
    trace: ConstructionTrace


def _require_valid(s: DgrSystem, role: str) -> None:
    report = verify_dgr(s)
    if not report.valid:
        raise ConstructionError(f"entrée {role} invalide {s.header}", report.violations)


def _finish(rulers: Sequence[Ruler], trace: ConstructionTrace) -> ConstructionResult:
    i_count, j_marks, n_span = trace.claimed_output
    system = DgrSystem(i_count, j_marks, n_span, tuple(rulers))
    report = verify_dgr(system)
    if not report.valid:
        raise ConstructionError(f"sortie {trace.rule_name.value} invalide {system.header}", report.violations)
    logger.debug("%s -> %s (cas %s)", trace.rule_name.value, system.header, trace.case_taken)
    return ConstructionResult(system, trace)


def concat_compose(sa: DgrSystem, sb: DgrSystem) -> ConstructionResult:
    """
    H(a+b, J) <= H(a, J) + H(b, J) : sb est translaté au-dessus de sa.

    Raises:
        ConstructionError: J différents ou entrées invalides
    """
    if sa.j_marks != sb.j_marks:
        raise ConstructionError(f"J différents: {sa.j_marks} et {sb.j_marks}")
    _require_valid(sa, "sa")
    _require_valid(sb, "sb")
    na = sa.n_span
    rulers = list(sa.rulers) + [translate(r, na) for r in sb.rulers]
    trace = ConstructionTrace(
        RuleName.CONCAT,
        (sa.header, sb.header),
        (sa.i_count + sb.i_count, sa.j_marks, na + sb.n_span),
        parameters={"a": sa.i_count, "b": sb.i_count, "n": na, "m": sb.n_span},
    )
    return _finish(rulers, trace)


def thm3_extend(sa: DgrSystem, sb: DgrSystem) -> ConstructionResult:
    """
    H(a+b, J) <= H(a, J) + H(b, J-1) + b.

    Les règles X_i de sa sont translatées de m = n_b (W_i = X_i + m) ; chaque
    règle Y_i de sb reçoit la marque n + m + i (U_i).

    Args:
        sa: (a, J, n)-DGR
        sb: (b, J-1, m)-DGR, éventuellement vide (b = 0)

    Raises:
        ConstructionError: J incompatibles, ou n < m
    """
    if sa.j_marks != sb.j_marks + 1:
        raise ConstructionError(f"J attendus J et J-1, reçus {sa.j_marks} et {sb.j_marks}")
    n, m = sa.n_span, sb.n_span
    if n < m:
        raise ConstructionError(f"n_a = {n} < n_b = {m}: construction refusée")
    _require_valid(sa, "sa")
    _require_valid(sb, "sb")
    b = sb.i_count
    w_rulers = [translate(r, m) for r in sa.rulers]
    u_rulers = [Ruler(r.marks + (n + m + idx,)) for idx, r in enumerate(sb.rulers, start=1)]
    trace = ConstructionTrace(
        RuleName.THM3_EXTEND,
        (sa.header, sb.header),
        (sa.i_count + b, sa.j_marks, n + m + b),
        parameters={"a": sa.i_count, "b": b, "n": n, "m": m},
    )
    return _finish(w_rulers + u_rulers, trace)


def thm3_double(sb: DgrSystem) -> ConstructionResult:
    """
    H(2a, J) <= 2 H(a, J-1) + 2a.

    Disposition sur [1, 2m+2a] : marques basses {1..a}, première copie
    Y_i + a, seconde copie Y_i + a + m, marques hautes {2m+a+1..2m+2a}.
    U_i = (Y_i + a) ∪ {2m+a+i}, V_i = (Y_i + a + m) ∪ {i}.
    """
    _require_valid(sb, "sb")
    a, m = sb.i_count, sb.n_span
    u_rulers = [Ruler(translate(r, a).marks + (2 * m + a + idx,)) for idx, r in enumerate(sb.rulers, start=1)]
    v_rulers = [Ruler((idx,) + translate(r, a + m).marks) for idx, r in enumerate(sb.rulers, start=1)]
    trace = ConstructionTrace(
        RuleName.THM3_DOUBLE,
        (sb.header,),
        (2 * a, sb.j_marks + 1, 2 * m + 2 * a),
        parameters={"a": a, "m": m},
    )
    return _finish(u_rulers + v_rulers, trace)


def _check_gap(sa: DgrSystem, gap: Gap) -> None:
    n = sa.n_span
    if gap.width < 1 or gap.t_offset < 0 or gap.t_offset + gap.width > n:
        raise ConstructionError(f"trou ({gap.t_offset}, {gap.width}) hors de [1, {n}]")
    occupied = set(sa.union())
    taken = [x for x in gap.positions if x in occupied]
    if taken:
        raise ConstructionError(f"trou ({gap.t_offset}, {gap.width}) non vide: marques {taken}")
    if gap not in find_gaps(sa):
        raise ConstructionError(f"trou ({gap.t_offset}, {gap.width}) non maximal dans {sa.header}")


def _orient(sa: DgrSystem, gap: Gap) -> Tuple[DgrSystem, Gap, bool]:
    """Réfléchit sa si nécessaire pour avoir t <= n - w - t."""
    n, t, w = sa.n_span, gap.t_offset, gap.width
    if t <= n - w - t:
        return sa, gap, False
    return reflect_system(sa), Gap(n - t - w, w), True


def gap_merge(sa: DgrSystem, gap: Gap, sb: DgrSystem) -> ConstructionResult:
    """
    H(a+b, J) <= H(a, J) + H(b, J) - w en insérant sb dans un trou de sa.

    Après réflexion éventuelle (t <= n-w-t) :
      cas 1 (n-w-t <= m) : sb occupe t+1..t+m, la partie haute de sa monte de m-w ;
      cas 2 (sinon) : sa inchangé, les w marques hautes de sb tombent dans le
      trou et ses marques basses sont placées au-dessus de n.

    Args:
        sa: (a, J, n)-DGR contenant le trou
        gap: Trou maximal de sa (un élément de find_gaps(sa))
        sb: (b, J, m)-DGR

    Returns:
        ConstructionResult d'en-tête (a+b, J, n+m-w)
    """
    if sa.j_marks != sb.j_marks:
        raise ConstructionError(f"J différents: {sa.j_marks} et {sb.j_marks}")
    _require_valid(sa, "sa")
    _require_valid(sb, "sb")
    _check_gap(sa, gap)
    original_gap = gap
    sa, gap, reflected = _orient(sa, gap)
    n, m = sa.n_span, sb.n_span
    t, w = gap.t_offset, gap.width

    if n - w - t <= m:
        case = "case-1"
        a_rulers = [Ruler(tuple(x if x <= t else x + m - w for x in r.marks)) for r in sa.rulers]
        b_rulers = [translate(r, t) for r in sb.rulers]
    else:
        case = "case-2"
        if w > m:
            raise ConstructionError(f"cas 2 impossible: w = {w} > m = {m}")
        low = m - w
        a_rulers = list(sa.rulers)
        b_rulers = [Ruler(tuple(n + x if x <= low else t + x - low for x in r.marks)) for r in sb.rulers]

    trace = ConstructionTrace(
        RuleName.GAP_MERGE,
        (sa.header, sb.header),
        (sa.i_count + sb.i_count, sa.j_marks, n + m - w),
        case_taken=case,
        parameters={
            "a": sa.i_count, "b": sb.i_count, "n": n, "m": m,
            "t": original_gap.t_offset, "w": w, "t_oriented": t, "reflected": reflected,
        },
    )
    return _finish(a_rulers + b_rulers, trace)


def gap_double(sa: DgrSystem, gap: Gap) -> ConstructionResult:
    """
    H(2a, J) <= 2 H(a, J) - 2w.

    Première copie : partie basse [1, t] inchangée, marques hautes
    t+w+y -> n-w+y. Seconde copie : image de la première par
    j -> 2n-2w+1-j.
    """
    _require_valid(sa, "sa")
    _check_gap(sa, gap)
    original_gap = gap
    sa, gap, reflected = _orient(sa, gap)
    n, t, w = sa.n_span, gap.t_offset, gap.width
    span = 2 * n - 2 * w
    shift = n - 2 * w - t
    first = [Ruler(tuple(x if x <= t else x + shift for x in r.marks)) for r in sa.rulers]
    second = [Ruler(tuple(span + 1 - x for x in r.marks)) for r in first]
    trace = ConstructionTrace(
        RuleName.GAP_DOUBLE,
        (sa.header,),
        (2 * sa.i_count, sa.j_marks, span),
        parameters={"a": sa.i_count, "n": n, "t": original_gap.t_offset, "w": w, "t_oriented": t, "reflected": reflected},
    )
    return _finish(first + second, trace)


def shift_pair(a_ruler: Ruler, n: int) -> ConstructionResult:
    """
    H(2, J-1) <= H(1, J) + 1 à partir de A et A+1.

    A et A+1 ont au plus un élément commun (une seule différence 1). Sans
    élément commun on retire le maximum de chacune ; sinon on retire
    l'élément commun c de A et n+1 de A+1.

    Args:
        a_ruler: Règle de Golomb à J >= 2 marques dans [1, n], de maximum n
        n: Étendue

    Raises:
        ConstructionError: max(A) != n, règle non Golomb ou plusieurs éléments communs
    """
    marks = a_ruler.marks
    if len(marks) < 2:
        raise ConstructionError("shift_pair demande au moins 2 marques")
    if marks[0] < 1 or marks[-1] != n:
        raise ConstructionError(f"max(A) = {marks[-1]} différent de n = {n} ou marque < 1")
    if not is_golomb(a_ruler):
        raise ConstructionError(f"{a_ruler} n'est pas une règle de Golomb")
    shifted = translate(a_ruler, 1)
    common = sorted(set(marks) & set(shifted.marks))
    if len(common) > 1:
        raise ConstructionError(f"plusieurs éléments communs {common}: entrée corrompue")
    if common:
        c = common[0]
        first = Ruler(tuple(x for x in marks if x != c))
        second = Ruler(tuple(x for x in shifted.marks if x != n + 1))
        case = "common-element"
    else:
        c = None
        first = Ruler(marks[:-1])
        second = Ruler(shifted.marks[:-1])
        case = "disjoint"
    j_marks = len(marks)
    trace = ConstructionTrace(
        RuleName.SHIFT_PAIR,
        ((1, j_marks, n),),
        (2, j_marks - 1, n + 1),
        case_taken=case,
        parameters={"n": n, "common": c},
    )
    return _finish([first, second], trace)


@dataclass(frozen=True)
class SingerRuler:
    ruler: Ruler
    modulus: int
    residues: Tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.ruler) - 1

    def as_system(self) -> DgrSystem:
        """Vue 1-based : (1, q+1, longueur+1)."""
        shifted = translate(self.ruler, 1)
        return DgrSystem(1, len(shifted), self.ruler.length + 1, (shifted,))


def singer_ruler(q: int, limit: int = DEFAULT_SIZE_LIMIT) -> SingerRuler:
    """
    Règle de Golomb à q+1 marques issue de l'ensemble de Singer.

    Parmi les translations modulo q^2+q+1 ramenées à 0, on garde celle de
    longueur minimale (égalité départagée lexicographiquement).

    Raises:
        FieldError: q n'est pas une puissance de premier ou hors limite
    """
    singer = singer_difference_set(q, limit)
    v = singer.modulus
    rotations = [tuple(sorted((r - base) % v for r in singer.residues)) for base in singer.residues]
    best = min(rotations, key=lambda marks: (marks[-1], marks))
    ruler = Ruler(best)
    if not is_golomb(ruler):
        raise FieldError(f"rotation {best} non Golomb")  # pragma: no cover
    logger.info("Règle de Singer q=%s: %s (longueur %s)", q, ruler, ruler.length)
    return SingerRuler(ruler, v, singer.residues)


def singer_trace(result: SingerRuler) -> ConstructionTrace:
    return ConstructionTrace(
        RuleName.SINGER,
        (),
        result.as_system().header,
        parameters={"q": result.q, "modulus": result.modulus},
    )
