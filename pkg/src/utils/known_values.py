"""
Valeurs connues utilisées comme graines et comme oracles.

Regroupe les faits du registre (valeurs pour les puissances de premiers),
les valeurs triviales (J <= 2) et les longueurs publiées des règles de
Golomb optimales G(k) pour k <= 27.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

from src.components.gf import is_prime_power

# G(k) pour k = 1..27 (recherches exhaustives publiées)
OPTIMAL_GOLOMB_LENGTHS: Dict[int, int] = {
    1: 0, 2: 1, 3: 3, 4: 6, 5: 11, 6: 17, 7: 25, 8: 34, 9: 44,
    10: 55, 11: 72, 12: 85, 13: 106, 14: 127, 15: 151, 16: 177,
    17: 199, 18: 216, 19: 246, 20: 283, 21: 333, 22: 356, 23: 372,
    24: 425, 25: 480, 26: 492, 27: 553,
}


@dataclass(frozen=True)
class RegistryFact:
    """
    Fait du registre sur H(i, j).

    kind vaut "exact" (borne inférieure et supérieure) ou "upper".
    """

    i: int
    j: int
    value: int
    kind: str
    p: int
    statement: str


def optimal_golomb_length(k: int) -> Optional[int]:
    return OPTIMAL_GOLOMB_LENGTHS.get(k)


def prime_power_facts(max_i: int, max_j: int) -> List[RegistryFact]:
    """
    Faits pour chaque puissance de premier p dont les cellules tombent dans
    la table : H(p+1, p) = p^2+p, H(p, p-1) <= p^2-2, H(p-1, p) <= p^2-1.
    """
    facts: List[RegistryFact] = []
    limit = max(max_i, max_j) + 1
    for p in range(2, limit + 1):
        if not is_prime_power(p):
            continue
        candidates = [
            (p + 1, p, p * p + p, "exact", "H(p+1, p) = p^2+p"),
            (p, p - 1, p * p - 2, "upper", "H(p, p-1) <= p^2-2"),
            (p - 1, p, p * p - 1, "upper", "H(p-1, p) <= p^2-1"),
        ]
        for i, j, value, kind, statement in candidates:
            if 1 <= i <= max_i and 1 <= j <= max_j:
                facts.append(RegistryFact(i, j, value, kind, p, statement))
    return facts


def trivial_h(i: int, j: int) -> Optional[int]:
    """H(I, 1) = I et H(I, 2) = 2I ; None au-delà."""
    if j == 1:
        return i
    if j == 2:
        return 2 * i
    return None


def trivial_y(i: int, j: int) -> Optional[int]:
    """Tout ensemble de jI entiers se découpe en I règles quand j <= 2."""
    return trivial_h(i, j)
