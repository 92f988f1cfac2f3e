"""
Générateur d'instances aléatoires pour les tests de propriétés.

Produit des règles de Golomb et des systèmes DGR valides, reproductibles à
partir d'une graine.
"""

from typing import List, Optional

import numpy as np

from src.components.core import DgrSystem, Ruler, find_gaps, is_golomb


class InstanceGenerator:
    """Générateur d'instances DGR valides."""

    def __init__(self, seed: int = 42):
        """
        Initialise le générateur avec une graine pour la reproductibilité.

        Args:
            seed: Graine du générateur numpy
        """
        self.rng = np.random.default_rng(seed)

    def golomb_ruler(self, marks: int, span: int, start: int = 1, forbidden=()) -> Optional[Ruler]:
        """
        Tire une règle de Golomb à `marks` marques dans [start, start+span-1].

        Construction gloutonne dans un ordre aléatoire ; None si l'intervalle
        ne suffit pas après quelques essais.
        """
        blocked = set(forbidden)
        pool = np.arange(start, start + span)
        for _ in range(20):
            chosen: List[int] = []
            diffs = set()
            for x in self.rng.permutation(pool):
                x = int(x)
                if x in blocked:
                    continue
                new = {abs(x - y) for y in chosen}
                if new & diffs or len(new) < len(chosen):
                    continue
                chosen.append(x)
                diffs |= new
                if len(chosen) == marks:
                    return Ruler(tuple(chosen))
        return None

    def system(self, i_count: int, j_marks: int, slack: Optional[int] = None) -> DgrSystem:
        """
        Tire un (I, J, n)-DGR valide, n étant ensuite réduit au maximum utilisé.

        Args:
            i_count: Nombre de règles
            j_marks: Marques par règle
            slack: Positions disponibles au-delà de J*J par règle (tirées si None)
        """
        while True:
            extra = int(self.rng.integers(0, 3 * j_marks + 1)) if slack is None else slack
            span = i_count * (j_marks * j_marks + extra)
            rulers: List[Ruler] = []
            used = set()
            for _ in range(i_count):
                ruler = self.golomb_ruler(j_marks, span, forbidden=used)
                if ruler is None:
                    break
                rulers.append(ruler)
                used |= set(ruler.marks)
            if len(rulers) == i_count:
                top = max(used) if used else 0
                return DgrSystem(i_count, j_marks, max(top, i_count * j_marks), tuple(rulers))

    def system_with_gap(self, i_count: int, j_marks: int) -> DgrSystem:
        """Système tiré jusqu'à ce qu'il possède au moins un trou."""
        while True:
            s = self.system(i_count, j_marks)
            if find_gaps(s):
                return s

    def tight_ruler(self, j_marks: int) -> Ruler:
        """Règle de Golomb commençant à 1 (son maximum sert d'étendue)."""
        while True:
            ruler = self.golomb_ruler(j_marks, j_marks * j_marks + int(self.rng.integers(0, 2 * j_marks + 1)))
            if ruler is None:
                continue
            shifted = Ruler(tuple(m - ruler.marks[0] + 1 for m in ruler.marks))
            if is_golomb(shifted):
                return shifted
