"""
Exceptions du toolkit DGR.

Toutes dérivent de DgrError (elle-même une ValueError) pour que les appelants
puissent attraper une seule famille d'erreurs.
"""

from typing import Any, List, Optional, Sequence


class DgrError(ValueError):
    """Erreur de base du toolkit."""


class InvalidRulerError(DgrError):
    """Règle mal formée (marques négatives, doublons) ou translation impossible."""


class FormatError(DgrError):
    """Erreur de lecture d'un fichier règle / DGR, avec position."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f"ligne {line}"
            if column is not None:
                location += f", colonne {column}"
            location += ": "
        super().__init__(f"{location}{message}")


class ConstructionError(DgrError):
    """Entrée refusée par une construction, ou sortie qui ne passe pas verify_dgr."""

    def __init__(self, message: str, violations: Optional[Sequence[Any]] = None):
        self.violations: List[Any] = list(violations or [])
        if self.violations:
            details = "; ".join(str(v) for v in self.violations)
            message = f"{message} ({details})"
        super().__init__(message)


class FieldError(DgrError):
    """Paramètres de corps fini invalides (p non premier, taille hors limite...)."""


class SingerVerificationError(DgrError):
    """L'ensemble de Singer calculé n'est pas parfait : bug d'implémentation."""


class MissingWitnessError(DgrError):
    """Un témoin nécessaire à la matérialisation n'est pas stocké."""


class NonConstructiveChainError(DgrError):
    """La chaîne de provenance passe par une règle non constructive."""


class BoundsContradictionError(DgrError):
    """Borne supérieure strictement inférieure à la borne inférieure."""

    def __init__(
        self,
        key,
        lower: int,
        upper: int,
        lower_chain: Sequence[str],
        upper_chain: Sequence[str],
        quantity: str = "H",
    ):
        self.key = key
        self.quantity = quantity
        self.lower = lower
        self.upper = upper
        self.lower_chain = list(lower_chain)
        self.upper_chain = list(upper_chain)
        super().__init__(
            f"Contradiction sur {quantity}{tuple(key)}: borne sup {upper} < borne inf {lower}"
        )

    def dump(self) -> str:
        """Rend les deux chaînes de provenance, une étape par ligne."""
        lines = [str(self), "Provenance de la borne inférieure:"]
        lines.extend(f"  {step}" for step in self.lower_chain)
        lines.append("Provenance de la borne supérieure:")
        lines.extend(f"  {step}" for step in self.upper_chain)
        return "\n".join(lines)
