"""
Stockage de témoins DGR adressés par contenu.

Chaque témoin est écrit dans <hash>.dgr, le hash étant celui de sa forme
canonique ; un index JSON garde l'en-tête et la date d'ajout.
"""

import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

import pandas as pd

from .core import DgrSystem, canonical_hash, verify_dgr
from .exceptions import ConstructionError, FormatError, MissingWitnessError
from .formats import emit_dgr, parse_dgr

logger = logging.getLogger(__name__)


class WitnessStore:
    """
    Répertoire de témoins vérifiés.

    Un témoin qui ne passe pas verify_dgr est refusé ; deux témoins de même
    forme canonique partagent la même entrée.
    """

    def __init__(self, store_dir: str = "./witnesses"):
        """
        Initialise le stockage.

        Args:
            store_dir: Répertoire des fichiers .dgr et de l'index
        """
        self.store_dir = store_dir
        self.index_file = os.path.join(store_dir, "index.json")
        self.index: Dict[str, Dict[str, Any]] = {}

        os.makedirs(store_dir, exist_ok=True)
        self._load_index()
        logger.info("Stockage de témoins initialisé avec %s entrées", len(self.index))

    def _load_index(self) -> None:
        try:
            if os.path.exists(self.index_file):
                with open(self.index_file, "r", encoding="utf-8") as f:
                    self.index = json.load(f)
            else:
                self.index = {}
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("Index illisible (%s), reconstruction depuis les fichiers", e)
            self.index = self._rebuild_index()

    def _rebuild_index(self) -> Dict[str, Dict[str, Any]]:
        index = {}
        for name in sorted(os.listdir(self.store_dir)):
            if not name.endswith(".dgr"):
                continue
            key = name[:-4]
            try:
                system = self._read(key)
            except (OSError, FormatError) as e:
                logger.warning("Témoin %s ignoré: %s", name, e)
                continue
            index[key] = {"header": list(system.header), "added": None}
        return index

    def _save_index(self) -> None:
        try:
            with open(self.index_file, "w", encoding="utf-8") as f:
                json.dump(self.index, f, ensure_ascii=False, indent=2)
        except OSError as e:
            logger.error("Erreur lors de la sauvegarde de l'index: %s", e)

    def _path(self, key: str) -> str:
        return os.path.join(self.store_dir, f"{key}.dgr")

    def _read(self, key: str) -> DgrSystem:
        with open(self._path(key), "r", encoding="utf-8") as f:
            return parse_dgr(f.read())

    def put(self, system: DgrSystem) -> str:
        """
        Enregistre un témoin vérifié.

        Returns:
            Référence (hash canonique) du témoin
        """
        report = verify_dgr(system)
        if not report.valid:
            raise ConstructionError(f"témoin {system.header} refusé", report.violations)
        key = canonical_hash(system)
        if key in self.index and os.path.exists(self._path(key)):
            return key
        with open(self._path(key), "w", encoding="utf-8") as f:
            f.write(emit_dgr(system))
        self.index[key] = {"header": list(system.header), "added": datetime.now().isoformat()}
        self._save_index()
        logger.info("Témoin %s stocké sous %s", system.header, key)
        return key

    def get(self, key: str) -> DgrSystem:
        """
        Relit un témoin.

        Raises:
            MissingWitnessError: référence inconnue ou fichier absent
        """
        if not os.path.exists(self._path(key)):
            raise MissingWitnessError(f"témoin {key} absent de {self.store_dir}")
        try:
            return self._read(key)
        except FormatError as e:
            raise MissingWitnessError(f"témoin {key} illisible: {e}") from e

    def contains(self, key: str) -> bool:
        return key in self.index and os.path.exists(self._path(key))

    def size(self) -> int:
        return len(self.index)

    def find(self, header) -> Optional[str]:
        """Première référence (ordre des clés) dont l'en-tête correspond."""
        wanted = list(header)
        for key in sorted(self.index):
            if self.index[key]["header"] == wanted:
                return key
        return None

    def to_dataframe(self) -> pd.DataFrame:
        rows: List[Dict[str, Any]] = [
            {"ref": key, "i": entry["header"][0], "j": entry["header"][1], "n": entry["header"][2], "added": entry["added"]}
            for key, entry in sorted(self.index.items())
        ]
        return pd.DataFrame(rows, columns=["ref", "i", "j", "n", "added"])
