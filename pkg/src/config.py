"""
Configuration globale du toolkit DGR.

Les valeurs proviennent des variables d'environnement (fichier .env accepté),
les options de la ligne de commande ont priorité.
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Paramètres lus depuis l'environnement."""

    default_threads: int = 1
    gf_size_limit: int = 4096
    witness_dir: str = "./witnesses"
    log_level: str = "INFO"
    seed_max_i: int = 3
    seed_max_j: int = 5
    split_depth: int = 0


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Variable d'environnement {name} invalide: {raw!r}") from None


def get_settings() -> Settings:
    """
    Relit l'environnement et retourne les paramètres courants.

    Returns:
        Settings construit à partir de DGR_THREADS, DGR_GF_LIMIT,
        DGR_WITNESS_DIR, DGR_LOG_LEVEL, DGR_SEED_MAX_I, DGR_SEED_MAX_J
        et DGR_SPLIT_DEPTH.
    """
    threads = _int_env("DGR_THREADS", 1)
    if threads < 1:
        raise ValueError("DGR_THREADS doit être >= 1")
    return Settings(
        default_threads=threads,
        gf_size_limit=_int_env("DGR_GF_LIMIT", 4096),
        witness_dir=os.getenv("DGR_WITNESS_DIR", "./witnesses"),
        log_level=os.getenv("DGR_LOG_LEVEL", "INFO").upper(),
        seed_max_i=_int_env("DGR_SEED_MAX_I", 3),
        seed_max_j=_int_env("DGR_SEED_MAX_J", 5),
        split_depth=_int_env("DGR_SPLIT_DEPTH", 0),
    )
