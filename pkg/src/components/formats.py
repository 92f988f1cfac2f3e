"""
Formats texte et JSON des règles et des systèmes DGR.

Format règle : une règle par ligne, marques en base 10 séparées par un seul
espace, croissantes. Les lignes commençant par '#' sont des commentaires.
Format DGR : première ligne utile "I J n", suivie d'exactement I lignes règle.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from .core import DgrSystem, Ruler
from .exceptions import FormatError, InvalidRulerError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

PathLike = Union[str, Path]


def _content_lines(text: str) -> List[Tuple[int, str]]:
    """Lignes non vides et non commentées, avec leur numéro (1-based)."""
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("#") or raw.strip() == "":
            continue
        lines.append((number, raw))
    return lines


def _parse_integers(raw: str, line: int) -> List[int]:
    if raw != raw.strip():
        column = 1 if raw[:1].isspace() else len(raw.rstrip()) + 1
        raise FormatError("espaces en début ou fin de ligne", line, column)
    values = []
    column = 1
    for token in raw.split(" "):
        if token == "":
            raise FormatError("séparateur attendu: un seul espace", line, column)
        if not (token.isascii() and token.isdigit()):
            raise FormatError(f"entier attendu, lu {token!r}", line, column)
        values.append(int(token))
        column += len(token) + 1
    return values


def _parse_ruler_line(raw: str, line: int) -> Ruler:
    marks = _parse_integers(raw, line)
    for idx in range(1, len(marks)):
        if marks[idx] <= marks[idx - 1]:
            column = len(" ".join(str(m) for m in marks[:idx])) + 2
            raise FormatError("marques non strictement croissantes", line, column)
    try:
        return Ruler(tuple(marks))
    except InvalidRulerError as exc:
        raise FormatError(str(exc), line, 1) from exc


def emit_ruler(r: Ruler) -> str:
    return " ".join(str(m) for m in r.marks)


def parse_rulers(text: str) -> List[Ruler]:
    """Lit un fichier de règles (une par ligne)."""
    return [_parse_ruler_line(raw, number) for number, raw in _content_lines(text)]


def emit_rulers(rulers) -> str:
    return "".join(emit_ruler(r) + "\n" for r in rulers)


def parse_dgr(text: str) -> DgrSystem:
    """
    Lit un système DGR au format texte.

    Args:
        text: Contenu du fichier

    Returns:
        DgrSystem non vérifié (verify_dgr reste à la charge de l'appelant)

    Raises:
        FormatError: en-tête absent ou mal formé, nombre de lignes incorrect
    """
    lines = _content_lines(text)
    if not lines:
        raise FormatError("en-tête 'I J n' manquant", 1, 1)
    header_line, header_raw = lines[0]
    header = _parse_integers(header_raw, header_line)
    if len(header) != 3:
        raise FormatError(f"en-tête 'I J n' attendu, {len(header)} valeurs lues", header_line, 1)
    i_count, j_marks, n_span = header
    body = lines[1:]
    if len(body) != i_count:
        where = body[i_count][0] if len(body) > i_count else (body[-1][0] + 1 if body else header_line + 1)
        raise FormatError(f"{i_count} règles annoncées, {len(body)} lues", where, 1)
    rulers = tuple(_parse_ruler_line(raw, number) for number, raw in body)
    return DgrSystem(i_count, j_marks, n_span, rulers)


def emit_dgr(s: DgrSystem) -> str:
    """Écrit un système au format texte canonique (sans commentaire)."""
    return f"{s.i_count} {s.j_marks} {s.n_span}\n" + emit_rulers(s.rulers)


def system_to_dict(s: DgrSystem) -> Dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "header": [s.i_count, s.j_marks, s.n_span],
        "rulers": [list(r.marks) for r in s.rulers],
    }


def system_from_dict(data: Dict[str, Any]) -> DgrSystem:
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise FormatError(f"format_version {version!r} non supportée")
    try:
        i_count, j_marks, n_span = (int(v) for v in data["header"])
        rulers = tuple(Ruler(tuple(int(m) for m in marks)) for marks in data["rulers"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"système JSON invalide: {exc}") from exc
    return DgrSystem(i_count, j_marks, n_span, rulers)


def read_dgr_file(path: PathLike) -> DgrSystem:
    """Lit un fichier .dgr ou .json selon l'extension."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            return system_from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(exc.msg, exc.lineno, exc.colno) from exc
    return parse_dgr(text)


def write_dgr_file(path: PathLike, s: DgrSystem) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".json":
        path.write_text(json.dumps(system_to_dict(s), indent=2) + "\n", encoding="utf-8")
    else:
        path.write_text(emit_dgr(s), encoding="utf-8")
    logger.debug("Système %s écrit dans %s", s.header, path)
    return path
