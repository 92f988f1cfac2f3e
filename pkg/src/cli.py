"""
Interface en ligne de commande de la boîte à outils DGR.

Sous-commandes : verify, search, construct, singer, bounds, check.
Codes de sortie : 0 succès (valide, trouvé), 1 résultat négatif (invalide,
épuisé, violé), 2 erreur d'usage ou de lecture, 3 budget épuisé.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from src.components.bounds import (
    BoundsTable,
    materialize_witness,
    propagate,
    regularity_report,
    search_seeds,
    seed_table,
    square_cell_annotations,
)
from src.components.conjectures import (
    BUDGET_EXCEEDED,
    NOT_APPLICABLE,
    VIOLATED,
    ConjectureReport,
    check_conjecture1,
    check_conjecture2,
    check_conjecture3,
    check_conjecture4,
    check_conjecture5,
    check_conjecture6,
)
from src.components.constructions import (
    concat_compose,
    gap_double,
    gap_merge,
    shift_pair,
    singer_ruler,
    singer_trace,
    thm3_double,
    thm3_extend,
)
from src.components.core import DgrSystem, Gap, largest_gap, verify_dgr
from src.components.exceptions import (
    BoundsContradictionError,
    ConstructionError,
    DgrError,
    FormatError,
)
from src.components.formats import FORMAT_VERSION, read_dgr_file, system_to_dict, write_dgr_file
from src.components.search import SearchConfig, SearchStatus, counterexample_search, exists_dgr, min_n
from src.components.witness_store import WitnessStore
from src.config import Settings, get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

_STATUS_CODES = {
    SearchStatus.FOUND: EXIT_OK,
    SearchStatus.EXHAUSTED: EXIT_NEGATIVE,
    SearchStatus.BUDGET_EXCEEDED: EXIT_BUDGET,
}


class _Parser(argparse.ArgumentParser):
    """argparse qui lève au lieu de quitter, pour que run() garde la main."""

    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _say(args, text: str = "") -> None:
    if not args.quiet:
        print(text)


def _write_json(path: Optional[str], payload: Dict[str, Any]) -> None:
    if not path:
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _emit_stats(args, stats: Dict[str, Any]) -> None:
    if getattr(args, "stats", None):
        _write_json(args.stats, {"format_version": FORMAT_VERSION, **stats})
    elif not args.quiet:
        print(json.dumps(stats), file=sys.stderr)


def _search_config(args, settings: Settings) -> SearchConfig:
    return SearchConfig(
        node_budget=args.node_budget,
        time_budget=args.time_budget,
        thread_count=args.threads or settings.default_threads,
        symmetry_breaking=not args.no_symmetry,
        split_depth=args.split_depth if args.split_depth is not None else settings.split_depth,
    )


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None, help="Processus de recherche (défaut DGR_THREADS)")
    p.add_argument("--node-budget", type=int, default=None)
    p.add_argument("--time-budget", type=float, default=None, help="Secondes")
    p.add_argument("--no-symmetry", action="store_true", help="Désactive la brisure de symétrie")
    p.add_argument("--split-depth", type=int, default=None)
    p.add_argument("--stats", default=None, help="Fichier JSON des statistiques de recherche")


# ---------------------------------------------------------------- verify

def cmd_verify(args, settings: Settings) -> int:
    system = read_dgr_file(args.file)
    report = verify_dgr(system)
    if report.valid:
        _say(args, f"✅ {args.file}: {system.header} valide")
    else:
        _say(args, f"❌ {args.file}: {system.header} invalide")
        for violation in report.violations:
            _say(args, f"  - {violation}")
    _write_json(args.json, {"format_version": FORMAT_VERSION, "header": list(system.header), **report.to_dict()})
    return EXIT_OK if report.valid else EXIT_NEGATIVE


# ---------------------------------------------------------------- search

def _store_witness(args, settings: Settings, system: DgrSystem) -> None:
    if args.out:
        write_dgr_file(args.out, system)
        _say(args, f"Témoin écrit dans {args.out}")
    if args.store:
        key = WitnessStore(settings.witness_dir).put(system)
        _say(args, f"Témoin stocké sous {key}")


def cmd_search(args, settings: Settings) -> int:
    cfg = _search_config(args, settings)
    if args.counterexample:
        if args.n is None or args.universe_max is None:
            raise _UsageError("--counterexample exige --n et --universe-max")
        outcome = counterexample_search(args.i, args.j, args.n, args.universe_max, cfg)
        if outcome.counterexample:
            _say(args, f"Contre-exemple: {' '.join(map(str, outcome.counterexample))} (Y({args.i}, {args.j}) > {args.n})")
        else:
            _say(args, f"{outcome.status.value}: {outcome.checked} ensembles examinés")
        _write_json(args.json, {"format_version": FORMAT_VERSION, **outcome.to_dict()})
        _emit_stats(args, outcome.stats.to_dict())
        return _STATUS_CODES[outcome.status]

    if args.min:
        result = min_n(args.i, args.j, cfg)
        if result.value is not None:
            _say(args, str(result.value))
            _store_witness(args, settings, result.witness)
        else:
            _say(args, f"budget épuisé: H({args.i}, {args.j}) >= {result.lower_bound}")
        payload = result.to_dict()
        if result.witness is not None:
            payload["witness"] = system_to_dict(result.witness)
        _write_json(args.json, {"format_version": FORMAT_VERSION, **payload})
        _emit_stats(args, result.stats.to_dict())
        return _STATUS_CODES[result.status]

    if args.n is None:
        raise _UsageError("search exige --n, --min ou --counterexample")
    outcome = exists_dgr(args.i, args.j, args.n, cfg)
    _say(args, outcome.status.value)
    if outcome.witness is not None:
        _say(args, str(outcome.witness))
        _store_witness(args, settings, outcome.witness)
    _write_json(args.json, {
        "format_version": FORMAT_VERSION,
        "status": outcome.status.value,
        "witness": system_to_dict(outcome.witness) if outcome.witness else None,
        "stats": outcome.stats.to_dict(),
    })
    _emit_stats(args, outcome.stats.to_dict())
    return _STATUS_CODES[outcome.status]


# ---------------------------------------------------------------- construct

def _gap(args, system: DgrSystem) -> Gap:
    if args.gap:
        return Gap(args.gap[0], args.gap[1])
    gap = largest_gap(system)
    if gap is None:
        raise ConstructionError(f"{system.header} n'a aucun trou")
    return gap


def _need(args, name: str) -> DgrSystem:
    path = getattr(args, name)
    if not path:
        raise _UsageError(f"{args.rule} exige --{name}")
    return read_dgr_file(path)


def cmd_construct(args, settings: Settings) -> int:
    rule = args.rule
    if rule == "concat":
        result = concat_compose(_need(args, "a"), _need(args, "b"))
    elif rule == "thm3-extend":
        result = thm3_extend(_need(args, "a"), _need(args, "b"))
    elif rule == "thm3-double":
        result = thm3_double(_need(args, "a"))
    elif rule == "gap-merge":
        sa = _need(args, "a")
        result = gap_merge(sa, _gap(args, sa), _need(args, "b"))
    elif rule == "gap-double":
        sa = _need(args, "a")
        result = gap_double(sa, _gap(args, sa))
    else:
        source = _need(args, "a")
        if source.i_count != 1:
            raise _UsageError("shift-pair exige un fichier à une seule règle")
        result = shift_pair(source.rulers[0], args.n or source.n_span)
    _say(args, str(result.system))
    if args.out:
        write_dgr_file(args.out, result.system)
    _write_json(args.trace, result.trace.to_dict())
    return EXIT_OK


# ---------------------------------------------------------------- singer

def cmd_singer(args, settings: Settings) -> int:
    result = singer_ruler(args.q, args.limit or settings.gf_size_limit)
    _say(args, f"Ensemble de Singer q={args.q} (mod {args.q ** 2 + args.q + 1}): {' '.join(map(str, result.residues))}")
    _say(args, f"Règle de Golomb à {args.q + 1} marques: {result.ruler} (longueur {result.ruler.length})")
    if args.out:
        write_dgr_file(args.out, result.as_system())
    _write_json(args.json, {**singer_trace(result).to_dict(), "residues": list(result.residues)})
    return EXIT_OK


# ---------------------------------------------------------------- bounds

def _build_table(args, settings: Settings) -> BoundsTable:
    if args.seed_from == "file":
        if not args.seed_file:
            raise _UsageError("--seed-from file exige --seed-file")
        table = BoundsTable.load(args.seed_file, WitnessStore(settings.witness_dir))
    else:
        cfg = _search_config(args, settings)
        exact, lower = search_seeds(min(args.max_i, settings.seed_max_i), min(args.max_j, settings.seed_max_j), cfg)
        table = seed_table(args.max_i, args.max_j, exact, lower,
                           include_singer=args.singer, gf_limit=settings.gf_size_limit)
    return propagate(table)


def cmd_bounds(args, settings: Settings) -> int:
    table = _build_table(args, settings)
    square_cell_annotations(table)
    frame = table.to_dataframe()
    _say(args, frame[["i", "j", "h_lower", "h_upper", "upper_rule", "y_lower", "y_upper"]].to_string(index=False))
    for entry in regularity_report(table):
        if entry.regular_from is not None or entry.iota_lower_exclusive is not None:
            _say(args, f"J={entry.j}: régulier observé à partir de I={entry.regular_from}, "
                       f"iota > {entry.iota_lower_exclusive}")
    if args.out:
        table.save(args.out, WitnessStore(settings.witness_dir))
        _say(args, f"Table écrite dans {args.out}")
    if args.csv:
        frame.to_csv(args.csv, index=False)
    if args.materialize:
        i, j = args.materialize
        witness = materialize_witness(table, (i, j))
        _say(args, f"Témoin H({i}, {j}) <= {witness.n_span}: {witness}")
        if args.witness_out:
            write_dgr_file(args.witness_out, witness)
    return EXIT_OK


# ---------------------------------------------------------------- check

def _print_report(args, report: ConjectureReport) -> None:
    _say(args, f"Conjecture {report.conjecture}: {report.statement}")
    _say(args, f"Statut: {report.status}")
    if report.rows:
        _say(args, report.to_dataframe().to_string(index=False))
    if report.unevaluated:
        _say(args, f"Non évalués: {report.unevaluated}")
    if report.detail:
        _say(args, report.detail)


def cmd_check(args, settings: Settings) -> int:
    cfg = _search_config(args, settings)
    number = args.conjecture
    if number in (2, 6):
        if args.table:
            table = BoundsTable.load(args.table, WitnessStore(settings.witness_dir))
        else:
            max_j = args.max_j or (8 if number == 6 else settings.seed_max_j)
            max_i = 1 if number == 6 else (args.max_i or settings.seed_max_i)
            exact, lower = search_seeds(max_i, max_j, cfg)
            table = propagate(seed_table(max_i, max_j, exact, lower))
        report = check_conjecture2(table) if number == 2 else check_conjecture6(table)
    elif number == 5:
        if args.i is None:
            raise _UsageError("--conjecture 5 exige --i")
        try:
            report = check_conjecture5(args.i, cfg)
        except ValueError as e:
            raise _UsageError(str(e)) from e
    else:
        if args.i is None or args.j is None:
            raise _UsageError(f"--conjecture {number} exige --i et --j")
        if number == 1:
            report = check_conjecture1(args.i, args.j, args.universe_max or 2 * args.i * args.j, cfg)
        elif number == 3:
            report = check_conjecture3(args.i, args.j, cfg)
        else:
            report = check_conjecture4(args.i, args.j, cfg)
    _print_report(args, report)
    _write_json(args.json, report.to_dict())
    if report.status == BUDGET_EXCEEDED:
        return EXIT_BUDGET
    if report.status in (VIOLATED, NOT_APPLICABLE):
        return EXIT_NEGATIVE
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dgr", description="Boîte à outils pour les règles de Golomb disjointes")
    parser.add_argument("--quiet", action="store_true", help="Supprime la sortie texte")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING...")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="Vérifie un fichier DGR")
    p.add_argument("file")
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("search", help="Recherche exacte")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--min", action="store_true", help="Calcule H(I, J)")
    p.add_argument("--counterexample", action="store_true", help="Cherche un ensemble sans I règles disjointes")
    p.add_argument("--universe-max", type=int, default=None)
    p.add_argument("--out", default=None, help="Fichier du témoin")
    p.add_argument("--store", action="store_true", help="Ajoute le témoin au stockage DGR_WITNESS_DIR")
    p.add_argument("--json", default=None)
    _add_budget_flags(p)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("construct", help="Applique une construction")
    p.add_argument("rule", choices=["concat", "thm3-extend", "thm3-double", "gap-merge", "gap-double", "shift-pair"])
    p.add_argument("--a", default=None, help="Premier système (fichier DGR)")
    p.add_argument("--b", default=None, help="Second système (fichier DGR)")
    p.add_argument("--gap", type=int, nargs=2, metavar=("T", "W"), default=None)
    p.add_argument("--n", type=int, default=None, help="Étendue pour shift-pair")
    p.add_argument("--out", default=None)
    p.add_argument("--trace", default=None, help="Fichier JSON de la trace")
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("singer", help="Ensemble de différences de Singer")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--limit", type=int, default=None, help="Taille maximale des corps (défaut DGR_GF_LIMIT)")
    p.add_argument("--out", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(handler=cmd_singer)

    p = sub.add_parser("bounds", help="Table de bornes propagée")
    p.add_argument("--max-i", type=int, required=True)
    p.add_argument("--max-j", type=int, required=True)
    p.add_argument("--seed-from", choices=["search", "file"], default="search")
    p.add_argument("--seed-file", default=None)
    p.add_argument("--singer", action="store_true", help="Ajoute les règles de Singer")
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--materialize", type=int, nargs=2, metavar=("I", "J"), default=None)
    p.add_argument("--witness-out", default=None)
    _add_budget_flags(p)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("check", help="Vérifie une conjecture")
    p.add_argument("--conjecture", type=int, choices=range(1, 7), required=True)
    p.add_argument("--i", type=int, default=None)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--max-i", type=int, default=None)
    p.add_argument("--max-j", type=int, default=None)
    p.add_argument("--universe-max", type=int, default=None)
    p.add_argument("--table", default=None, help="Table JSON déjà calculée")
    p.add_argument("--json", default=None)
    _add_budget_flags(p)
    p.set_defaults(handler=cmd_check)
    return parser


def _configure_logging(args, settings: Settings) -> None:
    level = "WARNING" if args.quiet else (args.log_level or settings.log_level)
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Exécute une commande et retourne le code de sortie.

    Args:
        argv: Arguments (sys.argv[1:] si None)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except _UsageError as e:
        print(f"usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        settings = get_settings()
    except ValueError as e:
        print(f"configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(args, settings)

    try:
        return args.handler(args, settings)
    except _UsageError as e:
        print(f"usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as e:
        print(f"❌ {getattr(args, 'file', '')}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except BoundsContradictionError as e:
        print(e.dump(), file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (DgrError, ValueError, OSError) as e:
        print(f"erreur: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
