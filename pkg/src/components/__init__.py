# Composants principaux de la boîte à outils DGR

from .core import DgrSystem, Gap, Ruler, ValidationReport, verify_dgr
from .formats import emit_dgr, parse_dgr, read_dgr_file, write_dgr_file
from .constructions import ConstructionResult, ConstructionTrace, RuleName
from .search import SearchConfig, SearchOutcome, SearchStatus, exists_dgr, min_n
from .bounds import BoundsTable, materialize_witness, propagate, seed_table
from .witness_store import WitnessStore

__all__ = [
    'DgrSystem', 'Gap', 'Ruler', 'ValidationReport', 'verify_dgr',
    'emit_dgr', 'parse_dgr', 'read_dgr_file', 'write_dgr_file',
    'ConstructionResult', 'ConstructionTrace', 'RuleName',
    'SearchConfig', 'SearchOutcome', 'SearchStatus', 'exists_dgr', 'min_n',
    'BoundsTable', 'materialize_witness', 'propagate', 'seed_table',
    'WitnessStore',
]
