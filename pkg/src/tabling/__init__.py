"""Multi-threaded tabled Datalog evaluation over shared trie table spaces."""

from .bench import (
    BenchInstance,
    EdgeConfig,
    GraphKind,
    Recursion,
    default_query,
    desk_instances,
    gen_edges,
    make_program,
    parse_bench_spec,
    program_text,
)
from .buckets import BucketArray, Direct, Indirect, bucket_cell
from .engine import EvalConfig, ParallelResult, solve_parallel, solve_thread
from .errors import (
    ConfigurationError,
    EvaluationError,
    ParseError,
    ProgramError,
    TablingError,
)
from .oracle import oracle_solve
from .parser import parse_program, parse_query
from .program import Clause, Literal, Program
from .tablespace import Design, MemoryCounters, SubgoalFrame, Table
from .terms import (
    Atom,
    Compound,
    Int,
    Term,
    Var,
    atom,
    canonicalize_variant,
    compound,
    decode_term,
    encode_term,
    intern_symbol,
    term_str,
)
from .trie import SyncMode, TrieNode, check_insert_node, check_insert_path, enumerate_paths

__version__ = "0.1.0"

__all__ = [
    "Atom", "BenchInstance", "BucketArray", "Clause", "Compound",
    "ConfigurationError", "Design", "Direct", "EdgeConfig", "EvalConfig",
    "EvaluationError", "GraphKind", "Indirect", "Int", "Literal",
    "MemoryCounters", "ParallelResult", "ParseError", "Program",
    "ProgramError", "Recursion", "SubgoalFrame", "SyncMode", "Table",
    "TablingError", "Term", "TrieNode", "Var",
    "atom", "bucket_cell", "canonicalize_variant", "check_insert_node",
    "check_insert_path", "compound", "decode_term", "default_query",
    "desk_instances", "encode_term", "enumerate_paths", "gen_edges",
    "intern_symbol", "make_program", "oracle_solve", "parse_bench_spec",
    "parse_program", "parse_query", "program_text", "solve_parallel",
    "solve_thread", "term_str",
]
