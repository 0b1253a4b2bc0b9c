"""
Lattice Tables Package Init
Finite lattice tables, Pudlák graphs and their embeddings.
"""

from .errors import (
    BudgetExceededError,
    DecodeError,
    InternalConsistencyError,
    LatticeTablesError,
    ValidationError,
)
from .lattice_core import FiniteLattice, UslHom, galois_adjoint, make_usl_hom
from .lattice_table import LatticeTable, TableChain, Verdict
from .partitions import EqRel
from .pudlak import ColoredGraph, GraphBuilder, build_homogenized, build_pudlak
from .unary_algebra import UnaryAlgebra, check_maltsev
from .morphisms import TableEmbedding, assemble_system, embed_graph, verify_embedding
from .coding import CodedLattice, build_coded_lattice, decode_U, scramble

__all__ = [
    "BudgetExceededError",
    "DecodeError",
    "InternalConsistencyError",
    "LatticeTablesError",
    "ValidationError",
    "FiniteLattice",
    "UslHom",
    "galois_adjoint",
    "make_usl_hom",
    "LatticeTable",
    "TableChain",
    "Verdict",
    "EqRel",
    "ColoredGraph",
    "GraphBuilder",
    "build_homogenized",
    "build_pudlak",
    "UnaryAlgebra",
    "check_maltsev",
    "TableEmbedding",
    "assemble_system",
    "embed_graph",
    "verify_embedding",
    "CodedLattice",
    "build_coded_lattice",
    "decode_U",
    "scramble",
]
