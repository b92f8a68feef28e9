"""ghostsym: symbolic execution assisted by ghost code.

Hard program fragments (transcendental guards, hash-like arithmetic, loops,
heap-shape preconditions) are handed to a ghost provider, which answers with
an inverse, a surrogate or a heap topology builder written in MiniC.  The
executor explores the ghost-augmented program; every candidate input is then
replayed on the original program before it counts.
"""

from .bidi import ReconcileConfig, ReconcileResult, reconcile
from .errors import GhostsymError
from .footprint import Footprint, footprint, havoc_of
from .minilang import parse_program
from .replay import Confirmed, Rejected, confirm
from .solver import Solver, get_solver
from .symexec import Executor, SymexConfig, decompose, symex
from .topology import TopologySpec, apply_builder, inject

__version__ = "0.1.0"

__all__ = ["ReconcileConfig", "ReconcileResult", "reconcile", "GhostsymError", "Footprint",
           "footprint", "havoc_of", "parse_program", "Confirmed", "Rejected", "confirm",
           "Solver", "get_solver", "Executor", "SymexConfig", "decompose", "symex",
           "TopologySpec", "apply_builder", "inject"]
