"""amstack: a compiler-and-runtime toolchain for autonomous-machine
dataflow programs.

Pipeline: parse a declarative .amg graph program (dsl), lower it to a
rate-annotated DAG (graph), model the platform (substrate), map and admit
it (scheduler), chart the achievable performance envelope (envelope), and
simulate execution with contract enforcement and adaptation (runtime).
"""

from . import dsl, envelope, fixtures, graph, runtime, scheduler, substrate
from .errors import StackError

__version__ = "0.1.0"

__all__ = [
    "StackError",
    "__version__",
    "dsl",
    "envelope",
    "fixtures",
    "graph",
    "runtime",
    "scheduler",
    "substrate",
]
