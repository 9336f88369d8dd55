"""Uniform measure on infinite executions of 1-safe Petri nets, and random
generation of executions by simulating a finite chain of states-and-cliques."""

from .chain import (
    CliqueChain,
    ExecutionSample,
    ValidationReport,
    build_chain,
    empirical_validation,
    initial_law,
    lumping_check,
    sample_execution,
)
from .errors import (
    CapExceededError,
    KernelDegeneracyError,
    NetFormatError,
    NotIrreducibleError,
    NotOneSafeError,
    NumericError,
    TracenetError,
)
from .measure import FirstCliqueLaw, UniformMeasure
from .monoid import EPSILON, Trace, TraceMonoid
from .petri import PetriNet, ReachabilityGraph, parse_net, reachability_graph
from .polynomials import IntPolynomial, RootEnclosure, count_roots, smallest_root
from .system import AsyncSystem, Cocycle, PolyMatrix, build_system

__version__ = "0.1.0"

__all__ = [
    "AsyncSystem",
    "CapExceededError",
    "CliqueChain",
    "Cocycle",
    "EPSILON",
    "ExecutionSample",
    "FirstCliqueLaw",
    "IntPolynomial",
    "KernelDegeneracyError",
    "NetFormatError",
    "NotIrreducibleError",
    "NotOneSafeError",
    "NumericError",
    "PetriNet",
    "PolyMatrix",
    "ReachabilityGraph",
    "RootEnclosure",
    "Trace",
    "TraceMonoid",
    "TracenetError",
    "UniformMeasure",
    "ValidationReport",
    "build_chain",
    "build_system",
    "count_roots",
    "empirical_validation",
    "initial_law",
    "lumping_check",
    "parse_net",
    "reachability_graph",
    "sample_execution",
    "smallest_root",
]
