"""Learn minimal DFAs as interpretable anomaly detectors by solving MILPs."""

from .automata import Dfa, Sample, accepts, count_accepted, read_sample, run, to_dot, write_sample
from .encoder import EncodingSpec, RegularizerSpec, decode_dfa, encode
from .learner import LearnReport, learn_single_bound, learn_two_bound, reduce_exact_learning
from .prefix_tree import PrefixTree, build_prefix_tree
from .solver import BackendConfig, EnumerationBackend, ExternalBackend, solve_enumerate, solve_external

__version__ = "0.1.0"

__all__ = [
    "Dfa",
    "Sample",
    "accepts",
    "count_accepted",
    "read_sample",
    "run",
    "to_dot",
    "write_sample",
    "EncodingSpec",
    "RegularizerSpec",
    "decode_dfa",
    "encode",
    "LearnReport",
    "learn_single_bound",
    "learn_two_bound",
    "reduce_exact_learning",
    "PrefixTree",
    "build_prefix_tree",
    "BackendConfig",
    "EnumerationBackend",
    "ExternalBackend",
    "solve_enumerate",
    "solve_external",
]
