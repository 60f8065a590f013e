"""Finite-key rates for QKD protocols with a filtering step, with an Extended-B92 instantiation."""

from .b92 import B92Params, acceptance_prob, key_error
from .keyrate import KeyRateReport, ProtocolSpec, asymptotic_rate, key_length_b92, optimize_test_fraction

__version__ = "0.1.0"

__all__ = [
    "B92Params",
    "KeyRateReport",
    "ProtocolSpec",
    "acceptance_prob",
    "asymptotic_rate",
    "key_error",
    "key_length_b92",
    "optimize_test_fraction",
]
