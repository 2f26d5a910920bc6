"""State-dependent removal of redundant controls from quantum circuits."""
from .circuit import (Circuit, CircuitError, CircuitSyntaxError, Gate, QubitIndexError,
                      UnsupportedGate, controlled, emit_circuit, inverse, parse_circuit,
                      read_circuit, two_qubit_count, write_circuit)
from .labels import Decision, Label, LabelStore
from .lowering import AncillaExhausted, AncillaPool, decompose_multi_controlled, lower_circuit
from .optimizer import (OptimizationReport, OptimizerConfig, SupportSet, baseline,
                        cancel_inverse_pairs, filter_support, optimize, reduce_controls,
                        remove_cx_pairs)
from .simulator import (ExactBackend, SampledBackend, StateVector, evolve, hellinger_fidelity,
                        marginal_distribution, output_distribution, sample)

__all__ = [
    "AncillaExhausted", "AncillaPool", "Circuit", "CircuitError", "CircuitSyntaxError",
    "Decision", "ExactBackend", "Gate", "Label", "LabelStore", "OptimizationReport",
    "OptimizerConfig", "QubitIndexError", "SampledBackend", "StateVector", "SupportSet",
    "UnsupportedGate", "baseline", "cancel_inverse_pairs", "controlled",
    "decompose_multi_controlled", "emit_circuit", "evolve", "filter_support",
    "hellinger_fidelity", "inverse", "lower_circuit", "marginal_distribution", "optimize",
    "output_distribution", "parse_circuit", "read_circuit", "reduce_controls",
    "remove_cx_pairs", "sample", "two_qubit_count", "write_circuit",
]
