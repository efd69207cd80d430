"""Two-weight Hardy inequalities on the real line: the characterizing
constants B and B', the universal upper factor C_B, certified lower bounds
on the minimal constant and numerical checks of the auxiliary facts behind
the characterization."""

__version__ = "0.1.0"

from .core import (Exponents, ExponentError, ExponentOrderError, cb_constant,
                   compute_B, compute_B_line, compute_Bprime, dual_exponent,
                   power_conv, segment_max, weight_integral)
from .instance import (DiscreteInstance, FunctionOnX, LineInstance,
                       build_conjugate_hardy, build_continuous_hardy,
                       build_discrete_hardy, discretize, load_instance,
                       parse_instance, reflect, save_instance)
from .measure import RealMeasure, StepFunction
from .operator import assemble_kernel, lhs, rhs
from .sharpness import (detect_unbounded, estimate_min_C, oracle_min_C,
                        sandwich_report, witness_function)

__all__ = [
    "Exponents", "ExponentError", "ExponentOrderError", "cb_constant",
    "compute_B", "compute_B_line", "compute_Bprime", "dual_exponent",
    "power_conv", "segment_max", "weight_integral",
    "DiscreteInstance", "FunctionOnX", "LineInstance",
    "build_conjugate_hardy", "build_continuous_hardy", "build_discrete_hardy",
    "discretize", "load_instance", "parse_instance", "reflect", "save_instance",
    "RealMeasure", "StepFunction", "assemble_kernel", "lhs", "rhs",
    "detect_unbounded", "estimate_min_C", "oracle_min_C", "sandwich_report",
    "witness_function",
]
