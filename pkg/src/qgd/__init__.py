"""q-pseudodifference operators, q-deformed Gelfand-Dickey brackets and q-KdV flows."""

from .coeffs import Context, Jet, LaurentPoly, ResonanceError
from .psid import COMPLETE, QOp, WindowError, inner, mul, proj, trace
from .frac import frac_power, nth_root
from .hierarchy import hamiltonian, lax_rhs
from .gdbracket import BracketSpec, bracket, zeta
from .dsred import LoopMat, gauge_to_companion, reduced_bracket
from .cdeg import CSymbol, NonGenericDegree, exp_map, log_map, power

__version__ = "0.1.0"

__all__ = [
    "Context",
    "Jet",
    "LaurentPoly",
    "ResonanceError",
    "COMPLETE",
    "QOp",
    "WindowError",
    "inner",
    "mul",
    "proj",
    "trace",
    "frac_power",
    "nth_root",
    "hamiltonian",
    "lax_rhs",
    "BracketSpec",
    "bracket",
    "zeta",
    "LoopMat",
    "gauge_to_companion",
    "reduced_bracket",
    "CSymbol",
    "NonGenericDegree",
    "exp_map",
    "log_map",
    "power",
]
