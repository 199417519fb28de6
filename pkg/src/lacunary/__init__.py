"""Lacunary trigonometric sums: sequences, exact moments, limit laws and sampling."""
import sys

from ._accel import backend_name
from .errors import InvalidParameter, WorkBudgetExceeded

# sequence files and JSON carry terms with tens of thousands of decimal digits
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

__version__ = "0.1.0"
SCHEMA_VERSION = "lacunary/1"

__all__ = ["InvalidParameter", "WorkBudgetExceeded", "backend_name", "SCHEMA_VERSION",
           "__version__"]
