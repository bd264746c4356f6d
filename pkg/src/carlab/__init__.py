"""carlab: a desk-scale numerical laboratory for a polyharmonic multiplier.

The package pins down the sharp Lebesgue exponent range of a degenerate-sphere
Fourier multiplier and stress-tests every quantitative ingredient of that
story at laptop scale: exact rational exponent geometry, smooth dyadic
localisations of the symbol, grid-based norm certification, oscillatory-
integral lower bounds, and the distributional/integration-by-parts identities
tying them together.
"""

__version__ = "0.1.0"

from .regions import DimensionPair, ExponentPoint, RegionId  # noqa: F401
from .symbols import SymbolSpec  # noqa: F401
