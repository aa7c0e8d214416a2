"""Low-complexity full-rate space-time block codes for 2x2 and 4x2 MIMO.

Submodules
----------
linalg
    Real expansions of complex matrices and Gram-Schmidt QR.
constellation
    Integer QAM alphabets, rotation and hard limiting.
codes
    Encoders, weight matrices and generator matrices.
channel
    Real equivalent channel and R-matrix sparsity.
decoders
    Exhaustive ML, real sphere decoding and conditional decoders.
analysis
    Minimum determinant and rank searches.
sim
    Monte Carlo codeword error rate.
"""

from .codes import CODE_NAMES, StbcCode, get_code
from .constellation import Constellation, cross_qam_32, from_name, square_qam

__version__ = "0.1.0"

__all__ = [
    "CODE_NAMES",
    "StbcCode",
    "get_code",
    "Constellation",
    "cross_qam_32",
    "from_name",
    "square_qam",
]
