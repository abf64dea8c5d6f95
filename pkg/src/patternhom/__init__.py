"""FFT-based homogenization of periodic elastic composites on anisotropic sampling patterns.

Sampling points are the lattice ``M^{-1} Z^d`` modulo the unit cell for a
regular integer matrix ``M``; the Fourier transform on that pattern reduces to
an ordinary multi-dimensional FFT through the Smith normal form of ``M``.
"""
from .lattice import (PatternMatrix, get_pattern, hermite_representative, is_subpattern,
                      pattern_congruent, smith_normal_form)
from .pattern_fft import fft, ifft
from .solver import (MaterialField, ReferenceMedium, SolverConfig, basic_scheme,
                     effective_tensor)
from .tensors import IsotropicMaterial

__all__ = [
    "PatternMatrix",
    "get_pattern",
    "smith_normal_form",
    "is_subpattern",
    "pattern_congruent",
    "hermite_representative",
    "fft",
    "ifft",
    "MaterialField",
    "ReferenceMedium",
    "SolverConfig",
    "basic_scheme",
    "effective_tensor",
    "IsotropicMaterial",
]

__version__ = "0.1.0"
