"""Covariant quantum mechanics on periodic grids.

The package realizes the standard position representation of a quantum
particle on a truncated, periodized box: multiplication operators for
functions of position, spectrally exact shift and rotation unitaries,
Weyl operators, free Galilei dynamics with its projective multiplier,
phase-space diagnostics (characteristic and Wigner functions), the
Gaussian-smeared rank-one projection behind representation uniqueness,
and the compact-configuration-space analogue on the circle.

Units: lengths are plain numbers, wavevectors are inverse lengths, and
the shift generator K (not momentum) is fundamental; no Planck constant
enters any computation.
"""

__version__ = "0.1.0"

from .grid import (
    GridSpec,
    Wavefunction,
    inner,
    make_grid,
    norm,
    normalize,
    sample_gaussian,
)
from .fourier import SpectralFunction, convolve, forward, inverse, involution

__all__ = [
    "GridSpec",
    "Wavefunction",
    "SpectralFunction",
    "make_grid",
    "sample_gaussian",
    "inner",
    "norm",
    "normalize",
    "forward",
    "inverse",
    "convolve",
    "involution",
    "__version__",
]
