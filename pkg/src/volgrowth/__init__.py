"""Lyapunov exponents, dominated splittings, unstable volume growth, Katok entropy
and cohomological spectral radii for diffeomorphisms of the torus."""

__version__ = "0.1.0"

from .system import (CAT_MAP, T3_CENTER, T3_COMPLEX, ConstantCocycle, InvalidSystemError, Mode, TorusMap,
                     catalog, make_linear_toral, make_perturbed_toral, system_from_config, torus_distance)

__all__ = ["CAT_MAP", "T3_CENTER", "T3_COMPLEX", "ConstantCocycle", "InvalidSystemError", "Mode", "TorusMap",
           "catalog", "make_linear_toral", "make_perturbed_toral", "system_from_config", "torus_distance",
           "__version__"]
