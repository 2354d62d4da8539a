"""Post-Lie algebras of connections with parallel torsion and curvature.

Importing the package switches jax to double precision; every numerical
tolerance in this library assumes float64.
"""
import jax

jax.config.update("jax_enable_x64", True)

__version__ = "0.1.0"
