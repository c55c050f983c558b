"""Numerical workbench for the truncated Wick-ordered cubic NLS on anisotropic tori.

Subpackages and modules:

- torus: the frequency lattice, quadratic form, shells and balls
- counting: resonance-level counting (oracle + geometric fast paths)
- randomfield: counter-based Gaussian data, sup-norm scans, chaos tails
- spacetime: time grids, smooth cutoffs, space-time coefficient fields
- spectral: spectral fields, Wick product, flow integrator, Duhamel map, Picard
- norms: X^{s,b} and Lebesgue norms, Strichartz and localization scans
- harness: configs, manifests, suites, command-line interface
"""

from __future__ import annotations

__version__ = "0.1.0"

from .torus import GAMMA_PRESETS, TorusSpec, resolve_gamma

__all__ = ["GAMMA_PRESETS", "TorusSpec", "resolve_gamma", "__version__"]
