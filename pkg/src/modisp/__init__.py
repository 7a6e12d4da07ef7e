"""Numerical toolkit for dispersive PDEs with rough modulated dispersion.

Modules
-------
pathgen        modulation paths (deterministic, Brownian, fractional Brownian)
occupation     oscillatory integrals, local times, irregularity probes
models         dispersion symbols and nonlinearities of the model catalog
resonance      lattice enumeration and non-resonance bounds
admissibility  thresholds on the irregularity exponent
solver         Fourier--Galerkin integration in the interaction representation
experiments    sweeps linking path roughness to solver behaviour
cli            command-line entry point
"""

__version__ = "0.1.0"
INTERFACE_VERSION = "1.0"
