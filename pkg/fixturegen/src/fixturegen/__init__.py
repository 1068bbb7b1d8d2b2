"""Self-contained quantum-chemistry backend for fixture generation.

Gaussian integrals (s and p shells), restricted Hartree-Fock, and small
determinant-CI reference solvers.  No external chemistry package required.
"""

__version__ = "0.1.0"
