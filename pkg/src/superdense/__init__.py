"""Numerical workbench for superdense coding.

Subpackages: dense linear algebra (`numkit`), orthogonal unitary bases
(`bases`), protocol modeling and distinguishability bounds (`protocol`),
constructive canonicalization of qubit protocols (`rigidity`), Haar-random
encoder experiments (`randlab`), and a CLI with JSON/CSV serialization
(`cli`, `serialize`).
"""

__version__ = "0.1.0"
