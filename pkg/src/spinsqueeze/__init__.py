"""Numerical laboratory for collective-spin squeezing.

Subpackages by theme:

* dicke -- symmetric-subspace states, operators, moments
* ramsey -- interferometric signal / variance / phase-accuracy analysis
* twist -- exact counter-twisting dynamics (unitary and Lindblad oracle)
* closure -- second-order moment-closure ODEs and contracted variables
* cavity -- linearized cavity-EIT polariton squeezing (covariance dynamics)
* wigner -- SU(2) Wigner functions, multipole operators, 3j symbols
* cli -- deterministic scenario runner (CSV/JSON)
"""

__version__ = "0.1.0"

from . import cavity, closure, dicke, ramsey, twist, wigner  # noqa: F401
