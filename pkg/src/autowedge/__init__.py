"""Wedge boundary-value problems for constant-coefficient elliptic operators.

The pipeline lifts the algebraic equation linking the two trace transforms to
its elliptic-curve cover (``surface``, ``green``), reduces it to a scalar jump
problem on a cut (``elim``, ``rh``), and reconstructs traces and the interior
field (``field``).  ``oracle`` holds independent references for checking.
"""
__version__ = "1.0.0"

from .errors import AutowedgeError  # noqa: E402,F401
