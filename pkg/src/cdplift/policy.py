"""Centralized numeric tolerances.

Every module draws its default tolerances from :data:`POLICY` so there is a
single tuning point.  The individual fields exist because different contracts
pin different accuracies (moment identities are checked to 1e-12, adjoint
pairings to 1e-9 relative, etc.); the generic ``abs_tol``/``rel_tol`` pair
covers everything that is not explicitly pinned.
"""

from dataclasses import dataclass

__all__ = ["NumericPolicy", "POLICY"]


@dataclass(frozen=True)
class NumericPolicy:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    #: allowed Hermitian-symmetry / real-trace drift after construction
    hermitian_tol: float = 1e-12
    #: distribution moment identities (exact-arithmetic comparisons)
    moment_tol: float = 1e-12
    #: relative tolerance for <A(Z), c> == <Z, A*(c)> style pairings
    adjoint_rel_tol: float = 1e-9
    #: unit-norm requirement on tangent-space anchors
    anchor_tol: float = 1e-10
    #: tangent membership: third singular value <= rank_rel_tol * first
    rank_rel_tol: float = 1e-8


POLICY = NumericPolicy()
