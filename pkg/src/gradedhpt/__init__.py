"""gradedhpt: exact-arithmetic graded homological algebra and homotopy transfer."""

from .core import (
    ConvergenceFault,
    GradedBasis,
    LinOp,
    Overflow,
    Q,
    RouteDisagreement,
    Vector,
    compose_maps,
    koszul_sign,
    multi_unshuffles,
)

__all__ = [
    "ConvergenceFault",
    "GradedBasis",
    "LinOp",
    "Overflow",
    "Q",
    "RouteDisagreement",
    "Vector",
    "compose_maps",
    "koszul_sign",
    "multi_unshuffles",
]
