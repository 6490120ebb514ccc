"""Exception types raised by jointsnr."""


class JointSNRError(ValueError):
    """Base class for invalid inputs to the detection/estimation routines."""


class InvalidSupportError(JointSNRError):
    """Angular support of the joint prior is outside 0 <= phi1 < phi2 <= pi/2."""


class InvalidExponentError(JointSNRError):
    """Angular constant requested for an even exponent."""


class ShapeUnderflowError(JointSNRError):
    """A shifted gamma shape needed by a moment is not positive."""


class DegeneratePriorError(JointSNRError):
    """A hypothesis prior probability is zero, so the likelihood ratio is undefined."""


class CostConditionError(JointSNRError):
    """Cost parameters do not satisfy the condition required by the compact detector."""


class EmptyInputError(JointSNRError):
    """An observation vector or record set is empty."""


class NonFiniteError(JointSNRError):
    """An observation contains NaN or infinity."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge."""
