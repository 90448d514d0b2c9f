"""
Error taxonomy for the position/momentum laboratory.

Argument and grid problems derive from ValueError, numeric failures that
depend on the state being simulated derive from RuntimeError. The entry
point maps the two families to different exit codes.
"""


class InvalidArgumentError(ValueError):
    """An input value is out of range, non-finite or inconsistent."""


class InvalidGridError(ValueError):
    """The sampling grid is too narrow or too coarse for the requested state."""


class DomainError(ValueError):
    """An analytic formula was evaluated outside its validity domain."""


class DegenerateSuperpositionError(ValueError):
    """The superposition normalization 1 + <L|B> is not positive."""


class AliasingRiskError(RuntimeError):
    """Too much of the state's norm sits at the edge of the momentum grid."""


class DegenerateFitError(RuntimeError):
    """Fringe data carry no usable shape information."""
