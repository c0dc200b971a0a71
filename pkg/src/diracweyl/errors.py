"""Exception hierarchy shared across the library.

The command line tool maps these onto exit codes: bad or malformed input
data exits with 2, numerical-consistency failures (loss of ellipticity,
route disagreement, Hermiticity violations) exit with 3.
"""


class DiracweylError(Exception):
    """Base class for all library errors."""


class InputError(DiracweylError):
    """Malformed or out-of-contract input (bad shapes, unknown names, ...)."""


class EllipticityError(DiracweylError):
    """A symbol or metric degenerates somewhere on the grid."""


class ConsistencyError(DiracweylError):
    """Independent computation routes disagree beyond tolerance."""
