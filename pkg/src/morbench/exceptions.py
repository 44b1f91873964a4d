"""Exception types raised across the package.

Numerical failures (singular matrices, diverging iterations) are kept
distinct from data failures (bad files, bad configs) so the driver can
record the former per run while the CLI turns the latter into hard errors.
"""


class MorbenchError(Exception):
    """Base class for all errors raised by this package."""


# --- data / identifier errors ------------------------------------------------

class MalformedId(MorbenchError):
    """Benchmark ID does not match the ``<name>_n<N>m<M>q<Q>`` pattern."""


class DimensionMismatch(MorbenchError):
    """Matrix shapes disagree with each other or with the declared dimensions."""


class ManifestError(MorbenchError):
    """Problem manifest is missing, malformed, or references absent files."""


class ParseError(MorbenchError):
    """Matrix Market file could not be parsed.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormat(MorbenchError):
    """Matrix Market field/symmetry outside the supported subset."""


class SchemaError(MorbenchError):
    """Configuration violates the expected schema.

    Carries a dotted ``path`` locating the offender, e.g.
    ``newEngland_n66m1q1.alg_iso.bt.cst[0].tol``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


# --- numerical errors --------------------------------------------------------

class SingularMatrix(MorbenchError):
    """LU pivot fell below the singularity threshold."""


class SingularE(MorbenchError):
    """Descriptor matrix E is numerically singular; the system is rejected."""


class NotPSD(MorbenchError):
    """Matrix handed to the semidefinite Cholesky has a negative pivot."""


class NonFinite(MorbenchError):
    """NaN or infinity encountered (overflowing simulation, bad input)."""


class SignDivergence(MorbenchError):
    """Matrix sign iteration stagnated or hit a singular iterate.

    Raised for spectra on or near the imaginary axis; for Lyapunov solves
    also raised when the iteration settles on a sign different from -I
    (the system matrix is not Hurwitz).
    """


class BalanceError(MorbenchError):
    """Balancing projection failed its bi-orthogonality check."""


class UnknownMethod(MorbenchError):
    """(method_id, impl_id) pair is not in the method registry."""


class InvalidRange(MorbenchError):
    """Frequency range is empty or inverted."""


class SingularAtFrequency(MorbenchError):
    """Transfer function evaluated at (or numerically at) a system pole."""


# --- reporting errors --------------------------------------------------------

class EmptySeries(MorbenchError):
    """Runtime scaling requested for a series with no successful runs."""


class UnknownFormat(MorbenchError):
    """Report format is neither 'md' nor 'tex'."""
