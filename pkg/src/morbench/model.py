"""Domain types shared by all modules.

Everything here is immutable after construction and safe to share across
concurrent workers. Construction validates shapes and invariants; no I/O
and no numerics beyond that happen in this module.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, MalformedId, ManifestError, SchemaError

_ID_RE = re.compile(r"^([A-Za-z0-9]+)_n([1-9][0-9]*)m([1-9][0-9]*)q([1-9][0-9]*)$")

#: Norm identifiers understood by the analyzer.
NORM_IDS = ("l0", "l1", "l2", "linf", "h2")

#: Plot kinds produced by the analyzer and consumed by the explorer.
PLOT_KINDS = ("bode", "sigma", "frobenius", "error")


def parse_problem_id(problem_id):
    """Split a benchmark ID into its name and (n, m, q) dimensions.

    IDs follow the pattern ``<name>_n<N>m<M>q<Q>`` with a purely
    alphanumeric name and positive integer dimensions, e.g.
    ``steelProfile_n1357m7q6``.

    Returns ``(name, n, m, q)`` or raises :class:`MalformedId`.
    """
    match = _ID_RE.match(problem_id)
    if match is None:
        raise MalformedId(f"not a valid benchmark id: {problem_id!r}")
    name, n, m, q = match.groups()
    return name, int(n), int(m), int(q)


def format_problem_id(name, n, m, q):
    """Inverse of :func:`parse_problem_id` for valid components."""
    if not re.fullmatch(r"[A-Za-z0-9]+", name):
        raise MalformedId(f"name must be alphanumeric: {name!r}")
    if min(n, m, q) < 1:
        raise MalformedId("dimensions must be positive")
    return f"{name}_n{n}m{m}q{q}"


def _as_matrix(value, name):
    # private copy so marking it read-only never touches the caller's array
    arr = np.array(value, dtype=float, order="F", copy=True)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-d matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LtiSystem:
    """State-space system E x' = A x + B u, y = C x + D u.

    ``e`` is None for an implicit identity and ``d`` is None for an
    implicit zero feedthrough; neither is materialized. A, E are n x n,
    B is n x m, C is q x n, D is q x m. Matrices are stored dense,
    column-major, read-only.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray | None = None
    e: np.ndarray | None = None

    def __post_init__(self):
        a = _as_matrix(self.a, "A")
        b = _as_matrix(self.b, "B")
        c = _as_matrix(self.c, "C")
        n = a.shape[0]
        if a.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {a.shape}")
        # n = 0 is allowed so reduced models can degenerate to feedthrough
        # only; loaded problems enforce n >= 1 through their id
        if b.shape[1] < 1 or c.shape[0] < 1:
            raise DimensionMismatch("m and q must be at least 1")
        if b.shape[0] != n:
            raise DimensionMismatch(f"B has {b.shape[0]} rows, expected n={n}")
        if c.shape[1] != n:
            raise DimensionMismatch(f"C has {c.shape[1]} columns, expected n={n}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if self.d is not None:
            d = _as_matrix(self.d, "D")
            if d.shape != (c.shape[0], b.shape[1]):
                raise DimensionMismatch(
                    f"D has shape {d.shape}, expected ({c.shape[0]}, {b.shape[1]})")
            object.__setattr__(self, "d", d)
        if self.e is not None:
            e = _as_matrix(self.e, "E")
            if e.shape != (n, n):
                raise DimensionMismatch(f"E has shape {e.shape}, expected ({n}, {n})")
            object.__setattr__(self, "e", e)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.b.shape[1]

    @property
    def q(self):
        return self.c.shape[0]

    def d_matrix(self):
        """Feedthrough as a materialized q x m array (zeros when implicit)."""
        if self.d is not None:
            return self.d
        return np.zeros((self.q, self.m))


@dataclass(frozen=True)
class ReducedModel:
    """Result of a reduction: the order-r system plus its singular-value data.

    ``hsv`` holds all computed Hankel singular values in non-increasing
    order and ``truncation_tail`` their sum beyond the kept order r, the
    quantity entering the classical 2*sum(tail) error bound.
    """

    system: LtiSystem
    r: int
    hsv: np.ndarray
    truncation_tail: float

    def __post_init__(self):
        hsv = np.asarray(self.hsv, dtype=float)
        hsv.setflags(write=False)
        object.__setattr__(self, "hsv", hsv)
        if hsv.ndim != 1:
            raise DimensionMismatch("hsv must be a vector")
        if hsv.size and (np.any(hsv < 0) or np.any(np.diff(hsv) > 1e-12 * hsv[0])):
            raise DimensionMismatch("hsv must be nonnegative and non-increasing")
        if self.r != self.system.n:
            raise DimensionMismatch(
                f"reduced order {self.r} disagrees with system order {self.system.n}")
        if self.r > hsv.size:
            raise DimensionMismatch("reduced order exceeds number of singular values")


@dataclass(frozen=True)
class BenchmarkProblem:
    """A registered dataset: ID, matrix file locations, free-form metadata."""

    id: str
    matrix_files: dict
    metadata: dict
    declared_dims: tuple

    def __post_init__(self):
        name, n, m, q = parse_problem_id(self.id)
        if tuple(self.declared_dims) != (n, m, q):
            raise DimensionMismatch(
                f"declared dims {self.declared_dims} disagree with id {self.id}")
        missing = {"A", "B"} - set(self.matrix_files)
        if missing:
            raise ManifestError(f"problem {self.id} lacks mandatory roles {sorted(missing)}")


RECOGNIZED_PARAMS = ("tol", "max_order", "t_final", "steps")


@dataclass(frozen=True)
class AlgorithmIsotope:
    """A (method, implementation, parameter-set) triple; the unit of comparison.

    ``label`` identifies the isotope in plans, results, and reports; it is
    derived from the configuration (``<method>-<impl>[-k]``) and must be
    unique within one run plan.
    """

    method_id: str
    impl_id: str
    params: dict
    label: str

    def __post_init__(self):
        if not self.label:
            raise SchemaError("isotope label must be nonempty")
        for key in self.params:
            if key not in RECOGNIZED_PARAMS:
                raise SchemaError(
                    f"unrecognized parameter {key!r} for isotope {self.label}")


@dataclass(frozen=True)
class EnvInfo:
    """Execution environment snapshot recorded with every results file."""

    timestamp: str
    os_name_version: str
    tool_version: str
    hostname: str

    def __post_init__(self):
        for name in ("timestamp", "os_name_version", "tool_version", "hostname"):
            if not getattr(self, name):
                raise DimensionMismatch(f"EnvInfo.{name} must be nonempty")


@dataclass(frozen=True)
class RunRecord:
    """One isotope applied to one problem.

    ``wall_time_s`` covers the reduction call only, measured on a
    monotonic clock. ``reduced_order`` is present exactly when
    ``status == "ok"``.
    """

    isotope: str
    problem_id: str
    status: str
    wall_time_s: float
    reduced_order: int | None = None
    message: str | None = None
    environment: EnvInfo | None = None

    def __post_init__(self):
        if self.status not in ("ok", "failed"):
            raise DimensionMismatch(f"invalid status {self.status!r}")
        if (self.status == "ok") != (self.reduced_order is not None):
            raise DimensionMismatch("reduced_order present iff status is ok")
        if self.wall_time_s < 0:
            raise DimensionMismatch("wall_time_s must be nonnegative")


@dataclass(frozen=True)
class MeasureSet:
    """Computed error norms and frequency-response samples for one run.

    ``norms`` maps requested norm ids to nonnegative values (+inf encodes
    the degenerate h2 cases). ``freq_samples`` maps each plot kind to a
    dict with an ``omega`` array (strictly increasing) and one value array
    per curve.
    """

    norms: dict
    freq_samples: dict = field(default_factory=dict)

    def __post_init__(self):
        for norm_id, value in self.norms.items():
            if norm_id not in NORM_IDS:
                raise DimensionMismatch(f"unknown norm id {norm_id!r}")
            if not (value >= 0):  # catches NaN
                raise DimensionMismatch(f"norm {norm_id} must be nonnegative")
        for kind, block in self.freq_samples.items():
            if kind not in PLOT_KINDS:
                raise DimensionMismatch(f"unknown plot kind {kind!r}")
            omega = block.get("omega", [])
            if any(b <= a for a, b in zip(omega, omega[1:])):
                raise DimensionMismatch(f"{kind}: omega values must be strictly increasing")
