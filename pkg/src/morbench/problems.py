"""Benchmark registry: matrix-file ingestion, manifests, validation.

A registry is a directory with one subdirectory per problem, each holding
a ``manifest.json`` and the referenced Matrix Market files::

    <registry>/<id>/manifest.json
    <registry>/<id>/A.mtx ...

The manifest schema is ``{"id": str, "format_version": 1,
"files": {"A": str, "B": str, "C"?: str, "D"?: str, "E"?: str},
"metadata": {str: str}}``. Matrix files use the Matrix Market text format
(``array`` and ``coordinate``, fields ``real``/``integer``, symmetry
``general``/``symmetric``); everything is densified at load.

Defaults when roles are absent: E and C are the identity (C's default
forces q = n) and D is zero.
"""

import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from . import linalg
from .exceptions import (
    DimensionMismatch,
    ManifestError,
    ParseError,
    SingularE,
    SingularMatrix,
    UnsupportedFormat,
)
from .model import BenchmarkProblem, LtiSystem, parse_problem_id

log = logging.getLogger(__name__)

_ROLES = ("A", "B", "C", "D", "E")


@dataclass(frozen=True)
class ProblemManifest:
    """Parsed manifest: id, role-to-path map, metadata."""

    id: str
    files: dict
    metadata: dict
    format_version: int = 1


# --- Matrix Market -----------------------------------------------------------

def read_matrix_market(path):
    """Read a Matrix Market file into a dense float matrix.

    Supports the ``array`` and ``coordinate`` formats with ``real`` or
    ``integer`` fields and ``general`` or ``symmetric`` symmetry
    (symmetric entries are mirrored). ``complex`` and ``pattern`` fields
    raise :class:`UnsupportedFormat`; malformed content raises
    :class:`ParseError` with a line number.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split()
    if len(header) != 5 or header[0] != "%%MatrixMarket" or header[1].lower() != "matrix":
        raise ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'",
                         line=1)
    layout, field, symmetry = (tok.lower() for tok in header[2:5])
    if layout not in ("array", "coordinate"):
        raise UnsupportedFormat(f"unsupported format {layout!r}")
    if field not in ("real", "integer"):
        raise UnsupportedFormat(f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise UnsupportedFormat(f"unsupported symmetry {symmetry!r}")

    # skip comments and blank lines, remembering source line numbers
    body = [(no, ln) for no, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", line=len(lines))
    size_no, size_line = body[0]
    entries = body[1:]
    dims = size_line.split()

    if layout == "coordinate":
        if len(dims) != 3:
            raise ParseError("coordinate size line needs 'rows cols nnz'", line=size_no)
        try:
            rows, cols, nnz = (int(tok) for tok in dims)
        except ValueError:
            raise ParseError("size line entries must be integers", line=size_no)
        if len(entries) != nnz:
            raise ParseError(f"expected {nnz} entries, found {len(entries)}",
                             line=size_no)
        matrix = np.zeros((rows, cols))
        for no, ln in entries:
            toks = ln.split()
            if len(toks) != 3:
                raise ParseError("coordinate entry needs 'i j value'", line=no)
            try:
                i, j = int(toks[0]), int(toks[1])
                value = float(toks[2])
            except ValueError:
                raise ParseError(f"cannot parse entry {ln!r}", line=no)
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise ParseError(f"index ({i}, {j}) out of bounds", line=no)
            matrix[i - 1, j - 1] += value
            if symmetry == "symmetric" and i != j:
                matrix[j - 1, i - 1] += value
        return matrix

    if len(dims) != 2:
        raise ParseError("array size line needs 'rows cols'", line=size_no)
    try:
        rows, cols = (int(tok) for tok in dims)
    except ValueError:
        raise ParseError("size line entries must be integers", line=size_no)
    expected = rows * cols if symmetry == "general" else rows * (rows + 1) // 2
    if len(entries) != expected:
        raise ParseError(f"expected {expected} values, found {len(entries)}",
                         line=size_no)
    values = []
    for no, ln in entries:
        try:
            values.append(float(ln.strip()))
        except ValueError:
            raise ParseError(f"cannot parse value {ln.strip()!r}", line=no)
    if symmetry == "general":
        return np.array(values).reshape((cols, rows)).T
    matrix = np.zeros((rows, cols))
    it = iter(values)
    for j in range(cols):
        for i in range(j, rows):
            matrix[i, j] = next(it)
    return np.tril(matrix) + np.tril(matrix, -1).T


def write_matrix_market(path, matrix, comment=None):
    """Write a dense matrix as a Matrix Market ``array real general`` file.

    Values carry 17 significant digits, so a read-back reproduces every
    binary64 entry bit-exactly.
    """
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        if comment:
            fh.write(f"% {comment}\n")
        rows, cols = matrix.shape
        fh.write(f"{rows} {cols}\n")
        for j in range(cols):
            for i in range(rows):
                fh.write(f"{matrix[i, j]:.16e}\n")


# --- manifests and loading ---------------------------------------------------

def read_manifest(manifest_path):
    """Parse and validate a ``manifest.json``; referenced files must exist."""
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ManifestError("manifest must be a JSON object")
    problem_id = raw.get("id")
    if not isinstance(problem_id, str):
        raise ManifestError("manifest lacks a string 'id'")
    parse_problem_id(problem_id)
    version = raw.get("format_version", 1)
    if version != 1:
        raise ManifestError(f"unsupported format_version {version!r}")
    files = raw.get("files")
    if not isinstance(files, dict) or not files:
        raise ManifestError("manifest lacks a 'files' object")
    base = os.path.dirname(os.path.abspath(manifest_path))
    resolved = {}
    for role, rel in files.items():
        if role not in _ROLES:
            raise ManifestError(f"unknown matrix role {role!r}")
        full = os.path.join(base, rel)
        if not os.path.isfile(full):
            raise ManifestError(f"referenced file does not exist: {rel}")
        resolved[role] = full
    for role in ("A", "B"):
        if role not in resolved:
            raise ManifestError(f"mandatory role {role} missing")
    metadata = raw.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ManifestError("'metadata' must be an object")
    return ProblemManifest(problem_id, resolved, dict(metadata), version)


def load_problem(manifest_path):
    """Load a problem and assemble its state-space system.

    Applies the default rules (absent E, C -> identity; absent D -> zero),
    cross-checks the dimensions declared in the ID against the loaded
    matrices, and verifies that an explicit E is nonsingular.

    Returns ``(BenchmarkProblem, LtiSystem)``.
    """
    manifest = read_manifest(manifest_path)
    name, n, m, q = parse_problem_id(manifest.id)
    loaded = {role: read_matrix_market(path) for role, path in manifest.files.items()}

    a = loaded["A"]
    if a.shape != (n, n):
        raise DimensionMismatch(f"{manifest.id}: A has shape {a.shape}, id declares n={n}")
    b = loaded["B"]
    if b.shape != (n, m):
        raise DimensionMismatch(f"{manifest.id}: B has shape {b.shape}, expected ({n}, {m})")
    if "C" in loaded:
        c = loaded["C"]
        if c.shape != (q, n):
            raise DimensionMismatch(
                f"{manifest.id}: C has shape {c.shape}, expected ({q}, {n})")
    else:
        if q != n:
            raise DimensionMismatch(
                f"{manifest.id}: C absent implies q=n, but id declares q={q}, n={n}")
        c = np.eye(n)
    d = loaded.get("D")
    if d is not None and d.shape != (q, m):
        raise DimensionMismatch(f"{manifest.id}: D has shape {d.shape}, expected ({q}, {m})")
    e = loaded.get("E")
    if e is not None:
        if e.shape != (n, n):
            raise DimensionMismatch(f"{manifest.id}: E has shape {e.shape}, expected ({n}, {n})")
        try:
            linalg.lu_factor(e)
        except SingularMatrix as exc:
            raise SingularE(f"{manifest.id}: E is numerically singular ({exc})")

    system = LtiSystem(a=a, b=b, c=c, d=d, e=e)
    problem = BenchmarkProblem(
        id=manifest.id,
        matrix_files=dict(manifest.files),
        metadata=dict(manifest.metadata),
        declared_dims=(n, m, q),
    )
    return problem, system


def write_problem(registry_dir, problem_id, system, metadata=None):
    """Write a system into a registry directory (inverse of load_problem).

    Only explicitly stored roles are written; implicit identity E/C and
    zero D stay implicit. Returns the manifest path.
    """
    target = os.path.join(registry_dir, problem_id)
    os.makedirs(target, exist_ok=True)
    files = {"A": "A.mtx", "B": "B.mtx", "C": "C.mtx"}
    write_matrix_market(os.path.join(target, "A.mtx"), system.a)
    write_matrix_market(os.path.join(target, "B.mtx"), system.b)
    write_matrix_market(os.path.join(target, "C.mtx"), system.c)
    if system.d is not None:
        files["D"] = "D.mtx"
        write_matrix_market(os.path.join(target, "D.mtx"), system.d)
    if system.e is not None:
        files["E"] = "E.mtx"
        write_matrix_market(os.path.join(target, "E.mtx"), system.e)
    manifest = {
        "id": problem_id,
        "format_version": 1,
        "files": files,
        "metadata": metadata or {},
    }
    manifest_path = os.path.join(target, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest_path


def list_problems(registry_dir):
    """All valid problems under a registry directory, sorted by id.

    Malformed manifests are logged as warnings and skipped; an empty or
    manifest-free directory yields an empty list.
    """
    found = []
    if not os.path.isdir(registry_dir):
        raise ManifestError(f"registry directory does not exist: {registry_dir}")
    for entry in sorted(os.listdir(registry_dir)):
        manifest_path = os.path.join(registry_dir, entry, "manifest.json")
        if not os.path.isfile(manifest_path):
            continue
        try:
            manifest = read_manifest(manifest_path)
            name, n, m, q = parse_problem_id(manifest.id)
            found.append(BenchmarkProblem(
                id=manifest.id,
                matrix_files=dict(manifest.files),
                metadata=dict(manifest.metadata),
                declared_dims=(n, m, q),
            ))
        except Exception as exc:
            log.warning("skipping %s: %s", manifest_path, exc)
    found.sort(key=lambda p: p.id)
    return found


def find_problem(registry_dir, problem_id):
    """Manifest path of a problem in a registry, or ManifestError."""
    manifest_path = os.path.join(registry_dir, problem_id, "manifest.json")
    if not os.path.isfile(manifest_path):
        raise ManifestError(f"problem {problem_id!r} not found in {registry_dir}")
    return manifest_path


def is_stable(system):
    """Decide Hurwitz stability of the pencil (A, E) via the matrix sign.

    True iff the sign of inv(E) @ A converges to -I, i.e. every eigenvalue
    has negative real part. Raises :class:`SignDivergence` when the
    iteration stagnates (eigenvalues on or numerically near the imaginary
    axis); that outcome is "indeterminate" rather than False.
    """
    from .methods import matrix_sign  # local import, methods builds on this module's level

    if system.e is not None:
        a_std = linalg.solve(linalg.lu_factor(system.e), system.a)
    else:
        a_std = system.a
    sign = matrix_sign(a_std)
    resid = np.linalg.norm(sign + np.eye(system.n)) / max(np.linalg.norm(sign), 1e-300)
    return bool(resid <= 1e-8)
