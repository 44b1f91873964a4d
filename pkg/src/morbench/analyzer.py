"""Error measures and frequency-response sampling.

Error norms are discrete sequence norms over samples of the largest
singular value of the error transfer function G(i w) - G_r(i w) on a
logarithmic frequency grid:

    l1 = sum |e_k|, l2 = sqrt(sum e_k^2), linf = max |e_k|,
    l0 = #{k : |e_k| > 1e-12 * linf},

plus the h2 norm of the error system computed from its controllability
Gramian, sqrt(trace(C P C^T)). h2 is +inf for systems with nonzero
feedthrough or an unstable/indeterminate spectrum, so result tables stay
rectangular.

Frequency curves are sampled for three plot kinds (bode: entrywise
magnitudes, sigma: all singular values, frobenius: Frobenius norm) for
the original, reduced, and error systems, plus the scalar error curve
sigma_max(G_err).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import linalg, methods
from .exceptions import (
    DimensionMismatch,
    InvalidRange,
    SignDivergence,
    SingularAtFrequency,
    SingularMatrix,
)
from .model import NORM_IDS, LtiSystem, MeasureSet

log = logging.getLogger(__name__)

#: Relative threshold under which an error sample counts as zero for l0.
L0_REL_TOL = 1e-12

DEFAULT_FREQ_RANGE = (-8, 8)
DEFAULT_MAX_POINTS = 500
DEFAULT_TIME_POINTS = 250


@dataclass(frozen=True)
class FrequencyGrid:
    """Log-spaced angular frequencies from 10^lo to 10^hi inclusive."""

    exponents: tuple
    points: int
    omegas: np.ndarray

    def key(self):
        return (float(self.exponents[0]), float(self.exponents[1]), self.points)


def freq_grid(freq_range, max_points):
    """Build a logarithmic frequency grid.

    ``freq_range`` holds the base-10 exponents (lo, hi) in rad/s with
    lo < hi; ``max_points`` >= 2 points are spaced logarithmically with
    both endpoints included.
    """
    lo, hi = float(freq_range[0]), float(freq_range[1])
    if not lo < hi:
        raise InvalidRange(f"frequency range must satisfy lo < hi, got ({lo}, {hi})")
    if max_points < 2:
        raise InvalidRange(f"grid needs at least 2 points, got {max_points}")
    omegas = np.logspace(lo, hi, int(max_points))
    omegas.setflags(write=False)
    return FrequencyGrid(exponents=(lo, hi), points=int(max_points), omegas=omegas)


def eval_tf(system, s):
    """Transfer function G(s) = C (sE - A)^(-1) B + D at one complex point.

    One complex LU factorization and m solves per call. Raises
    :class:`SingularAtFrequency` when s is numerically a pole.
    """
    n = system.n
    d = system.d_matrix()
    if n == 0:
        return d.astype(complex)
    pencil = s * (system.e if system.e is not None else np.eye(n)) - system.a
    try:
        lu = linalg.lu_factor(pencil.astype(complex))
    except SingularMatrix as exc:
        raise SingularAtFrequency(f"s = {s} is numerically a pole: {exc}")
    x = linalg.solve(lu, system.b.astype(complex))
    return system.c @ x + d


def _complex_svals(g):
    """Singular values of a complex matrix via its real 2q x 2m embedding."""
    re, im = g.real, g.imag
    embedded = np.block([[re, -im], [im, re]])
    _, svals, _ = linalg.jacobi_svd(embedded)
    # each singular value of g appears twice in the embedding
    return svals[::2]


def error_system(orig, rom):
    """Block system realizing G_err(s) = G(s) - G_r(s).

    Order n + r with A_err = blockdiag(A, A_r), E_err = blockdiag(E, I)
    (None when both are implicit), B_err = [B; B_r], C_err = [C, -C_r],
    D_err = D - D_r.
    """
    rsys = rom.system
    if (orig.m, orig.q) != (rsys.m, rsys.q):
        raise DimensionMismatch(
            f"original is {orig.q} x {orig.m}, reduced model is {rsys.q} x {rsys.m}")
    n, r = orig.n, rsys.n
    a_err = np.zeros((n + r, n + r))
    a_err[:n, :n] = orig.a
    a_err[n:, n:] = rsys.a
    b_err = np.vstack([orig.b, rsys.b])
    c_err = np.hstack([orig.c, -rsys.c])
    if orig.e is None and rsys.e is None:
        e_err = None
    else:
        e_err = np.eye(n + r)
        e_err[:n, :n] = orig.e if orig.e is not None else np.eye(n)
        if rsys.e is not None:
            e_err[n:, n:] = rsys.e
    if orig.d is None and rsys.d is None:
        d_err = None
    else:
        d_err = orig.d_matrix() - rsys.d_matrix()
    return LtiSystem(a=a_err, b=b_err, c=c_err, d=d_err, e=e_err)


@dataclass(frozen=True)
class CurveSamples:
    """Frequency sweeps of one system on one grid.

    ``bode`` rows hold the q*m entrywise magnitudes |G_ij| (row-major),
    ``sigma`` rows the min(q, m) singular values, ``frobenius`` the scalar
    Frobenius norm. ``skipped`` lists grid frequencies that hit a pole.
    """

    omega: np.ndarray
    bode: np.ndarray
    sigma: np.ndarray
    frobenius: np.ndarray
    skipped: tuple


def sample_curves(system, grid):
    """Sample bode, sigma, and frobenius curves of a system on a grid.

    All three kinds are derived from one transfer-function evaluation per
    frequency. Samples at poles are dropped from the arrays and flagged in
    ``skipped``; the returned omega array stays strictly increasing.
    """
    kept_omega, bode, sigma, frob, skipped = [], [], [], [], []
    for omega in grid.omegas:
        try:
            g = eval_tf(system, 1j * omega)
        except SingularAtFrequency:
            skipped.append(float(omega))
            continue
        kept_omega.append(float(omega))
        bode.append(np.abs(g).reshape(-1))
        sigma.append(_complex_svals(g))
        frob.append(float(np.linalg.norm(g)))
    if skipped:
        log.warning("%d of %d samples hit a pole and were skipped",
                    len(skipped), grid.points)
    return CurveSamples(
        omega=np.array(kept_omega),
        bode=np.array(bode) if bode else np.zeros((0, system.q * system.m)),
        sigma=np.array(sigma) if sigma else np.zeros((0, min(system.q, system.m))),
        frobenius=np.array(frob),
        skipped=tuple(skipped),
    )


def lp_norms(error_samples, requested):
    """Discrete sequence norms of the sampled error curve.

    ``requested`` may contain l0, l1, l2, linf; h2 is computed elsewhere
    (it needs the error system, not just samples).
    """
    e = np.abs(np.asarray(error_samples, dtype=float))
    if e.size and not np.all(np.isfinite(e)):
        raise DimensionMismatch("error samples must be finite")
    linf = float(np.max(e)) if e.size else 0.0
    out = {}
    for norm_id in requested:
        if norm_id == "l0":
            out["l0"] = float(np.sum(e > L0_REL_TOL * linf)) if linf > 0 else 0.0
        elif norm_id == "l1":
            out["l1"] = float(np.sum(e))
        elif norm_id == "l2":
            out["l2"] = float(math.sqrt(np.sum(e * e)))
        elif norm_id == "linf":
            out["linf"] = linf
        elif norm_id == "h2":
            raise DimensionMismatch("h2 is not a sampled norm; use h2_norm")
        else:
            raise DimensionMismatch(f"unknown norm id {norm_id!r}")
    return out


def h2_norm(system):
    """H2 norm sqrt(trace(C P C^T)) from the controllability Gramian.

    Returns +inf when the feedthrough is nonzero (the integral diverges)
    or when the spectrum is detected unstable or indeterminate; these
    degenerate cases encode as infinity rather than errors so tables stay
    rectangular.
    """
    if system.d is not None and np.any(system.d != 0.0):
        return math.inf
    if system.n == 0:
        return 0.0
    try:
        gram = methods.gramians_sign(system)
    except SignDivergence:
        return math.inf
    return float(np.linalg.norm(system.c @ gram.lp))


def _grid_from_options(block, fallback_range, fallback_points):
    freq_range = fallback_range
    points = fallback_points
    if isinstance(block, dict):
        if "FreqRange" in block:
            freq_range = tuple(block["FreqRange"])
        if "MaxPoints" in block:
            points = int(block["MaxPoints"])
    return freq_grid(freq_range, points)


def measure(orig, rom, meas_opt=None, bode_opt=None):
    """Compute the full MeasureSet for one successful run.

    The measurement grid takes its range from ``meas_opt.ml_sigmaplot``
    (falling back to ``bode_opt``, then (-8, 8)) and its sample count
    from ``meas_opt.time_points`` (default 250). Plot curves are sampled
    on the per-kind grids of the ``ml_bodemag`` / ``ml_sigmaplot`` /
    ``ml_frobeniusplot`` blocks; the error curve shares the sigma grid.
    """
    meas_opt = meas_opt or {}
    bode_opt = bode_opt or {}
    requested = meas_opt.get("norm_id", list(NORM_IDS))

    fallback_range = DEFAULT_FREQ_RANGE
    if isinstance(bode_opt.get("FreqRange"), (list, tuple)):
        fallback_range = tuple(bode_opt["FreqRange"])
    sigma_block = meas_opt.get("ml_sigmaplot", {})
    meas_range = tuple(sigma_block.get("FreqRange", fallback_range))
    meas_points = int(meas_opt.get("time_points", DEFAULT_TIME_POINTS))
    meas_grid = freq_grid(meas_range, meas_points)

    err_sys = error_system(orig, rom)
    systems = {"original": orig, "reduced": rom.system, "error": err_sys}
    cache = {}

    def curves(which, grid):
        key = (which, grid.key())
        if key not in cache:
            cache[key] = sample_curves(systems[which], grid)
        return cache[key]

    err_meas = curves("error", meas_grid)
    sigma_max = err_meas.sigma[:, 0] if err_meas.sigma.size else np.zeros(0)
    norms = lp_norms(sigma_max, [nid for nid in requested if nid != "h2"])
    if "h2" in requested:
        norms["h2"] = h2_norm(err_sys)
    norms = {nid: norms[nid] for nid in requested}

    kind_blocks = {
        "bode": meas_opt.get("ml_bodemag", {}),
        "sigma": meas_opt.get("ml_sigmaplot", {}),
        "frobenius": meas_opt.get("ml_frobeniusplot", {}),
    }
    freq_samples = {}
    for kind, block in kind_blocks.items():
        grid = _grid_from_options(block if block else bode_opt,
                                  fallback_range, DEFAULT_MAX_POINTS)
        per_system = {name: curves(name, grid) for name in systems}
        omegas = per_system["original"].omega
        aligned = all(np.array_equal(omegas, cs.omega) for cs in per_system.values())
        if not aligned:
            keep = sorted(set.intersection(
                *(set(cs.omega.tolist()) for cs in per_system.values())))
            omegas = np.array(keep)
        block_out = {"omega": omegas.tolist()}
        for name, cs in per_system.items():
            values = getattr(cs, kind)
            if not aligned:
                index = {w: i for i, w in enumerate(cs.omega.tolist())}
                rows = [index[w] for w in omegas.tolist()]
                values = values[rows]
            block_out[name] = values.tolist()
        freq_samples[kind] = block_out

    sigma_grid = _grid_from_options(kind_blocks["sigma"] or bode_opt,
                                    fallback_range, DEFAULT_MAX_POINTS)
    err_curve = curves("error", sigma_grid)
    freq_samples["error"] = {
        "omega": err_curve.omega.tolist(),
        "value": (err_curve.sigma[:, 0] if err_curve.sigma.size else
                  np.zeros(0)).tolist(),
    }
    return MeasureSet(norms=norms, freq_samples=freq_samples)
