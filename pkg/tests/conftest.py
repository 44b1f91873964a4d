"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from morbench.model import LtiSystem


def rand_stable(rng, n, m=1, q=1, with_e=False):
    """Random stable system via the shift construction A = R - (|R| + 1) I."""
    r_mat = rng.standard_normal((n, n))
    a = r_mat - (np.linalg.norm(r_mat, 2) + 1.0) * np.eye(n)
    b = rng.standard_normal((n, m))
    c = rng.standard_normal((q, n))
    e = None
    if with_e:
        e = np.eye(n) + 0.1 * rng.standard_normal((n, n))
    return LtiSystem(a=a, b=b, c=c, e=e)


def rand_stable_gentle(rng, n, m=1, q=1):
    """Random stable system with Re(eig) in about [-2.5, -0.5].

    The moderate decay rates keep fixed-step quadrature errors small,
    which matters when comparing Gramian backends.
    """
    r_mat = rng.standard_normal((n, n))
    r_mat /= np.linalg.norm(r_mat, 2)
    a = r_mat - 1.5 * np.eye(n)
    b = rng.standard_normal((n, m))
    c = rng.standard_normal((q, n))
    return LtiSystem(a=a, b=b, c=c)


def lyap_kron(a, g):
    """Oracle: dense Kronecker solve of A X + X A^T + G = 0."""
    n = a.shape[0]
    eye = np.eye(n)
    lhs = np.kron(eye, a) + np.kron(a, eye)
    x = np.linalg.solve(lhs, -g.reshape(-1, order="F"))
    return x.reshape((n, n), order="F")


def tf_dense(system, s):
    """Oracle: transfer function via a plain dense solve."""
    n = system.n
    d = system.d_matrix()
    if n == 0:
        return d.astype(complex)
    e = system.e if system.e is not None else np.eye(n)
    return system.c @ np.linalg.solve(s * e - system.a, system.b) + d


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def siso_lag():
    """G(s) = 1 / (s + 1)."""
    return LtiSystem(a=[[-1.0]], b=[[1.0]], c=[[1.0]])
