"""Bundled synthetic benchmark problems.

Small, license-free systems generated from closed-form constructions so
the test suite and the demos never depend on external downloads. The
generated files live under ``morbench/registry`` in the package; this
module can also materialize them into any directory.
"""

import os

import numpy as np

from .model import LtiSystem, format_problem_id
from .problems import write_problem


def heat_toy(n=100, m=2, q=2):
    """1-D heat equation on a uniform grid with injection and point outputs.

    A is the tridiagonal (1, -2, 1) stencil scaled by (n+1)^2, B injects
    at m interior nodes, C reads q interior nodes. Symmetric negative
    definite A, so the system is stable (and stiff for large n).
    """
    a = (n + 1) ** 2 * (np.diag(-2.0 * np.ones(n))
                        + np.diag(np.ones(n - 1), 1)
                        + np.diag(np.ones(n - 1), -1))
    b = np.zeros((n, m))
    for j, node in enumerate(_spread_nodes(n, m, offset=0.25)):
        b[node, j] = 1.0
    c = np.zeros((q, n))
    for i, node in enumerate(_spread_nodes(n, q, offset=0.33)):
        c[i, node] = 1.0
    return LtiSystem(a=a, b=b, c=c)


def rc_ladder(n=20):
    """Unscaled diffusion ladder: mildly stable SISO chain, non-stiff."""
    a = (np.diag(-2.0 * np.ones(n))
         + np.diag(np.ones(n - 1), 1)
         + np.diag(np.ones(n - 1), -1))
    b = np.zeros((n, 1))
    b[0, 0] = 1.0
    c = np.zeros((1, n))
    c[0, n - 1] = 1.0
    return LtiSystem(a=a, b=b, c=c)


def unstable_toy(n=10):
    """Diagonal system with one right-half-plane eigenvalue."""
    diag = -np.arange(1.0, n + 1.0)
    diag[0] = 0.5
    a = np.diag(diag)
    b = np.ones((n, 1))
    c = np.ones((1, n))
    return LtiSystem(a=a, b=b, c=c)


def _spread_nodes(n, count, offset):
    """count distinct interior node indices spread across [0, n)."""
    nodes = []
    for k in range(count):
        node = int(round((offset + k) / (count + 0.5) * n)) % n
        while node in nodes:
            node = (node + 1) % n
        nodes.append(node)
    return nodes


_BUNDLED = (
    ("heatToy", heat_toy, dict(n=100, m=2, q=2),
     "1-D finite-difference heat equation, stiff"),
    ("rcLadder", rc_ladder, dict(n=20),
     "unscaled diffusion ladder, SISO"),
    ("unstableToy", unstable_toy, dict(n=10),
     "diagonal system with one unstable eigenvalue"),
)


def write_bundled_registry(dest_dir):
    """Materialize every bundled problem under dest_dir; returns the ids."""
    os.makedirs(dest_dir, exist_ok=True)
    ids = []
    for name, builder, kwargs, description in _BUNDLED:
        system = builder(**kwargs)
        problem_id = format_problem_id(name, system.n, system.m, system.q)
        write_problem(dest_dir, problem_id, system, metadata={
            "description": description,
            "license": "CC0-1.0",
            "source": "synthetic, generated by morbench.bundled",
        })
        ids.append(problem_id)
    return ids


def default_registry():
    """Path of the registry shipped inside the package."""
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "registry")


if __name__ == "__main__":  # regenerate the shipped registry in place
    print("\n".join(write_bundled_registry(default_registry())))
