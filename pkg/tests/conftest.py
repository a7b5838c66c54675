import numpy as np
import pytest

from dotgates import Bond, Dot, DotArray


def make_bond(j, k, exchange, t_sq, phase_t=0.0, phase_s=0.0):
    """Bond with |t|^2 = t_sq and arbitrary channel phases."""
    t = np.sqrt(t_sq) * np.exp(1j * phase_t)
    s = np.sqrt(1.0 - t_sq) * np.exp(1j * phase_s)
    return Bond(j, k, exchange, t=t, s=s)


def stellar_array(n_targets, j_scale=1e-3, t_sq=None, zeemans=None, rng=None):
    """Control dot 0 bonded to targets 1..n."""
    rng = rng or np.random.default_rng(0)
    n = n_targets + 1
    if zeemans is None:
        zeemans = 1.0 + 0.9 * rng.random(n)
    if t_sq is None:
        t_sq = 0.72 + 0.2 * rng.random(n_targets)
    dots = [Dot(j, float(e)) for j, e in enumerate(zeemans)]
    bonds = [
        make_bond(0, j + 1, j_scale * (1.0 + rng.random()), float(t_sq[j]))
        for j in range(n_targets)
    ]
    return DotArray(dots, bonds)


def chain_array(n_dots, j_scale=1e-3, t_sq=0.8, zeemans=None, rng=None):
    """Open chain 0-1-...-(n-1) with homogeneous bonds."""
    rng = rng or np.random.default_rng(1)
    if zeemans is None:
        zeemans = 1.0 + 0.9 * rng.random(n_dots)
    dots = [Dot(j, float(e)) for j, e in enumerate(zeemans)]
    bonds = [make_bond(j, j + 1, j_scale, t_sq) for j in range(n_dots - 1)]
    return DotArray(dots, bonds)


def random_connected_array(rng, n_dots, j_scale=1e-3):
    """Random spanning tree plus one extra edge when it fits."""
    zeemans = 1.0 + 0.9 * rng.random(n_dots)
    dots = [Dot(j, float(e)) for j, e in enumerate(zeemans)]
    edges = set()
    for j in range(1, n_dots):
        k = int(rng.integers(0, j))
        edges.add((k, j))
    attempts = 0
    while len(edges) < n_dots and attempts < 20:
        a, b = rng.choice(n_dots, size=2, replace=False)
        edges.add((min(a, b), max(a, b)))
        attempts += 1
    bonds = [
        make_bond(j, k, j_scale * (0.6 + rng.random()), 0.7 + 0.25 * rng.random())
        for j, k in sorted(edges)
    ]
    return DotArray(dots, bonds)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
