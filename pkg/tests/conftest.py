"""Shared random-object helpers for the test suite."""

import numpy as np
import pytest

from loccverify import PartyDims, kraus_from_operators


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase convention fixed."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def haar_isometry(dim_in: int, dim_out: int,
                  rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(dim_out, rng)[:, :dim_in]


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_channel(dims: PartyDims, env_dim: int, rng: np.random.Generator):
    """Random channel of Kraus rank env_dim via a Haar Stinespring isometry."""
    d = dims.total
    v = haar_isometry(d, d * env_dim, rng)
    ops = [v[e * d:(e + 1) * d, :] for e in range(env_dim)]
    return kraus_from_operators(ops, dims)


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)
