import numpy as np
import pytest

from bulkedge.lattice import Lattice
from bulkedge.models import ModelSpec, build_hamiltonian
from bulkedge.operators import LocalOperator
from bulkedge.spectral import eigh


def rand_hermitian(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def matrix_operator(m: np.ndarray) -> LocalOperator:
    """Wrap an arbitrary square matrix as an operator on a one-site lattice."""
    lat = Lattice((1,), ("open",), n_orb=m.shape[0])
    return LocalOperator(lat, m)


@pytest.fixture(scope="session")
def toy16_dec():
    spec = ModelSpec("toy-dirac", (16, 16), ("periodic", "periodic"), mass=1.0)
    return spec, eigh(build_hamiltonian(spec))
