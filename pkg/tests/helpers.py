import numpy as np

from mlab.oracle import haar_unitary


def random_unitary(rng, d):
    return haar_unitary(rng, d)


def random_states(rng, n, d):
    z = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def plus_type(n, i, j, phase=0.0):
    psi = np.zeros(n, dtype=complex)
    psi[i] = 1 / np.sqrt(2)
    psi[j] = np.exp(1j * phase) / np.sqrt(2)
    return psi
