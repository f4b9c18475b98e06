"""Brute-force reference implementations used only by the tests.

Written with plain Python loops and ``cmath`` so they share no code path
with the vectorized implementations under test.
"""

import cmath
import math


def inner(x, y):
    return sum(complex(a).conjugate() * complex(b) for a, b in zip(x, y))


def matvec(m, v):
    return [sum(m[i][k] * v[k] for k in range(len(v))) for i in range(len(m))]


def gram(states):
    return [[inner(a, b) for b in states] for a in states]


def cond_probs(states, kets):
    """P[m][a] = |<m|phi(a)>|^2 for a basis given as kets."""
    return [[abs(inner(k, s)) ** 2 for s in states] for k in kets]


def hellinger(p, a1, a2):
    return 0.5 * sum((math.sqrt(max(row[a1], 0)) - math.sqrt(max(row[a2], 0))) ** 2 for row in p)


def bhattacharyya(p, a1, a2):
    return sum(math.sqrt(max(row[a1], 0) * max(row[a2], 0)) for row in p)


def conditional_state(states, ket, rho):
    """(p(m), rho_cond(m)) by the defining formula, elementwise."""
    n = len(states)
    amp = [inner(ket, s) for s in states]
    pm = sum(abs(amp[a]) ** 2 * rho[a][a].real for a in range(n))
    if pm <= 1e-12:
        return pm, None
    cond = [[amp[i] * amp[j].conjugate() * rho[i][j] / pm for j in range(n)] for i in range(n)]
    return pm, cond


def decohered(states, rho):
    n = len(states)
    return [[inner(states[j], states[i]) * rho[i][j] for j in range(n)] for i in range(n)]


def outer(psi):
    return [[a * complex(b).conjugate() for b in psi] for a in psi]


def eig2_hermitian(m):
    """Eigenvalues of a 2x2 Hermitian matrix by the quadratic formula."""
    a, d = m[0][0].real, m[1][1].real
    b = abs(m[0][1])
    mid, rad = 0.5 * (a + d), math.sqrt(0.25 * (a - d) ** 2 + b * b)
    return mid - rad, mid + rad


def y_basis():
    h = 1 / math.sqrt(2)
    return [[h, 1j * h], [h, -1j * h]]


def phase(x):
    return cmath.exp(1j * x)
