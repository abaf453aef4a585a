"""Reference values for the C++ tests, computed straight from the defining
formulas with numpy/scipy (matrix exponentials via scipy.linalg.expm,
cubic roots via numpy.roots). Run it and paste the printed values."""

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
P = [I2, X, Y, Z]


def pp(i, j):
    return np.kron(P[i], P[j])


Q = np.array([[1, -1j, 0, 0],
              [0, 0, 1, -1j],
              [0, 0, -1, -1j],
              [1, 1j, 0, 0]], dtype=complex) / np.sqrt(2)


def canonical(c1, c2, c3):
    return expm(-0.5j * (c1 * pp(1, 1) + c2 * pp(2, 2) + c3 * pp(3, 3)))


def su2(g, b, a):
    return expm(0.5j * g * Z) @ expm(0.5j * b * Y) @ expm(0.5j * a * Z)


def local(angles):
    return np.kron(su2(*angles[:3]), su2(*angles[3:]))


def makhlin(u):
    ub = Q.conj().T @ u @ Q
    m = ub.T @ ub
    det = np.linalg.det(u)
    tr = np.trace(m)
    g12 = tr * tr / (16 * det)
    g3 = (tr * tr - np.trace(m @ m)) / (4 * det)
    return g12.real, g12.imag, g3.real


def d_of(g):
    g1, g2, g3 = g
    return g3 * np.hypot(g1, g2) - g1


def s_of(g):
    g1, g2, g3 = g
    r = np.roots([1, -g3, 4 * np.hypot(g1, g2) - 1, g3 - 4 * g1])
    z = np.sort(np.clip(r.real, -1, 1))[::-1]
    return np.pi - np.arccos(z[0]) - np.arccos(z[2]), z


def D_of(g):
    d = d_of(g)
    s, _ = s_of(g)
    if d > 0 and s > 0:
        return d
    if d < 0 and s < 0:
        return -d
    return 0.0


def f_pe(c1, c2, c3):
    h = np.pi / 2
    if c1 + c2 <= h:
        return np.cos((c1 + c2 - h) / 4) ** 2
    if c2 + c3 >= h:
        return np.cos((c2 + c3 - h) / 4) ** 2
    if c1 - c2 >= h:
        return np.cos((c1 - c2 - h) / 4) ** 2
    return 1.0


k_left = local([0.3, -1.1, 2.0, 0.7, 0.4, -0.9])
k_right = local([-2.2, 0.8, 0.1, 1.5, -0.6, 2.9])

print("# dressed canonical gates k_left A(c) k_right")
for c in [(np.pi / 2, np.pi / 4, 0.0), (0.9, 0.5, 0.2), (0.3, 0.2, 0.1), (1.6, 1.3, 1.2)]:
    u = k_left @ canonical(*c) @ k_right
    g = makhlin(u)
    s, z = s_of(g)
    print(f"c={c!r}")
    print(f"  g = {g[0]!r}, {g[1]!r}, {g[2]!r}")
    print(f"  z = {z[0]!r}, {z[1]!r}, {z[2]!r}")
    print(f"  d = {d_of(g)!r}  s = {s!r}  D = {D_of(g)!r}  F_PE = {f_pe(*c)!r}")

sqrt_swap = expm(0.25j * np.pi * (np.eye(4) - (pp(0, 0) + pp(1, 1) + pp(2, 2) + pp(3, 3)) / 2))
print("# sqrt(SWAP)")
print("  g =", makhlin(sqrt_swap))
print("  g(A(pi/4,pi/4,pi/4)) =", makhlin(canonical(np.pi / 4, np.pi / 4, np.pi / 4)))

# Sequence oracle: N = 3, all 15 channels, fixed coefficients.
N = 3
rng = np.random.default_rng(20240501)
angles = rng.uniform(-np.pi, np.pi, 6 * N)
delta = rng.normal(0, 0.13, (N, 15))
delta_eta = rng.normal(0, 0.01, 6 * N)
channels = [(i, j) for i in range(4) for j in range(4) if (i, j) != (0, 0)]
Zs = expm(-1j * np.pi / N * pp(3, 3))
print("# sequence N=3")
print("angles =", ", ".join(repr(float(a)) for a in angles))
print("delta =", ", ".join(repr(float(a)) for a in delta.ravel()))
print("delta_eta =", ", ".join(repr(float(a)) for a in delta_eta))
for scale in (1.0, 0.1):
    a = angles * scale
    U = np.eye(4, dtype=complex)
    O = np.eye(4, dtype=complex)
    for n in range(N):
        gen = sum(delta[n, k] * pp(*channels[k]) for k in range(15))
        Dn = expm(-1j / N * gen)
        Rn = local(a[6 * n:6 * n + 6] * (1 + delta_eta[6 * n:6 * n + 6]))
        U = Zs @ Dn @ Rn @ U
        O = Zs @ local(a[6 * n:6 * n + 6]) @ O
    eps = 1 - abs(np.trace(O.conj().T @ U)) ** 2 / 16
    g = makhlin(U)
    print(f"scale {scale}: epsilon = {eps!r}  D = {D_of(g)!r}  g = {g}")
