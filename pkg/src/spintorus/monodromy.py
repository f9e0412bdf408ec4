"""Monodromy matrix, antiperiodic transfer matrix, and derived operators.

The monodromy matrix is the ordered product of R-matrices over sites N..1
acting on auxiliary x quantum space; it is held as the n x n array of its
auxiliary blocks, each a dense operator on the chain.  The blocks are built
by appending one site per step: the site being appended is a fresh (fastest)
tensor factor, so each step is a pure Kronecker extension and no
n^(N+1)-dimensional object is ever materialized.

Entry naming: A = block (1,1), B_i = block (1,i), C^i = block (i,1),
D^i_j = block (i,j) for i, j >= 2.  The antiperiodic transfer matrix is the
twisted auxiliary trace; for rank 3 it reads B_2(u) + D^2_3(u) + C^3(u).
"""
from __future__ import annotations

import numpy as np

from .chain import ChainSpec
from .rmatrix import local_hamiltonian, r_element, r_matrix, twist_matrix
from .tensor_core import kron_chain, site_matrix_unit

__all__ = [
    "scalar_a", "scalar_d", "scalar_d_l", "monodromy_blocks", "monodromy_entry",
    "op_A", "op_B", "op_C", "op_D", "transfer", "twist_operator",
    "vacuum_ket", "vacuum_bra", "conjugate_vacuum_ket", "conjugate_vacuum_bra",
    "product_identity_residual", "global_hamiltonian", "fd4_derivative",
    "transfer_log_derivative_residual", "exchange_relation_residuals",
]


def scalar_a(u: complex, spec: ChainSpec) -> complex:
    """Vacuum eigenvalue of the (1,1) entry: prod_l sinh(u - theta_l + eta)."""
    return complex(np.prod([np.sinh(u - t + spec.eta) for t in spec.theta]))


def scalar_d(u: complex, spec: ChainSpec) -> complex:
    """Vacuum weight of the lower-diagonal entries: prod_l sinh(u - theta_l)."""
    return complex(np.prod([np.sinh(u - t) for t in spec.theta]))


def scalar_d_l(u: complex, l: int, spec: ChainSpec) -> complex:
    """scalar_d with the factor for site l (1-indexed) removed."""
    if not (1 <= l <= spec.N):
        raise ValueError(f"site {l} outside 1..{spec.N}")
    return complex(np.prod([np.sinh(u - t)
                            for j, t in enumerate(spec.theta, start=1) if j != l]))


def _blocks_raw(u: complex, n: int, eta: complex, thetas) -> list:
    """Auxiliary blocks of R_{0N}(u - theta_N) ... R_{01}(u - theta_1)."""
    blocks = None
    for theta in thetas:  # site 1 first; appended site is the fastest factor
        rb = r_matrix(u - theta, n, eta).reshape(n, n, n, n)
        site = [[np.ascontiguousarray(rb[i, :, j, :]) for j in range(n)]
                for i in range(n)]
        if blocks is None:
            blocks = site
            continue
        new = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = np.kron(blocks[0][j], site[i][0])
                for k in range(1, n):
                    acc += np.kron(blocks[k][j], site[i][k])
                row.append(acc)
            new.append(row)
        blocks = new
    return blocks


# Small keyed cache; the SoV layer repeatedly needs blocks at the theta points.
_BLOCK_CACHE: dict = {}
_CACHE_LIMIT = 64
_CACHE_DIM_MAX = 256


def monodromy_blocks(u: complex, spec: ChainSpec) -> list:
    """All n^2 auxiliary blocks at spectral point u (cached; do not mutate)."""
    key = (complex(u), spec)
    hit = _BLOCK_CACHE.get(key)
    if hit is not None:
        return hit
    blocks = _blocks_raw(complex(u), spec.n, spec.eta, spec.theta)
    if spec.dim <= _CACHE_DIM_MAX:
        if len(_BLOCK_CACHE) >= _CACHE_LIMIT:
            _BLOCK_CACHE.pop(next(iter(_BLOCK_CACHE)))
        _BLOCK_CACHE[key] = blocks
    return blocks


def monodromy_entry(u: complex, i: int, j: int, spec: ChainSpec) -> np.ndarray:
    """Auxiliary-space entry (i,j), 1-indexed, as a dense chain operator."""
    if not (1 <= i <= spec.n and 1 <= j <= spec.n):
        raise ValueError(f"entry ({i},{j}) outside 1..{spec.n}")
    return monodromy_blocks(u, spec)[i - 1][j - 1].copy()


def op_A(u: complex, spec: ChainSpec) -> np.ndarray:
    return monodromy_entry(u, 1, 1, spec)


def op_B(u: complex, i: int, spec: ChainSpec) -> np.ndarray:
    """Annihilation-type row entry B_i = (1, i), i >= 2."""
    return monodromy_entry(u, 1, i, spec)


def op_C(u: complex, i: int, spec: ChainSpec) -> np.ndarray:
    """Creation-type column entry C^i = (i, 1), i >= 2."""
    return monodromy_entry(u, i, 1, spec)


def op_D(u: complex, i: int, j: int, spec: ChainSpec) -> np.ndarray:
    """Lower-corner entry D^i_j = (i, j), i, j >= 2."""
    return monodromy_entry(u, i, j, spec)


def transfer(u: complex, spec: ChainSpec) -> np.ndarray:
    """Antiperiodic transfer matrix: twisted trace of the monodromy blocks."""
    g = twist_matrix(spec.n)
    blocks = monodromy_blocks(u, spec)
    t = np.zeros((spec.dim, spec.dim), dtype=complex)
    for i in range(spec.n):
        for k in range(spec.n):
            if g[i, k] != 0:
                t += g[i, k] * blocks[k][i]
    return t


def twist_operator(spec: ChainSpec) -> np.ndarray:
    """Global twist: the cyclic shift applied at every site."""
    g = twist_matrix(spec.n)
    return kron_chain([g] * spec.N)


def vacuum_ket(spec: ChainSpec) -> np.ndarray:
    v = np.zeros(spec.dim, dtype=complex)
    v[0] = 1.0
    return v


def vacuum_bra(spec: ChainSpec) -> np.ndarray:
    return vacuum_ket(spec)


def conjugate_vacuum_ket(spec: ChainSpec) -> np.ndarray:
    """All-sites-highest state; the image of the vacuum under the twist."""
    v = np.zeros(spec.dim, dtype=complex)
    v[-1] = 1.0
    return v


def conjugate_vacuum_bra(spec: ChainSpec) -> np.ndarray:
    return conjugate_vacuum_ket(spec)


def product_identity_residual(spec: ChainSpec) -> float:
    """prod_j t(theta_j) = prod_j scalar_a(theta_j) * twist_operator."""
    dim = spec.dim
    prod = np.eye(dim, dtype=complex)
    for t in spec.theta:
        prod = prod @ transfer(t, spec)
    rhs = complex(np.prod([scalar_a(t, spec) for t in spec.theta])) * twist_operator(spec)
    scale = max(float(np.abs(prod).max()), float(np.abs(rhs).max()), 1e-30)
    return float(np.abs(prod - rhs).max()) / scale


# ---------------------------------------------------------------------------
# Hamiltonian at the homogeneous point
# ---------------------------------------------------------------------------

def _two_site_twisted(h4: np.ndarray, n: int, N: int) -> np.ndarray:
    """sum_{abcd} h4[a,b,c,d] E^{ac}_N E^{bd}_1 on an N-site chain."""
    if N == 1:
        out = np.zeros((n, n), dtype=complex)
        for a in range(1, n + 1):
            for c in range(1, n + 1):
                for b in range(1, n + 1):
                    for d in range(1, n + 1):
                        w = h4[a - 1, b - 1, c - 1, d - 1]
                        if w != 0:
                            out += w * (site_matrix_unit(n, a, c)
                                        @ site_matrix_unit(n, b, d))
        return out
    mid = np.eye(n ** (N - 2), dtype=complex)
    out = np.zeros((n ** N, n ** N), dtype=complex)
    for a in range(1, n + 1):
        for c in range(1, n + 1):
            for b in range(1, n + 1):
                for d in range(1, n + 1):
                    w = h4[a - 1, b - 1, c - 1, d - 1]
                    if w != 0:
                        out += w * kron_chain([site_matrix_unit(n, b, d), mid,
                                               site_matrix_unit(n, a, c)])
    return out


def global_hamiltonian(n: int, N: int, eta: complex) -> np.ndarray:
    """Nearest-neighbour Hamiltonian with the twisted closure bond.

    Bulk bonds embed the two-site density directly; the closure bond couples
    site N to the twist-conjugated site 1.  Defined at the homogeneous point
    (all inhomogeneities zero), which is where the transfer-matrix
    log-derivative reproduces it.
    """
    h2 = local_hamiltonian(n, eta)
    dim = n ** N
    ham = np.zeros((dim, dim), dtype=complex)
    for j in range(1, N):
        ham += kron_chain([np.eye(n ** (j - 1), dtype=complex), h2,
                           np.eye(n ** (N - j - 1), dtype=complex)])
    g = twist_matrix(n)
    h_twisted = kron_chain([np.eye(n, dtype=complex), g]) @ h2 @ \
        kron_chain([np.eye(n, dtype=complex), np.linalg.inv(g)])
    ham += _two_site_twisted(h_twisted.reshape(n, n, n, n), n, N)
    return ham


def fd4_derivative(f, u0: complex, h: float = 1e-4):
    """Fourth-order central difference derivative of a matrix-valued map."""
    return (-f(u0 + 2 * h) + 8 * f(u0 + h) - 8 * f(u0 - h) + f(u0 - 2 * h)) / (12 * h)


def homogeneous_transfer(u: complex, n: int, N: int, eta: complex) -> np.ndarray:
    """Transfer matrix of the homogeneous chain (all theta = 0)."""
    g = twist_matrix(n)
    blocks = _blocks_raw(complex(u), n, eta, (0.0,) * N)
    t = np.zeros((n ** N, n ** N), dtype=complex)
    for i in range(n):
        for k in range(n):
            if g[i, k] != 0:
                t += g[i, k] * blocks[k][i]
    return t


def transfer_log_derivative_residual(n: int, N: int, eta: complex) -> float:
    """Check H = sinh(eta) t'(0) t(0)^{-1} at the homogeneous point.

    t'(0) comes from the fourth-order difference oracle so the comparison is
    independent of the analytic derivative inside local_hamiltonian.
    """
    t0 = homogeneous_transfer(0.0, n, N, eta)
    tp = fd4_derivative(lambda u: homogeneous_transfer(u, n, N, eta), 0.0)
    lhs = np.sinh(eta) * tp @ np.linalg.inv(t0)
    rhs = global_hamiltonian(n, N, eta)
    scale = max(float(np.abs(rhs).max()), 1.0)
    return float(np.abs(lhs - rhs).max()) / scale


# ---------------------------------------------------------------------------
# Exchange relations
# ---------------------------------------------------------------------------

def exchange_relation_residuals(u: complex, v: complex, spec: ChainSpec) -> dict:
    """Residuals of the quadratic exchange relations at spectral points (u, v).

    Every relation is instantiated as a dense operator identity for all valid
    index combinations; the value reported per family is the worst elementwise
    residual divided by max(|LHS|, |RHS|, 1).
    """
    n, eta = spec.n, spec.eta
    Tu = monodromy_blocks(u, spec)
    Tv = monodromy_blocks(v, spec)
    x = u - v
    shx = np.sinh(x)
    shxe = np.sinh(x + eta)

    def T(at, i, j):
        return (Tu if at == "u" else Tv)[i - 1][j - 1]

    def R(arg, a, b, c, d):
        return r_element(arg, n, eta, a, b, c, d)

    out: dict = {}

    def record(family, lhs, rhs):
        scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()), 1.0)
        resid = float(np.abs(lhs - rhs).max()) / scale
        out[family] = max(out.get(family, 0.0), resid)

    rng2 = range(2, n + 1)

    # C D
    for l in rng2:
        for k in rng2:
            for i in rng2:
                lhs = T("v", l, 1) @ T("u", k, i)
                rhs = sum(R(x, k, l, al, be) / shx * (T("u", al, i) @ T("v", be, 1))
                          for al in rng2 for be in rng2)
                rhs = rhs - R(x, 1, i, i, 1) / shx * (T("v", l, i) @ T("u", k, 1))
                record("CD", lhs, rhs)

    # C A
    for k in rng2:
        lhs = T("v", k, 1) @ T("u", 1, 1)
        rhs = (np.sinh(x - eta) / shx * (T("u", 1, 1) @ T("v", k, 1))
               + R(-x, k, 1, 1, k) / shx * (T("v", 1, 1) @ T("u", k, 1)))
        record("CA", lhs, rhs)

    # [C, B], both printed forms
    for i in rng2:
        for l in rng2:
            lhs = T("u", i, 1) @ T("v", 1, l) - T("v", 1, l) @ T("u", i, 1)
            rhs1 = (R(x, l, 1, 1, l) * (T("v", 1, 1) @ T("u", i, l))
                    - R(x, i, 1, 1, i) * (T("u", 1, 1) @ T("v", i, l))) / shx
            rhs2 = (R(-x, 1, l, l, 1) * (T("u", i, l) @ T("v", 1, 1))
                    - R(-x, 1, i, i, 1) * (T("v", i, l) @ T("u", 1, 1))) / shx
            record("CB-a", lhs, rhs1)
            record("CB-b", lhs, rhs2)

    # A B
    for i in rng2:
        lhs = T("u", 1, 1) @ T("v", 1, i)
        rhs = (np.sinh(x - eta) / shx * (T("v", 1, i) @ T("u", 1, 1))
               + R(-x, 1, i, i, 1) / shx * (T("u", 1, i) @ T("v", 1, 1)))
        record("AB", lhs, rhs)

    # D B
    for j in rng2:
        for i in rng2:
            for l in rng2:
                lhs = T("u", j, i) @ T("v", 1, l)
                rhs = sum(R(x, al, be, i, l) / shx * (T("v", 1, be) @ T("u", j, al))
                          for al in rng2 for be in rng2)
                rhs = rhs - R(x, j, 1, 1, j) / shx * (T("u", 1, i) @ T("v", j, l))
                record("DB", lhs, rhs)

    # B B
    for i in rng2:
        for j in rng2:
            lhs = T("u", 1, i) @ T("v", 1, j)
            rhs = sum(R(x, al, be, i, j) / shxe * (T("v", 1, be) @ T("u", 1, al))
                      for al in rng2 for be in rng2)
            record("BB", lhs, rhs)

    # C C
    for i in rng2:
        for j in rng2:
            lhs = T("v", j, 1) @ T("u", i, 1)
            rhs = sum(R(x, i, j, al, be) / shxe * (T("u", al, 1) @ T("v", be, 1))
                      for al in rng2 for be in rng2)
            record("CC", lhs, rhs)

    # T T
    for al in range(1, n + 1):
        for be in range(1, n + 1):
            lhs = T("u", al, be) @ T("v", al, be) - T("v", al, be) @ T("u", al, be)
            record("TT1", lhs, np.zeros_like(lhs))
            if al == be:
                continue
            lhs = T("u", al, al) @ T("v", be, be) - T("v", be, be) @ T("u", al, al)
            rhs = (R(x, be, al, al, be) * (T("v", be, al) @ T("u", al, be))
                   - R(x, al, be, be, al) * (T("u", be, al) @ T("v", al, be))) / shx
            record("TT2", lhs, rhs)
            lhs = T("u", al, be) @ T("v", be, al) - T("v", be, al) @ T("u", al, be)
            rhs = R(x, al, be, be, al) / shx * (
                T("v", be, be) @ T("u", al, al) - T("u", be, be) @ T("v", al, al))
            record("TT3", lhs, rhs)

    return out
