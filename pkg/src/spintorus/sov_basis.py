"""Nested separation-of-variables basis built on the inhomogeneity points.

A basis label is a pair of disjoint sorted site blocks: the flavor-2 block
(sites whose theta feeds a C^2 factor in the left state) and the flavor-3
block (C^3 factors).  Left states are bra vectors grown from the vacuum,
right states are kets grown from the mirrored product, and the two families
are bi-orthogonal with an explicit closed-form normalization.

The action of the relevant monodromy entries on a left state is a finite
combination of neighbouring labels whose coefficients are products of sinh
ratios; `act_on_bra` reproduces those combinations without touching any
dense operator.  All removable u = theta coincidences are evaluated by exact
cancellation against the d(u) prefactor, so coefficients at the
inhomogeneity points themselves come out exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .chain import ChainSpec
from .errors import PoleProximityError
from .monodromy import (conjugate_vacuum_bra, monodromy_blocks, scalar_a,
                        scalar_d, scalar_d_l, vacuum_bra, vacuum_ket)

POLE_TOL = 1e-12


@dataclass(frozen=True)
class BasisIndex:
    """Sorted disjoint site blocks (1-indexed) for flavors 2 and 3."""

    block2: tuple
    block3: tuple

    def __post_init__(self):
        b2 = tuple(int(p) for p in self.block2)
        b3 = tuple(int(p) for p in self.block3)
        if list(b2) != sorted(b2) or list(b3) != sorted(b3):
            raise ValueError("blocks must be sorted ascending")
        if len(set(b2) | set(b3)) != len(b2) + len(b3):
            raise ValueError("blocks must be disjoint with distinct entries")
        object.__setattr__(self, "block2", b2)
        object.__setattr__(self, "block3", b3)

    @property
    def m2(self) -> int:
        return len(self.block2)

    @property
    def m(self) -> int:
        return len(self.block2) + len(self.block3)

    @property
    def sites(self) -> tuple:
        """Canonical P tuple: flavor-2 block then flavor-3 block."""
        return self.block2 + self.block3

    def complement(self, N: int) -> tuple:
        used = set(self.sites)
        return tuple(q for q in range(1, N + 1) if q not in used)

    def sort_key(self):
        return (self.m, self.m2, self.sites)


def enumerate_basis(spec: ChainSpec):
    """All 3^N labels, ordered by (m, m2, P) lexicographically."""
    out = []
    sites = range(1, spec.N + 1)
    for m in range(spec.N + 1):
        for m2 in range(m + 1):
            labels = []
            for b2 in combinations(sites, m2):
                rest = [q for q in sites if q not in b2]
                for b3 in combinations(rest, m - m2):
                    labels.append(BasisIndex(b2, b3))
            labels.sort(key=lambda ix: ix.sites)
            out.extend(labels)
    return out


def index_positions(spec: ChainSpec) -> dict:
    return {ix: k for k, ix in enumerate(enumerate_basis(spec))}


def left_state(idx: BasisIndex, spec: ChainSpec) -> np.ndarray:
    """Bra <0| C^2(theta_{p_1}) ... C^2(theta_{p_m2}) C^3(...) ... as a row."""
    blocks_at = lambda p: monodromy_blocks(spec.theta[p - 1], spec)
    bra = vacuum_bra(spec)
    for p in idx.block2:
        bra = bra @ blocks_at(p)[1][0]
    for p in idx.block3:
        bra = bra @ blocks_at(p)[2][0]
    return bra


def right_state(idx: BasisIndex, spec: ChainSpec) -> np.ndarray:
    """Ket B_3(theta_{p_m}) ... B_3(theta_{p_{m2+1}}) B_2(...) ... |0>."""
    blocks_at = lambda p: monodromy_blocks(spec.theta[p - 1], spec)
    ket = vacuum_ket(spec)
    for p in idx.block2:
        ket = blocks_at(p)[0][1] @ ket
    for p in idx.block3:
        ket = blocks_at(p)[0][2] @ ket
    return ket


def g_factor(idx: BasisIndex, spec: ChainSpec) -> complex:
    """Closed-form bi-orthogonal normalization <idx|idx>."""
    eta = spec.eta
    th = lambda p: spec.theta[p - 1]
    sh = np.sinh
    val = 1.0 + 0.0j
    for k in idx.block2:
        val *= sh(eta) * scalar_d_l(th(k), k, spec) * scalar_a(th(k), spec)
        for l in idx.block2:
            if l != k:
                val *= sh(th(k) - th(l) + eta) / sh(th(k) - th(l))
    for k in idx.block3:
        val *= sh(eta) * scalar_d_l(th(k), k, spec) * scalar_a(th(k), spec)
        for l in idx.block3:
            if l != k:
                val *= sh(th(k) - th(l) + eta) / sh(th(k) - th(l))
        for l in idx.block2:
            val *= sh(th(k) - th(l) - eta) / sh(th(k) - th(l))
    return complex(val)


def gram_matrix(spec: ChainSpec) -> np.ndarray:
    basis = enumerate_basis(spec)
    lmat = np.array([left_state(ix, spec) for ix in basis])
    rmat = np.array([right_state(ix, spec) for ix in basis]).T
    return lmat @ rmat


def verify_orthogonality(spec: ChainSpec) -> dict:
    """Gram diagnostics: diagonal vs closed form, off-diagonal leakage."""
    basis = enumerate_basis(spec)
    gram = gram_matrix(spec)
    expected = np.array([g_factor(ix, spec) for ix in basis])
    diag = np.diagonal(gram)
    diag_rel_err = float(np.max(np.abs(diag - expected) / np.abs(expected)))
    off = gram - np.diag(diag)
    scale = max(float(np.abs(diag).max()), 1.0)
    offdiag_resid = float(np.abs(off).max()) / scale
    return {
        "gram": gram,
        "expected_diagonal": expected,
        "diag_rel_err": diag_rel_err,
        "offdiag_resid": offdiag_resid,
    }


def identity_resolution_residual(spec: ChainSpec) -> float:
    """Frobenius residual of sum_idx |idx><idx| / G_idx against the identity."""
    basis = enumerate_basis(spec)
    acc = np.zeros((spec.dim, spec.dim), dtype=complex)
    for ix in basis:
        acc += np.outer(right_state(ix, spec), left_state(ix, spec)) / g_factor(ix, spec)
    return float(np.linalg.norm(acc - np.eye(spec.dim)))


# ---------------------------------------------------------------------------
# Analytic action of operators on left states
# ---------------------------------------------------------------------------

def _d_cancelled(u: complex, spec: ChainSpec, cancel) -> complex:
    """scalar_d(u) / prod_{q in cancel} sinh(u - theta_q), cancelled exactly.

    Each cancelled site uses the identity d(u)/sinh(u - theta_q) =
    prod_{j != q} sinh(u - theta_j), which is entire, so u exactly at a
    theta point yields the analytic limit.  A near-coincidence that is not
    exact is refused: the caller sits close to a pole of the printed
    formula without being on its removable point.
    """
    out = 1.0 + 0.0j
    cancel = set(cancel)
    for j, t in enumerate(spec.theta, start=1):
        s = np.sinh(u - t)
        if j in cancel:
            if s != 0 and abs(s) < POLE_TOL:
                raise PoleProximityError(
                    f"u = {u} within {POLE_TOL} of pole at theta_{j} = {t}")
            continue
        out *= s
    return complex(out)


def act_on_bra(op: str, u: complex, idx: BasisIndex, spec: ChainSpec):
    """Decomposition of <idx| Op(u) over basis labels.

    Supported ops: D33, D23, D32, B3, C3 (monodromy entries (3,3), (2,3),
    (3,2), (1,3), (3,1)).  Returns a list of (BasisIndex, coefficient) with
    pairwise distinct target labels; exact zeros are dropped, so a vanishing
    action returns the empty list.
    """
    eta = spec.eta
    th = lambda p: spec.theta[p - 1]
    sh = np.sinh
    b2, b3 = idx.block2, idx.block3
    u = complex(u)
    terms: dict = {}

    def add(target: BasisIndex, coeff: complex):
        if coeff != 0:
            terms[target] = terms.get(target, 0.0 + 0.0j) + coeff

    if op == "D33":
        coeff = _d_cancelled(u, spec, b3)
        for k in b3:
            coeff *= sh(u - th(k) + eta)
        add(idx, coeff)

    elif op == "D23":
        for l in b3:
            coeff = sh(eta) * np.exp((u - th(l)) / 3) * _d_cancelled(u, spec, b3)
            for k in b3:
                if k != l:
                    coeff *= (sh(u - th(k) + eta)
                              * sh(th(l) - th(k) - eta) / sh(th(l) - th(k)))
            target = BasisIndex(tuple(sorted(b2 + (l,))),
                                tuple(q for q in b3 if q != l))
            add(target, coeff)

    elif op == "D32":
        for l in b2:
            coeff = (sh(eta) * np.exp(-(u - th(l)) / 3)
                     * _d_cancelled(u, spec, b3 + (l,)))
            for k in b2:
                if k != l:
                    coeff *= sh(th(l) - th(k) + eta) / sh(th(l) - th(k))
            for k in b3:
                coeff *= sh(u - th(k) + eta)
            target = BasisIndex(tuple(q for q in b2 if q != l),
                                tuple(sorted(b3 + (l,))))
            add(target, coeff)

    elif op == "B3":
        for l in b3:
            base = sh(eta) * np.exp(-(u - th(l)) / 3) * _d_cancelled(u, spec, b3)
            for k in b3:
                if k != l:
                    base *= (sh(u - th(k) + eta)
                             * sh(th(l) - th(k) - eta) / sh(th(l) - th(k)))
            # first family: theta_{p_l} leaves the flavor-3 block entirely
            coeff = base * scalar_a(th(l), spec)
            for al in b2:
                coeff *= sh(th(l) - th(al) - eta) / sh(th(l) - th(al))
            add(BasisIndex(b2, tuple(q for q in b3 if q != l)), coeff)
            # second family: it replaces a flavor-2 member instead
            for al in b2:
                coeff = (base * sh(eta) * np.exp(-(th(al) - th(l)) / 3)
                         / sh(th(l) - th(al)) * scalar_a(th(al), spec))
                for k in b2:
                    if k != al:
                        coeff *= sh(th(al) - th(k) - eta) / sh(th(al) - th(k))
                target = BasisIndex(
                    tuple(sorted(tuple(q for q in b2 if q != al) + (l,))),
                    tuple(q for q in b3 if q != l))
                add(target, coeff)

    elif op == "C3":
        for l in idx.complement(spec.N):
            shared = 1.0 + 0.0j
            for k in b3:
                shared *= (sh(u - th(k) + eta)
                           * sh(th(l) - th(k)) / sh(th(l) - th(k) + eta))
            # first family: complement point joins the flavor-3 block
            coeff = (np.exp((u - th(l)) / 3) / scalar_d_l(th(l), l, spec)
                     * _d_cancelled(u, spec, b3 + (l,)) * shared)
            add(BasisIndex(b2, tuple(sorted(b3 + (l,)))), coeff)
            # second family: it replaces a flavor-2 member, which joins flavor 3
            for al in b2:
                coeff = (np.exp((u - th(al)) / 3)
                         * _d_cancelled(u, spec, b3 + (al,)) * shared
                         * sh(eta) * np.exp((th(l) - th(al)) / 3)
                         / (scalar_d_l(th(l), l, spec) * sh(th(al) - th(l) - eta)))
                for k in b2:
                    if k != al:
                        coeff *= (sh(th(l) - th(k)) / sh(th(l) - th(k) + eta)
                                  * sh(th(al) - th(k) + eta) / sh(th(al) - th(k)))
                target = BasisIndex(
                    tuple(sorted(tuple(q for q in b2 if q != al) + (l,))),
                    tuple(sorted(b3 + (al,))))
                add(target, coeff)

    else:
        raise ValueError(f"unsupported operator {op!r}; "
                         "expected one of D33, D23, D32, B3, C3")

    return sorted(terms.items(), key=lambda kv: kv[0].sort_key())


OP_ENTRY = {"D33": (3, 3), "D23": (2, 3), "D32": (3, 2), "B3": (1, 3), "C3": (3, 1)}


def act_on_bra_dense(op: str, u: complex, idx: BasisIndex, spec: ChainSpec) -> np.ndarray:
    """Oracle route: <idx| Op(u) by dense matrix action."""
    i, j = OP_ENTRY[op]
    return left_state(idx, spec) @ monodromy_blocks(u, spec)[i - 1][j - 1]


def decomposition_residual(op: str, u: complex, idx: BasisIndex, spec: ChainSpec) -> float:
    """Worst relative deviation between act_on_bra and the dense action."""
    dense = act_on_bra_dense(op, u, idx, spec)
    rebuilt = np.zeros(spec.dim, dtype=complex)
    for target, coeff in act_on_bra(op, u, idx, spec):
        rebuilt += coeff * left_state(target, spec)
    scale = max(float(np.abs(dense).max()), 1.0)
    return float(np.abs(dense - rebuilt).max()) / scale


# ---------------------------------------------------------------------------
# Rank-n generalization of the basis states
# ---------------------------------------------------------------------------

def enumerate_sun_basis(spec: ChainSpec):
    """All n^N labels: tuples of n-1 disjoint sorted blocks (flavors 2..n)."""
    out = []
    n, N = spec.n, spec.N

    def extend(blocks, available):
        flavor = len(blocks) + 2
        if flavor > n:
            out.append(tuple(blocks))
            return
        for m in range(len(available) + 1):
            for chosen in combinations(available, m):
                rest = [q for q in available if q not in chosen]
                extend(blocks + [tuple(chosen)], rest)

    extend([], list(range(1, N + 1)))
    out.sort(key=lambda blocks: (sum(len(b) for b in blocks),
                                 tuple(len(b) for b in blocks),
                                 tuple(q for b in blocks for q in b)))
    return out


def sun_left_state(blocks, spec: ChainSpec) -> np.ndarray:
    """<0| prod_flavors prod_{p in block} C^flavor(theta_p) for rank n."""
    bra = vacuum_bra(spec)
    for flavor, block in enumerate(blocks, start=2):
        for p in block:
            bra = bra @ monodromy_blocks(spec.theta[p - 1], spec)[flavor - 1][0]
    return bra


def sun_right_state(blocks, spec: ChainSpec) -> np.ndarray:
    """Mirrored product of B-entries on the vacuum for rank n."""
    ket = vacuum_ket(spec)
    for flavor, block in enumerate(blocks, start=2):
        for p in block:
            ket = monodromy_blocks(spec.theta[p - 1], spec)[0][flavor - 1] @ ket
    return ket


def sun_dnn_residual(u: complex, blocks, spec: ChainSpec) -> float:
    """Eigen-relation of the corner entry D^n_n on a rank-n left state."""
    bra = sun_left_state(blocks, spec)
    top = blocks[-1]
    coeff = scalar_d(u, spec)
    for k in top:
        coeff *= np.sinh(u - spec.theta[k - 1] + spec.eta) / np.sinh(u - spec.theta[k - 1])
    acted = bra @ monodromy_blocks(u, spec)[spec.n - 1][spec.n - 1]
    scale = max(float(np.abs(acted).max()), 1.0)
    return float(np.abs(acted - coeff * bra).max()) / scale
