"""Scalar products of transfer eigenstates and state reconstruction.

Every transfer eigenstate is pinned down, up to scale, by its pairings with
the separated basis bras.  Those pairings reduce to closed-form functions of
the eigenvalue at the inhomogeneity points, so the full eigenvector can be
rebuilt from N numbers.  This module evaluates the closed forms, performs the
reconstruction, and runs the shrink-to-homogeneous experiment for the
conjectured homogeneous limit of the construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .chain import ChainSpec
from .errors import DegenerateNormalizationError, PoleProximityError
from .monodromy import (_blocks_raw, fd4_derivative, homogeneous_transfer,
                        scalar_a, scalar_d_l)
from .sov_basis import POLE_TOL, enumerate_basis, g_factor, right_state
from .spectrum import U_PROBES, brute_force_spectrum
from .tensor_core import kron_chain, simultaneous_eigen


def _lambda_tuple(lambda_at_theta, N: int) -> tuple:
    """Accept a 1-indexed site map or a length-N sequence of eigenvalues."""
    if isinstance(lambda_at_theta, dict):
        missing = [j for j in range(1, N + 1) if j not in lambda_at_theta]
        if missing:
            raise ValueError(f"eigenvalue map lacks sites {missing}")
        return tuple(complex(lambda_at_theta[j]) for j in range(1, N + 1))
    vals = tuple(complex(v) for v in lambda_at_theta)
    if len(vals) != N:
        raise ValueError(f"expected {N} eigenvalue samples, got {len(vals)}")
    return vals


def _site_tuple(pset, N: int) -> tuple:
    sites = tuple(sorted(int(p) for p in pset))
    if len(set(sites)) != len(sites):
        raise ValueError("site indices must be distinct")
    if sites and not (1 <= sites[0] and sites[-1] <= N):
        raise ValueError(f"site indices outside 1..{N}")
    return sites


def f_factor(pset, spec: ChainSpec) -> complex:
    """Norm of a one-flavor chain of basis states over the given sites.

    Product over the set of sinh(eta) d_p(theta_p) a(theta_p) dressed by the
    pairwise ratio sinh(delta+eta)/sinh(delta); the empty set gives 1.
    """
    sites = _site_tuple(pset, spec.N)
    eta = spec.eta
    th = lambda p: spec.theta[p - 1]
    val = 1.0 + 0.0j
    for l in sites:
        val *= np.sinh(eta) * scalar_d_l(th(l), l, spec) * scalar_a(th(l), spec)
        for k in sites:
            if k != l:
                val *= np.sinh(th(l) - th(k) + eta) / np.sinh(th(l) - th(k))
    return complex(val)


def g_m_function(vset, uset, spec: ChainSpec) -> complex:
    """Determinant kernel coupling an unprimed point set to a primed one.

    Equal to the ratio form (Cauchy-type determinant times a double sinh
    product) wherever that form is defined, but evaluated from the
    row-cleared matrix

        Mhat[a, k] = sinh(eta) e^{-(u_a - v_k)/3}
                     prod_{k' != k} sinh(u_a - v_{k'} + eta) sinh(u_a - v_{k'})

    divided by the separation products of each set, so coincidences BETWEEN
    the sets (u_a = v_k) are exact rather than removable.  Coincidences
    WITHIN a set are genuine poles and raise.
    """
    us = [complex(u) for u in uset]
    vs = [complex(v) for v in vset]
    if len(us) != len(vs):
        raise ValueError("point sets must have equal size")
    m = len(us)
    if m == 0:
        return 1.0 + 0.0j
    eta = spec.eta
    den = 1.0 + 0.0j
    for k in range(m):
        for l in range(k + 1, m):
            su = np.sinh(us[l] - us[k])
            sv = np.sinh(vs[k] - vs[l])
            if min(abs(su), abs(sv)) < POLE_TOL:
                raise PoleProximityError(
                    "coincident arguments within one point set")
            den *= su * sv
    mhat = np.empty((m, m), dtype=complex)
    for a in range(m):
        for k in range(m):
            entry = np.sinh(eta) * np.exp(-(us[a] - vs[k]) / 3)
            for kp in range(m):
                if kp != k:
                    entry *= (np.sinh(us[a] - vs[kp] + eta)
                              * np.sinh(us[a] - vs[kp]))
            mhat[a, k] = entry
    return complex(np.linalg.det(mhat) / den)


def scalar_F(pset, lambda_at_theta, psi_bar0: complex, spec: ChainSpec) -> complex:
    """Pairing of the all-flavor-2 basis bra over ``pset`` with the eigenstate.

    Sum over primed site sets of the same size: determinant kernel times the
    cross factor sinh(theta_{p'} - theta_q + eta) over the complement of the
    UNPRIMED set, times the eigenvalue product over the primed set divided by
    its one-flavor norm; the whole sum carries prod_k a(theta_k) over all
    sites, the eigenvalue product over the unprimed complement in the
    denominator, and the reference pairing psi_bar0 = <bar0|Psi>.
    """
    sites = _site_tuple(pset, spec.N)
    m = len(sites)
    lam = _lambda_tuple(lambda_at_theta, spec.N)
    comp = tuple(q for q in range(1, spec.N + 1) if q not in sites)
    for q in comp:
        if abs(lam[q - 1]) < 1e-12:
            raise DegenerateNormalizationError(
                f"eigenvalue vanishes at site {q}; the pairing formula "
                "divides by it")
    eta = spec.eta
    th = lambda p: spec.theta[p - 1]
    total = 0.0 + 0.0j
    for primed in combinations(range(1, spec.N + 1), m):
        kern = g_m_function([th(p) for p in sites],
                            [th(p) for p in primed], spec)
        cross = 1.0 + 0.0j
        for a in primed:
            for q in comp:
                cross *= np.sinh(th(a) - th(q) + eta)
        lam_primed = np.prod([lam[p - 1] for p in primed]) if primed else 1.0
        total += kern * cross * lam_primed / f_factor(primed, spec)
    a_all = np.prod([scalar_a(t, spec) for t in spec.theta])
    lam_comp = np.prod([lam[q - 1] for q in comp]) if comp else 1.0
    return complex(total * a_all / lam_comp * psi_bar0)


def scalar_product_table(lambda_at_theta, psi_bar0: complex,
                         spec: ChainSpec) -> dict:
    """All one-flavor pairings, keyed by the sorted site tuple.

    The empty-set entry is the reference-vacuum pairing <0|Psi> in the same
    gauge as psi_bar0.
    """
    lam = _lambda_tuple(lambda_at_theta, spec.N)
    out = {}
    for m in range(spec.N + 1):
        for pset in combinations(range(1, spec.N + 1), m):
            out[pset] = scalar_F(pset, lam, psi_bar0, spec)
    return out


def _tree_sum(terms: list) -> np.ndarray:
    """Pairwise summation in a fixed bracketing; deterministic regardless of
    how the term list was produced."""
    items = list(terms)
    if not items:
        raise ValueError("nothing to sum")
    while len(items) > 1:
        items = [items[i] + items[i + 1] if i + 1 < len(items) else items[i]
                 for i in range(0, len(items), 2)]
    return items[0]


def reconstruct(lambda_at_theta, psi_bar0: complex, spec: ChainSpec) -> np.ndarray:
    """Rebuild the eigenvector from its eigenvalue at the inhomogeneity points.

    Expands the identity over the separated basis: each basis ket enters with
    the one-flavor pairing of its flavor-2 block, one eigenvalue factor per
    flavor-3 site, divided by the basis normalization.  Output is in the
    site tensor basis, linear in psi_bar0.
    """
    lam = _lambda_tuple(lambda_at_theta, spec.N)
    fcache = {}
    terms = []
    for idx in enumerate_basis(spec):
        if idx.block2 not in fcache:
            fcache[idx.block2] = scalar_F(idx.block2, lam, psi_bar0, spec)
        coeff = fcache[idx.block2]
        for q in idx.block3:
            coeff = coeff * lam[q - 1]
        coeff = coeff / g_factor(idx, spec)
        terms.append(coeff * right_state(idx, spec))
    return _tree_sum(terms)


# ---------------------------------------------------------------------------
# Homogeneous-limit experiment
# ---------------------------------------------------------------------------

def normalize_gauge(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unit norm with the first non-negligible component rotated to the
    positive real axis, so states at different parameters share one gauge."""
    v = np.asarray(vec, dtype=complex)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    v = v / norm
    lead = np.flatnonzero(np.abs(v) > tol)
    if len(lead) == 0:
        raise ValueError("no component above the gauge threshold")
    return v * np.exp(-1j * np.angle(v[lead[0]]))


def _neville_at_zero(eps: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Polynomial extrapolation of vector samples to eps = 0."""
    tableau = [np.asarray(v, dtype=complex) for v in values]
    n = len(tableau)
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            x_lo, x_hi = eps[i], eps[i + level]
            nxt.append((x_lo * tableau[i + 1] - x_hi * tableau[i])
                       / (x_lo - x_hi))
        tableau = nxt
    return tableau[0]


def _hermitian_angle(a: np.ndarray, b: np.ndarray) -> float:
    overlap = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.arccos(min(1.0, overlap)))


def closed_form_two_site(lam0: complex, dlam0: complex, n: int,
                         eta: complex) -> np.ndarray:
    """Closed-form homogeneous two-site eigenvector from the eigenvalue and
    its derivative at the origin."""
    if n != 3:
        raise ValueError("closed form is specific to three flavors")
    blocks0 = _blocks_raw(0.0, n, eta, (0.0, 0.0))
    b2 = blocks0[0][1]
    b3 = blocks0[0][2]
    db2 = fd4_derivative(lambda u: _blocks_raw(u, n, eta, (0.0, 0.0))[0][1], 0.0)
    db3 = fd4_derivative(lambda u: _blocks_raw(u, n, eta, (0.0, 0.0))[0][2], 0.0)
    vac = np.zeros(n ** 2, dtype=complex)
    vac[0] = 1.0
    sh = np.sinh(eta)
    coth = np.cosh(eta) / np.sinh(eta)
    a0 = sh ** 2
    lr = dlam0 / lam0
    out = vac.copy()
    out = out + (dlam0 * b3 + lam0 * db3 - 2 * coth * lam0 * b3) @ vac / sh ** 3
    out = out + lam0 ** 2 * (b3 @ b3 @ vac) / sh ** 8
    inner = ((8.0 / 9.0 - 2 * coth * lr + lr ** 2) * b2
             + (lr - coth - 1.0 / 3.0) * db2)
    inner = inner + lam0 / sh ** 4 * (
        (coth * lr - lr / 3.0 - 8.0 / 9.0) * (b3 @ b2)
        + (lr - coth - 1.0 / 3.0) * (db3 @ b2 - b3 @ db2))
    inner = inner + lam0 ** 2 / sh ** 8 * (b2 @ b2)
    out = out + lam0 ** 2 / a0 ** 2 * (inner @ vac)
    return out


@dataclass
class HomogFamily:
    """One eigenstate family tracked through the shrinking inhomogeneities."""

    hom_index: int
    z_charge: int
    lam0: complex
    dlam0: complex
    distances: list = field(default_factory=list)
    monotone: bool = False
    angle_closed_form: float = float("nan")
    angle_eigenvector: float = float("nan")
    degenerate: bool = False


@dataclass
class HomogStudy:
    eps: tuple
    eta: complex
    families: list = field(default_factory=list)

    @property
    def n_converged(self) -> int:
        return sum(1 for f in self.families if f.monotone)


def homogeneous_limit_study(direction, eps_sequence, eta: complex,
                            n: int = 3) -> HomogStudy:
    """Track every eigenstate as the inhomogeneities shrink to zero.

    For each eps the chain theta = eps * direction is diagonalized and each
    eigenstate reconstructed from its eigenvalue data alone; families are
    matched across eps levels (and to the homogeneous model) by eigenvalue
    proximity at fixed probe points.  Reports per family the Cauchy
    distances of the gauge-fixed states, whether they decrease monotonically,
    and for two sites the angle between the extrapolated state and the
    closed-form homogeneous expression.  Non-convergence is reported, never
    raised.
    """
    direction = tuple(complex(x) for x in direction)
    N = len(direction)
    eps_desc = tuple(sorted((float(e) for e in eps_sequence), reverse=True))
    if len(eps_desc) < 2:
        raise ValueError("need at least two shrink factors")

    # homogeneous reference spectrum
    t_hom = lambda u: homogeneous_transfer(u, n, N, eta)
    g = np.zeros((n, n))
    for k in range(n):
        g[(k + 1) % n, k] = 1.0
    u_op = kron_chain([g] * N)
    hom_records, _, _ = simultaneous_eigen(
        [t_hom(U_PROBES[0]), t_hom(U_PROBES[1]), u_op])

    def eigval(vec, dual, op):
        return complex(dual @ op @ vec / (dual @ vec))

    hom_vmat = np.array([r[0] for r in hom_records]).T
    hom_dual = np.linalg.inv(hom_vmat)
    families = []
    for k, (vec, mus) in enumerate(hom_records):
        lam0 = eigval(vec, hom_dual[k], t_hom(0.0))
        dlam0 = fd4_derivative(
            lambda u: eigval(vec, hom_dual[k], t_hom(u)), 0.0)
        z = int(np.round(np.angle(mus[2]) / (2 * np.pi / 3))) % 3
        families.append(HomogFamily(hom_index=k, z_charge=z,
                                    lam0=lam0, dlam0=dlam0))

    # reconstructed, gauge-fixed states per eps, matched to the homogeneous
    # families through the probe eigenvalues
    tracked = {k: [] for k in range(len(families))}
    for eps in eps_desc:
        spec = ChainSpec(n=n, N=N, eta=eta,
                         theta=tuple(eps * x for x in direction))
        records = brute_force_spectrum(spec)
        cost = np.empty((len(families), len(records)))
        for i, fam in enumerate(families):
            mus_i = hom_records[fam.hom_index][1]
            for j, rec in enumerate(records):
                cost[i, j] = sum(abs(a - b) for a, b in zip(mus_i, rec.mu))
        rows, cols = linear_sum_assignment(cost)
        for i, j in zip(rows, cols):
            rec = records[j]
            try:
                psi = reconstruct(rec.lambda_theta, 1.0, spec)
                tracked[i].append(normalize_gauge(psi))
            except (DegenerateNormalizationError, ValueError):
                families[i].degenerate = True
                tracked[i].append(None)

    for i, fam in enumerate(families):
        states = tracked[i]
        if any(s is None for s in states):
            continue
        fam.distances = [float(np.linalg.norm(states[k + 1] - states[k]))
                         for k in range(len(states) - 1)]
        fam.monotone = all(d2 < d1 for d1, d2 in
                           zip(fam.distances, fam.distances[1:]))
        extrapolated = normalize_gauge(
            _neville_at_zero(np.array(eps_desc), np.array(states)))
        hom_vec = normalize_gauge(hom_records[fam.hom_index][0])
        fam.angle_eigenvector = _hermitian_angle(extrapolated, hom_vec)
        if N == 2 and n == 3 and abs(fam.lam0) > 1e-12:
            ref = closed_form_two_site(fam.lam0, fam.dlam0, n, eta)
            fam.angle_closed_form = _hermitian_angle(
                extrapolated, normalize_gauge(ref))
    return HomogStudy(eps=eps_desc, eta=complex(eta), families=families)
