"""Named verification checks with a stable reporting vocabulary.

Each check measures the worst residual of one family of identities at the
configured chain parameters and compares it against a tolerance.  The check
names here are the public vocabulary of the ``verify`` subcommand; scripts
key on them, so they never change.  Every check draws its random spectral
points from a child generator seeded by (rng_seed, position in the check
order), which makes each check reproducible on its own and the full report
byte-stable regardless of which subset is requested.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec
from .monodromy import (exchange_relation_residuals, monodromy_blocks,
                        product_identity_residual, scalar_a, scalar_d,
                        transfer, vacuum_bra, vacuum_ket,
                        conjugate_vacuum_bra, conjugate_vacuum_ket)
from .rmatrix import (crossing_residual, fusion_rank,
                      initial_condition_residual, qybe_residual,
                      twist_invariance_residual, unitarity_residual)
from .sov_basis import (decomposition_residual, enumerate_basis,
                        identity_resolution_residual, verify_orthogonality)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named check: worst residual against its tolerance."""

    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str


def _points(rng: np.random.Generator, count: int, halfwidth: float = 1.0):
    """Random complex spectral points in a centred box."""
    re = rng.uniform(-halfwidth, halfwidth, size=count)
    im = rng.uniform(-halfwidth, halfwidth, size=count)
    return [complex(a, b) for a, b in zip(re, im)]


def _check_qybe(spec: ChainSpec, rng: np.random.Generator):
    worst = initial_condition_residual(spec.n, spec.eta)
    pts = _points(rng, 15)
    for u1, u2, u3 in zip(pts[0::3], pts[1::3], pts[2::3]):
        worst = max(worst, qybe_residual(spec.n, spec.eta, u1, u2, u3))
    return worst, "three-space relation at 5 random point triples plus the u = 0 permutation limit"


def _check_unitarity(spec: ChainSpec, rng: np.random.Generator):
    worst = max(unitarity_residual(u, spec.n, spec.eta) for u in _points(rng, 6))
    return worst, "R(u) R_swapped(-u) proportional to the identity at 6 random points"


def _check_crossing(spec: ChainSpec, rng: np.random.Generator):
    worst = max(crossing_residual(u, spec.n, spec.eta) for u in _points(rng, 6))
    return worst, "partial-transpose inversion identity at 6 random points"


def _check_fusion_rank(spec: ChainSpec, rng: np.random.Generator):
    expected = spec.n * (spec.n - 1) // 2
    rank = fusion_rank(spec.n, spec.eta)
    return float(abs(rank - expected)), (
        f"rank of R(-eta) is {rank}, antisymmetriser dimension is {expected}")


def _check_twist_invariance(spec: ChainSpec, rng: np.random.Generator):
    worst = max(twist_invariance_residual(u, spec.n, spec.eta)
                for u in _points(rng, 6))
    return worst, "conjugation by the cyclic twist on both factors at 6 random points"


def _check_commuting_transfer(spec: ChainSpec, rng: np.random.Generator):
    worst = 0.0
    pts = _points(rng, 6)
    for u, v in zip(pts[0::2], pts[1::2]):
        tu, tv = transfer(u, spec), transfer(v, spec)
        prod = tu @ tv
        scale = max(float(np.abs(prod).max()), 1.0)
        worst = max(worst, float(np.abs(prod - tv @ tu).max()) / scale)
    return worst, "commutator of transfer matrices at 3 random spectral pairs"


def _check_exchange_relations(spec: ChainSpec, rng: np.random.Generator):
    worst = 0.0
    families: set = set()
    pts = _points(rng, 4)
    for u, v in zip(pts[0::2], pts[1::2]):
        table = exchange_relation_residuals(u, v, spec)
        families.update(table)
        worst = max(worst, max(table.values()))
    return worst, (f"{len(families)} quadratic relation families as dense "
                   "operator identities at 2 random spectral pairs")


def _check_vacuum_actions(spec: ChainSpec, rng: np.random.Generator):
    k0, b0 = vacuum_ket(spec), vacuum_bra(spec)
    kc, bc = conjugate_vacuum_ket(spec), conjugate_vacuum_bra(spec)
    worst = 0.0
    for u in _points(rng, 4):
        blocks = monodromy_blocks(u, spec)
        a, d = scalar_a(u, spec), scalar_d(u, spec)
        scale = max(max(float(np.abs(b).max()) for row in blocks for b in row), 1.0)

        def resid(vec):
            nonlocal worst
            worst = max(worst, float(np.abs(vec).max()) / scale)

        resid(blocks[0][0] @ k0 - a * k0)
        resid(b0 @ blocks[0][0] - a * b0)
        resid(blocks[0][0] @ kc - d * kc)
        resid(bc @ blocks[0][0] - d * bc)
        for i in range(1, spec.n):
            resid(blocks[i][0] @ k0)          # annihilation on the reference ket
            resid(b0 @ blocks[0][i])          # and on the reference bra
            for j in range(1, spec.n):
                delta = d if i == j else 0.0
                resid(blocks[i][j] @ k0 - delta * k0)
                resid(b0 @ blocks[i][j] - delta * b0)
        last = spec.n - 1
        resid(blocks[last][last] @ kc - a * kc)
        resid(bc @ blocks[last][last] - a * bc)
        resid(blocks[0][last] @ kc)           # annihilation on the conjugate ket
        resid(bc @ blocks[last][0])           # and on the conjugate bra
    return worst, ("triangular monodromy action on the reference and "
                   "conjugate product states at 4 random points")


def _check_orthogonality(spec: ChainSpec, rng: np.random.Generator):
    report = verify_orthogonality(spec)
    worst = max(report["diag_rel_err"], report["offdiag_resid"])
    return worst, ("Gram matrix of the separated basis: diagonal against the "
                   "closed-form norms, off-diagonal leakage against zero")


def _check_identity_resolution(spec: ChainSpec, rng: np.random.Generator):
    worst = identity_resolution_residual(spec)
    return worst, "Frobenius distance of the weighted outer-product sum from the identity"


def _check_decompositions(spec: ChainSpec, rng: np.random.Generator):
    if spec.n != 3:
        raise ValueError("operator decompositions are implemented for n = 3 only")
    basis = enumerate_basis(spec)
    if spec.N > 3:
        picks = sorted(rng.choice(len(basis), size=12, replace=False))
        basis = [basis[int(i)] for i in picks]
    pts = _points(rng, 2)
    worst = 0.0
    for op in ("D33", "D23", "D32", "B3", "C3"):
        for idx in basis:
            for u in pts:
                worst = max(worst, decomposition_residual(op, u, idx, spec))
    return worst, (f"coefficient expansions of 5 monodromy entries on "
                   f"{len(basis)} basis bras at 2 random points")


def _check_product_identity(spec: ChainSpec, rng: np.random.Generator):
    worst = product_identity_residual(spec)
    return worst, ("product of transfer matrices over the inhomogeneity "
                   "points against the scalar-weighted twist operator")


# Registry: name -> (function, default tolerance).  Order is the report order.
CHECKS = (
    ("QYBE", _check_qybe, 1e-11),
    ("unitarity", _check_unitarity, 1e-11),
    ("crossing", _check_crossing, 1e-11),
    ("fusion-rank", _check_fusion_rank, 0.5),
    ("twist-invariance", _check_twist_invariance, 1e-11),
    ("commuting-transfer", _check_commuting_transfer, 1e-11),
    ("exchange-relations", _check_exchange_relations, 1e-11),
    ("vacuum-actions", _check_vacuum_actions, 1e-11),
    ("orthogonality", _check_orthogonality, 1e-9),
    ("identity-resolution", _check_identity_resolution, 1e-9),
    ("decompositions", _check_decompositions, 1e-9),
    ("product-identity", _check_product_identity, 1e-10),
)

CHECK_NAMES = tuple(name for name, _, _ in CHECKS)


def run_checks(spec: ChainSpec, names=None, tolerances=None,
               rng_seed: int = 20240229):
    """Run the named checks and return a list of CheckResult records.

    ``names`` selects a subset (default: all, in registry order);
    ``tolerances`` maps check names to overrides of the default thresholds.
    """
    tolerances = dict(tolerances or {})
    if names is None:
        names = CHECK_NAMES
    unknown = [n for n in names if n not in CHECK_NAMES]
    if unknown:
        raise ValueError(
            f"unknown check names {unknown}; valid names: {list(CHECK_NAMES)}")
    results = []
    for position, (name, func, default_tol) in enumerate(CHECKS):
        if name not in names:
            continue
        rng = np.random.default_rng((rng_seed, position))
        residual, detail = func(spec, rng)
        tol = float(tolerances.get(name, default_tol))
        results.append(CheckResult(name=name, residual=float(residual),
                                   tolerance=tol, passed=residual < tol,
                                   detail=detail))
    return results
