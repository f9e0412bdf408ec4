"""Chain monodromy: scalar actions, transfer family, twist, exchange algebra."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from spintorus.chain import ChainSpec, default_spec
from spintorus.monodromy import (conjugate_vacuum_bra, conjugate_vacuum_ket,
                                 exchange_relation_residuals, fd4_derivative,
                                 global_hamiltonian, homogeneous_transfer,
                                 monodromy_blocks, monodromy_entry, op_B,
                                 op_C, op_D, product_identity_residual,
                                 scalar_a, scalar_d, scalar_d_l, transfer,
                                 transfer_log_derivative_residual,
                                 twist_operator, vacuum_bra, vacuum_ket)
from spintorus.rmatrix import local_hamiltonian, permutation_matrix, twist_matrix
from spintorus.tensor_core import kron_chain, site_matrix_unit

SINH_05 = 0.52109530549374736      # 50-digit sinh(0.5)


def test_scalar_functions(spec2, rng):
    for t in spec2.theta:
        assert abs(scalar_d(t, spec2)) < 1e-15
    single = ChainSpec(n=3, N=1, eta=0.5, theta=(0.2,))
    assert abs(scalar_a(0.2, single) - SINH_05) < 1e-15
    for _ in range(10):
        u = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        assert abs(scalar_d(u, spec2) - scalar_a(u - spec2.eta, spec2)) < 1e-13
    # per-site factors multiply back to the full scalar
    u = 0.37 + 0.21j
    prod = np.prod([scalar_d_l(u, l, spec2) for l in range(1, 3)])
    assert abs(prod - scalar_d(u, spec2)) < 1e-14


def test_single_site_operators_close_form():
    spec = ChainSpec(n=3, N=1, eta=0.5, theta=(0.2,))
    sh = np.sinh(0.5)
    assert_allclose(op_C(0.2, 2, spec), sh * site_matrix_unit(3, 1, 2), atol=1e-15)
    assert_allclose(op_B(0.2, 2, spec), sh * site_matrix_unit(3, 2, 1), atol=1e-15)
    assert_allclose(transfer(0.2, spec), sh * twist_matrix(3), atol=1e-15)


def test_entry_indexing_contract(spec2):
    u = 0.41 - 0.17j
    blocks = monodromy_blocks(u, spec2)
    assert_allclose(monodromy_entry(u, 1, 1, spec2), blocks[0][0], atol=0)
    assert_allclose(op_B(u, 3, spec2), blocks[0][2], atol=0)
    assert_allclose(op_C(u, 2, spec2), blocks[1][0], atol=0)
    assert_allclose(op_D(u, 3, 2, spec2), blocks[2][1], atol=0)


def test_vacuum_actions(spec2, rng):
    k0, b0 = vacuum_ket(spec2), vacuum_bra(spec2)
    kc, bc = conjugate_vacuum_ket(spec2), conjugate_vacuum_bra(spec2)
    for _ in range(3):
        u = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        blocks = monodromy_blocks(u, spec2)
        a, d = scalar_a(u, spec2), scalar_d(u, spec2)
        assert np.abs(blocks[0][0] @ k0 - a * k0).max() < 1e-13
        assert np.abs(b0 @ blocks[0][0] - a * b0).max() < 1e-13
        for i in (1, 2):
            assert np.abs(blocks[i][0] @ k0).max() < 1e-13
            assert np.abs(b0 @ blocks[0][i]).max() < 1e-13
            for j in (1, 2):
                delta = d if i == j else 0.0
                assert np.abs(blocks[i][j] @ k0 - delta * k0).max() < 1e-13
                assert np.abs(b0 @ blocks[i][j] - delta * b0).max() < 1e-13
        # conjugate reference state: mirrored triangular structure
        assert np.abs(blocks[2][2] @ kc - a * kc).max() < 1e-13
        assert np.abs(bc @ blocks[2][2] - a * bc).max() < 1e-13
        assert np.abs(blocks[0][0] @ kc - d * kc).max() < 1e-13
        assert np.abs(blocks[0][2] @ kc).max() < 1e-13
        assert np.abs(bc @ blocks[2][0]).max() < 1e-13


def test_transfer_is_block_sum(spec2):
    u = 0.29 + 0.33j
    total = op_B(u, 2, spec2) + op_D(u, 2, 3, spec2) + op_C(u, 3, spec2)
    assert np.abs(transfer(u, spec2) - total).max() < 1e-13


def test_transfer_family_commutes(spec3, rng):
    for _ in range(4):
        u, v = (complex(a, b) for a, b in
                zip(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)))
        tu, tv = transfer(u, spec3), transfer(v, spec3)
        scale = max(np.abs(tu @ tv).max(), 1.0)
        assert np.abs(tu @ tv - tv @ tu).max() / scale < 1e-13


def test_twist_operator_properties(rng):
    for N in (1, 2, 3, 4):
        spec = default_spec(N=N)
        u_op = twist_operator(spec)
        assert_allclose(np.linalg.matrix_power(u_op, 3), np.eye(spec.dim), atol=1e-13)
        assert_allclose(vacuum_bra(spec) @ u_op, conjugate_vacuum_bra(spec), atol=0)
    spec = default_spec(N=2)
    u_op = twist_operator(spec)
    u = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    conj = np.linalg.inv(u_op) @ op_C(u, 3, spec) @ u_op
    assert np.abs(conj - op_D(u, 2, 3, spec)).max() < 1e-13
    t = transfer(u, spec)
    assert np.abs(t @ u_op - u_op @ t).max() < 1e-13


def test_product_identity():
    for N in (1, 2, 3, 4):
        assert product_identity_residual(default_spec(N=N)) < 1e-10


def test_exchange_relations_families(spec2, rng):
    expected = {"CD", "CA", "CB-a", "CB-b", "AB", "DB", "BB", "CC",
                "TT1", "TT2", "TT3"}
    for _ in range(2):
        u, v = (complex(a, b) for a, b in
                zip(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)))
        table = exchange_relation_residuals(u, v, spec2)
        assert set(table) == expected
        assert max(table.values()) < 1e-11


def test_conjugate_pairing_product(spec1, spec2, spec3):
    for spec in (spec1, spec2, spec3):
        bra = vacuum_bra(spec)
        for t in spec.theta:
            bra = bra @ op_C(t, 3, spec)
        got = complex(bra @ conjugate_vacuum_ket(spec))
        want = complex(np.prod([scalar_a(t, spec) for t in spec.theta]))
        assert abs(got - want) / abs(want) < 1e-13


def test_uniform_chain_energy_operator(rng):
    for n, N in ((3, 2), (3, 3)):
        assert transfer_log_derivative_residual(n, N, 0.5) < 1e-8
    # commutes with the uniform-chain transfer at a random point
    h_op = global_hamiltonian(3, 2, 0.5)
    u = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    t = homogeneous_transfer(u, 3, 2, 0.5)
    scale = max(np.abs(h_op @ t).max(), 1.0)
    assert np.abs(h_op @ t - t @ h_op).max() / scale < 1e-10
    # twisted boundary term differs from the untwisted (periodic) closure
    h_local = local_hamiltonian(3, 0.5)
    swap = permutation_matrix(3)
    h_periodic = h_local + swap @ h_local @ swap
    assert np.abs(h_op - h_periodic).max() > 1e-3


def test_difference_derivative_oracle():
    got = fd4_derivative(np.sinh, 0.3)
    assert abs(got - np.cosh(0.3)) < 1e-12
    # vector-valued form
    got2 = fd4_derivative(lambda u: np.array([np.sinh(u), u ** 3]), 0.2)
    assert_allclose(got2, [np.cosh(0.2), 3 * 0.04], atol=1e-10)
