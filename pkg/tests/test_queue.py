import itertools

import numpy as np
import pytest

from qqueue.channels import apply, identity_channel, superoperator
from qqueue.errors import InvalidChannelError, InvalidDimsError
from qqueue.qcore import partial_trace
from qqueue.queue import (
    CoinSpec,
    QueueDims,
    build_coin_channel,
    build_dephasing_channel,
    build_queue_channel,
    build_reset_channel,
    build_step_channel,
    coin_matrix,
    coin_kraus,
    initial_state,
)

from conftest import HADAMARD, random_state


def basis_state(dims, n, m, j):
    v = np.zeros(dims.total, dtype=complex)
    v[dims.index(n, m, j)] = 1
    return np.outer(v, v)


@pytest.mark.parametrize("args", [(1, 2, 5), (2, 2, 2), (3, 3, 4), (2.0, 2, 5)])
def test_queue_dims_rejects(args):
    with pytest.raises(InvalidDimsError):
        QueueDims(*args)


def test_queue_dims_minimal():
    d = QueueDims(2, 3, 4)
    assert d.total == 24 and d.coin_dim == 6


@pytest.mark.parametrize("dims, expected", [((2, 2, 10), 3), ((2, 2, 3), 3), ((4, 4, 10), 7), ((3, 2, 6), 4)])
def test_kraus_count(dims, expected):
    assert len(build_queue_channel(QueueDims(*dims))) == expected


def test_kraus_roles_dims_2_2_10():
    dims = QueueDims(2, 2, 10)
    k_s, k_l, k_u = build_queue_channel(dims).dense_ops()
    # bulk covers j = 1..8, lower barrier j = 0, upper barrier j = 9
    for k, js in ((k_s, range(1, 9)), (k_l, [0]), (k_u, [9])):
        cols = set(np.nonzero(k.any(axis=0))[0])
        assert cols == {dims.index(n, m, j) for n in range(2) for m in range(2) for j in js}


def test_completeness_dims_2_2_3():
    ch = build_queue_channel(QueueDims(2, 2, 3))
    total = sum(k.conj().T @ k for k in ch.dense_ops())
    np.testing.assert_allclose(total, np.eye(12), atol=1e-15)


@pytest.mark.parametrize("d_i, d_o", list(itertools.product([2, 3, 4], repeat=2)))
def test_completeness_exact_over_range(d_i, d_o):
    for d_q in range(max(5, d_i + d_o - 1), 13):
        ch = build_queue_channel(QueueDims(d_i, d_o, d_q))
        total = sum(k.conj().T @ k for k in ch.dense_ops())
        assert np.max(np.abs(total - np.eye(ch.dim))) <= 1e-14
        for k in ch.dense_ops():
            # partial isometry: single unit entry per populated column
            assert set(np.unique(k)) <= {0, 1}
            assert (np.count_nonzero(k, axis=0) <= 1).all()


def _clamped_shift(j, n, m, d_q):
    return min(max(j + n - m, 0), d_q - 1)


@pytest.mark.parametrize("dims", [(2, 2, 6), (3, 2, 7), (2, 4, 8)])
def test_deterministic_coin_shift(dims):
    # Identity coin with the coin prepared in |n, m>: j -> clamp(j + n - m)
    dims = QueueDims(*dims)
    step = build_step_channel(dims, CoinSpec("identity"))
    for n in range(dims.d_i):
        for m in range(dims.d_o):
            for j in range(dims.d_q):
                out = apply(step, basis_state(dims, n, m, j))
                target = basis_state(dims, n, m, _clamped_shift(j, n, m, dims.d_q))
                np.testing.assert_array_equal(out, target)


@pytest.mark.parametrize("kind, kw", [("hadamard", {}), ("walsh_hadamard", {"n": 2}), ("walsh_hadamard", {"n": 3}),
                                      ("grover", {"d": 3}), ("grover", {"d": 4}), ("dft", {"d": 2}),
                                      ("dft", {"d": 3}), ("dft", {"d": 4}), ("dft", {"d": 8})])
def test_coin_unitary(kind, kw):
    u = coin_matrix(kind, **kw)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(u.shape[0]), atol=1e-12)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12)


def test_grover_4_entries():
    g = coin_matrix("grover", d=4)
    np.testing.assert_allclose(np.diag(g), -0.5)
    np.testing.assert_allclose(g[~np.eye(4, dtype=bool)], 0.5)


def test_dft_2_is_hadamard():
    np.testing.assert_allclose(coin_matrix("dft", d=2), HADAMARD, atol=1e-15)


def test_walsh_hadamard_2():
    w = coin_matrix("walsh_hadamard", n=2)
    assert w.shape == (4, 4)
    np.testing.assert_allclose(np.abs(w), 0.5, atol=1e-15)
    np.testing.assert_allclose(w, np.kron(HADAMARD, HADAMARD), atol=1e-15)


def test_coin_spec_validation():
    with pytest.raises(ValueError):
        CoinSpec("bogus")
    with pytest.raises(InvalidChannelError):
        CoinSpec("custom_unitary", matrix=np.array([[1, 1], [0, 1]]))
    with pytest.raises(InvalidChannelError):
        CoinSpec("custom_kraus", operators=[np.eye(2) * 0.5])
    with pytest.raises(InvalidDimsError):
        build_coin_channel(CoinSpec("hadamard"), QueueDims(4, 4, 10))


def test_hadamard_coin_channel():
    dims = QueueDims(2, 2, 10)
    ch = build_coin_channel(CoinSpec("hadamard"), dims)
    assert len(ch) == 1
    np.testing.assert_allclose(ch.dense_ops()[0], np.kron(np.kron(HADAMARD, HADAMARD), np.eye(10)), atol=1e-15)


def test_grover_per_register_coin_channel():
    dims = QueueDims(4, 4, 10)
    g = coin_matrix("grover", d=4)
    ch = build_coin_channel(CoinSpec("grover", d=4), dims)
    assert len(ch) == 1
    np.testing.assert_allclose(ch.dense_ops()[0], np.kron(np.kron(g, g), np.eye(10)), atol=1e-15)


def test_joint_coin():
    dims = QueueDims(2, 2, 5)
    w = coin_matrix("walsh_hadamard", n=2)
    joint = build_coin_channel(CoinSpec("walsh_hadamard", n=2, per_register=False), dims)
    per_reg = build_coin_channel(CoinSpec("hadamard"), dims)
    np.testing.assert_allclose(joint.dense_ops()[0], np.kron(w, np.eye(5)), atol=1e-15)
    np.testing.assert_allclose(joint.dense_ops()[0], per_reg.dense_ops()[0], atol=1e-15)


def test_custom_kraus_per_register_product_set():
    amp = [np.diag([1, np.sqrt(0.5)]), np.array([[0, np.sqrt(0.5)], [0, 0]])]
    ops = coin_kraus(CoinSpec("custom_kraus", operators=amp), QueueDims(2, 2, 3))
    assert len(ops) == 4
    np.testing.assert_allclose(sum(k.conj().T @ k for k in ops), np.eye(4), atol=1e-14)


def test_identity_coin_step_equals_queue_channel():
    dims = QueueDims(2, 2, 4)
    step = build_step_channel(dims, CoinSpec("identity"))
    np.testing.assert_allclose(superoperator(step).mat, superoperator(build_queue_channel(dims)).mat, atol=1e-12)


def test_hadamard_step_has_three_kraus():
    assert len(build_step_channel(QueueDims(2, 2, 10), CoinSpec("hadamard"))) == 3


def test_dephasing_keeps_diagonal(rng):
    dims = QueueDims(2, 2, 3)
    rho = np.diag(rng.dirichlet(np.ones(dims.total))).astype(complex)
    np.testing.assert_allclose(apply(build_dephasing_channel(dims), rho), rho, atol=1e-15)


def test_dephasing_erases_initial_coin_coherence():
    dims = QueueDims(2, 2, 10)
    out = apply(build_dephasing_channel(dims), initial_state("paper-initial", dims))
    np.testing.assert_allclose(partial_trace(out, dims.subsystems, [1, 2]), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(partial_trace(out, dims.subsystems, [0, 2]), np.eye(2) / 2, atol=1e-15)


def test_dephasing_superoperator_on_coin_registers():
    # coin-space superoperator equals sum_x |x><x| ⊗ |x><x|
    dims = QueueDims(2, 2, 3)
    from qqueue.channels import KrausChannel

    d = dims.coin_dim
    deph = KrausChannel([np.diag(np.eye(d)[x]) for x in range(d)])
    expected = np.zeros((d * d, d * d))
    for x in range(d):
        e = np.zeros((d, d))
        e[x, x] = 1
        expected += np.kron(e, e)
    np.testing.assert_allclose(superoperator(deph).mat, expected)
    # full-system channel acts as identity on the queue factor
    full = build_dephasing_channel(dims)
    assert len(full) == d
    for x, k in enumerate(full.dense_ops()):
        np.testing.assert_array_equal(k, np.kron(np.diag(np.eye(d)[x]), np.eye(3)))


def test_reset_channel(rng):
    dims = QueueDims(2, 2, 3)
    rho = random_state(dims.total, rng)
    out = apply(build_reset_channel(dims), rho)
    q = partial_trace(rho, dims.subsystems, [0, 1])
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    np.testing.assert_allclose(out, np.kron(expected, q), atol=1e-14)


def test_classical_hadamard_coin_is_fair(rng):
    dims = QueueDims(2, 2, 10)
    coin_ch = build_coin_channel(CoinSpec("hadamard"), dims)
    prepared = apply(build_dephasing_channel(dims), apply(coin_ch, apply(build_reset_channel(dims), random_state(40, rng))))
    coin_marginal = partial_trace(prepared, dims.subsystems, [2])
    np.testing.assert_allclose(coin_marginal, np.eye(4) / 4, atol=1e-14)


def test_classical_step_maps_diagonal_to_diagonal(rng):
    dims = QueueDims(2, 2, 6)
    step = build_step_channel(dims, CoinSpec("hadamard"), classical=True)
    for _ in range(5):
        rho = np.diag(rng.dirichlet(np.ones(dims.total))).astype(complex)
        out = apply(step, rho)
        assert np.max(np.abs(out - np.diag(np.diag(out)))) <= 1e-12


def test_initial_state_presets():
    dims = QueueDims(2, 2, 10)
    for name in ("paper-initial", "half-filled-basis", "maximally-mixed"):
        rho = initial_state(name, dims)
        assert rho.shape == (40, 40)
        assert abs(np.trace(rho) - 1) < 1e-15
    paper = initial_state("paper-initial", dims)
    c = np.array([1, -1j]) / np.sqrt(2)
    coin = np.outer(c, c.conj())
    np.testing.assert_allclose(partial_trace(paper, dims.subsystems, [1, 2]), coin, atol=1e-15)
    with pytest.raises(ValueError):
        initial_state("hs-random", dims)
    with pytest.raises(ValueError):
        initial_state("nope", dims)
