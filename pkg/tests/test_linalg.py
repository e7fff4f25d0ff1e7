"""Matrix-function primitives against a scaling-and-squaring Taylor oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhsense import errors, linalg


def taylor_expm(a, order=16, squarings=8):
    """Independent exponential: scale down 2^k, Taylor sum, square back up."""
    a = np.asarray(a, dtype=complex)
    small = a / (2**squarings)
    acc = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for n in range(1, order + 1):
        term = term @ small / n
        acc = acc + term
    for _ in range(squarings):
        acc = acc @ acc
    return acc


finite = st.floats(-3.0, 3.0, allow_nan=False)


def c2x2(vals):
    re = np.array(vals[:4]).reshape(2, 2)
    im = np.array(vals[4:]).reshape(2, 2)
    return re + 1j * im


@st.composite
def matrices_2x2(draw):
    return c2x2([draw(finite) for _ in range(8)])


@given(matrices_2x2())
@settings(max_examples=60, deadline=None)
def test_mat_exp_matches_taylor_oracle(a):
    got = linalg.mat_exp(a)
    want = taylor_expm(a)
    assert np.max(np.abs(got - want)) < 1e-10 * max(1.0, np.max(np.abs(want)))


@given(matrices_2x2(), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
@settings(max_examples=40, deadline=None)
def test_expm2_scaled_matches_oracle(a, sr, si):
    s = sr + 1j * si
    got = linalg.expm2_scaled(a, s)
    want = taylor_expm(s * a)
    assert np.max(np.abs(got - want)) < 1e-9 * max(1.0, np.max(np.abs(want)))


def test_expm2_scaled_broadcasts_over_time_array():
    a = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    ts = np.linspace(0.0, 2.0, 7)
    stack = linalg.expm2_scaled(a, ts)
    assert stack.shape == (7, 2, 2)
    for k, t in enumerate(ts):
        np.testing.assert_allclose(stack[k], taylor_expm(t * a), atol=1e-12)


def test_mat_exp_4x4():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    np.testing.assert_allclose(
        linalg.mat_exp(a), taylor_expm(a, order=20, squarings=10), atol=1e-9
    )


def test_mat_exp_identity_and_inverse():
    z = np.zeros((2, 2), dtype=complex)
    np.testing.assert_allclose(linalg.mat_exp(z), np.eye(2), atol=1e-15)
    a = np.array([[0.3, 1.1 - 0.2j], [0.4j, -0.7]], dtype=complex)
    prod = linalg.mat_exp(a) @ linalg.mat_exp(a, -1.0)
    np.testing.assert_allclose(prod, np.eye(2), atol=1e-12)


def test_mat_exp_warns_past_guaranteed_norm():
    a = np.diag([60.0, -60.0]).astype(complex)
    with pytest.warns(errors.OverflowRiskWarning):
        linalg.mat_exp(a)


def test_mat_exp_rejects_nonfinite():
    a = np.array([[np.inf, 0.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(errors.InvalidInput):
        linalg.mat_exp(a)


@given(st.lists(finite, min_size=4, max_size=4), st.lists(finite, min_size=2, max_size=2))
@settings(max_examples=40, deadline=None)
def test_herm_sqrt_squares_back(diag_re, off):
    h = np.array(
        [[abs(diag_re[0]) + 2.0, off[0] + 1j * off[1]],
         [off[0] - 1j * off[1], abs(diag_re[1]) + 2.0]],
        dtype=complex,
    )
    # shift so the matrix is safely PSD regardless of the off-diagonal draw
    h = h + np.eye(2) * (abs(off[0]) + abs(off[1]))
    root = linalg.herm_sqrt(h)
    np.testing.assert_allclose(root @ root, h, atol=1e-10 * max(1.0, np.abs(h).max()))
    assert linalg.herm_residual(root) < 1e-12


def test_herm_sqrt_clamps_roundoff_negatives():
    root = linalg.herm_sqrt(np.diag([1.0, -1e-11]).astype(complex))
    np.testing.assert_allclose(root, np.diag([1.0, 0.0]), atol=1e-8)


def test_herm_sqrt_rejects_negative():
    with pytest.raises(errors.NotPositive):
        linalg.herm_sqrt(np.diag([1.0, -0.5]).astype(complex))


def test_min_eigenvalue_against_numpy():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = a + a.conj().T
        assert abs(linalg.min_eigenvalue(h) - np.linalg.eigvalsh(h).min()) < 1e-12


def test_is_psd_symmetrizes_with_warning():
    nearly = np.array([[1.0, 1e-6], [0.0, 1.0]], dtype=complex)
    with pytest.warns(errors.SymmetrizedInputWarning):
        assert linalg.is_psd(nearly)


def test_batched_eigh_sqrt_matches_loop():
    rng = np.random.default_rng(11)
    stack = []
    for _ in range(5):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        stack.append(a @ a.conj().T + 0.1 * np.eye(2))
    stack = np.array(stack)
    roots = linalg.batched_eigh_sqrt(stack)
    for k in range(5):
        np.testing.assert_allclose(roots[k], linalg.herm_sqrt(stack[k]), atol=1e-10)


def test_batched_unitary_steps_are_unitary_and_correct():
    rng = np.random.default_rng(5)
    hs = []
    for _ in range(6):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        hs.append(0.5 * (a + a.conj().T))
    hs = np.array(hs)
    dt = 0.037
    us = linalg.batched_unitary_steps(hs, dt)
    eye = np.eye(4)
    for k in range(6):
        np.testing.assert_allclose(us[k] @ us[k].conj().T, eye, atol=1e-12)
        np.testing.assert_allclose(us[k], taylor_expm(-1j * dt * hs[k]), atol=1e-10)
