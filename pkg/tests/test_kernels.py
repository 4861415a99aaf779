import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mklkit.core import min_eigenvalue_ok, validate_gram
from mklkit.kernels import (KernelSpec, binomial_table, compute_list, compute_test_list, hpk,
                            linear_kernel, monotone_conjunctive_kernel,
                            monotone_disjunctive_kernel, p_spectrum_kernel, parse_specs,
                            self_similarity)
from mklkit.metrics import normalize_kernel

from oracles import conjunctions_both, disjunctions_both, spectrum_naive


def test_linear_examples():
    np.testing.assert_array_equal(linear_kernel([[1, 0], [0, 1]]), np.eye(2))
    np.testing.assert_array_equal(linear_kernel([[2]]), [[4]])
    np.testing.assert_array_equal(linear_kernel([[1, 2]], [[3, 1]]), [[5]])
    with pytest.raises(ValueError):
        linear_kernel([[1, 2]], [[1, 2, 3]])


def test_linear_rect_orientation():
    X = np.array([[1.0, 0], [0, 1], [1, 1]])
    Z = np.array([[2.0, 3]])
    assert linear_kernel(X, Z).shape == (1, 3)
    np.testing.assert_array_equal(linear_kernel(X, Z), [[2, 3, 5]])


def test_hpk_examples():
    X = np.array([[1.0, 2], [3, 1]])
    np.testing.assert_array_equal(hpk(X, degree=1), linear_kernel(X))
    np.testing.assert_array_equal(hpk(X, degree=2), [[25, 25], [25, 100]])
    np.testing.assert_array_equal(hpk([[0.0, 0]], degree=7), [[0]])
    with pytest.raises(ValueError):
        hpk(X, degree=0)


def test_conjunctive_examples():
    assert monotone_conjunctive_kernel([[1, 1, 1]], c=2)[0, 0] == 3
    assert monotone_conjunctive_kernel([[1, 1, 0]], [[0, 1, 1]], c=2)[0, 0] == 0
    X = np.random.default_rng(0).integers(0, 2, (6, 5))
    np.testing.assert_array_equal(monotone_conjunctive_kernel(X, c=1), X @ X.T)
    with pytest.raises(ValueError):
        monotone_conjunctive_kernel([[1, 2]], c=1)
    with pytest.raises(ValueError):
        monotone_conjunctive_kernel([[1, 0]], c=3)


def test_disjunctive_examples():
    assert monotone_disjunctive_kernel([[1, 0]], [[0, 1]], d=1)[0, 0] == 0
    assert monotone_disjunctive_kernel([[1, 0]], d=1)[0, 0] == 1
    assert monotone_disjunctive_kernel([[1, 1, 1]], d=3)[0, 0] == 1
    with pytest.raises(ValueError):
        monotone_disjunctive_kernel([[1, 0]], d=0)


def test_spectrum_examples():
    assert p_spectrum_kernel(["ab"], ["cd"], p=1)[0, 0] == 0
    assert p_spectrum_kernel(["abab"], p=2)[0, 0] == 5
    assert p_spectrum_kernel(["aa"], ["aaa"], p=2)[0, 0] == 2
    assert p_spectrum_kernel(["a"], ["abc"], p=2)[0, 0] == 0
    with pytest.raises(ValueError):
        p_spectrum_kernel(["ab"], p=0)


def test_spectrum_is_bytewise():
    # "é" is two bytes in UTF-8, so it contributes two 1-grams
    K = p_spectrum_kernel(["é"], p=1)
    assert K[0, 0] == 2


def test_binomial_overflow_is_an_error():
    with pytest.raises(OverflowError):
        binomial_table(100, 50)
    assert binomial_table(5, 2).tolist() == [0, 0, 1, 3, 6, 10]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 10), st.integers(1, 8), st.integers(1, 3))
def test_boolean_kernels_match_enumeration(seed, d, n, arity):
    arity = min(arity, d)
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, (n, d))
    C = monotone_conjunctive_kernel(X, c=arity)
    D = monotone_disjunctive_kernel(X, d=arity)
    for i in range(n):
        for j in range(n):
            assert C[i, j] == conjunctions_both(X[i], X[j], arity)
            assert D[i, j] == disjunctions_both(X[i], X[j], arity)


@settings(max_examples=100, deadline=None)
@given(st.text("abc", max_size=12), st.text("abc", max_size=12), st.integers(1, 4))
def test_spectrum_matches_naive(s, t, p):
    assert p_spectrum_kernel([s], [t], p=p)[0, 0] == spectrum_naive(s, t, p)


@pytest.mark.parametrize("spec", parse_specs("linear,hpk:1-4,mck:1-3,mdk:1-3"))
def test_gram_outputs_are_valid(spec):
    rng = np.random.default_rng(3)
    X = rng.integers(0, 2, (30, 8)).astype(float)
    K = spec(X)
    assert validate_gram(K)
    assert min_eigenvalue_ok(K)


def test_spectrum_gram_is_valid():
    rng = np.random.default_rng(4)
    S = ["".join(rng.choice(list("acgt"), rng.integers(0, 20))) for _ in range(40)]
    for p in (1, 2, 3):
        K = p_spectrum_kernel(S, p=p)
        assert validate_gram(K) and min_eigenvalue_ok(K)


def test_hpk_is_power_of_linear():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((10, 4))
    L = linear_kernel(X)
    for d in range(1, 6):
        np.testing.assert_allclose(hpk(X, degree=d), L ** d, rtol=1e-9, atol=0)


def test_parse_specs():
    assert [str(s) for s in parse_specs("hpk:1-3")] == ["hpk:1", "hpk:2", "hpk:3"]
    assert parse_specs("linear,spectrum:2") == [KernelSpec("linear"),
                                                 KernelSpec("p_spectrum", 2)]
    assert len(parse_specs("mck:1-5")) == 5
    for bad in ("rbf:1", "hpk", "hpk:3-1", "hpk:0", "linear:2", "hpk:a"):
        with pytest.raises(ValueError):
            parse_specs(bad)


def test_compute_list():
    KL = compute_list(np.eye(2), [KernelSpec("hpk", 1)])
    assert len(KL) == 1 and np.array_equal(KL[0], np.eye(2))
    X = np.array([[1.0, 2], [3, -1]])
    KL = compute_list(X, parse_specs("hpk:1-3"))
    for r in range(3):
        np.testing.assert_array_equal(KL[r], KL[0] ** (r + 1))


def test_compute_list_conjunctive_matches_oracle():
    X = np.random.default_rng(6).integers(0, 2, (7, 6))
    KL = compute_list(X, parse_specs("mck:1-5"))
    for r, c in enumerate(range(1, 6)):
        expected = [[conjunctions_both(a, b, c) for a in X] for b in X]
        np.testing.assert_array_equal(KL[r], expected)


def test_compute_list_kind_mismatch():
    from mklkit.core import Dataset
    data = Dataset([[0.5, 1.0]], None, "real")
    with pytest.raises(ValueError):
        compute_list(data, parse_specs("mck:1"))
    with pytest.raises(ValueError):
        compute_list(Dataset(["ab"], None, "string"), parse_specs("hpk:1"))


@pytest.mark.parametrize("spec", parse_specs("linear,hpk:2,mck:2,mdk:2,spectrum:2"))
def test_self_similarity_is_gram_diagonal(spec):
    rng = np.random.default_rng(7)
    if spec.kind == "p_spectrum":
        X = ["".join(rng.choice(list("ab"), 8)) for _ in range(6)]
    else:
        X = rng.integers(0, 2, (6, 5)).astype(float)
    np.testing.assert_allclose(self_similarity(spec, X), np.diag(spec(X)))


def test_normalized_test_list_matches_train_list_on_training_data():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((6, 3))
    specs = parse_specs("hpk:1-3")
    tr = compute_list(X, specs, normalize=True)
    te = compute_test_list(X, X, specs, normalize=True)
    for r in range(3):
        np.testing.assert_allclose(te[r], tr[r], atol=1e-12)
        np.testing.assert_allclose(tr[r], normalize_kernel(specs[r](X)), atol=0)
