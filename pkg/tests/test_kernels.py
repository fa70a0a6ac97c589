import numpy as np
import pytest

from modelsparse import kernels


@pytest.fixture(params=kernels.available_backends())
def impl(request):
    return kernels.get_backend(request.param)


def _sym(rng, n):
    a = rng.standard_normal((n, n))
    return a + a.T


@pytest.mark.parametrize("n", [1, 2, 3, 6, 17, 40])
def test_jacobi_matches_lapack(impl, rng, n):
    a = _sym(rng, n)
    got = np.sort(impl.jacobi_eigenvalues(a, 1e-12, 100))
    np.testing.assert_allclose(got, np.linalg.eigvalsh(a), rtol=0, atol=1e-11 * max(1, n))


def test_jacobi_leaves_input_untouched(impl, rng):
    a = _sym(rng, 5)
    before = a.copy()
    impl.jacobi_eigenvalues(a, 1e-12, 100)
    np.testing.assert_array_equal(a, before)


def test_jacobi_diagonal_is_exact(impl):
    np.testing.assert_array_equal(impl.jacobi_eigenvalues(np.diag([3.0, -1.0, 2.5]), 1e-12, 100),
                                  [3.0, -1.0, 2.5])


def test_jacobi_empty(impl):
    assert impl.jacobi_eigenvalues(np.zeros((0, 0)), 1e-12, 100).shape == (0,)


def _topk_oracle(values, k):
    # sort key: value descending, index ascending
    return [i for _, i in sorted((-v, i) for i, v in enumerate(values))][:k]


@pytest.mark.parametrize("k", [1, 2, 5, 20, 25])
def test_topk_matches_sorting_oracle(impl, rng, k):
    for _ in range(50):
        v = rng.integers(0, 4, 20).astype(float)  # many ties
        assert list(impl.topk_stable(v, k)) == _topk_oracle(v, k)


def test_topk_continuous(impl, rng):
    v = np.abs(rng.standard_normal(1000))
    assert list(impl.topk_stable(v, 7)) == _topk_oracle(v, 7)


def test_topk_zero_k(impl):
    assert len(impl.topk_stable(np.ones(3), 0)) == 0


def test_segment_norms(impl, rng):
    v = rng.standard_normal(10)
    segs = [[0, 3], [1], [2, 4, 9], [5, 6, 7, 8]]
    indptr = np.cumsum([0] + [len(s) for s in segs])
    indices = np.concatenate(segs)
    expect = [sum(v[i] ** 2 for i in s) for s in segs]
    np.testing.assert_allclose(impl.segment_sq_norms(v, indptr, indices), expect, rtol=1e-15)


def test_backends_agree_bitwise_on_jacobi(rng):
    if "cython" not in kernels.available_backends():
        pytest.skip("compiled kernels not built")
    c, py = kernels.get_backend("cython"), kernels.get_backend("python")
    for n in (2, 4, 6, 9):
        a = _sym(rng, n)
        np.testing.assert_array_equal(c.jacobi_eigenvalues(a, 1e-12, 100),
                                      py.jacobi_eigenvalues(a, 1e-12, 100))


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
