import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from supbound import _backend, kernels

needs_numba = pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")


def _case(seed, G=50, J=7, R=40):
    rng = np.random.default_rng(seed)
    return rng.uniform(-1, 1, (G, J)), rng.normal(size=(R, J)), rng.uniform(0.1, 3, G)


@needs_numba
@pytest.mark.parametrize("seed", range(4))
def test_sup_numba_matches_numpy(seed):
    k, w, sc = _case(seed)
    np.testing.assert_allclose(kernels._sup_abs_weighted_nb(k, w, np.ones(1), False), kernels.sup_abs_weighted_numpy(k, w), rtol=1e-13)
    np.testing.assert_allclose(kernels._sup_abs_weighted_nb(k, w, sc, True), kernels.sup_abs_weighted_numpy(k, w, sc), rtol=1e-13)


def test_sup_brute_force():
    k, w, sc = _case(9, G=6, J=3, R=4)
    for r in range(4):
        want = max(abs(sum(k[g, j] * w[r, j] for j in range(3))) * sc[g] for g in range(6))
        assert kernels.sup_abs_weighted(k, w, sc)[r] == pytest.approx(want, rel=1e-13)


def test_switch(monkeypatch):
    k, w, _ = _case(1)
    monkeypatch.setenv("SUPBOUND_NUMBA", "0")
    assert not _backend.use_numba()
    a = kernels.sup_abs_weighted(k, w)
    monkeypatch.setenv("SUPBOUND_NUMBA", "1")
    assert _backend.use_numba() == _backend.HAVE_NUMBA
    np.testing.assert_allclose(kernels.sup_abs_weighted(k, w), a, rtol=1e-13)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SUPBOUND_THREADS", "3")
    assert _backend.max_threads() == 3
    monkeypatch.setenv("SUPBOUND_THREADS", "0")
    assert _backend.max_threads() == 1
    monkeypatch.setenv("SUPBOUND_THREADS", "junk")
    assert _backend.max_threads() >= 1


def _scan_ref(terms, total, run, rel_tol, need):
    for i, x in enumerate(terms):
        total += x
        run = run + 1 if x < rel_tol * total else 0
        if run >= need:
            return total, run, i
    return total, run, -1


@settings(max_examples=100, deadline=None)
@given(
    hnp.arrays(np.float64, st.integers(0, 60), elements=st.sampled_from([1.0, 1e-3, 1e-20, 0.5, 1e-18])),
    st.integers(0, 3),
    st.integers(1, 6),
)
def test_scan_matches_reference(terms, run, need):
    ref = _scan_ref(terms, 1.0, run, 1e-16, need)
    impls = [kernels.scan_series_numpy]
    if _backend.HAVE_NUMBA:
        impls.append(kernels._scan_series_nb)
    for fn in impls:
        total, r, stop = fn(terms, 1.0, run, 1e-16, need)
        assert stop == ref[2]
        assert total == pytest.approx(ref[0], rel=1e-14)
        if stop < 0:
            assert r == ref[1]


def test_scan_carries_run_across_blocks():
    terms = np.array([1.0] + [1e-20] * 10)
    t1, r1, s1 = kernels.scan_series(terms[:6], 0.0, 0, 1e-16, 8)
    assert s1 == -1 and r1 == 5
    t2, r2, s2 = kernels.scan_series(terms[6:], t1, r1, 1e-16, 8)
    assert s2 == 2
