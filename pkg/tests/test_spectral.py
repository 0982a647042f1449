import csv
import json

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from specband import dynsys as ds
from specband import opfamily as of
from specband import spectral as sp
from specband.errors import ModeError, ResourceError


def jordan(n):
    return np.eye(n, k=-1)


def brute_hausdorff(a, b):
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    D = np.abs(a[:, None] - b[None, :])
    return max(D.min(axis=1).max(), D.min(axis=0).max())


# -- eigenvalues ----------------------------------------------------------------------

def test_eig_examples():
    assert np.array_equal(sp.eig_dense(np.eye(3)).points, np.ones(3))
    C = of.window_matrix(of.shift_family(), ds.periodic_point("0"), mode="periodic", q=4)
    assert sp.match_multisets(sp.eig_dense(C).points, [1, 1j, -1, -1j]) < 1e-12
    assert np.array_equal(sp.eig_dense(jordan(8)).points, np.zeros(8))


def test_eig_residual_contract(rng):
    for _ in range(100):
        m = int(rng.integers(1, 65))
        M = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        lam = sp.eig_dense(M).points
        assert lam.size == m
        scale = max(1.0, np.linalg.norm(M, 2))
        for z in lam:
            assert sla.svdvals(M - z * np.eye(m))[-1] <= 1e-10 * scale


def test_similarity_invariance(rng):
    for _ in range(20):
        m = int(rng.integers(2, 40))
        M = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        P = np.eye(m)[rng.permutation(m)] * np.exp(2j * np.pi * rng.random(m))
        a = sp.eig_dense(M).points
        b = sp.eig_dense(P.conj().T @ M @ P).points
        assert sp.match_multisets(a, b) <= 1e-8


@pytest.mark.parametrize("q", [1, 2, 3, 7, 16, 33, 64])
def test_circulant_oracle(q, rng):
    c = rng.normal(size=q) + 1j * rng.normal(size=q)
    C = np.array([[c[(i - j) % q] for j in range(q)] for i in range(q)])
    k = np.arange(q)
    closed = np.array([np.sum(c * np.exp(-2j * np.pi * k * m / q)) for m in range(q)])
    assert sp.match_multisets(sp.eig_dense(C).points, closed) <= 1e-8


def test_eig_size_limit():
    with pytest.raises(ResourceError):
        sp.eig_dense(np.eye(sp.MAX_DENSE + 1))


# -- singular values ------------------------------------------------------------------

def test_sigma_min_examples():
    assert sp.sigma_min(np.eye(5)) == pytest.approx(1.0)
    assert sp.sigma_min(np.zeros((4, 4))) == 0.0
    assert sp.sigma_min(jordan(50) - 0.5 * np.eye(50)) <= 1e-10


def test_sigma_min_zero_at_eigenvalues(rng):
    M = rng.normal(size=(20, 20))
    for z in sp.eig_dense(M).points:
        assert sp.sigma_min(M - z * np.eye(20)) <= 1e-10 * np.linalg.norm(M, 2)


@given(hnp.arrays(np.float64, st.integers(1, 30), elements=st.floats(-3, 3)),
       st.floats(-3, 3), st.floats(-3, 3), st.booleans(), st.floats(0.1, 2))
@settings(max_examples=60, deadline=None)
def test_bidiagonal_kernel_matches_dense(diag, zr, zi, upper, off):
    n = diag.size
    e = off * np.cos(np.arange(n - 1)) + 0.5j
    B = np.diag(diag.astype(complex)) + np.diag(e, 1 if upper else -1)
    z = complex(zr, zi)
    vals, method = sp.sigma_min_grid(B, np.array([z]))
    assert method == "bidiagonal-bisection"
    ref = sla.svdvals(B - z * np.eye(n))[-1]
    assert vals[0] == pytest.approx(ref, rel=1e-8, abs=1e-13 * max(1, np.linalg.norm(B, 2)))


def test_grid_routes_agree(rng):
    H = rng.normal(size=(30, 30))
    H = H + H.T
    T = np.diag(rng.normal(size=30)) + np.diag(rng.normal(size=29), 1) + np.diag(rng.normal(size=29), -1)
    zs = rng.normal(size=12) + 1j * rng.normal(size=12)
    for M, route in ((H, "normal-eigendistance"), (T, "dense-svd")):
        vals, method = sp.sigma_min_grid(M, zs)
        assert method == route
        ref = [sla.svdvals(M - z * np.eye(30))[-1] for z in zs]
        assert np.allclose(vals, ref, rtol=1e-8, atol=1e-12)


# -- pseudospectra ----------------------------------------------------------------------

def test_pseudospectrum_identity():
    grid = sp.GridSpec(0, 2, -1, 1, 0.05)
    P = sp.pseudospectrum(np.eye(3), grid, [0.1])
    Z = grid.nodes()
    assert np.array_equal(P.indicator(0.1), np.abs(Z - 1) <= 0.1 + 1e-12)


def test_pseudospectrum_jordan():
    grid = sp.GridSpec(0, 0.5, 0, 0, 0.5)
    P = sp.pseudospectrum(jordan(50), grid, [1e-1, 1e-3])
    assert P.sigma[0, 0] == 0.0
    assert P.sigma[0, 1] <= 1e-10
    assert P.indicator(1e-3).all()


def test_pseudospectrum_nesting(rng):
    M = of.window_matrix(of.symbolic_family(1.0), ds.fibonacci_point(), 20).entries
    P = sp.pseudospectrum(M, sp.GridSpec.around_disc(2.0, step=0.1), [1e-1, 10**-1.5, 1e-2, 1e-4])
    eps = sorted(P.eps)
    for a, b in zip(eps, eps[1:]):
        assert not np.any(P.indicator(a) & ~P.indicator(b))
    assert np.all(P.sigma >= 0)


def test_pseudospectrum_partition_invariance():
    M = of.window_matrix(of.symbolic_family(0.8), ds.fibonacci_point(), 40).entries
    grid = sp.GridSpec(-1, 1, -1, 1, 0.1)
    whole, _ = sp.sigma_min_grid(M, grid.nodes().ravel())
    parts = np.concatenate([sp.sigma_min_grid(M, chunk)[0] for chunk in np.array_split(grid.nodes().ravel(), 7)])
    assert np.array_equal(whole, parts)


def test_pseudospectrum_grid_limit():
    with pytest.raises(ResourceError):
        sp.pseudospectrum(np.eye(2), sp.GridSpec(0, 10, 0, 10, 0.005))


def test_default_grid():
    g = sp.GridSpec.around_disc(2.0)
    assert g.shape == (251, 251)
    assert g.re_nodes[0] == -2.5 and g.re_nodes[-1] == pytest.approx(2.5)


def test_pseudospec_csv(tmp_path):
    grid = sp.GridSpec(-1, 1, -1, 1, 0.5)
    P = sp.pseudospectrum(jordan(4), grid, [0.1])
    P.to_csv(tmp_path / "p.csv", header_path=tmp_path / "p.json")
    rows = list(csv.reader(open(tmp_path / "p.csv")))
    assert rows[0] == ["z_re", "z_im", "sigma_min"] and len(rows) == 26
    assert np.array_equal(np.array([float(r[2]) for r in rows[1:]]), P.sigma.ravel())
    head = json.load(open(tmp_path / "p.json"))
    assert head["step"] == 0.5 and head["eps"] == [0.1]


# -- Floquet-Bloch ----------------------------------------------------------------------

def test_floquet_shift():
    S = sp.floquet_spectrum(of.shift_family(), ds.periodic_point("0"), 8)
    assert sp.match_multisets(S.points, np.exp(2j * np.pi * np.arange(8) / 8)) < 1e-12


def test_floquet_laplacian():
    F = of.constant_family({1: 1.0, -1: 1.0})
    S = sp.floquet_spectrum(F, ds.periodic_point("0"), 16)
    assert sp.match_multisets(S.points, 2 * np.cos(2 * np.pi * np.arange(16) / 16)) < 1e-12


def test_floquet_translated_circle():
    S = sp.floquet_spectrum(of.constant_family({1: 1.0, 0: 0.3}), ds.periodic_point("0"), 32)
    assert np.allclose(np.abs(S.points - 0.3), 1.0)


def test_floquet_periodic_operator_oracle():
    # for U + V over the word 01 the symbol is [[0, e^{-i t}], [1, 1]]
    S = sp.floquet_spectrum(of.symbolic_family(1.0), ds.periodic_point("01"), 16)
    ref = []
    for k in range(16):
        t = 2 * np.pi * k / 16
        ref.extend(np.roots([1, -1, -np.exp(-1j * t)]))
    assert sp.match_multisets(S.points, ref) < 1e-10


@pytest.mark.parametrize("word", ["1", "10", "101", "10110", "10110101", "0012", "334"])
def test_floquet_phase_shift_invariance(word):
    alphabet = ds.Alphabet(max(2, int(max(word)) + 1))
    F = of.BandFamily((of.LocalRule(0, of.symbol_table(np.arange(alphabet.size) * 0.7, alphabet)),
                       of.LocalRule(1, of.constant_table(1.0, alphabet)),
                       of.LocalRule(-2, of.constant_table(0.25j, alphabet))), alphabet=alphabet)
    x = ds.periodic_point(word, alphabet)
    a = sp.floquet_spectrum(F, x, 64)
    b = sp.floquet_spectrum(F, ds.shift(x, 1), 64)
    assert sp.hausdorff(a, b) <= 1e-8


def test_floquet_needs_periodic(fib):
    with pytest.raises(ModeError):
        sp.floquet_spectrum(of.shift_family(), fib)
    with pytest.raises(ValueError):
        sp.floquet_spectrum(of.shift_family(), ds.periodic_point("0"), 4)


# -- set comparisons ---------------------------------------------------------------------

def test_hausdorff_examples():
    assert sp.hausdorff([1, 2j], [1, 2j]) == 0.0
    assert sp.hausdorff([0], [3, 4j]) == 4.0
    assert sp.hausdorff([0, 1], [0]) == 1.0
    with pytest.raises(ValueError):
        sp.hausdorff([], [1])


@given(st.lists(st.complex_numbers(max_magnitude=10), min_size=1, max_size=30),
       st.lists(st.complex_numbers(max_magnitude=10), min_size=1, max_size=30))
@settings(max_examples=100, deadline=None)
def test_hausdorff_matches_brute_force(a, b):
    assert sp.hausdorff(a, b) == pytest.approx(brute_hausdorff(a, b), abs=1e-12)


def test_spectrum_union():
    a = sp.SpectrumSet([1], ("a",))
    b = sp.SpectrumSet([1j], ("b",))
    assert sp.spectrum_union([a]).points.tolist() == [1]
    u = sp.spectrum_union([a, b])
    assert u.points.tolist() == [1, 1j] and u.sources == ("a", "b")


def test_spectrum_csv(tmp_path):
    S = sp.floquet_spectrum(of.shift_family(), ds.periodic_point("0"), 8)
    S.to_csv(tmp_path / "s.csv")
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    back = np.array([complex(float(r[0]), float(r[1])) for r in rows[1:]])
    assert np.array_equal(back, S.points) and rows[1][2].startswith("floquet")
