import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windtsd import bd
from windtsd.errors import IndefiniteBeyondTolerance, NotSymmetric, ZeroEigenvalue
from windtsd.fixtures import orthonormal_columns, separable_ensemble
from windtsd.ingest import SnapshotGrid, VelocityEnsemble


def _ensemble(shape=(4, 6, 3, 8), seed=0, dx=2.0, interval=60.0):
    rng = np.random.default_rng(seed)
    n, nt, nz, nx = shape
    grid = SnapshotGrid(np.linspace(4.5, 10, nz), nx, dx, interval)
    return VelocityEnsemble(5 + rng.standard_normal(shape), grid)


def jacobi_eigen(A, sweeps=50):
    """Cyclic Jacobi rotations; independent of LAPACK."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < 1e-15 * np.sqrt(np.sum(A * A)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q], J[q, p] = s, -s
                A = J.T @ A @ J
                V = V @ J
    vals = np.diag(A)
    order = np.argsort(vals)[::-1]
    return vals[order], V[:, order]


# --- remove_mean -------------------------------------------------------------

def test_constant_ensemble_has_zero_fluctuation():
    ens = _ensemble()
    ens.data[:] = 5.0
    fl = bd.remove_mean(ens)
    assert np.all(fl.mean == 5.0)
    assert np.all(fl.u == 0.0)


def test_two_realizations_symmetric():
    grid = SnapshotGrid([1.0, 2.0], 1, 1.0, 1.0)
    ens = VelocityEnsemble(np.array([3.0, 5.0]).reshape(2, 1, 1, 1) * np.ones((2, 1, 2, 1)), grid)
    fl = bd.remove_mean(ens)
    np.testing.assert_array_equal(fl.mean, 4.0)
    np.testing.assert_array_equal(fl.u[:, 0, 0, 0], [-1.0, 1.0])


def test_random_ensemble_mean_removed():
    ens = _ensemble((4, 6, 3, 8), seed=1)
    fl = bd.remove_mean(ens)
    # oracle: explicit loops over realizations and intervals
    acc = np.zeros((3, 8))
    for k in range(4):
        for t in range(6):
            acc += fl.u[k, t]
    assert np.max(np.abs(acc / 24)) <= 1e-12 * np.max(np.abs(ens.data))


# --- temporal covariance -----------------------------------------------------

def triple_loop_covariance(u, w, kind):
    n, nt, P = u.shape[0], u.shape[1], u[0, 0].size
    uf = u.reshape(n, nt, P)
    wf = w.reshape(-1)
    C = np.zeros((nt, nt))
    for t in range(nt):
        for s in range(nt):
            c0 = c1 = 0.0
            for p in range(P):
                m_t = sum(uf[k, t, p] for k in range(n)) / n
                m_s = sum(uf[k, s, p] for k in range(n)) / n
                c0 += wf[p] * m_t * m_s
                c1 += wf[p] * sum(uf[k, t, p] * uf[k, s, p] for k in range(n)) / n
            C[t, s] = [c0, c1, c1 - c0][kind]
    return C


def test_zero_field_zero_covariance():
    ens = _ensemble()
    ens.data[:] = 1.0
    for kind in (0, 1, 2):
        assert np.all(bd.temporal_covariance(bd.remove_mean(ens), kind).C == 0)


def test_single_realization_types_coincide():
    fl = bd.remove_mean(_ensemble((1, 5, 2, 4)))
    C0 = bd.temporal_covariance(fl, 0).C
    C1 = bd.temporal_covariance(fl, 1).C
    C2 = bd.temporal_covariance(fl, 2).C
    np.testing.assert_allclose(C0, C1, rtol=1e-14, atol=0)
    assert np.max(np.abs(C2)) <= 1e-14 * np.max(np.abs(C1))


@pytest.mark.parametrize("kind", [0, 1, 2])
def test_covariance_matches_triple_loop(kind):
    fl = bd.remove_mean(_ensemble((3, 3, 2, 3), seed=4))
    cov = bd.temporal_covariance(fl, kind)
    ref = triple_loop_covariance(fl.u, fl.grid.weights(), kind)
    np.testing.assert_allclose(cov.C, ref, rtol=1e-12, atol=1e-12 * np.max(np.abs(ref)))
    assert cov.dt == 60.0
    assert cov.dx_weight == pytest.approx((5.5 / 1) * 2.0)


@pytest.mark.parametrize("kind", [0, 1, 2])
def test_covariance_symmetric_psd(kind):
    cov = bd.temporal_covariance(bd.remove_mean(_ensemble(seed=5)), kind)
    C = cov.C
    assert np.max(np.abs(C - C.T)) <= 1e-10 * np.max(np.abs(C))
    ev = np.linalg.eigvalsh(C)
    assert ev[0] >= -1e-10 * ev[-1]


# --- eigen-solve -------------------------------------------------------------

def _cov(C, dt=1.0):
    return bd.TemporalCovariance(np.asarray(C, float), 0, dt, np.ones((1, 1)))


def test_diagonal_case():
    mu, T = bd.eigendecompose_temporal(_cov(np.diag([2.0, 1.0])))
    np.testing.assert_allclose(mu, [2, 1])
    np.testing.assert_allclose(T[0], [1, 0])
    np.testing.assert_allclose(T[1], [0, 1])


def test_rank_one():
    s = np.array([1.0, -2.0, 0.5, 3.0])
    mu, T = bd.eigendecompose_temporal(_cov(0.7 * np.outer(s, s)))
    assert mu[0] == pytest.approx(0.7 * s @ s)
    assert np.all(mu[1:] <= 1e-10 * mu[0])
    np.testing.assert_allclose(T[0], s / np.linalg.norm(s))  # largest entry positive


def test_random_psd_matches_jacobi():
    rng = np.random.default_rng(11)
    G = rng.standard_normal((6, 6))
    C = G @ G.T
    dt = 0.5
    mu, T = bd.eigendecompose_temporal(_cov(C, dt))
    ref_vals, ref_vecs = jacobi_eigen(C * dt)
    np.testing.assert_allclose(mu, ref_vals, rtol=1e-9, atol=1e-9)
    for i in range(6):
        v = ref_vecs[:, i] / np.sqrt(dt)
        v *= np.sign(v[np.argmax(np.abs(v))])
        np.testing.assert_allclose(T[i], v, atol=1e-9)


def test_temporal_orthonormality_with_dt():
    fl = bd.remove_mean(_ensemble(seed=2, interval=600.0))
    cov = bd.temporal_covariance(fl, 0)
    mu, T = bd.eigendecompose_temporal(cov)
    G = cov.dt * T @ T.T
    assert np.max(np.abs(G - np.eye(len(mu)))) <= 1e-8
    assert np.all(np.diff(mu) <= 0) and np.all(mu >= 0)


def test_sign_convention():
    fl = bd.remove_mean(_ensemble(seed=3))
    _, T = bd.eigendecompose_temporal(bd.temporal_covariance(fl, 1))
    for row in T:
        assert row[np.argmax(np.abs(row))] > 0


def test_not_symmetric():
    with pytest.raises(NotSymmetric):
        bd.eigendecompose_temporal(_cov([[1.0, 0.5], [0.0, 1.0]]))


def test_indefinite():
    with pytest.raises(IndefiniteBeyondTolerance):
        bd.eigendecompose_temporal(_cov([[1.0, 0.0], [0.0, -0.5]]))


def test_tiny_negative_clamped():
    mu, _ = bd.eigendecompose_temporal(_cov([[1.0, 0.0], [0.0, -1e-14]]))
    assert mu[1] == 0.0


# --- spatial-stochastic modes ------------------------------------------------

def test_separable_single_term_recovered():
    fx = separable_ensemble(n_real=4, n_int=7, energies=(2.0,), fluct_terms=1)
    fl, cov, m = bd.bd_decompose(fx.ensemble, 0, 1.0)
    assert m.M == 1
    s = np.sign(np.sum(m.T[0] * fx.T[0]))
    np.testing.assert_allclose(s * m.a[0], fx.a[0], atol=1e-10)


def test_zero_modes():
    fl = bd.remove_mean(_ensemble())
    cov = bd.temporal_covariance(fl)
    mu, T = bd.eigendecompose_temporal(cov)
    assert bd.spatial_stochastic_modes(fl, mu, T, 0).shape[0] == 0


def test_three_term_construct_then_recover():
    fx = separable_ensemble(n_real=5, n_int=9, nz=3, nx=6, energies=(3.0, 1.5, 0.5), seed=7)
    fl, cov, m = bd.bd_decompose(fx.ensemble, 0, n_modes=3)
    for i in range(3):
        s = np.sign(np.sum(m.T[i] * fx.T[i]))
        np.testing.assert_allclose(s * m.T[i], fx.T[i], atol=1e-8 / np.sqrt(600))
        np.testing.assert_allclose(s * m.a[i], fx.a[i], atol=1e-8)


def test_zero_eigenvalue_mode_request():
    fx = separable_ensemble(energies=(1.0,), seed=1)
    fl, cov, m = bd.bd_decompose(fx.ensemble, 0, n_modes=1)
    with pytest.raises(ZeroEigenvalue):
        bd.spatial_stochastic_modes(fl, m.mu, m.T, 2)


def test_weak_orthogonality():
    fl, cov, m = bd.bd_decompose(_ensemble(seed=8), 0, n_modes=4)
    G = bd.weak_orthogonality(m.a, m.mu, fl.grid.weights())
    assert np.max(np.abs(G - np.eye(4))) <= 1e-6


# --- truncation --------------------------------------------------------------

def test_truncation_examples():
    assert bd.energy_truncation([9, 1], 0.9) == 1
    assert bd.energy_truncation([3, 2, 1, 0, 0], 1.0) == 3
    mu = [50, 15, 12, 8, 5, 4, 3, 2, 1]  # cumulative 0.9 reached at the fifth mode
    assert bd.energy_truncation(mu, 0.9) == 5


@given(st.integers(1, 40), st.floats(0.01, 1.0))
def test_equal_spectrum_truncation(L, f):
    assert bd.energy_truncation(np.ones(L), f) == min(L, int(np.ceil(f * L - 1e-9)))


def test_threshold_range():
    with pytest.raises(ValueError):
        bd.energy_truncation([1.0], 0.0)


# --- properties --------------------------------------------------------------

@pytest.mark.parametrize("kind", [0, 1, 2])
@pytest.mark.parametrize("M", [1, 2, 4])
def test_reconstruction_error_equals_discarded_energy(kind, M):
    fl, cov, m = bd.bd_decompose(_ensemble((5, 6, 3, 4), seed=9), kind, n_modes=M)
    err = bd.relative_error(fl.u, bd.reconstruct(m.a, m.T, M), fl.grid.weights(), fl.dt, kind)
    assert err == pytest.approx(1 - m.mu[:M].sum() / m.mu.sum(), abs=1e-6)


def test_trace_identity():
    fl = bd.remove_mean(_ensemble(seed=10))
    cov = bd.temporal_covariance(fl)
    mu, _ = bd.eigendecompose_temporal(cov)
    assert mu.sum() == pytest.approx(np.trace(cov.C * cov.dt), rel=1e-10)


@given(st.floats(0.1, 50.0), st.integers(0, 50))
@settings(max_examples=25, deadline=None)
def test_scale_equivariance(s, seed):
    ens = _ensemble((3, 5, 2, 3), seed=seed)
    fl = bd.remove_mean(ens)
    mu, T = bd.eigendecompose_temporal(bd.temporal_covariance(fl))
    fl.u *= s
    mu_s, T_s = bd.eigendecompose_temporal(bd.temporal_covariance(fl))
    np.testing.assert_allclose(mu_s, s * s * mu, rtol=1e-9, atol=1e-9 * s * s * mu[0])
    keep = mu > 1e-6 * mu[0]
    np.testing.assert_allclose(T_s[keep], T[keep], atol=1e-6)


@given(st.integers(1, 4), st.integers(0, 30))
@settings(max_examples=20, deadline=None)
def test_rank_of_separable_ensemble(r, seed):
    energies = tuple(2.0 ** -i for i in range(r))
    fx = separable_ensemble(n_real=5, n_int=10, nz=3, nx=5, energies=energies, seed=seed)
    fl, cov, m = bd.bd_decompose(fx.ensemble, 0, 1.0)
    assert np.count_nonzero(m.mu > 1e-10 * m.mu[0]) == r
