import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbscatter.floquet import (FBQuadrature, background_green, green_matrix, ifb_quadrature,
                               kappa_of, translate_cell)
from fbscatter.quasiperiodic import point_source_data
from fbscatter.special import ParameterError


def test_kappa_values():
    assert kappa_of(1.25) == 0.25
    assert kappa_of(1.5) == 0.5
    assert kappa_of(2.0) == 0.0


@settings(max_examples=50, deadline=None)
@given(k=st.floats(0.1, 20.0), n=st.integers(8, 40).map(lambda m: 2 * m))
def test_weights_sum_to_one(k, n):
    # the sin-weighted Gauss rule integrates constants to round-off from n = 16 on
    q = ifb_quadrature(k, n)
    assert abs(q.weights.sum() - 1.0) < 1e-13
    assert len(q.nodes) == n
    kap = abs(q.kappa)
    assert np.all(q.nodes >= -kap - 1e-15) and np.all(q.nodes <= 1 - kap + 1e-15)


def test_weights_sum_small_n_converges():
    errs = [abs(ifb_quadrature(1.25, n).weights.sum() - 1) for n in (4, 8, 12)]
    assert errs[0] > errs[1] > errs[2]


def test_semicircle_integral():
    q = ifb_quadrature(1.25, 32)
    kap = q.kappa
    f = np.where(np.abs(q.nodes) < kap, np.sqrt(np.clip(kap**2 - q.nodes**2, 0, None)), 0.0)
    assert abs(q.weights @ f - np.pi / 32) <= 1e-12
    assert q.branch == "split"


def test_half_integer_single_interval():
    q = ifb_quadrature(1.5, 18)
    assert q.branch == "single"
    assert np.all(np.abs(q.nodes) < 0.5)


def test_integer_k_single_interval():
    q = ifb_quadrature(2.0, 16)
    assert q.branch == "single"
    assert np.all((q.nodes > 0) & (q.nodes < 1))


def test_square_root_endpoint_behaviour_is_resolved():
    # sqrt(kappa^2 - alpha^2) near the branch point, integrated on both pieces
    q = ifb_quadrature(1.7, 40)
    kap = abs(q.kappa)
    f = np.sqrt(np.abs(kap**2 - q.nodes**2))
    from scipy.integrate import quad
    ref = quad(lambda a: np.sqrt(abs(kap**2 - a**2)), -kap, 1 - kap, points=[kap], limit=200,
               epsabs=1e-14)[0]
    assert abs(q.weights @ f - ref) < 1e-12


def test_quadrature_errors():
    with pytest.raises(ParameterError):
        ifb_quadrature(1.25, 7)
    with pytest.raises(ParameterError):
        ifb_quadrature(1.25, 0)


def test_zero_node_is_phase_free():
    q = FBQuadrature(1.0, 0.0, np.array([0.0, 0.3]), np.array([0.5, 0.5]), 2, "single")
    assert q.phases(5)[0] == 1.0


PAIRS_A = np.array([[2.3, 0.4], [-2.5, 1.2], [0.2, 2.6], [-0.7, -2.5], [2.6, -1.6],
                    [-2.6, -0.3], [1.5, 2.3], [-1.9, 2.4], [0.9, -2.7], [2.6, 2.6]])
PAIRS_B = np.array([[-2.4, -1.1], [2.7, 2.2], [-0.3, -2.7], [1.1, 2.5], [-2.2, 1.9],
                    [2.5, 0.2], [-1.4, -2.6], [2.0, -2.4], [-0.8, 2.7], [-2.6, -2.6]])


@pytest.fixture(scope="module")
def pair_samples(ex1_cell):
    fbq = ifb_quadrature(ex1_cell.k, 32)
    src = np.vstack([PAIRS_A, PAIRS_B])
    return background_green(ex1_cell, fbq, src, cells=(0, 1), rayleigh=False, keep_alpha=True)


def test_reciprocity(pair_samples):
    s = pair_samples
    G_ab = np.array([s.evaluate(a[None], warn=False, cols=10 + i)[0, 0]
                     for i, a in enumerate(PAIRS_A)])
    G_ba = np.array([s.evaluate(b[None], warn=False, cols=i)[0, 0]
                     for i, b in enumerate(PAIRS_B)])
    assert np.max(np.abs(G_ab - G_ba) / np.abs(G_ab)) <= 1e-7


def test_dirichlet_residual_on_obstacle(pair_samples, ex1_cell):
    O = ex1_cell.idx_obstacle
    for j in (0, 1):
        tr, _ = pair_samples.boundary_values(j)
        assert np.abs(tr[O]).max() <= 1e-7 * np.abs(tr).max()


def test_smooth_part_bounded_near_source(pair_samples):
    s = pair_samples
    src = PAIRS_A[0]
    tr, _ = s.boundary_values(0)
    bound = 10 * np.abs(tr[:, 0]).max()
    ray = np.array([1.0, 1.0]) / np.sqrt(2)
    for dist in (1e-1, 1e-2, 1e-3):
        x = (src + dist * ray)[None]
        g = s.evaluate(x, warn=False, cols=0)[0, 0]
        phi, _ = point_source_data(x, np.zeros((1, 2)), np.ones(1), src, s.cell.k)
        assert abs(g - phi[0, 0]) <= bound


def test_translate_identity_and_wall_consistency(pair_samples, ex1_cell):
    s = pair_samples
    d0, t0 = translate_cell(s, 0)
    assert d0 is s.dens[0] and t0 is s.trace[0]
    tr0, _ = s.boundary_values(0)
    tr1, _ = s.boundary_values(1)
    R, L = ex1_cell.idx_right, ex1_cell.idx_left
    assert np.abs(tr0[R] - tr1[L]).max() <= 1e-7 * np.abs(tr0).max()


def test_translate_from_kept_alpha_data(pair_samples):
    s = pair_samples
    d1 = s.dens.pop(1)
    s.trace.pop(1)
    c1 = s.cphase.pop(1)
    d1b, _ = translate_cell(s, 1)
    assert np.abs(d1b - d1).max() <= 1e-13 * np.abs(d1).max()
    assert abs(s.cphase[1] - c1) < 1e-15
    with pytest.raises(ParameterError):
        kept, s.per_alpha = s.per_alpha, None
        try:
            translate_cell(s, 7)
        finally:
            s.per_alpha = kept


def test_green_matrix_shape(pair_samples):
    assert green_matrix(pair_samples, [[0.0, 2.8]], warn=False).shape == (1, 20)


def test_threaded_accumulation_matches_serial(small_cell):
    fbq = ifb_quadrature(small_cell.k, 8)
    src = np.array([[1.5, 0.5], [-1.6, 1.2]])
    nu = np.array([[1.0, 0.0], [0.0, 1.0]])
    a = background_green(small_cell, fbq, src, nu, cells=(0, 2), threads=1)
    b = background_green(small_cell, fbq, src, nu, cells=(0, 2), threads=3)
    for j in (0, 2):
        assert np.abs(a.dens[j] - b.dens[j]).max() <= 1e-12 * np.abs(a.dens[j]).max()


def test_dipole_columns_match_finite_difference(small_cell):
    fbq = ifb_quadrature(small_cell.k, 8)
    y, nu, h = np.array([1.4, 0.6]), np.array([0.6, 0.8]), 1e-5
    s = background_green(small_cell, fbq, np.array([y, y + h * nu, y - h * nu]),
                         np.tile(nu, (3, 1)), rayleigh=False)
    x = np.array([[-1.5, -1.5]])
    v = s.evaluate(x, warn=False)[0]
    fd = (v[1] - v[2]) / (2 * h)
    assert abs(v[3] - fd) <= 1e-6 * abs(fd)


def test_bad_source_normals(small_cell):
    with pytest.raises(ParameterError):
        background_green(small_cell, ifb_quadrature(1.25, 4), [[1.5, 0.5]], [[1.0, 0.0]] * 2)
