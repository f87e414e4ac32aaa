import math

import numpy as np
import pytest
from scipy.linalg import schur

from volgrowth.bundles import (UnconvergedError, check_domination, cs_top_exponent, cs_top_exponents,
                               estimate_cs, estimate_splitting, estimate_unstable, lyapunov_spectrum)
from volgrowth.multilinear import Subspace, subspace_angle
from volgrowth.system import ConstantCocycle, catalog, make_linear_toral

from conftest import LINEAR, UNSTABLE_DIM
from oracles import LOG_GOLDEN_SQ, log_moduli

GOLDEN_SQ = (3 + math.sqrt(5)) / 2


def invariant_plane(A, outside: bool) -> Subspace:
    """Span of the generalized eigenspaces outside (or inside and on) the unit circle, via sorted real Schur."""
    T, Z, k = schur(np.asarray(A, dtype=float), output="real", sort="ouc" if outside else "iuc")
    return Subspace(Z[:, :k])


def test_cat_unstable_direction(cat):
    est = estimate_unstable(cat, [0.3, 0.4], 1, n_settle=60)
    assert subspace_angle(est.subspace, Subspace.span([GOLDEN_SQ - 1, 1.0])) < 1e-10
    assert est.converged


def test_axis_dominance():
    g = ConstantCocycle(np.diag([3.0, 1.0]))
    est = estimate_unstable(g, [0.1, 0.2], 1, n_settle=40)
    assert subspace_angle(est.subspace, Subspace(np.array([1.0, 0.0]))) < 1e-15
    cs = estimate_cs(g, [0.1, 0.2], 1, n_settle=40)
    assert subspace_angle(cs.subspace, Subspace(np.array([0.0, 1.0]))) < 1e-15


def test_full_rank_unstable_rejected(cat):
    with pytest.raises(ValueError):
        estimate_unstable(cat, [0.1, 0.1], 2)


def test_cat_center_stable_direction(cat):
    est = estimate_cs(cat, [0.3, 0.4], 1)
    assert subspace_angle(est.subspace, Subspace.span([2 - GOLDEN_SQ, 1.0])) < 1e-10


def test_t3_center_stable_plane(t3_center):
    est = estimate_cs(t3_center, [0.3, 0.4, 0.5], 1)
    want = Subspace.span([2 - GOLDEN_SQ, 1.0, 0.0], [0.0, 0.0, 1.0])
    assert subspace_angle(est.subspace, want) < 1e-10


def test_splitting_of_perturbed_map_is_transverse(perturbed_cat):
    sp = estimate_splitting(perturbed_cat, [0.2, 0.7], 1)
    assert sp.converged
    assert subspace_angle(sp.unstable, sp.center_stable) > 0.5


def test_domination_margins(cat, t3_center, rng):
    X = rng.random((16, 2))
    dom = check_domination(cat, X, 1)
    assert dom.dominated and dom.margin == pytest.approx(GOLDEN_SQ ** 2, rel=1e-9)
    dom = check_domination(t3_center, rng.random((16, 3)), 1)
    assert dom.dominated and dom.margin == pytest.approx(GOLDEN_SQ, rel=1e-9)


def test_rotation_is_not_dominated(rng):
    rot = make_linear_toral([[0, -1], [1, 0]])
    dom = check_domination(rot, rng.random((8, 2)), 1)
    assert not dom.dominated
    assert dom.margin == pytest.approx(1.0)


def test_unsettled_splitting_reported(t3_center, rng):
    with pytest.raises(UnconvergedError) as exc:
        check_domination(t3_center, rng.random((4, 3)), 1, n_settle=3)
    assert exc.value.point is not None and exc.value.residual > 1e-6


def test_lyapunov_examples(cat):
    spec = lyapunov_spectrum(ConstantCocycle(np.diag([2.0, 0.5])), [0.1, 0.1], 1000)
    np.testing.assert_allclose(spec.exponents, [-math.log(2), math.log(2)], atol=1e-12)
    spec = lyapunov_spectrum(cat, [0.1, 0.2], 10_000)
    np.testing.assert_allclose(spec.exponents, [-LOG_GOLDEN_SQ, LOG_GOLDEN_SQ], atol=1e-6)
    spec = lyapunov_spectrum(make_linear_toral(np.eye(2, dtype=int)), [0.1, 0.2], 100)
    np.testing.assert_array_equal(spec.exponents, [0.0, 0.0])


def test_lyapunov_generic_path_agrees_with_kernel(perturbed_cat):
    fast = lyapunov_spectrum(perturbed_cat, [0.3, 0.6], 20_000, seed=4)
    slow = lyapunov_spectrum(perturbed_cat, [0.3, 0.6], 20_000, seed=4, renorm_every=1)
    np.testing.assert_allclose(fast.exponents, slow.exponents, atol=1e-10)
    assert fast.log_det_average == pytest.approx(slow.log_det_average, abs=1e-10)


def test_cs_top_exponent_examples(cat, t3_center):
    assert cs_top_exponent(t3_center, [0.2, 0.3, 0.4], 200, 1) == pytest.approx(0.0, abs=1e-2)
    assert cs_top_exponent(cat, [0.2, 0.3], 200, 1) == pytest.approx(-LOG_GOLDEN_SQ, abs=1e-9)
    iso = make_linear_toral([[2, 1, 0, 0], [1, 1, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
    # E^cs = stable line + a rotated plane: the rotation contributes exponent zero
    assert cs_top_exponent(iso, [0.1, 0.2, 0.3, 0.4], 300, 1) == pytest.approx(0.0, abs=1e-2)


def test_cs_exponent_batched_matches_single(t3_center, rng):
    X = rng.random((3, 3))
    rates, residual = cs_top_exponents(t3_center, X, 50, 1)
    assert rates.shape == (3,) and np.all(residual < 1e-6)
    assert rates[1] == pytest.approx(cs_top_exponent(t3_center, X[1], 50, 1), abs=1e-12)


# --- invariants ----------------------------------------------------------------

@pytest.mark.property
@pytest.mark.parametrize("name", sorted(LINEAR))
def test_unstable_estimate_converges(name, rng):
    f, u = catalog(name), UNSTABLE_DIM[name]
    want = invariant_plane(f.linear_part, outside=True)
    assert want.rank == u
    for x in rng.random((5, f.dimension)):
        assert subspace_angle(estimate_unstable(f, x, u, n_settle=80).subspace, want) < 1e-8


@pytest.mark.property
@pytest.mark.parametrize("name", sorted(LINEAR))
def test_lyapunov_linear_and_sum_rule(name):
    f = catalog(name)
    n = 10 ** 6 if name == "t3-complex" else 10 ** 5
    spec = lyapunov_spectrum(f, np.full(f.dimension, 0.37), n)
    np.testing.assert_allclose(spec.exponents, np.sort(log_moduli(f.linear_part)), atol=1e-6)
    assert abs(spec.exponents.sum()) < 1e-8


@pytest.mark.property
@pytest.mark.parametrize("name", ["perturbed-cat", "perturbed-t3-center"])
def test_exponent_stability_perturbed(name):
    # single-orbit averages: the doubling difference is ~1e-4 at n = 1e6 and ~1e-5 at n = 4e6
    f = catalog(name, 0.05)
    x = np.array([0.123, 0.456, 0.789][:f.dimension])
    a = lyapunov_spectrum(f, x, 4 * 10 ** 6)
    b = lyapunov_spectrum(f, x, 8 * 10 ** 6)
    assert np.abs(a.exponents - b.exponents).max() < 1e-4
    # these modes do not preserve volume, so the sum matches the orbit's mean log det rather than zero
    assert abs(a.exponents.sum() - a.log_det_average) < 1e-8


@pytest.mark.property
@pytest.mark.parametrize("name", ["cat", "t3-center"])
def test_domination_margin_is_modulus_ratio(name, rng):
    f, u = catalog(name), UNSTABLE_DIM[name]
    logs = log_moduli(f.linear_part)
    dom = check_domination(f, rng.random((16, f.dimension)), u)
    assert dom.margin == pytest.approx(math.exp(logs[u - 1] - logs[u]), abs=1e-6)


def test_domination_margin_non_normal_block(t3_complex, rng):
    # the complex unstable block is not normal, so its one-step Euclidean conorm sits below the
    # modulus; the margin is then only bounded by the modulus ratio
    logs = log_moduli(t3_complex.linear_part)
    dom = check_domination(t3_complex, rng.random((16, 3)), 2)
    assert dom.dominated
    assert 1.0 < dom.margin <= math.exp(logs[1] - logs[2])
