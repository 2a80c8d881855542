import pytest

from torus_lp import oracle
from torus_lp.grid import GridSpec
from torus_lp.trigpoly import TrigEigenfunction, WaveTerm

N300, N400 = GridSpec(300), GridSpec(400)


@pytest.mark.slow
def test_riemann_estimate_full_grid_inside_table_1(psi):
    est = oracle.riemann_estimate(psi, GridSpec(1500), 1, "plus")
    assert 0.5115 <= est.value <= 0.5212
    assert est.stderr == 0 and est.method == "midpoint" and est.count == 1500


def test_riemann_mean_zero_and_parseval(psi):
    spec = GridSpec(64)
    plus = oracle.riemann_estimate(psi, spec, 1, "plus").value
    minus = oracle.riemann_estimate(psi, spec, 1, "minus").value
    assert abs(plus - minus) < 1e-3
    spec = GridSpec(200)
    total = (oracle.riemann_estimate(psi, spec, 2, "plus").value
             + oracle.riemann_estimate(psi, spec, 2, "minus").value)
    assert abs(total - 1.5) < 0.02


def test_riemann_rejects_bad_input(psi):
    with pytest.raises(ValueError):
        oracle.riemann_estimate(psi, GridSpec(8), -1, "plus")
    with pytest.raises(ValueError):
        oracle.riemann_estimate(psi, GridSpec(8), 1, "both")


def test_mc_parseval_and_determinism(psi):
    plus = oracle.mc_estimate(psi, 2, "plus", 1_000_000, seed=4)
    minus = oracle.mc_estimate(psi, 2, "minus", 1_000_000, seed=4)
    assert abs(plus.value + minus.value - 1.5) <= 4 * (plus.stderr + minus.stderr)
    again = oracle.mc_estimate(psi, 2, "plus", 1_000_000, seed=4)
    assert again == plus
    with pytest.raises(ValueError):
        oracle.mc_estimate(psi, 2, "plus", 0, seed=4)


def test_mc_positive_volume(psi):
    est = oracle.mc_estimate(psi, 0, "plus", 1_000_000, seed=9)
    assert abs(est.value - 0.3986) <= 4 * est.stderr


def test_mc_agrees_with_midpoint(psi):
    for p, sign in ((1, "plus"), (3, "minus")):
        assert oracle.mc_agreement_check(psi, GridSpec(200), p, sign, 1_000_000, 2).passed


@pytest.mark.parametrize("p", [1.5, 2.0])
def test_derivative_identity(psi, p):
    rep = oracle.derivative_identity_check(psi, p, N400)
    assert rep.passed and rep.value < 1e-4


def test_derivative_identity_homogeneous(psi):
    doubled = TrigEigenfunction(3, tuple(WaveTerm(2 * t.coefficient, t.kind, t.frequency)
                                         for t in psi.terms))
    a = oracle.derivative_identity_check(psi, 2.0, GridSpec(100))
    b = oracle.derivative_identity_check(doubled, 2.0, GridSpec(100))
    # R(p) picks up 2^p / 2^p = 1, the log terms shift by the same log 2
    assert b.passed
    assert b.details["identity"] == pytest.approx(a.details["identity"], rel=1e-9)
    with pytest.raises(ValueError):
        oracle.derivative_identity_check(psi, 1.0, GridSpec(10))


def test_monotonicity_scan(psi):
    rep = oracle.monotonicity_scan(psi, [1, 1.5, 2, 2.5, 3, 4], N400)
    assert rep.passed and rep.value == 0
    f, g = rep.details["f"], rep.details["g"]
    # point estimates sit just under the certified upper bounds 0.785, 0.546, 0.475 / 1.185, 1.268
    for est, upper in zip((f[1.0], f[2.0], f[3.0], g[2.0], g[3.0]),
                          (0.785, 0.546, 0.475, 1.185, 1.268)):
        assert upper - 0.1 < est < upper
    assert f[1.0] > f[2.0] > f[3.0] and g[2.0] < g[3.0]
    with pytest.raises(ValueError):
        oracle.monotonicity_scan(psi, [2, 1], N400)


@pytest.mark.parametrize("p, eps, sign", [(2, 0.5, "plus"), (1, 1, "minus"), (3, 1, "plus")])
def test_cauchy_schwarz(psi, p, eps, sign):
    assert oracle.cauchy_schwarz_check(psi, p, eps, sign, N300).passed


def test_cauchy_schwarz_degenerate(psi):
    rep = oracle.cauchy_schwarz_check(psi, 2, 0, "plus", N300)
    assert rep.passed and rep.value <= rep.tolerance
    with pytest.raises(ValueError):
        oracle.cauchy_schwarz_check(psi, 0.5, 1, "plus", N300)


def test_dilation_invariance(psi):
    rep = oracle.dilation_invariance_check(psi, 7, N300, 2.0)
    assert rep.passed and rep.value < 1e-10
    assert oracle.dilation_invariance_check(psi, 1, N300, 2.0).value == 0.0
    skipped = oracle.dilation_invariance_check(psi, 3, N300, 2.0)
    assert skipped.skipped and not skipped.passed


def test_identities(psi):
    assert oracle.diagonal_check().passed
    assert oracle.mean_zero_check(psi, GridSpec(64)).passed
    assert oracle.parseval_check(psi, N300).passed


def test_check_all_deterministic(psi):
    a = oracle.check_all(psi, N300, seed=1, mc_samples=200_000)
    b = oracle.check_all(psi, N300, seed=1, mc_samples=200_000)
    assert all(r.passed for r in a)
    assert [r.line() for r in a] == [r.line() for r in b]
