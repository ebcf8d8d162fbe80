import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from stsfusion import fusion as fu
from stsfusion.errors import DegenerateProfile, ExhaustiveLimitExceeded, SingularChannel
from stsfusion.sensors import SensorProfile

from conftest import crandn


def make_input(rng, M=3, NT=6, rho=0.7, sigma_w2=1.0, profile=None, x=None, **kw):
    GA = crandn(rng, NT, M)
    profile = profile or SensorProfile.iid(M, 0.5, 0.05)
    if x is None:
        x = rng.choice([-1.0, 1.0], M)
    y = np.sqrt(rho) * GA @ x + np.sqrt(sigma_w2) * crandn(rng, NT)
    return fu.FusionInput(y, GA, rho, sigma_w2, profile, **kw)


# -- independent brute-force oracles ---------------------------------------------------

def oracle_prior(x, p_plus):
    return np.prod([p if xm > 0 else 1 - p for xm, p in zip(x, p_plus)])


def oracle_terms(inp):
    for x in itertools.product([1.0, -1.0], repeat=inp.M):
        x = np.array(x)
        r = inp.y_vec - np.sqrt(inp.rho) * inp.GA @ x
        yield x, np.sum(np.abs(r) ** 2) / inp.sigma_w2


def oracle_llr(inp):
    num = den = 0.0
    for x, d in oracle_terms(inp):
        num += np.exp(-d) * oracle_prior(x, inp.profile.P_D)
        den += np.exp(-d) * oracle_prior(x, inp.profile.P_F)
    return np.log(num) - np.log(den)


def oracle_maxlog(inp):
    best1 = best0 = np.inf
    with np.errstate(divide="ignore"):
        for x, d in oracle_terms(inp):
            best1 = min(best1, d - np.log(oracle_prior(x, inp.profile.P_D)))
            best0 = min(best0, d - np.log(oracle_prior(x, inp.profile.P_F)))
    return best0 - best1


def oracle_ml(inp):
    return min(oracle_terms(inp), key=lambda t: t[1])[0]


# -- optimum rule ---------------------------------------------------------------------

class TestOptimum:
    def test_equal_priors_give_zero(self, rng):
        inp = make_input(rng, profile=SensorProfile.iid(3, 0.3, 0.3))
        assert fu.llr_optimum(inp) == 0.0

    def test_perfect_sensor_reduction(self, rng):
        inp = make_input(rng, profile=SensorProfile.iid(3, 1.0, 0.0))
        s = np.sqrt(inp.rho) * inp.GA @ np.ones(3)
        expected = (np.sum(np.abs(inp.y_vec + s) ** 2) - np.sum(np.abs(inp.y_vec - s) ** 2)) / inp.sigma_w2
        assert fu.llr_optimum(inp) == pytest.approx(expected, rel=1e-9)

    def test_matches_naive_sum(self, rng):
        inp = make_input(rng, M=3, NT=4, rho=0.3)
        assert fu.llr_optimum(inp) == pytest.approx(oracle_llr(inp), rel=1e-9)

    def test_stable_at_high_snr(self, rng):
        inp = make_input(rng, M=6, NT=12, rho=1.0, sigma_w2=1e-6)
        assert np.isfinite(fu.llr_optimum(inp))

    def test_exhaustive_limit(self, rng):
        inp = make_input(rng, M=4, exhaustive_limit=3)
        for rule in (fu.llr_optimum, fu.maxlog_statistic, fu.decode_ml):
            with pytest.raises(ExhaustiveLimitExceeded):
                rule(inp)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_oracle_equivalence(M, seed):
    rng = np.random.default_rng(seed)
    pf = rng.uniform(0.01, 0.4, M)
    prof = SensorProfile(pf + rng.uniform(0.05, 0.55, M), pf)
    inp = make_input(rng, M=M, NT=2 * M + 1, rho=rng.uniform(0.1, 1), sigma_w2=rng.uniform(0.5, 2), profile=prof)
    assert fu.llr_optimum(inp) == pytest.approx(oracle_llr(inp), rel=1e-9, abs=1e-12)
    assert fu.maxlog_statistic(inp) == pytest.approx(oracle_maxlog(inp), rel=1e-9, abs=1e-12)
    np.testing.assert_array_equal(fu.decode_ml(inp), oracle_ml(inp))


# -- MRC / mMRC -------------------------------------------------------------------------

def orthogonal_ga(rng, NT, M, N):
    q, _ = np.linalg.qr(crandn(rng, NT, M))
    return np.sqrt(N) * q


class TestMRC:
    def test_zero_input(self, rng):
        inp = make_input(rng)
        inp0 = fu.FusionInput(np.zeros_like(inp.y_vec), inp.GA, inp.rho, inp.sigma_w2, inp.profile)
        assert fu.mrc_statistic(inp0) == 0.0

    def test_matched_signal(self, rng):
        inp = make_input(rng)
        s = inp.GA @ np.ones(inp.M)
        matched = fu.FusionInput(s, inp.GA, inp.rho, inp.sigma_w2, inp.profile)
        assert fu.mrc_statistic(matched) == pytest.approx(np.linalg.norm(s) ** 2)

    def test_mmrc_equals_mrc_for_orthonormal_columns(self, rng):
        GA = orthogonal_ga(rng, 12, 3, N=4)
        y = crandn(rng, 12)
        inp = fu.FusionInput(y, GA, 0.5, 1.0, SensorProfile.iid(3), N=4)
        np.testing.assert_allclose(np.diagonal(inp.D_g), 1.0)
        assert fu.mmrc_statistic(inp) == pytest.approx(fu.mrc_statistic(inp))

    def test_mmrc_removes_column_scaling(self, rng):
        N, x = 4, np.array([1.0, -1.0, 1.0])
        GA = orthogonal_ga(rng, 12, 3, N)
        scaled = GA * np.array([0.1, 3.0, 7.5])
        stat = []
        for A in (GA, scaled):
            inp = fu.FusionInput(np.sqrt(0.5) * A @ x, A, 0.5, 1.0, SensorProfile.iid(3), N=N)
            stat.append(fu.mmrc_statistic(inp))
        assert stat[1] == pytest.approx(stat[0], rel=1e-12)

    def test_zero_column(self, rng):
        inp = make_input(rng)
        GA = inp.GA.copy()
        GA[:, 1] = 0
        with pytest.raises(SingularChannel):
            fu.mmrc_statistic(fu.FusionInput(inp.y_vec, GA, inp.rho, inp.sigma_w2, inp.profile))


# -- widely linear ------------------------------------------------------------------------

class TestWidelyLinear:
    def test_degenerate_profile(self, rng):
        inp = make_input(rng, profile=SensorProfile.iid(3, 0.4, 0.4))
        with pytest.raises(DegenerateProfile):
            fu.wl_statistic(inp, 0)

    def test_noise_dominated_is_matched_filter(self, rng):
        inp = make_input(rng, M=1, NT=5, sigma_w2=100.0, profile=SensorProfile.iid(1, 1.0, 0.0))
        r = fu.wl_combiner(inp, 1)
        col = fu.augment(inp.GA)[:, 0]
        cos = abs(np.vdot(r, col)) / np.linalg.norm(col)
        assert cos > 0.999

    @pytest.mark.parametrize("i", [0, 1])
    def test_unit_norm(self, rng, i):
        r = fu.wl_combiner(make_input(rng), i)
        assert abs(np.linalg.norm(r) - 1) < 1e-12

    @pytest.mark.parametrize("i", [0, 1])
    def test_fast_path_matches_direct_solve(self, rng, i):
        inp = make_input(rng, M=4, NT=10)
        view = fu.augmented_view(inp)
        direct = np.vdot(fu.wl_combiner(inp, i), view.y_aug)
        assert abs(direct.imag) < 1e-10
        assert fu.wl_statistic(inp, i) == pytest.approx(direct.real, rel=1e-9)

    def test_augmented_structure(self, rng):
        view = fu.augmented_view(make_input(rng))
        n = view.y_aug.size // 2
        np.testing.assert_array_equal(view.y_aug[n:], view.y_aug[:n].conj())
        np.testing.assert_array_equal(view.GA_aug[n:], view.GA_aug[:n].conj())

    @pytest.mark.parametrize("i", [0, 1])
    def test_deflection_optimal(self, rng, i):
        inp = make_input(rng, M=3, NT=6)
        r = fu.wl_combiner(inp, i)
        best = fu.deflection(r, inp, i)
        for _ in range(50):
            d = crandn(rng, r.size)
            d /= np.linalg.norm(d)
            r2 = r + 10 ** rng.uniform(-3, 0) * d
            assert fu.deflection(r2 / np.linalg.norm(r2), inp, i) <= best * (1 + 1e-6)

    def test_bad_kind(self, rng):
        with pytest.raises(ValueError):
            fu.wl_statistic(make_input(rng), 2)


# -- Max-Log ---------------------------------------------------------------------------

class TestMaxLog:
    def test_equal_priors(self, rng):
        assert fu.maxlog_statistic(make_input(rng, profile=SensorProfile.iid(3, 0.2, 0.2))) == 0.0

    def test_perfect_sensors_affine_in_mrc(self, rng):
        inp = make_input(rng, profile=SensorProfile.iid(3, 1.0, 0.0))
        slope = 4 * np.sqrt(inp.rho) / inp.sigma_w2
        assert fu.maxlog_statistic(inp) == pytest.approx(slope * fu.mrc_statistic(inp), rel=1e-9)

    def test_two_sensor_enumeration(self, rng):
        inp = make_input(rng, M=2, NT=3)
        assert fu.maxlog_statistic(inp) == pytest.approx(oracle_maxlog(inp), rel=1e-12)


# -- decoders and Chair-Varshney -----------------------------------------------------------

class TestDecoders:
    def test_ml_noiseless(self, rng):
        x0 = np.array([1.0, -1.0, -1.0, 1.0])
        GA = crandn(rng, 8, 4)
        inp = fu.FusionInput(np.sqrt(0.4) * GA @ x0, GA, 0.4, 1.0, SensorProfile.iid(4))
        np.testing.assert_array_equal(fu.decode_ml(inp), x0)

    def test_ml_tie_break(self, rng):
        # exactly orthogonal columns so that every candidate ties
        GA = np.eye(6)[:, :3] * np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
        inp = fu.FusionInput(np.zeros(6), GA, 0.4, 1.0, SensorProfile.iid(3))
        np.testing.assert_array_equal(fu.decode_ml(inp), np.ones(3))

    def test_ml_matches_enumeration(self, rng):
        inp = make_input(rng, M=3, NT=4, sigma_w2=2.0)
        np.testing.assert_array_equal(fu.decode_ml(inp), oracle_ml(inp))

    def test_mmse_noiseless_limit(self, rng):
        N, x0 = 3, np.array([-1.0, 1.0, 1.0])
        GA = orthogonal_ga(rng, 9, 3, N)
        inp = fu.FusionInput(np.sqrt(0.5) * GA @ x0, GA, 0.5, 1e-12, SensorProfile.iid(3), N=N)
        soft = fu.decode_mmse(inp)
        ratio = soft / x0
        assert np.all(ratio > 0)
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)

    def test_mmse_zero_input(self, rng):
        inp = make_input(rng)
        inp0 = fu.FusionInput(np.zeros_like(inp.y_vec), inp.GA, inp.rho, inp.sigma_w2, inp.profile)
        np.testing.assert_array_equal(fu.decode_mmse(inp0), 0.0)
        np.testing.assert_array_equal(fu.hard_decision(fu.decode_mmse(inp0)), 1.0)

    def test_mmse_single_sensor(self, rng):
        inp = make_input(rng, M=1, NT=5)
        b = np.vdot(inp.GA[:, 0], inp.y_vec)
        alpha = inp.sigma_w2 / np.sqrt(inp.rho)
        dg = np.linalg.norm(inp.GA) ** 2 / inp.n_antennas
        assert fu.decode_mmse(inp)[0] == pytest.approx(b.real / (dg + alpha))

    def test_cv_values(self):
        prof = SensorProfile.iid(1, 0.5, 0.05)
        assert fu.cv_statistic([1.0], prof) == pytest.approx(np.log(10))
        assert fu.cv_statistic([-1.0], prof) == pytest.approx(-0.6419, abs=1e-4)
        assert fu.cv_statistic([1.0, -1.0, 1.0], SensorProfile.iid(3, 0.3, 0.3)) == 0.0

    def test_cv_boundary_probabilities_finite(self):
        assert np.isfinite(fu.cv_statistic([1.0, -1.0], SensorProfile.iid(2, 1.0, 0.0)))


# -- invariants across all rules -------------------------------------------------------------

def test_antisymmetry(rng):
    inp = make_input(rng, M=3, NT=6)
    neg = fu.FusionInput(-inp.y_vec, inp.GA, inp.rho, inp.sigma_w2, inp.profile)
    for rule in ("mrc", "mmrc", "wl0", "wl1"):
        assert fu.RULES[rule](neg) == pytest.approx(-fu.RULES[rule](inp), rel=1e-12)


def test_phase_invariance(rng):
    inp = make_input(rng, M=3, NT=6)
    rot = np.exp(1j * 0.83)
    inp2 = fu.FusionInput(rot * inp.y_vec, rot * inp.GA, inp.rho, inp.sigma_w2, inp.profile)
    a, b = fu.evaluate(inp), fu.evaluate(inp2)
    for rule in fu.RULE_NAMES:
        assert b[rule] == pytest.approx(a[rule], rel=1e-9, abs=1e-12)


def test_batched_matches_single(rng):
    singles = [make_input(rng, M=3, NT=6) for _ in range(5)]
    prof = singles[0].profile
    batch = fu.FusionInput(np.stack([s.y_vec for s in singles]), np.stack([s.GA for s in singles]),
                           singles[0].rho, singles[0].sigma_w2, prof)
    out = fu.evaluate(batch)
    for k, s in enumerate(singles):
        single = fu.evaluate(s)
        for rule in fu.RULE_NAMES:
            assert out[rule][k] == pytest.approx(single[rule], rel=1e-10, abs=1e-12)


def test_perfect_sensor_rankings_agree(rng):
    prof = SensorProfile.iid(3, 1.0, 0.0)
    GA = crandn(rng, 200, 8, 3)
    x = rng.choice([-1.0, 1.0], size=(200, 1)) * np.ones(3)
    y = np.sqrt(0.5) * np.einsum("bnm,bm->bn", GA, x) + crandn(rng, 200, 8)
    out = fu.evaluate(fu.FusionInput(y, GA, 0.5, 1.0, prof), ("opt", "maxlog", "mrc"))
    assert stats.kendalltau(out["opt"], out["mrc"]).statistic == pytest.approx(1.0)
    assert stats.kendalltau(out["maxlog"], out["mrc"]).statistic == pytest.approx(1.0)


def test_fuse_all_fields(rng):
    outcome = fu.fuse_all(make_input(rng))
    assert np.isfinite(outcome.gamma_cv_mmse) and np.isfinite(outcome.gamma_opt)


def test_unknown_rule(rng):
    with pytest.raises(KeyError):
        fu.evaluate(make_input(rng), ("nope",))
