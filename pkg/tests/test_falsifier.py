import numpy as np
import pytest

from blocknorm import blockineq as bi
from blocknorm import falsifier as fz
from blocknorm.errors import InvalidConfig
from blocknorm.matcore import commutator_defect, is_line_segment_range, is_psd, operator_norm

from .conftest import WEIGHTED_SHIFT
from .oracles import lapack_gap, lapack_min_eig, lapack_norm


def stream(i=0, seed=99):
    return fz.RngStream(seed, i)


class TestStreams:
    def test_same_key_same_draws(self):
        a = stream(3).generator().standard_normal(5)
        b = stream(3).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_different_index_differs(self):
        a = stream(3).generator().standard_normal(5)
        b = stream(4).generator().standard_normal(5)
        assert not np.array_equal(a, b)

    def test_large_and_negative_seeds(self):
        fz.RngStream(2**64 - 1, 0).generator().random()
        fz.RngStream(-5, 0).generator().random()


class TestRandomPd:
    def test_scalar(self):
        a = fz.random_pd(1, 10, stream())
        assert a.shape == (1, 1) and a[0, 0].real > 0

    def test_reproducible(self):
        np.testing.assert_array_equal(fz.random_pd(3, 10, stream()), fz.random_pd(3, 10, stream()))

    def test_contract(self):
        g = stream().generator()
        for cap in (2.0, 1e4):
            for _ in range(500):
                a = fz.random_pd(int(g.integers(1, 6)), cap, g)
                w = np.linalg.eigvalsh(a)
                assert np.array_equal(a, a.conj().T)
                assert w.min() > 0 and is_psd(a)
                assert w.max() / w.min() <= cap * (1 + 1e-9)

    def test_bad_cap(self):
        with pytest.raises(InvalidConfig):
            fz.random_pd(2, 1.0, stream())


class TestRandomUnitary:
    def test_scalar(self):
        u = fz.random_unitary(1, stream())
        assert abs(abs(u[0, 0]) - 1) <= 1e-15

    def test_unitarity(self):
        g = stream().generator()
        for _ in range(1000):
            n = int(g.integers(1, 7))
            u = fz.random_unitary(n, g)
            assert np.linalg.norm(u.conj().T @ u - np.eye(n), 2) <= 1e-12

    def test_reproducible(self):
        np.testing.assert_array_equal(fz.random_unitary(4, stream()), fz.random_unitary(4, stream()))

    def test_phases_look_uniform(self):
        g = stream().generator()
        phases = np.array([np.angle(fz.random_unitary(1, g)[0, 0]) for _ in range(4000)])
        hist, _ = np.histogram(phases, bins=8, range=(-np.pi, np.pi))
        assert hist.min() > 400


class TestRandomNormal:
    def test_two_by_two_range_is_segment(self):
        g = stream().generator()
        for _ in range(50):
            assert is_line_segment_range(fz.random_normal_matrix(2, g))

    def test_defect(self):
        g = stream().generator()
        for _ in range(1000):
            x = fz.random_normal_matrix(int(g.integers(1, 6)), g)
            assert commutator_defect(x) <= 1e-10 * operator_norm(x) ** 2

    def test_reproducible(self):
        np.testing.assert_array_equal(fz.random_normal_matrix(3, stream()), fz.random_normal_matrix(3, stream()))


class TestSlack:
    def test_psd_and_scaled(self):
        g = stream().generator()
        for _ in range(200):
            s = fz.random_psd_slack(3, g)
            assert lapack_min_eig(s) >= -1e-12
            assert 1e-6 * (1 - 1e-9) <= lapack_norm(s) <= 10 * (1 + 1e-9)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            {"dim": 1},
            {"trials": -1},
            {"hill_climb_steps": -1},
            {"condition_cap": 1.0},
            {"x_kind": "weird"},
            {"mode": "problem9"},
            {"workers": 0},
        ],
    )
    def test_invalid(self, kw):
        base = {"mode": "problem1", "dim": 2, "trials": 1, "seed": 0}
        with pytest.raises(InvalidConfig):
            fz.SearchConfig(**{**base, **kw})

    def test_mode_string_accepted(self):
        assert fz.SearchConfig("problem5", 3, 1, 0).mode is fz.Mode.PROBLEM5


class TestHillClimb:
    def planted(self):
        d, u = fz.planted_problem5(3)
        return bi.rotation_violation(d, u).instance

    def test_zero_steps(self):
        inst = self.planted()
        assert fz.hill_climb(inst, 0, stream()) is inst

    def test_monotone_trace(self):
        inst = self.planted()
        trace = [bi.gap(fz.hill_climb(inst, k, stream(1))) for k in range(0, 41, 5)]
        assert all(b >= a for a, b in zip(trace, trace[1:]))

    def test_planted_stays_violating(self):
        inst = self.planted()
        out = fz.hill_climb(inst, 200, stream(2))
        assert bi.gap(out) >= 1.0 - 1e-12
        assert out.feasible
        assert lapack_gap(out.a, out.x, out.b) >= 1.0 - 1e-9

    def test_minimal_b_kept(self, rng):
        inst = self.planted()
        out = fz.hill_climb(inst, 50, stream(3), vary_slack=False)
        np.testing.assert_allclose(out.b, bi.feasible_b(out.a, out.x), atol=1e-12)


class TestPlanted:
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_rotation_gap_is_one(self, n):
        d, u = fz.planted_problem5(n)
        assert bi.rotation_gap(d, u) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(n), atol=1e-15)

    def test_dim3_is_weighted_shift(self):
        d, u = fz.planted_problem5(3)
        np.testing.assert_array_equal(d @ u, WEIGHTED_SHIFT)


class TestSearch:
    def test_hermitian_x_no_violations(self):
        rep = fz.search(fz.SearchConfig("problem1", 2, 60, 5, x_kind="hermitian", hill_climb_steps=20))
        assert rep.violations == []
        assert rep.trichotomy_counts["equal_band"] == 60

    def test_planted_problem5(self):
        rep = fz.search(fz.SearchConfig("problem5", 3, 1, 12345))
        assert rep.best_gap >= 1.0
        assert len(rep.violations) == 1
        assert rep.violations[0].gap >= 1.0 - 1e-9

    def test_empty(self):
        rep = fz.search(fz.SearchConfig("problem1", 2, 0, 0))
        assert rep.best_gap is None and rep.best_instance is None
        assert rep.violations == [] and sum(rep.trichotomy_counts.values()) == 0

    @pytest.mark.parametrize("mode", ["problem1", "problem2", "problem5"])
    def test_report_invariants(self, mode):
        cfg = fz.SearchConfig(mode, 3, 25, 7, hill_climb_steps=20)
        rep = fz.search(cfg)
        assert sum(rep.trichotomy_counts.values()) == 25
        assert rep.alpha_greater_violations == 0
        for cert in rep.violations:
            inst = cert.instance
            assert inst.feasible
            assert lapack_gap(inst.a, inst.x, inst.b) > cert.margin
            assert bi.verify_certificate(cert)

    def test_deterministic_and_worker_independent(self):
        cfg = fz.SearchConfig("problem1", 3, 12, 3, hill_climb_steps=10)
        r1, r2 = fz.search(cfg), fz.search(fz.SearchConfig(**{**cfg.__dict__, "workers": 3}))
        assert r1.best_gap == r2.best_gap
        assert r1.trichotomy_counts == r2.trichotomy_counts
        assert [c.gap for c in r1.violations] == [c.gap for c in r2.violations]
        np.testing.assert_array_equal(r1.best_instance.x, r2.best_instance.x)
