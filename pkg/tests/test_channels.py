import math

import numpy as np
import pytest

from triality import channels as ch
from triality.core import DensityMatrix, DimensionError, GellMannVector, gellmann_decompose
from triality.measures import entanglement2_residual, predictability2, visibility2

from conftest import PLUS, QUTRIT_PLUS

GRID = np.linspace(0, 1, 101)

BUILDERS = {
    "ad_qubit": (2, ch.amplitude_damping_qubit),
    "pd_qubit": (2, ch.phase_damping_qubit),
    "ad_qutrit_cascade": (3, lambda g: ch.cascade_ad_qutrit(g, g)),
    "ad_qutrit_paper": (3, lambda g: ch.paper_kraus_ad_qutrit(g, g)),
    "pd_qutrit": (3, ch.phase_damping_qutrit),
}


def kraus_by_hand(ops, m):
    out = np.zeros_like(m, dtype=complex)
    for e in ops:
        out += np.asarray(e) @ m @ np.asarray(e).conj().T
    return out


def numeric_triple(channel, rho):
    out = ch.apply(channel, rho)
    return visibility2(out), predictability2(out), entanglement2_residual(out)


class TestApply:
    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_zero_gamma_is_identity(self, name, random_states):
        dim, build = BUILDERS[name]
        for rho in random_states(dim, 20):
            np.testing.assert_allclose(ch.apply(build(0.0), rho).matrix, rho.matrix, atol=1e-15)

    def test_full_decay(self):
        out = ch.apply(ch.amplitude_damping_qubit(1.0), DensityMatrix(PLUS))
        np.testing.assert_allclose(out.matrix, np.diag([1.0, 0.0]), atol=1e-16)

    def test_half_decay(self):
        out = ch.apply(ch.amplitude_damping_qubit(0.5), DensityMatrix(PLUS))
        c = 0.5 * math.sqrt(0.5)
        np.testing.assert_allclose(out.matrix, [[0.75, c], [c, 0.25]], atol=1e-15)

    def test_rejects_non_cptp(self):
        broken = ch.KrausChannel((0.9 * np.eye(2),), "broken")
        with pytest.raises(ch.NotCPTPError):
            ch.apply(broken, DensityMatrix(PLUS))

    def test_rejects_dim_mismatch(self):
        with pytest.raises(DimensionError):
            ch.apply(ch.phase_damping_qutrit(0.2), DensityMatrix(PLUS))

    def test_output_is_valid_state(self, random_states):
        # DensityMatrix construction validates; boundary gammas included
        for name, (dim, build) in BUILDERS.items():
            for rho in random_states(dim, 10):
                for g in (0.0, 0.3, 1.0):
                    ch.apply(build(g), rho)

    def test_array_path_matches(self, random_states):
        states = random_states(3, 10)
        stack = np.stack([r.matrix for r in states])
        chan = ch.cascade_ad_qutrit(0.3, 0.6)
        batched = ch.apply_array(chan, stack)
        for r, b in zip(states, batched):
            np.testing.assert_allclose(b, kraus_by_hand(chan.operators, r.matrix), atol=1e-15)


class TestCompleteness:
    def test_qubit_ad_exact(self, rng):
        for g in rng.uniform(0, 1, 50):
            assert ch.validate_cptp(ch.amplitude_damping_qubit(g)) <= 1e-15

    def test_qutrit_pd(self, rng):
        for g in rng.uniform(0, 1, 50):
            assert ch.validate_cptp(ch.phase_damping_qutrit(g)) <= 1e-12

    def test_broken(self):
        assert ch.validate_cptp(ch.KrausChannel((0.9 * np.eye(3),), "broken")) == pytest.approx(0.19, abs=1e-15)

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_grid(self, name):
        _, build = BUILDERS[name]
        assert max(ch.validate_cptp(build(g)) for g in GRID) <= 1e-12

    def test_paper_kraus_random(self, rng):
        for g1, g2 in rng.uniform(0, 1, (50, 2)):
            assert ch.validate_cptp(ch.paper_kraus_ad_qutrit(g1, g2)) <= 1e-15


class TestBuilders:
    def test_ad_qubit_operators(self):
        e0, e1 = ch.amplitude_damping_qubit(0.0).operators
        np.testing.assert_array_equal(e0, np.eye(2))
        np.testing.assert_array_equal(e1, np.zeros((2, 2)))
        e0, e1 = ch.amplitude_damping_qubit(1.0).operators
        np.testing.assert_array_equal(e0, np.diag([1.0, 0.0]))
        np.testing.assert_array_equal(e1, [[0, 1], [0, 0]])
        e0, _ = ch.amplitude_damping_qubit(0.36).operators
        np.testing.assert_allclose(e0, np.diag([1.0, 0.8]), atol=1e-15)

    @pytest.mark.parametrize(
        "build",
        [ch.amplitude_damping_qubit, ch.phase_damping_qubit, ch.phase_damping_qutrit,
         lambda g: ch.qutrit_decay_step("upper", g)],
    )
    @pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
    def test_out_of_range(self, build, bad):
        with pytest.raises(ValueError):
            build(bad)

    def test_cascade_out_of_range(self):
        with pytest.raises(ValueError):
            ch.cascade_ad_qutrit(0.5, 1.01)
        with pytest.raises(ValueError):
            ch.paper_kraus_ad_qutrit(-0.01, 0.5)

    def test_decay_steps(self):
        top = DensityMatrix(np.diag([0.0, 0.0, 1.0]))
        mid = DensityMatrix(np.diag([0.0, 1.0, 0.0]))
        np.testing.assert_allclose(ch.apply(ch.qutrit_decay_step("upper", 1.0), top).matrix, np.diag([0, 1, 0]))
        np.testing.assert_allclose(ch.apply(ch.qutrit_decay_step("lower", 1.0), mid).matrix, np.diag([1, 0, 0]))
        np.testing.assert_allclose(
            ch.apply(ch.qutrit_decay_step("upper", 0.5), top).matrix, np.diag([0, 0.5, 0.5]), atol=1e-15
        )
        with pytest.raises(ValueError):
            ch.qutrit_decay_step("middle", 0.5)

    def test_cascade_populations(self):
        out = ch.apply(ch.cascade_ad_qutrit(0.5, 0.5), DensityMatrix(np.diag([0.0, 0.0, 1.0])))
        np.testing.assert_allclose(np.diag(out.matrix).real, [0.25, 0.25, 0.5], atol=1e-15)

    def test_cascade_on_maximally_coherent(self):
        out = ch.apply(ch.cascade_ad_qutrit(0.5, 0.5), DensityMatrix(QUTRIT_PLUS)).matrix
        np.testing.assert_allclose(np.diag(out).real, [1.75 / 3, 0.25, 0.5 / 3], atol=1e-15)
        # appendix diagonal: (1 + g + g^2)/3, (1 - g^2)/3, (1 - g)/3
        g = 0.5
        np.testing.assert_allclose(
            np.diag(out).real, [(1 + g + g * g) / 3, (1 - g * g) / 3, (1 - g) / 3], atol=1e-15
        )
        assert out[0, 1].real == pytest.approx(math.sqrt(0.5) / 3, abs=1e-15)
        assert out[0, 2].real == pytest.approx(math.sqrt(0.5) / 3, abs=1e-15)
        assert out[1, 2].real == pytest.approx(0.5 / 3, abs=1e-15)

    def test_cascade_matches_printed_rules(self, random_states, rng):
        for rho in random_states(3, 100):
            g1, g2 = rng.uniform(0, 1, 2)
            out = ch.apply(ch.cascade_ad_qutrit(g1, g2), rho).matrix
            np.testing.assert_allclose(out, ch.printed_update(rho, g1, g2), atol=1e-15)

    def test_paper_kraus(self):
        np.testing.assert_allclose(
            ch.apply(ch.paper_kraus_ad_qutrit(0, 0), DensityMatrix(QUTRIT_PLUS)).matrix, QUTRIT_PLUS, atol=1e-15
        )
        out = ch.apply(ch.paper_kraus_ad_qutrit(0.5, 0.5), DensityMatrix(np.diag([0.0, 0.0, 1.0])))
        np.testing.assert_allclose(out.matrix, np.diag([0.0, 0.5, 0.5]), atol=1e-15)

    def test_paper_kraus_middle_population(self, random_states, rng):
        # the three-operator set moves g2*rho22 into level 1 without a (1-g1) factor
        for rho in random_states(3, 50):
            g1, g2 = rng.uniform(0, 1, 2)
            out = ch.apply(ch.paper_kraus_ad_qutrit(g1, g2), rho).matrix
            m = rho.matrix.real
            assert out[1, 1].real == pytest.approx((1 - g1) * m[1, 1] + g2 * m[2, 2], abs=1e-15)

    def test_pd_qubit(self):
        np.testing.assert_allclose(
            ch.apply(ch.phase_damping_qubit(1.0), DensityMatrix(PLUS)).matrix, np.eye(2) / 2, atol=1e-16
        )
        out = ch.apply(ch.phase_damping_qubit(0.36), DensityMatrix(PLUS))
        assert out[0, 1].real == pytest.approx(0.4, abs=1e-15)

    def test_pd_qutrit_uniform_factor(self, random_states, rng):
        # 1 + 2r + (1 - r)(w + w^2) = 3r since w + w^2 = -1
        w = ch.OMEGA
        r = 0.37
        assert abs((1 + 2 * r + (1 - r) * (w + w * w)) - 3 * r) < 1e-15
        for rho in random_states(3, 50):
            g = float(rng.uniform(0, 1))
            out = ch.apply(ch.phase_damping_qutrit(g), rho).matrix
            expected = rho.matrix * math.sqrt(1 - g)
            np.fill_diagonal(expected, np.diag(rho.matrix))
            np.testing.assert_allclose(out, expected, rtol=0, atol=1e-13)

    def test_pd_qutrit_on_maximally_coherent(self):
        out = ch.apply(ch.phase_damping_qutrit(0.75), DensityMatrix(QUTRIT_PLUS)).matrix
        expected = np.full((3, 3), 0.5 / 3)
        np.fill_diagonal(expected, 1 / 3)
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_dephasing_keeps_diagonals(self, random_states):
        for g in GRID[::10]:
            for rho in random_states(2, 10):
                out = ch.apply(ch.phase_damping_qubit(g), rho).matrix
                assert np.max(np.abs(np.diag(out) - np.diag(rho.matrix))) <= 1e-14
            for rho in random_states(3, 10):
                out = ch.apply(ch.phase_damping_qutrit(g), rho).matrix
                assert np.max(np.abs(np.diag(out) - np.diag(rho.matrix))) <= 1e-14


class TestCompose:
    def test_identity_first(self, random_states):
        c = ch.cascade_ad_qutrit(0.2, 0.7)
        both = ch.compose(ch.identity_channel(3), c)
        for rho in random_states(3, 20):
            np.testing.assert_allclose(ch.apply(both, rho).matrix, ch.apply(c, rho).matrix, atol=1e-13)

    def test_steps_equal_cascade(self, random_states, rng):
        for rho in random_states(3, 50):
            g1, g2 = rng.uniform(0, 1, 2)
            chain = ch.compose(ch.qutrit_decay_step("upper", g2), ch.qutrit_decay_step("lower", g1))
            np.testing.assert_allclose(
                ch.apply(chain, rho).matrix, ch.apply(ch.cascade_ad_qutrit(g1, g2), rho).matrix, atol=1e-13
            )
        assert len(ch.cascade_ad_qutrit(0.1, 0.2).operators) == 4

    def test_order_matters(self):
        # lower first then upper leaves level-2 population in level 1
        top = DensityMatrix(np.diag([0.0, 0.0, 1.0]))
        wrong_order = ch.compose(ch.qutrit_decay_step("lower", 1.0), ch.qutrit_decay_step("upper", 1.0))
        np.testing.assert_allclose(ch.apply(wrong_order, top).matrix, np.diag([0, 1, 0]), atol=1e-15)
        cascade = ch.cascade_ad_qutrit(1.0, 1.0)
        np.testing.assert_allclose(ch.apply(cascade, top).matrix, np.diag([1, 0, 0]), atol=1e-15)

    def test_dephasing_multiplies(self):
        both = ch.compose(ch.phase_damping_qubit(0.3), ch.phase_damping_qubit(0.6))
        out = ch.apply(both, DensityMatrix(PLUS))
        assert out[0, 1].real == pytest.approx(0.5 * math.sqrt(0.7 * 0.4), abs=1e-15)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionError):
            ch.compose(ch.phase_damping_qubit(0.1), ch.phase_damping_qutrit(0.1))


class TestClosedForms:
    def test_ad_qubit_examples(self):
        plus = DensityMatrix(PLUS)
        assert ch.predict_ad_qubit(plus, 0.0).as_tuple() == pytest.approx((1, 0, 0), abs=1e-15)
        assert ch.predict_ad_qubit(plus, 0.5).as_tuple() == pytest.approx((0.5, 0.25, 0.25), abs=1e-15)
        t = ch.predict_ad_qubit(DensityMatrix(np.diag([0.25, 0.75])), 0.5)
        assert t.as_tuple() == pytest.approx((0.0, 0.0625, 0.9375), abs=1e-15)
        assert t.total == pytest.approx(1.0, abs=1e-15)

    def test_ad_qubit_example_numeric(self):
        rho = DensityMatrix(np.diag([0.25, 0.75]))
        assert numeric_triple(ch.amplitude_damping_qubit(0.5), rho) == pytest.approx((0.0, 0.0625, 0.9375), abs=1e-15)

    def test_pd_qubit_examples(self, random_states):
        plus = DensityMatrix(PLUS)
        assert ch.predict_pd_qubit(plus, 0.36).as_tuple() == pytest.approx((0.64, 0, 0.36), abs=1e-15)
        for rho in random_states(2, 20):
            t = ch.predict_pd_qubit(rho, 1.0)
            assert t.v2 == pytest.approx(0.0, abs=1e-15)
            assert t.p2 == pytest.approx(predictability2(rho), abs=1e-15)
            assert t.e2 == pytest.approx(1 - predictability2(rho), abs=1e-14)
            t0 = ch.predict_pd_qubit(rho, 0.0)
            assert t0.as_tuple() == pytest.approx(
                (visibility2(rho), predictability2(rho), entanglement2_residual(rho)), abs=1e-14
            )

    def test_pd_qutrit_examples(self):
        t = ch.predict_pd_qutrit(DensityMatrix(QUTRIT_PLUS), 0.36)
        assert t.as_tuple() == pytest.approx((0.64, 0, 0.36), abs=1e-15)

    @pytest.mark.parametrize(
        "name, dim, predict",
        [
            ("ad_qubit", 2, ch.predict_ad_qubit),
            ("pd_qubit", 2, ch.predict_pd_qubit),
            ("pd_qutrit", 3, ch.predict_pd_qutrit),
        ],
    )
    def test_match_numeric(self, name, dim, predict, random_states):
        _, build = BUILDERS[name]
        for rho in random_states(dim, 100):
            for g in np.linspace(0, 1, 11):
                t = predict(rho, g)
                assert t.as_tuple() == pytest.approx(numeric_triple(build(g), rho), abs=1e-12)
                assert t.total == pytest.approx(1.0, abs=1e-12)

    def test_monotone_visibility(self):
        plus = DensityMatrix(PLUS)
        for build in (ch.amplitude_damping_qubit, ch.phase_damping_qubit):
            v = [visibility2(ch.apply(build(g), plus)) for g in GRID[1:-1]]
            assert np.all(np.diff(v) < 0)


class TestGellMannTransform:
    def test_identity_at_zero(self, random_states):
        for rho in random_states(3, 10):
            s = gellmann_decompose(rho)
            np.testing.assert_allclose(ch.gellmann_transform_ad(s, 0, 0).s, s.s, atol=1e-16)

    def test_maximally_mixed(self):
        out = ch.gellmann_transform_ad(GellMannVector(np.zeros(8)), 0.0, 0.5)
        assert out[7] == pytest.approx(0.25)

    def test_s8_rule_is_exact(self, random_states, rng):
        # the printed s8' update agrees with the matrix level; s3' does not
        for rho in random_states(3, 50):
            g1, g2 = rng.uniform(0, 1, 2)
            oracle = gellmann_decompose(ch.apply(ch.cascade_ad_qutrit(g1, g2), rho))
            printed = ch.gellmann_transform_ad(gellmann_decompose(rho), g1, g2)
            assert printed[7] == pytest.approx(oracle[7], abs=1e-13)
            np.testing.assert_allclose(printed.s[[0, 1, 3, 4, 5, 6]], oracle.s[[0, 1, 3, 4, 5, 6]], atol=1e-13)

    def test_s3_omits_terms(self):
        mixed = DensityMatrix(np.eye(3) / 3)
        for g1 in (0.1, 0.5, 0.9):
            printed = ch.gellmann_transform_ad(gellmann_decompose(mixed), g1, 0.5)
            oracle = gellmann_decompose(ch.apply(ch.cascade_ad_qutrit(g1, 0.5), mixed))
            assert printed[2] == 0.0
            # sqrt(3)/2 * (2 g1 + g2 (2 g1 - 1)) / 3, worked out by hand
            assert oracle[2] == pytest.approx(math.sqrt(3) / 2 * (2 * g1 + 0.5 * (2 * g1 - 1)) / 3, abs=1e-15)
            assert abs(oracle[2]) > 1e-3


class TestDiscrepancy:
    def test_all_agree_at_zero(self, random_states):
        for rho in random_states(3, 5) + [DensityMatrix(QUTRIT_PLUS)]:
            rep = ch.compare_paper_vs_oracle(rho, 0.0, 0.0)
            assert rep.disagreements() == []
            assert rep.max_abs_deviation <= 1e-10

    def test_basis_state(self):
        rep = ch.compare_paper_vs_oracle(DensityMatrix(np.diag([0.0, 0.0, 1.0])), 0.5, 0.5)
        for i, (lit, ora) in enumerate(zip((0, 0.5, 0.5), (0.25, 0.25, 0.5))):
            c = rep.get(f"rho'_{i}{i} [literal-kraus]")
            assert c.paper_value == pytest.approx(lit, abs=1e-15)
            assert c.oracle_value == pytest.approx(ora, abs=1e-15)
            assert rep.get(f"rho'_{i}{i} [printed-update]").verdict == "agree"
        assert rep.get("rho'_00 [literal-kraus]").verdict == "disagree"
        assert rep.get("rho'_11 [literal-kraus]").verdict == "disagree"
        assert rep.get("rho'_22 [literal-kraus]").verdict == "agree"

    def test_maximally_coherent(self):
        rep = ch.compare_paper_vs_oracle(DensityMatrix(QUTRIT_PLUS), 0.5, 0.5)
        v = rep.get("V'^2 [appendix (1-g)^2]")
        assert v.paper_value == pytest.approx(0.25)
        assert v.oracle_value == pytest.approx(1.25 / 3, abs=1e-15)
        assert v.verdict == "disagree"
        # [2(1-g) + (1-g)^2] / 3
        assert v.oracle_value == pytest.approx((2 * 0.5 + 0.25) / 3, abs=1e-15)

    def test_gamma1_zero_populations_agree(self, random_states):
        for rho in random_states(3, 10):
            rep = ch.compare_paper_vs_oracle(rho, 0.0, 0.3)
            for i in range(3):
                assert rep.get(f"rho'_{i}{i} [literal-kraus]").verdict == "agree"
            assert any(c.quantity.startswith("s'_") for c in rep.comparisons)

    def test_verdict_threshold(self):
        assert ch.Comparison("x", 0.0, 1e-10).verdict == "agree"
        assert ch.Comparison("x", 0.0, 1.1e-10).verdict == "disagree"

    def test_to_dict(self):
        d = ch.compare_paper_vs_oracle(DensityMatrix(QUTRIT_PLUS), 0.5, 0.5).to_dict()
        assert d["channel_label"] == "ad_qutrit_cascade"
        assert {c["verdict"] for c in d["comparisons"]} == {"agree", "disagree"}
