"""Tests for povm_discriminator.discrimination module."""

import math

import numpy as np
import pytest

from povm_discriminator.circuit import (
    NUM_PARAMS,
    DiscriminatorCircuit,
    build_discriminator_circuit,
    input_isometry,
    outcome_probabilities,
)
from povm_discriminator.discrimination import (
    aggregate_metrics,
    build_family_samples,
    classify_outcome,
    draw_samples,
    evenly_spaced,
    family_outcome_table,
    helstrom_error_bound,
    mean_pairwise_fidelity,
    metrics_curve,
    metrics_from_partitions,
    per_input_metrics,
    psi1,
    psi23,
    sample_input,
    unambiguous_success_bound,
)
from povm_discriminator.errors import (
    ArityError,
    AssignmentError,
    DomainError,
    NormalizationError,
)
from povm_discriminator.model.ensemble import (
    Family,
    FamilySamples,
    Fixed,
    Label,
    LabeledInput,
    Mixture,
    OutcomeAssignment,
    StateFamilySpec,
    TruncatedNormal,
    Uniform,
)
from povm_discriminator.model.gates import SingleQubitGate
from povm_discriminator.simulator import fidelity

B = 1 / math.sqrt(2)
X = np.array([[0, 1], [1, 0]])


def _random_circuit(seed: int) -> DiscriminatorCircuit:
    rng = np.random.default_rng(seed)
    return build_discriminator_circuit(rng.uniform(0.0, 2.0 * math.pi, size=NUM_PARAMS))


def _always_inconclusive() -> DiscriminatorCircuit:
    """Flips both ancillas: every input yields m11."""
    return DiscriminatorCircuit(gates=(SingleQubitGate(X, 0), SingleQubitGate(X, 1)))


def _member(family: Family, prior: float, samples: tuple[float, ...]) -> FamilySamples:
    return FamilySamples(StateFamilySpec(family, prior, Uniform()), samples)


class TestStateFamilies:
    """Tests for psi1 and psi23."""

    def test_psi1_endpoints(self):
        assert np.allclose(psi1(0.0).amplitudes, [1, 0, 0, 0])
        assert np.allclose(psi1(1.0).amplitudes, [0, 0, 1, 0])

    def test_psi1_quarter(self):
        assert np.allclose(psi1(0.25).amplitudes, [0.96825, 0, 0.25, 0], atol=1e-5)

    def test_psi23_branches(self):
        assert np.allclose(psi23(1, B).amplitudes, [0, 0.70711, 0.70711, 0], atol=1e-5)
        assert np.allclose(psi23(-1, B).amplitudes, [0, -0.70711, 0.70711, 0], atol=1e-5)

    def test_psi23_degenerate(self):
        assert np.allclose(psi23(-1, 1.0).amplitudes, [0, 0, 1, 0])

    def test_out_of_domain(self):
        with pytest.raises(DomainError):
            psi1(1.5)
        with pytest.raises(DomainError):
            psi23(1, -0.1)

    def test_bad_sign(self):
        with pytest.raises(DomainError):
            psi23(0, 0.5)

    @pytest.mark.parametrize("a", [0.0, 0.1, 0.25, 0.5, 0.9, 1.0])
    def test_fidelity_is_a_over_root_two(self, a):
        assert np.linalg.norm(psi1(a).amplitudes) == pytest.approx(1.0, abs=1e-12)
        for sign in (1, -1):
            assert fidelity(psi1(a), psi23(sign, B)) == pytest.approx(a / math.sqrt(2), abs=1e-12)

    def test_fidelity_example(self):
        assert fidelity(psi1(0.5), psi23(1, B)) == pytest.approx(0.35355, abs=1e-5)


class TestMeanPairwiseFidelity:
    """Tests for mean_pairwise_fidelity."""

    def test_single_pair(self):
        assert mean_pairwise_fidelity((0.5,), (B,)) == pytest.approx(0.5 / math.sqrt(2))

    def test_matches_pairwise_overlaps(self):
        a_values, b_values = (0.1, 0.4, 0.9), (0.3, 0.8)
        overlaps = [fidelity(psi1(a), psi23(1, b)) for a in a_values for b in b_values]
        assert mean_pairwise_fidelity(a_values, b_values) == pytest.approx(np.mean(overlaps))

    def test_empty(self):
        with pytest.raises(ArityError):
            mean_pairwise_fidelity((), (0.5,))


class TestDrawSamples:
    """Tests for draw_samples and evenly_spaced."""

    def test_fixed(self):
        assert draw_samples(Fixed(0.3), 4, np.random.default_rng(0)) == (0.3,) * 4

    def test_uniform_bounds(self):
        values = draw_samples(Uniform(0.9, 1.0), 500, np.random.default_rng(1))
        assert all(0.9 <= v <= 1.0 for v in values)

    def test_truncated_normal_statistics(self):
        values = np.array(draw_samples(TruncatedNormal(0.25, 0.01), 10_000, np.random.default_rng(2)))
        assert abs(values.mean() - 0.25) < 0.005
        assert values.min() >= 0.0 and values.max() <= 1.0

    def test_truncated_normal_near_edge(self):
        values = draw_samples(TruncatedNormal(0.99, 0.05), 1000, np.random.default_rng(3))
        assert len(values) == 1000
        assert max(values) <= 1.0

    def test_truncated_normal_without_mass(self):
        with pytest.raises(DomainError):
            draw_samples(TruncatedNormal(50.0, 0.01), 10, np.random.default_rng(4))

    def test_mixture(self):
        mixture = Mixture(((1.0, Fixed(0.2)), (3.0, Fixed(0.8))))
        values = np.array(draw_samples(mixture, 4000, np.random.default_rng(5)))
        assert set(values.tolist()) <= {0.2, 0.8}
        assert abs(np.mean(values == 0.8) - 0.75) < 0.03

    def test_zero_draws(self):
        assert draw_samples(TruncatedNormal(0.25, 0.05), 0, np.random.default_rng(0)) == ()
        assert draw_samples(Uniform(), 0, np.random.default_rng(0)) == ()

    def test_mixture_single_draw(self):
        # One slot leaves the other component with nothing to draw.
        mixture = Mixture(((0.5, TruncatedNormal(0.25, 0.05)), (0.5, Uniform())))
        for seed in range(20):
            values = draw_samples(mixture, 1, np.random.default_rng(seed))
            assert len(values) == 1 and 0.0 <= values[0] <= 1.0

    def test_deterministic_with_seed(self):
        law = TruncatedNormal(0.5, 0.2)
        first = draw_samples(law, 50, np.random.default_rng(6))
        assert first == draw_samples(law, 50, np.random.default_rng(6))

    def test_evenly_spaced(self):
        assert evenly_spaced(0.0, 1.0, 5) == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_evenly_spaced_needs_points(self):
        with pytest.raises(ArityError):
            evenly_spaced(0.0, 1.0, 0)

    def test_build_family_samples(self):
        spec = StateFamilySpec(Family.PSI1, 1 / 3, Uniform())
        member = build_family_samples(spec, 7, np.random.default_rng(7))
        assert member.spec is spec
        assert len(member.samples) == 7


class TestSampleInput:
    """Tests for sample_input."""

    def test_fixed_psi1(self):
        spec = StateFamilySpec(Family.PSI1, 1 / 3, Fixed(0.25))
        labeled = sample_input(spec, np.random.default_rng(0))
        assert labeled.true_label is Label.CLASS1
        assert labeled.param == 0.25
        assert np.allclose(labeled.state.amplitudes, psi1(0.25).amplitudes)

    def test_psi23_sign_balance(self):
        spec = StateFamilySpec(Family.PSI23, 2 / 3, Fixed(B))
        rng = np.random.default_rng(1)
        signs = [sample_input(spec, rng).branch_sign for _ in range(10_000)]
        assert 0.47 <= signs.count(1) / len(signs) <= 0.53

    def test_psi23_state_matches_sign(self):
        spec = StateFamilySpec(Family.PSI23, 2 / 3, Fixed(B))
        labeled = sample_input(spec, np.random.default_rng(2))
        assert labeled.true_label is Label.CLASS2
        assert np.allclose(labeled.state.amplitudes, psi23(labeled.branch_sign, B).amplitudes)

    def test_mixture_distribution(self):
        mixture = Mixture(((0.5, TruncatedNormal(0.25, 0.05)), (0.5, Uniform())))
        spec = StateFamilySpec(Family.PSI1, 1 / 3, mixture)
        for seed in range(20):
            labeled = sample_input(spec, np.random.default_rng(seed))
            assert labeled.true_label is Label.CLASS1
            assert 0.0 <= labeled.param <= 1.0


class TestClassifyOutcome:
    """Tests for classify_outcome and OutcomeAssignment."""

    def test_default_assignment(self):
        assignment = OutcomeAssignment()
        assert classify_outcome("m00", assignment) is Label.CLASS1
        assert classify_outcome("m10", assignment) is Label.CLASS1
        assert classify_outcome("m01", assignment) is Label.CLASS2
        assert classify_outcome("m11", assignment) is Label.INCONCLUSIVE

    def test_unknown_outcome(self):
        with pytest.raises(AssignmentError):
            classify_outcome("m22", OutcomeAssignment())

    def test_incomplete_assignment(self):
        with pytest.raises(AssignmentError):
            OutcomeAssignment({"m00": Label.CLASS1, "m01": Label.CLASS2})

    def test_assignment_without_class2(self):
        with pytest.raises(AssignmentError):
            OutcomeAssignment({m: Label.CLASS1 for m in ("m00", "m10", "m01", "m11")})

    def test_inconclusive_may_be_empty(self):
        assignment = OutcomeAssignment(
            {"m00": "class1", "m10": "class1", "m01": "class2", "m11": "class2"}
        )
        assert Label.INCONCLUSIVE not in assignment.mapping.values()


class TestPerInputMetrics:
    """Tests for per_input_metrics."""

    def test_partition(self):
        circuit = _random_circuit(1)
        for labeled in (
            LabeledInput(psi1(0.3), Label.CLASS1, 0.3),
            LabeledInput(psi23(-1, B), Label.CLASS2, B, -1, Family.PSI23),
        ):
            m = per_input_metrics(circuit, labeled, OutcomeAssignment())
            assert m.p_suc + m.p_err + m.p_inc == pytest.approx(1.0, abs=1e-10)

    def test_always_inconclusive(self):
        labeled = LabeledInput(psi1(0.5), Label.CLASS1, 0.5)
        m = per_input_metrics(_always_inconclusive(), labeled, OutcomeAssignment())
        assert (m.p_suc, m.p_err, m.p_inc) == pytest.approx((0.0, 0.0, 1.0))

    def test_matches_enumeration(self):
        circuit = _random_circuit(2)
        assignment = OutcomeAssignment()
        probs = outcome_probabilities(circuit, psi1(0.25)).as_dict()
        expected = {label: 0.0 for label in Label}
        for outcome, p in probs.items():
            expected[assignment.mapping[outcome]] += p
        m = per_input_metrics(circuit, LabeledInput(psi1(0.25), Label.CLASS1, 0.25), assignment)
        assert m.p_suc == pytest.approx(expected[Label.CLASS1], abs=1e-10)
        assert m.p_err == pytest.approx(expected[Label.CLASS2], abs=1e-10)
        assert m.p_inc == pytest.approx(expected[Label.INCONCLUSIVE], abs=1e-10)


class TestAggregateMetrics:
    """Tests for aggregate_metrics and metrics_from_partitions."""

    def test_single_family_single_sample(self):
        circuit = _random_circuit(3)
        ensemble = [_member(Family.PSI1, 1.0, (0.4,))]
        aggregate = aggregate_metrics(circuit, ensemble, OutcomeAssignment())
        single = per_input_metrics(circuit, LabeledInput(psi1(0.4), Label.CLASS1, 0.4), OutcomeAssignment())
        assert aggregate.p_suc == pytest.approx(single.p_suc, abs=1e-12)
        assert aggregate.p_err == pytest.approx(single.p_err, abs=1e-12)

    def test_psi23_averages_both_branches(self):
        circuit = _random_circuit(4)
        assignment = OutcomeAssignment()
        aggregate = aggregate_metrics(circuit, [_member(Family.PSI23, 1.0, (0.6,))], assignment)
        branches = [
            per_input_metrics(circuit, LabeledInput(psi23(s, 0.6), Label.CLASS2, 0.6, s, Family.PSI23), assignment)
            for s in (1, -1)
        ]
        assert aggregate.p_suc == pytest.approx(np.mean([m.p_suc for m in branches]), abs=1e-12)
        assert aggregate.p_inc == pytest.approx(np.mean([m.p_inc for m in branches]), abs=1e-12)

    def test_partition_sums_to_one(self):
        ensemble = [
            _member(Family.PSI1, 1 / 3, (0.1, 0.5, 0.95)),
            _member(Family.PSI23, 2 / 3, (B, 0.2)),
        ]
        m = aggregate_metrics(_random_circuit(5), ensemble, OutcomeAssignment())
        assert m.p_suc + m.p_err + m.p_inc == pytest.approx(1.0, abs=1e-9)

    def test_prior_weighting(self):
        ensemble = [_member(Family.PSI1, 1 / 3, (0.3,)), _member(Family.PSI23, 2 / 3, (B,))]
        partitions = [np.array([[0.9, 0.1, 0.0]]), np.array([[0.6, 0.1, 0.3]])]
        m = metrics_from_partitions(ensemble, partitions)
        assert m.p_suc == pytest.approx(0.7)

    def test_priors_must_sum_to_one(self):
        ensemble = [_member(Family.PSI1, 0.5, (0.3,)), _member(Family.PSI23, 0.2, (B,))]
        with pytest.raises(NormalizationError):
            aggregate_metrics(_random_circuit(6), ensemble, OutcomeAssignment())

    def test_empty_ensemble(self):
        with pytest.raises(ArityError):
            aggregate_metrics(_random_circuit(7), [], OutcomeAssignment())

    def test_family_outcome_table(self):
        circuit = _random_circuit(8)
        member = _member(Family.PSI1, 1.0, (0.2, 0.7))
        table = family_outcome_table(circuit, member)
        assert table.shape == (2, 4)
        assert np.allclose(table[1], outcome_probabilities(circuit, psi1(0.7)).probs, atol=1e-12)


class TestOptimumReferences:
    """Tests for unambiguous_success_bound and helstrom_error_bound."""

    PRIORS = (1 / 3, 2 / 3)

    @pytest.mark.parametrize("a0, expected", [(0.25, 5 / 6), (0.5, 2 / 3)])
    def test_unambiguous_at_a0(self, a0, expected):
        assert unambiguous_success_bound(self.PRIORS, a0, B) == pytest.approx(expected)
        assert 1 - expected == pytest.approx(2 * math.sqrt(2 / 9) * a0 * B)

    def test_unambiguous_orthogonal_and_identical(self):
        assert unambiguous_success_bound(self.PRIORS, 0.0, B) == pytest.approx(1.0)
        assert unambiguous_success_bound((0.5, 0.5), 1.0, 1.0) == pytest.approx(0.0)
        assert unambiguous_success_bound(self.PRIORS, 0.7, 0.0) == 1.0

    def test_unambiguous_lopsided_priors(self):
        # psi1 is so rare that it is never identified.
        assert unambiguous_success_bound((0.01, 0.99), 0.5, 1.0) == pytest.approx(1 - (0.01 + 0.99 * 0.25))

    @pytest.mark.parametrize("a", [0.25, 0.5, 0.9])
    def test_helstrom_closed_form(self, a):
        root = math.sqrt((2 / 3) ** 2 - 4 / 9 * a**2)
        assert helstrom_error_bound(self.PRIORS, (a,), B) == pytest.approx((2 / 3 - root) / 2)

    def test_helstrom_pure_states(self):
        # b = 1 makes both psi23 branches |10>.
        expected = 0.5 * (1 - math.sqrt(1 - 4 * (2 / 9) * 0.6**2))
        assert helstrom_error_bound(self.PRIORS, (0.6,), 1.0) == pytest.approx(expected)

    def test_helstrom_mixture_of_a(self):
        bound = helstrom_error_bound(self.PRIORS, (0.1, 0.9), B)
        assert 0.0 <= bound <= 0.5

    @pytest.mark.parametrize("seed", range(5))
    def test_no_circuit_beats_helstrom(self, seed):
        circuit = _random_circuit(seed)
        ensemble = [_member(Family.PSI1, 1 / 3, (0.4,)), _member(Family.PSI23, 2 / 3, (B,))]
        m = aggregate_metrics(circuit, ensemble, OutcomeAssignment())
        assert m.p_suc <= 1 - helstrom_error_bound(self.PRIORS, (0.4,), B) + 1e-9

    def test_helstrom_needs_values(self):
        with pytest.raises(ArityError):
            helstrom_error_bound(self.PRIORS, (), B)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            unambiguous_success_bound(self.PRIORS, 1.5, B)


class TestMetricsCurve:
    """Tests for metrics_curve."""

    def test_matches_aggregate_metrics(self):
        circuit = _random_circuit(9)
        a_values = np.array([0.0, 0.3, 1.0])
        curve = metrics_curve(input_isometry(circuit), a_values, B, (1 / 3, 2 / 3), OutcomeAssignment())
        assert curve.shape == (3, 3)
        for a, row in zip(a_values, curve):
            ensemble = [_member(Family.PSI1, 1 / 3, (a,)), _member(Family.PSI23, 2 / 3, (B,))]
            m = aggregate_metrics(circuit, ensemble, OutcomeAssignment())
            assert row == pytest.approx([m.p_suc, m.p_err, m.p_inc], abs=1e-12)
