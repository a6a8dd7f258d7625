import numpy as np
import pytest
from conftest import random_spd

from labelalign.alignment import (
    AlignmentTransform,
    align,
    ea_align,
    ea_reference,
    la_align,
    la_fit,
    match_labels,
    relabel,
    select_and_estimate_target_means,
    ClassMeans,
    EA_DOMAIN_KEY,
    LabelMapping,
)
from labelalign.errors import (
    CardinalityMismatchError,
    MissingClassError,
    UnknownLabelError,
)
from labelalign.features import trial_covariance
from labelalign.signal import Trial
from labelalign.spd import (
    arithmetic_mean_cov,
    log_euclidean_mean,
    riemannian_distance,
    spd_sqrt,
)
from labelalign.synth import SynthConfig, generate_synthetic


def trials_with_covariance(rng, cov, count, samples=64, label=None):
    """Distinct trials sharing the exact Gram matrix ``cov``."""
    half = spd_sqrt(cov)
    out = []
    for _ in range(count):
        q, _ = np.linalg.qr(rng.standard_normal((samples, cov.shape[0])))
        out.append(Trial(half @ q.T, label=label))
    return out


class TestMatchLabels:
    def test_partial_overlap_keeps_common_labels(self):
        for seed in range(10):
            mapping = match_labels({1, 2, 3}, {1, 4, 5}, seed=seed)
            assert mapping.as_dict()[1] == 1
            assert sorted(mapping.as_dict()[s] for s in (2, 3)) == [4, 5]

    def test_identical_sets_identity_for_any_seed(self):
        for seed in range(10):
            mapping = match_labels({2, 5, 9}, {2, 5, 9}, seed=seed)
            assert mapping.as_dict() == {2: 2, 5: 5, 9: 9}

    def test_disjoint_sets_deterministic_bijection(self):
        seen = set()
        for seed in range(20):
            mapping = match_labels({1, 2}, {3, 4}, seed=seed)
            again = match_labels({1, 2}, {3, 4}, seed=seed)
            assert mapping == again
            assert mapping.as_dict() in ({1: 3, 2: 4}, {1: 4, 2: 3})
            seen.add(tuple(sorted(mapping.as_dict().items())))
        assert len(seen) == 2  # both bijections reachable across seeds

    def test_cardinality_mismatch(self):
        with pytest.raises(CardinalityMismatchError):
            match_labels({1, 2}, {3}, seed=0)

    def test_mapping_must_be_bijection(self):
        with pytest.raises(CardinalityMismatchError):
            LabelMapping(((1, 3), (2, 3)))


class TestEuclideanAlignment:
    def test_identity_mean_covariance(self):
        trials = [Trial(np.eye(2))]
        transform = ea_reference(trials)
        assert np.allclose(transform.matrices[EA_DOMAIN_KEY], np.eye(2), atol=1e-12)

    def test_diagonal_reference(self):
        trials = [Trial(np.diag([2.0, 1.0]))]  # covariance diag(4, 1)
        transform = ea_reference(trials)
        assert np.allclose(
            transform.matrices[EA_DOMAIN_KEY], np.diag([0.5, 1.0]), atol=1e-12
        )

    def test_reference_whitens_mean(self):
        rng = np.random.default_rng(111)
        trials = [Trial(rng.standard_normal((4, 50))) for _ in range(10)]
        r = ea_reference(trials).matrices[EA_DOMAIN_KEY]
        mean = arithmetic_mean_cov([trial_covariance(t) for t in trials])
        assert np.linalg.norm(r @ mean @ r - np.eye(4)) <= 1e-10

    def test_align_identity_transform(self):
        rng = np.random.default_rng(112)
        trials = [Trial(rng.standard_normal((3, 30)), label=1)]
        out = ea_align(AlignmentTransform("ea", {EA_DOMAIN_KEY: np.eye(3)}), trials)
        assert np.array_equal(out[0].data, trials[0].data)
        assert out[0].label == 1

    def test_aligned_mean_covariance_is_identity(self):
        rng = np.random.default_rng(113)
        trials = [Trial(rng.standard_normal((4, 60))) for _ in range(12)]
        aligned = ea_align(ea_reference(trials), trials)
        mean = arithmetic_mean_cov([trial_covariance(t) for t in aligned])
        assert np.linalg.norm(mean - np.eye(4)) <= 1e-10

    def test_alignment_preserves_pairwise_distances(self):
        rng = np.random.default_rng(114)
        trials = [Trial(rng.standard_normal((4, 60))) for _ in range(6)]
        before = [trial_covariance(t) for t in trials]
        aligned = ea_align(ea_reference(trials), trials)
        after = [trial_covariance(t) for t in aligned]
        for i in range(6):
            for j in range(i + 1, 6):
                d0 = riemannian_distance(before[i], before[j])
                d1 = riemannian_distance(after[i], after[j])
                assert abs(d1 - d0) <= 1e-9 * (1.0 + d0)


class TestTargetMeanEstimation:
    def test_singleton_class_means_are_medoid_covariances(self):
        rng = np.random.default_rng(115)
        pool = [
            Trial(2.0 * rng.standard_normal((3, 40)), label=0),
            Trial(0.5 * rng.standard_normal((3, 40)), label=1),
        ]
        means, medoids = select_and_estimate_target_means(
            pool, k=2, oracle=lambda i: pool[i].label, n_classes=2
        )
        assert medoids == [0, 1]
        for idx in medoids:
            label = pool[idx].label
            assert np.allclose(
                means.means[label], trial_covariance(pool[idx]), atol=1e-9
            )
            assert means.support[label] == 1

    def test_single_label_coverage_falls_back(self):
        rng = np.random.default_rng(116)
        pool = [Trial(rng.standard_normal((3, 40)), label=0) for _ in range(6)]
        means, medoids = select_and_estimate_target_means(
            pool, k=3, oracle=lambda i: 0, n_classes=2
        )
        assert means is None
        assert len(medoids) == 3

    def test_estimates_near_generator_prototypes(self):
        cfg = SynthConfig(channels=4, samples=300, classes=2, trials_per_class=15,
                          subjects=1, class_separation=1.0, subject_shift=0.5, seed=13)
        data = generate_synthetic(cfg)
        pool = list(data.subjects[0])
        means, _ = select_and_estimate_target_means(
            pool, k=10, oracle=lambda i: pool[i].label, n_classes=2
        )
        for m in (0, 1):
            # Trial covariances carry the raw Gram scale; divide by the
            # sample count before comparing against the prototype.
            estimate = means.means[m] / cfg.samples
            truth = data.expected_covariance(0, m)
            assert riemannian_distance(estimate, truth) <= 0.5


class TestLabelAlignment:
    def test_equal_means_give_identity(self):
        rng = np.random.default_rng(117)
        cov = random_spd(rng, 3)
        trials = trials_with_covariance(rng, cov, 3, label=0)
        target = ClassMeans({5: cov}, {5: 1})
        mapping = LabelMapping(((0, 5),))
        transform = la_fit({0: trials}, target, mapping)
        assert np.allclose(transform.matrices[0], np.eye(3), atol=1e-10)

    def test_diagonal_closed_form(self):
        rng = np.random.default_rng(118)
        trials = trials_with_covariance(rng, np.diag([4.0, 1.0]), 2, label=0)
        target = ClassMeans({1: np.diag([1.0, 4.0])}, {1: 1})
        transform = la_fit({0: trials}, target, LabelMapping(((0, 1),)))
        assert np.allclose(transform.matrices[0], np.diag([0.5, 2.0]), atol=1e-10)

    def test_recenters_class_mean_exactly(self):
        rng = np.random.default_rng(119)
        source_trials = [Trial(rng.standard_normal((8, 40)), label=0) for _ in range(5)]
        target_mean = random_spd(rng, 8, scale=0.8)
        target = ClassMeans({2: target_mean}, {2: 3})
        mapping = LabelMapping(((0, 2),))
        transform = la_fit({0: source_trials}, target, mapping)
        a = transform.matrices[0]
        source_mean = log_euclidean_mean(
            [trial_covariance(t) for t in source_trials]
        )
        gap = a @ source_mean @ a.T - target_mean
        assert np.linalg.norm(gap) <= 1e-9 * np.linalg.norm(target_mean)

    def test_align_relabels_and_recenters(self):
        rng = np.random.default_rng(120)
        cov0, cov1 = random_spd(rng, 3), random_spd(rng, 3)
        trials = trials_with_covariance(rng, cov0, 4, label=0)
        trials += trials_with_covariance(rng, cov1, 4, label=1)
        t_means = {7: random_spd(rng, 3), 9: random_spd(rng, 3)}
        target = ClassMeans(t_means, {7: 1, 9: 1})
        mapping = LabelMapping(((0, 7), (1, 9)))
        transform = la_fit(
            {0: trials[:4], 1: trials[4:]}, target, mapping
        )
        aligned = la_align(transform, trials, mapping)
        assert sorted({t.label for t in aligned}) == [7, 9]
        assert [t.label for t in aligned] == [7] * 4 + [9] * 4
        for label in (7, 9):
            covs = [trial_covariance(t) for t in aligned if t.label == label]
            mean = log_euclidean_mean(covs)
            # Same-covariance trials make the recentering exact.
            assert np.linalg.norm(mean - t_means[label]) <= 1e-8 * np.linalg.norm(
                t_means[label]
            )

    def test_identity_transform_only_relabels(self):
        rng = np.random.default_rng(121)
        trials = [Trial(rng.standard_normal((2, 20)), label=0)]
        transform = AlignmentTransform("la", {0: np.eye(2)})
        out = la_align(transform, trials, LabelMapping(((0, 4),)))
        assert np.array_equal(out[0].data, trials[0].data)
        assert out[0].label == 4

    def test_within_class_distances_preserved(self):
        rng = np.random.default_rng(122)
        trials = [Trial(rng.standard_normal((4, 50)), label=0) for _ in range(5)]
        before = [trial_covariance(t) for t in trials]
        target = ClassMeans({1: random_spd(rng, 4)}, {1: 1})
        mapping = LabelMapping(((0, 1),))
        transform = la_fit({0: trials}, target, mapping)
        aligned = la_align(transform, trials, mapping)
        after = [trial_covariance(t) for t in aligned]
        for i in range(5):
            for j in range(i + 1, 5):
                d0 = riemannian_distance(before[i], before[j])
                d1 = riemannian_distance(after[i], after[j])
                assert abs(d1 - d0) <= 1e-9 * (1.0 + d0)

    def test_missing_class_errors(self):
        rng = np.random.default_rng(123)
        trials = [Trial(rng.standard_normal((2, 20)), label=0)]
        target = ClassMeans({4: np.eye(2)}, {4: 1})
        with pytest.raises(MissingClassError):
            la_fit({0: trials}, target, LabelMapping(((1, 4),)))
        with pytest.raises(MissingClassError):
            la_fit({0: trials}, target, LabelMapping(((0, 9),)))

    def test_unknown_label_on_align(self):
        rng = np.random.default_rng(124)
        transform = AlignmentTransform("la", {0: np.eye(2)})
        stray = [Trial(rng.standard_normal((2, 20)), label=3)]
        with pytest.raises(UnknownLabelError):
            la_align(transform, stray, LabelMapping(((0, 1),)))


class TestAlignDispatch:
    def test_raw_without_mapping_echoes(self):
        rng = np.random.default_rng(125)
        source = [[Trial(rng.standard_normal((2, 20)), label=0)]]
        target = [Trial(rng.standard_normal((2, 20)), label=1)]
        result = align("raw", source, target)
        assert np.array_equal(result.source_subjects[0][0].data, source[0][0].data)
        assert result.source_subjects[0][0].label == 0
        assert np.array_equal(result.target_trials[0].data, target[0].data)

    def test_raw_with_mapping_relabels_only(self):
        rng = np.random.default_rng(126)
        source = [[Trial(rng.standard_normal((2, 20)), label=0)]]
        target = [Trial(rng.standard_normal((2, 20)), label=1)]
        result = align("raw", source, target, mapping=LabelMapping(((0, 1),)))
        assert np.array_equal(result.source_subjects[0][0].data, source[0][0].data)
        assert result.source_subjects[0][0].label == 1

    def test_ea_whitens_every_subject(self):
        rng = np.random.default_rng(127)
        subjects = [
            [Trial(rng.standard_normal((3, 40)), label=0) for _ in range(8)]
            for _ in range(2)
        ]
        target = [Trial(rng.standard_normal((3, 40)), label=1) for _ in range(8)]
        result = align("ea", subjects, target)
        for aligned in [*result.source_subjects, result.target_trials]:
            mean = arithmetic_mean_cov([trial_covariance(t) for t in aligned])
            assert np.linalg.norm(mean - np.eye(3)) <= 1e-9 * 3

    def test_la_dispatch_matches_manual_pipeline(self):
        rng = np.random.default_rng(128)
        source = [trials_with_covariance(rng, random_spd(rng, 3), 4, label=0)]
        target_mean = random_spd(rng, 3)
        means = ClassMeans({5: target_mean}, {5: 2})
        mapping = LabelMapping(((0, 5),))
        result = align("la", source, [], mapping=mapping, target_means=means)
        covs = [trial_covariance(t) for t in result.source_subjects[0]]
        assert np.linalg.norm(
            log_euclidean_mean(covs) - target_mean
        ) <= 1e-8 * np.linalg.norm(target_mean)

    def test_relabel_requires_known_labels(self):
        rng = np.random.default_rng(129)
        with pytest.raises(UnknownLabelError):
            relabel([Trial(rng.standard_normal((2, 10)), label=9)], LabelMapping(((0, 1),)))
