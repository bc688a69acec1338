"""Training and test ensembles for each task type."""

import numpy as np

from povm_discriminator.discrimination import build_family_samples, evenly_spaced
from povm_discriminator.model.ensemble import (
    Ensemble,
    Family,
    FamilySamples,
    Fixed,
    StateFamilySpec,
    TruncatedNormal,
    Uniform,
)
from povm_discriminator.model.experiment import (
    CenteredTask,
    DistributionTask,
    RangeTask,
    Task,
)


def _pair(priors: tuple[float, float], a_samples: tuple[float, ...], a_law, b_samples: tuple[float, ...], b_law) -> Ensemble:
    return [
        FamilySamples(StateFamilySpec(Family.PSI1, priors[0], a_law), a_samples),
        FamilySamples(StateFamilySpec(Family.PSI23, priors[1], b_law), b_samples),
    ]


def _centered(task: CenteredTask, rng: np.random.Generator) -> tuple[Ensemble, Ensemble]:
    a_law = TruncatedNormal(mu=task.a0, sigma=task.sigma)
    b_law = Fixed(task.b)
    train_a = build_family_samples(StateFamilySpec(Family.PSI1, task.priors[0], a_law), task.train_size, rng)
    train = _pair(task.priors, train_a.samples, a_law, (task.b,), b_law)
    test = _pair(task.priors, (task.a0,), Fixed(task.a0), (task.b,), b_law)
    return train, test


def _ranged(task: RangeTask, rng: np.random.Generator) -> tuple[Ensemble, Ensemble]:
    b_law = Fixed(task.b)
    train_law = Uniform(task.train_lo, task.train_hi)
    test_law = Uniform(task.test_lo, task.test_hi)
    train_a = evenly_spaced(task.train_lo, task.train_hi, task.train_size)
    test_a = build_family_samples(StateFamilySpec(Family.PSI1, task.priors[0], test_law), task.test_size, rng)
    train = _pair(task.priors, train_a, train_law, (task.b,), b_law)
    test = _pair(task.priors, test_a.samples, test_law, (task.b,), b_law)
    return train, test


def _distributed(task: DistributionTask, rng: np.random.Generator) -> tuple[Ensemble, Ensemble]:
    a_spec = StateFamilySpec(Family.PSI1, task.priors[0], task.a_distribution)
    b_spec = StateFamilySpec(Family.PSI23, task.priors[1], task.b_distribution)
    train = [
        build_family_samples(a_spec, task.train_size, rng),
        build_family_samples(b_spec, task.train_size, rng),
    ]
    test = [
        build_family_samples(a_spec, task.test_size, rng),
        build_family_samples(b_spec, task.test_size, rng),
    ]
    return train, test


def build_ensembles(task: Task, rng: np.random.Generator) -> tuple[Ensemble, Ensemble]:
    """Independent (train, test) ensembles for ``task``."""
    if isinstance(task, CenteredTask):
        return _centered(task, rng)
    if isinstance(task, RangeTask):
        return _ranged(task, rng)
    if isinstance(task, DistributionTask):
        return _distributed(task, rng)
    raise TypeError(f"unknown task type {type(task).__name__}")
