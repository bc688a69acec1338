"""The hybrid training loop: simulated circuit evaluations driving an optimizer."""

import logging
import math
import time

import numpy as np

from povm_discriminator.circuit.topology import NUM_PARAMS
from povm_discriminator.errors import NumericError, TrainingAborted
from povm_discriminator.model.training import TrainConfig, TrainResult, TrajectoryPoint
from povm_discriminator.training.cost import (
    ensemble_metrics,
    evaluate_j1,
    exact_summary,
    full_batches,
)
from povm_discriminator.training.gradient import minibatch_gradient
from povm_discriminator.training.optimizers import init_optimizer, optimizer_step

logger = logging.getLogger(__name__)


def initial_params(rng: np.random.Generator) -> np.ndarray:
    """Angles drawn i.i.d. uniform in [0, 2 pi)."""
    return rng.uniform(0.0, 2.0 * math.pi, size=NUM_PARAMS)


def _observe(config: TrainConfig, params: np.ndarray, iteration: int, rng: np.random.Generator) -> TrajectoryPoint:
    j1_exact, metrics = exact_summary(params, config.ensemble, config.cost, config.assignment)
    if config.mode.sampled:
        j1_estimated = evaluate_j1(
            params, full_batches(config.ensemble), config.cost, config.assignment, config.mode, rng
        )
    else:
        j1_estimated = j1_exact
    if not (math.isfinite(j1_exact) and math.isfinite(j1_estimated)):
        raise NumericError(f"cost is not finite after iteration {iteration}")
    return TrajectoryPoint(
        iteration=iteration,
        j1_estimated=j1_estimated,
        j1_exact=j1_exact,
        p_suc=metrics.p_suc,
        p_err=metrics.p_err,
        p_inc=metrics.p_inc,
    )


def _result(
    config: TrainConfig,
    params: np.ndarray,
    trajectory: list[TrajectoryPoint],
    started: float,
    rng: np.random.Generator,
) -> TrainResult:
    if trajectory:
        final = trajectory[-1]
    else:
        final = _observe(config, params, 0, rng)
    test_metrics = None
    if config.test_ensemble:
        test_metrics = ensemble_metrics(params, config.test_ensemble, config.assignment)
    return TrainResult(
        params=params,
        trajectory=tuple(trajectory),
        train_metrics=ensemble_metrics(params, config.ensemble, config.assignment),
        test_metrics=test_metrics,
        wall_time=time.perf_counter() - started,
        seed=config.seed,
        final_j1_exact=final.j1_exact,
        final_j1_estimated=final.j1_estimated,
    )


def train(config: TrainConfig) -> TrainResult:
    """Run ``config.max_iterations`` optimizer steps from random angles.

    Every iteration appends one trajectory point: the cost over the full
    training set (shot-estimated in sampled mode, with the exact value
    alongside) and the training-set metrics. A non-finite cost raises
    TrainingAborted carrying the trajectory up to the last good step.
    """
    rng = np.random.default_rng(config.seed)
    params = initial_params(rng)
    state = init_optimizer(config.optimizer, NUM_PARAMS, config.settings)
    trajectory: list[TrajectoryPoint] = []
    started = time.perf_counter()
    logger.info(
        "Training: seed %d, %s, %s mode, %d iterations",
        config.seed,
        config.optimizer.value,
        config.mode.name,
        config.max_iterations,
    )

    for iteration in range(1, config.max_iterations + 1):
        try:
            grad = minibatch_gradient(
                params,
                config.ensemble,
                config.cost,
                config.minibatch_size,
                config.gradient_step,
                rng,
                config.mode,
                config.assignment,
            )
            candidate, candidate_state = optimizer_step(state, params, grad)
            point = _observe(config, candidate, iteration, rng)
        except NumericError as e:
            logger.warning("Training aborted at iteration %d: %s", iteration, e)
            partial = _result(config, params, trajectory, started, rng)
            raise TrainingAborted(f"aborted at iteration {iteration}: {e}", partial) from e

        params, state = candidate, candidate_state
        trajectory.append(point)
        if config.log_every > 0 and iteration % config.log_every == 0:
            logger.debug(
                "iteration %d: J1 %.6g (exact %.6g), P_suc %.4f P_err %.4f P_inc %.4f",
                iteration,
                point.j1_estimated,
                point.j1_exact,
                point.p_suc,
                point.p_err,
                point.p_inc,
            )

    result = _result(config, params, trajectory, started, rng)
    logger.info(
        "Finished seed %d: J1 %.6g, train P_suc %.4f",
        config.seed,
        result.final_j1_exact,
        result.train_metrics.p_suc,
    )
    return result
