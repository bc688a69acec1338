"""Cost function, gradients, optimizers and the training loop."""

from povm_discriminator.training.cost import (
    cost_j1,
    draw_minibatch,
    ensemble_metrics,
    evaluate_j1,
    evaluate_j1_stack,
)
from povm_discriminator.training.gradient import (
    forward_diff_gradient,
    minibatch_gradient,
)
from povm_discriminator.training.loop import initial_params, train
from povm_discriminator.training.optimizers import init_optimizer, optimizer_step

__all__ = [
    "cost_j1",
    "draw_minibatch",
    "ensemble_metrics",
    "evaluate_j1",
    "evaluate_j1_stack",
    "forward_diff_gradient",
    "init_optimizer",
    "initial_params",
    "minibatch_gradient",
    "optimizer_step",
    "train",
]
