"""SGD, Adam and RMSProp as pure state transitions."""

import numpy as np

from povm_discriminator.errors import ShapeError
from povm_discriminator.model.training import (
    OptimizerKind,
    OptimizerSettings,
    OptimizerState,
)


def init_optimizer(
    kind: OptimizerKind | str,
    num_params: int,
    settings: OptimizerSettings | None = None,
) -> OptimizerState:
    """Fresh state with zero moments and t = 0."""
    return OptimizerState(
        kind=OptimizerKind(kind),
        t=0,
        m=np.zeros(num_params),
        v=np.zeros(num_params),
        settings=settings or OptimizerSettings(),
    )


def _sgd(state: OptimizerState, params: np.ndarray, grad: np.ndarray):
    lr = state.settings.learning_rate
    return params - lr * grad, state.m, state.v


def _adam(state: OptimizerState, params: np.ndarray, grad: np.ndarray):
    s = state.settings
    t = state.t + 1
    lr_t = s.learning_rate * np.sqrt(1.0 - s.beta2**t) / (1.0 - s.beta1**t)
    m = s.beta1 * state.m + (1.0 - s.beta1) * grad
    v = s.beta2 * state.v + (1.0 - s.beta2) * grad * grad
    return params - lr_t * m / (np.sqrt(v) + s.epsilon), m, v


def _rmsprop(state: OptimizerState, params: np.ndarray, grad: np.ndarray):
    s = state.settings
    v = s.rms_decay * state.v + (1.0 - s.rms_decay) * grad * grad
    return params - s.learning_rate * grad / (np.sqrt(v) + s.epsilon), state.m, v


_UPDATES = {
    OptimizerKind.SGD: _sgd,
    OptimizerKind.ADAM: _adam,
    OptimizerKind.RMSPROP: _rmsprop,
}


def optimizer_step(
    state: OptimizerState, params: np.ndarray, grad: np.ndarray
) -> tuple[np.ndarray, OptimizerState]:
    """One update; returns the new angles and the advanced state."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape:
        raise ShapeError(f"gradient shape {grad.shape} does not match params {params.shape}")
    if state.m.shape != params.shape:
        raise ShapeError(
            f"optimizer holds {state.m.shape} moments for params of shape {params.shape}"
        )
    new_params, m, v = _UPDATES[state.kind](state, params, grad)
    new_state = OptimizerState(kind=state.kind, t=state.t + 1, m=m, v=v, settings=state.settings)
    return new_params, new_state
