"""Fully connected ReLU networks with a softmax output layer.

Trained by full-batch gradient descent on mean cross-entropy.  A step that
would raise the loss ends training with the previous parameters, so the
recorded loss history never increases.
"""

import numpy as np

from .. import rng
from ..errors import DegenerateDataError, DivergenceError

ARCHITECTURES = {
    "narrow": (10,),
    "medium": (25,),
    "wide": (100,),
    "bilayered": (10, 10),
    "trilayered": (10, 10, 10),
}
STEP = 0.01
MAX_ITER = 2000
MIN_IMPROVEMENT = 1e-7


def softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def init_params(sizes, seed):
    """Glorot-uniform weights from the counter-based generator; zero biases."""
    params = []
    for layer, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        u = rng.Stream(seed, 4, layer).random(fan_in * fan_out)
        params.append(((2.0 * u - 1.0) * limit).reshape(fan_in, fan_out))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X):
    """Class probabilities and the per-layer activations needed for backprop."""
    acts = [X]
    h = X
    n_layers = len(params) // 2
    for layer in range(n_layers):
        z = h @ params[2 * layer] + params[2 * layer + 1]
        h = np.maximum(z, 0.0) if layer < n_layers - 1 else z
        acts.append(h)
    return softmax(acts[-1]), acts


def loss_and_grad(params, X, onehot):
    """Mean cross-entropy and its gradient with respect to every parameter."""
    probs, acts = forward(params, X)
    n = len(X)
    loss = -np.sum(onehot * np.log(np.clip(probs, 1e-300, None))) / n
    grads = [None] * len(params)
    delta = (probs - onehot) / n
    for layer in range(len(params) // 2 - 1, -1, -1):
        grads[2 * layer] = acts[layer].T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer:
            delta = (delta @ params[2 * layer].T) * (acts[layer] > 0)
    return loss, grads


def fit(X, y, hidden=(10,), seed=0, step=STEP, max_iter=MAX_ITER,
        min_improvement=MIN_IMPROVEMENT):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("network training needs both classes")
    onehot = np.eye(2)[y]
    params = init_params((X.shape[1],) + tuple(hidden) + (2,), seed)
    loss, grads = loss_and_grad(params, X, onehot)
    if not np.isfinite(loss):
        raise DivergenceError("non-finite initial loss", 0)
    history = [loss]
    for it in range(1, max_iter + 1):
        trial = [p - step * g for p, g in zip(params, grads)]
        new_loss, new_grads = loss_and_grad(trial, X, onehot)
        if not np.isfinite(new_loss):
            raise DivergenceError(f"non-finite loss at iteration {it}", it)
        if new_loss > loss:
            break
        params, grads = trial, new_grads
        improvement = loss - new_loss
        loss = new_loss
        history.append(loss)
        if improvement < min_improvement:
            break
    return {"params": params, "loss_history": np.array(history)}


def predict_proba(state, X):
    return forward(state["params"], np.asarray(X, dtype=np.float64))[0]


def predict(state, X):
    """Argmax class; an exact probability tie goes to class 0."""
    p = predict_proba(state, X)
    return (p[:, 1] > p[:, 0]).astype(np.int64)
