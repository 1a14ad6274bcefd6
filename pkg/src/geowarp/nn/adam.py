"""Adam optimizer, standard bias-corrected form."""

import numpy as np


def adam_update(param, grad, m, v, t, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam step for a single array; returns (param', m', v')."""
    if param.shape != grad.shape or param.shape != m.shape or param.shape != v.shape:
        raise ValueError("parameter, gradient and moment shapes must agree")
    if t < 1:
        raise ValueError("step index must be >= 1")
    m_new = beta1 * m + (1.0 - beta1) * grad
    v_new = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m_new / (1.0 - beta1 ** t)
    v_hat = v_new / (1.0 - beta2 ** t)
    p_new = param - lr * m_hat / (np.sqrt(v_hat) + eps)
    return p_new, m_new, v_new


def adam_step(params, grads, moments, t, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam step over a name-keyed parameter dict.

    `moments` is a (m, v) pair of dicts with the same keys (zeros allowed);
    returns (new_params, (new_m, new_v)).
    """
    m, v = moments
    new_p, new_m, new_v = {}, {}, {}
    for name, p in params.items():
        new_p[name], new_m[name], new_v[name] = adam_update(
            p, grads[name], m[name], v[name], t,
            lr=lr, beta1=beta1, beta2=beta2, eps=eps,
        )
    return new_p, (new_m, new_v)


def zero_moments(params):
    m = {name: np.zeros_like(p) for name, p in params.items()}
    v = {name: np.zeros_like(p) for name, p in params.items()}
    return m, v


def clip_global_norm(grads, max_norm):
    """Scale the gradient dict so its global L2 norm is at most max_norm."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g.astype(np.float64) ** 2))
    norm = np.sqrt(total)
    if norm <= max_norm or norm == 0.0:
        return grads, norm
    factor = max_norm / norm
    return {name: g * g.dtype.type(factor) for name, g in grads.items()}, norm
