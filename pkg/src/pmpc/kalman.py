"""Exact posterior recursion for scalar linear-Gaussian models.

Used by the ``pf-check`` command to score the particle filter against the
closed-form answer on :func:`pmpc.models.linear_gaussian` instances.
"""

from __future__ import annotations

import numpy as np

__all__ = ["kalman_filter"]


def kalman_filter(a, b, q, r, x0_mean, x0_var, controls, measurements):
    """Posterior means and variances for ``x+ = a x + b u + w``, ``y = x + v``.

    The t-th output conditions on ``measurements[t]``; ``controls[t]`` then
    drives the transition to t + 1 (measure, act, propagate - the same loop
    order as the particle filter).  Returns ``(means, variances)`` arrays.
    """
    m_prior, p_prior = float(x0_mean), float(x0_var)
    means, variances = [], []
    for u, y in zip(controls, measurements, strict=True):
        gain = p_prior / (p_prior + r)
        m_post = m_prior + gain * (y - m_prior)
        p_post = (1.0 - gain) * p_prior
        means.append(m_post)
        variances.append(p_post)
        m_prior = a * m_post + b * u
        p_prior = a * a * p_post + q
    return np.asarray(means), np.asarray(variances)
