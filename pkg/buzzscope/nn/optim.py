#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

from dataclasses import dataclass, field

import numpy as np

from buzzscope.errors import ShapeError


@dataclass
class AdamState:
    lr    : float = 1e-3
    beta1 : float = 0.9
    beta2 : float = 0.999
    eps   : float = 1e-8
    step  : int   = 0
    m     : list  = field(default_factory=list)
    v     : list  = field(default_factory=list)

    @classmethod
    def init(cls, params, **kwargs):
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], **kwargs)


def adam_step(params, grads, state):
    """Bias-corrected Adam update; returns new parameter arrays and a new state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError(f"adam_step: {len(params)} params, {len(grads)} grads, {len(state.m)} moments")
    t      = state.step + 1
    new_p  = []
    new_m  = []
    new_v  = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeError(f"adam_step: parameter {p.shape} vs gradient {g.shape}")
        m     = state.beta1*m + (1 - state.beta1)*g
        v     = state.beta2*v + (1 - state.beta2)*g*g
        m_hat = m/(1 - state.beta1**t)
        v_hat = v/(1 - state.beta2**t)
        new_p.append(p - state.lr*m_hat/(np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    state = AdamState(state.lr, state.beta1, state.beta2, state.eps, t, new_m, new_v)
    return new_p, state
