#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import numpy as np

from buzzscope.errors import DomainError, ShapeError, NumericHealthError

DICE_SMOOTH = 1.0


def dice_loss(p, g, smooth=DICE_SMOOTH):
    """Smoothed Dice loss over the whole batch and its gradient with respect to p.

        DL = 1 - (2*sum(p*g) + smooth)/(sum(p) + sum(g) + smooth)
    """
    p = np.asarray(p, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if p.shape != g.shape:
        raise ShapeError(f"dice_loss: prediction {p.shape} and target {g.shape} differ")
    if p.size == 0:
        raise ShapeError("dice_loss of an empty batch")
    if not np.isfinite(p).all():
        raise NumericHealthError("dice_loss")
    if p.min() < 0 or p.max() > 1:
        raise DomainError("dice_loss: probabilities outside [0, 1]")
    num  = 2.0*np.sum(p*g) + smooth
    den  = np.sum(p) + np.sum(g) + smooth
    loss = 1.0 - num/den
    grad = -(2.0*g*den - num)/(den*den)
    return float(loss), grad
