#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from buzzscope.errors import ValidationError

logger = logging.getLogger(__name__)

# Model --------------------------------------------------------------------------------------------

@dataclass
class LogisticModel:
    weights   : np.ndarray
    intercept : float
    n_iter    : int = 0

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.weights):
            raise ValidationError(f"logistic model expects {len(self.weights)} features, got shape {X.shape}")
        return expit(X @ self.weights + self.intercept)


@dataclass(frozen=True)
class LogRegConfig:
    tol      : float = 1e-6
    max_iter : int   = 10000

# Fit ----------------------------------------------------------------------------------------------

def _log_likelihood(Z, y, beta):
    s = Z @ beta
    # Mean Bernoulli log-likelihood, log(1 + e^s) computed stably.
    return np.mean(y*s - np.logaddexp(0.0, s))

def _gradient(Z, y, beta):
    return Z.T @ (y - expit(Z @ beta))/len(y)

def logreg_fit(X, y, config=LogRegConfig()):
    """Maximum likelihood logistic regression by gradient ascent with backtracking.

    Features are standardized with the training statistics; the returned coefficients are in
    the original feature scale.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValidationError(f"features {X.shape} and labels {y.shape} do not line up")
    if not np.isfinite(X).all():
        raise ValidationError("non-finite feature values")
    if not ((y == 0) | (y == 1)).all() or y.min() == y.max():
        raise ValidationError("logistic regression needs both classes (0 and 1) in the labels")

    mean = X.mean(axis=0)
    std  = X.std(axis=0)
    std[std == 0] = 1.0
    Z    = np.hstack([np.ones((len(X), 1)), (X - mean)/std])

    beta = np.zeros(Z.shape[1])
    ll   = _log_likelihood(Z, y, beta)
    step = 1.0
    it   = 0
    for it in range(config.max_iter):
        grad = _gradient(Z, y, beta)
        gsq  = grad @ grad
        if np.max(np.abs(grad)) < config.tol:
            break
        # Armijo backtracking, starting from twice the last accepted step.
        step = min(step*2.0, 1e6)
        while True:
            cand    = beta + step*grad
            cand_ll = _log_likelihood(Z, y, cand)
            if cand_ll >= ll + 0.5*step*gsq or step < 1e-12:
                break
            step *= 0.5
        beta, ll = cand, cand_ll
    else:
        logger.info(f"[logreg] stopped at max_iter={config.max_iter} (|grad|={np.max(np.abs(grad)):.2e})")
    logger.debug(f"[logreg] {it} iterations, log-likelihood {ll:.6f}")

    weights   = beta[1:]/std
    intercept = float(beta[0] - np.sum(beta[1:]*mean/std))
    return LogisticModel(weights, intercept, it)
