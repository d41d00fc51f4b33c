#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

from dataclasses import dataclass

import numpy as np
import pandas as pd

from buzzscope.errors import ValidationError
from buzzscope.features import WindowSpec, featurize, feature_matrix
from buzzscope.models.logreg import LogisticModel
from buzzscope.models.forest import ForestModel
from buzzscope.models.unet import UNetModel, INPUT_CHANNELS

THRESHOLD = 0.5


@dataclass
class Prediction:
    probability        : np.ndarray  # per window (tabular) or per sample (U-Net)
    labels             : np.ndarray  # probability > 0.5
    sample_probability : np.ndarray  # 100 Hz
    sample_labels      : np.ndarray  # 100 Hz


def binarize(probability, threshold=THRESHOLD):
    return (np.asarray(probability) > threshold).astype(np.int8)

def expand_window_labels(labels, n_samples, spec=WindowSpec()):
    """Paint each window's span with its label, overlapping windows combined by OR."""
    starts = np.arange(len(labels))*spec.stride
    edges  = np.zeros(n_samples + spec.size + 1, dtype=np.int64)
    pos    = starts[np.asarray(labels) > 0]
    np.add.at(edges, pos, 1)
    np.add.at(edges, pos + spec.size, -1)
    return (np.cumsum(edges)[:n_samples] > 0).astype(np.int8)

def expand_window_probability(probability, n_samples, spec=WindowSpec()):
    """Highest probability among the windows covering each sample (0 where none does)."""
    out = np.zeros(n_samples)
    for k, p in enumerate(probability):
        s = k*spec.stride
        np.maximum(out[s:s + spec.size], p, out=out[s:s + spec.size])
    return out

def _unet_probability(model, record):
    L = model.cfg.segment_length
    x = np.stack([record.ax, record.ay, record.az, record.depth])
    if x.shape[0] != INPUT_CHANNELS:
        raise ValidationError("U-Net input must hold ax, ay, az and depth")
    n   = x.shape[1]
    pad = (-n) % L
    # Pad with the training mean so the padded tail is zero after normalization.
    x   = np.concatenate([x, np.repeat(model.norm_mean[:, None], pad, axis=1)], axis=1)
    seg = x.reshape(INPUT_CHANNELS, -1, L).transpose(1, 0, 2)
    return model.predict_segments(seg).reshape(-1)[:n]

def predict(model, data, spec=WindowSpec(), n_samples=None, phase_mode="center"):
    """Probabilities and 0.5-thresholded labels.

    U-Net models take a WhaleRecord. Tabular models take a WhaleRecord (featurized here) or a
    feature table; for a table `n_samples` sets the length of the 100 Hz expansion.
    """
    if isinstance(model, UNetModel):
        if isinstance(data, pd.DataFrame):
            raise ValidationError("the U-Net predicts from a record, not a feature table")
        p = _unet_probability(model, data)
        return Prediction(p, binarize(p), p, binarize(p))
    if isinstance(model, (LogisticModel, ForestModel)):
        if isinstance(data, pd.DataFrame):
            table = data
            if n_samples is None:
                n_samples = (len(table) - 1)*spec.stride + spec.size if len(table) else 0
        else:
            table     = featurize(data, spec, phase_mode=phase_mode)
            n_samples = len(data)
        p = model.predict_proba(feature_matrix(table)[0]) if len(table) else np.zeros(0)
        labels = binarize(p)
        return Prediction(p, labels, expand_window_probability(p, n_samples, spec),
                          expand_window_labels(labels, n_samples, spec))
    raise ValidationError(f"cannot predict with a {type(model).__name__}")
