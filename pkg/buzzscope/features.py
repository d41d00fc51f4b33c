#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Window features for the tabular detectors.

The record is cut into windows of 100 samples (1 s) sliding by 50 samples. Each window gets
26 real features plus the one-hot phase of its centre sample:

- mean, STD (n-1), RMS (n) and MinMax of ax, ay, az, and the mean depth;
- STD, RMS and MinMax of the magnitude sqrt(ax^2 + ay^2 + az^2);
- strict local maxima counts per axis, mean spacing between consecutive maxima per axis (s, 0
  when fewer than two) and the variance (ddof 0) of the three counts;
- Pearson correlations (ax, ay), (ay, az), (az, ax), 0 when either window is constant.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from buzzscope.errors import ConfigError, ValidationError
from buzzscope.dives import one_hot_phases
from buzzscope.record import SAMPLE_RATE

AXES = ["ax", "ay", "az"]

FEATURE_NAMES = (
    [f"{a}_{s}" for a in AXES for s in ["mean", "std", "rms", "minmax"]] +
    ["depth_mean"] +
    ["am_std", "am_rms", "am_minmax"] +
    [f"{a}_peaks" for a in AXES] +
    [f"{a}_peak_interval" for a in AXES] +
    ["peaks_var"] +
    ["corr_xy", "corr_yz", "corr_zx"]
)
PHASE_NAMES = ["phase_surface", "phase_descent", "phase_bottom", "phase_ascent"]
COLUMNS     = ["w_idx", "start_s"] + FEATURE_NAMES + PHASE_NAMES + ["label"]

# Windows ------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowSpec:
    size   : int = 100
    stride : int = 50

    def __post_init__(self):
        if not (0 < self.stride <= self.size):
            raise ConfigError(f"window stride must be in (0, {self.size}], got {self.stride}")

    def starts(self, n_samples):
        return np.arange(make_windows(n_samples, self))*self.stride


def make_windows(n_samples, spec=WindowSpec()):
    if n_samples < spec.size:
        return 0
    return (n_samples - spec.size)//spec.stride + 1

def _windows(x, spec):
    return sliding_window_view(np.asarray(x, dtype=np.float64), spec.size)[::spec.stride]

# Per-window statistics (rows are windows) ---------------------------------------------------------

def _minmax(w):
    return w.max(axis=1) - w.min(axis=1)

def _std(w, flat):
    return np.where(flat, 0.0, w.std(axis=1, ddof=1))

def _rms(w):
    return np.sqrt(np.mean(w*w, axis=1))

def _peak_mask(w):
    mid = w[:, 1:-1]
    return (mid > w[:, :-2]) & (mid > w[:, 2:])

def _peak_counts(w):
    return _peak_mask(w).sum(axis=1)

def _peak_intervals(w):
    mask   = _peak_mask(w)
    count  = mask.sum(axis=1)
    first  = np.argmax(mask, axis=1)
    last   = mask.shape[1] - 1 - np.argmax(mask[:, ::-1], axis=1)
    # Consecutive gaps telescope: their mean is (last - first)/(count - 1).
    gaps   = np.where(count >= 2, (last - first)/np.maximum(count - 1, 1), 0.0)
    return gaps/SAMPLE_RATE

def _corr(a, b, flat_a, flat_b):
    da  = a - a.mean(axis=1, keepdims=True)
    db  = b - b.mean(axis=1, keepdims=True)
    den = np.sqrt((da*da).sum(axis=1)*(db*db).sum(axis=1))
    ok  = ~(flat_a | flat_b) & (den > 0)
    r   = np.zeros(len(a))
    r[ok] = (da*db).sum(axis=1)[ok]/den[ok]
    return np.clip(r, -1.0, 1.0)

# Scalar operations --------------------------------------------------------------------------------

def label_window(buzz_slice):
    buzz_slice = np.asarray(buzz_slice)
    return int(2*buzz_slice.sum() > len(buzz_slice))

def count_peaks(signal):
    signal = np.asarray(signal, dtype=np.float64)
    if len(signal) < 3:
        raise ValidationError("peak counting needs at least 3 samples")
    return int(_peak_counts(signal[None, :])[0])

def mean_peak_interval(signal):
    signal = np.asarray(signal, dtype=np.float64)
    if len(signal) < 3:
        raise ValidationError("peak counting needs at least 3 samples")
    return float(_peak_intervals(signal[None, :])[0])

def pearson_corr(a, b):
    a = np.asarray(a, dtype=np.float64)[None, :]
    b = np.asarray(b, dtype=np.float64)[None, :]
    if a.shape != b.shape or a.shape[1] < 2:
        raise ValidationError("correlation needs two sequences of equal length >= 2")
    return float(_corr(a, b, _minmax(a) == 0, _minmax(b) == 0)[0])

# Table --------------------------------------------------------------------------------------------

def window_features(ax, ay, az, depth, spec=WindowSpec()):
    """Feature matrix (windows x 26) in FEATURE_NAMES order."""
    ws    = [_windows(a, spec) for a in (ax, ay, az)]
    flats = [_minmax(w) == 0 for w in ws]
    am    = np.sqrt(ws[0]**2 + ws[1]**2 + ws[2]**2)
    cols  = []
    for w, flat in zip(ws, flats):
        cols += [w.mean(axis=1), _std(w, flat), _rms(w), _minmax(w)]
    cols.append(_windows(depth, spec).mean(axis=1))
    am_flat = _minmax(am) == 0
    cols   += [_std(am, am_flat), _rms(am), _minmax(am)]
    counts  = [_peak_counts(w) for w in ws]
    cols   += [c.astype(np.float64) for c in counts]
    cols   += [_peak_intervals(w) for w in ws]
    cols.append(np.var(np.stack(counts, axis=1).astype(np.float64), axis=1))
    for i, j in [(0, 1), (1, 2), (2, 0)]:
        cols.append(_corr(ws[i], ws[j], flats[i], flats[j]))
    return np.stack(cols, axis=1)

def window_labels(buzz, spec=WindowSpec(), mode="majority"):
    w = _windows(buzz, spec)
    if mode == "majority":
        return (2*w.sum(axis=1) > spec.size).astype(np.int8)
    if mode == "onset":
        # Windows holding the first sample of a buzz.
        b      = np.asarray(buzz, dtype=np.int8)
        onsets = np.concatenate([b[:1], (np.diff(b) == 1).astype(np.int8)])
        return (_windows(onsets, spec).sum(axis=1) > 0).astype(np.int8)
    raise ConfigError(f"unknown label mode {mode}")

def window_phases(phase, spec=WindowSpec(), mode="center"):
    w = _windows(phase, spec).astype(np.intp)
    if mode == "center":
        return w[:, spec.size//2]
    if mode == "majority":
        counts = np.stack([(w == p).sum(axis=1) for p in range(4)], axis=1)
        return np.argmax(counts, axis=1)
    raise ConfigError(f"unknown phase mode {mode}")

def featurize(record, spec=WindowSpec(), phase_mode="center", label_mode="majority"):
    n_windows = make_windows(len(record), spec)
    if n_windows == 0:
        return pd.DataFrame({c: pd.Series(dtype=np.float64) for c in COLUMNS})
    starts = spec.starts(len(record))
    table  = pd.DataFrame(window_features(record.ax, record.ay, record.az, record.depth, spec),
                          columns=FEATURE_NAMES)
    table.insert(0, "w_idx", np.arange(n_windows))
    table.insert(1, "start_s", starts/SAMPLE_RATE)
    onehot = one_hot_phases(window_phases(record.phase, spec, phase_mode))
    for i, name in enumerate(PHASE_NAMES):
        table[name] = onehot[:, i]
    table["label"] = window_labels(record.buzz, spec, label_mode)
    return table

def feature_matrix(table):
    """Model inputs (26 features + 4 phase columns) and labels of a feature table."""
    X = table[FEATURE_NAMES + PHASE_NAMES].to_numpy(dtype=np.float64)
    y = table["label"].to_numpy(dtype=np.int8)
    return X, y
