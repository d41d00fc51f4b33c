#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Jerk threshold analysis.

Jerks are first differences of the accelerometer channels scaled to mG/s. RMS jerk is taken over
non-overlapping 200 ms windows (20 samples), either over the 3 x 20 per-axis values or over the
20 Euclidean norms. A window is a buzz window when at least half of its samples are buzz.
"""

import logging
from dataclasses import dataclass

import numpy as np

from buzzscope.errors import ConfigError, ValidationError
from buzzscope.record import SAMPLE_RATE

logger = logging.getLogger(__name__)

JERK_WINDOW = 20
WINDOW_S    = JERK_WINDOW/SAMPLE_RATE
THRESHOLDS  = np.arange(0, 166001, 2000)
DELAYS      = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)

# Jerk ---------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class JerkSeries:
    values    : np.ndarray  # (3, N-1) per axis, or (1, N-1) Euclidean norm; mG/s
    euclidean : bool = False

    def __len__(self):
        return self.values.shape[1]


def compute_jerk(record, euclidean=False):
    accel = np.stack([record.ax, record.ay, record.az]).astype(np.float64)
    if accel.shape[1] < 2:
        raise ValidationError("jerk needs at least 2 samples")
    jerk = np.diff(accel, axis=1)*SAMPLE_RATE
    if euclidean:
        jerk = np.linalg.norm(jerk, axis=0)[None, :]
    return JerkSeries(jerk, euclidean)

def rms_jerk(jerks, window=JERK_WINDOW):
    values = jerks.values
    n      = values.shape[1]//window
    if n == 0:
        raise ValidationError(f"RMS jerk needs at least {window} jerk samples, got {values.shape[1]}")
    w = values[:, :n*window].reshape(values.shape[0], n, window)
    return np.sqrt(np.mean(w*w, axis=(0, 2)))

def window_buzz_labels(buzz, n_windows=None, window=JERK_WINDOW):
    buzz = np.asarray(buzz, dtype=np.int64)
    n    = len(buzz)//window if n_windows is None else n_windows
    if n*window > len(buzz):
        raise ValidationError(f"{n} windows of {window} samples exceed {len(buzz)} labels")
    # "At least half": 10 of 20 is a buzz window.
    return (2*buzz[:n*window].reshape(n, window).sum(axis=1) >= window).astype(np.int8)

def jerk_windows(record, euclidean=False):
    """RMS jerk and buzz label of every 200 ms window of a record."""
    rms = rms_jerk(compute_jerk(record, euclidean))
    return rms, window_buzz_labels(record.buzz, len(rms))

# Sweep --------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    threshold : float
    delay     : float
    tp        : int
    fp        : int
    fn        : int
    tn        : int

    @property
    def precision(self):
        return self.tp/(self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self):
        return self.tp/(self.tp + self.fn) if self.tp + self.fn else None


@dataclass
class SweepResult:
    rows : list

    COLUMNS = ["threshold_mGps", "delay_s", "tp", "fp", "fn", "tn", "precision", "recall"]

    def delay(self, delay):
        return [r for r in self.rows if np.isclose(r.delay, delay)]

    def columns(self):
        """Column name -> values, None where a ratio is undefined."""
        fields = ["threshold", "delay", "tp", "fp", "fn", "tn", "precision", "recall"]
        return {c: [getattr(r, f) for r in self.rows] for c, f in zip(self.COLUMNS, fields)}


def delay_windows(delay, window_s=WINDOW_S):
    k = int(round(delay/window_s))
    if k < 0 or not np.isclose(k*window_s, delay, rtol=0, atol=1e-9):
        raise ConfigError(f"delay {delay} s is not a non-negative multiple of the {window_s} s window")
    return k

def _counts_above(sorted_values, thresholds):
    return len(sorted_values) - np.searchsorted(sorted_values, thresholds, side="right")

def sweep(rms, labels, thresholds=THRESHOLDS, delays=DELAYS):
    """Confusion counts of `rms > threshold` against labels, for every threshold and delay.

    With delay d the RMS window at time t is compared to the label at t - d (jerk after buzz).
    """
    rms    = np.asarray(rms, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int8)
    if len(rms) != len(labels):
        raise ValidationError(f"{len(rms)} RMS windows but {len(labels)} labels")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    rows = []
    for delay in delays:
        k = delay_windows(delay)
        n = len(rms) - k
        if n <= 0:
            raise ValidationError(f"delay {delay} s leaves no windows to compare")
        r, g = rms[k:], labels[:n]
        pos  = np.sort(r[g == 1])
        neg  = np.sort(r[g == 0])
        tp   = _counts_above(pos, thresholds)
        fp   = _counts_above(neg, thresholds)
        for t, a, b in zip(thresholds, tp, fp):
            rows.append(SweepRow(float(t), float(delay), int(a), int(b), int(len(pos) - a), int(len(neg) - b)))
    logger.debug(f"[jerks] {len(thresholds)} thresholds x {len(delays)} delays over {len(rms)} windows")
    return SweepResult(rows)

def combine(results):
    """Row-wise sum of sweeps run with the same thresholds and delays (e.g. one per whale)."""
    rows = []
    for group in zip(*(r.rows for r in results)):
        head = group[0]
        rows.append(SweepRow(head.threshold, head.delay,
                             sum(r.tp for r in group), sum(r.fp for r in group),
                             sum(r.fn for r in group), sum(r.tn for r in group)))
    return SweepResult(rows)
