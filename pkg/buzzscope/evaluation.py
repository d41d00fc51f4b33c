#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Event level evaluation of buzz predictions.

Events are maximal runs of ones. Overlap criteria are scored over truth events (share of a true
buzz covered by a single prediction), distance criteria over predicted events (gap to the
nearest true buzz). Dives are scored as foraging (at least one buzz) or not.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import pearsonr

from buzzscope.record import SAMPLE_RATE
from buzzscope.dives import contiguous_regions

logger = logging.getLogger(__name__)

OVERLAPS  = (0.25, 0.5, 0.75, 1.0)
DISTANCES = (0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0)

# Events -------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EventInterval:
    start_s : float
    end_s   : float
    source  : str = "truth"

    @property
    def duration(self):
        return self.end_s - self.start_s

    @property
    def midpoint(self):
        return (self.start_s + self.end_s)/2


def extract_events(labels, min_len=0.0, source="truth", sample_rate=SAMPLE_RATE):
    starts, ends = contiguous_regions(np.asarray(labels) > 0)
    events = [EventInterval(s/sample_rate, e/sample_rate, source) for s, e in zip(starts, ends)]
    return [e for e in events if e.duration >= min_len]

def interval_distance(a, b):
    return max(0.0, max(a.start_s, b.start_s) - min(a.end_s, b.end_s))

def overlap_fraction(pred, truth, iou=False):
    inter = max(0.0, min(pred.end_s, truth.end_s) - max(pred.start_s, truth.start_s))
    if iou:
        union = pred.duration + truth.duration - inter
        return inter/union if union > 0 else 0.0
    return inter/truth.duration if truth.duration > 0 else 0.0

# Matching -----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchRow:
    kind    : str    # "overlap" (over truth) or "distance" (over prediction)
    value   : float
    matched : int
    total   : int

    @property
    def criterion(self):
        return f"overlap>={self.value:g}" if self.kind == "overlap" else f"distance<{self.value:g}"

    @property
    def proportion(self):
        return self.matched/self.total if self.total else None


@dataclass
class MatchReport:
    rows : list

    COLUMNS = ["criterion", "matched", "total", "proportion"]

    def proportion(self, kind, value):
        for r in self.rows:
            if r.kind == kind and np.isclose(r.value, value):
                return r.proportion
        raise KeyError(f"no {kind} criterion {value}")

    def columns(self):
        return {
            "criterion"  : [r.criterion  for r in self.rows],
            "matched"    : [r.matched    for r in self.rows],
            "total"      : [r.total      for r in self.rows],
            "proportion" : [r.proportion for r in self.rows],
        }


def _edges(events):
    return (np.array([e.start_s for e in events], dtype=np.float64),
            np.array([e.end_s   for e in events], dtype=np.float64))

def best_overlaps(preds, truths, iou=False):
    """Largest overlap fraction of any single prediction with each truth event."""
    p_starts, p_ends = _edges(preds)
    out = np.zeros(len(truths))
    for i, t in enumerate(truths):
        # Sorted, non-overlapping predictions: the ones intersecting t are a contiguous slice.
        lo = np.searchsorted(p_ends, t.start_s, side="right")
        hi = np.searchsorted(p_starts, t.end_s, side="left")
        out[i] = max((overlap_fraction(p, t, iou) for p in preds[lo:hi]), default=0.0)
    return out

def nearest_distances(preds, truths):
    """Gap from each prediction to its nearest truth event (inf when there is none)."""
    t_starts, t_ends = _edges(truths)
    out = np.full(len(preds), np.inf)
    for i, p in enumerate(preds):
        # First truth ending at or after p starts; only it and its predecessor can be nearest.
        j = np.searchsorted(t_ends, p.start_s, side="left")
        for k in (j - 1, j):
            if 0 <= k < len(truths):
                out[i] = min(out[i], interval_distance(p, truths[k]))
    return out

def match_report(preds, truths, overlaps=OVERLAPS, distances=DISTANCES, iou=False):
    rows = []
    if overlaps:
        best = best_overlaps(preds, truths, iou)
        rows += [MatchRow("overlap", float(th), int(np.sum(best >= th)), len(truths)) for th in overlaps]
    if distances:
        dist = nearest_distances(preds, truths)
        rows += [MatchRow("distance", float(d), int(np.sum(dist < d)), len(preds)) for d in distances]
    return MatchReport(rows)

# Dives --------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class DiveRow:
    dive_id     : int
    truth_count : int
    pred_count  : int
    truth_secs  : float
    pred_secs   : float


@dataclass
class DiveReport:
    rows    : list
    surface : DiveRow  # events whose midpoint lies outside every dive; not scored
    tn      : int
    fp      : int
    fn      : int
    tp      : int

    COLUMNS = ["dive_id", "truth_count", "pred_count", "truth_secs", "pred_secs"]

    @property
    def precision(self):
        return self.tp/(self.tp + self.fp) if self.tp + self.fp else None

    @property
    def recall(self):
        return self.tp/(self.tp + self.fn) if self.tp + self.fn else None

    def confusion(self):
        return {"tn": self.tn, "fp": self.fp, "fn": self.fn, "tp": self.tp,
                "precision": self.precision, "recall": self.recall}

    def columns(self):
        return {c: [getattr(r, c) for r in self.rows] for c in self.COLUMNS}


def assign_events(dives, events, sample_rate=SAMPLE_RATE):
    """Dive index of each event by midpoint containment, -1 outside all dives."""
    starts = np.array([d.start_idx for d in dives], dtype=np.float64)/sample_rate
    ends   = np.array([d.end_idx   for d in dives], dtype=np.float64)/sample_rate
    mids   = np.array([e.midpoint for e in events], dtype=np.float64)
    k      = np.searchsorted(starts, mids, side="right") - 1
    inside = (k >= 0) & (mids < ends[np.clip(k, 0, None)]) if len(dives) else np.zeros(len(mids), dtype=bool)
    return np.where(inside, k, -1)

def _tally(dives, events, sample_rate):
    idx    = assign_events(dives, events, sample_rate)
    counts = np.zeros(len(dives) + 1, dtype=np.int64)
    secs   = np.zeros(len(dives) + 1)
    for k, e in zip(idx, events):
        counts[k] += 1  # -1 is the surface bucket.
        secs[k]   += e.duration
    return counts, secs

def dive_report(dives, pred_events, truth_events, sample_rate=SAMPLE_RATE):
    tc, ts = _tally(dives, truth_events, sample_rate)
    pc, ps = _tally(dives, pred_events,  sample_rate)
    rows   = [DiveRow(i, int(tc[i]), int(pc[i]), float(ts[i]), float(ps[i])) for i in range(len(dives))]
    truth  = tc[:len(dives)] > 0
    pred   = pc[:len(dives)] > 0
    report = DiveReport(
        rows    = rows,
        surface = DiveRow(-1, int(tc[-1]), int(pc[-1]), float(ts[-1]), float(ps[-1])),
        tn      = int(np.sum(~truth & ~pred)),
        fp      = int(np.sum(~truth &  pred)),
        fn      = int(np.sum( truth & ~pred)),
        tp      = int(np.sum( truth &  pred)),
    )
    logger.debug(f"[evaluate] {len(dives)} dives, confusion {report.confusion()}")
    return report

# Differences --------------------------------------------------------------------------------------

@dataclass(frozen=True)
class DiveDifferences:
    dive_id    : np.ndarray
    count_diff : np.ndarray  # predicted - truth buzz count
    secs_diff  : np.ndarray  # predicted - truth buzz seconds

    COLUMNS = ["dive_id", "count_diff", "secs_diff"]

    def columns(self):
        return {c: getattr(self, c).tolist() for c in self.COLUMNS}


def difference_histograms(report):
    return DiveDifferences(
        dive_id    = np.array([r.dive_id for r in report.rows], dtype=np.int64),
        count_diff = np.array([r.pred_count - r.truth_count for r in report.rows], dtype=np.int64),
        secs_diff  = np.array([r.pred_secs  - r.truth_secs  for r in report.rows], dtype=np.float64),
    )

def bin_differences(values, width=1.0):
    """Histogram of differences on bins of `width` centred on multiples of `width`."""
    values = np.asarray(values, dtype=np.float64)
    if not len(values):
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    lo    = np.floor(values.min()/width + 0.5)
    hi    = np.floor(values.max()/width + 0.5)
    edges = (np.arange(lo, hi + 2) - 0.5)*width
    counts, edges = np.histogram(values, bins=edges)
    return (edges[:-1] + edges[1:])/2, counts

def count_correlation(report):
    """Pearson correlation of predicted vs truth buzz counts per dive; None if undefined."""
    truth = np.array([r.truth_count for r in report.rows], dtype=np.float64)
    pred  = np.array([r.pred_count  for r in report.rows], dtype=np.float64)
    if len(truth) < 2 or np.ptp(truth) == 0 or np.ptp(pred) == 0:
        return None
    return float(pearsonr(pred, truth)[0])

# Combining ----------------------------------------------------------------------------------------

def combine_match_reports(reports):
    """Pooled report of several reports built with the same criteria (e.g. one per whale)."""
    rows = []
    for group in zip(*(r.rows for r in reports)):
        head = group[0]
        rows.append(MatchRow(head.kind, head.value, sum(r.matched for r in group), sum(r.total for r in group)))
    return MatchReport(rows)

def combine_dive_reports(reports):
    """Dives of several reports renumbered in order, confusions summed."""
    rows, offset = [], 0
    for report in reports:
        rows   += [replace(r, dive_id=r.dive_id + offset) for r in report.rows]
        offset += len(report.rows)
    surface = DiveRow(-1,
        sum(r.surface.truth_count for r in reports), sum(r.surface.pred_count for r in reports),
        sum(r.surface.truth_secs  for r in reports), sum(r.surface.pred_secs  for r in reports))
    return DiveReport(rows, surface,
        tn = sum(r.tn for r in reports),
        fp = sum(r.fp for r in reports),
        fn = sum(r.fn for r in reports),
        tp = sum(r.tp for r in reports),
    )
