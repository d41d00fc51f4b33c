#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.ndimage import median_filter

DIVE_ONSET_M  = 10.0
DIVE_MIN_MAX  = 20.0
BOTTOM_RATIO  = 0.75

# Types --------------------------------------------------------------------------------------------

class DivePhase(IntEnum):
    SURFACE = 0
    DESCENT = 1
    BOTTOM  = 2
    ASCENT  = 3


@dataclass(frozen=True)
class Dive:
    start_idx        : int
    end_idx          : int
    max_depth_m      : float
    bottom_start_idx : int
    bottom_end_idx   : int

    def __len__(self):
        return self.end_idx - self.start_idx

    def contains(self, idx):
        return self.start_idx <= idx < self.end_idx

# Helpers ------------------------------------------------------------------------------------------

def contiguous_regions(condition):
    """Start (inclusive) and end (exclusive) indices of the runs where `condition` is True."""
    condition = np.asarray(condition, dtype=bool)
    d = np.diff(np.concatenate([[False], condition, [False]]).astype(np.int8))
    return np.flatnonzero(d == 1), np.flatnonzero(d == -1)

# Detection ----------------------------------------------------------------------------------------

def detect_dives(depth, onset=DIVE_ONSET_M, min_max_depth=DIVE_MIN_MAX, median_size=None):
    depth = np.asarray(depth, dtype=np.float64)
    if median_size:
        depth = median_filter(depth, size=median_size, mode="nearest")
    dives = []
    # Exactly `onset` m is surface.
    for start, end in zip(*contiguous_regions(depth > onset)):
        max_depth = float(depth[start:end].max())
        if max_depth < min_max_depth:
            continue
        bottom_start, bottom_end = _bottom_span(depth, start, end, max_depth)
        dives.append(Dive(int(start), int(end), max_depth, bottom_start, bottom_end))
    return dives

def _bottom_span(depth, start, end, max_depth):
    deep = np.flatnonzero(depth[start:end] >= BOTTOM_RATIO*max_depth)
    # Contiguous span from the first to the last 0.75*max crossing.
    return int(start + deep[0]), int(start + deep[-1] + 1)

def segment_phases(dive, depth):
    """Phase of every sample in [dive.start_idx, dive.end_idx)."""
    depth = np.asarray(depth, dtype=np.float64)
    bottom_start, bottom_end = _bottom_span(depth, dive.start_idx, dive.end_idx, dive.max_depth_m)
    phases = np.full(len(dive), DivePhase.ASCENT, dtype=np.int8)
    phases[:bottom_start - dive.start_idx] = DivePhase.DESCENT
    phases[bottom_start - dive.start_idx:bottom_end - dive.start_idx] = DivePhase.BOTTOM
    return phases

def annotate_phases(depth, dives=None, median_size=None):
    depth  = np.asarray(depth, dtype=np.float64)
    if median_size:
        depth = median_filter(depth, size=median_size, mode="nearest")
    phases = np.full(len(depth), DivePhase.SURFACE, dtype=np.int8)
    if dives is None:
        dives = detect_dives(depth)
    for dive in dives:
        phases[dive.start_idx:dive.end_idx] = segment_phases(dive, depth)
    return phases

def one_hot_phase(phase):
    v = np.zeros(4, dtype=np.int8)
    v[DivePhase(phase)] = 1
    return v

def one_hot_phases(phases):
    return np.eye(4, dtype=np.int8)[np.asarray(phases, dtype=np.intp)]
