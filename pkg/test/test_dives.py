#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import unittest

import numpy as np

from buzzscope.dives import DivePhase, detect_dives, annotate_phases, segment_phases
from buzzscope.dives import one_hot_phase, one_hot_phases, contiguous_regions


def triangle(peak, seconds=60, sample_rate=100):
    t = np.arange(seconds*sample_rate)/sample_rate
    return peak*np.clip(1 - np.abs(t - seconds/2)/(seconds/2), 0, None)

def trapezoid():
    return np.concatenate([np.zeros(500), np.linspace(0, 100, 1000), np.full(2000, 100.0),
                           np.linspace(100, 0, 1000), np.zeros(500)])

def runs(values):
    values = np.asarray(values)
    keep   = np.concatenate([[True], values[1:] != values[:-1]])
    return values[keep].tolist()


class TestDives(unittest.TestCase):
    def test_flat(self):
        self.assertEqual(detect_dives(np.zeros(1000)), [])

    def test_triangle(self):
        depth = triangle(30)
        dives = detect_dives(depth)
        self.assertEqual(len(dives), 1)
        dive  = dives[0]
        self.assertLessEqual(abs(dive.start_idx - 1000), 1)
        self.assertLessEqual(abs(dive.end_idx - 5000), 1)
        self.assertEqual(dive.max_depth_m, 30.0)
        self.assertLessEqual(abs(dive.bottom_start_idx - 2250), 1)
        self.assertLessEqual(abs(dive.bottom_end_idx - 3751), 1)

    def test_shallow_excursion(self):
        self.assertEqual(detect_dives(triangle(15)), [])

    def test_bottom_matches_threshold(self):
        depth = triangle(40)
        phase = annotate_phases(depth)
        np.testing.assert_array_equal(phase == DivePhase.BOTTOM, depth >= 0.75*depth.max())

    def test_onset_is_surface(self):
        depth = np.concatenate([np.zeros(100), np.full(100, 10.0), np.full(100, 25.0),
                                np.full(100, 10.0), np.zeros(100)])
        dives = detect_dives(depth)
        self.assertEqual([(d.start_idx, d.end_idx) for d in dives], [(200, 300)])

    def test_square_dive(self):
        depth = np.zeros(4000)
        depth[1000:3000] = 50.0
        dive, = detect_dives(depth)
        self.assertEqual(dive.start_idx, 1000)
        self.assertEqual(dive.bottom_start_idx, 1000)
        self.assertEqual(dive.bottom_end_idx, 3000)
        self.assertEqual(segment_phases(dive, depth).tolist(), [DivePhase.BOTTOM]*2000)

    def test_phase_order(self):
        phase = annotate_phases(trapezoid())
        self.assertEqual(runs(phase), [DivePhase.SURFACE, DivePhase.DESCENT, DivePhase.BOTTOM,
                                       DivePhase.ASCENT, DivePhase.SURFACE])

    def test_split_by_shallow_spike(self):
        depth = np.concatenate([np.zeros(50), np.full(100, 30.0), np.full(10, 5.0),
                                np.full(100, 30.0), np.zeros(50)])
        self.assertEqual(len(detect_dives(depth)), 2)
        self.assertEqual(len(detect_dives(depth, median_size=31)), 1)

    def test_time_shift(self):
        depth = trapezoid()
        for k in [1, 17, 250]:
            shifted = annotate_phases(np.concatenate([np.zeros(k), depth]))
            np.testing.assert_array_equal(shifted[k:], annotate_phases(depth))

    def test_dives_disjoint(self):
        rng   = np.random.default_rng(0)
        depth = np.abs(np.cumsum(rng.normal(0, 1, 20000)))
        dives = detect_dives(depth)
        for a, b in zip(dives, dives[1:]):
            self.assertLess(a.end_idx, b.start_idx)
        for d in dives:
            self.assertGreaterEqual(d.max_depth_m, 20.0)
            self.assertTrue(d.start_idx <= d.bottom_start_idx < d.bottom_end_idx <= d.end_idx)

    def test_one_hot(self):
        self.assertEqual(one_hot_phase(DivePhase.SURFACE).tolist(), [1, 0, 0, 0])
        self.assertEqual(one_hot_phase(DivePhase.BOTTOM).tolist(), [0, 0, 1, 0])
        encoded = one_hot_phases([0, 1, 2, 3, 2])
        self.assertEqual(encoded.shape, (5, 4))
        self.assertTrue((encoded.sum(axis=1) == 1).all())

    def test_contiguous_regions(self):
        starts, ends = contiguous_regions([0, 1, 1, 0, 1])
        self.assertEqual(starts.tolist(), [1, 4])
        self.assertEqual(ends.tolist(), [3, 5])
