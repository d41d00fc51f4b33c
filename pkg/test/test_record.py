#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from buzzscope.errors import AlignmentError, ValidationError, FormatError
from buzzscope.record import RawChannels, WhaleRecord
from buzzscope.record import resample_depth, expand_buzz_labels, downsample_labels, rasterize_intervals
from buzzscope.record import build_record, positive_rate, read_raw, read_buzz_csv


def raw_channels(n_100, n_10, buzz, whale_id="w"):
    rng = np.random.default_rng(0)
    return RawChannels(
        accel_x  = rng.normal(0, 50, n_100),
        accel_y  = rng.normal(0, 50, n_100),
        accel_z  = rng.normal(0, 50, n_100),
        depth    = np.zeros(n_10),
        buzz     = buzz,
        whale_id = whale_id,
    )


class TestResample(unittest.TestCase):
    def test_constant(self):
        np.testing.assert_array_equal(resample_depth([5.0]*10, 100), np.full(100, 5.0))

    def test_ramp_and_hold(self):
        out = resample_depth([0.0, 10.0], 20)
        np.testing.assert_allclose(out[:10], np.arange(10.0))
        np.testing.assert_array_equal(out[10:], np.full(10, 10.0))

    def test_single_sample(self):
        np.testing.assert_array_equal(resample_depth([7.3], 10), np.full(10, 7.3))

    def test_slack(self):
        self.assertEqual(len(resample_depth(np.zeros(10), 110)), 110)
        self.assertEqual(len(resample_depth(np.zeros(10), 90)), 90)
        with self.assertRaises(AlignmentError):
            resample_depth(np.zeros(10), 111)
        with self.assertRaises(AlignmentError):
            resample_depth([], 0)

    def test_no_overshoot(self):
        rng   = np.random.default_rng(1)
        depth = rng.uniform(0, 500, 300)
        out   = resample_depth(depth, 3005)
        self.assertEqual(out.min(), depth.min())
        self.assertEqual(out.max(), depth.max())


class TestLabels(unittest.TestCase):
    def test_expand(self):
        np.testing.assert_array_equal(expand_buzz_labels([0, 1, 0], 30), [0]*10 + [1]*10 + [0]*10)
        np.testing.assert_array_equal(expand_buzz_labels([0]*5, 50), np.zeros(50))
        np.testing.assert_array_equal(expand_buzz_labels([1], 12), np.ones(12))

    def test_expand_non_binary(self):
        with self.assertRaises(ValidationError):
            expand_buzz_labels([0, 2, 0], 30)

    def test_expand_then_downsample(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            buzz = rng.integers(0, 2, 50)
            np.testing.assert_array_equal(downsample_labels(expand_buzz_labels(buzz, 500)), buzz)

    def test_rasterize_half_open(self):
        buzz = rasterize_intervals([(1.0, 2.0)], 1000)
        self.assertEqual(buzz.sum(), 100)
        self.assertEqual(buzz[99], 0)
        self.assertEqual(buzz[100], 1)
        self.assertEqual(buzz[199], 1)
        self.assertEqual(buzz[200], 0)

    def test_positive_rate(self):
        self.assertEqual(positive_rate(np.zeros(100)), 0.0)
        buzz = np.zeros(10000, dtype=np.int8)
        buzz[500:600] = 1
        self.assertAlmostEqual(positive_rate(buzz), 0.01)
        with self.assertRaises(ValidationError):
            positive_rate([])


class TestBuildRecord(unittest.TestCase):
    def test_interval(self):
        record = build_record(raw_channels(1000, 100, [(1.0, 2.0)]))
        self.assertEqual(len(record), 1000)
        self.assertEqual(record.buzz.sum(), 100)
        self.assertTrue(record.buzz[100:200].all())

    def test_empty_intervals(self):
        record = build_record(raw_channels(1000, 100, []))
        self.assertEqual(record.buzz.sum(), 0)

    def test_overlapping_intervals(self):
        with self.assertRaises(ValidationError):
            raw_channels(1000, 100, [(1.0, 2.0), (1.5, 3.0)])

    def test_sampled_labels(self):
        buzz = np.zeros(100, dtype=np.int8)
        buzz[10:20] = 1
        record = build_record(raw_channels(1005, 100, buzz))
        self.assertEqual(len(record), 1005)
        self.assertEqual(record.buzz.sum(), 100)

    def test_length_matches_accel(self):
        for n_100 in [990, 995, 1000, 1005, 1010]:
            self.assertEqual(len(build_record(raw_channels(n_100, 100, []))), n_100)
        with self.assertRaises(AlignmentError):
            raw_channels(1011, 100, [])

    def test_depth_floor(self):
        n = 10
        with self.assertRaises(ValidationError):
            WhaleRecord("w", np.zeros(n), np.zeros(n), np.zeros(n), np.full(n, -1.5),
                        np.zeros(n), np.zeros(n))
        WhaleRecord("w", np.zeros(n), np.zeros(n), np.zeros(n), np.full(n, -0.5), np.zeros(n), np.zeros(n))

    def test_record_is_read_only(self):
        record = build_record(raw_channels(1000, 100, []))
        with self.assertRaises(ValueError):
            record.ax[0] = 1.0

    def test_slice(self):
        record = build_record(raw_channels(1000, 100, [(1.0, 2.0)]))
        part   = record.slice(150, 400)
        self.assertEqual(len(part), 250)
        self.assertEqual(part.buzz.sum(), 50)


class TestIngest(unittest.TestCase):
    def write_whale(self, tmp, name, n_seconds, intervals):
        n_100 = n_seconds*100
        n_10  = n_seconds*10
        rng   = np.random.default_rng(len(name))
        accel = os.path.join(tmp, f"{name}_accel.csv")
        depth = os.path.join(tmp, f"{name}_depth.csv")
        buzz  = os.path.join(tmp, f"{name}_buzz.csv")
        pd.DataFrame({"idx": np.arange(n_100), "ax_mG": rng.normal(0, 50, n_100),
                      "ay_mG": rng.normal(0, 50, n_100), "az_mG": rng.normal(0, 50, n_100)}).to_csv(accel, index=False)
        pd.DataFrame({"idx": np.arange(n_10), "depth_m": np.zeros(n_10)}).to_csv(depth, index=False)
        pd.DataFrame({"start_s": [s for s, _ in intervals], "end_s": [e for _, e in intervals]}).to_csv(buzz, index=False)
        return accel, depth, buzz

    def test_concatenate(self):
        with tempfile.TemporaryDirectory() as tmp:
            a1, d1, b1 = self.write_whale(tmp, "a", 10, [(2.0, 3.0)])
            a2, d2, b2 = self.write_whale(tmp, "bb", 10, [(1.0, 1.5)])
            raw    = read_raw([a1, a2], [d1, d2], [b1, b2], whale_id="w1")
            record = build_record(raw)
            self.assertEqual(len(record), 2000)
            self.assertEqual(raw.buzz, [(2.0, 3.0), (11.0, 11.5)])
            self.assertEqual(record.buzz.sum(), 150)
            self.assertEqual(record.buzz[1100], 1)
            self.assertEqual(record.whale_id, "w1")

    def test_skip_hours(self):
        with tempfile.TemporaryDirectory() as tmp:
            a1, d1, b1 = self.write_whale(tmp, "a", 10, [(2.0, 3.0)])
            a2, d2, b2 = self.write_whale(tmp, "bb", 10, [(1.0, 1.5)])
            record = build_record(read_raw([a1, a2], [d1, d2], [b1, b2], skip_hours=1/3600))
            self.assertEqual(len(record), 1900)
            self.assertEqual(record.buzz.sum(), 150)
            self.assertEqual(record.buzz[99], 0)
            self.assertEqual(record.buzz[100], 1)

    def test_sampled_buzz_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "buzz.csv")
            pd.DataFrame({"idx": np.arange(5), "buzz": [0, 1, 1, 0, 0]}).to_csv(filename, index=False)
            np.testing.assert_array_equal(read_buzz_csv(filename), [0, 1, 1, 0, 0])

    def test_bad_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            a1, d1, b1 = self.write_whale(tmp, "a", 10, [])
            with open(d1, "w") as f:
                f.write("idx,depth\n0,1.0\n")
            with self.assertRaises(FormatError) as cm:
                read_raw([a1], [d1], [b1])
            self.assertIn(f"{d1}:1:", str(cm.exception))

    def test_bad_value_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            a1, d1, b1 = self.write_whale(tmp, "a", 10, [])
            with open(d1, "w") as f:
                f.write("idx,depth_m\n0,1.0\n1,\n")
            with self.assertRaises(FormatError) as cm:
                read_raw([a1], [d1], [b1])
            self.assertIn(f"{d1}:3:", str(cm.exception))

    def test_buzz_file_count(self):
        with tempfile.TemporaryDirectory() as tmp:
            a1, d1, b1 = self.write_whale(tmp, "a", 10, [(1.0, 2.0)])
            a2, d2, _  = self.write_whale(tmp, "b", 10, [])
            with self.assertRaises(FormatError) as cm:
                read_raw([a1, a2], [d1, d2], [b1])
            self.assertIn("1 buzz interval file(s) for 2 accelerometer file(s)", str(cm.exception))
            self.assertIn(b1, str(cm.exception))

    def test_sampled_buzz_idx(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "buzz.csv")
            for idx, line in [([0, 1, 3, 4, 5], 4), ([1, 2, 3, 4, 5], 2), ([0, 1, 2, 2, 3], 5)]:
                pd.DataFrame({"idx": idx, "buzz": [0, 1, 1, 0, 0]}).to_csv(filename, index=False)
                with self.assertRaises(FormatError) as cm:
                    read_buzz_csv(filename)
                self.assertIn(f"{filename}:{line}:", str(cm.exception))
