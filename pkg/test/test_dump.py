#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import os
import json
import tempfile
import unittest
import zipfile

import numpy as np

from buzzscope.errors import FormatError
from buzzscope.synth import SynthConfig, synth_generate
from buzzscope.software.dump import *

dump = Dump()
dump.add(DumpVariable("idx", list(range(4))))
dump.add(DumpVariable("probability", [0.1, 0.25, 1/3, 0.9]))
dump.add(DumpVariable("precision", [None, 0.5, 1.0, None]))
dump.add(DumpVariable("flag", [True, False, True, False]))

record = synth_generate(SynthConfig(duration_s=60, dive_rate_per_hour=0, rng_seed=3, whale_id="w3"))


class TestDump(unittest.TestCase):
    def test_format_value(self):
        self.assertEqual(format_value(None), "")
        self.assertEqual(format_value(np.int8(3)), "3")
        self.assertEqual(format_value(True), "1")
        self.assertEqual(format_value(1/3), repr(1/3))
        self.assertEqual(format_value(np.float64(0.1)), "0.1")
        self.assertEqual(format_value("w1"), "w1")

    def test_columns(self):
        self.assertEqual(len(dump), 4)
        self.assertEqual(dump.get("idx"), [0, 1, 2, 3])
        self.assertEqual(list(dump.columns()), ["idx", "probability", "precision", "flag"])
        with self.assertRaises(KeyError):
            dump.get("missing")

    def test_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "dump.csv")
            CSVDump(dump).write(filename)
            with open(filename) as f:
                lines = f.read().splitlines()
            self.assertEqual(lines[0], "idx,probability,precision,flag")
            self.assertEqual(lines[1], "0,0.1,,1")
            self.assertEqual(lines[3], f"2,{1/3!r},1.0,1")
            frame = CSVDump().read(filename)
            np.testing.assert_allclose(frame["probability"], [0.1, 0.25, 1/3, 0.9], rtol=1e-15)
            self.assertTrue(np.isnan(frame["precision"][0]))

    def test_csv_read_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "empty.csv")
            open(filename, "w").close()
            with self.assertRaises(FormatError):
                CSVDump().read(filename)

    def test_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "dump.json")
            JSONDump(dump).write(filename)
            with open(filename) as f:
                data = json.load(f)
            self.assertEqual(data["precision"], [None, 0.5, 1.0, None])
            self.assertEqual(data["flag"], [True, False, True, False])
            filename = os.path.join(tmp, "data.json")
            JSONDump(data={"tp": np.int64(3), "r": np.float64(0.5), "ids": np.arange(2)}).write(filename)
            self.assertEqual(JSONDump().read(filename), {"tp": 3, "r": 0.5, "ids": [0, 1]})

    def test_save(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.assertIsInstance(save(dump, os.path.join(tmp, "dump.csv")), CSVDump)
            self.assertIsInstance(save(dump, os.path.join(tmp, "dump.json")), JSONDump)
            with self.assertRaises(NotImplementedError):
                save(dump, os.path.join(tmp, "dump.vcd"))


class TestRecordDump(unittest.TestCase):
    def test_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "w3.bzr")
            write_record(record, filename)
            back = read_record(filename)
            self.assertEqual(back.whale_id, "w3")
            self.assertIsNone(back.t0)
            for name in ["ax", "ay", "az", "depth", "phase", "buzz"]:
                np.testing.assert_array_equal(getattr(back, name), getattr(record, name))
                self.assertEqual(getattr(back, name).dtype, getattr(record, name).dtype)

    def test_deterministic_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            a = os.path.join(tmp, "a.bzr")
            b = os.path.join(tmp, "b.bzr")
            write_record(record, a)
            save(RecordDump.from_record(record), b)
            with open(a, "rb") as fa, open(b, "rb") as fb:
                self.assertEqual(fa.read(), fb.read())
        self.assertEqual(record_bytes(record), record_bytes(record))

    def test_t0(self):
        dump = RecordDump.from_record(record)
        dump.t0 = 1234.5
        self.assertIn("t0=1234.5\n", dump.write_metadata())

    def test_bad_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            filename = os.path.join(tmp, "bad.bzr")
            with open(filename, "w") as f:
                f.write("not a zip")
            with self.assertRaises(FormatError):
                read_record(filename)
            with zipfile.ZipFile(filename, "w") as z:
                z.writestr("version", "2")
                z.writestr("metadata", "")
            with self.assertRaises(FormatError) as cm:
                read_record(filename)
            self.assertIn("version", str(cm.exception))
