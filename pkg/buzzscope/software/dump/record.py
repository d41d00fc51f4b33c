#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Record container (.bzr).

A zip archive holding:

    version     "1"
    metadata    key=value lines: whale_id, t0, sample_rate, length, then one column<N>=name:dtype
                line per column
    <column>    raw little-endian samples, one member per column

Members are stored with a fixed timestamp so the same record always produces the same bytes.
"""

import io
import zipfile

import numpy as np

from buzzscope.errors import FormatError
from buzzscope.record import WhaleRecord
from buzzscope.software.dump.common import Dump, DumpVariable

VERSION   = "1"
COLUMNS   = [("ax", "<f8"), ("ay", "<f8"), ("az", "<f8"), ("depth", "<f8"), ("phase", "<i1"), ("buzz", "<i1")]
TIMESTAMP = (1980, 1, 1, 0, 0, 0)


class RecordDump(Dump):
    def __init__(self, dump=None, whale_id="whale", t0=None, sample_rate=100):
        Dump.__init__(self)
        self.variables   = [] if dump is None else dump.variables
        self.whale_id    = whale_id
        self.t0          = t0
        self.sample_rate = sample_rate

    @classmethod
    def from_record(cls, record):
        dump = cls(whale_id=record.whale_id, t0=record.t0, sample_rate=record.sample_rate)
        for name, dtype in COLUMNS:
            dump.add(DumpVariable(name, getattr(record, name), np.dtype(dtype)))
        return dump

    def to_record(self):
        return WhaleRecord(
            whale_id    = self.whale_id,
            t0          = self.t0,
            sample_rate = self.sample_rate,
            **{name: self.get(name) for name, _ in COLUMNS},
        )

    def write_metadata(self):
        r  = f"whale_id={self.whale_id}\n"
        r += f"t0={'' if self.t0 is None else repr(float(self.t0))}\n"
        r += f"sample_rate={self.sample_rate}\n"
        r += f"length={len(self)}\n"
        for i, variable in enumerate(self.variables):
            r += f"column{i}={variable.name}:{np.dtype(variable.dtype).newbyteorder('<').str}\n"
        return r

    def _writestr(self, z, name, data):
        info = zipfile.ZipInfo(name, date_time=TIMESTAMP)
        info.compress_type = zipfile.ZIP_DEFLATED
        info.external_attr = 0o644 << 16
        z.writestr(info, data)

    def write(self, filename):
        with zipfile.ZipFile(filename, "w") as z:
            self._writestr(z, "version", VERSION)
            self._writestr(z, "metadata", self.write_metadata())
            for variable in self.variables:
                dtype = np.dtype(variable.dtype).newbyteorder("<")
                self._writestr(z, variable.name, np.asarray(variable.values, dtype=dtype).tobytes())

    def read_metadata(self, text, filename):
        meta    = {}
        columns = []
        for n, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            if "=" not in line:
                raise FormatError(f"expected key=value, got {line!r}", f"{filename}/metadata", n)
            key, value = line.split("=", 1)
            if key.startswith("column"):
                name, _, dtype = value.partition(":")
                columns.append((name, dtype))
            else:
                meta[key] = value
        return meta, columns

    def read(self, filename):
        try:
            with zipfile.ZipFile(filename) as z:
                version = z.read("version").decode()
                if version != VERSION:
                    raise FormatError(f"record container version {version} is not supported", filename)
                meta, columns = self.read_metadata(z.read("metadata").decode(), filename)
                members = {name: z.read(name) for name, _ in columns}
        except (zipfile.BadZipFile, KeyError) as e:
            raise FormatError(f"not a record container ({e})", filename) from e
        try:
            self.whale_id    = meta["whale_id"]
            self.t0          = float(meta["t0"]) if meta.get("t0") else None
            self.sample_rate = int(meta["sample_rate"])
            length           = int(meta["length"])
        except (KeyError, ValueError) as e:
            raise FormatError(f"bad metadata ({e})", f"{filename}/metadata") from e
        self.variables = []
        for name, dtype in columns:
            values = np.frombuffer(members[name], dtype=np.dtype(dtype))
            if len(values) != length:
                raise FormatError(f"column {name} holds {len(values)} samples, expected {length}", filename)
            self.add(DumpVariable(name, values.astype(np.dtype(dtype).newbyteorder("=")), values.dtype))
        return self

# Helpers ------------------------------------------------------------------------------------------

def write_record(record, filename):
    RecordDump.from_record(record).write(filename)

def read_record(filename):
    return RecordDump().read(filename).to_record()

def record_bytes(record):
    buf = io.BytesIO()
    RecordDump.from_record(record).write(buf)
    return buf.getvalue()
