#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Aligned multichannel whale records.

Accelerometer channels are sampled at 100 Hz (mG), depth and buzz labels at 10 Hz. A
`WhaleRecord` holds everything on the 100 Hz grid: ax, ay, az, depth (m, positive down),
the dive phase of every sample and the binary buzz label.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from buzzscope.errors import AlignmentError, ValidationError, FormatError
from buzzscope.dives import annotate_phases

logger = logging.getLogger(__name__)

SAMPLE_RATE  = 100
DEPTH_RATE   = 10
UPSAMPLE     = SAMPLE_RATE // DEPTH_RATE
DEPTH_FLOOR  = -1.0

# Helpers ------------------------------------------------------------------------------------------

def _frozen(values, dtype):
    a = np.array(values, dtype=dtype)
    a.flags.writeable = False
    return a

def _check_slack(n_10, target_len):
    if abs(UPSAMPLE*n_10 - target_len) > UPSAMPLE:
        raise AlignmentError(
            f"{n_10} samples at {DEPTH_RATE} Hz cannot be aligned to {target_len} samples at "
            f"{SAMPLE_RATE} Hz (slack is one {DEPTH_RATE} Hz sample)")

def _check_binary(values, name):
    values = np.asarray(values)
    if values.size and not np.isin(values, (0, 1)).all():
        raise ValidationError(f"{name} labels must be 0 or 1")
    return values.astype(np.int8)

# Types --------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class RawChannels:
    accel_x  : np.ndarray
    accel_y  : np.ndarray
    accel_z  : np.ndarray
    depth    : np.ndarray
    buzz     : object  # 10 Hz binary sequence or list of (start_s, end_s)
    whale_id : str = "whale"
    t0       : float = None

    def __post_init__(self):
        n = len(self.accel_x)
        if len(self.accel_y) != n or len(self.accel_z) != n:
            raise AlignmentError("accelerometer channels have different lengths")
        if len(self.depth) == 0:
            raise AlignmentError("depth channel is empty")
        _check_slack(len(self.depth), n)
        if self.buzz_is_intervals():
            check_intervals(self.buzz, n/SAMPLE_RATE)
        elif len(self.buzz) != len(self.depth):
            raise AlignmentError(
                f"buzz ({len(self.buzz)}) and depth ({len(self.depth)}) lengths differ at {DEPTH_RATE} Hz")

    def buzz_is_intervals(self):
        if isinstance(self.buzz, np.ndarray):
            return self.buzz.ndim == 2
        if len(self.buzz) == 0:
            return True
        return isinstance(self.buzz[0], (tuple, list))

    @property
    def duration(self):
        return len(self.accel_x)/SAMPLE_RATE


@dataclass(frozen=True)
class WhaleRecord:
    whale_id : str
    ax       : np.ndarray
    ay       : np.ndarray
    az       : np.ndarray
    depth    : np.ndarray
    phase    : np.ndarray
    buzz     : np.ndarray
    t0       : float = None
    sample_rate : int = field(default=SAMPLE_RATE)

    def __post_init__(self):
        for name, dtype in [("ax", np.float64), ("ay", np.float64), ("az", np.float64),
                            ("depth", np.float64), ("phase", np.int8), ("buzz", np.int8)]:
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))
        n = len(self.ax)
        for name in ["ay", "az", "depth", "phase", "buzz"]:
            if len(getattr(self, name)) != n:
                raise AlignmentError(f"{name} has {len(getattr(self, name))} samples, expected {n}")
        if n and self.depth.min() < DEPTH_FLOOR:
            raise ValidationError(f"depth below {DEPTH_FLOOR} m ({self.depth.min():.2f} m)")
        _check_binary(self.buzz, "buzz")
        if n and ((self.phase < 0) | (self.phase > 3)).any():
            raise ValidationError("phase values must be in 0..3")

    def __len__(self):
        return len(self.ax)

    @property
    def duration(self):
        return len(self)/self.sample_rate

    @property
    def accel(self):
        return np.stack([self.ax, self.ay, self.az])

    def slice(self, start, end):
        """Sub-record over samples [start, end); phases are re-annotated on the slice."""
        t0 = None if self.t0 is None else self.t0 + start/self.sample_rate
        return WhaleRecord(
            whale_id = self.whale_id,
            ax       = self.ax[start:end],
            ay       = self.ay[start:end],
            az       = self.az[start:end],
            depth    = self.depth[start:end],
            phase    = annotate_phases(self.depth[start:end]),
            buzz     = self.buzz[start:end],
            t0       = t0,
        )

# Resampling ---------------------------------------------------------------------------------------

def resample_depth(depth_10hz, target_len):
    depth_10hz = np.asarray(depth_10hz, dtype=np.float64)
    if depth_10hz.size == 0:
        raise AlignmentError("depth channel is empty")
    _check_slack(len(depth_10hz), target_len)
    # Sample k of the 10 Hz series sits at 100 Hz index 10*k, beyond the last one depth is held.
    src = np.arange(len(depth_10hz))*UPSAMPLE
    return np.interp(np.arange(target_len), src, depth_10hz)

def expand_buzz_labels(buzz_10hz, target_len):
    buzz_10hz = _check_binary(buzz_10hz, "buzz")
    if buzz_10hz.size == 0:
        return np.zeros(target_len, dtype=np.int8)
    _check_slack(len(buzz_10hz), target_len)
    out = np.repeat(buzz_10hz, UPSAMPLE)[:target_len]
    if len(out) < target_len:
        out = np.concatenate([out, np.full(target_len - len(out), buzz_10hz[-1], dtype=np.int8)])
    return out

def downsample_labels(buzz, factor=UPSAMPLE):
    """Majority vote over blocks of `factor` samples (ties count as 1)."""
    buzz = np.asarray(buzz)
    n    = len(buzz)//factor
    return (buzz[:n*factor].reshape(n, factor).sum(axis=1)*2 >= factor).astype(np.int8)

def check_intervals(intervals, duration):
    last_end = 0.0
    for start, end in intervals:
        if not (0 <= start < end <= duration + 1e-9):
            raise ValidationError(f"buzz interval ({start}, {end}) outside [0, {duration}] or empty")
        if start < last_end:
            raise ValidationError(f"buzz interval ({start}, {end}) overlaps or is out of order")
        last_end = end

def rasterize_intervals(intervals, n_samples, sample_rate=SAMPLE_RATE):
    check_intervals(intervals, n_samples/sample_rate)
    buzz = np.zeros(n_samples, dtype=np.int8)
    for start, end in intervals:
        # Half-open [start, end) at sample resolution.
        i = int(np.ceil(round(start*sample_rate, 9)))
        j = int(np.ceil(round(end*sample_rate, 9)))
        buzz[i:min(j, n_samples)] = 1
    return buzz

# Build --------------------------------------------------------------------------------------------

def build_record(raw, median_size=0):
    n     = len(raw.accel_x)
    depth = resample_depth(raw.depth, n)
    if raw.buzz_is_intervals():
        buzz = rasterize_intervals(raw.buzz, n)
    else:
        buzz = expand_buzz_labels(raw.buzz, n)
    return WhaleRecord(
        whale_id = raw.whale_id,
        ax       = raw.accel_x,
        ay       = raw.accel_y,
        az       = raw.accel_z,
        depth    = depth,
        phase    = annotate_phases(depth, median_size=median_size),
        buzz     = buzz,
        t0       = raw.t0,
    )

def positive_rate(buzz):
    buzz = np.asarray(buzz)
    if buzz.size == 0:
        raise ValidationError("positive rate of an empty label sequence")
    return float(buzz.mean())

# Ingestion ----------------------------------------------------------------------------------------

def _read_csv(filename, columns):
    df = pd.read_csv(filename)
    df.columns = [c.strip() for c in df.columns]
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise FormatError(f"missing column(s) {', '.join(missing)}", filename, 1)
    bad = df[columns].isna().any(axis=1).to_numpy()
    if bad.any():
        raise FormatError("empty or non-numeric value", filename, int(np.argmax(bad)) + 2)
    return df

def read_buzz_csv(filename):
    """Buzz file in either `idx,buzz` (10 Hz) or `start_s,end_s` (intervals) form."""
    with open(filename) as f:
        header = [c.strip() for c in f.readline().split(",")]
    if header == ["start_s", "end_s"]:
        df = _read_csv(filename, header)
        return [(float(s), float(e)) for s, e in zip(df["start_s"], df["end_s"])]
    if header == ["idx", "buzz"]:
        df  = _read_csv(filename, header)
        idx = df["idx"].to_numpy()
        bad = np.flatnonzero(idx != np.arange(len(idx)))
        if bad.size:
            raise FormatError(f"idx must count up from 0, got {idx[bad[0]]} for sample {bad[0]}",
                              filename, int(bad[0]) + 2)
        return df["buzz"].to_numpy()
    raise FormatError(f"unknown buzz header {','.join(header)}", filename, 1)

def read_raw(accel_files, depth_files, buzz_files, whale_id="whale", skip_hours=0.0):
    """Read (and concatenate in order) raw channel files, then drop the first `skip_hours`."""
    accel = [_read_csv(f, ["idx", "ax_mG", "ay_mG", "az_mG"]) for f in accel_files]
    depth = pd.concat([_read_csv(f, ["idx", "depth_m"]) for f in depth_files])
    buzz  = [read_buzz_csv(f) for f in buzz_files]
    if all(isinstance(b, list) for b in buzz):
        if len(buzz) != len(accel):
            raise FormatError(f"{len(buzz)} buzz interval file(s) for {len(accel)} accelerometer file(s)",
                              buzz_files[0])
        offset, intervals = 0.0, []
        for a, b in zip(accel, buzz):
            intervals += [(s + offset, e + offset) for s, e in b]
            offset    += len(a)/SAMPLE_RATE
        buzz = intervals
    elif any(isinstance(b, list) for b in buzz):
        raise FormatError("buzz files mix interval and sampled forms", buzz_files[0])
    else:
        buzz = np.concatenate(buzz)
    accel = pd.concat(accel)

    skip = int(round(skip_hours*3600*DEPTH_RATE))
    if skip:
        logger.info(f"[skipping first {skip_hours} h]...")
        accel = accel.iloc[skip*UPSAMPLE:]
        depth = depth.iloc[skip:]
        if isinstance(buzz, list):
            cut  = skip/DEPTH_RATE
            buzz = [(max(s - cut, 0.0), e - cut) for s, e in buzz if e > cut]
        else:
            buzz = buzz[skip:]

    return RawChannels(
        accel_x  = accel["ax_mG"].to_numpy(dtype=np.float64),
        accel_y  = accel["ay_mG"].to_numpy(dtype=np.float64),
        accel_z  = accel["az_mG"].to_numpy(dtype=np.float64),
        depth    = depth["depth_m"].to_numpy(dtype=np.float64),
        buzz     = buzz,
        whale_id = whale_id,
    )
