#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Seeded synthetic whale records.

Dives are trapezoids (linear descent, wiggling bottom, linear ascent) separated by surface
intervals. Buzzes are placed inside the bottom phases found by the dive segmentation and show
up in the accelerometer as a variance increase only: white zero-mean noise whose standard
deviation is multiplied by `buzz_std_multiplier` while the whale buzzes.
"""

import logging
from dataclasses import dataclass

import numpy as np

from buzzscope.errors import ConfigError
from buzzscope.record import RawChannels, build_record, resample_depth, rasterize_intervals
from buzzscope.record import SAMPLE_RATE, DEPTH_RATE, UPSAMPLE
from buzzscope.dives import detect_dives, DIVE_MIN_MAX

logger = logging.getLogger(__name__)

MAX_DIVE_DEPTH = 2000.0
MIN_SURFACE_S  = 30.0

# Config -------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    duration_s                  : float = 7200.0
    dive_rate_per_hour          : float = 4.0
    dive_depth_range_m          : tuple = (100.0, 400.0)
    bottom_duration_range_s     : tuple = (120.0, 480.0)
    vertical_speed_mps          : float = 1.5
    buzz_rate_per_bottom_minute : float = 0.75
    buzz_len_range_s            : tuple = (0.4, 6.7)
    baseline_accel_std_mG       : float = 50.0
    buzz_std_multiplier         : float = 3.0
    depth_noise_m               : float = 0.05
    depth_drift_m               : float = 0.2
    rng_seed                    : int   = 0
    whale_id                    : str   = "synth"

    def validate(self):
        for name in ["duration_s", "dive_rate_per_hour", "buzz_rate_per_bottom_minute",
                     "baseline_accel_std_mG", "depth_noise_m", "depth_drift_m"]:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be > 0")
        lo, hi = self.buzz_len_range_s
        if not (0 < lo <= hi < 60):
            raise ConfigError("buzz_len_range_s must lie within (0, 60)")
        if self.buzz_std_multiplier <= 1:
            raise ConfigError("buzz_std_multiplier must be > 1")
        if self.vertical_speed_mps <= 0:
            raise ConfigError("vertical_speed_mps must be > 0")
        lo, hi = self.dive_depth_range_m
        # Dives must clear the detection threshold after the bottom wiggle and stay physical.
        if not (DIVE_MIN_MAX/0.9 <= lo <= hi <= MAX_DIVE_DEPTH):
            raise ConfigError(f"dive_depth_range_m must lie within [{DIVE_MIN_MAX/0.9:.1f}, {MAX_DIVE_DEPTH}] m")
        b_lo, b_hi = self.bottom_duration_range_s
        if not (0 < b_lo <= b_hi):
            raise ConfigError("bottom_duration_range_s must be positive and ordered")
        if self.dive_rate_per_hour > 0 and self.longest_dive_s() + 2*MIN_SURFACE_S > self.duration_s:
            raise ConfigError(f"a {self.longest_dive_s():.0f} s dive does not fit in {self.duration_s} s")
        if self.depth_drift_m + 5*self.depth_noise_m >= 1.0:
            raise ConfigError("depth drift/noise would push the surface beyond the -1 m floor")

    def longest_dive_s(self):
        return 2*self.dive_depth_range_m[1]/self.vertical_speed_mps + self.bottom_duration_range_s[1]

    def expected_positive_rate(self, bottom_fraction):
        mean_len = sum(self.buzz_len_range_s)/2
        return self.buzz_rate_per_bottom_minute/60*mean_len*bottom_fraction

# Generator ----------------------------------------------------------------------------------------

def _dive_profile(rng, cfg):
    max_depth = rng.uniform(*cfg.dive_depth_range_m)
    bottom_s  = rng.uniform(*cfg.bottom_duration_range_s)
    travel_s  = max_depth/cfg.vertical_speed_mps
    n_travel  = max(int(round(travel_s*DEPTH_RATE)), 1)
    n_bottom  = max(int(round(bottom_s*DEPTH_RATE)), 1)
    descent   = np.linspace(0.0, max_depth, n_travel, endpoint=False)
    # Bottom wiggle keeps the bottom within 90-100% of the maximum depth.
    phase     = rng.uniform(0, 2*np.pi)
    cycles    = rng.uniform(1, 4)
    wiggle    = 0.05*max_depth*(1 + np.sin(phase + 2*np.pi*cycles*np.arange(n_bottom)/n_bottom))
    bottom    = max_depth - wiggle
    ascent    = np.linspace(max_depth, 0.0, n_travel + 1)[1:]
    return np.concatenate([descent, bottom, ascent])

def _depth_track(rng, cfg):
    n_10  = int(round(cfg.duration_s*DEPTH_RATE))
    depth = np.zeros(n_10)
    if cfg.dive_rate_per_hour > 0:
        mean_cycle_s = 3600.0/cfg.dive_rate_per_hour
        t = rng.uniform(MIN_SURFACE_S, max(mean_cycle_s/2, MIN_SURFACE_S + 1))
        while True:
            profile = _dive_profile(rng, cfg)
            start   = int(round(t*DEPTH_RATE))
            if start + len(profile) + MIN_SURFACE_S*DEPTH_RATE > n_10:
                break
            depth[start:start + len(profile)] = profile
            dive_s  = len(profile)/DEPTH_RATE
            surface = max(rng.exponential(max(mean_cycle_s - dive_s, 1.0)), MIN_SURFACE_S)
            t      += dive_s + surface
    drift = cfg.depth_drift_m*np.sin(np.pi*np.arange(n_10)/max(n_10, 1))
    noise = rng.normal(0.0, cfg.depth_noise_m, n_10) if cfg.depth_noise_m else 0.0
    return depth + drift + noise

def _place_buzzes(rng, cfg, dives):
    intervals = []
    lo, hi    = cfg.buzz_len_range_s
    for dive in dives:
        start_s = dive.bottom_start_idx/SAMPLE_RATE
        end_s   = dive.bottom_end_idx/SAMPLE_RATE
        span    = end_s - start_s
        n       = rng.poisson(cfg.buzz_rate_per_bottom_minute*span/60)
        placed  = []
        for _ in range(n):
            length = rng.uniform(lo, hi)
            if length >= span:
                continue
            s = rng.uniform(start_s, end_s - length)
            e = s + length
            # Reject overlaps (keeps a 0.1 s gap so rasterized events stay distinct).
            if any(s < pe + 0.1 and ps < e + 0.1 for ps, pe in placed):
                continue
            placed.append((s, e))
        intervals += sorted(placed)
    return intervals

def synth_generate(cfg=None):
    cfg = SynthConfig() if cfg is None else cfg
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)

    depth_10  = _depth_track(rng, cfg)
    n         = len(depth_10)*UPSAMPLE
    dives     = detect_dives(resample_depth(depth_10, n))
    intervals = _place_buzzes(rng, cfg, dives)

    buzz  = rasterize_intervals(intervals, n).astype(bool)
    std   = np.where(buzz, cfg.baseline_accel_std_mG*cfg.buzz_std_multiplier, cfg.baseline_accel_std_mG)
    accel = rng.normal(0.0, 1.0, (3, n))*std

    logger.debug(f"[synth] {cfg.whale_id}: {len(dives)} dives, {len(intervals)} buzzes")
    raw = RawChannels(
        accel_x  = accel[0],
        accel_y  = accel[1],
        accel_z  = accel[2],
        depth    = depth_10,
        buzz     = intervals,
        whale_id = cfg.whale_id,
    )
    return build_record(raw)
