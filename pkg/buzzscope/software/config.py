#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""Run configuration.

Config files are `key = value` lines; `#` starts a comment, blank lines are ignored. Keys are
RunConfig field names (dashes or underscores), tuples are comma separated.
"""

from dataclasses import dataclass, field, fields, replace, asdict

import numpy as np

from buzzscope.errors import ConfigError, FormatError
from buzzscope.synth import SynthConfig
from buzzscope.features import WindowSpec
from buzzscope.models.split import MODES
from buzzscope.models.logreg import LogRegConfig
from buzzscope.models.unet import UNetConfig, FILTER_GRID, BATCH_GRID, LR_GRID
from buzzscope.evaluation import OVERLAPS, DISTANCES
from buzzscope.jerk import DELAYS

MODELS = ["logreg", "forest", "unet"]


def _tuple(item, default):
    return field(default=default, metadata={"item": item})


@dataclass(frozen=True)
class RunConfig:
    # Run.
    seed          : int   = 0
    threads       : int   = 1
    output        : str   = "run"
    records       : tuple = _tuple(str, ())
    overwrite     : bool  = False

    # Synthetic whales (used when no records are given).
    n_whales                    : int   = 5
    duration_s                  : float = 7200.0
    dive_rate_per_hour          : float = 4.0
    buzz_rate_per_bottom_minute : float = 0.75
    buzz_std_multiplier         : float = 3.0
    baseline_accel_std_mG       : float = 50.0

    # Dives (median filter width in samples, 0 for none).
    median_size   : int   = 0

    # Ingestion.
    skip_hours    : float = 0.0

    # Tabular features.
    window_size   : int   = 100
    window_stride : int   = 50
    phase_mode    : str   = "center"
    label_mode    : str   = "majority"

    # Models.
    model         : str   = "unet"
    split         : str   = "chrono-60-20-20"
    n_trees       : int   = 2000
    class_weight  : str   = "balanced_subsample"
    logreg_tol    : float = 1e-6
    logreg_max_iter : int = 10000
    filters        : int   = 4
    depth          : int   = 4
    kernel         : int   = 5
    pool           : int   = 2
    segment_length : int   = 1024
    batch_size     : int   = 4
    lr             : float = 1e-3
    max_epochs     : int   = 301
    patience       : int   = 150
    dice_smooth    : float = 1.0
    grid           : bool  = False
    grid_whale     : str   = ""
    grid_filters   : tuple = _tuple(int,   FILTER_GRID)
    grid_batch     : tuple = _tuple(int,   BATCH_GRID)
    grid_lr        : tuple = _tuple(float, LR_GRID)

    # Evaluation.
    min_event_s   : float = 0.0
    overlaps      : tuple = _tuple(float, OVERLAPS)
    distances     : tuple = _tuple(float, DISTANCES)
    iou           : bool  = False

    # Jerks.
    threshold_min  : float = 0.0
    threshold_max  : float = 166000.0
    threshold_step : float = 2000.0
    delays         : tuple = _tuple(float, DELAYS)
    euclidean      : bool  = False

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model} (expected one of {', '.join(MODELS)})")
        if self.split not in MODES:
            raise ConfigError(f"unknown split {self.split} (expected one of {', '.join(MODES)})")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.median_size < 0:
            raise ConfigError("median_size must be >= 0")
        if self.n_whales < 1:
            raise ConfigError("n_whales must be >= 1")
        if self.threshold_step <= 0 or self.threshold_max < self.threshold_min:
            raise ConfigError("threshold sweep bounds are inconsistent")
        self.window_spec()
        self.unet_config().validate()
        return self

    def synth_config(self, index=0):
        return SynthConfig(
            duration_s                  = self.duration_s,
            dive_rate_per_hour          = self.dive_rate_per_hour,
            buzz_rate_per_bottom_minute = self.buzz_rate_per_bottom_minute,
            buzz_std_multiplier         = self.buzz_std_multiplier,
            baseline_accel_std_mG       = self.baseline_accel_std_mG,
            rng_seed                    = self.seed + index,
            whale_id                    = f"synth{index}",
        )

    def window_spec(self):
        return WindowSpec(self.window_size, self.window_stride)

    def logreg_config(self):
        return LogRegConfig(tol=self.logreg_tol, max_iter=self.logreg_max_iter)

    def unet_config(self):
        return UNetConfig(
            depth          = self.depth,
            filters        = self.filters,
            kernel         = self.kernel,
            pool           = self.pool,
            segment_length = self.segment_length,
            batch_size     = self.batch_size,
            lr             = self.lr,
            max_epochs     = self.max_epochs,
            patience       = self.patience,
            dice_smooth    = self.dice_smooth,
            seed           = self.seed,
        )

    def thresholds(self):
        return np.arange(self.threshold_min, self.threshold_max + self.threshold_step/2, self.threshold_step)

    def to_dict(self):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

# Parsing ------------------------------------------------------------------------------------------

_BOOLS = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}

def coerce(f, text):
    """Value of field `f` from its text form; raises ValueError on bad text."""
    text = text.strip()
    if f.type is bool:
        if text.lower() not in _BOOLS:
            raise ValueError(f"expected a boolean, got {text!r}")
        return _BOOLS[text.lower()]
    if f.type is tuple:
        item = f.metadata.get("item", str)
        return tuple(item(v.strip()) for v in text.split(",") if v.strip())
    return f.type(text)

def parse_config(lines, filename="<config>"):
    """Overrides {field: value} from `key = value` lines."""
    by_name   = {f.name: f for f in fields(RunConfig)}
    overrides = {}
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected 'key = value', got {line!r}", filename, n)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in by_name:
            raise FormatError(f"unknown key {key!r}", filename, n)
        try:
            overrides[key] = coerce(by_name[key], value)
        except ValueError as e:
            raise FormatError(f"bad value for {key}: {e}", filename, n) from e
    return overrides

def load_config(filename=None, **overrides):
    """RunConfig from defaults, then the config file, then `overrides` (None values ignored)."""
    values = {}
    if filename is not None:
        with open(filename) as f:
            values.update(parse_config(f, filename))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return replace(RunConfig(), **values).validate()
