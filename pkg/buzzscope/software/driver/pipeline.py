#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import os
import time
import logging
import platform
from contextlib import contextmanager

import numpy as np
import pandas as pd
import scipy
import sklearn
import joblib

from buzzscope import __version__
from buzzscope.errors import BuzzScopeError, ConfigError, FormatError, ValidationError
from buzzscope.synth import synth_generate
from buzzscope.dives import detect_dives
from buzzscope.features import COLUMNS, featurize, feature_matrix
from buzzscope.models import split, logreg_fit, rf_fit, unet_build, unet_train, unet_grid_search
from buzzscope.models import predict, checkpoint_save
from buzzscope.evaluation import extract_events, match_report, dive_report, difference_histograms
from buzzscope.evaluation import bin_differences, count_correlation, combine_match_reports, combine_dive_reports
from buzzscope.jerk import jerk_windows, sweep, combine
from buzzscope.software.dump import Dump, CSVDump, JSONDump, save, write_record, read_record

logger = logging.getLogger(__name__)

# Stages -------------------------------------------------------------------------------------------

@contextmanager
def stage(name):
    """Tag errors raised inside the block with the pipeline stage they come from."""
    try:
        yield
    except (BuzzScopeError, OSError) as e:
        if getattr(e, "stage", None) is None:
            e.stage = name
        raise

def synth_records(cfg):
    return [synth_generate(cfg.synth_config(i)) for i in range(cfg.n_whales)]

def dive_columns(record, median_size=0):
    sr    = record.sample_rate
    dives = detect_dives(record.depth, median_size=median_size)
    return {
        "dive_id"        : list(range(len(dives))),
        "start_s"        : [d.start_idx/sr for d in dives],
        "end_s"          : [d.end_idx/sr for d in dives],
        "max_depth_m"    : [d.max_depth_m for d in dives],
        "bottom_start_s" : [d.bottom_start_idx/sr for d in dives],
        "bottom_end_s"   : [d.bottom_end_idx/sr for d in dives],
    }

def table_columns(table):
    return {c: table[c].tolist() for c in table.columns}

def read_features(filename):
    frame = CSVDump().read(filename)
    if list(frame.columns) != COLUMNS:
        raise FormatError(f"unexpected feature header (expected {','.join(COLUMNS)})", filename, 1)
    return frame

def fold_table(records, fold, cfg, role):
    """Feature rows of every window that lies entirely inside a `role` range."""
    spec   = cfg.window_spec()
    tables = []
    for i, record in enumerate(records):
        table = featurize(record, spec, cfg.phase_mode, cfg.label_mode)
        roles = fold.assign(i, spec.starts(len(record)), spec.size)
        tables.append(table[roles == role])
    return pd.concat(tables, ignore_index=True)

def fit_tabular(cfg, table):
    X, y = feature_matrix(table)
    if len(y) == 0:
        raise ValidationError("no training windows")
    if cfg.model == "logreg":
        return logreg_fit(X, y, cfg.logreg_config())
    return rf_fit(X, y, cfg.n_trees, cfg.seed, cfg.class_weight, n_jobs=cfg.threads)

def fit_unet(cfg, records, fold):
    """Trained U-Net, its epoch trace and (with grid search) the grid results."""
    ucfg = cfg.unet_config()
    grid = None
    if cfg.grid:
        tune_records, tune_fold = records, fold
        if cfg.grid_whale:
            tune_records = [r for r in records if r.whale_id == cfg.grid_whale]
            if not tune_records:
                raise ConfigError(f"grid whale {cfg.grid_whale} not found")
            tune_fold = split(tune_records, "chrono-60-20-20").fold
        best, grid = unet_grid_search(tune_records, tune_fold, ucfg,
                                      cfg.grid_filters, cfg.grid_batch, cfg.grid_lr)
        ucfg = best.model.cfg
        logger.info(f"[grid] best F={ucfg.filters} batch={ucfg.batch_size} lr={ucfg.lr} "
                    f"val_dice={best.best_val_dice:.4f}")
        if not cfg.grid_whale:
            return best, grid
    return unet_train(unet_build(ucfg), records, fold, ucfg), grid

def trace_columns(result):
    return {
        "epoch"      : [s.epoch for s in result.trace],
        "train_dice" : [s.train_dice for s in result.trace],
        "val_dice"   : [s.val_dice for s in result.trace],
    }

def grid_columns(grid):
    return {
        "filters"    : [c.filters for c, _, _ in grid],
        "batch_size" : [c.batch_size for c, _, _ in grid],
        "lr"         : [c.lr for c, _, _ in grid],
        "val_dice"   : [v for _, v, _ in grid],
        "best_epoch" : [e for _, _, e in grid],
    }

def prediction_columns(prediction):
    return {
        "idx"         : list(range(len(prediction.sample_labels))),
        "probability" : prediction.sample_probability.tolist(),
        "label"       : prediction.sample_labels.tolist(),
    }

def read_predictions(filename, n_samples=None):
    frame = CSVDump().read(filename)
    if list(frame.columns) != ["idx", "probability", "label"]:
        raise FormatError("unexpected prediction header (expected idx,probability,label)", filename, 1)
    labels = frame["label"].to_numpy(dtype=np.int8)
    if n_samples is not None and len(labels) != n_samples:
        raise ValidationError(f"{filename} holds {len(labels)} predictions for a {n_samples}-sample record")
    return labels

def evaluate_labels(record, labels, cfg):
    truths = extract_events(record.buzz, cfg.min_event_s, "truth", record.sample_rate)
    preds  = extract_events(labels, cfg.min_event_s, "prediction", record.sample_rate)
    match  = match_report(preds, truths, cfg.overlaps, cfg.distances, cfg.iou)
    dives  = dive_report(detect_dives(record.depth, median_size=cfg.median_size), preds, truths, record.sample_rate)
    return match, dives

def evaluation_outputs(match, dives):
    """Per-file payloads of an evaluation: name -> Dump."""
    diffs  = difference_histograms(dives)
    confusion = dict(dives.confusion(), count_correlation=count_correlation(dives),
                     surface_truth_count=dives.surface.truth_count, surface_pred_count=dives.surface.pred_count)
    centers, counts = bin_differences(diffs.count_diff)
    out = {}
    for name, columns in [("match_report.csv", match.columns()), ("dive_report.csv", dives.columns()),
                          ("differences.csv", diffs.columns()),
                          ("count_histogram.csv", {"count_diff": centers.tolist(), "dives": counts.tolist()})]:
        dump = Dump()
        dump.add_columns(columns)
        out[name] = dump
    out["confusion.json"] = JSONDump(data=confusion)
    return out

def jerk_sweep(record, cfg):
    rms, labels = jerk_windows(record, cfg.euclidean)
    return sweep(rms, labels, cfg.thresholds(), cfg.delays)

# Pipeline -----------------------------------------------------------------------------------------

class BuzzScopePipeline:
    """synth/ingest -> dives -> featurize -> train -> predict -> evaluate -> jerks, with a manifest."""
    def __init__(self, config, config_file=None):
        self.config      = config
        self.config_file = config_file
        self.inputs      = []
        self.outputs     = []
        self.t_start     = time.perf_counter()

    def path(self, *parts):
        filename = os.path.join(self.config.output, *parts)
        os.makedirs(os.path.dirname(filename), exist_ok=True)
        return filename

    def claim(self, *parts):
        """Output path, refused if it exists and --overwrite is off."""
        filename = self.path(*parts)
        if os.path.exists(filename) and not self.config.overwrite:
            raise ConfigError(f"{filename} exists (use --overwrite)")
        logger.info(f"[writing to {filename}]...")
        self.outputs.append(os.path.relpath(filename, self.config.output))
        return filename

    def write(self, payload, *parts):
        filename = self.claim(*parts)
        if isinstance(payload, JSONDump):
            payload.write(filename)
        else:
            save(payload, filename)

    def write_columns(self, columns, *parts):
        dump = Dump()
        dump.add_columns(columns)
        self.write(dump, *parts)

    def load_records(self):
        cfg = self.config
        if cfg.records:
            with stage("ingest"):
                self.inputs = list(cfg.records)
                return [read_record(f) for f in cfg.records]
        with stage("synth"):
            logger.info(f"[synth] {cfg.n_whales} whales of {cfg.duration_s} s (seed {cfg.seed})")
            records = synth_records(cfg)
            for record in records:
                self.write_record(record)
            return records

    def write_record(self, record):
        write_record(record, self.claim("records", f"{record.whale_id}.bzr"))

    def run(self):
        cfg     = self.config
        records = self.load_records()

        with stage("dives"):
            for record in records:
                self.write_columns(dive_columns(record, cfg.median_size), "dives", f"{record.whale_id}.csv")

        if cfg.model != "unet":
            with stage("featurize"):
                spec = cfg.window_spec()
                for record in records:
                    table = featurize(record, spec, cfg.phase_mode, cfg.label_mode)
                    self.write_columns(table_columns(table), "features", f"{record.whale_id}.csv")

        plan    = split(records, cfg.split)
        matches = {}
        dives   = {}
        for fold in plan.folds:
            suffix = "" if len(plan.folds) == 1 else f"-{fold.name}"
            with stage("train"):
                model = self.train(records, fold, suffix)
            for part in fold.ranges("test"):
                record = records[part.record].slice(part.start, part.end)
                with stage("predict"):
                    prediction = predict(model, record, cfg.window_spec(), phase_mode=cfg.phase_mode)
                    self.write_columns(prediction_columns(prediction), "predictions", f"{record.whale_id}.csv")
                with stage("evaluate"):
                    matches[record.whale_id], dives[record.whale_id] = evaluate_labels(
                        record, prediction.sample_labels, cfg)

        with stage("evaluate"):
            for whale_id in matches:
                for name, payload in evaluation_outputs(matches[whale_id], dives[whale_id]).items():
                    self.write(payload, "evaluate", whale_id, name)
            match = combine_match_reports(list(matches.values()))
            dive  = combine_dive_reports(list(dives.values()))
            for name, payload in evaluation_outputs(match, dive).items():
                self.write(payload, "evaluate", name)
            logger.info(f"[evaluate] dives: precision={dive.precision} recall={dive.recall} "
                        f"count r={count_correlation(dive)}")

        with stage("jerks"):
            sweeps = []
            for record in records:
                result = jerk_sweep(record, cfg)
                sweeps.append(result)
                self.write_columns(result.columns(), "jerks", f"{record.whale_id}.csv")
            self.write_columns(combine(sweeps).columns(), "jerks", "jerks.csv")

        self.save()
        return match, dive

    def train(self, records, fold, suffix=""):
        cfg = self.config
        counts = fold.counts(records, cfg.segment_length if cfg.model == "unet" else cfg.window_size,
                             cfg.segment_length if cfg.model == "unet" else cfg.window_stride)
        logger.info(f"[training] {cfg.model} on fold {fold.name}: {counts}")
        if cfg.model == "unet":
            result, grid = fit_unet(cfg, records, fold)
            model = result.model
            self.write_columns(trace_columns(result), f"training{suffix}.csv")
            if grid is not None:
                self.write_columns(grid_columns(grid), f"grid{suffix}.csv")
        else:
            model = fit_tabular(cfg, fold_table(records, fold, cfg, "train"))
        checkpoint_save(model, self.claim(f"model{suffix}.bzsg"))
        return model

    def manifest(self):
        return {
            "config"      : self.config.to_dict(),
            "seed"        : self.config.seed,
            "versions"    : {
                "buzzscope"    : __version__,
                "python"       : platform.python_version(),
                "numpy"        : np.__version__,
                "scipy"        : scipy.__version__,
                "pandas"       : pd.__version__,
                "scikit-learn" : sklearn.__version__,
                "joblib"       : joblib.__version__,
            },
            "inputs"      : ([self.config_file] if self.config_file else []) + self.inputs,
            "outputs"     : self.outputs,
            "wall_time_s" : time.perf_counter() - self.t_start,
        }

    def save(self, filename="manifest.json"):
        path = self.path(filename)
        logger.info(f"[writing to {path}]...")
        JSONDump(data=self.manifest()).write(path)
        return path
