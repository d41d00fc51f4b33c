#!/usr/bin/env python3

#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

import os
import sys
import logging
import argparse
from dataclasses import fields, replace

import pandas as pd

from buzzscope.errors import BuzzScopeError, ConfigError
from buzzscope.record import read_raw, build_record
from buzzscope.synth import synth_generate
from buzzscope.features import featurize
from buzzscope.jerk import combine
from buzzscope.models import split, predict, checkpoint_save, checkpoint_load
from buzzscope.software.config import RunConfig, MODELS, coerce, load_config
from buzzscope.software.dump import Dump, JSONDump, save, write_record, read_record
from buzzscope.software.driver.pipeline import BuzzScopePipeline, stage
from buzzscope.software.driver.pipeline import dive_columns, table_columns, read_features, fold_table
from buzzscope.software.driver.pipeline import fit_tabular, fit_unet, trace_columns, grid_columns
from buzzscope.software.driver.pipeline import prediction_columns, read_predictions, evaluate_labels
from buzzscope.software.driver.pipeline import evaluation_outputs, jerk_sweep

logger = logging.getLogger("buzzscope")

FIELDS = {f.name: f for f in fields(RunConfig)}

# Helpers ------------------------------------------------------------------------------------------

def add_option(parser, name, help, **kwargs):
    """Flag overriding RunConfig field `name`; its default is shown, its value is None unless given."""
    f       = FIELDS[name]
    default = getattr(RunConfig, name)
    if isinstance(default, tuple):
        default = ",".join(str(v) for v in default)
    help = f"{help} (default: {default})" if default != "" else help
    flag = "--" + name.replace("_", "-")
    if f.type is bool:
        parser.add_argument(flag, action="store_const", const=True, default=None, help=help)
    else:
        parser.add_argument(flag, default=None, type=lambda s: coerce(f, s), help=help, **kwargs)

def resolve(args):
    overrides = {name: getattr(args, name) for name in FIELDS if hasattr(args, name)}
    with stage("config"):
        return load_config(args.config, **overrides)

def write(payload, filename, overwrite):
    if os.path.exists(filename) and not overwrite:
        raise ConfigError(f"{filename} exists (use --overwrite)")
    dirname = os.path.dirname(filename)
    if dirname:
        os.makedirs(dirname, exist_ok=True)
    logger.info(f"[writing to {filename}]...")
    if isinstance(payload, JSONDump):
        payload.write(filename)
    else:
        save(payload, filename)

def write_columns(columns, filename, overwrite):
    dump = Dump()
    dump.add_columns(columns)
    write(dump, filename, overwrite)

# Subcommands --------------------------------------------------------------------------------------

def run_synth(args):
    cfg = resolve(args)
    with stage("synth"):
        synth = cfg.synth_config(0)
        if args.whale_id:
            synth = replace(synth, whale_id=args.whale_id)
        record = synth_generate(synth)
        if os.path.exists(args.output) and not cfg.overwrite:
            raise ConfigError(f"{args.output} exists (use --overwrite)")
        logger.info(f"[writing to {args.output}]...")
        write_record(record, args.output)

def run_ingest(args):
    cfg = resolve(args)
    with stage("ingest"):
        raw    = read_raw(args.accel_files, args.depth_files, args.buzz_files, args.whale_id, cfg.skip_hours)
        record = build_record(raw, cfg.median_size)
        if os.path.exists(args.output) and not cfg.overwrite:
            raise ConfigError(f"{args.output} exists (use --overwrite)")
        logger.info(f"[writing to {args.output}]...")
        write_record(record, args.output)

def run_dives(args):
    cfg = resolve(args)
    with stage("dives"):
        write_columns(dive_columns(read_record(args.record), cfg.median_size), args.output, cfg.overwrite)

def run_featurize(args):
    cfg = resolve(args)
    with stage("featurize"):
        table = featurize(read_record(args.record), cfg.window_spec(), cfg.phase_mode, cfg.label_mode)
        write_columns(table_columns(table), args.output, cfg.overwrite)

def run_train(args):
    cfg = resolve(args)
    with stage("train"):
        if args.features:
            if cfg.model == "unet":
                raise ConfigError("the U-Net trains on records (--records), not feature tables")
            table = pd.concat([read_features(f) for f in args.features], ignore_index=True)
            model = fit_tabular(cfg, table)
        elif cfg.records:
            records = [read_record(f) for f in cfg.records]
            plan    = split(records, cfg.split)
            if not 0 <= args.fold < len(plan.folds):
                raise ConfigError(f"fold {args.fold} out of range (0..{len(plan.folds) - 1})")
            fold = plan.folds[args.fold]
            if cfg.model == "unet":
                result, grid = fit_unet(cfg, records, fold)
                model = result.model
                if args.trace:
                    write_columns(trace_columns(result), args.trace, cfg.overwrite)
                if args.grid_results and grid is not None:
                    write_columns(grid_columns(grid), args.grid_results, cfg.overwrite)
            else:
                model = fit_tabular(cfg, fold_table(records, fold, cfg, "train"))
        else:
            raise ConfigError("train needs --records or --features")
        if os.path.exists(args.checkpoint) and not cfg.overwrite:
            raise ConfigError(f"{args.checkpoint} exists (use --overwrite)")
        checkpoint_save(model, args.checkpoint)

def run_predict(args):
    cfg = resolve(args)
    with stage("predict"):
        model      = checkpoint_load(args.checkpoint)
        prediction = predict(model, read_record(args.record), cfg.window_spec(), phase_mode=cfg.phase_mode)
        write_columns(prediction_columns(prediction), args.output, cfg.overwrite)

def run_evaluate(args):
    cfg = resolve(args)
    with stage("evaluate"):
        record       = read_record(args.record)
        labels       = read_predictions(args.predictions, len(record))
        match, dives = evaluate_labels(record, labels, cfg)
        for name, payload in evaluation_outputs(match, dives).items():
            write(payload, os.path.join(args.output, name), cfg.overwrite)

def run_jerks(args):
    cfg = resolve(args)
    with stage("jerks"):
        results = []
        for filename in args.record_files:
            record = read_record(filename)
            results.append(jerk_sweep(record, cfg))
            if len(args.record_files) > 1:
                stem, ext = os.path.splitext(args.output)
                write_columns(results[-1].columns(), f"{stem}-{record.whale_id}{ext}", cfg.overwrite)
        write_columns(combine(results).columns(), args.output, cfg.overwrite)

def run_pipeline(args):
    cfg = resolve(args)
    BuzzScopePipeline(cfg, args.config).run()

# Main ---------------------------------------------------------------------------------------------

def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="""BuzzScope buzz detection utility""")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config",    default=None,        help="Config file (key = value lines).")
    common.add_argument("--debug",     action="store_true", help="Debug logging.")
    add_option(common, "overwrite", "Replace existing output files.")
    add_option(common, "seed",      "Global seed.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Synth.
    p = subparsers.add_parser("synth", parents=[common], help="Generate a synthetic whale record.")
    p.add_argument("-o", "--output",   default="synth.bzr",  help="Record file (.bzr).")
    p.add_argument("--whale-id",       default=None,         help="Whale id (default: synth0).")
    add_option(p, "duration_s",                  "Record duration in seconds.")
    add_option(p, "dive_rate_per_hour",          "Dives per hour.")
    add_option(p, "buzz_rate_per_bottom_minute", "Buzzes per minute of bottom phase.")
    add_option(p, "buzz_std_multiplier",         "Accelerometer std multiplier during buzzes.")
    add_option(p, "baseline_accel_std_mG",       "Accelerometer noise std in mG.")
    p.set_defaults(func=run_synth)

    # Ingest.
    p = subparsers.add_parser("ingest", parents=[common], help="Build a record from raw channel CSVs.")
    p.add_argument("--accel",    nargs="+", required=True, dest="accel_files", help="Accelerometer CSV(s) (idx,ax_mG,ay_mG,az_mG).")
    p.add_argument("--depth",    nargs="+", required=True, dest="depth_files", help="Depth CSV(s) (idx,depth_m).")
    p.add_argument("--buzz",     nargs="+", required=True, dest="buzz_files", help="Buzz CSV(s) (idx,buzz or start_s,end_s).")
    p.add_argument("--whale-id", default="whale",          help="Whale id.")
    p.add_argument("-o", "--output", default="whale.bzr",  help="Record file (.bzr).")
    add_option(p, "skip_hours", "Hours dropped at the start of the concatenated data.")
    add_option(p, "median_size", "Depth median filter width for phases in samples, 0 for none.")
    p.set_defaults(func=run_ingest)

    # Dives.
    p = subparsers.add_parser("dives", parents=[common], help="Detect dives of a record.")
    p.add_argument("record",                              help="Record file (.bzr).")
    p.add_argument("-o", "--output", default="dives.csv", help="Dive CSV.")
    add_option(p, "median_size", "Depth median filter width in samples, 0 for none.")
    p.set_defaults(func=run_dives)

    # Featurize.
    p = subparsers.add_parser("featurize", parents=[common], help="Window features of a record.")
    p.add_argument("record",                                 help="Record file (.bzr).")
    p.add_argument("-o", "--output", default="features.csv", help="Feature CSV.")
    add_option(p, "window_size",   "Window size in samples.")
    add_option(p, "window_stride", "Window stride in samples.")
    add_option(p, "phase_mode",    "Window phase: center or majority.")
    add_option(p, "label_mode",    "Window label: majority or onset.")
    p.set_defaults(func=run_featurize)

    # Train.
    p = subparsers.add_parser("train", parents=[common], help="Train a detector.")
    p.add_argument("--records",  nargs="+", default=None, type=str, help="Record files (.bzr), split per --split.")
    p.add_argument("--features", nargs="+", default=None,           help="Feature CSVs (tabular models, all rows train).")
    p.add_argument("--fold",     default=0, type=int,               help="Fold to train (leave-one-whale-out).")
    p.add_argument("--checkpoint",   default="model.bzsg",          help="Checkpoint file.")
    p.add_argument("--trace",        default=None,                  help="Per-epoch CSV (U-Net).")
    p.add_argument("--grid-results", default=None,                  help="Grid search CSV (U-Net).")
    add_option(p, "model",           f"Model: {', '.join(MODELS)}.", choices=MODELS)
    add_option(p, "split",           "Split mode.")
    add_option(p, "threads",         "Worker threads (forest).")
    add_option(p, "n_trees",         "Forest size.")
    add_option(p, "class_weight",    "Forest class weights: balanced_subsample or none.")
    add_option(p, "logreg_tol",      "Logistic regression gradient tolerance.")
    add_option(p, "logreg_max_iter", "Logistic regression iteration cap.")
    add_option(p, "filters",         "U-Net first-layer filters.")
    add_option(p, "depth",           "U-Net levels.")
    add_option(p, "kernel",          "U-Net kernel size.")
    add_option(p, "pool",            "U-Net pool factor.")
    add_option(p, "segment_length",  "U-Net segment length in samples.")
    add_option(p, "batch_size",      "U-Net batch size.")
    add_option(p, "lr",              "U-Net learning rate.")
    add_option(p, "max_epochs",      "U-Net epochs.")
    add_option(p, "patience",        "U-Net early stop patience.")
    add_option(p, "dice_smooth",     "Dice smoothing.")
    add_option(p, "grid",            "U-Net grid search.")
    add_option(p, "grid_whale",      "Tune the grid on this whale only.")
    add_option(p, "window_size",     "Window size in samples.")
    add_option(p, "window_stride",   "Window stride in samples.")
    add_option(p, "phase_mode",      "Window phase: center or majority.")
    add_option(p, "label_mode",      "Window label: majority or onset.")
    p.set_defaults(func=run_train)

    # Predict.
    p = subparsers.add_parser("predict", parents=[common], help="Predict buzzes of a record.")
    p.add_argument("record",                                    help="Record file (.bzr).")
    p.add_argument("--checkpoint", default="model.bzsg",        help="Checkpoint file.")
    p.add_argument("-o", "--output", default="predictions.csv", help="Prediction CSV (100 Hz).")
    add_option(p, "window_size",   "Window size in samples.")
    add_option(p, "window_stride", "Window stride in samples.")
    add_option(p, "phase_mode",    "Window phase: center or majority.")
    p.set_defaults(func=run_predict)

    # Evaluate.
    p = subparsers.add_parser("evaluate", parents=[common], help="Evaluate predictions against a record.")
    p.add_argument("record",                                    help="Record file (.bzr).")
    p.add_argument("--predictions", default="predictions.csv",  help="Prediction CSV.")
    p.add_argument("-o", "--output", default="evaluate",        help="Output directory.")
    add_option(p, "min_event_s", "Minimum event length in seconds.")
    add_option(p, "overlaps",    "Overlap thresholds.")
    add_option(p, "distances",   "Distance thresholds in seconds.")
    add_option(p, "iou",         "Overlap as intersection over union.")
    add_option(p, "median_size", "Depth median filter width for dives in samples, 0 for none.")
    p.set_defaults(func=run_evaluate)

    # Jerks.
    p = subparsers.add_parser("jerks", parents=[common], help="Jerk threshold sweep.")
    p.add_argument("record_files", nargs="+", metavar="records", help="Record files (.bzr).")
    p.add_argument("-o", "--output", default="jerks.csv", help="Sweep CSV (all records combined).")
    add_option(p, "threshold_min",  "First threshold in mG/s.")
    add_option(p, "threshold_max",  "Last threshold in mG/s.")
    add_option(p, "threshold_step", "Threshold step in mG/s.")
    add_option(p, "delays",         "Delays in seconds.")
    add_option(p, "euclidean",      "Euclidean jerk norm instead of per-axis jerks.")
    p.set_defaults(func=run_jerks)

    # Pipeline.
    p = subparsers.add_parser("pipeline", parents=[common], help="Run every stage.")
    p.add_argument("--records", nargs="+", default=None, type=str, help="Record files (.bzr), synthetic when omitted.")
    for name in ["output", "model", "split", "threads", "n_whales", "duration_s", "n_trees", "filters",
                 "batch_size", "lr", "max_epochs", "patience", "segment_length", "grid", "grid_whale",
                 "median_size"]:
        add_option(p, name, name.replace("_", " ").capitalize() + ".")
    p.set_defaults(func=run_pipeline)

    args = parser.parse_args(argv)
    if getattr(args, "records", None) and args.command in ["train", "pipeline"]:
        args.records = tuple(args.records)
    return args

def main(argv=None):
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.INFO, format="%(message)s")
    try:
        args.func(args)
    except (BuzzScopeError, OSError) as e:
        print(f"error: [{getattr(e, 'stage', None) or args.command}] {e}", file=sys.stderr)
        return 1
    return 0

if __name__ == "__main__":
    sys.exit(main())
