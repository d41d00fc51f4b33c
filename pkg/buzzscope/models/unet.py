#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""1D U-Net for per-sample buzz probabilities.

    encoder  D x (conv-ReLU, conv-ReLU, maxpool)      filters F, 2F, ..., 2^(D-1) F
    bottom   conv-ReLU, conv-ReLU                     2^D F
    decoder  D x (upsample, concat skip, conv-ReLU, conv-ReLU)
    head     width-1 conv + sigmoid                   1 channel

Inputs are ax, ay, az and depth, z-scored with training statistics stored in the model.
"""

import itertools
import logging
from dataclasses import dataclass, replace

import numpy as np

from buzzscope.errors import ConfigError, NumericHealthError
from buzzscope.nn import Conv1dParams, conv1d_forward, conv1d_backward
from buzzscope.nn import maxpool1d, maxpool1d_backward, upsample1d_nearest, upsample1d_backward
from buzzscope.nn import concat_channels, concat_backward, relu, relu_backward, sigmoid, sigmoid_backward
from buzzscope.nn import dice_loss, AdamState, adam_step, DICE_SMOOTH

logger = logging.getLogger(__name__)

FILTER_GRID     = (2, 4, 8, 16)
BATCH_GRID      = (2, 4, 8, 16)
LR_GRID         = (1e-2, 5e-3, 1e-3, 5e-4)
INPUT_CHANNELS  = 4

# Config -------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class UNetConfig:
    in_channels    : int   = INPUT_CHANNELS
    depth          : int   = 4
    filters        : int   = 4
    kernel         : int   = 5
    pool           : int   = 2
    segment_length : int   = 1024
    batch_size     : int   = 4
    lr             : float = 1e-3
    max_epochs     : int   = 301
    patience       : int   = 150
    dice_smooth    : float = DICE_SMOOTH
    seed           : int   = 0

    def validate(self):
        if self.in_channels != INPUT_CHANNELS:
            raise ConfigError(f"the U-Net reads {INPUT_CHANNELS} channels (ax, ay, az, depth)")
        if self.depth < 1 or self.filters < 1 or self.pool < 1:
            raise ConfigError("depth, filters and pool must be >= 1")
        if self.kernel < 1 or self.kernel % 2 == 0:
            raise ConfigError(f"kernel must be odd, got {self.kernel}")
        if self.segment_length % self.pool**self.depth:
            raise ConfigError(f"segment length {self.segment_length} is not divisible by "
                              f"{self.pool}^{self.depth} = {self.pool**self.depth}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1 or self.lr <= 0:
            raise ConfigError("batch_size, max_epochs, patience and lr must be positive")
        return self

# Model --------------------------------------------------------------------------------------------

class UNetModel:
    def __init__(self, cfg, params, norm_mean=None, norm_std=None):
        self.cfg       = cfg
        self.params    = params  # name -> Conv1dParams, in build order
        self.norm_mean = np.zeros(cfg.in_channels) if norm_mean is None else np.asarray(norm_mean, dtype=np.float64)
        self.norm_std  = np.ones(cfg.in_channels)  if norm_std  is None else np.asarray(norm_std,  dtype=np.float64)

    @property
    def names(self):
        return list(self.params.keys())

    @property
    def n_params(self):
        return sum(p.weight.size + p.bias.size for p in self.params.values())

    # Parameters as one flat list (weight, bias, weight, bias, ...) for the optimizer.
    def flat_params(self):
        return [a for p in self.params.values() for a in (p.weight, p.bias)]

    def set_flat_params(self, arrays):
        for i, name in enumerate(self.names):
            self.params[name] = Conv1dParams(arrays[2*i], arrays[2*i + 1])

    def snapshot(self):
        return [a.copy() for a in self.flat_params()]

    def set_normalization(self, x):
        """Per-channel mean/std over (segments, length) of raw training inputs."""
        self.norm_mean = x.mean(axis=(0, 2))
        std = x.std(axis=(0, 2))
        self.norm_std  = np.where(std > 0, std, 1.0)

    def normalize(self, x):
        return (x - self.norm_mean[None, :, None])/self.norm_std[None, :, None]

    # Forward/backward on normalized inputs (batch, 4, L).
    def _block(self, name, h, cache):
        for j in (1, 2):
            z = conv1d_forward(h, self.params[f"{name}_conv{j}"])
            cache[f"{name}_conv{j}"] = (h, z)
            h = relu(z)
        return h

    def _block_backward(self, name, g, cache, grads):
        for j in (2, 1):
            h, z = cache[f"{name}_conv{j}"]
            g = relu_backward(z, g)
            g, gw, gb = conv1d_backward(h, self.params[f"{name}_conv{j}"], g)
            grads[f"{name}_conv{j}"] = (gw, gb)
        return g

    def forward(self, x):
        cfg   = self.cfg
        cache = {}
        skips = []
        h     = x
        for i in range(cfg.depth):
            h = self._block(f"enc{i}", h, cache)
            skips.append(h)
            h, cache[f"pool{i}"] = maxpool1d(h, cfg.pool)
        h = self._block("bottom", h, cache)
        for i in reversed(range(cfg.depth)):
            h = upsample1d_nearest(h, cfg.pool)
            cache[f"cat{i}"] = h.shape[1]
            h = concat_channels(h, skips[i])
            h = self._block(f"dec{i}", h, cache)
        cache["head"] = h
        y = sigmoid(conv1d_forward(h, self.params["head"]))
        cache["out"] = y
        return y, cache

    def backward(self, cache, grad_y):
        cfg   = self.cfg
        grads = {}
        g = sigmoid_backward(cache["out"], grad_y)
        g, gw, gb = conv1d_backward(cache["head"], self.params["head"], g)
        grads["head"] = (gw, gb)
        skip_grads = {}
        for i in range(cfg.depth):
            g = self._block_backward(f"dec{i}", g, cache, grads)
            g, skip_grads[i] = concat_backward(g, cache[f"cat{i}"])
            g = upsample1d_backward(g, cfg.pool)
        g = self._block_backward("bottom", g, cache, grads)
        for i in reversed(range(cfg.depth)):
            g = maxpool1d_backward(g, cache[f"pool{i}"], cfg.pool) + skip_grads[i]
            g = self._block_backward(f"enc{i}", g, cache, grads)
        return [a for name in self.names for a in grads[name]], g

    def predict_segments(self, x, chunk=32):
        """Probabilities (n, L) for raw segments (n, 4, L)."""
        out = [self.forward(self.normalize(x[i:i + chunk]))[0][:, 0] for i in range(0, len(x), chunk)]
        return np.concatenate(out) if out else np.zeros((0, x.shape[2]))


def unet_build(cfg=UNetConfig()):
    cfg = cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    f   = [cfg.filters*2**i for i in range(cfg.depth + 1)]
    params = {}
    c_in   = cfg.in_channels
    for i in range(cfg.depth):
        params[f"enc{i}_conv1"] = Conv1dParams.init(rng, c_in, f[i], cfg.kernel)
        params[f"enc{i}_conv2"] = Conv1dParams.init(rng, f[i], f[i], cfg.kernel)
        c_in = f[i]
    params["bottom_conv1"] = Conv1dParams.init(rng, c_in, f[cfg.depth], cfg.kernel)
    params["bottom_conv2"] = Conv1dParams.init(rng, f[cfg.depth], f[cfg.depth], cfg.kernel)
    c_in = f[cfg.depth]
    for i in reversed(range(cfg.depth)):
        params[f"dec{i}_conv1"] = Conv1dParams.init(rng, c_in + f[i], f[i], cfg.kernel)
        params[f"dec{i}_conv2"] = Conv1dParams.init(rng, f[i], f[i], cfg.kernel)
        c_in = f[i]
    params["head"] = Conv1dParams.init(rng, c_in, 1, 1)
    model = UNetModel(cfg, params)
    logger.debug(f"[unet] built F={cfg.filters} D={cfg.depth} K={cfg.kernel}: {model.n_params} parameters")
    return model

# Training -----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EpochStats:
    epoch      : int
    train_dice : float
    val_dice   : float


@dataclass
class TrainResult:
    model      : UNetModel
    trace      : list
    best_epoch : int

    @property
    def best_val_dice(self):
        return min(s.val_dice for s in self.trace)


def segments(records, units, length):
    """Raw inputs (n, 4, L) and labels (n, 1, L) for (record, start) units."""
    x = np.zeros((len(units), INPUT_CHANNELS, length))
    y = np.zeros((len(units), 1, length))
    for k, (i, s) in enumerate(units):
        r = records[i]
        x[k] = [r.ax[s:s + length], r.ay[s:s + length], r.az[s:s + length], r.depth[s:s + length]]
        y[k, 0] = r.buzz[s:s + length]
    return x, y

def dataset_dice(model, x, y, smooth=DICE_SMOOTH, chunk=32):
    """Dice over a whole (normalized) set, accumulated chunk by chunk."""
    spg = sp = sg = 0.0
    for i in range(0, len(x), chunk):
        p    = model.forward(x[i:i + chunk])[0]
        g    = y[i:i + chunk]
        spg += float(np.sum(p*g))
        sp  += float(np.sum(p))
        sg  += float(np.sum(g))
    return 1.0 - (2.0*spg + smooth)/(sp + sg + smooth)

def unet_train(model, records, fold, cfg=None):
    cfg = (model.cfg if cfg is None else cfg).validate()
    L   = cfg.segment_length
    train_units = fold.units(records, L, L, "train")
    val_units   = fold.units(records, L, L, "val")
    if not train_units or not val_units:
        raise ConfigError(f"need training and validation segments of {L} samples "
                          f"(got {len(train_units)} / {len(val_units)})")
    x_train, y_train = segments(records, train_units, L)
    x_val,   y_val   = segments(records, val_units, L)
    model.set_normalization(x_train)
    x_train = model.normalize(x_train)
    x_val   = model.normalize(x_val)
    logger.info(f"[training] {len(train_units)} train / {len(val_units)} val segments, "
                f"F={cfg.filters} batch={cfg.batch_size} lr={cfg.lr}")

    rng   = np.random.default_rng(cfg.seed)
    state = AdamState.init(model.flat_params(), lr=cfg.lr)
    best_val, best_epoch, best_params = np.inf, 0, model.snapshot()
    trace = []
    for epoch in range(1, cfg.max_epochs + 1):
        order  = rng.permutation(len(x_train))
        losses = []
        for b, start in enumerate(range(0, len(order), cfg.batch_size)):
            idx = order[start:start + cfg.batch_size]
            try:
                p, cache    = model.forward(x_train[idx])
                loss, grad  = dice_loss(p, y_train[idx], cfg.dice_smooth)
                grads, _    = model.backward(cache, grad)
            except NumericHealthError as e:
                raise e.with_context(f"epoch {epoch}, batch {b}") from e
            params, state = adam_step(model.flat_params(), grads, state)
            model.set_flat_params(params)
            losses.append(loss)
        val_dice = dataset_dice(model, x_val, y_val, cfg.dice_smooth)
        trace.append(EpochStats(epoch, float(np.mean(losses)), val_dice))
        logger.debug(f"[training] epoch {epoch} train_dice={trace[-1].train_dice:.4f} val_dice={val_dice:.4f}")
        if val_dice < best_val:
            best_val, best_epoch, best_params = val_dice, epoch, model.snapshot()
        elif epoch - best_epoch >= cfg.patience:
            logger.info(f"[training] early stop at epoch {epoch} (best {best_epoch})")
            break
    model.set_flat_params(best_params)
    logger.info(f"[training] best epoch {best_epoch}, val_dice={best_val:.4f}")
    return TrainResult(model, trace, best_epoch)

def unet_grid_search(records, fold, base_cfg=UNetConfig(), filters=FILTER_GRID, batch_sizes=BATCH_GRID,
                     lrs=LR_GRID):
    """Train every (filters, batch, lr) combination; best = lowest validation Dice."""
    results = []
    best    = None
    for f, bs, lr in itertools.product(filters, batch_sizes, lrs):
        cfg    = replace(base_cfg, filters=f, batch_size=bs, lr=lr)
        result = unet_train(unet_build(cfg), records, fold, cfg)
        results.append((cfg, result.best_val_dice, result.best_epoch))
        if best is None or result.best_val_dice < best.best_val_dice:
            best = result
    return best, results
