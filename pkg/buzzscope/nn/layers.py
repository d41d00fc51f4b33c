#
# This file is part of BuzzScope.
#
# SPDX-License-Identifier: BSD-2-Clause

"""1D segmentation layers on (batch, channels, length) float64 arrays.

Every operation comes as a forward function and its exact adjoint. Forward results are checked
for NaN/Inf and a NumericHealthError names the operation that produced them.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from buzzscope.errors import ShapeError, ConfigError, NumericHealthError

# Helpers ------------------------------------------------------------------------------------------

def check_finite(op, x):
    if not np.isfinite(x).all():
        raise NumericHealthError(op)
    return x

def _check3(x, op):
    if x.ndim != 3:
        raise ShapeError(f"{op} expects (batch, channels, length), got shape {x.shape}")

# Conv1d -------------------------------------------------------------------------------------------

@dataclass
class Conv1dParams:
    weight  : np.ndarray  # (out_ch, in_ch, kernel)
    bias    : np.ndarray  # (out_ch,)
    padding : str = "zeros"

    def __post_init__(self):
        if self.weight.ndim != 3 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(f"conv weight {self.weight.shape} / bias {self.bias.shape} mismatch")
        if self.weight.shape[2] % 2 == 0:
            raise ConfigError(f"conv kernel must be odd, got {self.weight.shape[2]}")
        if self.padding != "zeros":
            raise ConfigError(f"unsupported padding mode {self.padding}")

    @property
    def kernel(self):
        return self.weight.shape[2]

    @classmethod
    def init(cls, rng, in_ch, out_ch, kernel):
        # He-style uniform bound sqrt(6/fan_in).
        bound = np.sqrt(6.0/(in_ch*kernel))
        return cls(
            weight = rng.uniform(-bound, bound, (out_ch, in_ch, kernel)),
            bias   = np.zeros(out_ch),
        )


def _pad_windows(x, kernel):
    half = kernel//2
    xp   = np.pad(x, ((0, 0), (0, 0), (half, half)))
    return sliding_window_view(xp, kernel, axis=2)  # (B, C, L, K)

def conv1d_forward(x, p):
    _check3(x, "conv1d")
    if x.shape[1] != p.weight.shape[1]:
        raise ShapeError(f"conv1d expects {p.weight.shape[1]} input channels, got {x.shape[1]}")
    out = np.tensordot(_pad_windows(x, p.kernel), p.weight, axes=([1, 3], [1, 2]))  # (B, L, O)
    out = out.transpose(0, 2, 1) + p.bias[None, :, None]
    return check_finite("conv1d", np.ascontiguousarray(out))

def conv1d_backward(x, p, grad_out):
    _check3(grad_out, "conv1d backward")
    if grad_out.shape != (x.shape[0], p.weight.shape[0], x.shape[2]):
        raise ShapeError(f"conv1d backward: grad shape {grad_out.shape} does not match forward output")
    grad_w = np.tensordot(grad_out, _pad_windows(x, p.kernel), axes=([0, 2], [0, 2]))  # (O, C, K)
    grad_b = grad_out.sum(axis=(0, 2))
    # Adjoint of a same-padded correlation: correlate grad_out with the flipped kernel.
    grad_x = np.tensordot(_pad_windows(grad_out, p.kernel), p.weight[:, :, ::-1], axes=([1, 3], [0, 2]))
    grad_x = np.ascontiguousarray(grad_x.transpose(0, 2, 1))
    return grad_x, grad_w, grad_b

# Max-pool -----------------------------------------------------------------------------------------

def maxpool1d(x, factor):
    _check3(x, "maxpool1d")
    if factor < 1:
        raise ConfigError(f"pool factor must be >= 1, got {factor}")
    b, c, n = x.shape
    if n % factor:
        raise ShapeError(f"maxpool1d: length {n} not divisible by {factor}")
    w      = x.reshape(b, c, n//factor, factor)
    argmax = np.argmax(w, axis=3)  # first max on ties
    out    = np.take_along_axis(w, argmax[..., None], axis=3)[..., 0]
    return check_finite("maxpool1d", out), argmax

def maxpool1d_backward(grad_out, argmax, factor):
    b, c, m = grad_out.shape
    grad    = np.zeros((b, c, m, factor))
    np.put_along_axis(grad, argmax[..., None], grad_out[..., None], axis=3)
    return grad.reshape(b, c, m*factor)

# Upsample -----------------------------------------------------------------------------------------

def upsample1d_nearest(x, factor):
    _check3(x, "upsample1d")
    if factor < 1:
        raise ConfigError(f"upsample factor must be >= 1, got {factor}")
    return np.repeat(x, factor, axis=2)

def upsample1d_backward(grad_out, factor):
    b, c, n = grad_out.shape
    return grad_out.reshape(b, c, n//factor, factor).sum(axis=3)

# Concat -------------------------------------------------------------------------------------------

def concat_channels(a, b):
    _check3(a, "concat")
    _check3(b, "concat")
    if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeError(f"concat: shapes {a.shape} and {b.shape} differ in batch or length")
    return np.concatenate([a, b], axis=1)

def concat_backward(grad_out, channels_a):
    return grad_out[:, :channels_a], grad_out[:, channels_a:]

# Pointwise ----------------------------------------------------------------------------------------

def relu(x):
    return np.maximum(x, 0.0)

def relu_backward(x, grad_out):
    return grad_out*(x > 0)

def sigmoid(x):
    return check_finite("sigmoid", expit(x))

def sigmoid_backward(y, grad_out):
    return grad_out*y*(1.0 - y)
