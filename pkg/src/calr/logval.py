"""Log-magnitude / phase representation of complex quantities.

Products of exponentially large and exponentially small factors appear
everywhere in the slab problem (for instance ``exp(2 k a)`` multiplying a
source moment that decays like ``exp(-2 k d0)``).  Keeping the natural log
of the modulus separately from the phase lets these be combined without
overflow or underflow; conversion back to a complex number only happens at
the end, when the result is known to be representable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TransformValue:
    """Complex value stored as ``exp(log_magnitude + 1j * phase)``.

    Both fields may be numpy arrays of matching shape.  A zero value has
    ``log_magnitude == -inf``.

    Attributes
    ----------
    log_magnitude : float or ndarray
        Natural logarithm of the modulus.
    phase : float or ndarray
        Argument in radians (not necessarily reduced to ``(-pi, pi]``).
    """

    log_magnitude: np.ndarray | float
    phase: np.ndarray | float = 0.0

    @classmethod
    def from_complex(cls, z) -> "TransformValue":
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            logm = np.log(np.abs(z))
        return cls(_squeeze(logm), _squeeze(np.angle(z)))

    @classmethod
    def from_log_real(cls, log_abs, sign=1.0) -> "TransformValue":
        """Build a real value from ``log|x|`` and its sign."""
        phase = np.where(np.asarray(sign) < 0, np.pi, 0.0)
        return cls(_squeeze(np.asarray(log_abs, dtype=float)), _squeeze(phase))

    @classmethod
    def zeros(cls, shape=()) -> "TransformValue":
        return cls(_squeeze(np.full(shape, -np.inf)), _squeeze(np.zeros(shape)))

    def to_complex(self):
        logm = np.asarray(self.log_magnitude, dtype=float)
        ph = np.asarray(self.phase, dtype=float)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            mag = np.exp(logm)
            z = mag * np.cos(ph) + 1j * mag * np.sin(ph)
        z = np.where(np.isneginf(logm), 0.0 + 0.0j, z)
        return _squeeze(z)

    def abs(self):
        with np.errstate(over="ignore", under="ignore"):
            return _squeeze(np.exp(np.asarray(self.log_magnitude, dtype=float)))

    def conj(self) -> "TransformValue":
        return TransformValue(self.log_magnitude, _squeeze(-np.asarray(self.phase)))

    def scale(self, log_factor, phase=0.0) -> "TransformValue":
        """Multiply by ``exp(log_factor + 1j * phase)``."""
        return TransformValue(
            _squeeze(np.asarray(self.log_magnitude) + log_factor),
            _squeeze(np.asarray(self.phase) + phase),
        )

    def __mul__(self, other):
        if isinstance(other, TransformValue):
            return TransformValue(
                _squeeze(np.asarray(self.log_magnitude) + other.log_magnitude),
                _squeeze(np.asarray(self.phase) + other.phase),
            )
        return self * TransformValue.from_complex(other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TransformValue):
            other = TransformValue.from_complex(other)
        return TransformValue(
            _squeeze(np.asarray(self.log_magnitude) - other.log_magnitude),
            _squeeze(np.asarray(self.phase) - other.phase),
        )

    def __add__(self, other):
        if not isinstance(other, TransformValue):
            other = TransformValue.from_complex(other)
        return log_add(self, other)

    def __getitem__(self, idx):
        return TransformValue(
            np.asarray(self.log_magnitude)[idx], np.asarray(self.phase)[idx]
        )


def log_add(u: TransformValue, v: TransformValue) -> TransformValue:
    """Sum of two values without leaving the log domain."""
    lu = np.asarray(u.log_magnitude, dtype=float)
    lv = np.asarray(v.log_magnitude, dtype=float)
    m = np.maximum(lu, lv)
    finite = np.isfinite(m)
    m0 = np.where(finite, m, 0.0)
    with np.errstate(under="ignore", invalid="ignore"):
        zu = np.exp(lu - m0 + 1j * np.asarray(u.phase))
        zv = np.exp(lv - m0 + 1j * np.asarray(v.phase))
    zu = np.where(np.isneginf(lu), 0.0, zu)
    zv = np.where(np.isneginf(lv), 0.0, zv)
    s = zu + zv
    with np.errstate(divide="ignore"):
        logm = np.where(finite, m0 + np.log(np.abs(s)), m)
    return TransformValue(_squeeze(logm), _squeeze(np.angle(s)))


def log1p_exp_complex(log_w, phase_w, sign=1.0):
    """Return ``log|1 + sign*w|`` and ``arg(1 + sign*w)`` for ``w`` given in log form.

    Stays accurate when ``|w|`` is huge by factoring ``w`` out.
    """
    log_w = np.asarray(log_w, dtype=float)
    phase_w = np.asarray(phase_w, dtype=float)
    small = log_w <= 0.0
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        w_small = np.exp(np.where(small, log_w, 0.0) + 1j * phase_w)
        z_small = 1.0 + sign * w_small
        # 1 + s*w = s*w * (1 + s/w)
        inv = np.exp(-np.where(small, 0.0, log_w) - 1j * phase_w)
        z_big = sign + inv
    with np.errstate(divide="ignore"):
        logm = np.where(small, np.log(np.abs(z_small)), log_w + np.log(np.abs(z_big)))
    ph = np.where(small, np.angle(z_small), phase_w + np.angle(z_big))
    return _squeeze(logm), _squeeze(ph)


def _squeeze(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x
