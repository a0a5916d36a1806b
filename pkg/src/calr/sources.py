"""Charge densities behind the slab and their boundary-layer transforms.

Every source is real, has zero net charge and compact support in a box
``[d0, d1] x [h0, h1]`` with ``d0 > a``.  The partial Fourier transform in
``y`` uses the convention ``rho_hat(x, k) = int rho(x, y) exp(-i k y) dy``.

Two exponentially weighted moments drive the whole problem::

    I_k    = int rho_hat(s, k) exp(-|k| s) ds
    J_k(x) = int rho_hat(s, k) exp(-|k| (x - s)) ds,   x > d1

Both are returned as :class:`~calr.logval.TransformValue` because the
weights ``exp(-|k| d0)`` underflow long before the wavenumbers of interest.
Internally each source computes the *shifted* moments
``I_k exp(|k| d0)`` and ``J_k(x) exp(|k| (x - d1))``, which stay O(1).
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IntegrationError, InvalidParameterError
from .logval import TransformValue
from .quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES

# Exponent beyond which weights exp(-t) are dropped from quadratures.
_TRUNCATION_EXPONENT = 60.0


@dataclass(frozen=True)
class SupportBox:
    """Bounding box ``[d0, d1] x [h0, h1]`` of the source support."""

    d0: float
    d1: float
    h0: float
    h1: float

    def __post_init__(self):
        if not (self.d0 < self.d1 and self.h0 < self.h1):
            raise InvalidParameterError(f"degenerate support box {self}")

    @property
    def width(self) -> float:
        return self.d1 - self.d0

    @property
    def height(self) -> float:
        return self.h1 - self.h0


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


@dataclass(frozen=True)
class BoundConstants:
    """Sampled estimates of ``sup |I_k|/|k|``, ``sup_{k<=1} |J_k|/|k|`` and ``||rho||_2``."""

    C_I: float
    C_J: float
    l2_norm: float


class ChargeDensity(ABC):
    """Abstract real charge density with compact support and zero net charge."""

    kind = "abstract"

    @property
    @abstractmethod
    def support(self) -> SupportBox:
        ...

    @abstractmethod
    def evaluate(self, x, y):
        """Charge per unit area at ``(x, y)``."""

    @abstractmethod
    def rho_hat(self, x, k):
        """Partial Fourier transform in ``y`` at depth ``x``."""

    @abstractmethod
    def shifted_I(self, k):
        """``I_k * exp(|k| d0)`` as a complex array."""

    @abstractmethod
    def shifted_J(self, k):
        """``int rho_hat(s, k) exp(-|k| (d1 - s)) ds`` as a complex array."""

    @abstractmethod
    def _green_inside(self, x, k):
        """Kernel integral and its x-derivative for ``d0 < x < d1`` (complex)."""

    @property
    @abstractmethod
    def total_charge(self) -> float:
        ...

    @property
    @abstractmethod
    def abs_charge(self) -> float:
        """``int |rho|``."""

    @property
    @abstractmethod
    def l2_norm_sq(self) -> float:
        ...

    @abstractmethod
    def moment_C0(self) -> complex:
        """``-int s rho - i int y rho``, the slope of ``I_k`` at ``k = 0+``."""

    def I_envelope(self):
        """``(log_c, p)`` with ``|I_k| <= exp(log_c) |k|^(-p) exp(-|k| d0)``.

        The generic bound follows from Cauchy-Schwarz in both variables.
        """
        b = self.support
        return 0.5 * math.log(b.height * b.width * self.l2_norm_sq), 0.0

    @property
    def k_period(self) -> float:
        """Wavenumber scale of the oscillation of ``|I_k|``."""
        return 4.0 * math.pi / self.support.height

    @property
    def y_center(self) -> float:
        b = self.support
        return 0.5 * (b.h0 + b.h1)

    def with_charge(self, Q: float) -> "ChargeDensity":
        raise NotImplementedError

    # -- transforms in log form ------------------------------------------

    def transform_I(self, k, shifted: bool = False) -> TransformValue:
        """``I_k`` (or ``I_k exp(|k| d0)`` when ``shifted``) in log form."""
        k = _finite_k(k)
        tv = TransformValue.from_complex(self.shifted_I(k))
        if shifted:
            return tv
        return tv.scale(-np.abs(k) * self.support.d0)

    def transform_J(self, x: float, k) -> TransformValue:
        """``J_k(x)`` for ``x > d1`` in log form."""
        if not x > self.support.d1:
            raise InvalidParameterError(f"J_k(x) needs x > d1={self.support.d1}, got {x}")
        k = _finite_k(k)
        tv = TransformValue.from_complex(self.shifted_J(k))
        return tv.scale(-np.abs(k) * (x - self.support.d1))

    def green_integral(self, x: float, k):
        """``G(x,k) = int rho_hat(s,k) exp(-|k||x-s|) ds`` and ``dG/dx``.

        Returns
        -------
        (TransformValue, TransformValue)
        """
        k = _finite_k(k)
        kk = np.abs(k)
        b = self.support
        if x <= b.d0:
            g = TransformValue.from_complex(self.shifted_I(k)).scale(-kk * (b.d0 - x))
            with np.errstate(divide="ignore"):
                return g, g.scale(np.log(kk))
        if x >= b.d1:
            g = TransformValue.from_complex(self.shifted_J(k)).scale(-kk * (x - b.d1))
            with np.errstate(divide="ignore"):
                return g, g.scale(np.log(kk), np.pi)
        gv, dg = self._green_inside(x, k)
        return TransformValue.from_complex(gv), TransformValue.from_complex(dg)


def _finite_k(k):
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise InvalidParameterError("k must be finite")
    return k


def _safe_k(k):
    """``|k|`` with zeros replaced by 1 (callers patch the k = 0 limit)."""
    kk = np.abs(k)
    return np.where(kk == 0, 1.0, kk)


def _one_minus_exp_over_k(kk, length):
    """``(1 - exp(-kk*length)) / kk`` with its limit ``length`` at ``kk = 0``."""
    ks = np.where(kk == 0, 1.0, kk)
    return np.where(kk == 0, length, -np.expm1(-kk * length) / ks)


def _antisymmetric_profile(Q, y0, k):
    """``(4 Q / (i k)) exp(-i k y0)``; multiply by ``sin^2(k w / 2)`` for a slice of half-height ``w``."""
    ks = np.where(k == 0, 1.0, k)
    return np.where(k == 0, 0.0, 4.0 * Q / (1j * ks) * np.exp(-1j * k * y0))


@dataclass(frozen=True)
class RectangleSource(ChargeDensity):
    """``+Q`` on the upper half and ``-Q`` on the lower half of a rectangle.

    Parameters
    ----------
    x0, y0 : float
        Centre of the rectangle.
    d, h : float
        Half-width (in x) and half-height (in y).
    Q : float
        Charge density amplitude.
    """

    x0: float
    y0: float
    d: float
    h: float
    Q: float = 1.0
    kind = "rectangle"

    def __post_init__(self):
        if not (self.d > 0 and self.h > 0):
            raise InvalidParameterError("rectangle half-sizes must be positive")
        if not all(np.isfinite([self.x0, self.y0, self.d, self.h, self.Q])):
            raise InvalidParameterError("rectangle parameters must be finite")

    @property
    def support(self):
        return SupportBox(self.x0 - self.d, self.x0 + self.d, self.y0 - self.h, self.y0 + self.h)

    def with_charge(self, Q):
        return RectangleSource(self.x0, self.y0, self.d, self.h, Q)

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (np.abs(x - self.x0) <= self.d) & (np.abs(y - self.y0) <= self.h)
        return np.where(inside, self.Q * np.sign(y - self.y0), 0.0)

    def _column(self, k):
        k = np.asarray(k, dtype=float)
        return _antisymmetric_profile(self.Q, self.y0, k) * np.sin(0.5 * self.h * k) ** 2

    def rho_hat(self, x, k):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x - self.x0) <= self.d
        return np.where(inside, self._column(k), 0.0)

    def shifted_I(self, k):
        k = np.asarray(k, dtype=float)
        return self._column(k) * _one_minus_exp_over_k(np.abs(k), 2.0 * self.d)

    def shifted_J(self, k):
        return self.shifted_I(k)

    def _green_inside(self, x, k):
        kk = np.abs(np.asarray(k, dtype=float))
        b = self.support
        col = self._column(k)
        left = _one_minus_exp_over_k(kk, x - b.d0)
        right = _one_minus_exp_over_k(kk, b.d1 - x)
        dg = col * (np.exp(-kk * (x - b.d0)) - np.exp(-kk * (b.d1 - x)))
        return col * (left + right), dg

    def log_abs_I(self, k):
        """Closed form ``log|I_k|`` (used as an independent check)."""
        kk = np.abs(np.asarray(k, dtype=float))
        with np.errstate(divide="ignore"):
            return (math.log(4 * abs(self.Q)) - 2 * np.log(kk)
                    + 2 * np.log(np.abs(np.sin(0.5 * self.h * kk)))
                    - kk * self.support.d0 + np.log(-np.expm1(-2 * self.d * kk)))

    @property
    def total_charge(self):
        return 0.0

    @property
    def abs_charge(self):
        return 4.0 * self.d * self.h * abs(self.Q)

    @property
    def l2_norm_sq(self):
        return 4.0 * self.d * self.h * self.Q**2

    def moment_C0(self):
        return -1j * self.Q * (2.0 * self.d) * self.h**2

    def I_envelope(self):
        return math.log(4.0 * abs(self.Q)), 2.0


@dataclass(frozen=True)
class CircleSource(ChargeDensity):
    """``+Q`` on the upper half-disc and ``-Q`` on the lower half-disc.

    The transforms are integrals over the disc's x-extent; they are computed
    in the angle variable ``x = x0 + R sin(theta)``, which removes the
    square-root behaviour of the chord length at the ends.
    """

    x0: float
    y0: float
    R: float
    Q: float = 1.0
    kind = "circle"
    rtol: float = field(default=1e-13, repr=False)

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidParameterError("radius must be positive")
        if not all(np.isfinite([self.x0, self.y0, self.R, self.Q])):
            raise InvalidParameterError("circle parameters must be finite")

    @property
    def support(self):
        return SupportBox(self.x0 - self.R, self.x0 + self.R, self.y0 - self.R, self.y0 + self.R)

    def with_charge(self, Q):
        return CircleSource(self.x0, self.y0, self.R, Q)

    def half_chord(self, x):
        x = np.asarray(x, dtype=float)
        return np.sqrt(np.clip(self.R**2 - (x - self.x0) ** 2, 0.0, None))

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = (x - self.x0) ** 2 + (y - self.y0) ** 2 <= self.R**2
        return np.where(inside, self.Q * np.sign(y - self.y0), 0.0)

    def rho_hat(self, x, k):
        k = np.asarray(k, dtype=float)
        w = self.half_chord(x)
        return _antisymmetric_profile(self.Q, self.y0, k) * np.sin(0.5 * k * w) ** 2

    def _chord_integral(self, kk, lo, hi, exponent):
        """``R int_lo^hi sin^2(k R cos(t)/2) exp(exponent(t, k)) cos(t) dt`` per k.

        ``lo``, ``hi`` are per-k limits in angle.  Panels are no wider than
        ``pi / (k R + 1)``; the panel count is doubled until the embedded
        error estimate meets ``rtol``.
        """
        kk = np.atleast_1d(np.asarray(kk, dtype=float))
        lo = np.broadcast_to(lo, kk.shape).astype(float)
        hi = np.broadcast_to(hi, kk.shape).astype(float)
        out = np.zeros(kk.shape)
        span = np.maximum(hi - lo, 0.0)
        base = np.maximum(1, np.ceil(span * (kk * self.R + 1.0) / math.pi)).astype(int)
        order = np.argsort(base, kind="stable")
        budget = 200_000
        start = 0
        while start < order.size:
            nmax = base[order[start]]
            stop = start
            while stop < order.size and (stop - start + 1) * max(nmax, base[order[stop]]) * 15 <= budget:
                nmax = max(nmax, base[order[stop]])
                stop += 1
            stop = max(stop, start + 1)
            idx = order[start:stop]
            nmax = int(base[idx].max())
            out[idx] = self._chord_block(kk[idx], lo[idx], hi[idx], nmax, exponent)
            start = stop
        return out

    def _chord_block(self, kk, lo, hi, n, exponent):
        for _ in range(8):
            val, err = self._chord_fixed(kk, lo, hi, n, exponent)
            scale = np.maximum(np.abs(val), 1e-300)
            if np.all(err <= self.rtol * scale + 1e-300):
                return val
            n *= 2
        bad = int(np.argmax(err / scale))
        raise IntegrationError(
            f"circle transform did not converge at k={kk[bad]}", float(val[bad]), float(err[bad]))

    def _chord_fixed(self, kk, lo, hi, n, exponent):
        frac = np.linspace(0.0, 1.0, n + 1)
        edges = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
        a, b = edges[:, :-1], edges[:, 1:]
        half = 0.5 * (b - a)
        t = 0.5 * (a + b)[..., None] + half[..., None] * NODES
        kcol = kk[:, None, None]
        with np.errstate(under="ignore"):
            f = (np.sin(0.5 * kcol * self.R * np.cos(t)) ** 2
                 * np.exp(exponent(t, kcol)) * np.cos(t) * self.R)
        kr = np.einsum("ijm,m->ij", f, KRONROD_WEIGHTS) * half
        ga = np.einsum("ijm,m->ij", f, GAUSS_WEIGHTS) * half
        return kr.sum(axis=1), np.abs(kr - ga).sum(axis=1)

    def _shifted_chord(self, kk):
        """``int sin^2(k w(s)/2) exp(-k (s - d0)) ds`` for ``k >= 0``."""
        kr = kk * self.R
        hi = np.arcsin(np.clip(_TRUNCATION_EXPONENT / np.maximum(kr, 1e-300) - 1.0, -1.0, 1.0))
        R = self.R
        return self._chord_integral(kk, -0.5 * math.pi, hi,
                                    lambda t, k: -k * R * (1.0 + np.sin(t)))

    def shifted_I(self, k):
        k = np.asarray(k, dtype=float)
        s = self._shifted_chord(np.abs(k).ravel()).reshape(k.shape)
        return _antisymmetric_profile(self.Q, self.y0, k) * s

    def shifted_J(self, k):
        # the chord length is symmetric about x0, so the far-side weight
        # gives the same integral
        return self.shifted_I(k)

    def _green_inside(self, x, k):
        k = np.asarray(k, dtype=float)
        kk = np.abs(k).ravel()
        R = self.R
        sx = (x - self.x0) / R
        tx = math.asin(sx)
        kr = np.maximum(kk * R, 1e-300)
        lo = np.arcsin(np.clip(sx - _TRUNCATION_EXPONENT / kr, -1.0, 1.0))
        hi = np.arcsin(np.clip(sx + _TRUNCATION_EXPONENT / kr, -1.0, 1.0))
        left = self._chord_integral(kk, lo, tx, lambda t, q: -q * R * (sx - np.sin(t)))
        right = self._chord_integral(kk, tx, hi, lambda t, q: -q * R * (np.sin(t) - sx))
        prof = _antisymmetric_profile(self.Q, self.y0, k)
        left = left.reshape(k.shape)
        right = right.reshape(k.shape)
        return prof * (left + right), -np.abs(k) * prof * (left - right)

    @property
    def total_charge(self):
        return 0.0

    @property
    def abs_charge(self):
        return math.pi * self.R**2 * abs(self.Q)

    @property
    def l2_norm_sq(self):
        return math.pi * self.R**2 * self.Q**2

    def moment_C0(self):
        return -1j * self.Q * (4.0 / 3.0) * self.R**3

    def I_envelope(self):
        return math.log(4.0 * abs(self.Q)), 2.0


class GridSource(ChargeDensity):
    """Piecewise-constant density on a rectangular grid of cells.

    Parameters
    ----------
    origin : (float, float)
        Lower-left corner ``(x, y)`` of cell ``[0, 0]``.
    cell : (float, float)
        Cell sizes ``(dx, dy)``.
    values : array_like, shape (ny, nx)
        Cell-averaged densities; row ``j`` covers
        ``origin_y + j*dy <= y <= origin_y + (j+1)*dy``.
    repair : bool
        Remove a residual net charge of at most ``1e-9 * int|rho|`` by
        subtracting its mean over the non-zero cells.
    """

    kind = "grid"
    REPAIR_LIMIT = 1e-9

    def __init__(self, origin, cell, values, repair=True):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise InvalidParameterError("grid values must be a non-empty 2-D array")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("grid values must be finite")
        dx, dy = (float(c) for c in cell)
        if not (dx > 0 and dy > 0):
            raise InvalidParameterError("cell sizes must be positive")
        self.origin = (float(origin[0]), float(origin[1]))
        self.cell = (dx, dy)
        mask = v != 0
        if not mask.any():
            raise InvalidParameterError("grid source has empty support")
        area = dx * dy
        net = v.sum() * area
        absq = np.abs(v).sum() * area
        if repair and net != 0 and abs(net) <= self.REPAIR_LIMIT * absq:
            v = np.where(mask, v - net / (mask.sum() * area), 0.0)
        self.values = v
        self._mask = mask
        rows = np.flatnonzero(mask.any(axis=1))
        cols = np.flatnonzero(mask.any(axis=0))
        ox, oy = self.origin
        self._support = SupportBox(ox + cols[0] * dx, ox + (cols[-1] + 1) * dx,
                                   oy + rows[0] * dy, oy + (rows[-1] + 1) * dy)
        self._xl = ox + np.arange(v.shape[1]) * dx
        self._yl = oy + np.arange(v.shape[0]) * dy

    @property
    def support(self):
        return self._support

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ox, oy = self.origin
        dx, dy = self.cell
        i = np.floor((x - ox) / dx).astype(int)
        j = np.floor((y - oy) / dy).astype(int)
        ny, nx = self.values.shape
        ok = (i >= 0) & (i < nx) & (j >= 0) & (j < ny)
        return np.where(ok, self.values[np.clip(j, 0, ny - 1), np.clip(i, 0, nx - 1)], 0.0)

    def _columns(self, k):
        """Transform in y of every grid column; shape ``k.shape + (nx,)``."""
        k = np.asarray(k, dtype=float)
        dy = self.cell[1]
        kf = k.reshape(-1, 1)
        ks = np.where(kf == 0, 1.0, kf)
        seg = np.where(kf == 0, dy, (1.0 - np.exp(-1j * kf * dy)) / (1j * ks))
        phase = np.exp(-1j * kf * self._yl[None, :]) * seg
        return (phase @ self.values).reshape(k.shape + (self.values.shape[1],))

    def rho_hat(self, x, k):
        x = float(x)
        i = int(np.floor((x - self.origin[0]) / self.cell[0]))
        if i < 0 or i >= self.values.shape[1]:
            return np.zeros(np.shape(k), dtype=complex)
        return self._columns(k)[..., i]

    def _weighted(self, k, weights):
        return np.sum(self._columns(k) * weights, axis=-1)

    def shifted_I(self, k):
        k = np.asarray(k, dtype=float)
        kk = np.abs(k)[..., None]
        dx = self.cell[0]
        w = np.exp(-kk * (self._xl - self.support.d0)) * _one_minus_exp_over_k(kk, dx)
        return self._weighted(k, w)

    def shifted_J(self, k):
        k = np.asarray(k, dtype=float)
        kk = np.abs(k)[..., None]
        dx = self.cell[0]
        w = np.exp(-kk * (self.support.d1 - self._xl - dx)) * _one_minus_exp_over_k(kk, dx)
        return self._weighted(k, w)

    def _green_inside(self, x, k):
        k = np.asarray(k, dtype=float)
        kk = np.abs(k)[..., None]
        dx = self.cell[0]
        xl, xr = self._xl, self._xl + dx
        with np.errstate(over="ignore", under="ignore"):
            # cells entirely left / right of x, and the part of the cell around x
            left_d = np.clip(x - xr, 0.0, None)
            right_d = np.clip(xl - x, 0.0, None)
            wl = np.clip(np.minimum(xr, x) - xl, 0.0, None)
            wr = np.clip(xr - np.maximum(xl, x), 0.0, None)
            w = (np.exp(-kk * left_d) * _one_minus_exp_over_k(kk, wl) * (xl < x)
                 + np.exp(-kk * right_d) * _one_minus_exp_over_k(kk, wr) * (xr > x))
            dwl = np.exp(-kk * left_d) * (1.0 - np.exp(-kk * wl)) * (xl < x)
            dwr = np.exp(-kk * right_d) * (1.0 - np.exp(-kk * wr)) * (xr > x)
        return self._weighted(k, w), self._weighted(k, -dwl + dwr)

    @property
    def total_charge(self):
        return float(self.values.sum() * self.cell[0] * self.cell[1])

    @property
    def abs_charge(self):
        return float(np.abs(self.values).sum() * self.cell[0] * self.cell[1])

    @property
    def l2_norm_sq(self):
        return float((self.values**2).sum() * self.cell[0] * self.cell[1])

    def moment_C0(self):
        dx, dy = self.cell
        xs = (((self._xl + dx) ** 2 - self._xl**2) / 2.0)
        ys = (((self._yl + dy) ** 2 - self._yl**2) / 2.0)
        mx = float(np.sum(self.values * xs[None, :]) * dy)
        my = float(np.sum(self.values * ys[:, None]) * dx)
        return complex(-mx, -my)

    def with_charge(self, Q):
        return GridSource(self.origin, self.cell, self.values * Q, repair=False)

    # -- plain-text IO --------------------------------------------------

    def dumps(self) -> str:
        ny, nx = self.values.shape
        lines = [
            f"origin {self.origin[0]!r} {self.origin[1]!r}",
            f"cell {self.cell[0]!r} {self.cell[1]!r}",
            f"shape {nx} {ny}",
        ]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.values]
        return "\n".join(lines) + "\n"

    def save(self, path):
        Path(path).write_text(self.dumps(), encoding="utf-8")


def parse_grid(text: str, repair: bool = True) -> GridSource:
    """Parse the plain-text grid format written by :meth:`GridSource.dumps`.

    Lines starting with ``#`` are ignored.  The header keys ``origin``,
    ``cell`` and ``shape`` come first, followed by ``ny`` rows of ``nx``
    whitespace-separated values (row ``j`` is the ``j``-th cell row in y).
    """
    header = {}
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, *rest = line.split()
        if key in ("origin", "cell", "shape") and len(header) < 3:
            if len(rest) != 2:
                raise InvalidParameterError(f"header line '{line}' needs two values")
            header[key] = rest
            continue
        try:
            rows.append([float(t) for t in line.split()])
        except ValueError as exc:
            raise InvalidParameterError(f"bad grid row: '{line}'") from exc
    missing = {"origin", "cell", "shape"} - header.keys()
    if missing:
        raise InvalidParameterError(f"grid header missing {sorted(missing)}")
    nx, ny = (int(t) for t in header["shape"])
    if len(rows) != ny or any(len(r) != nx for r in rows):
        raise InvalidParameterError(f"expected {ny} rows of {nx} values")
    values = np.array(rows)
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("grid values must be finite")
    origin = tuple(float(t) for t in header["origin"])
    cell = tuple(float(t) for t in header["cell"])
    return GridSource(origin, cell, values, repair=repair)


def load_grid(path, slab_a=None) -> GridSource:
    """Read a grid file and reject it unless it validates."""
    src = parse_grid(Path(path).read_text(encoding="utf-8"))
    report = validate(src, slab_a)
    if not report.ok:
        names = ", ".join(c.name for c in report.failures())
        raise InvalidParameterError(f"grid source rejected: {names}")
    return src


# -- module-level operations ---------------------------------------------

def transform_I(src: ChargeDensity, k, shifted: bool = False) -> TransformValue:
    return src.transform_I(k, shifted=shifted)


def transform_J(src: ChargeDensity, x: float, k) -> TransformValue:
    return src.transform_J(x, k)


def moment_C0(src: ChargeDensity) -> complex:
    return src.moment_C0()


def bound_constants(src: ChargeDensity, n_samples: int = 2048,
                    safety: float = 1.05) -> BoundConstants:
    """Estimate ``C_I``, ``C_J`` by dense log-spaced sampling of ``k``.

    ``sup |I_k|/|k|`` is sampled on ``[1e-6/L, 60/d0]`` (``L`` the largest
    source dimension; beyond ``60/d0`` the factor ``exp(-k d0)`` makes the
    ratio negligible) and ``sup_{x > d1, k <= 1} |J_k(x)|/|k|`` on
    ``[1e-6, 1]``, where the supremum over ``x`` is attained at ``x = d1``.
    Both maxima are inflated by ``safety``; they are estimates, not
    certified bounds.
    """
    b = src.support
    length = max(b.d1, b.height, b.width)
    k = np.geomspace(1e-6 / length, 60.0 / b.d0, n_samples)
    ci = np.max(src.transform_I(k).abs() / k)
    kj = np.geomspace(1e-6, 1.0, n_samples)
    cj = np.max(np.abs(src.shifted_J(kj)) / kj)
    ci = max(ci, abs(src.moment_C0()))
    return BoundConstants(safety * float(ci), safety * float(cj), math.sqrt(src.l2_norm_sq))


def validate(src: ChargeDensity, slab_a: float | None = None) -> ValidationReport:
    """Check the admissibility conditions on a source.

    Parameters
    ----------
    slab_a : float, optional
        Slab thickness; when given the support must start beyond it.
    """
    b = src.support
    checks = []
    area_ok = np.isfinite(b.width * b.height) and b.width > 0 and b.height > 0
    checks.append(ValidationCheck("finite_support", bool(area_ok),
                                  f"box [{b.d0}, {b.d1}] x [{b.h0}, {b.h1}]"))
    mass = src.abs_charge
    checks.append(ValidationCheck("nonzero_density", bool(mass > 0),
                                  "point and dipole sources are excluded"))
    net = src.total_charge
    rel = abs(net) / mass if mass > 0 else math.inf
    checks.append(ValidationCheck("zero_charge", bool(rel <= 1e-12),
                                  f"|net|/int|rho| = {rel:.3e}"))
    l2 = src.l2_norm_sq
    checks.append(ValidationCheck("bounded", bool(np.isfinite(l2) and np.isfinite(mass)),
                                  f"||rho||^2 = {l2}"))
    if slab_a is not None:
        checks.append(ValidationCheck("support_placement", bool(b.d0 > slab_a),
                                      f"d0={b.d0} vs a={slab_a}"))
    return ValidationReport(tuple(checks))
