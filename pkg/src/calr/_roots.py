"""Bracketing helpers for monotone thresholds."""
from __future__ import annotations

import numpy as np

DELTA_CAP = 1.0 - 1e-9


def bisect(fun, lo, hi, xtol=1e-12, rtol=0.0, max_iter=400):
    """Root of ``fun`` on ``[lo, hi]`` by plain bisection.

    ``fun(lo)`` and ``fun(hi)`` must have opposite signs (or one is zero).
    """
    flo = fun(lo)
    fhi = fun(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise ValueError("root is not bracketed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= max(xtol, rtol * abs(mid)):
            break
        fm = fun(mid)
        if fm == 0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def largest_admissible(ok, upper=DELTA_CAP, lower=1e-16, n_scan=4000, xtol=1e-12):
    """Largest ``x`` in ``(0, upper]`` such that ``ok`` holds on all of ``(0, x]``.

    ``ok`` is scanned on a logarithmic grid between ``lower`` and ``upper``;
    the first failing grid point is refined against the last passing one by
    bisection.  If every grid point passes, ``upper`` is returned.

    Parameters
    ----------
    ok : callable
        Vectorised predicate of ``x``.
    """
    grid = np.geomspace(lower, upper, n_scan)
    good = np.asarray(ok(grid), dtype=bool)
    if good.all():
        return float(upper)
    first_bad = int(np.argmax(~good))
    if first_bad == 0:
        lo, hi = 0.0, float(grid[0])
    else:
        lo, hi = float(grid[first_bad - 1]), float(grid[first_bad])
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if bool(ok(np.array([mid]))[0]):
            lo = mid
        else:
            hi = mid
    return lo
