"""Run configurations: a flat INI file with one level of sections.

Keys (all optional, defaults in brackets)::

    [slab]
    a_rule = fixed | d1_over_tau | d0_over_tau     [fixed]
    a = 1.0                # used when a_rule = fixed
    lambda = 1.0
    xi_fraction = 0.25     # xi = xi_fraction * a

    [source]
    kind = rectangle | circle | grid               [rectangle]
    x0, y0 = centre        [6.0, 6.0]
    d, h = half-width, half-height (rectangle)     [1.0, 1.0]
    R = radius (circle)                            [1.0]
    Q = charge amplitude                           [1.0]
    path = grid file (grid)

    [sweep]
    betas = 0.1, 0.2, ...
    delta_min, delta_max, points_per_decade        [1e-12, 1e-4, 25]
    deltas = explicit list (overrides the range; empty gives an empty sweep)
    witness_depth = depth for the lower estimate (empty: column left NaN)

    [output]
    dataset = sweep.csv
    summary = sweep.summary.json
    format = csv | json

    [numerics]
    tol = 1e-8
    workers = 1

    [verify]
    suites = lemmas, oracles, plancherel, residuals, sandwich
    lemma_samples = 10000
    seed = 0
    mutate = false

Every value is written back with ``repr`` so that parsing a serialised
config gives an equal :class:`RunConfig`.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import InvalidParameterError
from .slab import SlabConfig, feasible, tau
from .sources import ChargeDensity, CircleSource, RectangleSource, load_grid, validate

A_RULES = ("fixed", "d1_over_tau", "d0_over_tau")
SOURCE_KINDS = ("rectangle", "circle", "grid")
FORMATS = ("csv", "json")
SUITES = ("lemmas", "oracles", "plancherel", "residuals", "sandwich")
PRESETS = ("fig2", "fig3", "fig6", "fig7")


@dataclass(frozen=True)
class SlabSpec:
    a_rule: str = "fixed"
    a: float = 1.0
    lam: float = 1.0
    xi_fraction: float = 0.25


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "rectangle"
    x0: float = 6.0
    y0: float = 6.0
    d: float = 1.0
    h: float = 1.0
    R: float = 1.0
    Q: float = 1.0
    path: str = ""


@dataclass(frozen=True)
class SweepSpec:
    betas: tuple = (0.8,)
    delta_min: float = 1e-12
    delta_max: float = 1e-4
    points_per_decade: int = 25
    deltas: tuple | None = None
    witness_depth: float | None = None


@dataclass(frozen=True)
class OutputSpec:
    dataset: str = "sweep.csv"
    summary: str = "sweep.summary.json"
    format: str = "csv"


@dataclass(frozen=True)
class NumericsSpec:
    tol: float = 1e-8
    workers: int = 1


@dataclass(frozen=True)
class VerifySpec:
    suites: tuple = SUITES
    lemma_samples: int = 10_000
    seed: int = 0
    mutate: bool = False


@dataclass(frozen=True)
class RunConfig:
    slab: SlabSpec = field(default_factory=SlabSpec)
    source: SourceSpec = field(default_factory=SourceSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    numerics: NumericsSpec = field(default_factory=NumericsSpec)
    verify: VerifySpec = field(default_factory=VerifySpec)
    name: str = ""

    # -- derived objects -------------------------------------------------

    def build_source(self) -> ChargeDensity:
        s = self.source
        if s.kind == "rectangle":
            return RectangleSource(s.x0, s.y0, s.d, s.h, s.Q)
        if s.kind == "circle":
            return CircleSource(s.x0, s.y0, s.R, s.Q)
        if not s.path:
            raise InvalidParameterError("grid source needs [source] path")
        return load_grid(s.path)

    def slab_thickness(self, beta: float, src: ChargeDensity | None = None) -> float:
        rule = self.slab.a_rule
        if rule == "fixed":
            return self.slab.a
        b = (src or self.build_source()).support
        depth = b.d1 if rule == "d1_over_tau" else b.d0
        return depth / tau(beta)

    def slab_config(self, beta: float, delta: float, src: ChargeDensity | None = None) -> SlabConfig:
        a = self.slab_thickness(beta, src)
        return SlabConfig(a, delta, beta, self.slab.lam, self.slab.xi_fraction * a)

    def delta_grid(self) -> np.ndarray:
        """Loss values in descending order."""
        sw = self.sweep
        if sw.deltas is not None:
            return np.array(sorted(sw.deltas, reverse=True), dtype=float)
        lo, hi = math.log10(sw.delta_min), math.log10(sw.delta_max)
        n = int(round((hi - lo) * sw.points_per_decade)) + 1
        return np.logspace(hi, lo, n)

    def betas(self) -> np.ndarray:
        return np.array(sorted(self.sweep.betas), dtype=float)

    def validate(self) -> None:
        """Check every parameter before any computation.

        Raises
        ------
        InvalidParameterError
        """
        sl, sw, out, num = self.slab, self.sweep, self.output, self.numerics
        if sl.a_rule not in A_RULES:
            raise InvalidParameterError(f"a_rule must be one of {A_RULES}")
        if self.source.kind not in SOURCE_KINDS:
            raise InvalidParameterError(f"source kind must be one of {SOURCE_KINDS}")
        if out.format not in FORMATS:
            raise InvalidParameterError(f"format must be one of {FORMATS}")
        if not 0 < sl.xi_fraction < 1:
            raise InvalidParameterError("xi_fraction must lie in (0, 1)")
        if not (num.tol > 0 and num.workers >= 1):
            raise InvalidParameterError("tol must be positive and workers >= 1")
        unknown = set(self.verify.suites) - set(SUITES)
        if unknown:
            raise InvalidParameterError(f"unknown suites: {sorted(unknown)}")
        if sw.deltas is None:
            if not 0 < sw.delta_min <= sw.delta_max < 1 or sw.points_per_decade < 1:
                raise InvalidParameterError("need 0 < delta_min <= delta_max < 1 and points_per_decade >= 1")
        elif any(not 0 < d < 1 for d in sw.deltas):
            raise InvalidParameterError("deltas must lie in (0, 1)")
        src = self.build_source()
        for beta in sw.betas:
            if not feasible(beta, sl.lam):
                raise InvalidParameterError(f"(beta={beta}, lambda={sl.lam}) is not feasible")
            a = self.slab_thickness(beta, src)
            rep = validate(src, a)
            if not rep.ok:
                names = ", ".join(c.name for c in rep.failures())
                raise InvalidParameterError(f"source fails validation at beta={beta}: {names}")
            # constructing the slab checks a, xi and mu >= 0
            for d in self.delta_grid()[:1]:
                self.slab_config(beta, float(d), src)
        if sw.witness_depth is not None:
            b = src.support
            if not b.d0 <= sw.witness_depth <= b.d1:
                raise InvalidParameterError("witness_depth must lie in [d0, d1]")

    # -- text form ---------------------------------------------------------

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        if self.name:
            cp["run"] = {"name": self.name}
        for section, spec in _sections(self):
            # unset optional keys are omitted rather than written empty
            cp[section] = {_KEY_OUT.get(f.name, f.name): _format(getattr(spec, f.name))
                           for f in fields(spec) if getattr(spec, f.name) is not None}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in cp[section].items())
            lines.append("")
        return "\n".join(lines)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


_KEY_OUT = {"lam": "lambda"}
_KEY_IN = {v: k for k, v in _KEY_OUT.items()}


def _sections(cfg):
    return (("slab", cfg.slab), ("source", cfg.source), ("sweep", cfg.sweep),
            ("output", cfg.output), ("numerics", cfg.numerics), ("verify", cfg.verify))


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(default, text: str, name: str):
    text = text.strip()
    try:
        if name == "witness_depth" and text == "":
            return None
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or name == "witness_depth":
            return float(text)
        if isinstance(default, tuple) or name == "deltas":
            items = [t.strip() for t in text.split(",") if t.strip()]
            if name in ("suites",):
                return tuple(items)
            return tuple(float(t) for t in items)
        return text
    except ValueError as exc:
        raise InvalidParameterError(f"bad value for {name}: {text!r}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse the INI text form; unknown sections or keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidParameterError(f"config syntax: {exc}") from exc
    base = RunConfig()
    parts = {}
    known = dict(_sections(base))
    for section in cp.sections():
        if section == "run":
            continue
        if section not in known:
            raise InvalidParameterError(f"unknown section [{section}]")
        spec = known[section]
        names = {f.name for f in fields(spec)}
        updates = {}
        for key, raw in cp[section].items():
            attr = _KEY_IN.get(key, key)
            if attr not in names:
                raise InvalidParameterError(f"unknown key {key!r} in [{section}]")
            updates[attr] = _parse_value(getattr(spec, attr), raw, attr)
        parts[section] = replace(spec, **updates)
    name = cp["run"].get("name", "") if cp.has_section("run") else ""
    return replace(base, name=name, **parts)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from exc


# -- figure presets ----------------------------------------------------------

_BETA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def preset(name: str) -> RunConfig:
    """Sweeps matching the four dissipation figures.

    The source is centred at (6, 6) with half-size 1 (rectangle) or radius 1
    (circle), so ``d0 = 5`` and ``d1 = 7``.  ``fig2``/``fig3`` place the whole
    support inside the resonant region (``a = d1 / tau``), ``fig6``/``fig7``
    put it just outside (``a = d0 / tau``).  Charge amplitude ``Q = 1`` and
    ``xi = a / 4`` are choices, so absolute magnitudes differ from published
    plots by a factor depending on ``Q**2`` and ``xi``; shapes and trends do
    not.
    """
    if name not in PRESETS:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {PRESETS}")
    rule = "d1_over_tau" if name in ("fig2", "fig3") else "d0_over_tau"
    kind = "rectangle" if name in ("fig2", "fig6") else "circle"
    dmin = 1e-16 if kind == "rectangle" else 1e-12
    return RunConfig(
        slab=SlabSpec(a_rule=rule, lam=1.0, xi_fraction=0.25),
        source=SourceSpec(kind=kind, x0=6.0, y0=6.0, d=1.0, h=1.0, R=1.0, Q=1.0),
        sweep=SweepSpec(betas=_BETA_GRID, delta_min=dmin, delta_max=1e-4, points_per_decade=25),
        output=OutputSpec(dataset=f"{name}.csv", summary=f"{name}.summary.json"),
        name=name,
    )
