"""Parameter scans, figure presets, config parsing, and CSV/JSON emission.

This module is the batch layer over :mod:`slabpdc.amplitude`: it resolves a
flat key = value config text into an experiment, sweeps one axis, evaluates a
set of observables at every point, and serializes the result.

Config schema
-------------
One ``key = value`` pair per line; '#' starts a comment; blank lines are
ignored. Values are plain floats in SI base units unless a documented suffix
is present:

    ``nm``      1e-9 m            (length keys only)
    ``mm``      1e-3 m            (length keys only)
    ``rad/s``   identity marker   (frequency keys only)

Suffixes are scale markers, not unit conversions: a frequency key never
accepts a wavelength. Unknown keys, malformed lines, wrong suffixes, and
duplicate keys are rejected with line/column positions.

Experiment keys (defaults reproduce the degenerate 532 nm slab used across
the bundled presets): ``material`` (builtin name, default ``bbo_ordinary``),
``crystal_length`` (2 mm), ``frequency`` (degenerate shorthand, 3.54e15;
sets signal = idler and pump = twice), or the explicit trio
``pump_frequency`` / ``signal_frequency`` / ``idler_frequency``;
``conversion`` (``I`` or ``II``), ``coupling`` (1e-12), ``pump_field``
(1e5), ``z_signal`` / ``z_idler`` (1 m), ``pump_z`` (back face), ``offset_x``
/ ``offset_y`` (0), ``n_imag`` (absorption of the down-converted modes) and
``n_imag_pump`` (pump absorption, defaults to ``n_imag``). Omitting both
n'' keys leaves the material table's own absorption in place.

Scan keys: ``scan_axis`` (``n_imag`` | ``crystal_length`` | ``delta_k`` |
``frequency``), ``scan_start``, ``scan_stop``, ``scan_count``, and
``observables`` (comma-separated subset of ``rate_I``, ``rate_II``,
``rate_ratio_to_lossless``, ``sinc_profile``, ``a_factor_gain``,
``amplitude_matrix``).

Axis semantics
--------------
``n_imag`` applies a frequency-flat n'' to every mode (it overrides both
n'' keys); ``crystal_length`` rebuilds the slab, keeping the pump waist on
the back face; ``frequency`` scans the degenerate point (signal = idler =
x, pump = 2x); ``delta_k`` scans the real phase-mismatch half-phase
dk L/2 directly and only supports ``sinc_profile`` (no experiment has a
freely dialable mismatch, so rates are undefined on this axis). The
imaginary parts of dk and sk on the delta_k axis stay pinned to the
configured absorption.

``rate_ratio_to_lossless`` divides by the n'' = 0 evaluation of the same
config at the same axis point and emits one column per conversion type.
``a_factor_gain`` is the squared-modulus gain |A(w_s) A(w_i)|^2 - 1 of the
absorption noise factors entering the coincidence rate.

Emission
--------
CSV: one header row (axis first), one row per point, shortest round-trip
decimal for every float. JSON: object with ``schema_version``, ``metadata``
and ``rows``. Complex observables are serialized as paired ``_re`` / ``_im``
columns in both formats. Output is byte-deterministic for identical config
text: the executor evaluates points in axis order and merges by index (any
replacement executor must preserve that order).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .amplitude import (ExperimentConfig, PhaseMatch, amplitude_farfield,
                        amplitude_numeric, phase_terms, rate, sinc_profile)
from .greens import Chi2Geometry
from .materials import (BUILTIN_MATERIALS, CrystalSlab, MaterialDispersion,
                        dispersion_eval, kinematics, noise_factor)

__version__ = "0.1.0"

_SCHEMA_VERSION = 1

_AXES = ("n_imag", "crystal_length", "delta_k", "frequency")
_OBSERVABLE_NAMES = ("rate_I", "rate_II", "rate_ratio_to_lossless",
                     "sinc_profile", "a_factor_gain", "amplitude_matrix")
_METHODS = ("farfield", "numeric")

_LENGTH_KEYS = frozenset({"crystal_length", "z_signal", "z_idler", "pump_z",
                          "offset_x", "offset_y"})
_FREQUENCY_KEYS = frozenset({"frequency", "pump_frequency",
                             "signal_frequency", "idler_frequency"})
_NUMBER_KEYS = frozenset({"coupling", "pump_field", "n_imag", "n_imag_pump",
                          "scan_start", "scan_stop", "scan_count"})
_WORD_KEYS = frozenset({"material", "conversion", "scan_axis", "observables"})
_ALL_KEYS = _LENGTH_KEYS | _FREQUENCY_KEYS | _NUMBER_KEYS | _WORD_KEYS

_SCAN_KEYS = frozenset({"scan_axis", "scan_start", "scan_stop", "scan_count",
                        "observables"})


class ConfigError(ValueError):
    """Config text rejected: parse errors carry a line/column position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, col {col}: {message}"
        super().__init__(message)


class ScanError(RuntimeError):
    """A scan aborted mid-sweep; carries the completed-point diagnostics."""

    def __init__(self, message, completed, cause):
        super().__init__(message)
        self.completed = completed
        self.__cause__ = cause


# ---------------------------------------------------------------------------
# Config text parsing
# ---------------------------------------------------------------------------

def _parse_pairs(text):
    """Split config text into {key: (value_string, line, col)}."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col)
        lhs, rhs = line.split("=", 1)
        key = lhs.strip()
        value = rhs.strip()
        key_col = len(lhs) - len(lhs.lstrip()) + 1
        if not key:
            raise ConfigError("empty key", lineno, key_col)
        val_col = len(lhs) + 2 + (len(rhs) - len(rhs.lstrip()))
        if not value:
            raise ConfigError(f"key '{key}' has no value", lineno, val_col)
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown key '{key}'", lineno, key_col)
        if key in pairs:
            raise ConfigError(f"duplicate key '{key}'", lineno, key_col)
        pairs[key] = (value, lineno, val_col)
    return pairs


def _parse_quantity(key, value, line, col, *, dimension):
    """Parse a float with an optional suffix checked against the dimension."""
    tokens = value.split()
    if len(tokens) == 1:
        # allow suffixes without a separating space
        tok = tokens[0]
        for suf in ("rad/s", "nm", "mm"):
            head = tok[:-len(suf)]
            if tok.endswith(suf) and head:
                try:
                    float(head)
                except ValueError:
                    continue
                tokens = [head, suf]
                break
    if len(tokens) == 1:
        number, suffix = tokens[0], None
    elif len(tokens) == 2:
        number, suffix = tokens
    else:
        raise ConfigError(f"key '{key}': expected 'number [suffix]'",
                          line, col)
    try:
        x = float(number)
    except ValueError:
        raise ConfigError(f"key '{key}': '{number}' is not a number",
                          line, col) from None
    if not np.isfinite(x):
        raise ConfigError(f"key '{key}': value must be finite", line, col)
    if suffix is None:
        return x
    if suffix in ("nm", "mm"):
        if dimension != "length":
            raise ConfigError(
                f"key '{key}' is not a length; suffix '{suffix}' rejected",
                line, col)
        return x * (1e-9 if suffix == "nm" else 1e-3)
    if suffix == "rad/s":
        if dimension != "frequency":
            raise ConfigError(
                f"key '{key}' is not a frequency; suffix 'rad/s' rejected",
                line, col)
        return x
    raise ConfigError(f"key '{key}': unknown suffix '{suffix}'", line, col)


def _number(pairs, key, default=None, *, dimension="none"):
    if key not in pairs:
        return default
    value, line, col = pairs[key]
    return _parse_quantity(key, value, line, col, dimension=dimension)


def _split_absorption(material, n_low, n_high, omega_cut):
    """Material with n'' = n_low below omega_cut and n_high above.

    The step is pinned by a pair of samples just around omega_cut, so linear
    interpolation is exact at every frequency outside the (negligible)
    transition band.
    """
    eps_w = 1e-9 * omega_cut
    om = np.concatenate([material.omega[material.omega < omega_cut - eps_w],
                         [omega_cut - eps_w, omega_cut + eps_w],
                         material.omega[material.omega > omega_cut + eps_w]])
    nr = np.interp(om, material.omega, material.n_real)
    ni = np.where(om < omega_cut, float(n_low), float(n_high))
    return MaterialDispersion(om, nr, ni, name=material.name + "+split-loss",
                              unbounded=material.unbounded)


def _resolve(text):
    """Parse config text into (ExperimentConfig, echo dict, scan pairs)."""
    pairs = _parse_pairs(text)

    name = pairs.get("material", ("bbo_ordinary", None, None))[0]
    if name not in BUILTIN_MATERIALS:
        _, line, col = pairs["material"]
        raise ConfigError(f"unknown material '{name}' (have: "
                          + ", ".join(sorted(BUILTIN_MATERIALS)) + ")",
                          line, col)
    material = BUILTIN_MATERIALS[name]()

    length = _number(pairs, "crystal_length", 2e-3, dimension="length")
    freq = _number(pairs, "frequency", dimension="frequency")
    pump = _number(pairs, "pump_frequency", dimension="frequency")
    sig = _number(pairs, "signal_frequency", dimension="frequency")
    idl = _number(pairs, "idler_frequency", dimension="frequency")
    if freq is not None and (sig is not None or idl is not None):
        _, line, col = pairs["frequency"]
        raise ConfigError("give either 'frequency' or the explicit "
                          "signal/idler pair, not both", line, col)
    if (sig is None) != (idl is None):
        key = "signal_frequency" if sig is not None else "idler_frequency"
        _, line, col = pairs[key]
        raise ConfigError("signal_frequency and idler_frequency must be "
                          "given together", line, col)
    if sig is None:
        if freq is None:
            freq = 3.54e15
        sig = idl = freq
    if pump is None:
        pump = sig + idl

    kind = pairs.get("conversion", ("I", None, None))[0]
    if kind not in ("I", "II"):
        _, line, col = pairs["conversion"]
        raise ConfigError(f"conversion must be I or II, got '{kind}'",
                          line, col)

    n_imag = _number(pairs, "n_imag")
    n_imag_pump = _number(pairs, "n_imag_pump")
    for key, val in (("n_imag", n_imag), ("n_imag_pump", n_imag_pump)):
        if val is not None and val < 0.0:
            _, line, col = pairs[key]
            raise ConfigError(f"{key} must be >= 0", line, col)
    if n_imag is not None:
        if n_imag_pump is None or n_imag_pump == n_imag:
            material = material.with_absorption(n_imag)
        else:
            cut = 0.5 * (max(sig, idl) + pump)
            material = _split_absorption(
                material.with_absorption(n_imag), n_imag, n_imag_pump, cut)
    elif n_imag_pump is not None:
        _, line, col = pairs["n_imag_pump"]
        raise ConfigError("n_imag_pump requires n_imag", line, col)

    coupling = _number(pairs, "coupling", 1e-12)
    pump_field = _number(pairs, "pump_field", 1e5)
    z_signal = _number(pairs, "z_signal", 1.0, dimension="length")
    z_idler = _number(pairs, "z_idler", 1.0, dimension="length")
    pump_z = _number(pairs, "pump_z", dimension="length")
    off_x = _number(pairs, "offset_x", 0.0, dimension="length")
    off_y = _number(pairs, "offset_y", 0.0, dimension="length")

    if length is not None and length <= 0.0:
        line, col = (pairs["crystal_length"][1:]
                     if "crystal_length" in pairs else (None, None))
        raise ConfigError("crystal_length must be positive", line, col)

    try:
        cfg = ExperimentConfig(
            crystal=CrystalSlab(material=material, length=length),
            chi2=Chi2Geometry(kind=kind, d=coupling),
            pump_field=pump_field,
            pump_frequency=pump,
            z_signal=z_signal,
            z_idler=z_idler,
            signal_frequency=sig,
            idler_frequency=idl,
            pump_z=pump_z,
            offset=(off_x, off_y),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    echo = {
        "material": name,
        "crystal_length": length,
        "pump_frequency": pump,
        "signal_frequency": sig,
        "idler_frequency": idl,
        "conversion": kind,
        "coupling": coupling,
        "pump_field": pump_field,
        "z_signal": z_signal,
        "z_idler": z_idler,
        "pump_z": cfg.pump_z,
        "offset_x": off_x,
        "offset_y": off_y,
        "n_imag": n_imag,
        "n_imag_pump": n_imag_pump,
    }
    scan_pairs = {k: pairs[k] for k in _SCAN_KEYS if k in pairs}
    return cfg, echo, scan_pairs


def load_config(text):
    """Resolve config text to an :class:`ExperimentConfig`.

    Scan keys are part of the schema and are accepted (and ignored) here;
    anything else unknown is rejected with its position.
    """
    cfg, _, _ = _resolve(text)
    return cfg


# ---------------------------------------------------------------------------
# Scan requests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRequest:
    """One-axis sweep: what to vary, over which grid, measuring what."""

    base: ExperimentConfig
    axis: str
    range: tuple          # (start, stop, count)
    observables: tuple
    method: str = "farfield"
    tol: float = 1e-6
    echo: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}, got "
                             f"'{self.axis}'")
        start, stop, count = self.range
        if not int(count) == count or int(count) < 2:
            raise ValueError("scan_count must be an integer >= 2")
        if not start < stop:
            raise ValueError("scan range needs start < stop")
        object.__setattr__(self, "range",
                           (float(start), float(stop), int(count)))
        obs = tuple(self.observables)
        if not obs:
            raise ValueError("at least one observable is required")
        for name in obs:
            if name not in _OBSERVABLE_NAMES:
                raise ValueError(f"unknown observable '{name}' (have: "
                                 + ", ".join(_OBSERVABLE_NAMES) + ")")
        if len(set(obs)) != len(obs):
            raise ValueError("duplicate observable")
        object.__setattr__(self, "observables", obs)
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.axis == "delta_k":
            extra = [o for o in obs if o != "sinc_profile"]
            if extra:
                raise ValueError(
                    "the delta_k axis dials the phase mismatch directly and "
                    "only supports sinc_profile; rejected: "
                    + ", ".join(extra))
        if self.axis == "n_imag" and self.range[0] < 0.0:
            raise ValueError("n_imag scan start must be >= 0")
        if self.axis in ("crystal_length", "frequency") \
                and self.range[0] <= 0.0:
            raise ValueError(f"{self.axis} scan start must be positive")


def scan_request_from_config(text, method="farfield", tol=1e-6):
    """Build a :class:`ScanRequest` from config text with scan keys."""
    cfg, echo, scan_pairs = _resolve(text)
    missing = [k for k in ("scan_axis", "scan_start", "scan_stop",
                           "scan_count", "observables")
               if k not in scan_pairs]
    if missing:
        raise ConfigError("scan definition incomplete; missing: "
                          + ", ".join(missing))

    axis, line, col = scan_pairs["scan_axis"]
    if axis not in _AXES:
        raise ConfigError(f"scan_axis must be one of {', '.join(_AXES)}; "
                          f"got '{axis}'", line, col)
    dim = {"crystal_length": "length", "frequency": "frequency"}.get(
        axis, "none")
    bounds = []
    for key in ("scan_start", "scan_stop"):
        value, kline, kcol = scan_pairs[key]
        bounds.append(_parse_quantity(key, value, kline, kcol,
                                      dimension=dim))
    count_s, kline, kcol = scan_pairs["scan_count"]
    try:
        count = int(count_s)
    except ValueError:
        raise ConfigError(f"scan_count: '{count_s}' is not an integer",
                          kline, kcol) from None
    obs_s, kline, kcol = scan_pairs["observables"]
    observables = tuple(tok.strip() for tok in obs_s.split(",") if tok.strip())

    try:
        return ScanRequest(base=cfg, axis=axis,
                           range=(bounds[0], bounds[1], count),
                           observables=observables, method=method, tol=tol,
                           echo=echo)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ScanResult:
    """Evaluated sweep: axis grid, named columns, row-per-point values."""

    axis: str
    axis_values: tuple
    columns: tuple
    rows: tuple           # rows[i][j] pairs with columns[j]
    metadata: dict


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class _AxisPoint:
    """Everything evaluable at one axis value, built lazily and cached."""

    def __init__(self, req, x):
        self.req = req
        self.x = float(x)
        self._amps = {}

    def config(self, kind=None, lossless=False):
        cfg, x = self.req.base, self.x
        crystal = cfg.crystal
        material = crystal.material
        axis = self.req.axis
        if axis == "n_imag":
            material = material.with_absorption(0.0 if lossless else x)
        elif lossless:
            material = material.with_absorption(0.0)
        if axis == "crystal_length":
            crystal = CrystalSlab(material=material, length=x)
        else:
            crystal = CrystalSlab(material=material, length=crystal.length)
        changes = {"crystal": crystal}
        if axis == "frequency":
            changes.update(pump_frequency=2.0 * x, signal_frequency=x,
                           idler_frequency=x)
        if axis == "crystal_length":
            changes["pump_z"] = None     # keep the pump on the back face
        if kind is not None and kind != cfg.chi2.kind:
            changes["chi2"] = replace(cfg.chi2, kind=kind)
        return replace(cfg, **changes)

    def amplitude(self, kind, lossless=False):
        key = (kind, lossless)
        if key not in self._amps:
            cfg = self.config(kind=kind, lossless=lossless)
            if self.req.method == "farfield":
                self._amps[key] = amplitude_farfield(cfg)
            else:
                self._amps[key] = amplitude_numeric(cfg, tol=self.req.tol)
        return self._amps[key]

    def phase_match(self):
        cfg = self.config()
        index = cfg.crystal.index
        kin = [kinematics(w, index(w)) for w in
               (cfg.signal_frequency, cfg.idler_frequency,
                cfg.pump_frequency)]
        pm = phase_terms(*kin)
        if self.req.axis == "delta_k":
            # the axis value is the real half-phase dk L/2; absorption keeps
            # its grip on the imaginary parts
            L = cfg.crystal.length
            dk = 2.0 * self.x / L + 1j * np.imag(pm.delta_k)
            pm = PhaseMatch(delta_k=dk, sigma_k=pm.sigma_k)
        return pm

    def noise_gain(self):
        cfg = self.config()
        eps = cfg.crystal.eps
        a = noise_factor(eps(cfg.signal_frequency)) \
            * noise_factor(eps(cfg.idler_frequency))
        return float(abs(a) ** 2 - 1.0)


def _emit_rate(kind):
    def cells(pt):
        return [(f"rate_{kind}", rate(pt.amplitude(kind)))]
    return cells


def _emit_ratio(pt):
    out = []
    for kind in ("I", "II"):
        num = rate(pt.amplitude(kind))
        den = rate(pt.amplitude(kind, lossless=True))
        out.append((f"rate_ratio_to_lossless_{kind}", num / den))
    return out


def _emit_sinc(pt):
    length = pt.x if pt.req.axis == "crystal_length" \
        else pt.req.base.crystal.length
    return [("sinc_profile", sinc_profile(pt.phase_match(), length))]


def _emit_gain(pt):
    return [("a_factor_gain", pt.noise_gain())]


def _emit_matrix(pt):
    a = pt.amplitude(pt.req.base.chi2.kind).matrix
    labels = ("xx", "xy", "yx", "yy")
    return [(f"amplitude_{lab}", complex(a[i, j]))
            for lab, (i, j) in zip(labels, ((0, 0), (0, 1), (1, 0), (1, 1)))]


_OBSERVABLES = {
    "rate_I": _emit_rate("I"),
    "rate_II": _emit_rate("II"),
    "rate_ratio_to_lossless": _emit_ratio,
    "sinc_profile": _emit_sinc,
    "a_factor_gain": _emit_gain,
    "amplitude_matrix": _emit_matrix,
}


def run_scan(req):
    """Evaluate a :class:`ScanRequest` into a :class:`ScanResult`.

    Points are pure functions of (request, axis value); the serial executor
    here evaluates them in axis order. Any error aborts the sweep and is
    re-raised as :class:`ScanError` with the completed-point count attached.
    """
    start, stop, count = req.range
    axis_values = np.linspace(start, stop, count)
    columns = None
    rows = []
    for i, x in enumerate(axis_values):
        try:
            pt = _AxisPoint(req, x)
            cells = []
            for name in req.observables:
                cells.extend(_OBSERVABLES[name](pt))
        except Exception as exc:
            raise ScanError(
                f"scan aborted at axis point {i} ({req.axis} = {x!r}) "
                f"after {len(rows)} completed rows: {exc}",
                completed=len(rows), cause=exc) from exc
        names = tuple(name for name, _ in cells)
        if columns is None:
            columns = names
        elif names != columns:
            raise ScanError(
                f"inconsistent columns at axis point {i}", len(rows), None)
        rows.append(tuple(value for _, value in cells))

    metadata = {
        "tool": f"slabpdc {__version__}",
        "schema_version": _SCHEMA_VERSION,
        "axis": req.axis,
        "start": start,
        "stop": stop,
        "count": count,
        "observables": list(req.observables),
        "method": req.method,
        "tol": req.tol,
        "config": dict(req.echo),
    }
    result = ScanResult(axis=req.axis,
                        axis_values=tuple(float(v) for v in axis_values),
                        columns=columns, rows=tuple(rows), metadata=metadata)
    assert len(result.rows) == count
    return result


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

# Each preset is plain config text run through the same parser as user
# configs, so the texts double as schema documentation. All four share the
# degenerate 532 nm slab: Re n(2w) = 1.75, Re n(w) = 1.67, w = 3.54e15,
# L = 2 mm.

_PRESET_TEXTS = {
    # sinc efficiency vs the real half-phase dk L/2, with distinct pump and
    # down-converted absorption lifting the minima off zero. The x axis is
    # dialed directly (dimensionless) because the source plot uses arbitrary
    # units; lossless and matched-absorption variants are one-key edits.
    "fig3": """\
material = bbo_ordinary
crystal_length = 2 mm
frequency = 3.54e15 rad/s
n_imag = 2e-6
n_imag_pump = 1.2e-5
scan_axis = delta_k
scan_start = 0.05
scan_stop = 12.6
scan_count = 400
observables = sinc_profile
""",
    # noise-factor gain vs absorption
    "fig4": """\
material = bbo_ordinary
crystal_length = 2 mm
frequency = 3.54e15 rad/s
scan_axis = n_imag
scan_start = 0.0
scan_stop = 1e-3
scan_count = 200
observables = a_factor_gain
""",
    # normalized coincidence rate vs absorption, both conversion types
    "fig5": """\
material = bbo_ordinary
crystal_length = 2 mm
frequency = 3.54e15 rad/s
scan_axis = n_imag
scan_start = 0.0
scan_stop = 1e-5
scan_count = 20
observables = rate_ratio_to_lossless
""",
    # rate vs crystal length: intra-crystal interference beats riding on the
    # absorption-set envelope
    "fig6": """\
material = bbo_ordinary
crystal_length = 2 mm
frequency = 3.54e15 rad/s
n_imag = 1e-6
scan_axis = crystal_length
scan_start = 1.9 mm
scan_stop = 2.1 mm
scan_count = 400
observables = rate_I, rate_II, rate_ratio_to_lossless
""",
}

PRESET_NAMES = tuple(sorted(_PRESET_TEXTS))


def preset(name, method="farfield", tol=1e-6):
    """Named figure-reproduction request (see :data:`PRESET_NAMES`)."""
    if name not in _PRESET_TEXTS:
        raise ValueError(f"unknown preset '{name}' (have: "
                         + ", ".join(PRESET_NAMES) + ")")
    return scan_request_from_config(_PRESET_TEXTS[name], method=method,
                                    tol=tol)


def preset_text(name):
    """The config text behind a preset, for --dump-config style use."""
    if name not in _PRESET_TEXTS:
        raise ValueError(f"unknown preset '{name}' (have: "
                         + ", ".join(PRESET_NAMES) + ")")
    return _PRESET_TEXTS[name]


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

def _expand_columns(result):
    """Flatten complex columns into _re/_im pairs; floats pass through."""
    names = [result.axis]
    pick = []               # (column index, attribute or None)
    for j, name in enumerate(result.columns):
        if result.rows and isinstance(result.rows[0][j], complex):
            names.extend([name + "_re", name + "_im"])
            pick.append((j, "real"))
            pick.append((j, "imag"))
        else:
            names.append(name)
            pick.append((j, None))
    return names, pick


def _flat_row(result, i, pick):
    row = [result.axis_values[i]]
    for j, part in pick:
        v = result.rows[i][j]
        row.append(float(getattr(v, part)) if part else float(v))
    return row


def emit(result, format="csv"):
    """Serialize a :class:`ScanResult` to bytes (``csv`` or ``json``)."""
    names, pick = _expand_columns(result)
    if format == "csv":
        lines = [",".join(names)]
        for i in range(len(result.rows)):
            lines.append(",".join(repr(v) for v in _flat_row(result, i,
                                                             pick)))
        return ("\n".join(lines) + "\n").encode()
    if format == "json":
        rows = []
        for i in range(len(result.rows)):
            rows.append(dict(zip(names, _flat_row(result, i, pick))))
        doc = {"schema_version": _SCHEMA_VERSION,
               "metadata": result.metadata,
               "rows": rows}
        return (json.dumps(doc, indent=2) + "\n").encode()
    raise ValueError(f"format must be csv or json, got '{format}'")
