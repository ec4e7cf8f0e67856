"""Named, seeded experiments writing CSV tables, summaries, figures and a manifest."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .divergence import (error_profile, shannon_norm_curve, walsh_projection_norm)
from .errors import ConfigInvalid, ExperimentFailed, IoFailure, PwlabError
from .io import (write_amplitudes, write_design, write_error_profiles, write_json,
                 write_norm_curve, write_rows, sha256_file)
from .lti import (MeasurementFunctionalSet, apply_lti, digital_lti_generalized,
                  digital_lti_point, fir_transfer, hilbert_transfer)
from .phase import (align_phase, build_design, rate_accounting, recover,
                    verify_recovery_condition)
from .plotting import Figure, Series, gnuplot_script, render_png
from .sampling import GeneratingFunction, KernelFamily
from .signal import TestSignalParams, eval_signal, make_test_signal, reproducing_kernel

EXPERIMENTS = ("convergence", "divergence", "walsh", "lti", "phase", "frame-check")


def _ints(v):
    if not isinstance(v, list) or not v or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigInvalid("expected a non-empty list of integers")
    if any(b <= a for a, b in zip(v, v[1:])) or v[0] < 0:
        raise ConfigInvalid("integer lists must be non-negative and strictly increasing")
    return v


def _num(lo=-math.inf, hi=math.inf, allow_none=False):
    def check(v):
        if v is None and allow_none:
            return v
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not lo <= v <= hi:
            raise ConfigInvalid(f"expected a number in [{lo}, {hi}]")
        return v
    return check


def _choice(*options):
    def check(v):
        if v not in options:
            raise ConfigInvalid(f"expected one of {options}")
        return v
    return check


def _signal(v):
    if not isinstance(v, dict) or "family" not in v:
        raise ConfigInvalid("signal must be an object with a 'family'")
    try:
        make_test_signal(TestSignalParams.from_dict({"seed": 0, **v}))
    except (PwlabError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"invalid signal: {exc}") from exc
    return v


def _taps(v):
    if not isinstance(v, dict) or not v:
        raise ConfigInvalid("taps must map integer delays to coefficients")
    for k, c in v.items():
        int(k)
        if not isinstance(c, (int, float)):
            raise ConfigInvalid("tap coefficients must be real numbers")
    return v


# name -> (default, validator)
SCHEMAS: dict[str, dict[str, tuple]] = {
    "convergence": {
        "Ns": ([16, 32, 64], _ints),
        "T": (5.0, _num(0, 1e4)),
        "window": (None, _num(0, 1e5, allow_none=True)),
        "series": ("shannon", _choice("shannon", "sine_type")),
        "A": (2.0, _num(0, 1e6)),
        "g_scale": (0.3, _num(0, 1e6)),
        "signal": ({"family": "trig_polynomial", "parameters": {}}, _signal),
        "metric": ("local", _choice("local", "global")),
        "tolerance": (1e-3, _num(0, 1e6, allow_none=True)),
    },
    "divergence": {
        "Ns": ([8, 16, 32, 64, 128, 256, 512], _ints),
        "t_step": (1 / 64, _num(1e-6, 1 / 16)),
        "min_r2": (0.99, _num(0, 1)),
    },
    "walsh": {
        "k_max": (8, _num(1, 16)),
        "non_dyadic_threshold": (1.5, _num(0, 1e6)),
    },
    "lti": {
        "system": ("hilbert", _choice("hilbert", "fir")),
        "taps": ({"0": 0.5, "1": 0.25, "-1": 0.25}, _taps),
        "signal": ({"family": "edge_singular_alpha", "parameters": {"alpha": 0.5, "shift": 0.5}}, _signal),
        "t": (0.5, _num(-1e4, 1e4)),
        "Ns": ([8, 16, 32, 64], _ints),
        "Bs": ([128, 256, 512, 1024, 2048], _ints),
        "reference_bins": (65536, _num(2, 1 << 22)),
        "tolerance": (1e-2, _num(0, 1e6)),
    },
    "phase": {
        "K": (2, _choice(2, 3)),
        "n_signals": (10, _num(1, 10_000)),
        "signal_band": (0.8, _num(0.05, 0.999)),
        "anchor_min": (0.05, _num(0, 1)),
        "anchor_window": (3.0, _num(0, 100)),
        "N": (64, _num(1, 4096)),
        "T": (5.0, _num(0, 100)),
        "tolerance": (1e-6, _num(0, 1)),
        "required_fraction": (0.98, _num(0, 1)),
    },
    "frame-check": {
        "K": (2, _choice(2, 3)),
        "mode": (None, _choice(None, "explicit", "orbit")),
    },
}

# reference labels of what each experiment reproduces; written into summaries
ANCHORS: dict[str, str] = json.loads(resources.files(__package__).joinpath("anchors.json").read_text())


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigInvalid(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2 ** 64:
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")
        if not isinstance(self.params, dict):
            raise ConfigInvalid("params must be an object")
        schema = SCHEMAS[self.experiment]
        unknown = set(self.params) - set(schema)
        if unknown:
            raise ConfigInvalid(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        for key, value in self.params.items():
            try:
                schema[key][1](value)
            except ConfigInvalid as exc:
                raise ConfigInvalid(f"{self.experiment}.{key}: {exc}") from None
            except (TypeError, ValueError) as exc:
                raise ConfigInvalid(f"{self.experiment}.{key}: {exc}") from None

    def resolved(self) -> dict:
        out = {k: copy.deepcopy(v[0]) for k, v in SCHEMAS[self.experiment].items()}
        out.update(copy.deepcopy(self.params))
        return out

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "params": copy.deepcopy(self.params),
                "seed": self.seed, "output_dir": self.output_dir}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict) or "experiment" not in d:
            raise ConfigInvalid("config must be an object with an 'experiment' field")
        extra = set(d) - {"experiment", "params", "seed", "output_dir"}
        if extra:
            raise ConfigInvalid(f"unknown config fields {sorted(extra)}")
        return cls(d["experiment"], d.get("params", {}), d.get("seed", 0), d.get("output_dir", "out"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc

    def digest(self) -> str:
        """sha256 of the canonical config without its output directory."""
        body = {k: v for k, v in self.to_dict().items() if k != "output_dir"}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_sha256: str
    version: str
    wall_clock_s: float
    outputs: dict
    passed: bool | None

    def to_dict(self) -> dict:
        return {"config_sha256": self.config_sha256, "version": self.version,
                "wall_clock_s": self.wall_clock_s, "outputs": self.outputs, "pass": self.passed}


@dataclass
class Report:
    """What an experiment produced, before anything is written."""

    tables: dict = field(default_factory=dict)   # file name -> (header, rows)
    summary: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)
    writers: list = field(default_factory=list)   # (file name, callable(path))
    passed: bool | None = None


def list_experiments() -> list[dict]:
    """Deterministic catalog: name, parameters with defaults, reproduced anchor."""
    return [{"name": name,
             "parameters": {k: v[0] for k, v in SCHEMAS[name].items()},
             "anchor": ANCHORS[name]} for name in EXPERIMENTS]


def _build_signal(desc: dict, seed: int):
    return make_test_signal(TestSignalParams.from_dict({"seed": seed, **desc}))


def _strictly_decreasing(values) -> bool:
    return bool(all(b < a for a, b in zip(values, values[1:])))


def _convergence(p: dict, seed: int) -> Report:
    f = _build_signal(p["signal"], seed)
    Ns = p["Ns"]
    if p["series"] == "shannon":
        series = "shannon"
    else:
        g = p["g_scale"] * reproducing_kernel(0.0)
        series = KernelFamily(GeneratingFunction.sine_wave_crossing(p["A"], g, max(Ns)))
    profiles = [error_profile(f, series, N, p["T"], p["window"] if p["window"] else None) for N in Ns]
    key = "local_sup" if p["metric"] == "local" else "global_sup"
    values = [getattr(q, key) for q in profiles]
    decreasing = _strictly_decreasing(values)
    below = p["tolerance"] is None or values[-1] < p["tolerance"]
    rep = Report(passed=bool(decreasing and below))
    rep.tables["error_profile.csv"] = (("N", "local_sup", "global_sup", "argmax_t"),
                                       [(q.N, q.local_sup, q.global_sup, q.argmax_t) for q in profiles])
    rep.writers.append(("error_profile.csv", lambda path: write_error_profiles(path, profiles)))
    rep.summary = {"metric": key, "values": values, "strictly_decreasing": decreasing,
                   "final_below_tolerance": below}
    rep.figures.append(Figure("error_profile", "Sampling-series error", "N", "sup error",
                              [Series("error_profile.csv", "N", "local_sup", "local [-T, T]"),
                               Series("error_profile.csv", "N", "global_sup", "global window")],
                              logx=True, logy=True))
    return rep


def _divergence(p: dict, seed: int) -> Report:
    curve = shannon_norm_curve(p["Ns"], p["t_step"])
    slope, intercept, r2 = curve.log_fit()
    vals = curve.values
    rep = Report(passed=bool(slope > 0 and r2 > p["min_r2"]))
    rep.tables["shannon_norm.csv"] = (("N", "value"), list(curve.entries))
    rep.writers.append(("shannon_norm.csv", lambda path: write_norm_curve(path, curve)))
    rep.summary = {"slope": slope, "intercept": intercept, "r2": r2,
                   "ratio_last_first": float(vals[-1] / vals[0]), "grids": curve.grids}
    rep.figures.append(Figure("shannon_norm", "Truncated Shannon series operator norm",
                              "N", "norm estimate", [Series("shannon_norm.csv", "N", "value", "grid max")],
                              logx=True))
    return rep


def _walsh(p: dict, seed: int) -> Report:
    k_max = int(p["k_max"])
    dyadic = [(1 << k, walsh_projection_norm(1 << k)) for k in range(1, k_max + 1)]
    all_rows = [(N, walsh_projection_norm(N)) for N in range(1, (1 << k_max) + 1)]
    non_dyadic = max(v for N, v in all_rows if N & (N - 1))
    exact = all(v == 1.0 for _, v in dyadic)
    rep = Report(passed=bool(exact and non_dyadic > p["non_dyadic_threshold"]))
    rep.tables["walsh_dyadic.csv"] = (("N", "value"), dyadic)
    rep.tables["walsh_norm.csv"] = (("N", "value"), all_rows)
    rep.summary = {"dyadic_exact": exact, "max_non_dyadic": non_dyadic}
    rep.figures.append(Figure("walsh_norm", "Walsh partial-sum projection norm", "N", "norm",
                              [Series("walsh_norm.csv", "N", "value", "all N"),
                               Series("walsh_dyadic.csv", "N", "value", "N = 2^k")]))
    return rep


def _lti(p: dict, seed: int) -> Report:
    f = _build_signal(p["signal"], seed)
    h = hilbert_transfer() if p["system"] == "hilbert" else fir_transfer({int(k): v for k, v in p["taps"].items()})
    t = float(p["t"])
    if f.bin_integral is not None:
        ref = digital_lti_generalized(h, MeasurementFunctionalSet.freq_bins(int(p["reference_bins"]), f.band_edge), f, t)
    else:
        ref = apply_lti(h, f, t)
    gen_rows = [(B, abs(digital_lti_generalized(h, MeasurementFunctionalSet.freq_bins(B, f.band_edge), f, t) - ref))
                for B in p["Bs"]]
    k = KernelFamily.shannon(max(p["Ns"]))
    point_rows = [(N, abs(digital_lti_point(h, k, f, N, t) - ref)) for N in p["Ns"]]
    errs = [e for _, e in gen_rows]
    decreasing = _strictly_decreasing(errs)
    rep = Report(passed=bool(decreasing and errs[-1] < p["tolerance"]))
    rep.tables["lti_generalized.csv"] = (("B", "error"), gen_rows)
    rep.tables["lti_point.csv"] = (("N", "error"), point_rows)
    rep.summary = {"t": t, "reference": [ref.real, ref.imag], "generalized_decreasing": decreasing,
                   "generalized_final": float(errs[-1]), "point_errors_reported_only": True}
    rep.figures.append(Figure("lti_generalized", "Frequency-bin implementation error", "B", "error",
                              [Series("lti_generalized.csv", "B", "error", "bins")], logx=True, logy=True))
    rep.figures.append(Figure("lti_point", "Point-sample implementation error", "N", "error",
                              [Series("lti_point.csv", "N", "error", "point samples")], logx=True, logy=True))
    return rep


def phase_trial_signals(seed: int, count: int, band: float, anchor_min: float, window: float,
                        d, limit: int = 100_000):
    """Seeded random smooth signals scaled to unit peak whose central anchors clear ``anchor_min``."""
    t_peak = np.linspace(-8.0, 8.0, 641)
    blocks = np.arange(-int(window) - 2, int(window) + 2)
    anchors = d.block_points(blocks)[:, 0]
    anchors = anchors[np.abs(anchors) <= window]
    out = []
    s = seed
    while len(out) < count and s < seed + limit:
        params = {"band_edge": band * math.pi}
        f = make_test_signal(TestSignalParams("random_smooth", params, s))
        peak = float(np.max(np.abs(eval_signal(f, t_peak))))
        f = make_test_signal(TestSignalParams("random_smooth", {**params, "scale": 1.0 / peak}, s))
        if np.min(np.abs(eval_signal(f, anchors))) >= anchor_min:
            out.append((s, f))
        s += 1
    return out


def _phase(p: dict, seed: int) -> Report:
    d = build_design(int(p["K"]), signal_band=float(p["signal_band"]))
    N, T = int(p["N"]), float(p["T"])
    t = np.linspace(-T, T, 1001)
    trials = phase_trial_signals(seed, int(p["n_signals"]), float(p["signal_band"]),
                                 float(p["anchor_min"]), float(p["anchor_window"]), d)
    rows, first_amps = [], None
    for s, f in trials:
        try:
            res = recover(f, d, t, N)
        except PwlabError:
            rows.append((s, math.inf))
            continue
        if first_amps is None:
            first_amps = res.amplitudes
        truth = eval_signal(f, t)
        rows.append((s, float(np.max(np.abs(truth - align_phase(truth, res.values))))))
    errs = np.array([e for _, e in rows])
    ok = int(np.sum(errs < p["tolerance"]))
    rep = Report(passed=bool(len(rows) and ok >= math.ceil(p["required_fraction"] * len(rows))))
    rep.tables["phase_errors.csv"] = (("seed", "sup_error"), rows)
    if first_amps is not None:
        rep.writers.append(("amplitudes.csv", lambda path: write_amplitudes(path, first_amps)))
    rep.writers.append(("design.json", lambda path: write_design(path, d)))
    finite = errs[np.isfinite(errs)]
    rep.summary = {"trials": len(rows), "successes": ok,
                   "sup_error": float(finite.max()) if finite.size else None,
                   "median_error": float(np.median(finite)) if finite.size else None,
                   "rate": rate_accounting(d)}
    rep.figures.append(Figure("phase_errors", "Recovery error per trial", "seed", "sup error",
                              [Series("phase_errors.csv", "seed", "sup_error", "after phase alignment")],
                              logy=True))
    return rep


def _frame_check(p: dict, seed: int) -> Report:
    d = build_design(int(p["K"]), p["mode"])
    report = verify_recovery_condition(d)
    rep = Report(passed=bool(report.passed))
    rep.writers.append(("design.json", lambda path: write_design(path, d)))
    rep.summary = {"report": report.to_dict(), "rate": rate_accounting(d)}
    return rep


RUNNERS: dict[str, Callable[[dict, int], Report]] = {
    "convergence": _convergence,
    "divergence": _divergence,
    "walsh": _walsh,
    "lti": _lti,
    "phase": _phase,
    "frame-check": _frame_check,
}


def _read_columns(tables: dict) -> dict:
    data = {}
    for name, (header, rows) in tables.items():
        arr = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
        data[name] = {h: arr[:, i] for i, h in enumerate(header)}
    return data


def run(config: ExperimentConfig, figures: bool = True) -> RunManifest:
    """Execute one experiment and write its outputs into ``config.output_dir``."""
    config.validate()
    start = time.perf_counter()
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    try:
        rep = RUNNERS[config.experiment](config.resolved(), config.seed)
    except (ConfigInvalid, IoFailure):
        raise
    except PwlabError as exc:
        raise ExperimentFailed(config.experiment, exc) from exc

    written = []
    handled = {name for name, _ in rep.writers}
    for name, (header, rows) in rep.tables.items():
        if name not in handled:
            written.append(write_rows(out / name, header, rows))
    for name, writer in rep.writers:
        written.append(writer(out / name))
    summary = {"experiment": config.experiment, "anchor": ANCHORS[config.experiment],
               "seed": config.seed, "pass": rep.passed, **rep.summary}
    written.append(write_json(out / "summary.json", summary))
    write_json(out / "config.json", config.to_dict())
    if rep.figures:
        columns = {name: list(header) for name, (header, _) in rep.tables.items()}
        script = out / "plots.gp"
        try:
            script.write_text(gnuplot_script(rep.figures, columns))
        except OSError as exc:
            raise IoFailure(f"cannot write {script}: {exc}") from exc
        written.append(script)
        if figures:
            data = _read_columns(rep.tables)
            written.extend(render_png(fig, data, out) for fig in rep.figures)

    manifest = RunManifest(config.digest(), __version__, round(time.perf_counter() - start, 3),
                           {p.name: sha256_file(p) for p in sorted(written)}, rep.passed)
    write_json(out / "manifest.json", manifest.to_dict())
    return manifest
