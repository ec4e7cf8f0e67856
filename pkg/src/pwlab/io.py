"""Delimited and JSON file formats for spectra, sampling sets and results.

Floats are written with ``repr`` so files round-trip exactly and identical
inputs give byte-identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .divergence import ErrorProfile, NormCurve
from .errors import InvalidParams, IoFailure
from .lti import TransferFunction
from .phase import AmplitudeSamples, MeasurementDesign
from .sampling import GeneratingFunction, KernelFamily, SamplingSet
from .signal import Spectrum, TestSignalParams, make_test_signal


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with Path(path).open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InvalidParams(f"{path} is empty")
    return rows[0], rows[1:]


def write_json(path, obj) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return path


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _expect(header, wanted, path):
    if list(header) != list(wanted):
        raise InvalidParams(f"{path}: expected header {','.join(wanted)}")


# spectra ---------------------------------------------------------------------

def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_spectrum(path, spec: Spectrum) -> Path:
    vals = spec.effective_values()
    write_rows(path, ("omega", "re", "im"), zip(spec.grid, vals.real, vals.imag))
    write_json(sidecar_path(path), {"band_edge": spec.band_edge, "quadrature": spec.quadrature,
                                    "family": spec.family, "seed": spec.seed})
    return Path(path)


def read_spectrum(path) -> Spectrum:
    header, rows = read_rows(path)
    _expect(header, ("omega", "re", "im"), path)
    data = np.array(rows, dtype=float)
    meta = read_json(sidecar_path(path))
    return Spectrum(float(meta["band_edge"]), data[:, 0], data[:, 1] + 1j * data[:, 2],
                    meta.get("quadrature", "trapezoid"), family=meta.get("family"),
                    seed=meta.get("seed"))


def write_transfer(path, h: TransferFunction) -> Path:
    write_rows(path, ("omega", "re", "im"), zip(h.grid, h.values.real, h.values.imag))
    write_json(sidecar_path(path), {"kind": h.kind, "smoothness": h.smoothness,
                                    "sup_norm": h.sup_norm})
    return Path(path)


def read_transfer(path) -> TransferFunction:
    header, rows = read_rows(path)
    _expect(header, ("omega", "re", "im"), path)
    data = np.array(rows, dtype=float)
    meta = read_json(sidecar_path(path))
    return TransferFunction(data[:, 0], data[:, 1] + 1j * data[:, 2],
                            meta.get("smoothness", "smooth"), meta.get("kind", "custom"))


# sampling --------------------------------------------------------------------

def write_sampling_set(path, s: SamplingSet) -> Path:
    pts = s.points.astype(complex)
    return write_rows(path, ("n", "lambda_re", "lambda_im"), zip(s.indices, pts.real, pts.imag))


def read_sampling_set(path, provenance: str = "sine_type_zeros") -> SamplingSet:
    header, rows = read_rows(path)
    _expect(header, ("n", "lambda_re", "lambda_im"), path)
    idx = np.array([int(r[0]) for r in rows])
    re = np.array([float(r[1]) for r in rows])
    im = np.array([float(r[2]) for r in rows])
    pts = re if not np.any(im) else re + 1j * im
    return SamplingSet(pts, idx, provenance)


def kernel_config(form: str, n_max: int, A: float = 1.0, g: TestSignalParams | None = None) -> dict:
    return {"form": form, "A": A, "g": None if g is None else g.to_dict(), "range": n_max}


def kernel_from_config(cfg: dict) -> KernelFamily:
    """Build a kernel family from ``{form, A, g, range}``; ``g`` is a test-signal description."""
    form, n_max = cfg.get("form", "closed_sine"), int(cfg.get("range", 64))
    if form == "closed_sine":
        return KernelFamily.shannon(n_max)
    if form == "sine_wave_crossing":
        if cfg.get("g") is None:
            raise InvalidParams("sine_wave_crossing needs a g description")
        g = make_test_signal(TestSignalParams.from_dict(cfg["g"]))
        return KernelFamily(GeneratingFunction.sine_wave_crossing(float(cfg.get("A", 2.0)), g, n_max))
    if form == "truncated_product":
        radius = int(cfg.get("radius", 10_000))
        return KernelFamily(GeneratingFunction.truncated_product(SamplingSet.integers(radius)))
    raise InvalidParams(f"unsupported kernel form {form!r}")


# results ---------------------------------------------------------------------

def write_norm_curve(path, curve: NormCurve) -> Path:
    return write_rows(path, ("N", "value"), curve.entries)


def read_norm_curve(path) -> NormCurve:
    header, rows = read_rows(path)
    _expect(header, ("N", "value"), path)
    return NormCurve(tuple((int(r[0]), float(r[1])) for r in rows))


def write_error_profiles(path, profiles: Sequence[ErrorProfile]) -> Path:
    return write_rows(path, ("N", "local_sup", "global_sup", "argmax_t"),
                      ((p.N, p.local_sup, p.global_sup, p.argmax_t) for p in profiles))


def read_error_profiles(path) -> list[ErrorProfile]:
    header, rows = read_rows(path)
    _expect(header, ("N", "local_sup", "global_sup", "argmax_t"), path)
    return [ErrorProfile(int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in rows]


def write_error_curve(path, key: str, pairs) -> Path:
    """``N,error`` or ``B,error`` tables."""
    return write_rows(path, (key, "error"), pairs)


def write_amplitudes(path, amps: AmplitudeSamples) -> Path:
    rows = ((int(n), m + 1, c) for n, row in zip(amps.blocks, amps.c) for m, c in enumerate(row))
    return write_rows(path, ("n", "m", "c"), rows)


def read_amplitudes(path) -> AmplitudeSamples:
    header, rows = read_rows(path)
    _expect(header, ("n", "m", "c"), path)
    data = {}
    for n, m, c in rows:
        data.setdefault(int(n), {})[int(m)] = float(c)
    blocks = sorted(data)
    width = max(len(v) for v in data.values())
    c = np.array([[data[n][m] for m in range(1, width + 1)] for n in blocks])
    return AmplitudeSamples(np.array(blocks), c)


def write_design(path, d: MeasurementDesign) -> Path:
    return write_json(path, d.to_dict())


def read_design(path) -> MeasurementDesign:
    return MeasurementDesign.from_dict(read_json(path))


def finite_or_none(x: float):
    return x if math.isfinite(x) else None
