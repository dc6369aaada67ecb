"""Config parsing, result files and recorded quadrature data.

Recorded-data files are plain CSV with a ``#`` preamble::

    # format_version=1
    # basis=x
    # t=0.5
    # n=500000
    0.12,-1.3
    ...

Samples must already be calibrated to shot-noise units. Basis ``s`` files
carry a direct ``(x, p)`` record of the signal before the beam splitter.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import EdrReport, bound_curves
from .sampling import QUANTITIES, SampleBatch, estimate_report, summarize_reports
from .sweep import (
    DETECTION_EFFICIENCY,
    FAMILIES,
    FORMAT_VERSION,
    ConfigError,
    StateSpec,
    SweepConfig,
    SweepResult,
    empirical_report,
)

REPORT_FIELDS = (
    "epsilon",
    "eta",
    "sigma_a",
    "sigma_b",
    "lhs_heisenberg",
    "lhs_ozawa",
    "lhs_branciard",
    "c_ab",
)
FLAG_FIELDS = ("heisenberg_violated", "ozawa_violated", "branciard_violated")


def fmt(x: float) -> str:
    """17 significant digits; locale-independent and round-trip exact."""
    return format(float(x), ".17g")


# --- config ---------------------------------------------------------------

_SCALAR_KEYS = {
    "t_start": float,
    "t_stop": float,
    "t_step": float,
    "n": int,
    "trials": int,
    "seed": int,
    "master_seed": int,
    "include_empirical": "bool",
    "loss_eff": "loss",
}


def _parse_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_loss(v: str) -> float | None:
    low = v.strip().lower()
    if low in ("", "none", "off"):
        return None
    if low == "detector":
        return DETECTION_EFFICIENCY
    return float(v)


def parse_config(text: str) -> SweepConfig:
    """Parse ``key=value`` lines into a validated :class:`SweepConfig`.

    State lines (``coherent=0,0``, ``squeezed_pure=r``,
    ``squeezed_db=sqz,antisqz``, ``thermal=r``) may repeat; if any is present
    they replace the default state list. ``#`` starts a comment.

    Raises:
        ConfigError: with the line number of the offending entry
    """
    values: dict = {}
    lines: dict = {}
    states = []
    state_lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "expected key=value", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in FAMILIES:
            try:
                params = tuple(float(p) for p in value.split(",")) if value else ()
                spec = StateSpec(key, params)
                spec.build()
            except ConfigError as e:
                raise ConfigError(key, e.message, lineno) from None
            except ValueError:
                raise ConfigError(key, f"unparsable value {value!r}", lineno) from None
            states.append(spec)
            state_lines.append(lineno)
            continue
        if key not in _SCALAR_KEYS:
            raise ConfigError(key, "unknown key", lineno)
        kind = _SCALAR_KEYS[key]
        try:
            if kind == "bool":
                parsed = _parse_bool(value)
            elif kind == "loss":
                parsed = _parse_loss(value)
            else:
                parsed = kind(value)
        except ValueError:
            raise ConfigError(key, f"unparsable value {value!r}", lineno) from None
        name = "master_seed" if key == "seed" else key
        values[name] = parsed
        lines[name] = lineno
    if states:
        values["states"] = tuple(states)
        lines["states"] = state_lines[0]
    try:
        return SweepConfig(**values)
    except ConfigError as e:
        raise ConfigError(e.field, e.message, lines.get(e.field)) from None


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text())


# --- sweep results --------------------------------------------------------


def sweep_header(with_empirical: bool) -> list[str]:
    cols = ["format_version", "state", "t", *REPORT_FIELDS, *FLAG_FIELDS]
    if with_empirical:
        for q in QUANTITIES:
            cols += [f"emp_{q}", f"emp_{q}_err"]
        cols.append("emp_clamp_count")
    return cols


def _sweep_rows(result: SweepResult):
    emp = result.has_empirical
    for row in result.rows:
        a = row.analytic
        out = [str(FORMAT_VERSION), row.state, fmt(row.t)]
        out += [fmt(getattr(a, f)) for f in REPORT_FIELDS]
        out += [str(int(getattr(a, f))) for f in FLAG_FIELDS]
        if emp:
            for q in QUANTITIES:
                s = row.error_bars[q]
                out += [fmt(s.mean), fmt(s.rms_error_bar)]
            out.append(str(row.clamp_count))
        yield out


def bounds_table(result: SweepResult, points: int = 200):
    """Rows ``(state, series, epsilon, eta, epsilon_err, eta_err)`` for the
    error-disturbance plane: measured/analytic pairs plus the three bound
    curves on an error grid."""
    by_state: dict = {}
    for row in result.rows:
        by_state.setdefault(row.state, []).append(row)
    for state, rows in by_state.items():
        for r in rows:
            yield state, "analytic", r.analytic.epsilon, r.analytic.eta, None, None
        for r in rows:
            if r.error_bars is not None:
                eb = r.error_bars
                yield (
                    state,
                    "empirical",
                    eb["epsilon"].mean,
                    eb["eta"].mean,
                    eb["epsilon"].rms_error_bar,
                    eb["eta"].rms_error_bar,
                )
        sa, sb = rows[0].analytic.sigma_a, rows[0].analytic.sigma_b
        eps_max = 1.25 * max(r.analytic.epsilon for r in rows)
        grid = np.linspace(eps_max / points, eps_max, points)
        curves = bound_curves(grid, sa, sb)
        for series in ("heisenberg", "ozawa", "branciard"):
            for e, h in zip(grid, curves[series]):
                yield state, series, e, h, None, None


def write_results(result: SweepResult, out_dir) -> dict:
    """Write ``sweep.csv``, ``bounds.csv`` and ``report.json`` into ``out_dir``.

    Returns:
        dict: file kind -> path
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "sweep": out / "sweep.csv",
        "bounds": out / "bounds.csv",
        "report": out / "report.json",
    }
    with open(paths["sweep"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sweep_header(result.has_empirical))
        w.writerows(_sweep_rows(result))
    with open(paths["bounds"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["format_version", "state", "series", "epsilon", "eta", "epsilon_err", "eta_err"])
        for state, series, e, h, de, dh in bounds_table(result):
            w.writerow(
                [
                    FORMAT_VERSION,
                    state,
                    series,
                    fmt(e),
                    fmt(h),
                    "" if de is None else fmt(de),
                    "" if dh is None else fmt(dh),
                ]
            )
    with open(paths["report"], "w") as fh:
        json.dump(result.to_dict(), fh, indent=1, allow_nan=False)
        fh.write("\n")
    return paths


def read_report(path) -> SweepResult:
    with open(path) as fh:
        return SweepResult.from_dict(json.load(fh))


# --- recorded quadrature data ----------------------------------------------


class RecordedDataError(ValueError):
    """Malformed or inconsistent recorded-data file."""


@dataclass(frozen=True)
class RecordedDataset:
    basis: str
    t: float | None
    ch1: np.ndarray
    ch2: np.ndarray
    source: str = ""
    declared_n: int | None = None

    def batch(self) -> SampleBatch:
        return SampleBatch(self.basis, self.ch1, self.ch2, t=None if self.basis == "S" else self.t)


def write_recorded(path, batch: SampleBatch, t: float | None = None, seed: int | None = None) -> Path:
    """Write one record in the recorded-data CSV format."""
    path = Path(path)
    t = batch.t if t is None else t
    with open(path, "w") as fh:
        fh.write(f"# format_version={FORMAT_VERSION}\n")
        fh.write(f"# basis={batch.basis.lower()}\n")
        if t is not None:
            fh.write(f"# t={fmt(t)}\n")
        fh.write(f"# n={batch.n}\n")
        if seed is not None:
            fh.write(f"# seed={seed}\n")
        fh.writelines(f"{fmt(a)},{fmt(b)}\n" for a, b in zip(batch.ch1.tolist(), batch.ch2.tolist()))
    return path


def read_recorded(path) -> RecordedDataset:
    """Parse a recorded-data file.

    Raises:
        RecordedDataError: on missing metadata, malformed rows (with line
            number), an empty record or a count mismatch
    """
    meta: dict = {}
    ch1, ch2 = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = (s.strip() for s in body.split("=", 1))
                    meta[k.lower()] = v
                continue
            parts = line.split(",")
            try:
                if len(parts) != 2:
                    raise ValueError
                a, b = float(parts[0]), float(parts[1])
            except ValueError:
                raise RecordedDataError(f"{path}:{lineno}: malformed row {line[:40]!r}") from None
            ch1.append(a)
            ch2.append(b)
    basis = meta.get("basis", "").upper()
    if basis not in ("X", "P", "S"):
        raise RecordedDataError(f"{path}: missing or invalid basis in metadata")
    t = None
    if "t" in meta:
        try:
            t = float(meta["t"])
        except ValueError:
            raise RecordedDataError(f"{path}: invalid t={meta['t']!r}") from None
    elif basis != "S":
        raise RecordedDataError(f"{path}: missing t in metadata")
    if not ch1:
        raise RecordedDataError(f"{path}: no samples")
    declared = None
    if "n" in meta:
        declared = int(meta["n"])
        if declared != len(ch1):
            raise RecordedDataError(f"{path}: header declares n={declared} but found {len(ch1)} rows")
    return RecordedDataset(basis, t, np.array(ch1), np.array(ch2), str(path), declared)


@dataclass(frozen=True)
class RecordedAnalysis:
    report: EdrReport
    summaries: dict | None
    reports: tuple
    signal_source: str

    @property
    def clamp_count(self) -> int:
        return sum(r.branciard_clamped for r in self.reports)


def analyze_recorded(x_files, p_files, t: float, signal_files=None) -> RecordedAnalysis:
    """Estimate error, disturbance and the EDR left-hand sides from files.

    ``x_files``/``p_files`` are paired by position; several pairs give
    trial summaries. Without ``signal_files`` the signal spreads are inferred
    from the output records.

    Raises:
        RecordedDataError: on basis or transmission mismatch
    """
    if isinstance(x_files, (str, os.PathLike)):
        x_files = [x_files]
    if isinstance(p_files, (str, os.PathLike)):
        p_files = [p_files]
    if isinstance(signal_files, (str, os.PathLike)):
        signal_files = [signal_files]
    if len(x_files) != len(p_files) or not x_files:
        raise RecordedDataError("need the same, non-zero number of x and p files")
    if signal_files is not None and len(signal_files) != len(x_files):
        raise RecordedDataError("need one signal file per x/p pair")
    reports = []
    for k, (xf, pf) in enumerate(zip(x_files, p_files)):
        xd, pd = read_recorded(xf), read_recorded(pf)
        for ds, want in ((xd, "X"), (pd, "P")):
            if ds.basis != want:
                raise RecordedDataError(f"{ds.source}: basis mismatch, expected {want.lower()} got {ds.basis.lower()}")
            if not math.isclose(ds.t, t, rel_tol=0, abs_tol=1e-12):
                raise RecordedDataError(f"{ds.source}: t mismatch, file has {ds.t} but analysis uses {t}")
        sb = None
        if signal_files is not None:
            sd = read_recorded(signal_files[k])
            if sd.basis != "S":
                raise RecordedDataError(f"{sd.source}: basis mismatch, expected s got {sd.basis.lower()}")
            sb = sd.batch()
        reports.append(
            estimate_report(SampleBatch("X", xd.ch1, xd.ch2), SampleBatch("P", pd.ch1, pd.ch2), t, sb)
        )
    summaries = summarize_reports(reports) if len(reports) > 1 else None
    if summaries is None:
        report = reports[0]
    else:
        report = empirical_report(summaries, t, any(r.branciard_clamped for r in reports))
    return RecordedAnalysis(report, summaries, tuple(reports), "direct" if signal_files else "reconstructed")

