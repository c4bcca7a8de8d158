"""Scenario execution: dispatch, sweeps, and CSV/JSON serialization.

A hybrid run produces the trajectory TimeSeries; a quantum run produces a
correlator table over the configured photon numbers.  Outputs are
deterministic for a fixed configuration (no randomness, fixed formats);
wall time is reported on the in-memory result only, never serialized.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass

import numpy as np

from . import quantum_channel as qc
from .config import SCHEMA, ConfigError, ScenarioConfig, render_config, _float, _float_list
from .hybrid_dynamics import HybridState, Regime, TimeSeries, integrate
from .spin_algebra import bell_phi_minus, expm_hermitian

__all__ = ["RunResult", "run_scenario", "sweep", "write_output",
           "HYBRID_CSV_HEADER", "QUANTUM_CSV_HEADER"]

HYBRID_CSV_HEADER = ("t", "x1", "v1", "x2", "v2", "s1x", "s1y", "s1z",
                     "s2x", "s2y", "s2z", "otoc", "two_point_re", "two_point_im",
                     "h0", "h_nv", "v_int")
QUANTUM_CSV_HEADER = ("t", "n", "otoc", "thermal_otoc", "thermal_concurrence",
                      "concurrence", "gme")


@dataclass
class RunResult:
    """A finished run: the echoed configuration, its records, integrator
    diagnostics, and wall time."""

    config: ScenarioConfig
    kind: str
    series: TimeSeries | None
    qtable: dict[str, np.ndarray] | None
    diagnostics: dict
    wall_time_s: float

    @property
    def config_text(self) -> str:
        return render_config(self.config)


def _run_hybrid(cfg: ScenarioConfig) -> tuple[TimeSeries, dict]:
    sp = cfg.spin_params()
    op = cfg.osc_params()
    regime = Regime.classify(op)
    initial = HybridState(t=0.0, x1=cfg.x1, v1=cfg.v1, x2=cfg.x2, v2=cfg.v2,
                          psi=cfg.initial_spin_state())
    series = integrate(initial, op, sp, regime, t_end=cfg.t_end,
                       dt_out=cfg.resolved_dt_out(), tol=cfg.tol)
    d = series.diagnostics
    diagnostics = {
        "regime": regime.value,
        "n_steps": d.n_steps,
        "n_rejected": d.n_rejected,
        "max_step_norm_drift": d.max_step_norm_drift,
        "cum_norm_drift": d.cum_norm_drift,
        "max_step_unitarity_defect": d.max_step_unitarity_defect,
        "cum_unitarity_defect": d.cum_unitarity_defect,
        "max_output_norm_drift": d.max_output_norm_drift,
        "max_output_unitarity_defect": d.max_output_unitarity_defect,
        "max_separability_defect": float(series.sep_defect.max()),
    }
    return series, diagnostics


def _run_quantum(cfg: ScenarioConfig) -> tuple[dict[str, np.ndarray], dict]:
    dt = cfg.resolved_dt_out()
    n_out = max(1, round(cfg.t_end / dt)) if cfg.t_end > 0 else 0
    ts = np.linspace(0.0, cfg.t_end, n_out + 1)
    psi0 = cfg.initial_spin_state()
    bell = bell_phi_minus()
    rho_bell = np.outer(bell, bell.conj())

    cols = {name: [] for name in QUANTUM_CSV_HEADER}
    for n in cfg.n_values:
        p = cfg.quantum_params(n)
        H = qc.h_total(p)
        for t in ts:
            U = expm_hermitian(H, t)
            cols["t"].append(t)
            cols["n"].append(n)
            cols["otoc"].append(qc.otoc_numeric(p, t, psi0))
            cols["thermal_otoc"].append(qc.thermal_otoc(p, t))
            cols["thermal_concurrence"].append(qc.thermal_concurrence(p, t))
            c = qc.concurrence(U @ rho_bell @ U.conj().T)
            cols["concurrence"].append(c)
            cols["gme"].append(qc.gme(c))
    table = {name: np.asarray(values) for name, values in cols.items()}
    diagnostics = {"n_values": list(cfg.n_values), "samples_per_n": int(ts.size)}
    return table, diagnostics


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    """Execute one validated configuration deterministically."""
    cfg.validate()
    start = time.perf_counter()
    if cfg.kind == "hybrid":
        series, diagnostics = _run_hybrid(cfg)
        qtable = None
    else:
        qtable, diagnostics = _run_quantum(cfg)
        series = None
    return RunResult(config=cfg, kind=cfg.kind, series=series, qtable=qtable,
                     diagnostics=diagnostics, wall_time_s=time.perf_counter() - start)


def _resolve_parameter(parameter: str) -> str:
    """Map 'section.key' or a bare unambiguous key to a config attribute."""
    if "." in parameter:
        section, key = parameter.split(".", 1)
        try:
            attr, caster = SCHEMA[section][key]
        except KeyError:
            raise ConfigError(f"unknown config field {parameter!r}") from None
    else:
        matches = [(sec, key, attr, caster) for sec, keys in SCHEMA.items()
                   for key, (attr, caster) in keys.items() if key == parameter]
        if not matches:
            raise ConfigError(f"unknown config field {parameter!r}")
        if len(matches) > 1:
            options = ", ".join(f"{m[0]}.{m[1]}" for m in matches)
            raise ConfigError(f"ambiguous field {parameter!r}; qualify as one of: {options}")
        _, _, attr, caster = matches[0]
    if caster not in (_float, _float_list):
        raise ConfigError(f"{parameter!r} is not a numeric field")
    return attr


def sweep(cfg: ScenarioConfig, parameter: str, values: list[float]) -> list[RunResult]:
    """Run the scenario once per value of a numeric config field.

    Results preserve the order of ``values``; runs are independent (a run
    failure propagates with the offending value named).
    """
    attr = _resolve_parameter(parameter)
    results = []
    for value in values:
        if not isinstance(value, (int, float)):
            raise ConfigError(f"sweep values must be numbers, got {value!r}")
        if attr == "n_values":
            swept = dataclasses.replace(cfg, n_values=(float(value),))
        else:
            swept = dataclasses.replace(cfg, **{attr: float(value)})
        # a K sweep overrides any preset D and vice versa
        if attr == "K":
            swept = dataclasses.replace(swept, D=None)
        elif attr == "D":
            swept = dataclasses.replace(swept, K=None)
        try:
            results.append(run_scenario(swept.validate()))
        except Exception as exc:
            if hasattr(exc, "add_note"):
                exc.add_note(f"while sweeping {parameter} = {value}")
            raise
    return results


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _hybrid_rows(series: TimeSeries):
    for k in range(len(series)):
        yield (series.t[k], series.x1[k], series.v1[k], series.x2[k], series.v2[k],
               series.s1x[k], series.s1y[k], series.s1z[k],
               series.s2x[k], series.s2y[k], series.s2z[k],
               series.otoc[k], series.two_point[k].real, series.two_point[k].imag,
               series.h0[k], series.h_nv[k], series.v_int[k])


def _quantum_rows(qtable: dict[str, np.ndarray]):
    size = qtable["t"].size
    for k in range(size):
        yield tuple(qtable[name][k] for name in QUANTUM_CSV_HEADER)


def write_output(result: RunResult, fmt: str, path: str) -> None:
    """Serialize a run to CSV (pinned header, 17 significant digits) or JSON
    (same records plus configuration echo and diagnostics)."""
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    header = HYBRID_CSV_HEADER if result.kind == "hybrid" else QUANTUM_CSV_HEADER
    rows = _hybrid_rows(result.series) if result.kind == "hybrid" \
        else _quantum_rows(result.qtable)
    if fmt == "csv":
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
        return
    records = [dict(zip(header, (float(v) for v in row))) for row in rows]
    payload = {
        "config_text": result.config_text,
        "kind": result.kind,
        "records": records,
        "diagnostics": result.diagnostics,
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
