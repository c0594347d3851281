"""End-to-end runs driven by a JSON configuration.

Stages, in execution order: ``simulate-qst``, ``simulate-set``,
``reconstruct``, ``metrics``, ``visibility``, ``report``. Each stage only
reads what earlier stages produced; the report file is written whenever at
least one stage ran.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from . import formats
from .measurement import DOFS, ProtocolConfig, qst_state, simulate_qst, simulate_set
from .metrics import _MetricVector, state_metrics
from .states import SourceConfig, calibrate_phase_gradient, hyper_state_kappa, path_state, pol_state
from .tomography import mle_reconstruct, resample_uncertainty
from .visibility import MEASURED_BS_INTENSITIES, bs_table, check_purity_consistency, table_bounds

log = logging.getLogger(__name__)

STAGES = ("simulate-qst", "simulate-set", "reconstruct", "metrics", "visibility", "report")
COLUMNS = (("path", "QST"), ("polarization", "QST"), ("path", "SET"), ("polarization", "SET"))
# Bound each path purity is compared against.
CONSISTENCY_PAIRS = {"QST": "H", "SET": "V"}

MECHANISM_NOTE = (
    "QST traces the kappa (in-hole momentum) subsystems; SET projects them onto the "
    "central bin, as a narrowband seed does. With kappa-polarization correlations the "
    "SET polarization state is purer than the QST one, while path is unaffected. Loss "
    "of SET purity from apparatus effects (scattered seed, drifts) is not modelled, and "
    "the simulated path analyzers are ideal, so path purities may exceed the beam-splitter "
    "ceilings in the visibility section."
)


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field when known."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


@dataclass
class RunConfig:
    source: SourceConfig
    protocol: ProtocolConfig
    bs_intensities: dict
    outputs: dict
    pipeline: list
    target_pol_purity: float | None = None
    n_resamples: int = 200
    n_jobs: int = 1


def _get(d, key, default, kind=float):
    if key not in d:
        return default
    try:
        return kind(d[key])
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r} must be {kind.__name__}, got {d[key]!r}", key=key) from None


def _section(doc, key):
    sec = doc.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {key!r} must be an object", key=key)
    return sec


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("top-level JSON value must be an object")
    src = _section(doc, "source")
    profile = src.get("kappa_weight_profile", {"kind": "uniform"})
    if isinstance(profile, str):
        profile = {"kind": profile}
    target = src.get("target_pol_purity")
    try:
        source = SourceConfig(
            phi=_get(src, "phi_rad", 0.0),
            theta=_get(src, "theta_rad", 0.0),
            kappa_bins=_get(src, "kappa_bins", 21, int),
            kappa_phase_gradient=_get(src, "kappa_phase_gradient_rad", 0.0),
            kappa_profile=profile.get("kind", "uniform"),
            kappa_sigma=profile.get("sigma"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key="source") from None
    if target is not None:
        if "kappa_phase_gradient_rad" in src:
            raise ConfigError("give either kappa_phase_gradient_rad or target_pol_purity, not both",
                              key="target_pol_purity")
        target = _get(src, "target_pol_purity", None)
        if not 0.5 <= target <= 1.0:
            raise ConfigError("target_pol_purity must lie in [0.5, 1]", key="target_pol_purity")

    p = _section(doc, "protocol")
    try:
        protocol = ProtocolConfig(
            qst_rate_scale=_get(p, "qst_rate_scale_hz", 100.0),
            qst_duration_per_setting=_get(p, "qst_duration_per_setting_s", 60.0),
            car=_get(p, "car", 100.0),
            gate_window=_get(p, "gate_window_s", 9e-9),
            set_gain=_get(p, "set_gain", 1e4),
            set_noise_fraction=_get(p, "set_noise_fraction", 0.01),
            set_background_fraction=_get(p, "set_background_fraction", 0.0),
            set_duration_per_setting=_get(p, "set_duration_per_setting_s", 2.0),
            rng_seed=_get(p, "rng_seed", 0, int),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key="protocol") from None

    tomo = _section(doc, "tomography")
    n_resamples = _get(tomo, "n_resamples", 200, int)
    if n_resamples < 2:
        raise ConfigError("n_resamples must be at least 2", key="n_resamples")

    intensities = dict(MEASURED_BS_INTENSITIES)
    for wl, pols in _section(doc, "bs_table").items():
        for pol, vals in pols.items():
            try:
                intensities[(wl, pol)] = (float(vals["r2"]), float(vals["t2"]))
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"bs_table entry {wl}/{pol} needs numeric r2 and t2", key=wl) from None
    try:
        bs_table(intensities)
    except ValueError as exc:
        raise ConfigError(str(exc), key="bs_table") from None

    outputs = {"report_path": "out/report.json", "records_path": "out/records.csv",
               "matrices_path": "out/matrices"}
    outputs.update(_section(doc, "outputs"))

    pipeline = doc.get("pipeline", list(STAGES))
    if not isinstance(pipeline, list) or any(s not in STAGES for s in pipeline):
        raise ConfigError(f"pipeline must be a list drawn from {', '.join(STAGES)}", key="pipeline")

    return RunConfig(source, protocol, intensities, outputs, pipeline, target,
                     n_resamples, _get(tomo, "n_jobs", 1, int))


def _key_line(text: str, key) -> int | None:
    if key is None:
        return None
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def load_config(path) -> RunConfig:
    """Parse and validate a config file; errors carry a line number when one can be found."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    try:
        return config_from_dict(doc)
    except ConfigError as exc:
        exc.line = _key_line(text, exc.key)
        raise


def _targets():
    # Fidelity references: phi = 0 and theta = 0.
    return {"polarization": pol_state(0.0), "path": path_state(0.0)}


def _resolved_source(cfg: RunConfig) -> SourceConfig:
    if cfg.target_pol_purity is None:
        return cfg.source
    alpha = calibrate_phase_gradient(cfg.target_pol_purity, cfg.source)
    return replace(cfg.source, kappa_phase_gradient=alpha)


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _column(dof, protocol):
    return f"{dof.capitalize()} {protocol}"


def run(cfg: RunConfig) -> dict:
    """Execute the configured stages and write outputs. Returns the report dict."""
    stages = [s for s in STAGES if s in cfg.pipeline]
    state = {"records": {}, "results": {}, "metrics": {}}
    report: dict = {}
    if not stages:
        return report

    source = _resolved_source(cfg)
    report["source"] = {
        "phi_rad": source.phi, "theta_rad": source.theta, "kappa_bins": source.kappa_bins,
        "kappa_phase_gradient_rad": source.kappa_phase_gradient,
        "kappa_weight_profile": source.kappa_profile, "kappa_sigma": source.kappa_sigma,
    }
    report["protocol"] = asdict(cfg.protocol)
    report["basis_labels"] = {dof: list(formats.BASIS_LABELS[dof]) for dof in DOFS}
    report["stages"] = stages

    full = None
    for stage in stages:
        try:
            if stage in ("simulate-qst", "simulate-set") and full is None:
                full = hyper_state_kappa(source)
            if stage == "simulate-qst":
                for dof in DOFS:
                    state["records"][(dof, "QST")] = simulate_qst(qst_state(full, dof), cfg.protocol, dof)
            elif stage == "simulate-set":
                for dof in DOFS:
                    state["records"][(dof, "SET")] = simulate_set(full, cfg.protocol, dof, source)
            elif stage == "reconstruct":
                _stage_reconstruct(cfg, state, report)
            elif stage == "metrics":
                _stage_metrics(cfg, state, report)
            elif stage == "visibility":
                _stage_visibility(cfg, state, report)
            elif stage == "report":
                _stage_report(cfg, state, report)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc

    if state["records"]:
        records = [r for key in COLUMNS if key in state["records"] for r in state["records"][key]]
        buf = io.StringIO()
        formats.records_to_csv(records, buf)
        _write(cfg.outputs["records_path"], buf.getvalue())
    _write(cfg.outputs["report_path"], json.dumps(report, indent=2) + "\n")
    return report


def _stage_reconstruct(cfg, state, report):
    if not state["records"]:
        raise ValueError("no records to reconstruct; run a simulate stage first")
    outdir = Path(cfg.outputs["matrices_path"])
    outdir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for dof, protocol in COLUMNS:
        if (dof, protocol) not in state["records"]:
            continue
        res = mle_reconstruct(state["records"][(dof, protocol)], seed=cfg.protocol.rng_seed)
        state["results"][(dof, protocol)] = res
        stem = f"{dof}_{protocol}"
        formats.export_matrix_plotdata(res.rho, outdir / f"{stem}.csv", dof)
        _write(outdir / f"{stem}.json", json.dumps(formats.result_to_dict(res), indent=1) + "\n")
        summary[_column(dof, protocol)] = {
            "converged": res.converged, "iterations": res.iterations, "log_likelihood": res.log_likelihood,
        }
    report["reconstruction"] = summary


def _stage_metrics(cfg, state, report):
    if not state["results"]:
        raise ValueError("no reconstructions; run the reconstruct stage first")
    targets = _targets()
    out = {}
    for i, (dof, protocol) in enumerate(COLUMNS):
        if (dof, protocol) not in state["results"]:
            continue
        rho = state["results"][(dof, protocol)].rho
        _, std = resample_uncertainty(
            state["records"][(dof, protocol)], cfg.n_resamples, _MetricVector(targets[dof]),
            seed=cfg.protocol.rng_seed + 1000 * (i + 1), n_jobs=cfg.n_jobs,
        )
        m = state_metrics(rho, targets[dof], std)
        state["metrics"][(dof, protocol)] = m
        out[_column(dof, protocol)] = {label: {"value": v, "std": s} for label, v, s in m.rows()}
    report["metrics"] = out


def _stage_visibility(cfg, state, report):
    bounds = table_bounds(bs_table(cfg.bs_intensities))
    section = {"bounds": bounds, "consistency": {}}
    for protocol, pol in CONSISTENCY_PAIRS.items():
        m = state["metrics"].get(("path", protocol))
        if m is None or pol not in bounds:
            continue
        section["consistency"][f"Path {protocol} vs {pol} bound"] = check_purity_consistency(
            m.purity, bounds[pol]["purity_bound"], m.purity_std or 0.0)
    report["visibility"] = section


def _stage_report(cfg, state, report):
    if not state["metrics"]:
        raise ValueError("no metrics to tabulate; run the metrics stage first")
    cols = {_column(d, p): state["metrics"][(d, p)] for d, p in COLUMNS if (d, p) in state["metrics"]}
    table = formats.metrics_table(cols)
    report["table"] = table
    report["notes"] = [MECHANISM_NOTE]
    table_path = Path(cfg.outputs["report_path"]).with_suffix(".table.csv")
    _write(table_path, formats.metrics_table_csv(table))
