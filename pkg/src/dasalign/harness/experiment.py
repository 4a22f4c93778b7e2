"""End-to-end experiment: run trials, aggregate, write CSVs and figures."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import report
from .config import ConfigError, ExperimentConfig
from .runner import rate_cdf, rate_samples, run_trials, summarize

log = logging.getLogger(__name__)


@dataclass
class ExperimentOutput:
    summary: list[dict]
    rows: list
    files: dict[str, Path] = field(default_factory=dict)


def _prepare_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentOutput:
    """Run every configured trial and write the result files into ``config.output_dir``.

    Files: ``summary.csv`` always; ``fig3.csv`` (misalignment against pilot
    length) unless the preset is ``fig4``; ``fig4.csv`` and ``fig4_rates.csv``
    (rate CDF at the longest pilot) unless the preset is ``fig3``; PNG figures
    next to them when plotting is on; trace CSVs on request.
    """
    out_dir = _prepare_dir(config.output_dir)
    rows, traces = run_trials(config, trace=config.trace)
    summary = summarize(rows)
    result = ExperimentOutput(summary, rows)
    files = result.files

    files["config"] = out_dir / "config.json"
    files["config"].write_text(json.dumps(config.to_dict(), indent=2))
    files["summary"] = report.write_csv(out_dir / "summary.csv", summary)

    if config.preset != "fig4":
        files["fig3"] = report.write_csv(out_dir / "fig3.csv", summary, report.FIG3_COLUMNS)
        if config.plots:
            files["fig3_png"] = report.plot_misalignment(summary, out_dir / "fig3.png")

    if config.preset != "fig3":
        t_cdf = max(config.pilot_lengths)
        samples = rate_samples(rows, t_cdf)
        cdf = rate_cdf(samples, config.cdf_points)
        files["fig4"] = report.write_csv(out_dir / "fig4.csv", cdf, report.FIG4_COLUMNS)
        files["fig4_rates"] = report.write_csv(
            out_dir / "fig4_rates.csv",
            ({"method": r.method, "trial": r.trial, "user": k, "rate_bps_hz": rate}
             for r in rows if r.pilot_length == t_cdf for k, rate in enumerate(r.rates)),
            ["method", "trial", "user", "rate_bps_hz"])
        if config.plots:
            files["fig4_png"] = report.plot_rate_cdf(cdf, out_dir / "fig4.png", t_cdf)

    if config.trace and traces:
        files["trace"] = report.write_csv(out_dir / "pair_trace.csv", traces)
    for name, path in files.items():
        log.info("wrote %s: %s", name, path)
    return result
