"""Command-line front door.

    wsn-twin run SCENARIO [--fast | --paced N] [--port P] [--out DIR]
    wsn-twin replay-paper [--fast | --paced N] [--port P] [--out DIR]
    wsn-twin export --journal FILE --format csv|summary --out FILE
    wsn-twin validate SCENARIO

Exit codes: 0 success, 1 internal invariant violation, 2 usage error.
Sensor or radio failures are data, not errors: a run that loses every
frame still exits 0 and reports the losses in its summary.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime
from pathlib import Path

import click

from .config import ConfigError, ServiceConfig, load_config
from .engine import (
    JOURNAL_FILENAME,
    SUMMARY_FILENAME,
    PacedRunner,
    SimulationContext,
    SimulationEngine,
)
from .gateway import MissingApiKey
from .ingest import HttpTransport
from .profile import sample_dht11, sample_flame, sample_soil
from .scenario import (
    ParseError,
    REFERENCE_SPOT,
    Scenario,
    SchemaViolation,
    load_scenario,
    paper_day,
)
from .telemetry import TelemetryStore

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2


class NoJournal(click.ClickException):
    exit_code = EXIT_USAGE


def _build_engine(scenario: Scenario, out_dir: Path, config: ServiceConfig) -> SimulationEngine:
    transport = HttpTransport() if config.uplink_url else None
    return SimulationEngine(
        scenario,
        out_dir=out_dir,
        api_key=config.api_key,
        uplink_transport=transport,
        uplink_url=config.uplink_url,
    )


def _run_paced(engine: SimulationEngine, speedup: float, port: int, config: ServiceConfig) -> None:
    import uvicorn

    from .service import create_app

    context = SimulationContext(engine)
    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(context, config, frontend_dir=frontend if frontend.is_dir() else None)
    runner = PacedRunner(context, speedup=speedup)
    runner.start()
    click.echo(f"paced run at x{speedup:g}; control api on http://127.0.0.1:{port}")
    try:
        uvicorn.run(app, host="0.0.0.0", port=port, log_level="warning")
    finally:
        runner.stop()
        with context.lock:
            engine.finish()


def _echo_summary(engine: SimulationEngine, out_dir: Path) -> None:
    summary = engine.summary()
    counts = summary["readings_per_node"]
    click.echo(
        f"run complete: {summary['sample_instants']} sample instants, "
        f"readings n1/n2/n3: {counts['node1']}/{counts['node2']}/{counts['node3']}, "
        f"alarm events: {len(summary['alarm_events'])}, "
        f"delivery failure rate: {summary['delivery_failure_rate']:.3f}"
    )
    click.echo(f"artifacts: {out_dir / JOURNAL_FILENAME}, {out_dir / SUMMARY_FILENAME}")


@click.group()
def main() -> None:
    """Deterministic digital twin of an NRF24-class industrial sensor network."""


@main.command(name="run")
@click.argument("scenario_path", type=click.Path(path_type=Path))
@click.option("--fast", is_flag=True, default=False, help="Run to completion immediately (the default mode).")
@click.option("--paced", "speedup", type=float, default=None, help="Pace simulated time at wall-clock x N with the control API live.")
@click.option("--port", type=int, default=None, help="Control API port for paced mode.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("out"), show_default=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None, help="Service config JSON.")
def run_cmd(scenario_path: Path, fast: bool, speedup: float | None, port: int | None, out_dir: Path, config_path: Path | None) -> None:
    """Run a scenario file and write journal + summary artifacts."""
    if fast and speedup is not None:
        raise click.UsageError("--fast and --paced are mutually exclusive")
    scenario = _load_or_exit(scenario_path)
    config = _config_or_exit(config_path, port)
    engine = _build_or_exit(scenario, out_dir, config)
    if speedup is not None:
        _run_paced(engine, speedup, config.port, config)
    else:
        engine.run_fast()
    _echo_summary(engine, out_dir)


@main.command(name="replay-paper")
@click.option("--paced", "speedup", type=float, default=None, help="Pace the replay with the control API live.")
@click.option("--port", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=Path("out"), show_default=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
def replay_paper_cmd(speedup: float | None, port: int | None, out_dir: Path, config_path: Path | None) -> None:
    """Replay the bundled reference-day scenario and print the spot-check table."""
    scenario = paper_day()
    config = _config_or_exit(config_path, port)
    engine = _build_or_exit(scenario, out_dir, config)

    spot_t = scenario.clock_to_t_us(REFERENCE_SPOT["clock"])
    flame = sample_flame(scenario.profile, spot_t)
    soil = sample_soil(scenario.profile, spot_t)
    dht = sample_dht11(scenario.profile, spot_t, engine.dht_node.noise)

    if speedup is not None:
        _run_paced(engine, speedup, config.port, config)
    else:
        engine.run_fast()

    click.echo(f"spot sample at {REFERENCE_SPOT['clock']} ({REFERENCE_SPOT['date']}):")
    click.echo(f"  {'parameter':<16}{'reference':>10}{'simulated':>11}")
    click.echo(f"  {'temp_c':<16}{REFERENCE_SPOT['temp_c']:>10}{dht.temp_c:>11}")
    click.echo(f"  {'humidity_pct':<16}{REFERENCE_SPOT['humidity_pct']:>10}{dht.humidity_pct:>11}")
    click.echo(f"  {'soil_adc':<16}{REFERENCE_SPOT['soil_adc']:>10}{soil.adc:>11}")
    click.echo(f"  {'flame_adc':<16}{0:>10}{flame.adc:>11}")
    _echo_summary(engine, out_dir)


@main.command(name="export")
@click.option("--journal", "journal_path", type=click.Path(path_type=Path), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "summary"]), default="csv", show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--node", "nodes", multiple=True, help="Restrict CSV export to these nodes.")
@click.option("--from", "from_iso", default=None, help="Range start, ISO-8601.")
@click.option("--to", "to_iso", default=None, help="Range end, ISO-8601.")
def export_cmd(journal_path: Path, fmt: str, out_path: Path, nodes: tuple[str, ...], from_iso: str | None, to_iso: str | None) -> None:
    """Export a run journal as CSV, or re-emit its run summary."""
    if not journal_path.is_file():
        raise NoJournal(f"no journal at {journal_path}")
    if fmt == "summary":
        summary_path = journal_path.parent / SUMMARY_FILENAME
        if not summary_path.is_file():
            raise NoJournal(f"no run summary next to the journal ({summary_path})")
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(summary_path.read_text(encoding="utf-8"), encoding="utf-8")
        click.echo(f"summary written to {out_path}")
        return

    store = TelemetryStore.open(journal_path)
    store.close()
    try:
        from_us = store.to_t_us(datetime.fromisoformat(from_iso)) if from_iso else None
        to_us = store.to_t_us(datetime.fromisoformat(to_iso)) if to_iso else None
    except ValueError as exc:
        raise click.UsageError(f"bad ISO-8601 range: {exc}")
    csv_text = store.export_csv(nodes=nodes or None, from_us=from_us, to_us=to_us)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(csv_text, encoding="utf-8", newline="")
    click.echo(f"csv written to {out_path}")


@main.command(name="validate")
@click.argument("scenario_path", type=click.Path(path_type=Path))
def validate_cmd(scenario_path: Path) -> None:
    """Validate a scenario file and echo the fully-defaulted configuration."""
    scenario = _load_or_exit(scenario_path)
    click.echo(json.dumps(scenario.echo, indent=2, sort_keys=True))
    click.echo(
        f"valid: {scenario.name!r}, {len(scenario.profile.sample_instants())} sample instants",
        err=True,
    )


def _load_or_exit(path: Path) -> Scenario:
    try:
        return load_scenario(path)
    except ParseError as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except SchemaViolation as exc:
        click.echo("scenario is invalid:", err=True)
        for problem in exc.problems:
            click.echo(f"  - {problem}", err=True)
        sys.exit(EXIT_USAGE)


def _config_or_exit(config_path: Path | None, port_override: int | None) -> ServiceConfig:
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    if port_override is not None:
        config = ServiceConfig(port=port_override, api_key=config.api_key, uplink_url=config.uplink_url)
    return config


def _build_or_exit(scenario: Scenario, out_dir: Path, config: ServiceConfig) -> SimulationEngine:
    try:
        return _build_engine(scenario, out_dir, config)
    except MissingApiKey as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_USAGE)


if __name__ == "__main__":
    main()
