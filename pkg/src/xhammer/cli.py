"""Command-line front end.

The CLI is a thin client of the HTTP service: every command reads local
files, posts one request, and writes the response to local artifacts.
Without --server the service app runs in-process, so the commands work
standalone; with --server they target a remote instance.

Exit codes: 0 flip (or success), 2 no-flip within max_pulses, 1 error.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_FLIP = 2


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app(), raise_server_exceptions=False)


def _read_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise click.ClickException(f"{what} file not found: {path}")
    except json.JSONDecodeError as err:
        raise click.ClickException(f"{what} file is not valid JSON: {path}: {err}")


def _post(ctx: click.Context, endpoint: str, payload: dict) -> dict:
    t0 = time.monotonic()
    with _client(ctx.obj["server"]) as client:
        resp = client.post(endpoint, json=payload)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        if isinstance(detail, list):
            detail = "\n".join(str(d) for d in detail)
        raise click.ClickException(f"{endpoint} failed ({resp.status_code}):\n{detail}")
    if ctx.obj["verbose"]:
        click.echo(f"[{endpoint}] {time.monotonic() - t0:.1f} s", err=True)
    return resp.json()


def _write_json(path: Path, data: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _attach_kernel(payload: dict, config: dict) -> None:
    """Inline a path-based kernel artifact so the server never needs our files."""
    source = config.get("alpha_source", "compute")
    if source != "compute":
        payload["alpha_kernel"] = _read_json(source, "alpha kernel")
        config = dict(config)
        config["alpha_source"] = "compute"
        payload["config"] = config


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Remote service URL; default runs the service in-process.")
@click.option("--verbose", is_flag=True, help="Print request timing to stderr.")
@click.pass_context
def main(ctx, server, verbose):
    """Electro-thermal hammering-attack simulator for ReRAM crossbars."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    ctx.obj["verbose"] = verbose


@main.command("extract-alpha")
@click.option("-c", "--config", "config_path", required=True, type=click.Path())
@click.option("-o", "--out", "out_path", required=True, type=click.Path())
@click.pass_context
def extract_alpha(ctx, config_path, out_path):
    """Extract the thermal-coupling kernel and write the artifact JSON."""
    config = _read_json(config_path, "config")
    artifact = _post(ctx, "/alpha/extract", {"config": config})
    _write_json(Path(out_path), artifact)
    alphas = {(e["di"], e["dj"]): e["value"] for e in artifact["alpha"]}
    neighbours = {k: v for k, v in alphas.items() if k != (0, 0)}
    click.echo(f"r_th = {artifact['r_th_K_per_W']:.4g} K/W")
    if neighbours:
        nearest = max(neighbours.values())
        click.echo(
            f"kernel: {len(alphas)} offsets, nearest-neighbour alpha = {nearest:.4g}, "
            f"total coupling = {sum(neighbours.values()):.4g}"
        )
    else:
        click.echo("kernel: single cell, no thermal coupling exists")
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("-c", "--config", "config_path", required=True, type=click.Path())
@click.option("-o", "--out", "out_dir", required=True, type=click.Path())
@click.option("--trace", is_flag=True, help="Record per-pulse samples to trace.csv.")
@click.pass_context
def simulate(ctx, config_path, out_dir, trace):
    """Run one attack; exit 0 on flip, 2 if no flip within max_pulses."""
    config = _read_json(config_path, "config")
    payload = {"config": config, "trace": trace}
    _attach_kernel(payload, config)
    result = _post(ctx, "/attack/simulate", payload)

    out = Path(out_dir)
    trace_data = result.pop("trace", None)
    _write_json(out / "result.json", result)
    click.echo(f"wrote {out / 'result.json'}")
    if trace and trace_data:
        with open(out / "trace.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["pulse_index", "victim_x", "victim_T_K", "aggressor_T_K"])
            rows = zip(
                trace_data["pulse_index"],
                trace_data["victim_x"],
                trace_data["victim_T_K"],
                trace_data["aggressor_T_K"],
            )
            for row in rows:
                w.writerow(row)
        click.echo(f"wrote {out / 'trace.csv'}")
    if result["flipped"]:
        click.echo(f"flipped after {result['pulses_to_flip']} pulses")
        ctx.exit(EXIT_OK)
    click.echo("no flip within max_pulses")
    ctx.exit(EXIT_NO_FLIP)


@main.command()
@click.option("-c", "--config", "config_path", required=True, type=click.Path())
@click.option("-o", "--out", "out_path", required=True, type=click.Path())
@click.option("--threads", type=int, default=None, help="Worker pool size.")
@click.pass_context
def sweep(ctx, config_path, out_path, threads):
    """Run the configured sweep and write a CSV of pulses-to-flip."""
    config = _read_json(config_path, "config")
    payload = {"config": config, "workers": threads}
    _attach_kernel(payload, config)
    result = _post(ctx, "/attack/sweep", payload)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["swept_value", "pulses_to_flip", "flipped"])
        for row in result["rows"]:
            n = row["pulses_to_flip"]
            w.writerow([row["value"], "" if n is None else n, row["flipped"]])
    click.echo(f"wrote {out_path} ({len(result['rows'])} rows)")


@main.command()
@click.option("-c", "--config", "config_path", required=True, type=click.Path())
@click.option("-r", "--reference", "ref_path", required=True, type=click.Path())
@click.option("-o", "--out", "out_path", required=True, type=click.Path())
@click.pass_context
def calibrate(ctx, config_path, ref_path, out_path):
    """Fit kinetic parameters to reference pulse counts."""
    config = _read_json(config_path, "config")
    ref = _read_json(ref_path, "reference")
    payload = {
        "config": config,
        "reference": ref.get("points", []),
        "free": ref.get("free", ["k0"]),
    }
    _attach_kernel(payload, config)
    result = _post(ctx, "/calibrate", payload)
    _write_json(Path(out_path), result)
    click.echo(f"fitted {', '.join(result['free'])}:")
    for name in result["free"]:
        click.echo(f"  {name} = {result['device'][name]:.6g}")
    click.echo("residuals:")
    for r in result["residuals"]:
        cond = []
        if r["pulse_length_ns"] is not None:
            cond.append(f"{r['pulse_length_ns']:g} ns")
        if r["ambient_K"] is not None:
            cond.append(f"{r['ambient_K']:g} K")
        click.echo(
            f"  {' @ '.join(cond) or 'base'}: model {r['model_pulses']} vs "
            f"reference {r['reference_pulses']} (log residual {r['log_residual']:+.4f})"
        )
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
