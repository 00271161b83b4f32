"""Thin HTTP client over the service, plus the `serve` entry point.

Every work command talks to a running service (default
http://127.0.0.1:8137, override with --server or GROUNDCHECK_SERVER); paths
are interpreted on the server's host, which for the usual single-machine
setup is the local filesystem.

Exit codes: 0 success, 1 configuration or transport error, 2 run completed
with quarantined records.
"""

from __future__ import annotations

import base64
import os
import sys
import time
from pathlib import Path

import click
import httpx

DEFAULT_SERVER = "http://127.0.0.1:8137"


def _make_client(server: str) -> httpx.Client:
    # Long default timeout: runs are polled, but filters/report do real work.
    return httpx.Client(base_url=server, timeout=600.0)


def _server_option(f):
    return click.option(
        "--server",
        default=lambda: os.environ.get("GROUNDCHECK_SERVER", DEFAULT_SERVER),
        show_default=DEFAULT_SERVER,
        help="Base URL of the groundcheck service.",
    )(f)


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Score vision-language answers under image-filter variants."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8137, show_default=True, type=int)
def serve(host: str, port: int):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("groundcheck.service.app:app", host=host, port=port)


@main.command()
@click.option("--manifest", required=True, type=str, help="Line-delimited JSON corpus.")
@click.option("--limit", type=int, default=None, help="Evaluate only the first N records.")
@click.option("--out", "out_dir", required=True, type=str, help="Artifact directory.")
@click.option("--cache", "cache_dir", type=str, default=None, help="Cache directory (default: OUT/cache).")
@click.option("--kernel", "kernel_size", default=15, show_default=True, type=int)
@click.option("--nr-mode", type=click.Choice(["pure", "blended"]), default="pure", show_default=True)
@click.option("--samples", "sample_count", default=3, show_default=True, type=int)
@click.option("--premise", type=click.Choice(["reference", "self"]), default="reference", show_default=True)
@click.option("--policy", type=click.Choice(["oracle", "route", "both"]), default="oracle", show_default=True)
@click.option("--responder", default="mock", show_default=True, help='"mock" or an endpoint URL.')
@click.option("--nli", default="stub", show_default=True, help='"stub" or an endpoint URL.')
@click.option("--concurrency", default=4, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--strict", is_flag=True, help="Treat missing images as fatal.")
@click.option("--responder-fixture", type=str, default=None, help="Mock answer fixture JSON.")
@click.option("--nli-table", type=str, default=None, help="NLI stub lookup table JSON.")
@click.option("--poll", default=0.5, show_default=True, type=float, help="Status poll interval (s).")
@_server_option
def run(
    manifest,
    limit,
    out_dir,
    cache_dir,
    kernel_size,
    nr_mode,
    sample_count,
    premise,
    policy,
    responder,
    nli,
    concurrency,
    seed,
    strict,
    responder_fixture,
    nli_table,
    poll,
    server,
):
    """Submit a run and wait for it to finish."""
    body = {
        "manifest": manifest,
        "out_dir": out_dir,
        "cache_dir": cache_dir or str(Path(out_dir) / "cache"),
        "limit": limit,
        "kernel_size": kernel_size,
        "nr_mode": nr_mode,
        "sample_count": sample_count,
        "premise_mode": premise,
        "policy": policy,
        "responder": responder,
        "nli": nli,
        "concurrency": concurrency,
        "seed": seed,
        "strict": strict,
        "responder_fixture": responder_fixture,
        "nli_table": nli_table,
    }
    with _make_client(server) as client:
        try:
            reply = client.post("/v1/runs", json=body)
        except httpx.HTTPError as exc:
            _fail(f"cannot reach service at {server}: {exc}")
        if reply.status_code == 400:
            _fail(reply.json().get("detail", "invalid configuration"))
        reply.raise_for_status()
        run_id = reply.json()["run_id"]
        click.echo(f"run {run_id} submitted")

        while True:
            status = client.get(f"/v1/runs/{run_id}").json()
            if status["state"] != "running":
                break
            time.sleep(poll)

        if status["state"] == "failed":
            _fail(f"run failed: {status.get('error')}")
        click.echo(
            f"run {run_id} completed: {status['records_scored']} scored, "
            f"{status['records_quarantined']} quarantined"
        )
        summary = client.get(f"/v1/runs/{run_id}/summary").json()
        for policy_name, block in sorted(summary.get("policies", {}).items()):
            reduction = block.get("reduction_pct")
            shown = "n/a" if reduction is None else f"{reduction:.1f}%"
            click.echo(
                f"  {policy_name}: mean org {block['mean_org']:.3f} -> "
                f"ensemble {block['mean_ensemble']:.3f} (reduction {shown})"
            )
        sys.exit(status.get("exit_code") or 0)


@main.command()
@click.option("--run", "run_dir", required=True, type=str, help="Run output directory.")
@_server_option
def report(run_dir, server):
    """Re-emit artifacts from a completed run's cached state."""
    with _make_client(server) as client:
        try:
            reply = client.post("/v1/reports", json={"run_dir": run_dir})
        except httpx.HTTPError as exc:
            _fail(f"cannot reach service at {server}: {exc}")
        if reply.status_code >= 400:
            _fail(reply.json().get("detail", f"HTTP {reply.status_code}"))
        for artifact in reply.json()["artifacts"]:
            click.echo(artifact)


@main.command()
@click.option("--in", "image_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--kernel", "kernel_size", default=15, show_default=True, type=int)
@click.option("--nr-mode", type=click.Choice(["pure", "blended"]), default="pure", show_default=True)
@_server_option
def filters(image_path, out_dir, kernel_size, nr_mode, server):
    """Emit the org/nr/ee variants of one image for inspection."""
    payload = {
        "image_base64": base64.b64encode(Path(image_path).read_bytes()).decode("ascii"),
        "kernel_size": kernel_size,
        "nr_mode": nr_mode,
    }
    with _make_client(server) as client:
        try:
            reply = client.post("/v1/filters", json=payload)
        except httpx.HTTPError as exc:
            _fail(f"cannot reach service at {server}: {exc}")
        if reply.status_code >= 400:
            _fail(reply.json().get("detail", f"HTTP {reply.status_code}"))
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(image_path).stem
        for name, data in sorted(reply.json()["variants"].items()):
            target = out / f"{stem}_{name}.png"
            target.write_bytes(base64.b64decode(data))
            click.echo(str(target))


if __name__ == "__main__":
    main()
