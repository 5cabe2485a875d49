"""Command line front end: replay, verify, bench, and oracle modes.

Every flag can also be set through an environment variable with the
``DENSEDYN_`` prefix (for example ``DENSEDYN_RUN_STREAM``).

Exit codes: 0 success, 1 input error, 2 verification failure.
"""

from __future__ import annotations

import json
import sys

import click

from .stream import (
    RunConfig,
    StreamFormatError,
    StreamRunError,
    oracle_replay,
    parse_stream,
    random_stream_text,
    run,
    verify,
)

CONTEXT = {"auto_envvar_prefix": "DENSEDYN", "help_option_names": ["-h", "--help"]}


def _common(fn):
    fn = click.option("--eps", type=float, default=None, help="Override header epsilon.")(fn)
    fn = click.option("--alpha-c", type=float, default=0.25, show_default=True,
                      help="Constant in the band-width derivation.")(fn)
    fn = click.option("--loop-c", type=int, default=4, show_default=True,
                      help="Arc-scan budget constant per rebalance call.")(fn)
    fn = click.option("--dup-c", type=float, default=4.0, show_default=True,
                      help="Edge duplication constant.")(fn)
    fn = click.option("--threshold-c", type=float, default=4.0, show_default=True,
                      help="Load-cap constant for low-density instances.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Seed for randomized modes.")(fn)
    fn = click.option("--parallel/--no-parallel", default=False, show_default=True,
                      help="Fan updates out to grid instances on a thread pool.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False, writable=True),
                      default=None, help="Write the report here instead of stdout.")(fn)
    return fn


def _config(eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel) -> RunConfig:
    return RunConfig(
        eps=eps,
        alpha_c=alpha_c,
        loop_c=loop_c,
        dup_c=dup_c,
        threshold_c=threshold_c,
        seed=seed,
        parallel=parallel,
    )


def _read_stream(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise click.ClickException(str(exc)) from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fail_input(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group(context_settings=CONTEXT)
def main() -> None:
    """Dynamic densest-subgraph toolkit."""


@main.command("run")
@click.option("--stream", required=True, help="Stream file, or '-' for stdin.")
@click.option("--timings/--no-timings", default=False, show_default=True,
              help="Include wall-clock phases in the summary (non-deterministic).")
@_common
def run_cmd(stream, timings, eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel, out):
    """Replay a stream and emit one JSON line per query plus a summary."""
    try:
        header, events = parse_stream(_read_stream(stream))
        report = run(header, events, _config(eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel))
    except (StreamFormatError, StreamRunError, ValueError) as exc:
        _fail_input(exc)
    _emit(report.to_jsonl(include_timings=timings), out)


@main.command("verify")
@click.option("--stream", required=True, help="Stream file, or '-' for stdin.")
@_common
def verify_cmd(stream, eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel, out):
    """Replay with brute-force cross-checks; exit 2 on any violation."""
    try:
        header, events = parse_stream(_read_stream(stream))
        report = verify(header, events, _config(eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel))
    except (StreamFormatError, StreamRunError, ValueError) as exc:
        _fail_input(exc)
    _emit(report.to_jsonl(), out)
    if not report.ok:
        sys.exit(2)


@main.command("bench")
@click.option("--n", type=int, default=100, show_default=True, help="Vertex count.")
@click.option("--events", type=int, default=10000, show_default=True, help="Update count.")
@click.option("--mode", type=click.Choice(["ddsg", "vwdsg"]), default="vwdsg", show_default=True)
@click.option("--bench-eps", type=float, default=0.2, show_default=True,
              help="Epsilon written into the generated stream header.")
@click.option("--query-every", type=int, default=0, show_default=True,
              help="Insert a query every this many updates (0: only at the end).")
@click.option("--timings/--no-timings", default=True, show_default=True)
@_common
def bench_cmd(n, events, mode, bench_eps, query_every, timings,
              eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel, out):
    """Generate a seeded random stream, replay it, and report counters."""
    try:
        text = random_stream_text(n, mode, bench_eps, events, seed, query_every)
        header, evs = parse_stream(text)
        report = run(header, evs, _config(eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel))
    except (StreamFormatError, StreamRunError, ValueError) as exc:
        _fail_input(exc)
    _emit(report.to_jsonl(include_timings=timings), out)


@main.command("oracle")
@click.option("--stream", required=True, help="Stream file, or '-' for stdin.")
@_common
def oracle_cmd(stream, eps, alpha_c, loop_c, dup_c, threshold_c, seed, parallel, out):
    """Replay only the exhaustive oracle (desk-scale n) and report optima."""
    try:
        header, events = parse_stream(_read_stream(stream))
        records = oracle_replay(header, events)
    except (StreamFormatError, StreamRunError, ValueError) as exc:
        _fail_input(exc)
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    _emit(text, out)


if __name__ == "__main__":
    main()
