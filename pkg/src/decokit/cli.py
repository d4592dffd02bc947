"""Command-line interface.

A thin client over the HTTP service: commands read and write local files,
send inline JSON to the service, and print results. Without --server (or
DECOKIT_SERVER) the service runs in process, so no daemon is needed.

Exit codes: 0 success, 1 bad input or usage, 2 backend or transport
failure. Data goes to stdout only when --out is absent; diagnostics always
go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .errors import GenerationError, InputError, ProtocolError, TransportError
from .harness import (
    BACKEND_ENV_VAR,
    canonical_json,
    jsonl_text,
    load_generation_rows,
    parse_prompt_row,
    read_jsonl,
)
from .service.client import SERVER_ENV_VAR, make_client, post


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this CLI reserves 2 for
    backend failures, so usage errors exit 1 instead."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_json(path: str) -> Any:
    p = Path(path)
    if not p.exists():
        raise InputError(f"file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise InputError(f"{p}: invalid JSON: {err}") from err


def _load_prompt_rows(path: str) -> list[dict]:
    p = Path(path)
    return [
        {"id": pid, "tokens": tokens}
        for pid, tokens in (
            parse_prompt_row(lineno, row, p) for lineno, row in read_jsonl(p)
        )
    ]


def _model_spec(args: argparse.Namespace) -> dict:
    if getattr(args, "model", None) and getattr(args, "endpoint", None):
        raise InputError("--model and --endpoint are mutually exclusive")
    if getattr(args, "model", None):
        return _read_json(args.model)
    if getattr(args, "endpoint", None):
        return {"kind": "remote", "endpoint": args.endpoint}
    # No explicit model: let the service resolve the backend env var.
    return {"kind": "remote", "endpoint": None}


def _strategy(args: argparse.Namespace) -> dict:
    spec: dict[str, Any] = {"name": args.strategy}
    for flag, key in (
        ("k", "k"),
        ("alpha", "alpha"),
        ("p", "p"),
        ("tau", "tau"),
        ("amateur_temperature", "amateur_temperature"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            spec[key] = value
    return spec


def _emit(args: argparse.Namespace, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args: argparse.Namespace) -> int:
    payload: dict[str, Any] = {
        "model": _model_spec(args),
        "prompts": _load_prompt_rows(args.prompts),
        "strategy": _strategy(args),
        "max_length": args.max_length,
        "seed": args.seed,
    }
    if args.amateur:
        payload["amateur"] = _read_json(args.amateur)
    if args.system:
        payload["system"] = args.system
    if args.prompt_length is not None:
        payload["prompt_length"] = args.prompt_length
    with make_client(args.server) as client:
        body = post(client, "/generate", payload)
    _emit(args, jsonl_text(body["records"]))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    config = _read_json(args.config)
    _resolve_config_paths(config, Path(args.config).parent)
    with make_client(args.server) as client:
        body = post(client, "/bench", {"config": config, "jobs": args.jobs})
    sys.stderr.write(body["table"])
    _emit(args, canonical_json(body["report"]))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _read_json(args.config)
    _resolve_config_paths(config, Path(args.config).parent)
    payload = {
        "config": config,
        "k_min": args.k_min,
        "k_max": args.k_max,
        "alpha": args.alpha,
        "jobs": args.jobs,
    }
    with make_client(args.server) as client:
        body = post(client, "/sweep", payload)
    sys.stderr.write(body["table"])
    _emit(args, canonical_json(body["dataset"]))
    return 0


def _resolve_config_paths(config: Any, base: Path) -> None:
    """Make benchmark data files absolute relative to the config location."""
    if not isinstance(config, dict):
        return
    bench = config.get("benchmark")
    if not isinstance(bench, dict):
        return
    for key in ("prompt_file", "reference_file"):
        value = bench.get(key)
        if isinstance(value, str) and not Path(value).is_absolute():
            bench[key] = str(base / value)


def cmd_metrics(args: argparse.Namespace) -> int:
    payload: dict[str, Any] = {
        "generations": load_generation_rows(args.generations),
        "settings": {
            "num_bins": args.bins,
            "scaling_constant": args.scaling,
            "grid_points": args.grid_points,
            "feature": args.feature,
            "truncate": args.truncate,
            "seed": args.metric_seed,
        },
    }
    if args.references:
        payload["references"] = _load_prompt_rows(args.references)
    if args.scorer:
        payload["scorer"] = _read_json(args.scorer)
    with make_client(args.server) as client:
        body = post(client, "/metrics", payload)
    _emit(args, canonical_json(body["systems"]))
    return 0


def cmd_pair_export(args: argparse.Namespace) -> int:
    payload = {
        "records_a": load_generation_rows(args.side_a),
        "records_b": load_generation_rows(args.side_b),
        "order_seed": args.order_seed,
    }
    with make_client(args.server) as client:
        body = post(client, "/pair/export", payload)
    Path(args.key).write_text(jsonl_text(body["key"]))
    worksheet_text = jsonl_text(body["worksheet"])
    if args.worksheet:
        Path(args.worksheet).write_text(worksheet_text)
    else:
        sys.stdout.write(worksheet_text)
    return 0


def cmd_pair_ingest(args: argparse.Namespace) -> int:
    verdicts = [row for _lineno, row in read_jsonl(args.verdicts)]
    key = [row for _lineno, row in read_jsonl(args.key)]
    with make_client(args.server) as client:
        body = post(client, "/pair/ingest", {"verdicts": verdicts, "key": key})
    _emit(args, canonical_json(body))
    return 0


def cmd_serve_toy(args: argparse.Namespace) -> int:
    from .lm import load_model_file, serve

    model = load_model_file(args.model)
    try:
        serve(model, host=args.host, port=args.port)
    except OSError as err:
        sys.stderr.write(f"cannot serve on {args.host}:{args.port}: {err}\n")
        return 2
    except KeyboardInterrupt:
        pass
    return 0


def cmd_serve_api(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    try:
        uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    except OSError as err:
        sys.stderr.write(f"cannot serve on {args.host}:{args.port}: {err}\n")
        return 2
    except KeyboardInterrupt:
        pass
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_server_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--server",
        default=None,
        help=f"service URL (default: in-process; env {SERVER_ENV_VAR})",
    )


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", default=None, help="model spec JSON file")
    parser.add_argument(
        "--endpoint",
        default=None,
        help=f"backend endpoint host:port (default: env {BACKEND_ENV_VAR})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="decokit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("generate", help="decode continuations for a prompt file")
    _add_server_flag(p)
    _add_model_flags(p)
    p.add_argument("--prompts", required=True, help="prompt JSONL file")
    p.add_argument(
        "--strategy",
        required=True,
        choices=["greedy", "top-k", "nucleus", "typical", "contrastive-decoding", "contrastive-search"],
        help="decoding strategy",
    )
    p.add_argument("--k", type=int, default=None, help="candidate count (top-k, contrastive-search)")
    p.add_argument("--alpha", type=float, default=None, help="strategy alpha")
    p.add_argument("--p", type=float, default=None, help="nucleus mass")
    p.add_argument("--tau", type=float, default=None, help="typical mass")
    p.add_argument("--amateur", default=None, help="amateur model spec file (contrastive-decoding)")
    p.add_argument("--amateur-temperature", dest="amateur_temperature", type=float, default=None,
                   help="amateur temperature (contrastive-decoding)")
    p.add_argument("--system", default=None, help="system name recorded in rows (default: strategy name)")
    p.add_argument("--prompt-length", dest="prompt_length", type=int, default=None,
                   help="require and truncate prompts to this many tokens")
    p.add_argument("--max-length", dest="max_length", type=int, default=256,
                   help="continuation token budget (default 256)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--out", default=None, help="output JSONL file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="run a benchmark config and report metrics")
    _add_server_flag(p)
    p.add_argument("--config", required=True, help="run config JSON file")
    p.add_argument("--jobs", type=int, default=1, help="parallel generation workers")
    p.add_argument("--out", default=None, help="report JSON file (default stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="contrastive-search k sweep plus baselines")
    _add_server_flag(p)
    p.add_argument("--config", required=True, help="run config JSON file")
    p.add_argument("--k-min", dest="k_min", type=int, default=2, help="smallest k (default 2)")
    p.add_argument("--k-max", dest="k_max", type=int, default=10, help="largest k (default 10)")
    p.add_argument("--alpha", type=float, default=0.6, help="contrastive-search alpha (default 0.6)")
    p.add_argument("--jobs", type=int, default=1, help="parallel generation workers")
    p.add_argument("--out", default=None, help="dataset JSON file (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("metrics", help="score an existing generation file")
    _add_server_flag(p)
    p.add_argument("--generations", required=True, help="generation JSONL file")
    p.add_argument("--references", default=None, help="reference JSONL file (enables frontier)")
    p.add_argument("--scorer", default=None, help="scorer model spec file (enables coherence)")
    p.add_argument("--bins", type=int, default=8, help="frontier quantization bins (default 8)")
    p.add_argument("--scaling", type=float, default=5.0, help="frontier scaling constant (default 5)")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=25,
                   help="interior mixture weights (default 25)")
    p.add_argument("--feature", default="bigram", choices=["bigram", "mean_repr"],
                   help="frontier feature extractor")
    p.add_argument("--truncate", type=int, default=128,
                   help="token truncation before frontier features (default 128)")
    p.add_argument("--metric-seed", dest="metric_seed", type=int, default=0,
                   help="quantizer seed (default 0)")
    p.add_argument("--out", default=None, help="metrics JSON file (default stdout)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("pair-export",
                       help="build a blind pairwise worksheet from two generation files")
    _add_server_flag(p)
    p.add_argument("--a", dest="side_a", required=True, help="generation JSONL file, system A")
    p.add_argument("--b", dest="side_b", required=True, help="generation JSONL file, system B")
    p.add_argument("--order-seed", dest="order_seed", type=int, default=0,
                   help="seed for first/second shuffling (default 0)")
    p.add_argument("--key", required=True, help="de-blinding key JSONL file (keep away from annotators)")
    p.add_argument("--worksheet", default=None, help="worksheet JSONL file (default stdout)")
    p.set_defaults(func=cmd_pair_export)

    p = sub.add_parser("pair-ingest",
                       help="join verdicts with the key and run the sign test")
    _add_server_flag(p)
    p.add_argument("--verdicts", required=True, help="verdict JSONL file")
    p.add_argument("--key", required=True, help="key JSONL file from pair-export")
    p.add_argument("--out", default=None, help="result JSON file (default stdout)")
    p.set_defaults(func=cmd_pair_ingest)

    p = sub.add_parser("serve-toy",
                       help="serve a toy model over the line-delimited JSON protocol")
    p.add_argument("--model", required=True, help="model spec JSON file")
    p.add_argument("--host", default="127.0.0.1", help="bind host (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=7060, help="bind port (default 7060)")
    p.set_defaults(func=cmd_serve_toy)

    p = sub.add_parser("serve-api", help="serve the HTTP API with uvicorn")
    p.add_argument("--host", default="127.0.0.1", help="bind host (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=8000, help="bind port (default 8000)")
    p.set_defaults(func=cmd_serve_api)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as err:
        sys.stderr.write(f"error: {err}\n")
        return 1
    except (TransportError, ProtocolError) as err:
        sys.stderr.write(f"backend error: {err}\n")
        return 2
    except GenerationError as err:
        sys.stderr.write(f"error: {err}\n")
        return 2 if isinstance(err.__cause__, (TransportError, ProtocolError)) else 1
    except OSError as err:
        sys.stderr.write(f"error: {err}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
