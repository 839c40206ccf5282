"""Thin command-line client for the torusres service.

All computation happens behind the HTTP surface: by default the commands
mount the service in-process, and ``--server URL`` points them at a running
instance instead.  Exit codes: 0 success, 1 tolerance failure, 2 config or
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import httpx

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2


def _make_client(server: Optional[str]) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app
    return TestClient(app)


def _load_config_payload(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _post(client: httpx.Client, url: str, payload: dict) -> dict:
    resp = client.post(url, json=payload)
    if resp.status_code in (400, 422):
        print("config error:", file=sys.stderr)
        print(json.dumps(resp.json().get("detail"), indent=2, default=str),
              file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    resp.raise_for_status()
    return resp.json()


def _print_quantity_lines(report: dict):
    for qr in report["quantities"]:
        mark = "PASS" if qr["passed"] else "FAIL"
        bits = [f"{qr['name']:<28s} {mark}"]
        if qr["slope"] is not None:
            bits.append(f"slope={qr['slope']:.3f} r2={qr['r_squared']:.4f}")
        else:
            bits.append(f"status={qr['status']}")
        if qr["failures"]:
            bits.append("; ".join(qr["failures"]))
        print("  " + "  ".join(bits))


def cmd_run(args: argparse.Namespace) -> int:
    payload = {"config": _load_config_payload(args.config),
               "tol_scale": args.tol_scale}
    if args.threads is not None:
        payload["workers"] = args.threads
    with _make_client(args.server) as client:
        body = _post(client, "/experiments/run", payload)
    report = body["report"]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    output = payload["config"].get("output", {}) or {}
    (out_dir / output.get("csv", "results.csv")).write_text(body["csv"])
    (out_dir / output.get("summary", "summary.json")).write_text(body["summary"])
    (out_dir / output.get("report", "report.json")).write_text(
        json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")
    _print_quantity_lines(report)
    print(f"run {'PASSED' if report['passed'] else 'FAILED'}; artifacts in {out_dir}")
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def cmd_converge(args: argparse.Namespace) -> int:
    payload = {"config": _load_config_payload(args.config),
               "tol_scale": args.tol_scale}
    if args.threads is not None:
        payload["workers"] = args.threads
    with _make_client(args.server) as client:
        body = _post(client, "/experiments/converge", payload)
    report = body["report"]
    _print_quantity_lines(report)
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def cmd_check(args: argparse.Namespace) -> int:
    with _make_client(args.server) as client:
        resp = client.get("/selfcheck")
        resp.raise_for_status()
        body = resp.json()
    for chk in body["checks"]:
        mark = "PASS" if chk["passed"] else "FAIL"
        print(f"  {chk['name']:<30s} {mark}  {chk['detail']}")
    print(f"selfcheck {'PASSED' if body['passed'] else 'FAILED'}")
    return EXIT_OK if body["passed"] else EXIT_TOLERANCE


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    report_path = run_dir / "report.json"
    if not report_path.exists():
        print(f"error: {report_path} not found", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = json.loads(report_path.read_text())
    except json.JSONDecodeError as exc:
        print(f"error: bad report JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    with _make_client(args.server) as client:
        body = _post(client, "/reports/render", report)
    (run_dir / "results.csv").write_text(body["csv"])
    (run_dir / "summary.json").write_text(body["summary"])
    _print_quantity_lines(report)
    print(f"re-rendered artifacts in {run_dir}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("torusres.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torusres",
        description="Sweep runner for torus Wigner/resonance experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server(p):
        p.add_argument("--server", default=None,
                       help="base URL of a running service (default: in-process)")

    p_run = sub.add_parser("run", help="execute a config and write artifacts")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="runs/latest", help="output directory")
    p_run.add_argument("--threads", type=int, default=None)
    p_run.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0)
    add_server(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_conv = sub.add_parser("converge", help="sweep and rate fits only")
    p_conv.add_argument("config")
    p_conv.add_argument("--threads", type=int, default=None)
    p_conv.add_argument("--tol-scale", dest="tol_scale", type=float, default=1.0)
    add_server(p_conv)
    p_conv.set_defaults(fn=cmd_converge)

    p_check = sub.add_parser("check", help="run the built-in property battery")
    add_server(p_check)
    p_check.set_defaults(fn=cmd_check)

    p_rep = sub.add_parser("report", help="re-render CSV/summary from report.json")
    p_rep.add_argument("run_dir")
    add_server(p_rep)
    p_rep.set_defaults(fn=cmd_report)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8718)
    p_serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
