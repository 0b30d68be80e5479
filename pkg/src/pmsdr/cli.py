"""Command-line client for the pmsdr service.

Every subcommand talks to the HTTP API: against an in-process instance of
the app by default, or a running server when ``--server URL`` is given, so
the CLI exercises exactly the service surface.

Exit codes: 0 success, 2 input/parse problems, 3 numerical failures (the
diagnostic names the failing subsystem).

Streaming notes: slice cutpoints are frozen when the first batch arrives —
later batches update the solutions under those fixed slices, which is what
makes the streamed result equal the full-data fit.  Feed batches as CSV
files in a directory (lexicographic order) or on standard input, where a
blank line ends a batch (the header appears once, first).
"""

import argparse
import asyncio
import json
import os
import sys

import httpx

from .datasets import MODELS
from .errors import InputError
from .serialize import (
    parse_csv_dataset,
    predictors_csv_text,
    read_csv_dataset,
    read_json,
    write_json,
)

OUT_DIR_ENV = "PMSDR_OUT_DIR"


class CliFailure(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _request(server, method, path, payload=None):
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.request(method, path, json=payload)

    async def go():
        from .service.app import create_app

        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://pmsdr.internal", timeout=None
        ) as client:
            return await client.request(method, path, json=payload)

    return asyncio.run(go())


def call_service(server, method, path, payload=None):
    """Issue one API call; translate error responses into exit codes."""
    try:
        response = _request(server, method, path, payload)
    except httpx.HTTPError as exc:
        raise CliFailure(f"cannot reach service: {exc}", code=2) from exc
    if response.status_code == 200:
        return response
    try:
        detail = response.json().get("detail")
    except json.JSONDecodeError:
        detail = response.text
    if isinstance(detail, dict):
        kind = detail.get("kind", "input")
        message = detail.get("message", "request failed")
        if kind == "numeric":
            module = detail.get("module", "numerics")
            raise CliFailure(f"numerical failure in {module}: {message}", code=3)
        raise CliFailure(message, code=2)
    if isinstance(detail, list) and detail:
        first = detail[0]
        loc = ".".join(str(part) for part in first.get("loc", [])[1:])
        raise CliFailure(f"invalid request field {loc}: {first.get('msg')}", code=2)
    raise CliFailure(f"service error (HTTP {response.status_code}): {detail}", code=2)


def resolve_out(prefix):
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(prefix):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, prefix)
    return prefix


def parse_loss_argument(loss):
    """Split ``custom:<expression-or-file>`` into the request fields."""
    if not loss.startswith("custom:"):
        return loss, None
    spec = loss[len("custom:") :]
    if not spec:
        raise InputError("custom loss needs an expression, e.g. custom:log(1+exp(-u))")
    if os.path.isfile(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            spec = fh.read().strip()
    return "custom", spec


def load_dataset(path, ycol):
    try:
        return read_csv_dataset(path, ycol)
    except OSError as exc:
        raise CliFailure(f"cannot read {path}: {exc}", code=2) from exc
    except InputError as exc:
        raise CliFailure(str(exc), code=2) from exc


def write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _fit_payload(args, x, y):
    loss, custom_loss = parse_loss_argument(args.loss)
    payload = {
        "x": x.tolist(),
        "y": y.tolist(),
        "loss": loss,
        "h": args.h,
        "lambda": getattr(args, "lambda"),
        "eta": args.eta,
        "eps": args.eps,
        "max_iter": args.max_iter,
        "mtype": args.mtype,
        "warm_start": not args.cold_start,
    }
    if custom_loss is not None:
        payload["custom_loss"] = custom_loss
    return payload


def _project_via_service(args, doc, x, d):
    payload = {"fit": doc, "x": x.tolist()}
    if d is not None:
        payload["d"] = d
    response = call_service(args.server, "POST", "/project", payload)
    body = response.json()
    return body["coordinates"], body["d"]


def cmd_fit(args, kernel=False):
    x, y, _ = load_dataset(args.input, args.y)
    payload = _fit_payload(args, x, y)
    if kernel:
        if args.b is not None:
            payload["b"] = args.b
        if args.gamma is not None:
            payload["gamma"] = args.gamma
    path = "/fit-kernel" if kernel else "/fit"
    doc = call_service(args.server, "POST", path, payload).json()
    prefix = resolve_out(args.out)
    write_json(prefix + ".fit.json", doc)
    coords, d = _project_via_service(args, doc, x, args.d)
    write_text(prefix + ".predictors.csv", predictors_csv_text(coords, y))
    print(f"wrote {prefix}.fit.json and {prefix}.predictors.csv (d={d})")
    return 0


def cmd_bic(args):
    try:
        doc = read_json(args.fit)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliFailure(f"cannot read fit document {args.fit}: {exc}", code=2) from exc
    payload = {
        "evalues": doc["evalues"],
        "n": doc["n"],
        "rho": args.rho,
    }
    if args.p_max is not None:
        payload["p_max"] = args.p_max
    body = call_service(args.server, "POST", "/bic", payload).json()
    print(" ".join(f"{g:.7g}" for g in body["criterion"]))
    print(f"d_hat = {body['d_hat']}")
    if args.out:
        prefix = resolve_out(args.out)
        write_json(prefix + ".bic.json", body)
        print(f"wrote {prefix}.bic.json")
    return 0


def cmd_project(args):
    try:
        doc = read_json(args.fit)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliFailure(f"cannot read fit document {args.fit}: {exc}", code=2) from exc
    x, y, _ = load_dataset(args.input, args.y)
    coords, d = _project_via_service(args, doc, x, args.d)
    prefix = resolve_out(args.out)
    write_text(prefix + ".projected.csv", predictors_csv_text(coords, y))
    print(f"wrote {prefix}.projected.csv (d={d})")
    return 0


def _iter_batches(args):
    """Yield (x, y) batches from a directory of CSVs or from stdin chunks."""
    if args.input != "-":
        if not os.path.isdir(args.input):
            raise CliFailure(f"{args.input} is not a directory (use '-' for stdin)", code=2)
        names = sorted(os.listdir(args.input))
        paths = [os.path.join(args.input, nm) for nm in names if nm.endswith(".csv")]
        if not paths:
            raise CliFailure(f"no .csv batch files in {args.input}", code=2)
        for path in paths:
            x, y, _ = load_dataset(path, args.y)
            yield x, y
        return
    header = None
    rows = []
    for line in sys.stdin:
        line = line.rstrip("\n")
        if not line.strip():
            if rows:
                yield _parse_chunk(header, rows, args.y)
                rows = []
            continue
        if header is None:
            header = line
            continue
        rows.append(line)
    if rows:
        yield _parse_chunk(header, rows, args.y)


def _parse_chunk(header, rows, ycol):
    if header is None:
        raise CliFailure("stdin stream is missing a CSV header line", code=2)
    try:
        x, y, _ = parse_csv_dataset("\n".join([header] + rows), ycol)
    except InputError as exc:
        raise CliFailure(str(exc), code=2) from exc
    return x, y


def cmd_stream(args):
    prefix = resolve_out(args.out)
    state = None
    if args.state:
        try:
            with open(args.state, "r", encoding="utf-8") as fh:
                state = fh.read()
        except OSError as exc:
            raise CliFailure(f"cannot read state {args.state}: {exc}", code=2) from exc
    batch_count = 0
    for x, y in _iter_batches(args):
        batch_count += 1
        if state is None:
            payload = {
                "x": x.tolist(),
                "y": y.tolist(),
                "h": args.h,
                "lambda": getattr(args, "lambda"),
            }
            body = call_service(args.server, "POST", "/stream/init", payload).json()
        else:
            payload = {"state": state, "x": x.tolist(), "y": y.tolist()}
            body = call_service(args.server, "POST", "/stream/update", payload).json()
        state = body["state"]
        write_text(prefix + ".state.json", state)
        write_json(prefix + ".fit.json", body["fit"])
        print(f"batch {batch_count}: n={json.loads(state)['n']}")
    if batch_count == 0:
        raise CliFailure("no batches supplied", code=2)
    print(f"wrote {prefix}.state.json and {prefix}.fit.json")
    return 0


def cmd_generate(args):
    payload = {"model": args.model, "n": args.n, "p": args.p, "seed": args.seed}
    response = call_service(args.server, "POST", "/generate", payload)
    out = resolve_out(args.out)
    write_text(out, response.text)
    print(f"wrote {out}")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def _add_common(parser):
    parser.add_argument("--server", default=None, help="service URL; in-process app when omitted")


def _add_solver_flags(parser):
    parser.add_argument("--loss", default="svm", help="loss name, or custom:<expression-or-file>")
    parser.add_argument("--h", type=int, default=10, help="number of slices")
    parser.add_argument("--lambda", type=float, default=1.0, dest="lambda", help="cost parameter")
    parser.add_argument("--eta", type=float, default=0.1, help="learning rate")
    parser.add_argument("--eps", type=float, default=1e-5, help="convergence threshold")
    parser.add_argument("--max-iter", type=int, default=100, help="sweep cap")
    parser.add_argument("--mtype", choices=["m", "r"], default="m",
                        help="margin or residual form (custom losses only)")
    parser.add_argument("--cold-start", action="store_true",
                        help="solve each slice from zeros instead of the previous solution")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pmsdr",
        description="Sufficient dimension reduction with principal machines",
        epilog=f"Set {OUT_DIR_ENV} to redirect relative output paths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a linear principal machine from a CSV")
    p_fit.add_argument("--input", required=True, help="CSV with a header row")
    p_fit.add_argument("--y", default=None, help="response column name or 1-based index")
    _add_solver_flags(p_fit)
    p_fit.add_argument("--d", type=int, default=None, help="predictors to write (default 1)")
    p_fit.add_argument("--out", required=True, help="output path prefix")
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_ker = sub.add_parser("fit-kernel", help="fit a kernel principal machine from a CSV")
    p_ker.add_argument("--input", required=True)
    p_ker.add_argument("--y", default=None)
    _add_solver_flags(p_ker)
    p_ker.add_argument("--b", type=int, default=None, help="basis size (default n/3)")
    p_ker.add_argument("--gamma", type=float, default=None, help="kernel bandwidth (default median heuristic)")
    p_ker.add_argument("--d", type=int, default=None, help="predictors to write (default 2)")
    p_ker.add_argument("--out", required=True)
    _add_common(p_ker)
    p_ker.set_defaults(func=lambda a: cmd_fit(a, kernel=True))

    p_bic = sub.add_parser("bic", help="structural-dimension criterion from a stored fit")
    p_bic.add_argument("--fit", required=True, help="path to a .fit.json document")
    p_bic.add_argument("--rho", type=float, default=0.01)
    p_bic.add_argument("--p-max", type=int, default=None)
    p_bic.add_argument("--out", default=None, help="optional output prefix")
    _add_common(p_bic)
    p_bic.set_defaults(func=cmd_bic)

    p_proj = sub.add_parser("project", help="project new rows through a stored fit")
    p_proj.add_argument("--fit", required=True)
    p_proj.add_argument("--input", required=True)
    p_proj.add_argument("--y", default=None)
    p_proj.add_argument("--d", type=int, default=None)
    p_proj.add_argument("--out", required=True)
    _add_common(p_proj)
    p_proj.set_defaults(func=cmd_project)

    p_str = sub.add_parser(
        "stream",
        help="streamed squared-loss fit over CSV batches",
        description="Cutpoints freeze at the first batch; each batch updates "
        "the solutions exactly, matching the full-data fit under those slices.",
    )
    p_str.add_argument("--input", required=True, help="directory of batch CSVs, or '-' for stdin")
    p_str.add_argument("--y", default=None)
    p_str.add_argument("--h", type=int, default=10)
    p_str.add_argument("--lambda", type=float, default=1.0, dest="lambda")
    p_str.add_argument("--state", default=None, help="resume from a state snapshot")
    p_str.add_argument("--out", required=True)
    _add_common(p_str)
    p_str.set_defaults(func=cmd_stream)

    p_gen = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p_gen.add_argument("--model", required=True, choices=MODELS)
    p_gen.add_argument("--n", type=int, default=200)
    p_gen.add_argument("--p", type=int, default=5)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output CSV path")
    _add_common(p_gen)
    p_gen.set_defaults(func=cmd_generate)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as exc:
        print(f"pmsdr: {exc}", file=sys.stderr)
        return exc.code
    except InputError as exc:
        print(f"pmsdr: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
