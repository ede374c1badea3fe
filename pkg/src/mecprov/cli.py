"""Command-line client for the provisioning service.

All command logic lives behind the service layer's request/response models;
this module only turns flags into requests and payloads into output. By
default requests are dispatched in-process; ``--server URL`` sends the same
requests to a running instance instead.

Exit codes: 0 success, 1 domain error (bad descriptor, failed deployment,
oracle violation), 2 usage error (bad flags, unreadable input).
"""

from __future__ import annotations

import argparse
import sys

import httpx
import pydantic

from . import __version__
from .descriptor import DescriptorError
from .experiment import UndefinedGainError
from .oracle import OracleBudgetExceededError
from .orchestrator import EventScriptError, InsufficientCapacityError
from .service import ops, schemas

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

# error kinds that indicate the caller misused the tool rather than a domain
# condition; mirrors the server-side mapping
_USAGE_KINDS = {"invalid_config", "unreadable_input"}


class CommandError(Exception):
    def __init__(self, kind: str, message: str) -> None:
        super().__init__(message)
        self.kind = kind
        self.exit_code = EXIT_USAGE if kind in _USAGE_KINDS else EXIT_DOMAIN


class LocalClient:
    """In-process dispatch straight to the service handlers."""

    def validate(self, req: schemas.ValidateRequest) -> schemas.ValidateResponse:
        return ops.validate_descriptor(req)

    def simulate(self, req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return ops.run_simulation(req)

    def reproduce(self, req: schemas.ReproduceRequest) -> schemas.ReproduceResponse:
        return ops.reproduce_figure(req)

    def oracle(self, req: schemas.OracleRequest) -> schemas.OracleResponse:
        return ops.compare_oracle(req)

    def demo(self, req: schemas.DemoRequest) -> schemas.DemoResponse:
        return ops.run_demo(req)


class RemoteClient:
    """Same surface over HTTP against a running service."""

    def __init__(self, base_url: str, client: httpx.Client | None = None) -> None:
        self._client = client if client is not None else httpx.Client(base_url=base_url, timeout=300.0)

    def _post(self, path: str, req: pydantic.BaseModel, response_model):
        response = self._client.post(path, json=req.model_dump())
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", {})
            except ValueError:
                detail = {}
            if isinstance(detail, dict) and "kind" in detail:
                raise CommandError(detail["kind"], detail.get("message", "request failed"))
            raise CommandError("http_error", "server returned status %d" % response.status_code)
        return response_model.model_validate(response.json())

    def validate(self, req: schemas.ValidateRequest) -> schemas.ValidateResponse:
        return self._post("/descriptor/validate", req, schemas.ValidateResponse)

    def simulate(self, req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return self._post("/simulation/run", req, schemas.SimulateResponse)

    def reproduce(self, req: schemas.ReproduceRequest) -> schemas.ReproduceResponse:
        return self._post("/simulation/reproduce", req, schemas.ReproduceResponse)

    def oracle(self, req: schemas.OracleRequest) -> schemas.OracleResponse:
        return self._post("/oracle/compare", req, schemas.OracleResponse)

    def demo(self, req: schemas.DemoRequest) -> schemas.DemoResponse:
        return self._post("/demo/orchestrate", req, schemas.DemoResponse)


def make_client(args: argparse.Namespace):
    if getattr(args, "server", None):
        return RemoteClient(args.server)
    return LocalClient()


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise CommandError("unreadable_input", "cannot read %s: %s" % (path, exc.strerror or exc))


def _write_output(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _domain_error_from(exc: Exception) -> CommandError:
    if isinstance(exc, DescriptorError):
        return CommandError(exc.kind, str(exc))
    if isinstance(exc, InsufficientCapacityError):
        return CommandError("insufficient_capacity", str(exc))
    if isinstance(exc, OracleBudgetExceededError):
        return CommandError("budget_exceeded", str(exc))
    if isinstance(exc, EventScriptError):
        return CommandError("invalid_event_script", str(exc))
    if isinstance(exc, (UndefinedGainError, ValueError)):
        return CommandError("invalid_config", str(exc))
    raise exc


def _dispatch(fn, req):
    try:
        return fn(req)
    except CommandError:
        raise
    except Exception as exc:  # noqa: BLE001 - narrowed inside
        raise _domain_error_from(exc) from exc


def cmd_validate(args: argparse.Namespace) -> int:
    document = _read_file(args.path)
    client = make_client(args)
    response = _dispatch(client.validate, schemas.ValidateRequest(document=document))
    print("OK")
    if args.verbose:
        print("name=%s nf_types=%d footprint=%d" % (response.name, response.nf_types, response.footprint))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    req = schemas.SimulateRequest(
        capacity_vms=args.capacity,
        catalog_size=args.catalog_size,
        max_ns_size=args.max_ns_size,
        nf_instances=args.nf_instances,
        reuse_capacity=args.reuse_capacity,
        policy=args.policy,
        seed=args.seed,
        seeds=args.seeds,
        count_mode=args.count_mode,
        jobs=args.jobs,
    )
    response = _dispatch(make_client(args).simulate, req)
    _write_output(response.csv, args.out)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    req = schemas.ReproduceRequest(
        target=args.target,
        seeds=args.seeds,
        seed=args.seed,
        capacity_vms=args.capacity,
        catalog_size=args.catalog_size,
        count_mode=args.count_mode,
        cmax_grid=args.cmax_grid,
        jobs=args.jobs,
    )
    response = _dispatch(make_client(args).reproduce, req)
    _write_output(response.csv, args.out)
    sys.stdout.write(response.summary)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    req = schemas.OracleRequest(
        trials=args.trials,
        catalog_size=args.n,
        requests=args.k,
        reuse_capacity=args.cmax,
        capacity_vms=args.capacity,
        count_max=args.max_count,
        size_max=args.max_size,
        initial_services=args.initial,
        seed=args.seed,
        max_nodes=args.max_nodes,
    )
    response = _dispatch(make_client(args).oracle, req)
    sys.stdout.write(response.report)
    if response.violations:
        print("heuristic exceeded the exact optimum on %d instance(s)" % response.violations, file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_demo_orchestrate(args: argparse.Namespace) -> int:
    document = _read_file(args.path)
    script = _read_file(args.script_path)
    req = schemas.DemoRequest(
        document=document,
        script=script,
        capacity_vms=args.capacity,
        reuse_capacity=args.reuse_capacity,
    )
    response = _dispatch(make_client(args).demo, req)
    sys.stdout.write(response.log)
    return EXIT_OK if response.ok else EXIT_DOMAIN


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(
        create_app(capacity_vms=args.capacity, reuse_capacity=args.reuse_capacity),
        host=args.host,
        port=args.port,
    )
    return EXIT_OK


def _parse_grid(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be comma-separated integers, e.g. 1,4,7")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("grid values must be positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mecprov",
        description="Placement, simulation and provisioning of MEC network services.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", metavar="URL", help="send the request to a running service instead of running in-process")

    p = sub.add_parser("validate", help="parse and validate a service descriptor")
    p.add_argument("path")
    p.add_argument("--verbose", action="store_true")
    add_server(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="run seeded acceptance episodes, emit CSV")
    p.add_argument("--capacity", type=int, default=100, help="VM budget (default 100)")
    p.add_argument("--catalog-size", type=int, default=10)
    p.add_argument("--max-ns-size", type=int, default=3)
    p.add_argument("--nf-instances", type=int, default=3)
    p.add_argument("--reuse-capacity", type=int, default=3)
    p.add_argument("--policy", choices=["separation", "cooperation", "both"], default="both")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.add_argument("--count-mode", choices=["fixed", "uniform"], default="fixed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write CSV here instead of stdout")
    add_server(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="run a full sweep and print per-point summaries")
    p.add_argument("target", choices=["fig5a", "fig5b"])
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--capacity", type=int, default=100)
    p.add_argument("--catalog-size", type=int, default=10)
    p.add_argument("--count-mode", choices=["fixed", "uniform"], default="fixed")
    p.add_argument("--cmax-grid", type=_parse_grid, default=[1, 4, 7], metavar="1,4,7")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write CSV here instead of stdout")
    add_server(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("oracle", help="compare the heuristic against the exact optimum on random small instances")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=1, help="catalog size")
    p.add_argument("--k", type=int, default=2, help="requests per instance")
    p.add_argument("--cmax", type=int, default=2, help="reuse capacity")
    p.add_argument("--capacity", type=int, default=10)
    p.add_argument("--max-count", type=int, default=1, help="max instances per NF type")
    p.add_argument("--max-size", type=int, default=2, help="max NF types per request")
    p.add_argument("--initial", type=int, default=0, help="offered services before the first request")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=200_000)
    add_server(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("demo-orchestrate", help="submit a descriptor and replay a backend event script")
    p.add_argument("path", help="descriptor file")
    p.add_argument("script_path", help="event script file")
    p.add_argument("--capacity", type=int, default=100)
    p.add_argument("--reuse-capacity", type=int, default=3)
    add_server(p)
    p.set_defaults(func=cmd_demo_orchestrate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--capacity", type=int, default=100)
    p.add_argument("--reuse-capacity", type=int, default=3)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print("%s: %s" % (exc.kind, exc), file=sys.stderr)
        return exc.exit_code
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(part) for part in first.get("loc", ()))
        print("invalid arguments: %s: %s" % (loc, first.get("msg", "invalid")), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
