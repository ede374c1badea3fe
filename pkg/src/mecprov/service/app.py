"""FastAPI application: MES lifecycle endpoints plus simulation services.

The orchestrator behind the lifecycle routes is shared app state guarded by
one lock (the orchestrator is a single logical event loop); simulation,
validation, oracle and demo routes are stateless.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..descriptor import DescriptorError
from ..experiment import UndefinedGainError
from ..oracle import OracleBudgetExceededError
from ..orchestrator import (
    EventAfterTerminalError,
    EventScriptError,
    InsufficientCapacityError,
    Orchestrator,
    UnknownMesError,
)
from . import ops, schemas


def error_detail(exc: Exception) -> tuple[int, schemas.ErrorDetail]:
    """Map a domain exception to an HTTP status and a structured detail."""
    if isinstance(exc, DescriptorError):
        detail = schemas.ErrorDetail(kind=exc.kind, message=str(exc))
        detail.line = getattr(exc, "line", None)
        detail.section = getattr(exc, "section", None)
        return 400, detail
    if isinstance(exc, UnknownMesError):
        return 404, schemas.ErrorDetail(kind="unknown_mes_id", message=str(exc))
    if isinstance(exc, EventAfterTerminalError):
        return 409, schemas.ErrorDetail(kind="event_after_terminal", message=str(exc))
    if isinstance(exc, InsufficientCapacityError):
        return 409, schemas.ErrorDetail(
            kind="insufficient_capacity", message=str(exc), shortfall=exc.shortfall
        )
    if isinstance(exc, OracleBudgetExceededError):
        return 400, schemas.ErrorDetail(kind="budget_exceeded", message=str(exc))
    if isinstance(exc, EventScriptError):
        return 400, schemas.ErrorDetail(kind="invalid_event_script", message=str(exc), line=exc.line)
    if isinstance(exc, (UndefinedGainError, ValueError)):
        return 400, schemas.ErrorDetail(kind="invalid_config", message=str(exc))
    raise exc


_DOMAIN_ERRORS = (
    DescriptorError,
    UnknownMesError,
    EventAfterTerminalError,
    InsufficientCapacityError,
    OracleBudgetExceededError,
    EventScriptError,
    UndefinedGainError,
    ValueError,
)


def create_app(*, capacity_vms: int = 100, reuse_capacity: int = 3) -> FastAPI:
    app = FastAPI(title="MEC service provisioning", version=__version__)
    orchestrator = Orchestrator(capacity_vms=capacity_vms, reuse_capacity=reuse_capacity)
    lock = threading.Lock()
    app.state.orchestrator = orchestrator

    def _domain_error(_request: Request, exc: Exception) -> JSONResponse:
        status, detail = error_detail(exc)
        return JSONResponse(status_code=status, content={"detail": detail.model_dump(exclude_none=True)})

    for exc_type in _DOMAIN_ERRORS:
        app.add_exception_handler(exc_type, _domain_error)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(version=__version__)

    @app.post("/descriptor/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
        return ops.validate_descriptor(req)

    @app.post("/simulation/run", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return ops.run_simulation(req)

    @app.post("/simulation/reproduce", response_model=schemas.ReproduceResponse)
    def reproduce(req: schemas.ReproduceRequest) -> schemas.ReproduceResponse:
        return ops.reproduce_figure(req)

    @app.post("/oracle/compare", response_model=schemas.OracleResponse)
    def oracle(req: schemas.OracleRequest) -> schemas.OracleResponse:
        return ops.compare_oracle(req)

    @app.post("/mes", response_model=schemas.SubmitResponse, status_code=201)
    def submit(req: schemas.SubmitRequest) -> schemas.SubmitResponse:
        with lock:
            return ops.submit_service(orchestrator, req)

    @app.get("/mes", response_model=schemas.ListResponse)
    def list_services() -> schemas.ListResponse:
        with lock:
            return ops.list_services(orchestrator)

    @app.get("/mes/{mes_id}", response_model=schemas.RecordOut)
    def get_record(mes_id: int) -> schemas.RecordOut:
        with lock:
            record = orchestrator.records.get(mes_id)
            if record is None:
                raise UnknownMesError(mes_id)
            return ops.record_out(record)

    @app.post("/mes/{mes_id}/events", response_model=schemas.RecordOut)
    def backend_event(mes_id: int, req: schemas.EventRequest) -> schemas.RecordOut:
        with lock:
            return ops.apply_event(orchestrator, mes_id, req)

    @app.post("/mes/{mes_id}/heal", response_model=schemas.RecordOut)
    def heal(mes_id: int) -> schemas.RecordOut:
        with lock:
            return ops.record_out(orchestrator.heal(mes_id))

    @app.post("/mes/{mes_id}/terminate", response_model=schemas.RecordOut)
    def terminate(mes_id: int) -> schemas.RecordOut:
        with lock:
            return ops.record_out(orchestrator.terminate(mes_id))

    @app.get("/mes/{mes_id}/log", response_model=schemas.LogResponse)
    def record_log(mes_id: int) -> schemas.LogResponse:
        with lock:
            record = orchestrator.records.get(mes_id)
            if record is None:
                raise UnknownMesError(mes_id)
            return schemas.LogResponse(
                log="".join("t=%d %s\n" % (t, body) for t, body in record.event_log)
            )

    @app.post("/demo/orchestrate", response_model=schemas.DemoResponse)
    def demo(req: schemas.DemoRequest) -> schemas.DemoResponse:
        return ops.run_demo(req)

    return app


app = create_app()
