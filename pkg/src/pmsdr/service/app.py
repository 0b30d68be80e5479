"""FastAPI service exposing the estimators.

Every numerical capability of the package sits behind one endpoint here; the
``pmsdr`` CLI is a thin client of this app (in process by default, over the
network with ``--server``).  Stream state travels as the versioned snapshot
string produced by :func:`pmsdr.realtime.state_to_json`, so a stream can hop
between processes and survive restarts.
"""

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..datasets import dataset_csv_text, generate_dataset
from ..errors import InputError, NumericError, PmsdrError
from ..expressions import parse_loss_expression
from ..kernel import fit_kernel
from ..linear import bic_dimension, fit_linear
from ..realtime import state_from_json, state_to_json, stream_init, stream_result, stream_update
from ..serialize import fit_document, project_document
from ..solver import SolveConfig
from .schemas import (
    BicRequest,
    BicResponse,
    FitRequest,
    GenerateRequest,
    HealthResponse,
    KernelFitRequest,
    ProjectRequest,
    ProjectResponse,
    StreamInitRequest,
    StreamResponse,
    StreamUpdateRequest,
)


def _error_body(exc):
    if isinstance(exc, NumericError):
        return {"kind": "numeric", "module": exc.module, "message": str(exc)}
    return {"kind": "input", "message": str(exc)}


def _matrix(rows, name="x"):
    try:
        out = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not a numeric matrix: {exc}") from exc
    if out.ndim != 2:
        raise InputError(f"{name} must be a list of equal-length rows")
    return out


def _fit_inputs(req):
    x = _matrix(req.x)
    y = np.asarray(req.y, dtype=float)
    cfg = SolveConfig(
        lam=req.lam,
        eta=req.eta,
        eps=req.eps,
        max_iter=req.max_iter,
        warm_start=req.warm_start,
    )
    custom_fn = None
    if req.loss == "custom":
        if not req.custom_loss:
            raise InputError("loss 'custom' needs a custom_loss expression")
        custom_fn = parse_loss_expression(req.custom_loss)
    elif req.custom_loss:
        raise InputError("custom_loss is only valid with loss 'custom'")
    return x, y, cfg, custom_fn


def create_app():
    app = FastAPI(
        title="pmsdr",
        version=__version__,
        description="Principal-machine sufficient dimension reduction service",
    )

    @app.exception_handler(PmsdrError)
    async def pmsdr_error_handler(request: Request, exc: PmsdrError):
        return JSONResponse(status_code=400, content={"detail": _error_body(exc)})

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/fit")
    def fit(req: FitRequest):
        x, y, cfg, custom_fn = _fit_inputs(req)
        result = fit_linear(
            x, y, loss=req.loss, h=req.h, config=cfg, mtype=req.mtype, custom_fn=custom_fn
        )
        return fit_document(result)

    @app.post("/fit-kernel")
    def fit_kernel_endpoint(req: KernelFitRequest):
        x, y, cfg, custom_fn = _fit_inputs(req)
        result = fit_kernel(
            x,
            y,
            loss=req.loss,
            h=req.h,
            config=cfg,
            b=req.b,
            gamma=req.gamma,
            mtype=req.mtype,
            custom_fn=custom_fn,
        )
        return fit_document(result)

    @app.post("/bic", response_model=BicResponse)
    def bic(req: BicRequest):
        est = bic_dimension(
            np.asarray(req.evalues, dtype=float), n=req.n, rho=req.rho, p_max=req.p_max
        )
        return BicResponse(criterion=est.criterion.tolist(), d_hat=est.d_hat, rho=est.rho)

    @app.post("/project", response_model=ProjectResponse)
    def project(req: ProjectRequest):
        doc = req.fit.model_dump(by_alias=True, exclude_none=True)
        x = _matrix(req.x)
        coords = project_document(doc, x, d=req.d)
        return ProjectResponse(coordinates=coords.tolist(), d=coords.shape[1])

    @app.post("/stream/init", response_model=StreamResponse)
    def stream_init_endpoint(req: StreamInitRequest):
        x = _matrix(req.x)
        y = np.asarray(req.y, dtype=float)
        state = stream_init(x, y, h=req.h, lam=req.lam)
        return StreamResponse(
            state=state_to_json(state), fit=fit_document(stream_result(state))
        )

    @app.post("/stream/update", response_model=StreamResponse)
    def stream_update_endpoint(req: StreamUpdateRequest):
        state = state_from_json(req.state)
        x = _matrix(req.x)
        y = np.asarray(req.y, dtype=float)
        state = stream_update(state, x, y)
        return StreamResponse(
            state=state_to_json(state), fit=fit_document(stream_result(state))
        )

    @app.post("/generate", response_class=PlainTextResponse)
    def generate(req: GenerateRequest):
        x, y = generate_dataset(req.model, req.n, req.p, req.seed)
        return PlainTextResponse(dataset_csv_text(x, y), media_type="text/csv")

    return app


app = create_app()
