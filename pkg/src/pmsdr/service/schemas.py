"""Pydantic request/response models for the HTTP service."""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class FitRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    x: List[List[float]]
    y: List[float]
    loss: str = "svm"
    h: int = 10
    lam: float = Field(1.0, alias="lambda", gt=0)
    eta: float = Field(0.1, gt=0)
    eps: float = Field(1e-5, gt=0)
    max_iter: int = Field(100, ge=1)
    mtype: Literal["m", "r"] = "m"
    custom_loss: Optional[str] = None
    warm_start: bool = True


class KernelFitRequest(FitRequest):
    b: Optional[int] = None
    gamma: Optional[float] = None


class SliceSolutionDoc(BaseModel):
    cutpoint: float
    alpha: float
    beta: List[float]
    iterations: int
    converged: bool
    final_step: float
    halvings: int


class ConfigDoc(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda")
    eta: float
    eps: float
    max_iter: int
    warm_start: bool


class KernelSection(BaseModel):
    gamma: float
    b: int
    train_x: List[List[float]]
    q: List[List[float]]
    lam: List[float]
    col_means: List[float]
    psi_bar: List[float]


class FitDocument(BaseModel):
    """JSON shape of a stored fit; ``kind`` selects the optional sections."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int
    kind: Literal["linear", "kernel", "realtime"]
    n: int
    loss: str
    h: int
    evalues: List[float]
    evectors: List[List[float]]
    mu: List[float]
    cutpoints: List[float]
    mtype: Optional[Literal["m", "r"]] = None
    config: Optional[ConfigDoc] = None
    dropped_slices: Optional[int] = None
    slices: Optional[List[SliceSolutionDoc]] = None
    kernel: Optional[KernelSection] = None
    lam: Optional[float] = Field(None, alias="lambda")
    binary: Optional[bool] = None
    r: Optional[List[List[float]]] = None
    systems: Optional[List[List[List[float]]]] = None


class BicRequest(BaseModel):
    evalues: List[float]
    n: int
    rho: float = Field(0.01, gt=0)
    p_max: Optional[int] = None


class BicResponse(BaseModel):
    criterion: List[float]
    d_hat: int
    rho: float


class ProjectRequest(BaseModel):
    fit: FitDocument
    x: List[List[float]]
    d: Optional[int] = None


class ProjectResponse(BaseModel):
    coordinates: List[List[float]]
    d: int


class StreamInitRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    x: List[List[float]]
    y: List[float]
    h: int = 10
    lam: float = Field(1.0, alias="lambda", gt=0)


class StreamUpdateRequest(BaseModel):
    state: str
    x: List[List[float]]
    y: List[float]


class StreamResponse(BaseModel):
    state: str
    fit: FitDocument


class GenerateRequest(BaseModel):
    model: str
    n: int = 200
    p: int = 5
    seed: int = 0


class HealthResponse(BaseModel):
    status: str
    version: str
