"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


class TableRow(BaseModel):
    context: list[int]
    probs: list[float]


class TableModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["table"]
    vocab_size: int
    eod: Optional[int] = None
    order: int = 1
    rows: list[TableRow]
    vectors: Any


class NgramModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["ngram"]
    vocab_size: int
    eod: Optional[int] = None
    order: int = 2
    smoothing: float = 0.5
    corpus: list[int]


class RemoteModelSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: Literal["remote"]
    endpoint: Optional[str] = None  # falls back to the backend env var
    timeout: float = 10.0


ModelSpec = Annotated[
    Union[TableModelSpec, NgramModelSpec, RemoteModelSpec],
    Field(discriminator="kind"),
]


class Strategy(BaseModel):
    """Wire shape of a decoding strategy; extra keys are rejected."""

    model_config = ConfigDict(extra="forbid")
    name: str
    k: Optional[int] = None
    p: Optional[float] = None
    tau: Optional[float] = None
    alpha: Optional[float] = None
    amateur_temperature: Optional[float] = None

    def to_spec_dict(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class PromptRow(BaseModel):
    id: Union[int, str]
    tokens: list[int]


class GenerationRow(BaseModel):
    prompt_id: Union[int, str]
    system: str
    prompt: list[int]
    continuation: list[int]
    strategy: dict
    seed: int
    stop_reason: str
    vocab_size: int
    eod: Optional[int] = None


class GenerateRequest(BaseModel):
    model: ModelSpec
    amateur: Optional[ModelSpec] = None
    prompts: list[PromptRow]
    strategy: Strategy
    system: Optional[str] = None  # defaults to the strategy name
    prompt_length: Optional[int] = None  # None: use rows as-is
    max_length: int = 256
    seed: int = 0


class GenerateResponse(BaseModel):
    records: list[GenerationRow]


class BenchmarkDoc(BaseModel):
    name: str
    prompt_file: str
    prompt_length: int = 32
    max_length: int = 256
    reference_file: Optional[str] = None


class SystemDoc(BaseModel):
    name: str
    strategy: Strategy


class MetricSettingsDoc(BaseModel):
    num_bins: int = 8
    scaling_constant: float = 5.0
    grid_points: int = 25
    feature: str = "bigram"
    truncate: int = 128
    seed: int = 0


class RunConfigDoc(BaseModel):
    """Mirror of the harness run-config document."""

    benchmark: BenchmarkDoc
    systems: list[SystemDoc]
    model: ModelSpec
    amateur: Optional[ModelSpec] = None
    scorer: Optional[ModelSpec] = None
    master_seed: int = 0
    metrics: MetricSettingsDoc = Field(default_factory=MetricSettingsDoc)

    def to_config_dict(self) -> dict:
        doc = {
            "benchmark": self.benchmark.model_dump(),
            "systems": [
                {"name": s.name, "strategy": s.strategy.to_spec_dict()}
                for s in self.systems
            ],
            "model": self.model.model_dump(),
            "master_seed": self.master_seed,
            "metrics": self.metrics.model_dump(),
        }
        if self.amateur is not None:
            doc["amateur"] = self.amateur.model_dump()
        if self.scorer is not None:
            doc["scorer"] = self.scorer.model_dump()
        return doc


class BenchRequest(BaseModel):
    config: RunConfigDoc
    jobs: int = 1


class BenchResponse(BaseModel):
    report: dict
    table: str


class SweepRequest(BaseModel):
    config: RunConfigDoc
    k_min: int = 2
    k_max: int = 10
    alpha: float = 0.6
    jobs: int = 1


class SweepResponse(BaseModel):
    dataset: dict
    table: str


class MetricsRequest(BaseModel):
    """Score already-generated rows; references enable the frontier block."""

    generations: list[GenerationRow]
    references: Optional[list[PromptRow]] = None
    scorer: Optional[ModelSpec] = None
    settings: MetricSettingsDoc = Field(default_factory=MetricSettingsDoc)


class MetricsResponse(BaseModel):
    systems: dict[str, dict]


class PairExportRequest(BaseModel):
    records_a: list[GenerationRow]
    records_b: list[GenerationRow]
    order_seed: int = 0


class PairExportResponse(BaseModel):
    worksheet: list[dict]
    key: list[dict]


class VerdictRow(BaseModel):
    prompt_id: Union[int, str]
    verdict: str


class PairIngestRequest(BaseModel):
    verdicts: list[VerdictRow]
    key: list[dict]


class SignTestDoc(BaseModel):
    wins_a: int
    wins_b: int
    neutrals: int
    p_value: float
    significant: bool


class PairIngestResponse(BaseModel):
    systems: dict[str, str]
    result: SignTestDoc
    comparisons: list[dict]


class HealthResponse(BaseModel):
    status: str
    version: str
