"""HTTP facade over the toolkit.

Every core operation is exposed as a POST endpoint taking and returning
JSON; the CLI is a thin client over these routes. Input problems map to
400, backend/transport problems to 502, so clients can translate status
classes straight into exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..decoding import generate, spec_from_dict
from ..errors import GenerationError, InputError, ProtocolError, TransportError
from ..harness import (
    MetricSettings,
    PromptRecord,
    SweepSpec,
    metric_report,
    pairwise_export,
    pairwise_ingest,
    record_to_row,
    render_sweep_table,
    render_table,
    run_benchmark,
    run_config_from_dict,
    run_sweep,
)
from ..lm import TokenSequence, Vocabulary, build_model
from . import schemas


def _error_payload(exc: Exception) -> dict:
    return {"detail": str(exc), "error_type": type(exc).__name__}


def create_app() -> FastAPI:
    app = FastAPI(title="decokit", version=__version__)

    @app.exception_handler(InputError)
    async def _input_error(request: Request, exc: InputError):
        return JSONResponse(status_code=400, content=_error_payload(exc))

    @app.exception_handler(TransportError)
    async def _transport_error(request: Request, exc: TransportError):
        return JSONResponse(status_code=502, content=_error_payload(exc))

    @app.exception_handler(ProtocolError)
    async def _protocol_error(request: Request, exc: ProtocolError):
        return JSONResponse(status_code=502, content=_error_payload(exc))

    @app.exception_handler(GenerationError)
    async def _generation_error(request: Request, exc: GenerationError):
        backend = isinstance(exc.__cause__, (TransportError, ProtocolError))
        return JSONResponse(
            status_code=502 if backend else 400, content=_error_payload(exc)
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate_route(req: schemas.GenerateRequest) -> schemas.GenerateResponse:
        model = build_model(req.model.model_dump())
        amateur = build_model(req.amateur.model_dump()) if req.amateur else None
        spec = spec_from_dict(req.strategy.to_spec_dict())
        system = req.system or req.strategy.name
        records = []
        for row in req.prompts:
            tokens = row.tokens
            if req.prompt_length is not None:
                if len(tokens) < req.prompt_length:
                    raise InputError(
                        f"prompt {row.id!r} has {len(tokens)} tokens, need {req.prompt_length}"
                    )
                tokens = tokens[: req.prompt_length]
            prompt = TokenSequence(tuple(tokens), model.vocab)
            record = generate(
                model,
                prompt,
                spec,
                max_length=req.max_length,
                seed=req.seed,
                amateur=amateur,
            )
            records.append(
                schemas.GenerationRow(**record_to_row(row.id, system, record))
            )
        return schemas.GenerateResponse(records=records)

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench_route(req: schemas.BenchRequest) -> schemas.BenchResponse:
        config = run_config_from_dict(req.config.to_config_dict())
        report = run_benchmark(config, jobs=req.jobs)
        return schemas.BenchResponse(report=report, table=render_table(report))

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep_route(req: schemas.SweepRequest) -> schemas.SweepResponse:
        config = run_config_from_dict(req.config.to_config_dict())
        sweep = SweepSpec(k_min=req.k_min, k_max=req.k_max, alpha=req.alpha)
        dataset = run_sweep(sweep, config, jobs=req.jobs)
        return schemas.SweepResponse(dataset=dataset, table=render_sweep_table(dataset))

    @app.post("/metrics", response_model=schemas.MetricsResponse)
    def metrics_route(req: schemas.MetricsRequest) -> schemas.MetricsResponse:
        if not req.generations:
            raise InputError("no generation rows to score")
        sizes = {row.vocab_size for row in req.generations}
        if len(sizes) != 1:
            raise InputError(f"generation rows disagree on vocab_size: {sorted(sizes)}")
        vocab = Vocabulary(sizes.pop())
        scorer = build_model(req.scorer.model_dump()) if req.scorer else None
        settings = MetricSettings(**req.settings.model_dump())
        references = None
        if req.references is not None:
            references = [
                PromptRecord(r.id, TokenSequence(tuple(r.tokens), vocab))
                for r in req.references
            ]
        by_system: dict[str, list[dict]] = {}
        for row in req.generations:
            by_system.setdefault(row.system, []).append(row.model_dump())
        out = {
            name: metric_report(rows, references, settings, scorer=scorer, vocab=vocab)
            for name, rows in sorted(by_system.items())
        }
        return schemas.MetricsResponse(systems=out)

    @app.post("/pair/export", response_model=schemas.PairExportResponse)
    def pair_export_route(req: schemas.PairExportRequest) -> schemas.PairExportResponse:
        worksheet, key = pairwise_export(
            [r.model_dump() for r in req.records_a],
            [r.model_dump() for r in req.records_b],
            order_seed=req.order_seed,
        )
        return schemas.PairExportResponse(worksheet=worksheet, key=key)

    @app.post("/pair/ingest", response_model=schemas.PairIngestResponse)
    def pair_ingest_route(req: schemas.PairIngestRequest) -> schemas.PairIngestResponse:
        comparisons, result = pairwise_ingest(
            [r.model_dump() for r in req.verdicts], req.key
        )
        systems = (
            {"a": comparisons[0].system_a, "b": comparisons[0].system_b}
            if comparisons
            else {}
        )
        return schemas.PairIngestResponse(
            systems=systems,
            result=schemas.SignTestDoc(
                wins_a=result.wins_a,
                wins_b=result.wins_b,
                neutrals=result.neutrals,
                p_value=result.p_value,
                significant=result.significant,
            ),
            comparisons=[
                {
                    "prompt_id": c.prompt_id,
                    "system_a": c.system_a,
                    "system_b": c.system_b,
                    "verdict": c.verdict.value,
                }
                for c in comparisons
            ],
        )

    return app
