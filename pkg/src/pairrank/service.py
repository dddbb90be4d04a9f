"""HTTP+JSON API over the experiment store.

Endpoints:
    GET  /health
    POST /experiments                         {"items": [...], "config": {...}}
    GET  /experiments/{id}                    metadata and progress
    GET  /experiments/{id}/batch?annotator=a&max_pairs=k
    POST /experiments/{id}/votes              {"pair": [i, j], "y": 0|1, "annotator": "a"}
    GET  /experiments/{id}/estimate
    GET  /experiments/{id}/export             CSV matrix dump
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .errors import ConvergenceError, UnidentifiableModelError
from .store import ExperimentNotFound, ExperimentStore, ServiceConfig


class CreateExperimentRequest(BaseModel):
    items: list[str]
    config: dict | None = None


class VoteRequest(BaseModel):
    pair: tuple[int, int]
    y: int = Field(ge=0, le=1)
    annotator: str = "anonymous"


def create_app(store: ExperimentStore) -> FastAPI:
    app = FastAPI(title="pairrank", version="0.1.0")
    app.state.store = store

    def experiment_or_404(exp_id: str):
        try:
            return store.get(exp_id)
        except ExperimentNotFound:
            raise HTTPException(status_code=404, detail=f"experiment {exp_id!r} not found") from None

    @app.get("/health")
    def health():
        return {"ok": True, "experiments": len(store.ids())}

    @app.post("/experiments", status_code=201)
    def create_experiment(request: CreateExperimentRequest):
        try:
            experiment = store.create(request.items, request.config)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        with experiment.lock:
            return {
                "id": experiment.id,
                "items": experiment.items,
                "mode": experiment.mode,
                "observed_total": experiment.observed_total,
            }

    @app.get("/experiments/{exp_id}")
    def get_experiment(exp_id: str):
        experiment = experiment_or_404(exp_id)
        with experiment.lock:
            return {
                "id": experiment.id,
                "items": experiment.items,
                "mode": experiment.mode,
                "observed_total": experiment.observed_total,
                "standard_trial_votes": experiment.standard_trial_votes,
                "batch_size": len(experiment.batch),
            }

    @app.get("/experiments/{exp_id}/batch")
    def get_batch(exp_id: str, annotator: str = Query(default="anonymous"), max_pairs: int = Query(default=1, ge=1)):
        experiment = experiment_or_404(exp_id)
        pairs = experiment.assign_pairs(annotator, max_pairs=max_pairs)
        with experiment.lock:
            return {
                "experiment": experiment.id,
                "annotator": annotator,
                "mode": experiment.mode,
                "pairs": [list(p) for p in pairs],
                "items": [[experiment.items[i], experiment.items[j]] for i, j in pairs],
            }

    @app.post("/experiments/{exp_id}/votes")
    def submit_vote(exp_id: str, vote: VoteRequest):
        experiment = experiment_or_404(exp_id)
        try:
            return experiment.apply_vote(vote.pair[0], vote.pair[1], vote.y, vote.annotator)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        except (ConvergenceError, UnidentifiableModelError) as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from None

    @app.get("/experiments/{exp_id}/estimate")
    def get_estimate(exp_id: str):
        experiment = experiment_or_404(exp_id)
        return experiment.estimate_snapshot()

    @app.get("/experiments/{exp_id}/export", response_class=PlainTextResponse)
    def export_matrix(exp_id: str):
        experiment = experiment_or_404(exp_id)
        return experiment.export_csv()

    return app


def create_app_from_config(config_path=None) -> FastAPI:
    """App factory for ``uvicorn pairrank.service:create_app_from_config``."""
    config = ServiceConfig.from_sources(config_path)
    return create_app(ExperimentStore(config))
