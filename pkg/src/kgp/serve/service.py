"""HTTP surface for corpus upload, async graph builds, queries and incremental updates."""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import asdict
from typing import Any, Literal

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from kgp.corpus import corpus_from_dict, document_from_dict
from kgp.embed import RemoteProvider
from kgp.errors import IdError, KGPError, StructureNotFoundError, ValidationError
from kgp.graph.build import BuildParams, build_graph
from kgp.graph.incremental import add_document, remove_document
from kgp.graph.stats import graph_stats
from kgp.serve.config import ServiceConfig
from kgp.serve.store import Store, content_hash
from kgp.traverse.factory import make_agent
from kgp.traverse.prompt import format_prompt
from kgp.traverse.remote import CompletionClient
from kgp.traverse.retrieve import TraversalConfig, answer_context


class BuildRequest(BaseModel):
    corpus_id: str
    method: Literal["tfidf", "knn", "entity", "merged"] = "tfidf"
    keywords_m: int = Field(20, ge=1)
    knn_k: int = Field(5, ge=0)
    mutual: bool = False
    passage_len: int = Field(250, ge=1)
    with_structure: bool = False
    embed_dimension: int = Field(256, ge=8)
    embedder: Literal["hash", "remote"] = "hash"
    gazetteer: list[str] = []


class TraversalBody(BaseModel):
    budget_K: int = Field(30, ge=1)
    branching_factor: int = Field(3, ge=1)
    seed_count: int = Field(10, ge=1)
    max_hops: int = Field(2, ge=1)
    match_mode: Literal["encoder", "text"] = "text"


class QueryRequest(BaseModel):
    question: str = Field(min_length=1)
    config: TraversalBody = TraversalBody()
    agent: Literal["oracle", "tfidf", "remote"] = "tfidf"
    # oracle agent only: gold supporting-fact ids in chain order
    sf_ids: list[str] = []
    template: Literal["with_context", "no_context"] = "with_context"


def _loc(parts) -> str:
    return ".".join(str(p) for p in parts)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.load()
    store = Store(config.data_dir, config.workers)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        store.shutdown()

    app = FastAPI(title="kgp", lifespan=lifespan)
    app.state.store = store

    @app.exception_handler(RequestValidationError)
    async def _invalid_body(request: Request, exc: RequestValidationError) -> JSONResponse:
        errors = [{"field": _loc(e["loc"]), "message": e["msg"]} for e in exc.errors()]
        return JSONResponse({"detail": errors}, status_code=400)

    def _graph(graph_id: str):
        g = store.get_graph(graph_id)
        if g is None:
            raise HTTPException(404, f"unknown graph {graph_id}")
        return g

    def _embedder(req: BuildRequest):
        if req.embedder == "remote":
            return RemoteProvider(config.embed_url, config.embed_key)
        return None

    @app.post("/corpora", status_code=201)
    def upload_corpus(body: dict[str, Any]) -> dict:
        try:
            corpus = corpus_from_dict(body, "body")
        except ValidationError as exc:
            return JSONResponse({"detail": [{"field": exc.field, "message": str(exc)}]}, status_code=400)
        except KGPError as exc:
            return JSONResponse({"detail": [{"field": "documents", "message": str(exc)}]}, status_code=400)
        return {"corpus_id": store.put_corpus(corpus), "num_documents": len(corpus.documents)}

    @app.post("/graphs", status_code=202)
    def create_graph(req: BuildRequest) -> dict:
        corpus = store.get_corpus(req.corpus_id)
        if corpus is None:
            raise HTTPException(404, f"unknown corpus {req.corpus_id}")
        params = BuildParams(
            method=req.method,
            keywords_m=req.keywords_m,
            knn_k=req.knn_k,
            mutual=req.mutual,
            with_structure=req.with_structure,
            embed_dimension=req.embed_dimension,
            gazetteer=list(req.gazetteer),
        )
        graph_id = content_hash({"corpus": req.corpus_id, "params": req.model_dump()})
        # the remote embedder is created inside the job so a misconfigured
        # endpoint surfaces as a failed job rather than a 500
        job = store.submit("build", graph_id, lambda: build_graph(corpus.split(req.passage_len), params, _embedder(req)))
        return {"job_id": job.job_id, "graph_id": graph_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        job = store.jobs.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        return asdict(job)

    @app.get("/graphs/{graph_id}/stats")
    def stats(graph_id: str) -> dict:
        return graph_stats(_graph(graph_id)).to_dict()

    @app.post("/graphs/{graph_id}/query")
    def query(graph_id: str, req: QueryRequest) -> dict:
        g = _graph(graph_id)
        try:
            tconf = TraversalConfig(**req.config.model_dump())
        except ValueError as exc:
            return JSONResponse({"detail": [{"field": "body.config", "message": str(exc)}]}, status_code=400)
        client = CompletionClient(config.llm_url, config.llm_key) if req.agent == "remote" else None
        answer_key = {req.question: [g.nodes[i].feature for i in req.sf_ids if i in g.nodes]}
        agent = make_agent(req.agent, g, tconf.match_mode, answer_key=answer_key, client=client)
        try:
            question, result = answer_context(g, req.question, agent, tconf)
        except StructureNotFoundError as exc:
            raise HTTPException(404, f"structure not found: {exc}") from exc
        except KGPError as exc:
            raise HTTPException(422, str(exc)) from exc
        has_context = bool(result.context_texts or result.structural_payloads)
        template = req.template if has_context else "no_context"
        return {
            "question": {"text": question.text, "kind": question.kind,
                         "structure_refs": [list(r) for r in question.structure_refs]},
            "result": result.to_dict(),
            "prompt": format_prompt(question, result, template),
        }

    @app.post("/graphs/{graph_id}/documents", status_code=201)
    def add_doc(graph_id: str, body: dict[str, Any]) -> dict:
        _graph(graph_id)
        try:
            doc = document_from_dict(body, "body", "body")
        except ValidationError as exc:
            return JSONResponse({"detail": [{"field": exc.field, "message": str(exc)}]}, status_code=400)
        try:
            g = store.mutate_graph(graph_id, lambda cur: add_document(cur, doc))
        except IdError as exc:
            raise HTTPException(409, f"document already present: {exc}") from exc
        except KGPError as exc:
            raise HTTPException(422, str(exc)) from exc
        return graph_stats(g).to_dict()

    @app.delete("/graphs/{graph_id}/documents/{doc_id}")
    def delete_doc(graph_id: str, doc_id: str) -> dict:
        _graph(graph_id)
        try:
            g = store.mutate_graph(graph_id, lambda cur: remove_document(cur, doc_id))
        except IdError as exc:
            raise HTTPException(404, f"unknown document {exc}") from exc
        return graph_stats(g).to_dict()

    return app


def http_service(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
