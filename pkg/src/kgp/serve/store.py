"""Flat-file storage for corpora, graphs and build jobs.

Layout under ``data_dir``::

    corpora/<sha256-prefix>.json
    graphs/<graph_id>.json
    jobs/<job_id>.json
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable, Literal

from kgp.corpus import Corpus, corpus_from_dict, corpus_to_dict
from kgp.graph.io import load_graph, save_graph
from kgp.graph.model import KnowledgeGraph

log = logging.getLogger(__name__)


@dataclass
class JobRecord:
    job_id: str
    kind: Literal["build", "sweep"]
    status: Literal["queued", "running", "done", "failed"] = "queued"
    artifact_path: str | None = None
    error: str | None = None
    graph_id: str | None = None


def content_hash(obj: Any) -> str:
    data = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class Store:
    def __init__(self, data_dir: str | Path, workers: int = 2):
        self.root = Path(data_dir)
        for sub in ("corpora", "graphs", "jobs"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="kgp-build")
        self._graphs: dict[str, KnowledgeGraph] = {}
        self._graph_locks: dict[str, threading.Lock] = {}
        self._lock = threading.Lock()
        self.jobs: dict[str, JobRecord] = {}
        self._recover_jobs()

    # -- corpora

    def put_corpus(self, corpus: Corpus) -> str:
        obj = corpus_to_dict(corpus)
        cid = content_hash(obj)
        path = self.root / "corpora" / f"{cid}.json"
        if not path.exists():
            _atomic_write(path, json.dumps(obj))
        return cid

    def get_corpus(self, corpus_id: str) -> Corpus | None:
        path = self.root / "corpora" / f"{corpus_id}.json"
        if not path.exists():
            return None
        return corpus_from_dict(json.loads(path.read_text(encoding="utf-8")), str(path))

    # -- graphs

    def graph_path(self, graph_id: str) -> Path:
        return self.root / "graphs" / f"{graph_id}.json"

    def get_graph(self, graph_id: str) -> KnowledgeGraph | None:
        with self._lock:
            g = self._graphs.get(graph_id)
        if g is not None:
            return g
        path = self.graph_path(graph_id)
        if not path.exists():
            return None
        g = load_graph(path)
        with self._lock:
            self._graphs.setdefault(graph_id, g)
            return self._graphs[graph_id]

    def put_graph(self, graph_id: str, graph: KnowledgeGraph) -> Path:
        path = self.graph_path(graph_id)
        from kgp.graph.io import dumps

        _atomic_write(path, dumps(graph))
        with self._lock:
            self._graphs[graph_id] = graph
        return path

    def mutate_graph(self, graph_id: str, fn: Callable[[KnowledgeGraph], KnowledgeGraph]) -> KnowledgeGraph:
        """Apply a copy-on-write update; updates to one graph are serialized."""
        with self._lock:
            lock = self._graph_locks.setdefault(graph_id, threading.Lock())
        with lock:
            current = self.get_graph(graph_id)
            if current is None:
                raise KeyError(graph_id)
            updated = fn(current)
            self.put_graph(graph_id, updated)
            return updated

    # -- jobs

    def _save_job(self, job: JobRecord) -> None:
        _atomic_write(self.root / "jobs" / f"{job.job_id}.json", json.dumps(asdict(job)))

    def _recover_jobs(self) -> None:
        for path in sorted((self.root / "jobs").glob("*.json")):
            job = JobRecord(**json.loads(path.read_text(encoding="utf-8")))
            if job.status in ("queued", "running"):
                job.status, job.error = "failed", "interrupted by service restart"
                self._save_job(job)
            self.jobs[job.job_id] = job

    def submit(self, kind: Literal["build", "sweep"], graph_id: str, work: Callable[[], KnowledgeGraph]) -> JobRecord:
        job = JobRecord(job_id=uuid.uuid4().hex[:12], kind=kind, graph_id=graph_id)
        with self._lock:
            self.jobs[job.job_id] = job
        self._save_job(job)

        def run() -> None:
            job.status = "running"
            self._save_job(job)
            try:
                graph = work()
                job.artifact_path = str(self.put_graph(graph_id, graph))
                job.status = "done"
            except Exception as exc:  # noqa: BLE001 - surfaced through the job record
                log.exception("job %s failed", job.job_id)
                job.status, job.error = "failed", f"{type(exc).__name__}: {exc}"
            self._save_job(job)

        self._pool.submit(run)
        return job

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)
