"""Graph-density sweeps: neighborhood coverage versus precision and matching latency.

For each hyperparameter value a graph is built, the TF-IDF seeds of every
question are expanded by one hop, and coverage of the supporting facts is
measured over seeds plus neighbors. Matching latency is the mean wall-clock
time of ranking each seed's neighbors with the configured agent.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

from kgp.corpus import Corpus
from kgp.embed import EmbeddingProvider
from kgp.errors import ExhaustedCandidatesError
from kgp.eval.metrics import mean, retrieval_precision, sf_coverage, sf_em
from kgp.eval.synthetic import QAInstance
from kgp.graph.build import BuildParams, build_graph
from kgp.graph.model import KnowledgeGraph
from kgp.graph.stats import graph_stats
from kgp.traverse.agents import Agent, TextMatcher, TfIdfAgent
from kgp.traverse.retrieve import ReasoningPath, TraversalConfig, passage_index, rank_neighbors, seed_search

log = logging.getLogger(__name__)

CSV_HEADER = ["method", "param", "value", "avg_degree", "sf_em", "precision", "match_latency_ms"]

PARAM_FOR_METHOD = {"knn": "knn_k", "tfidf": "keywords_m"}
PARAM_LABEL = {"knn_k": "k", "keywords_m": "m"}


@dataclass
class SweepRow:
    method: str
    hyperparameter: tuple[str, float]
    avg_degree: float = float("nan")
    sf_em: float = float("nan")
    precision: float = float("nan")
    match_latency: float = float("nan")  # seconds
    sf_coverage: float = float("nan")
    error: str | None = None

    def csv_fields(self) -> list[str]:
        name, value = self.hyperparameter
        if self.error:
            return [self.method, name, _fmt(value), "", "", "", ""]
        return [
            self.method,
            name,
            _fmt(value),
            f"{self.avg_degree:.6g}",
            f"{self.sf_em:.6g}",
            f"{self.precision:.6g}",
            f"{self.match_latency * 1000:.6g}",
        ]


def _fmt(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:g}"


def default_agent(graph: KnowledgeGraph) -> Agent:
    return TfIdfAgent(TextMatcher(passage_index(graph)))


def evaluate_neighborhoods(
    graph: KnowledgeGraph,
    questions: Sequence[QAInstance],
    config: TraversalConfig,
    agent: Agent,
    repeats: int = 3,
) -> tuple[float, float, float, float]:
    """Return (sf_em, precision, sf_coverage, mean ranking seconds) over one-hop neighborhoods."""
    ems, precs, covs, timings = [], [], [], []
    for qa in questions:
        seeds = seed_search(graph, qa.question, config.seed_count)
        retrieved = set(seeds)
        for s in seeds:
            nbrs = graph.passage_neighbors(s)
            retrieved.update(nbrs)
            if not nbrs:
                continue
            path = ReasoningPath([s])
            for _ in range(repeats):
                t0 = time.perf_counter()
                try:
                    rank_neighbors(graph, qa.question, path, nbrs, agent, config.branching_factor)
                except ExhaustedCandidatesError:
                    break
                timings.append(time.perf_counter() - t0)
        ems.append(sf_em(retrieved, qa.supporting_fact_ids))
        covs.append(sf_coverage(retrieved, qa.supporting_fact_ids))
        precs.append(retrieval_precision(retrieved, qa.supporting_fact_ids))
    return mean(ems), mean(precs), mean(covs), mean(timings)


def density_sweep(
    corpus: Corpus,
    questions: Iterable[QAInstance],
    method: str,
    grid: Sequence[float],
    config: TraversalConfig | None = None,
    *,
    base_params: BuildParams | None = None,
    provider: EmbeddingProvider | None = None,
    agent_factory: Callable[[KnowledgeGraph], Agent] = default_agent,
    repeats: int = 3,
) -> list[SweepRow]:
    """One row per grid value, ordered by value. Build failures become error rows."""
    if not grid:
        raise ValueError("grid is empty")
    config = config or TraversalConfig()
    qs = [q for q in questions if q.supporting_fact_ids]
    param = PARAM_FOR_METHOD.get(method)
    if param is None:
        raise ValueError(f"sweeps support methods {sorted(PARAM_FOR_METHOD)}, not {method!r}")
    base = base_params or BuildParams()
    rows: list[SweepRow] = []
    for value in sorted(grid):
        row = SweepRow(method, (PARAM_LABEL[param], value))
        try:
            params = replace(base, method=method, **{param: int(value)})
            graph = build_graph(corpus, params, provider)
        except Exception as exc:  # noqa: BLE001 - recorded per row, sweep continues
            log.warning("build failed at %s=%s: %s", param, value, exc)
            row.error = str(exc) or type(exc).__name__
            rows.append(row)
            continue
        row.avg_degree = graph_stats(graph).avg_degree
        row.sf_em, row.precision, row.sf_coverage, row.match_latency = evaluate_neighborhoods(
            graph, qs, config, agent_factory(graph), repeats
        )
        rows.append(row)
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow(row.csv_fields())
