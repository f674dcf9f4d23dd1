"""Command-line entry point: ``kgp build|retrieve|bench|gen|stats|serve``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Sequence

from kgp.corpus import load_corpus, save_corpus
from kgp.embed import RemoteProvider
from kgp.errors import KGPError
from kgp.eval.synthetic import SyntheticSpec, generate_synthetic_corpus, load_qa, save_qa
from kgp.graph.build import BuildParams, build_graph
from kgp.graph.io import load_graph, save_graph
from kgp.graph.stats import graph_stats
from kgp.text import load_stopwords
from kgp.traverse.factory import AGENTS, answer_key_from_ids, make_agent
from kgp.traverse.prompt import format_prompt
from kgp.traverse.remote import CompletionClient, RemoteClassifier
from kgp.traverse.retrieve import TraversalConfig, answer_context

log = logging.getLogger("kgp")


def _read_lines(path: str | None) -> list[str]:
    if not path:
        return []
    return [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


def cmd_build(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, args.format, split=True, budget=args.passage_len)
    params = BuildParams(
        method=args.method,
        keywords_m=args.keywords,
        knn_k=args.knn_k,
        mutual=args.mutual,
        with_structure=args.with_structure,
        embed_dimension=args.embed_dim,
        gazetteer=_read_lines(args.gazetteer),
        stopwords=sorted(load_stopwords(args.stopwords)) if args.stopwords else [],
    )
    provider = RemoteProvider() if args.embedder == "remote" else None
    graph = build_graph(corpus, params, provider)
    save_graph(graph, args.output)
    print(json.dumps(graph_stats(graph).to_dict()))
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    config = TraversalConfig(
        budget_K=args.budget,
        branching_factor=args.branching,
        seed_count=args.seeds,
        max_hops=args.hops,
        match_mode=args.match_mode,
    )
    answer_key = {}
    if args.qa:
        answer_key = answer_key_from_ids(graph, {q.question: q.supporting_fact_ids for q in load_qa(args.qa)})
    client = CompletionClient() if args.agent == "remote" or args.remote_classifier else None
    agent = make_agent(args.agent, graph, args.match_mode, answer_key=answer_key, client=client,
                       text_similarity=args.text_similarity)
    classifier = RemoteClassifier(client) if args.remote_classifier else None
    question, result = answer_context(graph, args.question, agent, config, classifier)
    prompt = format_prompt(question, result, args.template, args.template_file)
    if args.json:
        print(json.dumps({"kind": question.kind, "result": result.to_dict(), "prompt": prompt}, indent=1))
    else:
        print(prompt)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from kgp.eval.plots import plot_sweep
    from kgp.eval.sweep import density_sweep, write_sweep_csv

    spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    if "synthetic" in spec:
        corpus, questions = generate_synthetic_corpus(SyntheticSpec(**spec["synthetic"]))
    else:
        corpus = load_corpus(spec["corpus"], spec.get("format", "structured"), split=True,
                             budget=spec.get("passage_len", 250))
        questions = load_qa(spec["questions"])
    build_keys = {f.name for f in fields(BuildParams)}
    base = BuildParams(**{k: v for k, v in spec.get("build", {}).items() if k in build_keys})
    rows = density_sweep(
        corpus,
        questions,
        spec.get("method", "knn"),
        spec.get("values", [1, 2, 4, 8, 16]),
        TraversalConfig(**spec.get("traversal", {})),
        base_params=base,
        repeats=int(spec.get("repeats", 3)),
    )
    write_sweep_csv(rows, args.output)
    if not args.no_figure:
        figure = Path(args.figure) if args.figure else Path(args.output).with_suffix(".png")
        plot_sweep(rows, figure)
        log.info("figure written to %s", figure)
    for row in rows:
        if row.error:
            print(f"error at {row.hyperparameter}: {row.error}", file=sys.stderr)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        num_docs=args.docs,
        chain_length=args.chain_length,
        distractor_count=args.distractors,
        seed=args.seed,
        num_questions=args.questions,
        comparison_fraction=args.comparison,
        structured=args.structured,
    )
    corpus, qas = generate_synthetic_corpus(spec)
    save_corpus(corpus, args.output)
    qa_path = args.qa or str(Path(args.output).with_suffix(".qa.jsonl"))
    save_qa(qas, qa_path)
    print(json.dumps({"corpus": args.output, "qa": qa_path, "documents": len(corpus.documents),
                      "passages": len(corpus.passages), "questions": len(qas)}))
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    print(json.dumps(graph_stats(load_graph(args.graph)).to_dict(), indent=1))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from kgp.serve.config import ServiceConfig
    from kgp.serve.service import http_service

    config = ServiceConfig.load(args.config, host=args.host, port=args.port, data_dir=args.data_dir)
    http_service(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kgp", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a knowledge graph from a corpus")
    b.add_argument("corpus", help="structured JSON file/dir, or .txt file/dir with --format plain")
    b.add_argument("-o", "--output", required=True, help="graph JSON to write")
    b.add_argument("--format", choices=["structured", "plain"], default="structured")
    b.add_argument("--method", choices=["tfidf", "knn", "entity", "merged"], default="tfidf")
    b.add_argument("--keywords", type=int, default=20, help="TF-IDF keywords per document")
    b.add_argument("--knn-k", type=int, default=5)
    b.add_argument("--mutual", action="store_true", help="mutual instead of union KNN")
    b.add_argument("--passage-len", type=int, default=250)
    b.add_argument("--with-structure", action="store_true", help="add page/table nodes")
    b.add_argument("--gazetteer", help="entity names, one per line (entity/merged methods)")
    b.add_argument("--stopwords", help="whitespace-separated stopword file")
    b.add_argument("--embedder", choices=["hash", "remote"], default="hash")
    b.add_argument("--embed-dim", type=int, default=256)
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("retrieve", help="retrieve context for a question")
    r.add_argument("graph")
    r.add_argument("question")
    r.add_argument("--agent", choices=AGENTS, default="tfidf")
    r.add_argument("--qa", help="QA JSONL providing supporting facts for --agent oracle")
    r.add_argument("--budget", type=int, default=30)
    r.add_argument("--branching", type=int, default=3)
    r.add_argument("--seeds", type=int, default=10)
    r.add_argument("--hops", type=int, default=2)
    r.add_argument("--match-mode", choices=["text", "encoder"], default="text")
    r.add_argument("--text-similarity", choices=["tfidf", "levenshtein"], default="tfidf")
    r.add_argument("--remote-classifier", action="store_true")
    r.add_argument("--template", choices=["with_context", "no_context"], default="with_context")
    r.add_argument("--template-file")
    r.add_argument("--json", action="store_true", help="print paths and prompt as JSON")
    r.set_defaults(func=cmd_retrieve)

    be = sub.add_parser("bench", help="run a density sweep from a JSON spec")
    be.add_argument("spec")
    be.add_argument("-o", "--output", required=True, help="CSV to write")
    be.add_argument("--figure", help="figure path (default: CSV path with .png)")
    be.add_argument("--no-figure", action="store_true")
    be.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="generate a synthetic corpus and QA file")
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--qa")
    g.add_argument("--docs", type=int, default=10)
    g.add_argument("--chain-length", type=int, default=2)
    g.add_argument("--distractors", type=int, default=4)
    g.add_argument("--questions", type=int)
    g.add_argument("--comparison", type=float, default=0.0)
    g.add_argument("--structured", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("stats", help="print graph statistics")
    s.add_argument("graph")
    s.set_defaults(func=cmd_stats)

    sv = sub.add_parser("serve", help="run the HTTP service")
    sv.add_argument("--config")
    sv.add_argument("--host")
    sv.add_argument("--port", type=int)
    sv.add_argument("--data-dir")
    sv.set_defaults(func=cmd_serve)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (KGPError, OSError, ValueError, KeyError) as exc:
        print(f"kgp {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
