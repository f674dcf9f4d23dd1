from kgp.traverse.agents import (
    Agent,
    EncoderMatcher,
    MatchingAgent,
    OracleAgent,
    RemoteLLMAgent,
    ScaledAgent,
    TextMatcher,
    TfIdfAgent,
)
from kgp.traverse.prompt import format_prompt
from kgp.traverse.question import Question, classify_question
from kgp.traverse.retrieve import (
    ReasoningPath,
    RetrievalResult,
    TraversalConfig,
    answer_context,
    passage_index,
    rank_neighbors,
    retrieve,
    retrieve_structural,
    seed_search,
)

__all__ = [
    "Agent",
    "EncoderMatcher",
    "MatchingAgent",
    "OracleAgent",
    "Question",
    "ReasoningPath",
    "RemoteLLMAgent",
    "RetrievalResult",
    "ScaledAgent",
    "TextMatcher",
    "TfIdfAgent",
    "TraversalConfig",
    "answer_context",
    "classify_question",
    "format_prompt",
    "passage_index",
    "rank_neighbors",
    "retrieve",
    "retrieve_structural",
    "seed_search",
]
