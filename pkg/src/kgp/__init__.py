"""Knowledge-graph construction over document collections and agent-guided
multi-hop context retrieval."""

__version__ = "0.1.0"
