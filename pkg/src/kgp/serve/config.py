"""Service configuration.

Read from the JSON file named by ``KGP_CONFIG`` (if set), then overridden
by explicit values (CLI flags). Remote endpoint URLs/keys fall back to the
``KGP_EMBED_*`` / ``KGP_LLM_*`` environment variables inside the clients.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: str = "kgp-data"
    workers: int = 2
    embed_url: str | None = None
    embed_key: str | None = None
    llm_url: str | None = None
    llm_key: str | None = None

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides: Any) -> "ServiceConfig":
        path = path or os.environ.get("KGP_CONFIG")
        values: dict[str, Any] = {}
        if path:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
            known = {f.name for f in fields(cls)}
            unknown = set(raw) - known
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
            values.update(raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
