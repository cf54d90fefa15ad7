"""Resume files for long scans, keyed by a hash of the run configuration."""
from __future__ import annotations
import hashlib
import json
import logging
import os
from typing import Any, Dict, Optional

log = logging.getLogger("ksat-lab.checkpoint")


def config_hash(cfg: Dict[str, Any]) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Checkpoint:
    def __init__(self, path: Optional[str], cfg: Dict[str, Any]):
        self.path = path
        self.hash = config_hash(cfg)
        self.done: Dict[str, Any] = {}
        if path and os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            if data.get("config_hash") == self.hash:
                self.done = dict(data.get("done", {}))
                log.info("resuming from %s (%d entries)", path, len(self.done))
            else:
                log.warning("checkpoint %s was written for another config; starting fresh", path)

    def __contains__(self, key: str) -> bool:
        return key in self.done

    def get(self, key: str) -> Any:
        return self.done.get(key)

    def put(self, key: str, value: Any) -> None:
        self.done[key] = value
        if not self.path:
            return
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"config_hash": self.hash, "done": self.done}, fh, sort_keys=True)
        os.replace(tmp, self.path)
