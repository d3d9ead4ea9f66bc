import logging
import time
from contextlib import contextmanager
from datetime import datetime
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional

logger = logging.getLogger("RunManifest")


class StageStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class RunManifest:
    """Record of one CLI run: inputs, per-stage wall clock and written files"""

    def __init__(self, command: str, flags: Dict[str, Any], version: str):
        self.command = command
        self.flags = dict(flags)
        self.version = version
        self.config_hash: Optional[str] = None
        self.status = StageStatus.PENDING
        self.stages: List[Dict[str, Any]] = []
        self.outputs: List[str] = []
        self.error: Optional[str] = None
        self.created_at = datetime.now().isoformat()
        self.updated_at = self.created_at

    @contextmanager
    def stage(self, name: str) -> Iterator[Dict[str, Any]]:
        """Time a stage; the record is marked failed if the block raises"""
        record = {"name": name, "status": StageStatus.RUNNING.value, "seconds": 0.0}
        self.stages.append(record)
        self.status = StageStatus.RUNNING
        started = time.perf_counter()
        logger.info(f"Stage {name} started")
        try:
            yield record
        except Exception as e:
            record["status"] = StageStatus.FAILED.value
            self.status = StageStatus.FAILED
            self.error = str(e)
            raise
        else:
            record["status"] = StageStatus.COMPLETED.value
        finally:
            record["seconds"] = round(time.perf_counter() - started, 6)
            self.updated_at = datetime.now().isoformat()
            logger.info(f"Stage {name} finished in {record['seconds']:.2f} s")

    def add_output(self, path: str) -> None:
        if path not in self.outputs:
            self.outputs.append(path)

    def finish(self, error: Optional[str] = None) -> None:
        if error is not None:
            self.error = error
            self.status = StageStatus.FAILED
        elif self.status != StageStatus.FAILED:
            self.status = StageStatus.COMPLETED
        self.updated_at = datetime.now().isoformat()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "flags": self.flags,
            "version": self.version,
            "config_sha256": self.config_hash,
            "status": self.status.value,
            "stages": self.stages,
            "outputs": sorted(self.outputs),
            "error": self.error,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }
