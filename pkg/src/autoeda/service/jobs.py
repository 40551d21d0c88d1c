"""Background job pool with monotone state transitions and disk-persisted results."""

from __future__ import annotations

import itertools
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

STATES = ("queued", "running", "done", "failed")
_ALLOWED = {("queued", "running"), ("running", "done"), ("running", "failed")}


@dataclass
class Job:
    id: str
    kind: str
    state: str = "queued"
    progress: str = ""
    result_ref: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "progress": self.progress,
            "result_ref": self.result_ref,
            "error": self.error,
        }


class JobManager:
    """Bounded worker pool; request threads only enqueue, never run pipeline work."""

    def __init__(self, results_dir: str | Path, workers: int = 2, max_pending: int = 32):
        self.results_dir = Path(results_dir)
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self.max_pending = max_pending
        self._executor = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._seq = itertools.count(1)

    def submit(self, kind: str, work) -> Job:
        """Queue ``work`` (a callable returning (result_ref, payload|None))."""
        with self._lock:
            pending = sum(1 for j in self._jobs.values() if j.state in ("queued", "running"))
            if pending >= self.max_pending:
                raise RuntimeError("worker pool saturated")
            job = Job(id=f"job-{next(self._seq):06d}", kind=kind)
            self._jobs[job.id] = job
        self._executor.submit(self._run, job, work)
        return job

    def _run(self, job: Job, work) -> None:
        self._transition(job, "running")
        try:
            result_ref, payload = work(lambda note: self._note_progress(job, note))
        except Exception as exc:  # failures are job data, not server crashes
            log.warning("job %s failed: %s", job.id, exc)
            with self._lock:
                job.error = f"{type(exc).__name__}: {exc}"
            self._transition(job, "failed")
            return
        if payload is not None:
            path = self.results_dir / f"{job.id}.json"
            path.write_text(json.dumps(payload, indent=1, sort_keys=True), encoding="utf-8")
        with self._lock:
            job.result_ref = result_ref
        self._transition(job, "done")

    def _note_progress(self, job: Job, note: str) -> None:
        with self._lock:
            job.progress = note

    def _transition(self, job: Job, new_state: str) -> None:
        with self._lock:
            if (job.state, new_state) not in _ALLOWED:
                raise RuntimeError(f"illegal job transition {job.state} -> {new_state}")
            job.state = new_state

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def result_payload(self, job_id: str) -> dict | None:
        path = self.results_dir / f"{job_id}.json"
        if path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def drain(self) -> None:
        """Let running jobs finish; used by graceful shutdown."""
        self._executor.shutdown(wait=True, cancel_futures=False)
