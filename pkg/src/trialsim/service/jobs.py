"""In-memory job table and the single runner thread.

Jobs execute one at a time (FIFO) so progress is meaningful on a desk
machine. The table holds at most ``history_limit`` finished jobs (oldest
evicted first) and admits at most ``queue_limit`` active (queued or
running) jobs; nothing survives a process restart by design.
"""

from __future__ import annotations

import secrets
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

from ..power_engine import StudyCancelled

STATE_QUEUED = "queued"
STATE_RUNNING = "running"
STATE_DONE = "done"
STATE_FAILED = "failed"
STATE_CANCELLED = "cancelled"

TERMINAL_STATES = (STATE_DONE, STATE_FAILED, STATE_CANCELLED)


class QueueFull(RuntimeError):
    pass


class UnknownJob(KeyError):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass
class Job:
    id: str
    kind: str
    runner: Callable  # runner(progress_sink, cancel) -> ResultDocument
    state: str = STATE_QUEUED
    progress: float = 0.0
    submitted_at: str = field(default_factory=_now)
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    document: Optional[object] = None
    error: Optional[str] = None
    cancel_event: threading.Event = field(default_factory=threading.Event)


class JobManager:
    def __init__(self, queue_limit: int = 8, history_limit: int = 100):
        self.queue_limit = queue_limit
        self.history_limit = history_limit
        self._jobs: "OrderedDict[str, Job]" = OrderedDict()
        self._queue: list[str] = []
        self._lock = threading.Lock()
        self._wakeup = threading.Condition(self._lock)
        self._shutdown = False
        self._thread = threading.Thread(target=self._run_loop, name="trialsim-jobs", daemon=True)
        self._thread.start()

    def submit(self, kind: str, runner: Callable) -> Job:
        with self._lock:
            active = sum(1 for j in self._jobs.values() if j.state in (STATE_QUEUED, STATE_RUNNING))
            if active >= self.queue_limit:
                raise QueueFull(f"job queue is full ({self.queue_limit} active jobs)")
            job = Job(id=secrets.token_urlsafe(12), kind=kind, runner=runner)
            self._jobs[job.id] = job
            self._queue.append(job.id)
            self._evict_finished_locked()
            self._wakeup.notify()
            return job

    def get(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise UnknownJob(job_id)
            return self._jobs[job_id]

    def cancel(self, job_id: str) -> Job:
        with self._lock:
            if job_id not in self._jobs:
                raise UnknownJob(job_id)
            job = self._jobs[job_id]
            if job.state == STATE_QUEUED:
                self._queue.remove(job.id)
                job.state = STATE_CANCELLED
                job.finished_at = _now()
            elif job.state == STATE_RUNNING:
                job.cancel_event.set()
            return job

    def shutdown(self):
        with self._lock:
            self._shutdown = True
            for job in self._jobs.values():
                job.cancel_event.set()
            self._wakeup.notify_all()
        self._thread.join(timeout=5)

    def _evict_finished_locked(self):
        finished = [j for j in self._jobs.values() if j.state in TERMINAL_STATES]
        excess = len(finished) - self.history_limit
        for job in finished[:max(0, excess)]:
            del self._jobs[job.id]

    def _run_loop(self):
        while True:
            with self._lock:
                while not self._queue and not self._shutdown:
                    self._wakeup.wait()
                if self._shutdown:
                    return
                job = self._jobs[self._queue.pop(0)]
                job.state = STATE_RUNNING
                job.started_at = _now()

            def progress_sink(fraction, job=job):
                # single-writer: only this thread updates progress
                job.progress = max(job.progress, fraction)

            try:
                document = job.runner(progress_sink, job.cancel_event.is_set)
            except StudyCancelled:
                with self._lock:
                    job.state = STATE_CANCELLED
                    job.finished_at = _now()
            except Exception as exc:  # a failed study is data, not a crash
                with self._lock:
                    job.state = STATE_FAILED
                    job.error = f"{type(exc).__name__}: {exc}"
                    job.finished_at = _now()
            else:
                with self._lock:
                    job.document = document
                    job.progress = 1.0
                    job.state = STATE_DONE
                    job.finished_at = _now()
            with self._lock:
                self._evict_finished_locked()
