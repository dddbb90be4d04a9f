"""Durable experiment state for the annotation service.

Each experiment is a directory under the data root: ``meta.json`` (items
and config, written once) plus ``votes.jsonl``, an append-only log that is
fsynced before a vote is acknowledged. In-memory state is always
reconstructible by replaying the log onto a fresh prior-initialized
matrix, which is exactly what loading does after a restart.

Vote application is serialized through one lock per experiment; batch and
estimate reads return snapshots built under the same lock. Distinct
experiments are independent.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .bt import ComparisonMatrix, FitOptions, ScoreEstimate, fit_bt
from .information import DEFAULT_QUADRATURE_ORDER, gh_nodes_weights, utility_graph
from .matrix_io import format_matrix_csv
from .sampling import SamplerState, next_batch
from .validation import check_pair


class ExperimentNotFound(KeyError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    """Service-wide settings; per-experiment overrides come in at create time."""

    data_dir: Path
    quad_order: int = DEFAULT_QUADRATURE_ORDER
    refit_staleness_s: float = 60.0
    allow_free_votes: bool = True
    prior_count: int = 1

    @classmethod
    def from_sources(cls, config_path=None, env=None, overrides: dict | None = None) -> "ServiceConfig":
        """Build from an optional JSON file, environment, and overrides.

        Precedence: overrides > environment > config file. Recognized keys
        / variables: data_dir (PAIRRANK_DATA_DIR), quad_order
        (PAIRRANK_QUAD_ORDER), refit_staleness_s (PAIRRANK_STALENESS_S),
        allow_free_votes (PAIRRANK_FREE_VOTES).
        """
        env = dict(os.environ if env is None else env)
        data: dict = {}
        if config_path is not None:
            data.update(json.loads(Path(config_path).read_text()))
        if "PAIRRANK_DATA_DIR" in env:
            data["data_dir"] = env["PAIRRANK_DATA_DIR"]
        if "PAIRRANK_QUAD_ORDER" in env:
            data["quad_order"] = int(env["PAIRRANK_QUAD_ORDER"])
        if "PAIRRANK_STALENESS_S" in env:
            data["refit_staleness_s"] = float(env["PAIRRANK_STALENESS_S"])
        if "PAIRRANK_FREE_VOTES" in env:
            data["allow_free_votes"] = env["PAIRRANK_FREE_VOTES"].lower() in ("1", "true", "yes")
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        if "data_dir" not in data:
            raise ValueError("data_dir is required (config file, PAIRRANK_DATA_DIR, or flag)")
        data["data_dir"] = Path(data["data_dir"])
        return cls(**data)


@dataclass(frozen=True)
class VoteRecord:
    """One acknowledged vote in canonical orientation (pair i < j)."""

    pair: tuple[int, int]
    outcome: int
    annotator: str
    timestamp: str

    def to_json_line(self) -> str:
        return json.dumps(
            {"pair": list(self.pair), "y": self.outcome, "annotator": self.annotator, "ts": self.timestamp},
            separators=(",", ":"),
        )

    @classmethod
    def from_json_obj(cls, obj: dict) -> "VoteRecord":
        i, j = obj["pair"]
        return cls(pair=(int(i), int(j)), outcome=int(obj["y"]), annotator=str(obj.get("annotator", "")), timestamp=str(obj.get("ts", "")))


def canonical_vote(i: int, j: int, y: int, n: int) -> tuple[tuple[int, int], int]:
    """Map a vote on an ordered pair onto the canonical (min, max) pair."""
    i, j = check_pair(i, j, n)
    if y not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {y!r}")
    if i < j:
        return (i, j), y
    return (j, i), 1 - y


class Experiment:
    """Mutable per-experiment state; all mutation happens under ``lock``."""

    def __init__(self, exp_id: str, items: list[str], config: ServiceConfig):
        self.id = exp_id
        self.items = list(items)
        self.config = config
        self.lock = threading.RLock()
        self.matrix = ComparisonMatrix.empty(len(items), prior_count=config.prior_count)
        self.vote_log: list[VoteRecord] = []
        self.outstanding: Counter = Counter()
        self.quad = gh_nodes_weights(config.quad_order)
        self.fit_options = FitOptions()
        self.estimate: ScoreEstimate = fit_bt(self.matrix, self.fit_options)
        self.batch: list[tuple[int, int]] = []
        self.batch_assignments: Counter = Counter()
        self.batch_voted: set[tuple[int, int]] = set()
        self.last_refit = time.monotonic()
        self._log_handle = None
        self._dir: Path | None = None
        self._refresh_batch()

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def standard_trial_votes(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def observed_total(self) -> int:
        return self.matrix.observed_total()

    @property
    def mode(self) -> str:
        return "GM" if self.observed_total <= self.standard_trial_votes else "MST"

    def _refresh_batch(self) -> None:
        graph = utility_graph(self.estimate, self.quad)
        state = SamplerState(self.n, self.observed_total)
        self.batch = list(next_batch(graph, state))
        self.batch_mode = self.mode
        self.batch_assignments = Counter()
        self.batch_voted = set()

    def refit(self) -> None:
        self.estimate = fit_bt(self.matrix, self.fit_options, initial_scores=self.estimate.scores)
        self.last_refit = time.monotonic()
        self._refresh_batch()
        if self._dir is not None:
            (self._dir / "snapshot.json").write_text(json.dumps(self.estimate_snapshot(), indent=2))

    def _maybe_refit_stale(self) -> None:
        if self.mode == "MST" and time.monotonic() - self.last_refit > self.config.refit_staleness_s:
            self.refit()

    def assign_pairs(self, annotator: str, max_pairs: int = 1) -> list[tuple[int, int]]:
        """Hand out up to ``max_pairs`` edges of the current batch.

        Unassigned edges go out first, in tree order; once every edge is
        assigned but votes are still pending, edges are re-issued to the
        least-assigned first (repeat votes on a pair are valid data).
        """
        with self.lock:
            self._maybe_refit_stale()
            if max_pairs < 1:
                raise ValueError("max_pairs must be at least 1")
            assigned: list[tuple[int, int]] = []
            for pair in self.batch:
                if len(assigned) >= max_pairs:
                    break
                if self.batch_assignments[pair] == 0:
                    assigned.append(pair)
            while len(assigned) < max_pairs and len(assigned) < len(self.batch):
                remaining = [p for p in self.batch if p not in assigned]
                remaining.sort(key=lambda p: (self.batch_assignments[p], p))
                assigned.append(remaining[0])
            for pair in assigned:
                self.batch_assignments[pair] += 1
                self.outstanding[pair] += 1
            return assigned

    def apply_vote(self, i: int, j: int, y: int, annotator: str, timestamp: str | None = None) -> dict:
        """Validate, persist, and apply one vote; returns the acknowledgement."""
        pair, outcome = canonical_vote(i, j, y, self.n)
        with self.lock:
            if not self.config.allow_free_votes and self.outstanding[pair] <= 0:
                raise ValueError(
                    f"pair {pair} was not assigned and free voting is disabled"
                )
            ts = timestamp or datetime.now(timezone.utc).isoformat()
            record = VoteRecord(pair=pair, outcome=outcome, annotator=annotator, timestamp=ts)
            self._append_to_log(record)
            self.vote_log.append(record)
            self.matrix = self.matrix.with_vote(pair[0], pair[1], outcome)
            if self.outstanding[pair] > 0:
                self.outstanding[pair] -= 1
            self.batch_voted.add(pair)

            refitted = False
            if self.mode == "GM" or self.batch_mode != self.mode:
                # every vote in GM mode; also the vote that crosses the
                # GM->MST threshold, so the first tree batch appears
                self.refit()
                refitted = True
            else:
                batch_done = all(p in self.batch_voted for p in self.batch)
                stale = time.monotonic() - self.last_refit > self.config.refit_staleness_s
                if batch_done or stale:
                    self.refit()
                    refitted = True
            return {
                "experiment": self.id,
                "pair": list(pair),
                "y": outcome,
                "observed_total": self.observed_total,
                "mode": self.mode,
                "refitted": refitted,
            }

    def estimate_snapshot(self) -> dict:
        with self.lock:
            est = self.estimate
            order = sorted(range(self.n), key=lambda k: (-est.scores[k], k))
            return {
                "experiment": self.id,
                "items": list(self.items),
                "scores": [float(v) for v in est.scores],
                "stderr": [float(v) for v in est.standard_errors()],
                "ranking": order,
                "mode": self.mode,
                "observed_total": self.observed_total,
            }

    def export_csv(self) -> str:
        with self.lock:
            return format_matrix_csv(self.items, self.matrix)

    # --- persistence ---

    def directory(self, root: Path) -> Path:
        return Path(root) / self.id

    def open_log(self, root: Path) -> None:
        self._dir = self.directory(root)
        self._log_handle = open(self._dir / "votes.jsonl", "a", encoding="utf-8")

    def _append_to_log(self, record: VoteRecord) -> None:
        if self._log_handle is None:
            raise RuntimeError("vote log is not open")
        self._log_handle.write(record.to_json_line() + "\n")
        self._log_handle.flush()
        os.fsync(self._log_handle.fileno())

    def write_snapshot(self, root: Path) -> None:
        snap = self.estimate_snapshot()
        (self.directory(root) / "snapshot.json").write_text(json.dumps(snap, indent=2))

    def close(self) -> None:
        if self._log_handle is not None:
            self._log_handle.close()
            self._log_handle = None


class ExperimentStore:
    """Creates, caches, and reloads experiments under one data directory."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.root = Path(config.data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self._experiments: dict[str, Experiment] = {}
        self._lock = threading.Lock()
        for meta_path in sorted(self.root.glob("*/meta.json")):
            self._load(meta_path.parent.name)

    def create(self, items: list[str], overrides: dict | None = None) -> Experiment:
        items = [str(item) for item in items]
        if len(items) < 2:
            raise ValueError("an experiment needs at least two items")
        if len(set(items)) != len(items):
            raise ValueError("item labels must be distinct")
        config = self._merged_config(overrides)
        exp_id = uuid.uuid4().hex[:12]
        directory = self.root / exp_id
        directory.mkdir(parents=True)
        meta = {
            "id": exp_id,
            "items": items,
            "config": {
                "quad_order": config.quad_order,
                "refit_staleness_s": config.refit_staleness_s,
                "allow_free_votes": config.allow_free_votes,
                "prior_count": config.prior_count,
            },
        }
        meta_path = directory / "meta.json"
        meta_path.write_text(json.dumps(meta, indent=2))
        (directory / "votes.jsonl").touch()
        experiment = Experiment(exp_id, items, config)
        experiment.open_log(self.root)
        experiment.write_snapshot(self.root)
        with self._lock:
            self._experiments[exp_id] = experiment
        return experiment

    def _merged_config(self, overrides: dict | None) -> ServiceConfig:
        if not overrides:
            return self.config
        allowed = {"quad_order", "refit_staleness_s", "allow_free_votes", "prior_count"}
        unknown = set(overrides) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged = {
            "data_dir": self.config.data_dir,
            "quad_order": self.config.quad_order,
            "refit_staleness_s": self.config.refit_staleness_s,
            "allow_free_votes": self.config.allow_free_votes,
            "prior_count": self.config.prior_count,
        }
        merged.update(overrides)
        return ServiceConfig(**merged)

    def get(self, exp_id: str) -> Experiment:
        with self._lock:
            if exp_id in self._experiments:
                return self._experiments[exp_id]
        if (self.root / exp_id / "meta.json").exists():
            return self._load(exp_id)
        raise ExperimentNotFound(exp_id)

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._experiments)

    def _load(self, exp_id: str) -> Experiment:
        """Rebuild an experiment by replaying its vote log."""
        directory = self.root / exp_id
        meta = json.loads((directory / "meta.json").read_text())
        config = self._merged_config(meta.get("config"))
        experiment = Experiment(exp_id, meta["items"], config)

        records = []
        log_path = directory / "votes.jsonl"
        if log_path.exists():
            lines = log_path.read_text().splitlines()
            for k, line in enumerate(lines):
                if not line.strip():
                    continue
                try:
                    records.append(VoteRecord.from_json_obj(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError) as exc:
                    if k == len(lines) - 1:
                        # torn final line from a crash mid-append: the vote
                        # was never acknowledged, drop it
                        break
                    raise RuntimeError(f"{log_path}: corrupt vote log at line {k + 1}") from exc
        matrix = experiment.matrix
        for record in records:
            matrix = matrix.with_vote(record.pair[0], record.pair[1], record.outcome)
        experiment.matrix = matrix
        experiment.vote_log = records
        experiment.estimate = fit_bt(matrix, experiment.fit_options)
        experiment.last_refit = time.monotonic()
        experiment._refresh_batch()
        experiment.open_log(self.root)
        with self._lock:
            self._experiments[exp_id] = experiment
        return experiment

    def close(self) -> None:
        with self._lock:
            for experiment in self._experiments.values():
                experiment.close()
            self._experiments.clear()
