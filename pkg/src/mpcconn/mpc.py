"""Low-space MPC simulator with round, memory and work accounting.

Two layers live here.

* Machine level: ``Machine`` stores, ``alltoall`` routing with per-machine
  send/receive caps, and ``run_round`` which executes a local step on every
  machine in a caller-chosen order and then delivers messages.
* Collection level: the sort / filter / prefix-sum / predecessor / dedup /
  colored-sum primitives over numpy record arrays.  These run as a trusted
  global kernel; each call is charged a constant number of rounds and
  ``N log N`` word operations, and the words it touches are checked against
  the global budget.  ``local`` runs a record-wise map shard by shard.

All accounting is in machine words.
"""

from __future__ import annotations

import hashlib
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, GlobalCapacityError, ReceiveOverflow, SendOverflow

MIN_LOCAL_WORDS = 64


@dataclass(frozen=True)
class MpcConfig:
    """``local_words`` S = max(64, ceil(input_words ** delta)); the global budget is
    ``kappa_global * input_words`` and enough machines are provisioned to hold it."""

    delta: float = 0.5
    input_words: int = 1
    kappa_global: float = 8.0
    min_local: int = MIN_LOCAL_WORDS
    prim_rounds: int | None = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.input_words < 1:
            raise ValueError("input_words must be positive")
        if self.kappa_global < 1:
            raise ValueError("kappa_global must be >= 1")

    @property
    def local_words(self) -> int:
        return max(self.min_local, math.ceil(self.input_words ** self.delta - 1e-9))

    @property
    def global_words(self) -> int:
        return math.ceil(self.kappa_global * self.input_words)

    @property
    def machine_count(self) -> int:
        return max(1, math.ceil(self.global_words / self.local_words))

    @property
    def rounds_per_primitive(self) -> int:
        if self.prim_rounds is not None:
            return self.prim_rounds
        # a sample sort with S = N^delta needs about 1/delta routing rounds
        return math.ceil(1 / self.delta - 1e-9)


@dataclass
class Machine:
    id: int
    store: list = field(default_factory=list)
    peak_words: int = 0

    @property
    def words(self) -> int:
        return sum(len(block) for block in self.store)


@dataclass
class Metrics:
    rounds: int = 0
    peak_local: int = 0
    peak_global: int = 0
    total_ops: int = 0
    phases: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)

    def bump(self, key: str, amount: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + amount

    def high(self, key: str, value: int) -> None:
        self.counters[key] = max(self.counters.get(key, value), value)

    def to_dict(self) -> dict:
        out = {
            "rounds": self.rounds,
            "peak_local": self.peak_local,
            "peak_global": self.peak_global,
            "total_ops": self.total_ops,
        }
        for phase in sorted(self.phases):
            for key, val in sorted(self.phases[phase].items()):
                out[f"{phase}_{key}"] = val
        for key in sorted(self.counters):
            out[key] = self.counters[key]
        return out


class MachinePool:
    """Machines indexed 0..P-1, materialized on first use so that huge
    provisioned counts cost nothing until a machine holds data."""

    def __init__(self, count: int):
        self.count = count
        self._live: dict[int, Machine] = {}

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, mid: int) -> Machine:
        if not 0 <= mid < self.count:
            raise IndexError(f"no machine {mid}")
        m = self._live.get(mid)
        if m is None:
            m = self._live[mid] = Machine(mid)
        return m

    def __iter__(self):
        """Machines that have been touched, by id (the rest are empty)."""
        return iter([self._live[k] for k in sorted(self._live)])


def _nlogn(n: int) -> int:
    return n * max(1, math.ceil(math.log2(n + 1))) if n > 0 else 0


def _width(a: np.ndarray) -> int:
    return 1 if a.ndim == 1 else int(np.prod(a.shape[1:]))


def words_of(*arrays: np.ndarray) -> int:
    return sum(int(a.size) for a in arrays)


class Simulator:
    """Holds the machines, the budgets and the metrics of one run.

    ``schedule`` fixes the order in which machines execute their local steps;
    results must not depend on it.  With ``faithful=True`` record-wise local
    maps really run shard by shard in that order, and with
    ``record_states=True`` a digest of every machine's data is logged at each
    round boundary.
    """

    def __init__(self, config: MpcConfig, schedule: Sequence[int] | None = None,
                 faithful: bool = False, record_states: bool = False):
        self.config = config
        self.S = config.local_words
        self.P = config.machine_count
        self.global_cap = config.global_words
        self.machines = MachinePool(self.P)
        if schedule is not None and sorted(schedule) != list(range(self.P)):
            raise ValueError("schedule must be a permutation of the machine ids")
        self._schedule = list(schedule) if schedule is not None else None
        self.faithful = faithful
        self.record_states = record_states
        self.state_log: list[str] = []
        self.metrics = Metrics()
        self.resident: dict[str, int] = {}
        self._phase = "main"

    @property
    def schedule(self) -> Sequence[int]:
        return self._schedule if self._schedule is not None else range(self.P)

    # --- accounting ----------------------------------------------------
    @contextmanager
    def phase(self, name: str):
        prev, self._phase = self._phase, name
        try:
            yield
        finally:
            self._phase = prev

    def _phase_stats(self) -> dict:
        return self.metrics.phases.setdefault(self._phase, {"rounds": 0, "ops": 0})

    def charge(self, rounds: int = 0, ops: int = 0) -> None:
        if rounds < 0 or ops < 0:
            raise ValueError("charges are non-negative")
        self.metrics.rounds += rounds
        self.metrics.total_ops += ops
        st = self._phase_stats()
        st["rounds"] += rounds
        st["ops"] += ops

    def resident_words(self) -> int:
        return sum(self.resident.values())

    def hold(self, name: str, words: int) -> None:
        """Declare ``words`` of persistent distributed state under ``name``."""
        self.resident[name] = int(words)
        self.touch(0)

    def release(self, name: str) -> None:
        self.resident.pop(name, None)

    def touch(self, transient: int) -> None:
        """Check and record a moment where ``transient`` extra words are live."""
        total = self.resident_words() + int(transient)
        if total > self.global_cap:
            raise GlobalCapacityError(
                f"{total} words live exceeds global budget {self.global_cap} "
                f"(phase {self._phase})", words=total, capacity=self.global_cap)
        self.metrics.peak_global = max(self.metrics.peak_global, total)
        per_machine = -(-total // self.P)
        self.metrics.peak_local = max(self.metrics.peak_local, per_machine)

    def require_local(self, words: int, what: str = "local working set",
                      machine: int | None = None) -> None:
        """A single machine must hold ``words`` at once."""
        words = int(words)
        if words > self.S:
            raise CapacityError(f"{what} needs {words} words on one machine, capacity {self.S}",
                                machine=machine, words=words, capacity=self.S)
        self.metrics.peak_local = max(self.metrics.peak_local, words)

    def _primitive(self, ins: Iterable[np.ndarray], outs: Iterable[np.ndarray], ops: int,
                   extra_words: int = 0) -> None:
        ins, outs = list(ins), list(outs)
        self.touch(words_of(*ins) + words_of(*outs) + extra_words)
        self.charge(self.config.rounds_per_primitive, ops)
        self.metrics.bump("primitive_calls")
        if self.record_states:
            self._log_arrays(outs)

    def virtual_primitive(self, records: int, width: int = 1) -> None:
        """Charge a primitive over ``records`` rows of ``width`` words that the
        kernel computes without materializing them row by row."""
        words = int(records) * int(width)
        self.touch(2 * words)
        self.charge(self.config.rounds_per_primitive, _nlogn(int(records)))
        self.metrics.bump("primitive_calls")

    # --- state digests --------------------------------------------------
    def shard_bounds(self, n_records: int, width: int) -> list[tuple[int, int]]:
        per = max(1, self.S // max(1, width))
        bounds = [(lo, min(lo + per, n_records)) for lo in range(0, n_records, per)]
        if len(bounds) > self.P:
            raise GlobalCapacityError(f"{n_records} records of width {width} need "
                                      f"{len(bounds)} machines, have {self.P}")
        return bounds

    def _log_arrays(self, arrays: Sequence[np.ndarray]) -> None:
        h = hashlib.sha256()
        for a in arrays:
            a = np.ascontiguousarray(a)
            for mid, (lo, hi) in enumerate(self.shard_bounds(a.shape[0], _width(a))):
                h.update(f"{mid}:{lo}:{hi};".encode())
                h.update(a[lo:hi].tobytes())
        self.state_log.append(h.hexdigest())

    def _log_stores(self) -> None:
        h = hashlib.sha256()
        for m in self.machines:
            if m.store:
                h.update(f"{m.id}:{list(map(tuple, m.store))!r};".encode())
        self.state_log.append(h.hexdigest())

    # --- machine level ---------------------------------------------------
    def alltoall(self, outboxes: Mapping[int, Sequence[tuple[int, Sequence[int]]]],
                 kept: Mapping[int, list] | None = None) -> dict[int, list]:
        """Deliver addressed word blocks at the next round boundary.

        ``outboxes[src]`` lists ``(dst, block)``.  Machines named in ``kept``
        replace their store by that list before delivery; others keep theirs.
        Delivered blocks are appended ordered by source machine, then by send
        order, so the result does not depend on who executed first.
        """
        inbox: dict[int, list[tuple[int, int, tuple]]] = {}
        recv_words: dict[int, int] = {}
        for src in sorted(outboxes):
            if not 0 <= src < self.P:
                raise ValueError(f"no machine {src}")
            sent = 0
            for seq, (dst, block) in enumerate(outboxes[src]):
                if not 0 <= dst < self.P:
                    raise ValueError(f"no machine {dst}")
                block = tuple(int(w) for w in block)
                sent += len(block)
                recv_words[dst] = recv_words.get(dst, 0) + len(block)
                inbox.setdefault(dst, []).append((src, seq, block))
            if sent > self.S:
                raise SendOverflow(f"machine {src} sends {sent} words, capacity {self.S}",
                                   machine=src, words=sent, capacity=self.S)
        for dst, got in sorted(recv_words.items()):
            if got > self.S:
                raise ReceiveOverflow(f"machine {dst} receives {got} words, capacity {self.S}",
                                      machine=dst, words=got, capacity=self.S)
        delivered = {}
        total = 0
        for mid in sorted(set(inbox) | set(kept or ())):
            self.machines[mid]  # materialize every receiver
        for m in self.machines:
            base = list(kept[m.id]) if kept is not None and m.id in kept else list(m.store)
            blocks = [b for _, _, b in sorted(inbox.get(m.id, []), key=lambda t: (t[0], t[1]))]
            store = base + blocks
            words = sum(len(b) for b in store)
            if words > self.S:
                raise ReceiveOverflow(f"machine {m.id} would hold {words} words, capacity {self.S}",
                                      machine=m.id, words=words, capacity=self.S)
            m.store = store
            m.peak_words = max(m.peak_words, words)
            delivered[m.id] = blocks
            total += words
        self.metrics.peak_local = max([self.metrics.peak_local] + [m.peak_words for m in self.machines])
        self.resident["machine_stores"] = total
        self.touch(0)
        self.charge(rounds=1, ops=sum(recv_words.values()))
        if self.record_states:
            self._log_stores()
        return delivered

    def run_round(self, step: Callable[[int, tuple], tuple[list, list]]) -> dict[int, list]:
        """One synchronous round: ``step(machine_id, store)`` returns
        ``(kept_blocks, outbox)`` for every machine, executed in schedule order."""
        kept, outboxes = {}, {}
        for mid in self.schedule:
            keep, out = step(mid, tuple(self.machines[mid].store))
            kept[mid], outboxes[mid] = list(keep), list(out)
        return self.alltoall(outboxes, kept)

    def load(self, blocks: Sequence[Sequence[int]]) -> None:
        """Place blocks on machines in order, filling each up to S words."""
        for m in self.machines:
            m.store = []
        mid, used = 0, 0
        for block in blocks:
            block = tuple(int(w) for w in block)
            if len(block) > self.S:
                raise CapacityError(f"block of {len(block)} words exceeds capacity {self.S}",
                                    words=len(block), capacity=self.S)
            if used + len(block) > self.S:
                mid, used = mid + 1, 0
                if mid >= self.P:
                    raise GlobalCapacityError("input does not fit on the machines")
            self.machines[mid].store.append(block)
            used += len(block)
        for m in self.machines:
            m.peak_words = max(m.peak_words, m.words)
        total = sum(m.words for m in self.machines)
        self.resident["machine_stores"] = total
        self.touch(0)

    # --- record-wise local computation ------------------------------------
    def local(self, fn: Callable[..., tuple], *arrays: np.ndarray, ops_per_record: int = 1):
        """Apply a record-wise ``fn`` to sharded arrays (all the same length).

        ``fn`` gets aligned slices and returns a tuple of arrays.  Costs no
        rounds; work is charged per record.
        """
        n = arrays[0].shape[0]
        assert all(a.shape[0] == n for a in arrays)
        width = sum(_width(a) for a in arrays)
        if not self.faithful:
            outs = fn(*arrays)
        else:
            bounds = self.shard_bounds(n, width)
            results = {}
            order = self._schedule if self._schedule is not None else range(len(bounds))
            for mid in order:
                if mid < len(bounds):
                    lo, hi = bounds[mid]
                    results[mid] = fn(*(a[lo:hi] for a in arrays))
            if not bounds:
                outs = fn(*arrays)
            else:
                parts = [results[mid] for mid in range(len(bounds))]
                outs = tuple(np.concatenate([p[i] for p in parts]) for i in range(len(parts[0])))
        self.touch(words_of(*arrays) + words_of(*outs))
        self.charge(0, n * ops_per_record)
        if self.record_states:
            self._log_arrays(list(outs))
        return outs

    # --- collection primitives ----------------------------------------------
    def sort(self, records: np.ndarray, keys: Sequence[int] | None = None) -> np.ndarray:
        """Stable sort of rows by the given key columns (all columns by default)."""
        records = np.asarray(records)
        n = records.shape[0]
        if records.ndim == 1:
            order = np.argsort(records, kind="stable")
        else:
            cols = list(range(records.shape[1])) if keys is None else list(keys)
            order = np.lexsort(tuple(records[:, c] for c in reversed(cols)))
        out = records[order]
        self._primitive([records], [out], _nlogn(n))
        return out

    def argsort(self, keys: np.ndarray) -> np.ndarray:
        """Permutation sorting rows of ``keys`` (stable, first column major)."""
        keys = np.asarray(keys)
        order = (np.argsort(keys, kind="stable") if keys.ndim == 1
                 else np.lexsort(tuple(keys[:, c] for c in reversed(range(keys.shape[1])))))
        self._primitive([keys], [order], _nlogn(keys.shape[0]))
        return order

    def filter(self, records: np.ndarray, mask: np.ndarray) -> np.ndarray:
        out = np.asarray(records)[np.asarray(mask, dtype=bool)]
        self._primitive([records], [out], int(records.shape[0]))
        return out

    def prefix_sum(self, values: np.ndarray) -> np.ndarray:
        """Exclusive prefix sums in input order."""
        values = np.asarray(values, dtype=np.int64)
        out = np.zeros_like(values)
        if values.size:
            np.cumsum(values[:-1], out=out[1:])
        self._primitive([values], [out], int(values.shape[0]))
        return out

    def colored_sum(self, colors: np.ndarray, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per distinct color c, the sum of the x's carrying it (colors ascending)."""
        colors = np.asarray(colors, dtype=np.int64)
        xs = np.asarray(xs, dtype=np.int64)
        uniq, inv = np.unique(colors, return_inverse=True)
        sums = np.zeros(uniq.shape[0], dtype=np.int64)
        np.add.at(sums, inv.ravel(), xs)
        self._primitive([colors, xs], [uniq, sums], _nlogn(colors.shape[0]))
        return uniq, sums

    def dedup(self, records: np.ndarray) -> np.ndarray:
        """Distinct rows, returned sorted."""
        records = np.asarray(records)
        out = np.unique(records) if records.ndim == 1 else np.unique(records, axis=0)
        if records.ndim > 1 and records.shape[0] == 0:
            out = records.copy()
        self._primitive([records], [out], _nlogn(records.shape[0]))
        return out

    def predecessor(self, sorted_keys: np.ndarray, probes: np.ndarray) -> np.ndarray:
        """Index of the last key <= probe, or -1 when no key qualifies."""
        sorted_keys = np.asarray(sorted_keys)
        probes = np.asarray(probes)
        out = np.searchsorted(sorted_keys, probes, side="right").astype(np.int64) - 1
        self._primitive([sorted_keys, probes], [out],
                        _nlogn(sorted_keys.shape[0] + probes.shape[0]))
        return out

    def segmented(self, ins: Sequence[np.ndarray], outs: Sequence[np.ndarray]) -> None:
        """Charge one fused segmented scan over rows already grouped by key
        (per-group ranks, counts, firsts and flags computed in one pass)."""
        n = max((int(a.shape[0]) for a in ins), default=0)
        self._primitive(ins, outs, n)

    # --- composites built from the primitives above ------------------------
    def lookup(self, table_keys: np.ndarray, table_vals: np.ndarray, probes: np.ndarray,
               default: int = -1, table_sorted: bool = False) -> np.ndarray:
        """Join ``probes`` against a key -> value table (sort + predecessor).

        ``table_vals`` may have several columns.  A table already sorted by
        key skips the sort.
        """
        table_keys = np.asarray(table_keys, dtype=np.int64)
        table_vals = np.asarray(table_vals, dtype=np.int64)
        probes = np.asarray(probes, dtype=np.int64)
        if table_sorted:
            keys, vals = table_keys, table_vals
        else:
            order = self.argsort(table_keys)
            keys, vals = table_keys[order], table_vals[order]
        idx = self.predecessor(keys, probes)
        if keys.size:
            hit = (idx >= 0) & (keys[np.maximum(idx, 0)] == probes)
        else:
            hit = np.zeros(probes.shape[0], dtype=bool)
        out = np.full((probes.shape[0],) + vals.shape[1:], default, dtype=np.int64)
        out[hit] = vals[idx[hit]]
        return out

    def group_rank(self, group_keys: np.ndarray) -> np.ndarray:
        """Position of each row within its run of equal keys (input must be
        grouped); a prefix sum over group starts."""
        g = np.asarray(group_keys)
        n = g.shape[0]
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        starts = np.ones(n, dtype=np.int64)
        starts[1:] = (g[1:] != g[:-1]).astype(np.int64)
        idx = np.arange(n, dtype=np.int64)
        first = np.maximum.accumulate(np.where(starts == 1, idx, 0))
        self._primitive([g], [first], n)
        return idx - first

    def aggregate_seeds(self, seeds: int) -> int:
        """Sum one counter per seed over all machines (a colored sum keyed by
        seed).  Every machine holds one counter per seed of the current pass
        and seeds beyond what fits run in further passes.  The search is
        charged as one primitive whatever the pass count, which is recorded
        and returned."""
        if seeds <= 0:
            return 0
        free = max(self.P, self.global_cap - self.resident_words())
        per_pass = max(1, min(self.S, free // self.P, seeds))
        passes = -(-seeds // per_pass)
        self.touch(self.P * per_pass)
        self.charge(self.config.rounds_per_primitive, self.P * seeds)
        self.metrics.bump("seed_aggregations")
        self.metrics.bump("seed_passes", passes)
        return passes
