"""Round-synchronous Congested Clique engine with a communication ledger.

Two kinds of communication are accounted separately:

* direct rounds (:meth:`Clique.exchange`): at most one word per ordered
  pair of processors; a round elapses even if nobody sends anything.
* routed batches (:meth:`Clique.route`, :meth:`Clique.sort_many`): any
  batch in which every processor is the source and the destination of at
  most ``c_route * n`` words.  The delivery protocol itself is not
  simulated; one invocation is billed as ``rounds_per_route`` rounds on a
  separate counter.

A word is a tuple of at most three integers (two ids and a key reference).
Messages a processor sends to itself are local and are not accounted.
"""
from __future__ import annotations

import csv
import io
import logging
import os
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, NamedTuple, Sequence

log = logging.getLogger("clique_mst")
if os.environ.get("CLIQUE_MST_LOG"):
    logging.basicConfig(level=os.environ["CLIQUE_MST_LOG"].upper())

WORD_SIZE = 3

Message = tuple[int, int, tuple]  # (source, destination, word)


class SimulationError(RuntimeError):
    pass


class ProtocolViolation(SimulationError):
    def __init__(self, round_no: int, processor: int, detail: str):
        super().__init__(f"protocol violation in round {round_no} at processor {processor}: {detail}")
        self.round = round_no
        self.processor = processor


class CapacityError(SimulationError):
    def __init__(self, round_no: int, processor: int, role: str, count: int, cap: int):
        super().__init__(
            f"routing capacity exceeded in round {round_no}: processor {processor} is {role} "
            f"of {count} words (cap {cap})"
        )
        self.round = round_no
        self.processor = processor
        self.role = role
        self.count = count
        self.cap = cap


class NonTermination(SimulationError):
    pass


class AccountingError(SimulationError):
    pass


class InfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class Constants:
    c_route: int = 4
    c_sort: int = 4
    c_part: int = 4
    c_gather: int = 4
    rounds_per_route: int = 1

    def override(self, **kw) -> Constants:
        return Constants(**{**self.__dict__, **{k: v for k, v in kw.items() if v is not None}})


class StepRecord(NamedTuple):
    index: int
    kind: str  # "direct" or "route"
    label: str
    sent: dict[int, int]
    recv: dict[int, int]


@dataclass
class CommunicationLedger:
    n: int
    rounds_per_route: int = 1
    steps: list[StepRecord] = field(default_factory=list)

    @property
    def direct_rounds(self) -> int:
        return sum(1 for s in self.steps if s.kind == "direct")

    @property
    def routing_invocations(self) -> int:
        return sum(1 for s in self.steps if s.kind == "route")

    @property
    def routing_rounds(self) -> int:
        return self.routing_invocations * self.rounds_per_route

    def _words(self, kind: str) -> int:
        return sum(sum(s.sent.values()) for s in self.steps if s.kind == kind)

    @property
    def direct_words(self) -> int:
        return self._words("direct")

    @property
    def routed_words(self) -> int:
        return self._words("route")

    @property
    def total_words(self) -> int:
        return self.direct_words + self.routed_words

    @property
    def max_processor_words(self) -> int:
        """Largest number of words one processor sent or received in one step."""
        best = 0
        for s in self.steps:
            if s.sent:
                best = max(best, max(s.sent.values()))
            if s.recv:
                best = max(best, max(s.recv.values()))
        return best

    def records(self) -> list[tuple[int, int, int, int, int, int]]:
        """Flat rows ``(round, processor, direct_sent, direct_recv, routed_sent, routed_recv)``."""
        rows = []
        for s in self.steps:
            for p in sorted(set(s.sent) | set(s.recv)):
                a, b = s.sent.get(p, 0), s.recv.get(p, 0)
                if s.kind == "direct":
                    rows.append((s.index, p, a, b, 0, 0))
                else:
                    rows.append((s.index, p, 0, 0, a, b))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "processor", "direct_sent", "direct_recv", "routed_sent", "routed_recv"])
        w.writerows(self.records())
        return buf.getvalue()

    def summary(self) -> dict[str, int]:
        return {
            "direct_rounds": self.direct_rounds,
            "routing_invocations": self.routing_invocations,
            "routing_rounds": self.routing_rounds,
            "direct_words": self.direct_words,
            "routed_words": self.routed_words,
            "total_words": self.total_words,
            "max_processor_words": self.max_processor_words,
        }

    def transcript(self) -> list[tuple]:
        return [(s.index, s.kind, s.label, sorted(s.sent.items()), sorted(s.recv.items())) for s in self.steps]


Inboxes = dict[int, list[tuple[int, tuple]]]


class Step(NamedTuple):
    """What a :class:`NodeProgram` emits in one round."""
    outbox: Sequence[tuple[int, tuple]] = ()
    routed: Sequence[tuple[int, tuple]] = ()
    halt: bool = False


class NodeProgram:
    """Per-processor state machine.  ``step`` must depend only on ``state`` and the inbox."""

    def __init__(self, pid: int, state: Any = None):
        self.pid = pid
        self.state = state

    def step(self, round_no: int, inbox: list[tuple[int, tuple]]) -> Step:
        raise NotImplementedError


class Clique:
    def __init__(self, n: int, constants: Constants | None = None, round_limit: int | None = None):
        if n < 1:
            raise ValueError("a clique needs at least one processor")
        self.n = n
        self.constants = constants or Constants()
        self.round_limit = round_limit
        self.ledger = CommunicationLedger(n, self.constants.rounds_per_route)

    def _tick(self):
        if self.round_limit is None:
            return
        used = self.ledger.direct_rounds + self.ledger.routing_rounds
        if used > self.round_limit:
            raise NonTermination(f"round limit {self.round_limit} exceeded ({used} rounds used)")

    @property
    def cap(self) -> int:
        return self.constants.c_route * self.n

    def _check_word(self, src: int, word: tuple):
        if len(word) > WORD_SIZE:
            raise ProtocolViolation(len(self.ledger.steps), src, f"word {word!r} exceeds {WORD_SIZE} fields")

    def _check_proc(self, p: int):
        if not 0 <= p < self.n:
            raise ProtocolViolation(len(self.ledger.steps), p, "no such processor")

    def exchange(self, messages: Iterable[Message], label: str = "") -> Inboxes:
        """One direct round."""
        idx = len(self.ledger.steps)
        round_no = self.ledger.direct_rounds
        inbox: Inboxes = defaultdict(list)
        pairs = set()
        sent: Counter = Counter()
        recv: Counter = Counter()
        n = self.n
        for src, dst, word in messages:
            if not (0 <= src < n and 0 <= dst < n):
                self._check_proc(src)
                self._check_proc(dst)
            if len(word) > WORD_SIZE:
                self._check_word(src, word)
            if src != dst:
                if (src, dst) in pairs:
                    raise ProtocolViolation(round_no, src, f"second direct message to {dst} in one round")
                pairs.add((src, dst))
                sent[src] += 1
                recv[dst] += 1
            inbox[dst].append((src, word))
        self.ledger.steps.append(StepRecord(idx, "direct", label, dict(sent), dict(recv)))
        self._tick()
        log.debug("direct round %d (%s): %d words", round_no, label, sum(sent.values()))
        return inbox

    def route(self, messages: Iterable[Message], label: str = "") -> Inboxes:
        """One routing invocation; an empty batch costs nothing."""
        idx = len(self.ledger.steps)
        inbox: Inboxes = defaultdict(list)
        sent: Counter = Counter()
        recv: Counter = Counter()
        n = self.n
        for src, dst, word in messages:
            if not (0 <= src < n and 0 <= dst < n):
                self._check_proc(src)
                self._check_proc(dst)
            if len(word) > WORD_SIZE:
                self._check_word(src, word)
            if src != dst:
                sent[src] += 1
                recv[dst] += 1
            inbox[dst].append((src, word))
        self._check_caps(idx, sent, recv)
        if sent:
            self.ledger.steps.append(StepRecord(idx, "route", label, dict(sent), dict(recv)))
            self._tick()
            log.debug("route %d (%s): %d words", idx, label, sum(sent.values()))
        return inbox

    def _check_caps(self, idx: int, sent: Counter, recv: Counter):
        cap = self.cap
        for p in sorted(sent):
            if sent[p] > cap:
                raise CapacityError(idx, p, "source", sent[p], cap)
        for p in sorted(recv):
            if recv[p] > cap:
                raise CapacityError(idx, p, "destination", recv[p], cap)

    def sort_many(
        self,
        jobs: Sequence[tuple[Sequence[int], dict[int, list[tuple[Any, Any]]]]],
        label: str = "sort",
        align: int = 1,
    ) -> list[tuple[dict[int, list[tuple[Any, Any]]], dict[int, int]]]:
        """Sort several record sets at once, each across its own processor group.

        Each job is ``(group, holdings)`` with ``holdings[p]`` the ``(key, record)``
        pairs processor ``p`` holds.  A job's ``T`` records end up on
        ``group[r // ceil(T / len(group))]`` by global rank ``r``.  Returns, per
        job, the new holdings and the first rank held by each processor.
        Chunk lengths are rounded up to a multiple of ``align``, so runs
        of ``align`` consecutive ranks never straddle two processors.  All
        jobs share one routing invocation.
        """
        idx = len(self.ledger.steps)
        messages = []
        results = []
        for group, holdings in jobs:
            for p in sorted(holdings):
                if len(holdings[p]) > self.cap:
                    raise CapacityError(idx, p, "holder", len(holdings[p]), self.cap)
            flat = sorted(
                ((key, p, rec) for p in sorted(holdings) for key, rec in holdings[p]),
                key=lambda t: t[0],
            )
            total = len(flat)
            chunk = -(-total // len(group)) if total else 1
            chunk = -(-chunk // align) * align
            out: dict[int, list] = defaultdict(list)
            start: dict[int, int] = {}
            for r, (key, p, rec) in enumerate(flat):
                dst = group[r // chunk]
                start.setdefault(dst, r)
                out[dst].append((key, rec))
                messages.append((p, dst, ()))
            results.append((dict(out), start))
        self.route(messages, label)
        return results

    def sort(self, holdings: dict[int, list[tuple[Any, Any]]], group: Sequence[int] | None = None, label: str = "sort"):
        group = list(range(self.n)) if group is None else list(group)
        return self.sort_many([(group, holdings)], label)[0]

    def run(self, programs: Sequence[NodeProgram], limit: int = 1000, workers: int | None = None):
        """Execute node programs in lock step until all halt.

        Direct messages emitted in round ``r`` and routed requests emitted in
        round ``r`` are both delivered to the inboxes of round ``r + 1``.
        Returns ``(states, ledger)``.
        """
        if len(programs) != self.n:
            raise ValueError(f"need {self.n} programs, got {len(programs)}")
        active = [True] * self.n
        inbox: Inboxes = defaultdict(list)
        pool = ThreadPoolExecutor(workers) if workers else None
        try:
            for r in range(limit):
                live = [i for i in range(self.n) if active[i]]

                def call(i):
                    return programs[i].step(r, sorted(inbox.get(i, ())))

                steps = list(pool.map(call, live)) if pool else [call(i) for i in live]
                direct = [(i, dst, w) for i, s in zip(live, steps) for dst, w in s.outbox]
                routed = [(i, dst, w) for i, s in zip(live, steps) for dst, w in s.routed]
                nxt = self.exchange(direct, label=f"run:{r}")
                if routed:
                    for dst, items in self.route(routed, label=f"run:{r}:route").items():
                        nxt[dst].extend(items)
                for i, s in zip(live, steps):
                    if s.halt:
                        active[i] = False
                inbox = nxt
                if not any(active):
                    return [p.state for p in programs], self.ledger
        finally:
            if pool:
                pool.shutdown()
        raise NonTermination(f"programs still running after {limit} rounds")


def prefix_assign(sizes: Sequence[int], capacity: int, offset: int = 0) -> list[int]:
    """Map set ``p`` to coordinator ``floor((offset + exclusive_prefix(p)) / capacity)``.

    Every coordinator then receives fewer than ``2 * capacity`` items.
    """
    if capacity < 1:
        raise InfeasibleError("capacity must be positive")
    out = []
    acc = offset
    for i, s in enumerate(sizes):
        if s > capacity:
            raise InfeasibleError(f"set {i} has size {s} > capacity {capacity}")
        out.append(acc // capacity)
        acc += s
    return out


@dataclass
class CoordinatorJob:
    """Input to :func:`assign_coordinators` for one independent instance.

    ``reports`` lists ``(holder, key_rank, count)`` with ranks in
    ``[0, universe)``; keys are ordered by rank.
    """
    group: Sequence[int]
    universe: int
    reports: list[tuple[int, int, int]]


def assign_coordinators(net: Clique, jobs: Sequence[CoordinatorJob], label: str = "assign") -> list[dict[int, int]]:
    """Prefix-sum coordinator assignment, all jobs in parallel.

    Holders report per-set counts to aggregators owning contiguous rank
    ranges; aggregators send ``(total, max)`` to the job planner
    (``group[0]``); the planner returns exclusive offsets and the capacity
    ``K = max(n, max set, ceil(total / |group|))``; aggregators resolve each
    set with :func:`prefix_assign` and answer the holders.  Four routing
    invocations.  Returns, per job, ``key_rank -> coordinator``.
    """
    # 1. holders -> aggregators
    msgs = []
    for j, job in enumerate(jobs):
        g = len(job.group)
        for holder, rank, count in job.reports:
            msgs.append((holder, job.group[rank * g // job.universe], (j, rank, count)))
    inbox = net.route(msgs, f"{label}:report")

    per_agg: dict[tuple[int, int], dict[int, int]] = defaultdict(lambda: defaultdict(int))
    askers: dict[tuple[int, int], dict[int, list[int]]] = defaultdict(lambda: defaultdict(list))
    for agg in sorted(inbox):
        for src, (j, rank, count) in inbox[agg]:
            per_agg[(j, agg)][rank] += count
            askers[(j, agg)][rank].append(src)

    # 2. aggregators -> planner
    msgs = []
    for (j, agg), sets in sorted(per_agg.items()):
        msgs.append((agg, jobs[j].group[0], (j, sum(sets.values()), max(sets.values()))))
    inbox = net.route(msgs, f"{label}:totals")

    # 3. planner -> aggregators: offsets in group order of aggregator ranges
    msgs = []
    for j, job in enumerate(jobs):
        planner = job.group[0]
        rows = sorted((src, tot, mx) for src, (jj, tot, mx) in inbox.get(planner, ()) if jj == j)
        if not rows:
            continue
        order = {p: i for i, p in enumerate(job.group)}
        rows.sort(key=lambda r: order[r[0]])
        total = sum(r[1] for r in rows)
        cap = max(net.n, max(r[2] for r in rows), -(-total // len(job.group)))
        acc = 0
        for src, tot, _ in rows:
            msgs.append((planner, src, (j, acc, cap)))
            acc += tot
    inbox = net.route(msgs, f"{label}:offsets")

    # 4. aggregators resolve and answer holders
    result: list[dict[int, int]] = [dict() for _ in jobs]
    msgs = []
    for agg in sorted(inbox):
        for _, (j, offset, cap) in inbox[agg]:
            sets = per_agg[(j, agg)]
            ranks = sorted(sets)
            coords = prefix_assign([sets[r] for r in ranks], cap, offset)
            for r, c in zip(ranks, coords):
                result[j][r] = jobs[j].group[c]
                for holder in askers[(j, agg)][r]:
                    msgs.append((agg, holder, (j, r, c)))
    net.route(msgs, f"{label}:answer")
    return result
