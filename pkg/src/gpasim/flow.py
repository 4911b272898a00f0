"""Stream plumbing between accelerator pipelines and the DRAM channels.

An accelerator run is a static per-channel tree of line queues joined by
merge nodes; the single endpoint per channel issues at most one 64-byte
line request per accelerator cycle to its DRAM channel. Time is split into
two integer clock domains (accelerator and DRAM) converted through exact
kHz ratios.

Request batches carry completion callbacks. Callbacks run as soon as the
DRAM model commits the request's data burst; they may only append lines
whose availability is at or after the completion time, so dispatching them
eagerly (possibly ahead of another stream's issue cursor) cannot change
any outcome. A channel's issue cursor never skips past pending work: the
channel forces every DRAM decision that could reveal new lines before it
jumps its clock forward.
"""
from __future__ import annotations

from collections import deque

INF = 1 << 62
LINE = 64


class FlowStall(RuntimeError):
    """No channel can make progress but registered work is unfinished."""


class SimClock:
    """Integer cycle conversion between the accelerator and DRAM clocks."""

    __slots__ = ("accel_khz", "dram_khz")

    def __init__(self, accel_khz: int, dram_khz: int):
        if accel_khz <= 0 or dram_khz <= 0:
            raise ValueError("clock rates must be positive")
        self.accel_khz = accel_khz
        self.dram_khz = dram_khz

    def to_dram(self, c: int) -> int:
        return -(-c * self.dram_khz // self.accel_khz)

    def to_accel(self, d: int) -> int:
        return -(-d * self.accel_khz // self.dram_khz)

    def accel_ns(self, c: int) -> float:
        return c * 1e6 / self.accel_khz


class Batch:
    """A group of line requests that completes (and triggers) as a unit."""

    __slots__ = ("label", "kind", "region", "base", "record_bytes", "count",
                 "total", "issued", "completed", "open", "last_t",
                 "on_line", "on_complete")

    def __init__(self, label="", kind="r", region="", base=0,
                 record_bytes=1, count=0, total=0, open_ended=False,
                 on_line=None, on_complete=None):
        if kind not in ("r", "w"):
            raise ValueError("kind must be 'r' or 'w'")
        self.label = label
        self.kind = kind
        self.region = region
        self.base = base
        self.record_bytes = record_bytes
        self.count = count
        self.total = total
        self.issued = 0
        self.completed = 0
        self.open = open_ended
        self.last_t = 0
        self.on_line = on_line
        self.on_complete = list(on_complete) if on_complete else []

    def records_done(self, idx: int) -> int:
        """Records fully contained in lines 0..idx of a sequential batch."""
        line_end = (self.base // LINE + idx + 1) * LINE
        done = (line_end - self.base) // self.record_bytes
        return self.count if done > self.count else (0 if done < 0 else done)

    def _fire(self, t: int) -> None:
        for cb in self.on_complete:
            cb(t)

    def close(self, t: int) -> None:
        """Mark an open-ended batch final; may fire its completion."""
        if not self.open:
            raise ValueError(f"batch {self.label!r} is not open")
        self.open = False
        if self.completed == self.total:
            self._fire(t if t > self.last_t else self.last_t)


def register_callback(batch: Batch, fn) -> None:
    batch.on_complete.append(fn)


class Join:
    """Fires fn(t) once all armed batches complete; t is the latest time."""

    __slots__ = ("remaining", "t_max", "fn")

    def __init__(self, fn):
        self.remaining = 0
        self.t_max = 0
        self.fn = fn

    def arm(self, batch: Batch) -> "Join":
        self.remaining += 1
        batch.on_complete.append(self._one)
        return self

    def expect(self, count: int = 1) -> "Join":
        """Reserve completions reported later via done()."""
        self.remaining += count
        return self

    def done(self, t: int) -> None:
        self._one(t)

    def _one(self, t: int) -> None:
        if t > self.t_max:
            self.t_max = t
        self.remaining -= 1
        if self.remaining == 0:
            self.fn(self.t_max)


class QueueLines:
    """FIFO of line requests; entries are (addr, avail, bytes, batch, idx)."""

    __slots__ = ("name", "q")

    def __init__(self, name=""):
        self.name = name
        self.q = deque()

    def append(self, addr, avail, nbytes, batch, idx):
        self.q.append((addr, avail, nbytes, batch, idx))

    def has_ready(self, t):
        q = self.q
        return bool(q) and q[0][1] <= t

    def next_time(self):
        q = self.q
        return q[0][1] if q else INF

    def pop(self, t):
        q = self.q
        if q and q[0][1] <= t:
            return q.popleft()
        return None

    def __len__(self):
        return len(self.q)


class RRMerge:
    """Round-robin over children, skipping the ones with nothing ready."""

    __slots__ = ("children", "cursor")

    def __init__(self, children):
        self.children = list(children)
        self.cursor = len(self.children) - 1

    def has_ready(self, t):
        return any(c.has_ready(t) for c in self.children)

    def next_time(self):
        return min(c.next_time() for c in self.children)

    def pop(self, t):
        kids = self.children
        n = len(kids)
        start = self.cursor + 1
        for k in range(n):
            i = (start + k) % n
            if kids[i].has_ready(t):
                self.cursor = i
                return kids[i].pop(t)
        return None


class PriorityMerge:
    """Always serves the first child that has a line ready."""

    __slots__ = ("children",)

    def __init__(self, children):
        self.children = list(children)

    def has_ready(self, t):
        return any(c.has_ready(t) for c in self.children)

    def next_time(self):
        return min(c.next_time() for c in self.children)

    def pop(self, t):
        for c in self.children:
            if c.has_ready(t):
                return c.pop(t)
        return None


def round_robin_merge(*children) -> RRMerge:
    return RRMerge(children)


def priority_merge(*children) -> PriorityMerge:
    return PriorityMerge(children)


def sequential_producer(queue, base, count, record_bytes, avail, *,
                        kind="r", region="", label="",
                        on_line=None, on_complete=None) -> Batch:
    """Append the line requests covering `count` sequential records at
    byte address `base`, merging records into 64-byte lines.

    `avail` is the accelerator cycle the stream becomes available, either
    one value for the whole batch or an indexable per-line sequence.
    Returns the batch; an empty stream completes (and triggers) at once.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        t = int(avail if isinstance(avail, int) else avail[0])
        batch = Batch(label, kind, region, base, record_bytes, 0, 0,
                      on_line=on_line, on_complete=on_complete)
        batch.last_t = t
        batch._fire(t)
        return batch
    line0 = base // LINE
    total = (base + count * record_bytes - 1) // LINE - line0 + 1
    batch = Batch(label, kind, region, base, record_bytes, count, total,
                  on_line=on_line, on_complete=on_complete)
    append = queue.q.append
    addr = line0 * LINE
    if isinstance(avail, int):
        prev = 0
        for i in range(total):
            started = (addr + LINE - base + record_bytes - 1) // record_bytes
            if started > count:
                started = count
            append((addr, avail, (started - prev) * record_bytes, batch, i))
            prev = started
            addr += LINE
    else:
        prev = 0
        for i in range(total):
            started = (addr + LINE - base + record_bytes - 1) // record_bytes
            if started > count:
                started = count
            append((addr, int(avail[i]), (started - prev) * record_bytes,
                    batch, i))
            prev = started
            addr += LINE
    return batch


def cache_line_merge(records):
    """Collapse an in-order stream of (byte addr, size) records into line
    requests: consecutive records stay in one request while they touch a
    line the request already covers. Returns (line addr, lines, bytes)
    triples; revisiting an earlier line after leaving it costs a new
    request.
    """
    out = []
    first = last = -1
    logical = 0
    for addr, nb in records:
        s = addr // LINE
        e = (addr + nb - 1) // LINE
        if first >= 0 and first <= s <= last + 1:
            if e > last:
                last = e
            logical += nb
        else:
            if first >= 0:
                out.append((first * LINE, last - first + 1, logical))
            first, last, logical = s, e, nb
    if first >= 0:
        out.append((first * LINE, last - first + 1, logical))
    return out


class LineMerger:
    """Stateful record-to-line merger feeding one queue.

    Buffers the line currently being filled; a record for a different line
    flushes the buffer as one line request. Used for streams whose records
    arrive over time (update queues, scattered value writes).
    """

    __slots__ = ("queue", "batch", "line", "nbytes", "avail")

    def __init__(self, queue: QueueLines, batch: Batch):
        if not batch.open:
            raise ValueError("LineMerger needs an open-ended batch")
        self.queue = queue
        self.batch = batch
        self.line = -1
        self.nbytes = 0
        self.avail = 0

    def add(self, addr: int, nbytes: int, avail: int) -> None:
        line = addr // LINE
        if line == self.line:
            self.nbytes += nbytes
            if avail > self.avail:
                self.avail = avail
        else:
            if self.line >= 0:
                self._emit()
            self.line = line
            self.nbytes = nbytes
            self.avail = avail

    def _emit(self) -> None:
        b = self.batch
        self.queue.append(self.line * LINE, self.avail, self.nbytes,
                          b, b.total)
        b.total += 1

    def flush(self) -> None:
        if self.line >= 0:
            self._emit()
            self.line = -1
            self.nbytes = 0

    def close(self, t: int) -> None:
        self.flush()
        self.batch.close(t)


def crossbar(mergers):
    """Route records to per-destination line mergers: returns
    send(dest, addr, nbytes, avail)."""
    def send(dest, addr, nbytes, avail):
        mergers[dest].add(addr, nbytes, avail)
    return send


def filter_records(records, keep):
    """Drop records whose keep flag is false (pairwise)."""
    return [r for r, k in zip(records, keep) if k]


class ChannelSim:
    """Issue endpoint for one channel: at most one line per accel cycle."""

    __slots__ = ("dram", "root", "clock", "chan_id", "t", "issued", "trace")

    def __init__(self, dram_channel, root, clock, chan_id=0, trace=None):
        self.dram = dram_channel
        self.root = root
        self.clock = clock
        self.chan_id = chan_id
        self.t = 0
        self.issued = 0
        self.trace = trace

    def _dispatch(self, res):
        entry, _, cls, arrival, data, comp = res
        addr, _, nbytes, batch, idx = entry
        t_acc = self.clock.to_accel(comp)
        if self.trace is not None:
            self.trace.append((self.chan_id, batch.kind, addr, nbytes,
                               batch.region, cls, arrival, data, comp))
        if t_acc > batch.last_t:
            batch.last_t = t_acc
        batch.completed += 1
        if batch.on_line is not None:
            batch.on_line(idx, t_acc)
        if batch.completed == batch.total and not batch.open:
            batch._fire(batch.last_t)

    def step(self) -> bool:
        dram = self.dram
        clock = self.clock
        t = self.t
        d_limit = clock.to_dram(t)
        while dram.pending:
            pd = dram.peek_decision_time()
            if pd > d_limit:
                break
            self._dispatch(dram.schedule_one())
        entry = self.root.pop(t)
        if entry is not None:
            batch = entry[3]
            dram.enqueue(entry[0], batch.kind == "w", d_limit, entry)
            batch.issued += 1
            self.issued += 1
            self.t = t + 1
            return True
        root = self.root
        nt = root.next_time()
        while True:
            if nt >= INF:
                if dram.pending:
                    # stream exhausted: outstanding completions may append
                    self._dispatch(dram.schedule_one())
                    nt = root.next_time()
                    continue
                return False
            if dram.pending and dram.peek_decision_time() <= clock.to_dram(nt):
                # decisions before the jump target can reveal earlier lines
                self._dispatch(dram.schedule_one())
                nt = root.next_time()
                continue
            self.t = nt
            return True

    def run_burst(self, limit: int) -> bool:
        step = self.step
        n = 0
        while n < limit and step():
            n += 1
        return n > 0


class Engine:
    """Drives all channels until every stream and DRAM queue drains."""

    def __init__(self, clock: SimClock, dram_model, roots, trace=False):
        if len(roots) != len(dram_model):
            raise ValueError("one root per channel required")
        self.clock = clock
        self.dram = dram_model
        self.trace = [] if trace else None
        self.channels = [ChannelSim(dram_model[i], roots[i], clock, i,
                                    self.trace)
                         for i in range(len(dram_model))]
        self.watched: list[Batch] = []

    def watch(self, batch: Batch) -> Batch:
        self.watched.append(batch)
        return batch

    def run(self) -> None:
        channels = self.channels
        while True:
            progress = False
            for ch in channels:
                if ch.run_burst(16384):
                    progress = True
            if not progress:
                break
        stuck = [b for b in self.watched
                 if b.open or b.completed < b.total]
        if stuck:
            names = ", ".join(
                f"{b.label!r} ({b.completed}/{b.total}"
                f"{', open' if b.open else ''})" for b in stuck[:8])
            raise FlowStall(f"streams never completed: {names}")

    @property
    def elapsed_dram(self) -> int:
        return max(ch.dram.last_completion for ch in self.channels)

    @property
    def elapsed_accel(self) -> int:
        return self.clock.to_accel(self.elapsed_dram)


def run(engine: Engine) -> None:
    engine.run()
