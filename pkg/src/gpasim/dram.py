"""Cycle-level DRAM channel model with open-row bank state.

All timing is tracked in integer DRAM clock cycles for exact determinism;
wall-clock nanoseconds are derived only when reporting. Every request moves
one 64-byte line. Requests live in per-bank FIFOs; the scheduler picks, among
the bank heads that have arrived, the oldest one that would be a row hit,
falling back to the oldest head (first-ready, first-come-first-served).
Same-bank order is never reordered.

Command timestamps may be placed retroactively (never before the request's
arrival): the model commits one data burst per decision and back-fills the
ACT/PRE/CAS times as early as the bank-state constraints allow. This captures
bank-level parallelism without simulating per-cycle command arbitration.
Refresh is not modeled.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from importlib import resources

LINE_BYTES = 64

_REQUIRED_KEYS = (
    "data_rate", "bus_bits", "burst_length", "ranks", "banks_per_rank",
    "bank_groups", "row_bytes", "tCL", "tRCD", "tRP", "tRAS", "tRC",
    "tCCD_S", "tCCD_L", "tWR", "tRTP",
)
_OPTIONAL_KEYS = {"capacity_gb": 16}

BUILTIN_CONFIGS = ("ddr3_1600", "ddr3_2133", "ddr4_2400", "hbm_1000")


@dataclass(frozen=True)
class DramConfig:
    name: str
    data_rate: int          # MT/s
    bus_bits: int
    burst_length: int
    ranks: int
    banks_per_rank: int
    bank_groups: int
    row_bytes: int
    tCL: int
    tRCD: int
    tRP: int
    tRAS: int
    tRC: int
    tCCD_S: int
    tCCD_L: int
    tWR: int
    tRTP: int
    capacity_gb: int = 16

    def __post_init__(self):
        if self.bus_bits // 8 * self.burst_length != LINE_BYTES:
            raise ValueError(
                f"{self.name}: bus_bits*burst_length must move one "
                f"{LINE_BYTES}-byte line")
        if self.burst_length % 2:
            raise ValueError("burst_length must be even (double data rate)")
        if self.row_bytes % LINE_BYTES:
            raise ValueError("row_bytes must be a multiple of the line size")
        if self.banks_per_rank % self.bank_groups:
            raise ValueError("bank_groups must divide banks_per_rank")
        if self.tRC < self.tRAS:
            raise ValueError("tRC must be >= tRAS")
        if self.tCCD_L < self.tCCD_S:
            raise ValueError("tCCD_L must be >= tCCD_S")
        for key in _REQUIRED_KEYS:
            if getattr(self, key) <= 0:
                raise ValueError(f"{self.name}: {key} must be positive")

    @property
    def banks(self) -> int:
        return self.ranks * self.banks_per_rank

    @property
    def t_burst(self) -> int:
        return self.burst_length // 2

    @property
    def dram_khz(self) -> int:
        # MT/s -> kHz of the command clock (two transfers per cycle)
        return self.data_rate * 500

    @property
    def tck_ns(self) -> float:
        return 1e6 / self.dram_khz

    @property
    def peak_bytes_per_cycle(self) -> int:
        return self.bus_bits // 8 * 2

    @property
    def peak_gbps(self) -> float:
        return self.bus_bits / 8 * self.data_rate * 1e6 / 1e9

    @property
    def capacity_bytes(self) -> int:
        return self.capacity_gb << 30


def parse_dram_config(text: str, name: str = "custom") -> DramConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'key value'")
        key, val = parts
        if key == "name":
            values["name"] = val
            continue
        if key not in _REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = int(val)
        except ValueError:
            raise ValueError(f"line {lineno}: {key} needs an integer") from None
    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ValueError(f"missing keys: {', '.join(missing)}")
    values.setdefault("name", name)
    return DramConfig(**{**_OPTIONAL_KEYS, **values})


def load_dram_config(spec: str) -> DramConfig:
    """Load a built-in config by name or any config from a file path."""
    if spec in BUILTIN_CONFIGS:
        text = resources.files("gpasim").joinpath(
            f"dramcfg/{spec}.cfg").read_text()
        return parse_dram_config(text, name=spec)
    try:
        with open(spec) as fh:
            text = fh.read()
    except OSError as exc:
        raise ValueError(
            f"unknown DRAM config {spec!r} (built-ins: "
            f"{', '.join(BUILTIN_CONFIGS)})") from exc
    import os
    return parse_dram_config(text, name=os.path.splitext(
        os.path.basename(spec))[0])


def decode_address(cfg: DramConfig, addr: int) -> tuple[int, int, int]:
    """Map a channel-local byte address to (bank, row, column offset).

    Column bits are lowest so a sequential stream walks a full row,
    then moves to the same row of the next bank.
    """
    col = addr % cfg.row_bytes
    x = addr // cfg.row_bytes
    bank = x % cfg.banks_per_rank
    x //= cfg.banks_per_rank
    rank = x % cfg.ranks
    row = x // cfg.ranks
    return rank * cfg.banks_per_rank + bank, row, col


HIT, MISS, CONFLICT = 0, 1, 2
CLASS_NAMES = ("hit", "miss", "conflict")


class DramChannel:
    """One independent channel: per-bank FIFOs plus the shared data bus."""

    __slots__ = (
        "cfg", "chan_id", "queues", "open_row", "act_time", "act_ok",
        "ras_ok", "pre_min", "cas_ok_group", "cas_ok_any", "bus_free",
        "now", "seq", "pending", "reads", "writes", "classes",
        "last_completion", "row_div", "nbanks", "groups", "tCL", "tRCD",
        "tRP", "tRAS", "tRC", "tCCD_S", "tCCD_L", "tWR", "tRTP", "tBurst",
        "bpr", "ranks",
    )

    def __init__(self, cfg: DramConfig, chan_id: int = 0):
        self.cfg = cfg
        self.chan_id = chan_id
        nb = cfg.banks
        self.nbanks = nb
        self.bpr = cfg.banks_per_rank
        self.ranks = cfg.ranks
        self.groups = cfg.bank_groups
        self.row_div = cfg.row_bytes
        self.tCL = cfg.tCL
        self.tRCD = cfg.tRCD
        self.tRP = cfg.tRP
        self.tRAS = cfg.tRAS
        self.tRC = cfg.tRC
        self.tCCD_S = cfg.tCCD_S
        self.tCCD_L = cfg.tCCD_L
        self.tWR = cfg.tWR
        self.tRTP = cfg.tRTP
        self.tBurst = cfg.t_burst
        self.queues = [deque() for _ in range(nb)]
        self.open_row = [-1] * nb
        self.act_time = [-1 << 40] * nb
        self.act_ok = [0] * nb
        self.ras_ok = [0] * nb
        self.pre_min = [0] * nb
        self.cas_ok_group = [0] * cfg.bank_groups
        self.cas_ok_any = 0
        self.bus_free = 0
        self.now = 0
        self.seq = 0
        self.pending = 0
        self.reads = 0
        self.writes = 0
        self.classes = [0, 0, 0]
        self.last_completion = 0

    def enqueue(self, addr: int, is_write: bool, arrival: int, tag=None) -> None:
        """Queue one 64-byte line request, available at `arrival` cycles."""
        if addr & (LINE_BYTES - 1):
            raise ValueError(f"address 0x{addr:x} is not line aligned")
        x = addr // self.row_div
        bank = x % self.bpr
        x //= self.bpr
        if self.ranks > 1:
            bank += (x % self.ranks) * self.bpr
            row = x // self.ranks
        else:
            row = x
        self.queues[bank].append((self.seq, arrival, row, is_write, tag))
        self.seq += 1
        self.pending += 1

    def peek_decision_time(self) -> int:
        """Cycle at which the next scheduling decision would happen."""
        if not self.pending:
            return -1
        earliest = None
        for q in self.queues:
            if q:
                a = q[0][1]
                if earliest is None or a < earliest:
                    earliest = a
        return self.now if self.now >= earliest else earliest

    def schedule_one(self):
        """Commit one request to the bus.

        Returns (tag, is_write, class, arrival, data_start, completion)
        with the row-buffer classification, or None if nothing is pending.
        """
        if not self.pending:
            return None
        queues = self.queues
        now = self.now
        # wait for the earliest arrival if nothing is ready yet
        best = best_hit = None
        best_seq = best_hit_seq = 1 << 62
        earliest = 1 << 62
        open_row = self.open_row
        for b in range(self.nbanks):
            q = queues[b]
            if not q:
                continue
            head = q[0]
            arr = head[1]
            if arr < earliest:
                earliest = arr
            if arr > now:
                continue
            s = head[0]
            if s < best_seq:
                best_seq = s
                best = b
            if open_row[b] == head[2] and s < best_hit_seq:
                best_hit_seq = s
                best_hit = b
        if best is None:
            now = earliest
            for b in range(self.nbanks):
                q = queues[b]
                if not q:
                    continue
                head = q[0]
                if head[1] > now:
                    continue
                s = head[0]
                if s < best_seq:
                    best_seq = s
                    best = b
                if open_row[b] == head[2] and s < best_hit_seq:
                    best_hit_seq = s
                    best_hit = b
        b = best_hit if best_hit is not None else best
        seq, arrival, row, is_write, tag = queues[b].popleft()
        self.pending -= 1

        grp = (b % self.bpr) % self.groups
        tCL = self.tCL
        if open_row[b] == row:
            cls = HIT
            cas_min = self.act_time[b] + self.tRCD
        else:
            if open_row[b] < 0:
                cls = MISS
                act = self.act_ok[b]
                if arrival > act:
                    act = arrival
            else:
                cls = CONFLICT
                pre = self.ras_ok[b]
                if self.pre_min[b] > pre:
                    pre = self.pre_min[b]
                if arrival > pre:
                    pre = arrival
                act = pre + self.tRP
                if self.act_ok[b] > act:
                    act = self.act_ok[b]
            self.act_time[b] = act
            self.act_ok[b] = act + self.tRC
            self.ras_ok[b] = act + self.tRAS
            open_row[b] = row
            cas_min = act + self.tRCD
        if arrival > cas_min:
            cas_min = arrival
        g = self.cas_ok_group[grp]
        if g > cas_min:
            cas_min = g
        if self.cas_ok_any > cas_min:
            cas_min = self.cas_ok_any
        data = cas_min + tCL
        if self.bus_free > data:
            data = self.bus_free
        cas = data - tCL
        self.cas_ok_group[grp] = cas + self.tCCD_L
        self.cas_ok_any = cas + self.tCCD_S
        completion = data + self.tBurst
        self.bus_free = completion
        if is_write:
            self.writes += 1
            p = completion + self.tWR
        else:
            self.reads += 1
            p = cas + self.tRTP
        if p > self.pre_min[b]:
            self.pre_min[b] = p
        self.classes[cls] += 1
        self.now = data if data > now else now
        if completion > self.last_completion:
            self.last_completion = completion
        return tag, is_write, cls, arrival, data, completion

    def drain(self):
        """Schedule everything pending; yields schedule_one results."""
        while self.pending:
            yield self.schedule_one()

    def stats(self) -> dict:
        total = self.reads + self.writes
        busy = total * self.tBurst
        return {
            "reads": self.reads,
            "writes": self.writes,
            "row_hits": self.classes[HIT],
            "row_misses": self.classes[MISS],
            "row_conflicts": self.classes[CONFLICT],
            "requests": total,
            "busy_cycles": busy,
            "last_completion": self.last_completion,
            "utilization": busy / self.last_completion
            if self.last_completion else 0.0,
        }


class DramModel:
    """A set of identical independent channels sharing one clock."""

    def __init__(self, cfg: DramConfig, channels: int = 1):
        if channels < 1:
            raise ValueError("channels must be positive")
        self.cfg = cfg
        self.channels = [DramChannel(cfg, i) for i in range(channels)]

    def __getitem__(self, i: int) -> DramChannel:
        return self.channels[i]

    def __len__(self) -> int:
        return len(self.channels)

    def drain(self) -> None:
        for ch in self.channels:
            for _ in ch.drain():
                pass

    @property
    def elapsed_cycles(self) -> int:
        return max(ch.last_completion for ch in self.channels)

    @property
    def elapsed_ns(self) -> float:
        return self.elapsed_cycles * self.cfg.tck_ns

    def stats(self) -> dict:
        per = [ch.stats() for ch in self.channels]
        agg = {k: sum(s[k] for s in per)
               for k in ("reads", "writes", "row_hits", "row_misses",
                         "row_conflicts", "requests", "busy_cycles")}
        agg["elapsed_cycles"] = self.elapsed_cycles
        agg["elapsed_ns"] = self.elapsed_ns
        agg["utilization"] = (
            agg["busy_cycles"] / (len(self.channels) * agg["elapsed_cycles"])
            if agg["elapsed_cycles"] else 0.0)
        agg["per_channel"] = per
        return agg
