"""Domain types for multi-processor memory traces.

A trace is a per-CPU list of program-ordered memory operations (loads,
stores, atomic load-stores) over shared locations, plus the initial value
and memory type of every location.  Store values and the initial value of
each location must be pairwise distinct; that uniqueness is what lets a
load be linked to the one store it read purely by value equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

U64_MAX = 2**64 - 1

#: Node id reserved for the synthetic store that initializes every location.
SENTINEL = 0


class OpKind(Enum):
    L = "L"
    S = "S"
    X = "X"  # atomic load-store; acts as both L and S

    def is_load(self) -> bool:
        return self is not OpKind.S

    def is_store(self) -> bool:
        return self is not OpKind.L


class MemType(Enum):
    WB = "WB"
    WT = "WT"
    WP = "WP"
    UC = "UC"
    WC = "WC"


@dataclass(frozen=True)
class Operation:
    """One memory event: cpu and seq locate it in program order."""

    cpu: int
    seq: int
    kind: OpKind
    loc: str
    mtype: MemType
    read_val: int | None = None
    write_val: int | None = None

    def text(self) -> str:
        """Render in the S[A]#5 / L[A]=5 notation."""
        if self.kind is OpKind.L:
            return f"L[{self.loc}]={self.read_val}"
        if self.kind is OpKind.S:
            return f"S[{self.loc}]#{self.write_val}"
        return f"X[{self.loc}]={self.read_val}#{self.write_val}"


@dataclass(frozen=True)
class Trace:
    """Per-CPU programs plus per-location initial values and memory types."""

    programs: tuple[tuple[Operation, ...], ...]
    initials: dict[str, int] = field(default_factory=dict)
    location_mtypes: dict[str, MemType] = field(default_factory=dict)

    @cached_property
    def operations(self) -> tuple[Operation, ...]:
        """All operations, CPU-major, program order within each CPU."""
        return tuple(op for prog in self.programs for op in prog)

    @cached_property
    def _cpu_offsets(self) -> tuple[int, ...]:
        offs = []
        total = 0
        for prog in self.programs:
            offs.append(total)
            total += len(prog)
        return tuple(offs)

    @property
    def node_count(self) -> int:
        """Graph nodes: one per operation plus the sentinel at id 0."""
        return 1 + len(self.operations)

    def node_id(self, cpu: int, seq: int) -> int:
        return 1 + self._cpu_offsets[cpu] + seq

    def op_at(self, node: int) -> Operation:
        if node == SENTINEL:
            raise IndexError("sentinel node has no operation")
        return self.operations[node - 1]

    def node_text(self, node: int) -> str:
        if node == SENTINEL:
            return "init"
        op = self.op_at(node)
        return f"cpu{op.cpu}#{op.seq} {op.text()}"


# --- validation ------------------------------------------------------------

DUPLICATE_STORE_VALUE = "DuplicateStoreValue"
MISSING_INITIAL = "MissingInitial"
INCONSISTENT_MEMTYPE = "InconsistentMemType"
MALFORMED_OPERATION = "MalformedOperation"


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    loc: str | None = None
    value: int | None = None
    cpu: int | None = None
    seq: int | None = None

    def __str__(self) -> str:
        where = f" at cpu{self.cpu}#{self.seq}" if self.cpu is not None else ""
        return f"{self.kind}{where}: {self.message}"


class TraceValidationError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class NoMatchingStore(ValueError):
    """A load's value matches no store and is not the initial value.

    This is a data-value corruption, a distinct failure class from an
    ordering violation: the checker never gets to run on such traces.
    """

    def __init__(self, op: Operation):
        self.op = op
        super().__init__(
            f"cpu{op.cpu}#{op.seq} {op.text()}: value matches no store to "
            f"{op.loc} and is not the initial value"
        )


def _valid_u64(v: int | None) -> bool:
    return v is not None and isinstance(v, int) and 0 <= v <= U64_MAX


def validate_trace(trace: Trace) -> Trace:
    """Check all trace well-formedness invariants.

    Returns the trace unchanged when valid; raises TraceValidationError
    carrying every violation found otherwise.
    """
    violations: list[Violation] = []

    for cpu, prog in enumerate(trace.programs):
        for i, op in enumerate(prog):
            if op.cpu != cpu or op.seq != i:
                violations.append(Violation(
                    MALFORMED_OPERATION,
                    f"expected cpu{cpu}#{i}, got cpu{op.cpu}#{op.seq}",
                    loc=op.loc, cpu=cpu, seq=i))
            needs_read = op.kind.is_load()
            needs_write = op.kind.is_store()
            if needs_read != _valid_u64(op.read_val) and not (
                    not needs_read and op.read_val is None):
                violations.append(Violation(
                    MALFORMED_OPERATION,
                    f"{op.kind.value} read value must be "
                    f"{'a u64' if needs_read else 'absent'}, got {op.read_val}",
                    loc=op.loc, cpu=cpu, seq=i))
            if needs_write != _valid_u64(op.write_val) and not (
                    not needs_write and op.write_val is None):
                violations.append(Violation(
                    MALFORMED_OPERATION,
                    f"{op.kind.value} write value must be "
                    f"{'a u64' if needs_write else 'absent'}, got {op.write_val}",
                    loc=op.loc, cpu=cpu, seq=i))

    locs_used = {op.loc for op in trace.operations}
    for loc in sorted(locs_used):
        if loc not in trace.initials:
            violations.append(Violation(
                MISSING_INITIAL, f"location {loc} has no initial value", loc=loc))

    for loc, init in trace.initials.items():
        if not _valid_u64(init):
            violations.append(Violation(
                MALFORMED_OPERATION, f"initial value of {loc} not a u64: {init}",
                loc=loc))

    # a location's memory type is a property of the location; every
    # operation must agree with the declared (or defaulted) type
    for op in trace.operations:
        declared = trace.location_mtypes.get(op.loc, MemType.WB)
        if op.mtype is not declared:
            violations.append(Violation(
                INCONSISTENT_MEMTYPE,
                f"{op.loc} is {declared.value} but operation says {op.mtype.value}",
                loc=op.loc, cpu=op.cpu, seq=op.seq))

    # UNIQUE-WRITES: per location, store values and the initial value are
    # pairwise distinct
    seen: dict[tuple[str, int], str] = {}
    for loc, init in trace.initials.items():
        if _valid_u64(init):
            seen[(loc, init)] = "initial value"
    for op in trace.operations:
        if not op.kind.is_store() or not _valid_u64(op.write_val):
            continue
        key = (op.loc, op.write_val)
        if key in seen:
            violations.append(Violation(
                DUPLICATE_STORE_VALUE,
                f"value {op.write_val} written to {op.loc} twice "
                f"(also {seen[key]})",
                loc=op.loc, value=op.write_val, cpu=op.cpu, seq=op.seq))
        else:
            seen[key] = f"cpu{op.cpu}#{op.seq}"

    if violations:
        raise TraceValidationError(violations)
    return trace


def compute_reads(trace: Trace) -> dict[int, int]:
    """Link every load/atomic node to the store node whose value it read.

    Uniqueness of store values makes this a pure lookup: the node of the
    store (any CPU, same location) writing exactly the load's value, or
    SENTINEL when the load returned the location's initial value.
    Raises NoMatchingStore if the value matches neither.
    """
    writers: dict[tuple[str, int], int] = {}
    for node in range(1, trace.node_count):
        op = trace.op_at(node)
        if op.kind.is_store():
            writers[(op.loc, op.write_val)] = node

    reads: dict[int, int] = {}
    for node in range(1, trace.node_count):
        op = trace.op_at(node)
        if not op.kind.is_load():
            continue
        target = writers.get((op.loc, op.read_val))
        if target is not None:
            reads[node] = target
        elif trace.initials.get(op.loc) == op.read_val:
            reads[node] = SENTINEL
        else:
            raise NoMatchingStore(op)
    return reads


# --- trace text format -----------------------------------------------------
#
#   init <loc> <u64>
#   mem <loc> <WB|WT|WP|UC|WC>
#   op <cpu> L <loc> = <u64>
#   op <cpu> S <loc> # <u64>
#   op <cpu> X <loc> = <u64> # <u64>
#
# `#` also starts a comment wherever the grammar does not expect it.


class TraceParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


def _tokenize(line: str) -> list[str]:
    # split '=' and '#' into their own tokens so `S A #5` and `S A # 5`
    # parse identically
    return line.replace("#", " # ").replace("=", " = ").split()


def parse_trace_text(text: str) -> Trace:
    """Parse the trace text format into an (unvalidated) Trace."""
    initials: dict[str, int] = {}
    mtypes: dict[str, MemType] = {}
    raw_ops: list[tuple[int, OpKind, str, int | None, int | None]] = []

    def want_u64(tok: str, lineno: int, what: str) -> int:
        try:
            v = int(tok, 0)
        except ValueError:
            raise TraceParseError(lineno, f"{what} is not an integer: {tok!r}")
        if not 0 <= v <= U64_MAX:
            raise TraceParseError(lineno, f"{what} out of u64 range: {v}")
        return v

    for lineno, line in enumerate(text.splitlines(), start=1):
        toks = _tokenize(line)
        if not toks or toks[0] == "#":
            continue

        def take(expect: str | None = None, what: str = "token") -> str:
            if not toks:
                raise TraceParseError(lineno, f"missing {what}")
            tok = toks.pop(0)
            if tok == "#" and expect != "#":
                raise TraceParseError(lineno, f"missing {what}")
            if expect is not None and tok != expect:
                raise TraceParseError(lineno, f"expected {expect!r}, got {tok!r}")
            return tok

        head = toks.pop(0)
        if head == "init":
            loc = take(what="location")
            initials[loc] = want_u64(take(what="initial value"), lineno,
                                     "initial value")
        elif head == "mem":
            loc = take(what="location")
            tok = take(what="memory type")
            try:
                mtypes[loc] = MemType[tok]
            except KeyError:
                raise TraceParseError(lineno, f"unknown memory type {tok!r}")
        elif head == "op":
            cpu = want_u64(take(what="cpu index"), lineno, "cpu index")
            kind_tok = take(what="op kind")
            try:
                kind = OpKind[kind_tok]
            except KeyError:
                raise TraceParseError(lineno, f"unknown op kind {kind_tok!r}")
            loc = take(what="location")
            read_val = write_val = None
            if kind in (OpKind.L, OpKind.X):
                take("=", what="'='")
                read_val = want_u64(take(what="read value"), lineno, "read value")
            if kind in (OpKind.S, OpKind.X):
                take("#", what="'#'")
                write_val = want_u64(take(what="write value"), lineno,
                                     "write value")
            raw_ops.append((cpu, kind, loc, read_val, write_val))
        else:
            raise TraceParseError(lineno, f"unknown directive {head!r}")

        if toks and toks[0] != "#":
            raise TraceParseError(lineno, f"trailing tokens: {' '.join(toks)}")

    ncpus = 1 + max((cpu for cpu, *_ in raw_ops), default=-1)
    progs: list[list[Operation]] = [[] for _ in range(ncpus)]
    for cpu, kind, loc, read_val, write_val in raw_ops:
        progs[cpu].append(Operation(
            cpu=cpu, seq=len(progs[cpu]), kind=kind, loc=loc,
            mtype=mtypes.get(loc, MemType.WB),
            read_val=read_val, write_val=write_val))
    return Trace(
        programs=tuple(tuple(p) for p in progs),
        initials=initials,
        location_mtypes=mtypes,
    )


def render_trace_text(trace: Trace) -> str:
    """Serialize a Trace; parse_trace_text inverts this."""
    lines = []
    for loc in sorted(trace.initials):
        lines.append(f"init {loc} {trace.initials[loc]}")
    for loc in sorted(trace.location_mtypes):
        lines.append(f"mem {loc} {trace.location_mtypes[loc].value}")
    for prog in trace.programs:
        for op in prog:
            if op.kind is OpKind.L:
                lines.append(f"op {op.cpu} L {op.loc} = {op.read_val}")
            elif op.kind is OpKind.S:
                lines.append(f"op {op.cpu} S {op.loc} # {op.write_val}")
            else:
                lines.append(
                    f"op {op.cpu} X {op.loc} = {op.read_val} # {op.write_val}")
    return "\n".join(lines) + "\n"


def with_read_value(trace: Trace, cpu: int, seq: int, value: int) -> Trace:
    """Copy of trace with one load's read value replaced."""
    progs = [list(p) for p in trace.programs]
    progs[cpu][seq] = replace(progs[cpu][seq], read_val=value)
    return Trace(
        programs=tuple(tuple(p) for p in progs),
        initials=dict(trace.initials),
        location_mtypes=dict(trace.location_mtypes),
    )
