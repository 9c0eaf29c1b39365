"""Local-ordering rule tables.

A rule table is the boolean constraint function f over pairs of
(operation kind, memory type): f(earlier, later) = 1 means any two
same-CPU operations matching those categories must keep program order
in the global order.  Tables come from presets (sc, tso) or rulefiles.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .model import MemType, OpKind

KINDS = (OpKind.L, OpKind.S, OpKind.X)
MTYPES = (MemType.WB, MemType.WT, MemType.WP, MemType.UC, MemType.WC)

Category = tuple[OpKind, MemType]
Pair = tuple[OpKind, MemType, OpKind, MemType]

N_CATEGORIES = len(KINDS) * len(MTYPES)


def category_index(kind: OpKind, mtype: MemType) -> int:
    return KINDS.index(kind) * len(MTYPES) + MTYPES.index(mtype)


@dataclass(frozen=True)
class RuleTable:
    """Total boolean table over (kind, mtype) pairs; absent means unordered."""

    name: str
    ordered: frozenset[Pair]

    def lookup(self, earlier: Category, later: Category) -> bool:
        return (*earlier, *later) in self.ordered


def lookup(rt: RuleTable, earlier: Category, later: Category) -> bool:
    """f(earlier, later): must program order be preserved between them."""
    return rt.lookup(earlier, later)


ALL_PAIRS: frozenset[Pair] = frozenset(
    (k1, m1, k2, m2)
    for k1 in KINDS for m1 in MTYPES for k2 in KINDS for m2 in MTYPES
)


class UnknownPreset(ValueError):
    pass


def preset(name: str) -> RuleTable:
    """Built-in models.

    sc orders every pair.  tso relaxes exactly store-then-load (a store
    followed by a load may be reordered, any memory types); atomics stay
    fully ordered against everything.
    """
    if name == "sc":
        return RuleTable("sc", ALL_PAIRS)
    if name == "tso":
        relaxed = {
            (OpKind.S, m1, OpKind.L, m2) for m1 in MTYPES for m2 in MTYPES
        }
        return RuleTable("tso", ALL_PAIRS - relaxed)
    raise UnknownPreset(f"unknown preset {name!r} (have: sc, tso)")


# --- rulefile format ---------------------------------------------------------
#
#   model <name>
#   order <K1>.<M1> <K2>.<M2>     K in {L,S,X} or *, M in {WB,WT,WP,UC,WC} or *
#
# `#` starts a comment.  Pairs not listed are unordered.


class RuleParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class UnknownKind(RuleParseError):
    pass


class UnknownMemType(RuleParseError):
    pass


class DuplicateLineWarning(UserWarning):
    pass


def _parse_spec(tok: str, lineno: int) -> tuple[tuple[OpKind, ...], tuple[MemType, ...]]:
    parts = tok.split(".")
    if len(parts) != 2:
        raise RuleParseError(lineno, f"expected KIND.MEMTYPE, got {tok!r}")
    kind_s, mt_s = parts
    if kind_s == "*":
        kinds = KINDS
    else:
        try:
            kinds = (OpKind[kind_s],)
        except KeyError:
            raise UnknownKind(lineno, f"unknown op kind {kind_s!r}")
    if mt_s == "*":
        mts = MTYPES
    else:
        try:
            mts = (MemType[mt_s],)
        except KeyError:
            raise UnknownMemType(lineno, f"unknown memory type {mt_s!r}")
    return kinds, mts


def parse_rulefile(text: str) -> RuleTable:
    """Parse a rulefile; listed pairs become ordered, all others not."""
    name = "custom"
    pairs: set[Pair] = set()
    seen_lines: set[tuple[str, ...]] = set()
    seen_directive = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "model":
            if seen_directive:
                raise RuleParseError(lineno, "model header must come first")
            if len(toks) != 2:
                raise RuleParseError(lineno, "expected: model <name>")
            name = toks[1]
            seen_directive = True
            continue
        if toks[0] != "order":
            raise RuleParseError(lineno, f"unknown directive {toks[0]!r}")
        if len(toks) != 3:
            raise RuleParseError(lineno, "expected: order K1.M1 K2.M2")
        seen_directive = True
        if tuple(toks) in seen_lines:
            warnings.warn(DuplicateLineWarning(
                f"line {lineno}: duplicate order line {' '.join(toks[1:])}"))
            continue
        seen_lines.add(tuple(toks))
        kinds1, mts1 = _parse_spec(toks[1], lineno)
        kinds2, mts2 = _parse_spec(toks[2], lineno)
        pairs.update(
            (k1, m1, k2, m2)
            for k1 in kinds1 for m1 in mts1 for k2 in kinds2 for m2 in mts2
        )

    return RuleTable(name, frozenset(pairs))


def render_rulefile(rt: RuleTable) -> str:
    """Serialize a table; parse_rulefile inverts this."""
    lines = [f"model {rt.name}"]
    for k1 in KINDS:
        for m1 in MTYPES:
            for k2 in KINDS:
                for m2 in MTYPES:
                    if (k1, m1, k2, m2) in rt.ordered:
                        lines.append(
                            f"order {k1.value}.{m1.value} {k2.value}.{m2.value}")
    return "\n".join(lines) + "\n"
