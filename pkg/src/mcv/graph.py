"""Bit-matrix reachability kernel.

The constraint graph lives in an n x n adjacency matrix of single bits,
packed into 64-bit words, kept in transitively closed form.  The one hot
operation is Subsume(x, y): make every successor of y a successor of x,
i.e. OR row y into row x a whole word (or wider lane) at a time.  Closure
is Warshall's algorithm expressed purely in terms of Subsume; after any
batch of edge insertions the closure is repaired by a restricted pass
that only touches pairs adjacent to changed nodes.

Self edges are never pre-set, so after closure bit(i, i) = 1 holds
exactly for nodes lying on a cycle; cycle detection is a diagonal scan.

The restricted (incremental) pass is iterated until it stops producing
new bits, re-marking rows that grew as changed for the next sweep.  A
single sweep is not always enough: a path hop whose two endpoints are
both unchanged is never subsumed directly, and when its reachability
bits arrive at pivots in unlucky order one sweep under-closes.  At the
fixpoint the matrix is exactly the from-scratch closure: for any u->v->w
with bit(u,v) and bit(v,w) set, whichever bit was set last caused its
row to be re-marked, and the following sweep runs Subsume over the pair.
"""

from __future__ import annotations

import numpy as np

WORD = 64
_ONE = np.uint64(1)


def _words_for(n: int) -> int:
    return max(1, (n + WORD - 1) // WORD)


# --- row OR in selectable lane widths ---------------------------------------
# All variants compute dst |= src; correctness must not depend on which one
# runs.  The widest practical lane is used by the matrix itself.


def or_rows_reference(dst: np.ndarray, src: np.ndarray) -> None:
    """Bit-by-bit reference: the semantic definition of Subsume."""
    for w in range(len(dst)):
        d = int(dst[w])
        s = int(src[w])
        for b in range(WORD):
            if (s >> b) & 1:
                d |= 1 << b
        dst[w] = d


def or_rows_lane8(dst: np.ndarray, src: np.ndarray) -> None:
    d8 = dst.view(np.uint8)
    d8 |= src.view(np.uint8)


def or_rows_lane64(dst: np.ndarray, src: np.ndarray) -> None:
    np.bitwise_or(dst, src, out=dst)


def or_rows_lane128(dst: np.ndarray, src: np.ndarray) -> None:
    # 128-bit chunks: pairs of words; odd tail word handled singly
    pairs = len(dst) // 2 * 2
    d2 = dst[:pairs].reshape(-1, 2)
    s2 = src[:pairs].reshape(-1, 2)
    np.bitwise_or(d2, s2, out=d2)
    if pairs < len(dst):
        dst[pairs:] |= src[pairs:]


SUBSUME_LANES = {
    8: or_rows_lane8,
    64: or_rows_lane64,
    128: or_rows_lane128,
}


class ClosureMatrix:
    """n x n bit adjacency matrix maintained in transitively closed form.

    Bits are only ever set, never cleared.  The changed vector is written
    by callers (rule passes mark the source row of every new edge) and
    consumed by incremental_close.
    """

    def __init__(self, n: int):
        self.n = n
        self.words = _words_for(n)
        self.bits = np.zeros((n, self.words), dtype=np.uint64)
        self.changed = np.zeros(n, dtype=bool)
        self.closed = True  # vacuously: no edges yet
        # instrumentation for the cost-accounting checks
        self.subsume_calls = 0
        self.subsume_calls_incremental = 0
        self.changed_markings = 0

    # -- single-bit access ----------------------------------------------

    def add_edge(self, x: int, y: int) -> bool:
        """Set bit (x, y); returns True when the bit is new.

        The closed flag is cleared on a new bit; marking changed[x] is
        the caller's job (rule passes mark exactly the edge source).
        """
        w, b = y >> 6, _ONE << np.uint64(y & 63)
        if self.bits[x, w] & b:
            return False
        self.bits[x, w] |= b
        self.closed = False
        return True

    def get_bit(self, x: int, y: int) -> bool:
        return bool((self.bits[x, y >> 6] >> np.uint64(y & 63)) & _ONE)

    def mark_changed(self, x: int) -> None:
        self.changed[x] = True
        self.changed_markings += 1

    def row_targets(self, x: int) -> np.ndarray:
        """Node ids y with bit(x, y) set."""
        return np.nonzero(
            np.unpackbits(self.bits[x].view(np.uint8), bitorder="little")[: self.n]
        )[0]

    def subsume(self, x: int, y: int, lane: int = 64) -> None:
        """Row x |= row y."""
        SUBSUME_LANES[lane](self.bits[x], self.bits[y])
        self.subsume_calls += 1

    # -- closure ----------------------------------------------------------

    def pivot_subsume(self, j: int, lo: int, hi: int,
                      changed: np.ndarray | None = None,
                      gained: np.ndarray | None = None) -> int:
        """One Warshall pivot over rows [lo, hi): Subsume(i, j) for every
        row i in range with bit(i, j) set (restricted to changed-adjacent
        pairs when a changed vector is given).

        Column j cannot gain bits for rows in range during its own pivot
        (Subsume writes row i only, and only copies bit (i, j) when it was
        already set), so the snapshot below equals the serial live-read
        loop.  Returns the number of subsume calls performed.
        """
        col = ((self.bits[lo:hi, j >> 6] >> np.uint64(j & 63)) & _ONE).astype(bool)
        if changed is not None and not changed[j]:
            col &= changed[lo:hi]
        idx = np.nonzero(col)[0]
        if len(idx) == 0:
            return 0
        idx += lo
        rows = self.bits[idx]
        merged = rows | self.bits[j]
        if gained is not None:
            grew = (merged != rows).any(axis=1)
            if grew.any():
                gained[idx[grew]] = True
        self.bits[idx] = merged
        return len(idx)


def add_edge(m: ClosureMatrix, x: int, y: int) -> bool:
    return m.add_edge(x, y)


def subsume(m: ClosureMatrix, x: int, y: int, lane: int = 64) -> None:
    m.subsume(x, y, lane)


def warshall_close(m: ClosureMatrix) -> None:
    """Full transitive closure from scratch."""
    for j in range(m.n):
        m.subsume_calls += m.pivot_subsume(j, 0, m.n)
    m.closed = True


def incremental_close(m: ClosureMatrix) -> None:
    """Repair closure after edge insertions whose sources are marked changed.

    Runs the restricted Warshall pass, re-marking rows that gained bits,
    until a sweep adds nothing; then resets the changed vector.  The
    result is bit-for-bit the from-scratch closure of the augmented edge
    set (see module docstring for why one sweep does not suffice).
    """
    n = m.n
    changed = m.changed.copy()
    while changed.any():
        gained = np.zeros(n, dtype=bool)
        for j in range(n):
            calls = m.pivot_subsume(j, 0, n, changed=changed, gained=gained)
            m.subsume_calls += calls
            m.subsume_calls_incremental += calls
        m.changed_markings += int(gained.sum())
        changed = gained
    m.changed[:] = False
    m.closed = True


def detect_cycles(m: ClosureMatrix) -> set[int]:
    """Nodes on cycles: diagonal bits of the closed matrix."""
    assert m.closed, "detect_cycles requires a closed matrix"
    idx = np.arange(m.n)
    words = m.bits[idx, idx >> 6]
    diag = (words >> (idx & 63).astype(np.uint64)) & _ONE
    return set(np.nonzero(diag)[0].tolist())


def to_text(m: ClosureMatrix) -> str:
    """Debug dump: n lines of 0/1 characters, row-major."""
    lines = []
    for x in range(m.n):
        row = np.unpackbits(m.bits[x].view(np.uint8), bitorder="little")[: m.n]
        lines.append("".join("1" if b else "0" for b in row))
    return "\n".join(lines) + "\n"


def check_padding_zero(m: ClosureMatrix) -> bool:
    """Padding bits beyond column n-1 must stay zero for whole-row OR."""
    pad = m.words * WORD - m.n
    if pad == 0:
        return True
    mask = np.uint64(((1 << pad) - 1) << (WORD - pad))
    return not (m.bits[:, -1] & mask).any()
