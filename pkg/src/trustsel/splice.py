"""Splice heuristic: greedy anchored runs plus neighbour fill (lower bound)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BinaryTrustMatrix, BudgetConfig, SelectionPlan


@dataclass
class Segment:
    start: int  # inclusive
    end: int  # exclusive
    selected_row: int | None = None
    selected: bool = False

    @property
    def width(self) -> int:
        return self.end - self.start


def _runs(row: np.ndarray):
    """Yield ``(start, length)`` of every maximal run of ones in ``row``."""
    padded = np.concatenate(([0], row.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    for s, e in zip(edges[::2], edges[1::2]):
        yield int(s), int(e - s)


def longest_run(A: BinaryTrustMatrix, segment: Segment, R: int) -> tuple[int, int, int] | None:
    """Longest run of ones of length >= R inside ``segment``.

    Returns ``(row, start, length)`` with absolute slot indices; ties go to
    the lowest row, then the earliest start.
    """
    if segment.width < R:
        return None
    block = A.values[:, segment.start : segment.end]
    best = None
    for row in range(block.shape[0]):
        for s, length in _runs(block[row]):
            if length < R:
                continue
            if best is None or length > best[2]:
                best = (row, segment.start + s, length)
    return best


def _anchor_phase(A: BinaryTrustMatrix, config: BudgetConfig) -> list[Segment]:
    T = A.shape[1]
    segments = [Segment(0, T)]
    i = 0
    while i <= config.B and any(not s.selected for s in segments):
        merged = False
        best = None
        best_pos = -1
        for pos, seg in enumerate(segments):
            if seg.selected:
                continue
            hit = longest_run(A, seg, config.R)
            if hit is None:
                continue
            key = (-hit[2], hit[0], hit[1])
            if best is None or key < (-best[2], best[0], best[1]):
                best, best_pos = hit, pos
        if best is None:
            break  # nothing left to anchor; further rounds would only count i up
        row, rs, length = best
        seg = segments[best_pos]
        pieces = []
        if rs > seg.start:
            pieces.append(Segment(seg.start, rs))
        claim = Segment(rs, rs + length, row, True)
        pieces.append(claim)
        if rs + length < seg.end:
            pieces.append(Segment(rs + length, seg.end))
        segments[best_pos : best_pos + 1] = pieces
        # merge with touching selected neighbours that carry the same row
        k = segments.index(claim)
        if k + 1 < len(segments) and segments[k + 1].selected and segments[k + 1].selected_row == row:
            claim.end = segments[k + 1].end
            del segments[k + 1]
            merged = True
        if k > 0 and segments[k - 1].selected and segments[k - 1].selected_row == row:
            segments[k - 1].end = claim.end
            del segments[k]
            merged = True
        if not merged:
            i += 1
    return segments


def _merge_unselected(segments: list[Segment]) -> list[Segment]:
    out: list[Segment] = []
    for seg in segments:
        if out and not seg.selected and not out[-1].selected:
            out[-1] = Segment(out[-1].start, seg.end)
        else:
            out.append(seg)
    return out


def splice_segments(A: BinaryTrustMatrix, config: BudgetConfig) -> list[Segment]:
    """Run both phases and return the final partition of ``[0, T)``."""
    M, T = A.shape
    config.check_feasible(T)
    segments = _merge_unselected(_anchor_phase(A, config))
    if not any(s.selected for s in segments):
        row = int(np.argmax(A.values.sum(axis=1)))
        return [Segment(0, T, row, True)]
    V = A.values
    filled = []
    for k, seg in enumerate(segments):
        if seg.selected:
            filled.append(seg)
            continue
        left = segments[k - 1] if k > 0 else None
        right = segments[k + 1] if k + 1 < len(segments) else None
        left_sum = right_sum = 0
        choice = None
        if left is not None:
            left_sum = int(V[left.selected_row, seg.start : seg.end].sum())
            choice = left.selected_row
        if right is not None:
            right_sum = int(V[right.selected_row, seg.start : seg.end].sum())
            # strict: the left neighbour keeps ties
            if choice is None or right_sum > left_sum:
                choice = right.selected_row
        filled.append(Segment(seg.start, seg.end, choice, False))
    return filled


def splice_select(A: BinaryTrustMatrix, config: BudgetConfig) -> SelectionPlan:
    assignment = np.empty(A.shape[1], dtype=np.int64)
    for seg in splice_segments(A, config):
        assignment[seg.start : seg.end] = seg.selected_row
    return SelectionPlan.from_assignment(assignment, A)
