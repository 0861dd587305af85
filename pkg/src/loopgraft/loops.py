"""Loop derivation from secondary-structure segments, custom loops, and the
three-state triage of Scaffold loops."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .secondary import RangeOutOfChainError, Segment, SSAssignment, segments_of


class LoopError(Exception):
    pass


class TooFewSegmentsError(LoopError):
    pass


class NoAperiodicContentError(LoopError):
    pass


class UnknownLoopError(KeyError):
    pass


class TriageState(str, enum.Enum):
    CANDIDATE = "candidate"
    PRESERVED = "preserved"
    UNSUITABLE = "unsuitable"


@dataclass(frozen=True)
class Loop:
    id: str  # "{PDBID}_{chain}_{first residue seq num}"
    ordinal: int  # extraction-order alias, 1-based (display id)
    ss1: Segment
    coil: Segment  # aperiodic span; may be empty (end < start)
    ss2: Segment
    custom: bool = False

    @property
    def start_index(self) -> int:
        return self.ss1.start_index

    @property
    def end_index(self) -> int:
        return self.ss2.end_index

    def residue_indices(self) -> list[int]:
        return list(range(self.start_index, self.end_index + 1))

    def periodic_indices(self) -> list[int]:
        return (list(range(self.ss1.start_index, self.ss1.end_index + 1))
                + list(range(self.ss2.start_index, self.ss2.end_index + 1)))

    def coil_indices(self) -> list[int]:
        if self.coil.empty:
            return []
        return list(range(self.coil.start_index, self.coil.end_index + 1))


def _chain_breaks(assignment: SSAssignment) -> set[int]:
    """Indices i such that the backbone is broken between i and i+1
    (residue numbering jumps by more than one: the in-between residues,
    and their Calphas, are absent from the model)."""
    breaks = set()
    keys = assignment.residue_keys
    for i in range(len(keys) - 1):
        if keys[i + 1][0] - keys[i][0] > 1 and not keys[i + 1][1] and not keys[i][1]:
            breaks.add(i)
    return breaks


def _loop_id(pdb_id: str, chain_id: str, assignment: SSAssignment, start_index: int) -> str:
    seq = assignment.residue_keys[start_index][0] if assignment.residue_keys else start_index
    return f"{pdb_id.upper()}_{chain_id}_{seq}"


def extract_loops(assignment: SSAssignment, pdb_id: str, chain_id: str) -> list[Loop]:
    """One loop per consecutive pair of periodic segments.

    Pairs whose span crosses a chain break are not formed.
    """
    periodic = [s for s in segments_of(assignment) if s.ss_class.periodic]
    if len(periodic) < 2:
        raise TooFewSegmentsError(
            f"need >= 2 periodic segments, found {len(periodic)}")
    breaks = _chain_breaks(assignment)
    loops: list[Loop] = []
    ordinal = 1
    for ss1, ss2 in zip(periodic, periodic[1:]):
        if any(ss1.end_index <= b < ss2.start_index for b in breaks):
            continue
        coil = Segment(ss_class=assignment.classes[ss1.end_index + 1]
                       if ss1.end_index + 1 < ss2.start_index else ss1.ss_class,
                       start_index=ss1.end_index + 1,
                       end_index=ss2.start_index - 1)
        loops.append(Loop(
            id=_loop_id(pdb_id, chain_id, assignment, ss1.start_index),
            ordinal=ordinal, ss1=ss1, coil=coil, ss2=ss2, custom=False,
        ))
        ordinal += 1
    return loops


def define_custom_loop(assignment: SSAssignment, start_seq: int, end_seq: int,
                       pdb_id: str, chain_id: str) -> Loop:
    """User-drawn loop over an arbitrary residue range; the flanking periodic
    segments are the nearest ones overlapping or enclosing the range."""
    start = assignment.index_of_seq(start_seq)
    end = assignment.index_of_seq(end_seq)
    if start > end:
        start, end = end, start
    if not any(not assignment.classes[i].periodic for i in range(start, end + 1)):
        raise NoAperiodicContentError(
            f"range {start_seq}-{end_seq} lies fully inside periodic structure")

    segments = segments_of(assignment)
    periodic = [s for s in segments if s.ss_class.periodic]
    before = [s for s in periodic if s.start_index <= start]
    after = [s for s in periodic if s.end_index >= end]
    ss1 = before[-1] if before else Segment(assignment.classes[start], start, start)
    ss2 = after[0] if after else Segment(assignment.classes[end], end, end)
    coil = Segment(ss_class=assignment.classes[min(ss1.end_index + 1, len(assignment) - 1)],
                   start_index=ss1.end_index + 1, end_index=ss2.start_index - 1)
    return Loop(
        id=_loop_id(pdb_id, chain_id, assignment, ss1.start_index) + "c",
        ordinal=0, ss1=ss1, coil=coil, ss2=ss2, custom=True,
    )


@dataclass
class LoopList:
    """Ordered loop storage with triage; unsuitable loops stay stored but are
    excluded from both the candidate and preserved views."""
    entries: dict[str, tuple[Loop, TriageState]] = field(default_factory=dict)

    @classmethod
    def from_loops(cls, loops: list[Loop]) -> "LoopList":
        return cls(entries={lp.id: (lp, TriageState.PRESERVED) for lp in loops})

    def loop(self, loop_id: str) -> Loop:
        if loop_id not in self.entries:
            raise UnknownLoopError(loop_id)
        return self.entries[loop_id][0]

    def state(self, loop_id: str) -> TriageState:
        if loop_id not in self.entries:
            raise UnknownLoopError(loop_id)
        return self.entries[loop_id][1]

    def set_triage(self, loop_id: str, state: TriageState) -> "LoopList":
        if loop_id not in self.entries:
            raise UnknownLoopError(loop_id)
        entries = dict(self.entries)
        entries[loop_id] = (entries[loop_id][0], state)
        return replace(self, entries=entries)

    def add(self, loop: Loop, state: TriageState = TriageState.PRESERVED) -> "LoopList":
        entries = dict(self.entries)
        entries[loop.id] = (loop, state)
        return replace(self, entries=entries)

    def candidates(self) -> list[Loop]:
        return [lp for lp, st in self.entries.values() if st is TriageState.CANDIDATE]

    def preserved(self) -> list[Loop]:
        return [lp for lp, st in self.entries.values() if st is TriageState.PRESERVED]

    def all_loops(self) -> list[Loop]:
        return [lp for lp, _st in self.entries.values()]

    def sorted_ids(self, key: str = "position") -> list[str]:
        loops = list(self.entries.items())
        if key == "position":
            loops.sort(key=lambda kv: kv[1][0].start_index)
        elif key == "id":
            loops.sort(key=lambda kv: kv[0])
        else:
            raise ValueError(f"unknown sort key: {key}")
        return [k for k, _ in loops]


def set_triage(loop_list: LoopList, loop_id: str, state: TriageState) -> LoopList:
    return loop_list.set_triage(loop_id, state)
