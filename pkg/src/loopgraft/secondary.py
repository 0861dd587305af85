"""Secondary-structure assignment (simplified Kabsch-Sander) and overrides.

Only four classes are emitted: H (alpha-helix), G (3:10 helix), E
(beta-strand), C (coil). H and E count as periodic for loop extraction;
G and C as aperiodic. Amide hydrogens are placed along the preceding
residue's C=O direction when the file lacks them, the standard construction
for X-ray entries.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .structure import Chain, Structure

# Kabsch-Sander electrostatic H-bond model
_Q1Q2_F = 0.084 * 332.0  # kcal/mol * Angstrom
HBOND_CUTOFF = -0.5  # kcal/mol
MIN_HELIX_LEN = 4
MIN_STRAND_LEN = 3
_PEPTIDE_BOND_MAX = 2.5  # Angstrom; larger C(i-1)..N(i) gap = chain break


class SSError(Exception):
    pass


class MissingBackboneError(SSError):
    """Chain lacks N/CA/C/O atoms for enough consecutive residues."""


class RangeOutOfChainError(SSError):
    pass


class InvertedRangeError(SSError):
    pass


class SSClass(str, enum.Enum):
    H = "H"  # alpha-helix
    G = "G"  # 3:10 helix
    E = "E"  # beta-strand
    C = "C"  # coil

    @property
    def periodic(self) -> bool:
        return self in (SSClass.H, SSClass.E)


@dataclass
class SSAssignment:
    chain_id: str
    classes: list[SSClass]
    provenance: list[str]  # "automatic" | "manual", parallel to classes
    residue_keys: list[tuple[int, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.classes)

    def index_of_seq(self, seq_num: int) -> int:
        for i, (num, _icode) in enumerate(self.residue_keys):
            if num == seq_num:
                return i
        raise RangeOutOfChainError(f"residue {seq_num} not in chain {self.chain_id}")


@dataclass(frozen=True)
class Segment:
    ss_class: SSClass
    start_index: int
    end_index: int  # inclusive; end < start encodes an empty span

    def __len__(self) -> int:
        return max(0, self.end_index - self.start_index + 1)

    @property
    def empty(self) -> bool:
        return self.end_index < self.start_index


def _backbone(chain: Chain):
    """Per-residue N/CA/C/O coordinate arrays (NaN where absent)."""
    n = len(chain.residues)
    coords = {name: np.full((n, 3), np.nan) for name in ("N", "CA", "C", "O")}
    for i, residue in enumerate(chain.residues):
        for name in ("N", "CA", "C", "O"):
            atom = residue.atom(name)
            if atom is not None:
                coords[name][i] = atom.position
    return coords


def hydrogen_bond_energy(n_i, h_i, c_j, o_j) -> float:
    """Kabsch-Sander electrostatic energy for N-H(i) donating to C=O(j)."""
    r_on = np.linalg.norm(o_j - n_i)
    r_ch = np.linalg.norm(c_j - h_i)
    r_oh = np.linalg.norm(o_j - h_i)
    r_cn = np.linalg.norm(c_j - n_i)
    if min(r_on, r_ch, r_oh, r_cn) < 1e-6:
        return 0.0
    return _Q1Q2_F * (1.0 / r_on + 1.0 / r_ch - 1.0 / r_oh - 1.0 / r_cn)


def _hbond_matrix(chain: Chain, coords) -> np.ndarray:
    """hb[i, j] True when the N-H of residue i donates to the C=O of j."""
    n = len(chain.residues)
    N, CA, C, O = coords["N"], coords["CA"], coords["C"], coords["O"]
    hb = np.zeros((n, n), dtype=bool)

    complete = ~np.isnan(N[:, 0]) & ~np.isnan(CA[:, 0]) & ~np.isnan(C[:, 0]) & ~np.isnan(O[:, 0])
    seq = [r.seq_num for r in chain.residues]
    # ideal amide H on the donor nitrogen, along the previous C=O bond
    H = np.full((n, 3), np.nan)
    for i in range(1, n):
        if not (complete[i] and complete[i - 1]):
            continue
        if seq[i] - seq[i - 1] != 1:
            continue  # numbering gap: broken backbone
        if np.linalg.norm(C[i - 1] - N[i]) > _PEPTIDE_BOND_MAX:
            continue
        co = C[i - 1] - O[i - 1]
        norm = np.linalg.norm(co)
        if norm > 1e-9:
            H[i] = N[i] + co / norm

    for i in range(n):  # donor
        if chain.residues[i].name == "PRO":
            continue  # proline has no amide hydrogen
        if np.isnan(H[i, 0]):
            continue
        for j in range(n):  # acceptor
            if abs(i - j) < 2 or not complete[j]:
                continue
            if np.linalg.norm(CA[i] - CA[j]) > 9.0:
                continue
            e = hydrogen_bond_energy(N[i], H[i], C[j], O[j])
            if e < HBOND_CUTOFF:
                hb[i, j] = True
    return hb


def assign_secondary_structure(structure: Structure, chain_id: str) -> SSAssignment:
    """Automatic per-residue assignment from backbone hydrogen bonding."""
    chain = structure.chain(chain_id)
    coords = _backbone(chain)
    complete = ~np.isnan(coords["N"][:, 0]) & ~np.isnan(coords["O"][:, 0])
    run, best = 0, 0
    for flag in complete:
        run = run + 1 if flag else 0
        best = max(best, run)
    if best < 5:
        raise MissingBackboneError(
            f"chain {chain_id}: need N/CA/C/O for >= 5 consecutive residues")

    n = len(chain.residues)
    hb = _hbond_matrix(chain, coords)

    # n-turns: turn_k[i] True when the NH of i+k bonds back to the CO of i
    turn4 = np.array([i + 4 < n and hb[i + 4, i] for i in range(n)])
    turn3 = np.array([i + 3 < n and hb[i + 3, i] for i in range(n)])

    is_h = np.zeros(n, dtype=bool)
    is_g = np.zeros(n, dtype=bool)
    for i in range(n - 1):
        if turn4[i] and turn4[i + 1]:
            is_h[i + 1:i + 5] = True
        if turn3[i] and turn3[i + 1]:
            is_g[i + 1:i + 4] = True

    is_e = np.zeros(n, dtype=bool)
    for i in range(n):
        for j in range(i + 3, n):
            parallel = False
            if i >= 1 and i + 1 < n:
                parallel = hb[j, i - 1] and hb[i + 1, j]
            if not parallel and j >= 1 and j + 1 < n:
                parallel = hb[i, j - 1] and hb[j + 1, i]
            anti = hb[i, j] and hb[j, i]
            if not anti and i >= 1 and j + 1 < n:
                anti = hb[j + 1, i - 1] and hb[i + 1, j - 1]
            if parallel or anti:
                is_e[i] = True
                is_e[j] = True

    classes = []
    for i in range(n):
        if is_h[i]:
            classes.append(SSClass.H)
        elif is_e[i]:
            classes.append(SSClass.E)
        elif is_g[i]:
            classes.append(SSClass.G)
        else:
            classes.append(SSClass.C)

    _prune_short_runs(classes, SSClass.H, MIN_HELIX_LEN)
    _prune_short_runs(classes, SSClass.E, MIN_STRAND_LEN)

    return SSAssignment(
        chain_id=chain_id,
        classes=classes,
        provenance=["automatic"] * n,
        residue_keys=[r.key for r in chain.residues],
    )


def _prune_short_runs(classes: list[SSClass], ss: SSClass, min_len: int) -> None:
    i = 0
    n = len(classes)
    while i < n:
        if classes[i] is ss:
            j = i
            while j < n and classes[j] is ss:
                j += 1
            if j - i < min_len:
                for k in range(i, j):
                    classes[k] = SSClass.C
            i = j
        else:
            i += 1


def reassign_region(assignment: SSAssignment, start_seq: int, end_seq: int,
                    new_class: SSClass) -> SSAssignment:
    """Expert override of a residue range; returns a new assignment."""
    if start_seq > end_seq:
        raise InvertedRangeError(f"{start_seq} > {end_seq}")
    start = assignment.index_of_seq(start_seq)
    end = assignment.index_of_seq(end_seq)
    classes = list(assignment.classes)
    provenance = list(assignment.provenance)
    for i in range(start, end + 1):
        classes[i] = new_class
        provenance[i] = "manual"
    return SSAssignment(chain_id=assignment.chain_id, classes=classes,
                        provenance=provenance, residue_keys=list(assignment.residue_keys))


def segments_of(assignment: SSAssignment) -> list[Segment]:
    """Maximal-run decomposition; segments tile the chain."""
    segments: list[Segment] = []
    classes = assignment.classes
    if not classes:
        return segments
    start = 0
    for i in range(1, len(classes) + 1):
        if i == len(classes) or classes[i] is not classes[start]:
            segments.append(Segment(ss_class=classes[start], start_index=start, end_index=i - 1))
            start = i
    return segments
