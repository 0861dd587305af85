"""Loop splicing: boundary-variant enumeration, Kabsch superposition on
anchor Calphas, surrogate scoring, and the external-scorer adapter."""

from __future__ import annotations

import itertools
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .structure import Atom, Chain, Residue, Structure, serialize_pdb

CLASH_DISTANCE = 2.5      # Angstrom, heavy-atom pairs
CLASH_SEQ_SEPARATION = 2  # minimum residue separation for a pair to count
DEFAULT_ANCHOR_LEN = 3


class GraftError(Exception):
    pass


class DegenerateRangeError(GraftError):
    pass


class MissingAnchorAtomsError(GraftError):
    pass


class ClippedAnchorError(GraftError):
    pass


class MissingScoreKeyError(GraftError):
    pass


class AdapterLaunchFailure(GraftError):
    pass


class AdapterParseFailure(GraftError):
    pass


class AdapterTimeout(GraftError):
    pass


@dataclass(frozen=True)
class GraftPair:
    scaffold_loop_id: str
    insert_loop_id: str
    scaffold_start: int  # residue seq numbers, inclusive
    scaffold_end: int
    insert_start: int
    insert_end: int


@dataclass(frozen=True)
class GraftSpec:
    pairs: tuple[GraftPair, ...]
    anchor_len: int = DEFAULT_ANCHOR_LEN


@dataclass
class Junction:
    """Reference geometry for one graft boundary.

    anchor RMSD is computed by re-fitting the insert's original Calphas onto
    the live grafted residues and measuring how far the (re-transformed)
    insert anchors land from the scaffold anchors.  This tracks rigid motion
    of the grafted fragment and the quality of the anchor superposition."""
    insert_anchor_ca: np.ndarray   # (2k, 3) original insert anchor coords
    insert_range_ca: np.ndarray    # (m, 3) original insert range coords
    grafted_indices: list[int]     # chimera residue indices of the range
    scaffold_anchor_indices: list[int]  # chimera indices of the anchors


@dataclass
class ChimericModel:
    structure: Structure
    chain_id: str
    origin_mask: list[str]  # per residue: "scaffold" | "grafted"
    spec: GraftSpec
    junctions: list[Junction] = field(default_factory=list)
    baseline_clashes: int = 0
    scores: dict[str, float] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.structure.chain(self.chain_id).residues)


@dataclass(frozen=True)
class ScoreReport:
    anchor_rmsd: float
    clash_count: int
    composite: float
    external: dict[str, float] = field(default_factory=dict)


def kabsch_rotation(moving: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares rotation R and translation t with R @ moving_i + t ~ target_i."""
    mc = moving.mean(axis=0)
    tc = target.mean(axis=0)
    h = (moving - mc).T @ (target - tc)
    u, _s, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    corr = np.diag([1.0, 1.0, d])
    r = vt.T @ corr @ u.T
    t = tc - r @ mc
    return r, t


def rmsd(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.sum((a - b) ** 2, axis=-1))))


def enumerate_variants(base: GraftSpec, scaffold_chain: Chain, insert_chain: Chain,
                       window: int = 3) -> list[GraftSpec]:
    """All boundary offsets in [-window, +window] applied independently per
    pair, clipped to chain bounds; variants whose clipping empties a range
    are dropped. Deterministic order."""
    if window < 0:
        raise ValueError("window must be >= 0")
    s_nums = [r.seq_num for r in scaffold_chain.residues]
    i_nums = [r.seq_num for r in insert_chain.residues]
    s_lo, s_hi = min(s_nums), max(s_nums)
    i_lo, i_hi = min(i_nums), max(i_nums)

    for pair in base.pairs:
        if pair.scaffold_start > pair.scaffold_end or pair.insert_start > pair.insert_end:
            raise DegenerateRangeError(f"base range degenerate: {pair}")

    per_pair_variants: list[list[GraftPair]] = []
    offs = range(-window, window + 1)
    for pair in base.pairs:
        variants = []
        for ds, de, dis, die in itertools.product(offs, offs, offs, offs):
            ss = max(s_lo, pair.scaffold_start + ds)
            se = min(s_hi, pair.scaffold_end + de)
            istart = max(i_lo, pair.insert_start + dis)
            iend = min(i_hi, pair.insert_end + die)
            if ss > se or istart > iend:
                continue
            variants.append(replace(pair, scaffold_start=ss, scaffold_end=se,
                                    insert_start=istart, insert_end=iend))
        # clipping can fold distinct offsets onto one range; keep unique
        seen = set()
        unique = []
        for v in variants:
            key = (v.scaffold_start, v.scaffold_end, v.insert_start, v.insert_end)
            if key not in seen:
                seen.add(key)
                unique.append(v)
        per_pair_variants.append(unique)

    specs = []
    for combo in itertools.product(*per_pair_variants):
        if _scaffold_ranges_overlap(combo):
            continue
        specs.append(GraftSpec(pairs=tuple(combo), anchor_len=base.anchor_len))
    return specs


def _scaffold_ranges_overlap(pairs) -> bool:
    spans = sorted((p.scaffold_start, p.scaffold_end) for p in pairs)
    return any(spans[i][1] >= spans[i + 1][0] for i in range(len(spans) - 1))


def _seq_index(chain: Chain, seq_num: int) -> int:
    for i, r in enumerate(chain.residues):
        if r.seq_num == seq_num and not r.insertion_code:
            return i
    raise DegenerateRangeError(f"residue {seq_num} not in chain {chain.id}")


def _anchor_ca(chain: Chain, indices: list[int]) -> np.ndarray:
    pts = []
    for i in indices:
        ca = chain.residues[i].atom("CA")
        if ca is None:
            raise MissingAnchorAtomsError(
                f"residue {chain.residues[i].seq_num} in chain {chain.id} has no CA")
        pts.append(ca.position)
    return np.array(pts)


def splice(scaffold: Structure, insert: Structure, spec: GraftSpec,
           scaffold_chain_id: str, insert_chain_id: str) -> ChimericModel:
    """Replace each paired scaffold range with the Kabsch-superposed insert
    range; residues are renumbered sequentially from 1."""
    s_chain = scaffold.chain(scaffold_chain_id)
    i_chain = insert.chain(insert_chain_id)
    k = spec.anchor_len

    # resolve ranges to chain indices and validate anchors first
    resolved = []
    for pair in spec.pairs:
        s0, s1 = _seq_index(s_chain, pair.scaffold_start), _seq_index(s_chain, pair.scaffold_end)
        i0, i1 = _seq_index(i_chain, pair.insert_start), _seq_index(i_chain, pair.insert_end)
        if s0 - k < 0 or s1 + k >= len(s_chain.residues):
            raise ClippedAnchorError(f"scaffold anchors extend past chain ends for {pair}")
        if i0 - k < 0 or i1 + k >= len(i_chain.residues):
            raise ClippedAnchorError(f"insert anchors extend past chain ends for {pair}")
        resolved.append((pair, s0, s1, i0, i1))
    resolved.sort(key=lambda t: t[1])

    residues: list[Residue] = []
    origin_mask: list[str] = []
    scaffold_chimera_index: dict[int, int] = {}  # scaffold chain idx -> chimera idx
    pending: list[tuple[np.ndarray, np.ndarray, list[int], list[int]]] = []
    cursor = 0

    def _append_scaffold(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            scaffold_chimera_index[i] = len(residues)
            residues.append(_copy_residue(s_chain.residues[i]))
            origin_mask.append("scaffold")

    for _pair, s0, s1, i0, i1 in resolved:
        s_anchor_idx = list(range(s0 - k, s0)) + list(range(s1 + 1, s1 + 1 + k))
        i_anchor_idx = list(range(i0 - k, i0)) + list(range(i1 + 1, i1 + 1 + k))
        s_anchor = _anchor_ca(s_chain, s_anchor_idx)
        i_anchor = _anchor_ca(i_chain, i_anchor_idx)
        i_range = _anchor_ca(i_chain, list(range(i0, i1 + 1)))
        r, t = kabsch_rotation(i_anchor, s_anchor)

        _append_scaffold(cursor, s0)
        grafted_indices = []
        for i in range(i0, i1 + 1):
            grafted_indices.append(len(residues))
            residues.append(_transform_residue(i_chain.residues[i], r, t))
            origin_mask.append("grafted")
        cursor = s1 + 1
        pending.append((i_anchor, i_range, grafted_indices, s_anchor_idx))
    _append_scaffold(cursor, len(s_chain.residues))

    for new_num, res in enumerate(residues, start=1):
        res.seq_num = new_num
        res.insertion_code = ""

    junctions = [
        Junction(
            insert_anchor_ca=i_anchor,
            insert_range_ca=i_range,
            grafted_indices=grafted_indices,
            scaffold_anchor_indices=[scaffold_chimera_index[i] for i in s_anchor_idx],
        )
        for i_anchor, i_range, grafted_indices, s_anchor_idx in pending
    ]

    chimera = Structure(
        pdb_id=f"{scaffold.pdb_id}x{insert.pdb_id}",
        chains=[Chain(id=scaffold_chain_id, residues=residues)],
        source="file",
    )
    return ChimericModel(
        structure=chimera, chain_id=scaffold_chain_id, origin_mask=origin_mask,
        spec=spec, junctions=junctions, baseline_clashes=_clash_count(s_chain),
    )


def _copy_residue(res: Residue) -> Residue:
    return Residue(seq_num=res.seq_num, insertion_code=res.insertion_code,
                   name=res.name, atoms=list(res.atoms))


def _transform_residue(res: Residue, r: np.ndarray, t: np.ndarray) -> Residue:
    atoms = [Atom(name=a.name, element=a.element, position=r @ a.position + t,
                  b_factor=a.b_factor, occupancy=a.occupancy) for a in res.atoms]
    return Residue(seq_num=res.seq_num, insertion_code=res.insertion_code,
                   name=res.name, atoms=atoms)


def _clash_count(chain: Chain) -> int:
    """Heavy-atom pairs closer than CLASH_DISTANCE between residues at least
    CLASH_SEQ_SEPARATION apart in the chain."""
    pts = []
    res_idx = []
    for i, res in enumerate(chain.residues):
        for atom in res.atoms:
            if atom.element.upper().startswith("H"):
                continue
            pts.append(atom.position)
            res_idx.append(i)
    if not pts:
        return 0
    pts = np.array(pts)
    res_idx = np.array(res_idx)
    tree = cKDTree(pts)
    count = 0
    for a, b in tree.query_pairs(CLASH_DISTANCE):
        if abs(int(res_idx[a]) - int(res_idx[b])) >= CLASH_SEQ_SEPARATION:
            count += 1
    return count


def surrogate_score(model: ChimericModel) -> ScoreReport:
    """Anchor RMSD over junction Calphas plus a baseline-subtracted clash
    count; composite = anchor_rmsd + 0.5 * clash_count."""
    chain = model.structure.chain(model.chain_id)
    deviations = []
    for junction in model.junctions:
        current_range = np.array([chain.residues[i].atom("CA").position
                                  for i in junction.grafted_indices
                                  if chain.residues[i].atom("CA") is not None])
        rows = [row for row, i in enumerate(junction.grafted_indices)
                if chain.residues[i].atom("CA") is not None]
        if not rows:
            continue
        r, t = kabsch_rotation(junction.insert_range_ca[rows], current_range)
        landed = junction.insert_anchor_ca @ r.T + t
        current_anchor = np.array([chain.residues[i].atom("CA").position
                                   for i in junction.scaffold_anchor_indices])
        deviations.extend(np.sum((landed - current_anchor) ** 2, axis=1))
    anchor_rmsd = float(np.sqrt(np.mean(deviations))) if deviations else 0.0
    clashes = max(0, _clash_count(chain) - model.baseline_clashes)
    report = ScoreReport(
        anchor_rmsd=anchor_rmsd,
        clash_count=clashes,
        composite=anchor_rmsd + 0.5 * clashes,
        external=dict(model.scores),
    )
    model.scores.setdefault("composite", report.composite)
    model.scores["composite"] = report.composite
    return report


@dataclass(frozen=True)
class AdapterConfig:
    command: str  # invoked as `command <pdb-path>`
    timeout: float = 600.0


def external_score(model: ChimericModel, adapter: AdapterConfig) -> dict[str, float]:
    """Run the configured scorer on the exported model; expects `NAME VALUE`
    lines on stdout, exit 0. Parsed scores are merged into model.scores."""
    with tempfile.TemporaryDirectory(prefix="loopgraft-") as tmp:
        path = Path(tmp) / "model.pdb"
        path.write_text(export_pdb(model))
        cmd = shlex.split(adapter.command) + [str(path)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True,
                                  timeout=adapter.timeout)
        except subprocess.TimeoutExpired as exc:
            raise AdapterTimeout(str(exc)) from exc
        except OSError as exc:
            raise AdapterLaunchFailure(str(exc)) from exc
    if proc.returncode != 0:
        raise AdapterLaunchFailure(f"adapter exited {proc.returncode}: {proc.stderr[:500]}")
    scores: dict[str, float] = {}
    for line in proc.stdout.splitlines():
        parts = line.split()
        if len(parts) == 2:
            try:
                scores[parts[0]] = float(parts[1])
            except ValueError:
                continue
    if not scores:
        raise AdapterParseFailure(f"no NAME VALUE line in adapter output: {proc.stdout[:500]}")
    model.scores.update(scores)
    return scores


def export_pdb(model: ChimericModel) -> str:
    """Legacy-PDB text with the origin mask in the B-factor column
    (0 = scaffold, 1 = grafted)."""
    chain = model.structure.chain(model.chain_id)
    override = {(model.chain_id, res.key): (1.0 if origin == "grafted" else 0.0)
                for res, origin in zip(chain.residues, model.origin_mask)}
    return serialize_pdb(model.structure, b_factor_override=override)


def origin_table(model: ChimericModel) -> list[tuple[int, str]]:
    chain = model.structure.chain(model.chain_id)
    return [(res.seq_num, origin) for res, origin in zip(chain.residues, model.origin_mask)]


def rank_models(models: list[ChimericModel], key: str = "composite") -> list[ChimericModel]:
    """Stable ascending sort by the selected score key."""
    for m in models:
        if key not in m.scores:
            raise MissingScoreKeyError(f"model lacks score {key!r}")
    return sorted(models, key=lambda m: m.scores[key])
