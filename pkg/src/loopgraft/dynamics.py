"""Per-residue flexibility (experimental B, GNM, ANM), aggregation to
segments/loops, inter-method correlation, and motion cross-correlation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .loops import Loop
from .structure import CaTrace, Structure

GNM_CUTOFF = 10.0  # Angstrom, ProDy default
ANM_CUTOFF = 15.0
_ZERO_MODE_REL = 1e-8


class DynamicsError(Exception):
    pass


class DisconnectedContactGraphError(DynamicsError):
    pass


class IllConditionedError(DynamicsError):
    pass


class LengthMismatchError(DynamicsError):
    pass


class EmptyElementError(DynamicsError):
    pass


class UnknownMetricError(DynamicsError):
    pass


@dataclass(frozen=True)
class FlexibilityProfile:
    method: str  # "PDB_B" | "GNM" | "ANM"
    values: np.ndarray      # per residue, raw units
    normalized: np.ndarray  # min-max to [0, 1]; degenerate range -> 0.5
    flags: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ElementFlexibility:
    element_id: str
    method: str
    coarse_value: float  # weighted mean of member residues' normalized values


@dataclass(frozen=True)
class MethodCorrelation:
    methods: tuple[str, ...]
    r: np.ndarray  # Pearson coefficients
    p: np.ndarray  # two-sided significance
    low_significance: np.ndarray  # p > threshold, rendered fuzzy


@dataclass(frozen=True)
class LoopPairCorrelation:
    ss_corr: float       # periodic residues of a x periodic residues of b
    loop_corr: float     # all residues of a x all residues of b
    ss_to_coil: float    # periodic of a x coil of b


@dataclass
class MotionCorrelationSet:
    residue_matrix: np.ndarray  # n x n, C_ii = 1, symmetric
    trace: CaTrace
    loops: list[Loop] = field(default_factory=list)
    pairs: dict[tuple[str, str], LoopPairCorrelation] = field(default_factory=dict)


def _normalize(values: np.ndarray) -> np.ndarray:
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-12:
        return np.full_like(values, 0.5, dtype=float)
    return (values - lo) / (hi - lo)


def bfactor_profile(structure: Structure, chain_id: str) -> FlexibilityProfile:
    """Mean atomic B per residue (only residues that appear in the Ca trace,
    so all methods share one index space)."""
    chain = structure.chain(chain_id)
    values = []
    for residue in chain.residues:
        if residue.atom("CA") is None:
            continue
        values.append(float(np.mean([a.b_factor for a in residue.atoms])))
    arr = np.asarray(values, dtype=float)
    flags = ("missing_b_factors",) if arr.size and np.allclose(arr, 0.0) else ()
    return FlexibilityProfile(method="PDB_B", values=arr, normalized=_normalize(arr),
                              flags=flags)


def _kirchhoff(positions: np.ndarray, cutoff: float) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    gamma = np.where(dist <= cutoff, -1.0, 0.0)
    np.fill_diagonal(gamma, 0.0)
    np.fill_diagonal(gamma, -gamma.sum(axis=1))
    return gamma


def _pinv_dropping(matrix: np.ndarray, expected_zero_modes: int,
                   modes: int | None = None) -> np.ndarray:
    """Pseudo-inverse via eigendecomposition, discarding the expected number
    of near-zero modes; optionally keep only the lowest `modes` nonzero ones."""
    w, v = np.linalg.eigh(matrix)
    w_max = float(np.max(np.abs(w)))
    zero = np.abs(w) < _ZERO_MODE_REL * max(w_max, 1.0)
    n_zero = int(np.count_nonzero(zero))
    if n_zero > expected_zero_modes:
        if expected_zero_modes == 1:
            raise DisconnectedContactGraphError(
                f"{n_zero} zero modes: contact graph is disconnected")
        raise IllConditionedError(f"{n_zero} near-zero modes (expected {expected_zero_modes})")
    nonzero = np.where(~zero)[0]  # eigh returns ascending order
    if modes is not None:
        nonzero = nonzero[:modes]
    vv = v[:, nonzero]
    return (vv / w[nonzero]) @ vv.T


def gnm_fluctuations(trace: CaTrace, cutoff: float = GNM_CUTOFF) -> FlexibilityProfile:
    """Mean-square fluctuations as the diagonal of the Kirchhoff pseudo-inverse."""
    if len(trace) < 3:
        raise DynamicsError("GNM needs a trace of length >= 3")
    gamma = _kirchhoff(trace.positions, cutoff)
    values = np.diag(_pinv_dropping(gamma, expected_zero_modes=1)).copy()
    return FlexibilityProfile(method="GNM", values=values, normalized=_normalize(values))


def _anm_hessian(positions: np.ndarray, cutoff: float) -> np.ndarray:
    n = len(positions)
    hessian = np.zeros((3 * n, 3 * n))
    for i in range(n):
        for j in range(i + 1, n):
            rij = positions[j] - positions[i]
            d2 = float(rij @ rij)
            if d2 > cutoff * cutoff or d2 < 1e-12:
                continue
            block = -np.outer(rij, rij) / d2
            hessian[3 * i:3 * i + 3, 3 * j:3 * j + 3] = block
            hessian[3 * j:3 * j + 3, 3 * i:3 * i + 3] = block
            hessian[3 * i:3 * i + 3, 3 * i:3 * i + 3] -= block
            hessian[3 * j:3 * j + 3, 3 * j:3 * j + 3] -= block
    return hessian


def anm_fluctuations(trace: CaTrace, cutoff: float = ANM_CUTOFF) -> FlexibilityProfile:
    """MSF as the trace of each 3x3 diagonal block of the Hessian pseudo-inverse
    (unit spring constant, six rigid-body modes discarded)."""
    if len(trace) < 4:
        raise DynamicsError("ANM needs a trace of length >= 4")
    hessian = _anm_hessian(trace.positions, cutoff)
    hinv = _pinv_dropping(hessian, expected_zero_modes=6)
    n = len(trace)
    values = np.array([np.trace(hinv[3 * i:3 * i + 3, 3 * i:3 * i + 3]) for i in range(n)])
    return FlexibilityProfile(method="ANM", values=values, normalized=_normalize(values))


def aggregate_flexibility(
    profile: FlexibilityProfile,
    elements: list[tuple[str, list[int]]],
    weights: dict[int, float] | None = None,
) -> list[ElementFlexibility]:
    """Weighted mean of member residues' normalized values per element.

    `elements` maps element ids to trace-row indices; default weighting is
    uniform.
    """
    out = []
    for element_id, rows in elements:
        if not rows:
            raise EmptyElementError(element_id)
        if max(rows) >= len(profile) or min(rows) < 0:
            raise EmptyElementError(f"{element_id}: residue index out of range")
        w = np.array([weights.get(r, 1.0) if weights else 1.0 for r in rows])
        vals = profile.normalized[rows]
        out.append(ElementFlexibility(
            element_id=element_id, method=profile.method,
            coarse_value=float(np.sum(w * vals) / np.sum(w)),
        ))
    return out


def loop_trace_rows(loop: Loop, trace: CaTrace, part: str = "all") -> list[int]:
    """Trace rows of a loop's residues; part selects all/periodic/coil."""
    if part == "all":
        indices = loop.residue_indices()
    elif part == "periodic":
        indices = loop.periodic_indices()
    elif part == "coil":
        indices = loop.coil_indices()
    else:
        raise ValueError(part)
    if not indices:
        return []
    wanted = set(indices)
    return [r for r, ci in enumerate(trace.chain_indices) if ci in wanted]


def method_correlation(profiles: list[FlexibilityProfile],
                       significance_threshold: float = 0.5) -> MethodCorrelation:
    """Pairwise Pearson r on raw values with two-sided t-test p-values."""
    if len(profiles) < 2:
        raise DynamicsError("need at least two profiles")
    n = len(profiles[0])
    if any(len(p) != n for p in profiles):
        raise LengthMismatchError([len(p) for p in profiles])
    k = len(profiles)
    r = np.eye(k)
    p = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            xi, xj = profiles[i].values, profiles[j].values
            if np.std(xi) < 1e-12 or np.std(xj) < 1e-12:
                rij, pij = 0.0, 1.0  # ZeroVariance: r undefined, flagged via p
            else:
                rij, pij = stats.pearsonr(xi, xj)
            r[i, j] = r[j, i] = rij
            p[i, j] = p[j, i] = pij
    return MethodCorrelation(
        methods=tuple(pr.method for pr in profiles), r=r, p=p,
        low_significance=p > significance_threshold,
    )


def motion_cross_correlation(
    trace: CaTrace,
    loops: list[Loop],
    cutoff: float = GNM_CUTOFF,
    modes: int = 20,
) -> MotionCorrelationSet:
    """Normalized GNM covariance restricted to the lowest `modes` nonzero
    modes, plus signed loop-pair aggregates."""
    gamma = _kirchhoff(trace.positions, cutoff)
    cov = _pinv_dropping(gamma, expected_zero_modes=1, modes=modes)
    d = np.sqrt(np.diag(cov))
    c = cov / np.outer(d, d)
    np.fill_diagonal(c, 1.0)

    pair: dict[tuple[str, str], LoopPairCorrelation] = {}
    rows = {lp.id: {part: loop_trace_rows(lp, trace, part)
                    for part in ("all", "periodic", "coil")} for lp in loops}
    for a in loops:
        for b in loops:
            if a.id == b.id:
                continue
            pair[(a.id, b.id)] = LoopPairCorrelation(
                ss_corr=_block_mean(c, rows[a.id]["periodic"], rows[b.id]["periodic"]),
                loop_corr=_block_mean(c, rows[a.id]["all"], rows[b.id]["all"]),
                ss_to_coil=_block_mean(c, rows[a.id]["periodic"], rows[b.id]["coil"]),
            )
    return MotionCorrelationSet(residue_matrix=c, trace=trace, loops=loops, pairs=pair)


def _block_mean(c: np.ndarray, rows_a: list[int], rows_b: list[int]) -> float:
    if not rows_a or not rows_b:
        return 0.0
    return float(np.mean(c[np.ix_(rows_a, rows_b)]))


_SORT_METRICS = ("ss_corr", "loop_corr", "ss_to_coil", "position", "id")


def sort_correlation_rows(
    corr: MotionCorrelationSet,
    candidates: list[Loop],
    metric: str = "ss_to_coil",
    order: str = "desc",
) -> list[str]:
    """Row loop ids (non-candidates) sorted by the chosen metric; with several
    candidate columns the row key is the row's maximum. Stable."""
    if metric not in _SORT_METRICS:
        raise UnknownMetricError(metric)
    candidate_ids = {lp.id for lp in candidates}
    rows = [lp for lp in corr.loops if lp.id not in candidate_ids]
    if metric == "position":
        ranked = sorted(rows, key=lambda lp: lp.start_index)
    elif metric == "id":
        ranked = sorted(rows, key=lambda lp: lp.id)
    else:
        def key(lp: Loop) -> float:
            vals = [getattr(corr.pairs[(lp.id, c.id)], metric)
                    for c in candidates if (lp.id, c.id) in corr.pairs]
            return max(vals) if vals else float("-inf")
        reverse = order == "desc"
        ranked = sorted(rows, key=key, reverse=reverse)
    return [lp.id for lp in ranked]
