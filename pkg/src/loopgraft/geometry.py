"""ArchDB-style loop geometry descriptors and scaffold/insert pairing.

Descriptors per loop: D (coil endpoint distance), delta (first axis vs the
endpoint connector), theta (angle between flank axes), rho (rotation of the
second axis about the first, 0-360 with wraparound).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .loops import Loop
from .secondary import Segment
from .structure import CaTrace


class GeometryError(Exception):
    pass


class DegenerateSegmentError(GeometryError):
    """Fewer than two distinct Calpha positions: no axis can be fit."""


class EmptyInsertSetError(GeometryError):
    pass


@dataclass(frozen=True)
class LoopGeometry:
    D: float        # Angstrom
    delta: float    # degrees, [0, 180]
    theta: float    # degrees, [0, 180]
    rho: float      # degrees, [0, 360)


@dataclass(frozen=True)
class GeometryDelta:
    dD: float
    dDelta: float
    dTheta: float
    dRho: float  # circular: min(|r1-r2|, 360-|r1-r2|)


@dataclass(frozen=True)
class PairSuggestion:
    scaffold_loop_id: str
    insert_loop_id: str
    score: float
    components: GeometryDelta
    is_default: bool = False


def fit_segment_axis(segment: Segment, trace: CaTrace) -> tuple[np.ndarray, np.ndarray]:
    """Principal axis of the segment's Calpha set, oriented N->C.

    Returns (unit direction, centroid).
    """
    rows = trace.rows_for_chain_range(segment.start_index, segment.end_index)
    pts = trace.positions[rows]
    if len(pts) < 2:
        raise DegenerateSegmentError(f"segment {segment} has {len(pts)} Calpha(s)")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered
    w, v = np.linalg.eigh(cov)
    if w[-1] < 1e-12:
        raise DegenerateSegmentError("all Calpha positions coincide")
    axis = v[:, -1]
    if np.dot(axis, pts[-1] - pts[0]) < 0:
        axis = -axis
    return axis / np.linalg.norm(axis), centroid


def _coil_endpoints(loop: Loop, trace: CaTrace) -> tuple[np.ndarray, np.ndarray]:
    """Terminal Calphas of the coil; for an empty coil, the abutting Calphas
    of the flanking segments."""
    if loop.coil.empty:
        rows1 = trace.rows_for_chain_range(loop.ss1.start_index, loop.ss1.end_index)
        rows2 = trace.rows_for_chain_range(loop.ss2.start_index, loop.ss2.end_index)
        if not rows1 or not rows2:
            raise DegenerateSegmentError("empty coil with no flanking Calphas")
        return trace.positions[rows1[-1]], trace.positions[rows2[0]]
    rows = trace.rows_for_chain_range(loop.coil.start_index, loop.coil.end_index)
    if not rows:
        raise DegenerateSegmentError("coil span has no Calpha")
    return trace.positions[rows[0]], trace.positions[rows[-1]]


def compute_descriptors(loop: Loop, trace: CaTrace) -> LoopGeometry:
    m1, _ = fit_segment_axis(loop.ss1, trace)
    m2, _ = fit_segment_axis(loop.ss2, trace)
    p1, p2 = _coil_endpoints(loop, trace)

    D = float(np.linalg.norm(p2 - p1))
    theta = _angle_deg(m1, m2)

    if D > 1e-9:
        u = (p2 - p1) / D
    else:
        # coincident endpoints: fall back to the inter-centroid direction
        _, c1 = fit_segment_axis(loop.ss1, trace)
        _, c2 = fit_segment_axis(loop.ss2, trace)
        gap = c2 - c1
        u = gap / np.linalg.norm(gap) if np.linalg.norm(gap) > 1e-9 else m1

    delta = _angle_deg(m1, u)
    rho = _meridian_deg(m1, u, m2)
    return LoopGeometry(D=D, delta=delta, theta=theta, rho=rho)


def _angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    cosv = float(np.clip(np.dot(a, b), -1.0, 1.0))
    return float(np.degrees(np.arccos(cosv)))


def _meridian_deg(m1: np.ndarray, u: np.ndarray, m2: np.ndarray) -> float:
    """Rotation of m2 about the m1 axis, measured from the connector's
    perpendicular component, in [0, 360)."""
    uref = u - np.dot(u, m1) * m1
    w = m2 - np.dot(m2, m1) * m1
    if np.linalg.norm(uref) < 1e-9 or np.linalg.norm(w) < 1e-9:
        return 0.0
    uref /= np.linalg.norm(uref)
    w /= np.linalg.norm(w)
    sin = float(np.dot(m1, np.cross(uref, w)))
    cos = float(np.dot(uref, w))
    return float(np.degrees(np.arctan2(sin, cos)) % 360.0)


def descriptor_delta(a: LoopGeometry, b: LoopGeometry) -> GeometryDelta:
    drho = abs(a.rho - b.rho) % 360.0
    return GeometryDelta(
        dD=abs(a.D - b.D),
        dDelta=abs(a.delta - b.delta),
        dTheta=abs(a.theta - b.theta),
        dRho=min(drho, 360.0 - drho),
    )


def pair_score(d: GeometryDelta, sigma_d: float = 2.0, sigma_a: float = 60.0) -> float:
    """Dimensionless mismatch; lower is better, 0 iff identical geometry."""
    return d.dD / sigma_d + (d.dDelta + d.dTheta + d.dRho) / sigma_a


def suggest_pairs(
    candidates: list[tuple[Loop, LoopGeometry]],
    insert_loops: list[tuple[Loop, LoopGeometry]],
    sigma_d: float = 2.0,
    sigma_a: float = 60.0,
) -> list[PairSuggestion]:
    """All candidate x insert suggestions, per-candidate score-ascending, with
    a greedy one-to-one default pairing marked."""
    if not insert_loops:
        raise EmptyInsertSetError("no insert loops to pair against")

    scored: dict[tuple[str, str], tuple[float, GeometryDelta]] = {}
    for cand, cg in candidates:
        for ins, ig in insert_loops:
            delta = descriptor_delta(cg, ig)
            scored[(cand.id, ins.id)] = (pair_score(delta, sigma_d, sigma_a), delta)

    # greedy one-to-one assignment, globally score-ascending
    default: set[tuple[str, str]] = set()
    taken_c: set[str] = set()
    taken_i: set[str] = set()
    for (cid, iid), (score, _delta) in sorted(scored.items(), key=lambda kv: (kv[1][0], kv[0])):
        if cid in taken_c or iid in taken_i:
            continue
        default.add((cid, iid))
        taken_c.add(cid)
        taken_i.add(iid)

    suggestions: list[PairSuggestion] = []
    for cand, _cg in candidates:
        ranked = sorted(
            ((iid, scored[(cand.id, iid)]) for ins, _ig in insert_loops for iid in [ins.id]),
            key=lambda kv: (kv[1][0], kv[0]),
        )
        for iid, (score, delta) in ranked:
            suggestions.append(PairSuggestion(
                scaffold_loop_id=cand.id, insert_loop_id=iid, score=score,
                components=delta, is_default=(cand.id, iid) in default,
            ))
    return suggestions
