"""HTTP/JSON service over the session manager."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import grafting
from .dynamics import UnknownMetricError, method_correlation
from .loops import TriageState, UnknownLoopError
from .secondary import RangeOutOfChainError, SSClass
from .session import (
    EmptySpecsError,
    GateUnsatisfiedError,
    Phase,
    SessionManager,
    UnknownJobError,
    UnknownModelError,
    UnknownSessionError,
)
from .structure import NetworkFailureError, NotFoundError, PdbParseError


class CreateSessionBody(BaseModel):
    scaffold_id: str
    scaffold_chain: str
    insert_id: str
    insert_chain: str


class PhaseBody(BaseModel):
    phase: int


class SSOverrideBody(BaseModel):
    role: str
    start_seq: int
    end_seq: int
    ss_class: str


class TriageBody(BaseModel):
    state: str


class PairingEntry(BaseModel):
    scaffold_loop_id: str
    insert_loop_id: str
    scaffold_start: int | None = None
    scaffold_end: int | None = None
    insert_start: int | None = None
    insert_end: int | None = None


class PairingsBody(BaseModel):
    pairings: list[PairingEntry]


class GraftBody(BaseModel):
    window: int = 0


def create_app(manager: SessionManager | None = None) -> FastAPI:
    app = FastAPI(title="loopgraft")
    mgr = manager or SessionManager()
    app.state.manager = mgr

    def _session(session_id: str):
        try:
            return mgr.get(session_id)
        except UnknownSessionError:
            raise HTTPException(404, f"unknown session {session_id}")

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        try:
            session = mgr.create_session(body.scaffold_id, body.scaffold_chain,
                                         body.insert_id, body.insert_chain)
        except NotFoundError as exc:
            raise HTTPException(404, str(exc))
        except (NetworkFailureError, PdbParseError, ValueError) as exc:
            raise HTTPException(422, str(exc))
        return session.to_summary()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _session(session_id)
        with session.lock:
            out = session.to_summary()
            out["staleness"] = session.staleness()
            out["segments"] = {role: session.segments_payload(role)
                               for role in ("scaffold", "insert")}
        return out

    @app.post("/sessions/{session_id}/phase")
    def set_phase(session_id: str, body: PhaseBody):
        session = _session(session_id)
        try:
            target = Phase(body.phase)
        except ValueError:
            raise HTTPException(422, f"unknown phase {body.phase}")
        with session.lock:
            try:
                session.advance_phase(target)
            except GateUnsatisfiedError as exc:
                raise HTTPException(409, str(exc))
            return session.to_summary()

    @app.post("/sessions/{session_id}/ss-override")
    def ss_override(session_id: str, body: SSOverrideBody):
        session = _session(session_id)
        if body.role not in ("scaffold", "insert"):
            raise HTTPException(422, f"unknown role {body.role!r}")
        try:
            ss_class = SSClass(body.ss_class)
        except ValueError:
            raise HTTPException(422, f"unknown class {body.ss_class!r}")
        with session.lock:
            try:
                session.override_ss(body.role, body.start_seq,
                                    body.end_seq, ss_class)
            except RangeOutOfChainError as exc:
                raise HTTPException(422, str(exc))
            return {"segments": session.segments_payload(body.role),
                    "staleness": session.staleness()}

    @app.get("/sessions/{session_id}/loops")
    def get_loops(session_id: str):
        session = _session(session_id)
        with session.lock:
            return session.loops_payload()

    @app.post("/sessions/{session_id}/loops/{loop_id}/triage")
    def set_triage(session_id: str, loop_id: str, body: TriageBody):
        session = _session(session_id)
        try:
            state = TriageState(body.state)
        except ValueError:
            raise HTTPException(422, f"unknown triage state {body.state!r}")
        with session.lock:
            try:
                session.set_triage(loop_id, state)
            except UnknownLoopError as exc:
                raise HTTPException(404, str(exc))
            return session.loops_payload()

    @app.get("/sessions/{session_id}/geometry")
    def get_geometry(session_id: str):
        session = _session(session_id)
        with session.lock:
            payload = {}
            for role in ("scaffold", "insert"):
                payload[role] = {
                    loop_id: {"D": g.D, "delta": g.delta,
                              "theta": g.theta, "rho": g.rho}
                    for loop_id, g in session.loop_geometry(role).items()}
            payload["suggestions"] = [
                {"scaffold_loop_id": s.scaffold_loop_id,
                 "insert_loop_id": s.insert_loop_id,
                 "score": s.score,
                 "is_default": s.is_default,
                 "components": {"dD": s.components.dD,
                                "dDelta": s.components.dDelta,
                                "dTheta": s.components.dTheta,
                                "dRho": s.components.dRho}}
                for s in session.pair_suggestions()]
        return payload

    @app.get("/sessions/{session_id}/flexibility")
    def get_flexibility(session_id: str, method: str = Query("GNM"),
                        role: str = Query("scaffold")):
        session = _session(session_id)
        if role not in ("scaffold", "insert"):
            raise HTTPException(422, f"unknown role {role!r}")
        methods = [m.strip() for m in method.split(",") if m.strip()]
        with session.lock:
            try:
                profiles = {m: session.flexibility(role, m) for m in methods}
            except ValueError as exc:
                raise HTTPException(422, str(exc))
            payload = {m: {"values": list(map(float, p.values)),
                           "normalized": list(map(float, p.normalized)),
                           "flags": list(p.flags)}
                       for m, p in profiles.items()}
            if len(profiles) > 1:
                corr = method_correlation(list(profiles.values()))
                payload["correlation"] = {
                    "methods": list(corr.methods),
                    "r": [[float(v) for v in row] for row in corr.r],
                    "p": [[float(v) for v in row] for row in corr.p],
                    "low_significance": [[bool(v) for v in row]
                                         for row in corr.low_significance],
                }
        return payload

    @app.get("/sessions/{session_id}/xcorr")
    def get_xcorr(session_id: str, sort: str = Query("ss_to_coil"),
                  order: str = Query("desc")):
        session = _session(session_id)
        with session.lock:
            corr = session.xcorr()
            try:
                rows = session.xcorr_rows(metric=sort, order=order)
            except UnknownMetricError as exc:
                raise HTTPException(422, str(exc))
            pairs = {f"{a}|{b}": {"ss_corr": v.ss_corr, "loop_corr": v.loop_corr,
                                  "ss_to_coil": v.ss_to_coil}
                     for (a, b), v in corr.pairs.items()}
            candidates = [loop.id for loop in
                          session.loop_lists["scaffold"].candidates()]
        return {"rows": rows, "columns": candidates, "pairs": pairs}

    @app.post("/sessions/{session_id}/pairings")
    def post_pairings(session_id: str, body: PairingsBody):
        session = _session(session_id)
        with session.lock:
            entries = [{k: v for k, v in e.model_dump().items() if v is not None}
                       for e in body.pairings]
            try:
                session.set_pairings(entries)
            except UnknownLoopError as exc:
                raise HTTPException(422, str(exc))
            return session.to_summary()

    @app.post("/sessions/{session_id}/graft")
    def post_graft(session_id: str, body: GraftBody):
        session = _session(session_id)
        with session.lock:
            try:
                specs = session.default_graft_specs(window=body.window)
            except grafting.GraftError as exc:
                raise HTTPException(422, str(exc))
        try:
            job = mgr.submit_graft(session, specs)
        except GateUnsatisfiedError as exc:
            raise HTTPException(409, str(exc))
        except EmptySpecsError as exc:
            raise HTTPException(422, str(exc))
        return job.to_dict()

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            job = mgr.job(job_id)
        except UnknownJobError:
            raise HTTPException(404, f"unknown job {job_id}")
        out = job.to_dict()
        if job.model_ids:
            try:
                session = mgr.get(mgr._jobs[job_id])
                with session.lock:
                    out["models"] = [
                        {"id": model_id, "scores": dict(session.models[model_id].scores)}
                        for model_id in job.model_ids]
            except UnknownSessionError:
                pass
        return out

    @app.get("/models/{model_id}.pdb", response_class=PlainTextResponse)
    def get_model(model_id: str):
        try:
            model = mgr.model(model_id)
        except UnknownModelError:
            raise HTTPException(404, f"unknown model {model_id}")
        return grafting.export_pdb(model)

    return app
