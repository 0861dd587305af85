"""Phase-gated session state machine, persistence, and background jobs.

A Session tracks one scaffold/insert protein pair through the six workflow
phases.  Mutations bump per-layer revision counters; derived results remember
the revisions they were computed from, so anything downstream of an edit is
reported stale and its phase reverts to incomplete.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from dataclasses import dataclass, field
from enum import IntEnum

from . import config, geometry, grafting, loops as loops_mod
from .dynamics import (
    FlexibilityProfile,
    MotionCorrelationSet,
    anm_fluctuations,
    bfactor_profile,
    gnm_fluctuations,
    motion_cross_correlation,
    sort_correlation_rows,
)
from .loops import LoopList, TriageState, extract_loops
from .secondary import SSAssignment, SSClass, assign_secondary_structure, reassign_region, segments_of
from .structure import CaTrace, Structure, fetch_structure

SCHEMA_VERSION = 1

ROLES = ("scaffold", "insert")

# upstream layer -> layers invalidated by an edit to it
_DOWNSTREAM = {
    "ss": ("loops", "flexibility", "xcorr", "geometry", "pairings", "models"),
    "loops": ("flexibility", "xcorr", "geometry", "pairings", "models"),
    "triage": ("geometry", "pairings", "models"),
    "pairings": ("models",),
}


class Phase(IntEnum):
    P1 = 1  # protein selection / SS curation
    P2 = 2  # loop exploration
    P3 = 3  # flexibility analysis
    P4 = 4  # motion cross-correlation
    P5 = 5  # loop pairing
    P6 = 6  # grafting


class SessionError(Exception):
    pass


class GateUnsatisfiedError(SessionError):
    pass


class EmptySpecsError(SessionError):
    pass


class UnknownSessionError(SessionError):
    pass


class UnknownJobError(SessionError):
    pass


class UnknownModelError(SessionError):
    pass


class SchemaVersionMismatchError(SessionError):
    pass


@dataclass
class Job:
    id: str
    kind: str  # "grafting" | "dynamics"
    state: str = "queued"  # queued -> running -> done | failed
    progress: float = 0.0
    model_ids: list[str] = field(default_factory=list)
    error: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "state": self.state,
                "progress": self.progress, "model_ids": list(self.model_ids),
                "error": self.error}


@dataclass
class _Derived:
    """A cached derived result plus the revision snapshot it was built from."""
    value: object
    revs: dict[str, int]


class Session:
    def __init__(self, session_id: str,
                 scaffold_id: str, scaffold_chain: str,
                 insert_id: str, insert_chain: str,
                 structures: dict[str, Structure]):
        self.id = session_id
        self.ids = {"scaffold": (scaffold_id, scaffold_chain),
                    "insert": (insert_id, insert_chain)}
        self.structures = structures  # role -> Structure
        self.phase = Phase.P1
        self.phase_completion: dict[int, bool] = {p.value: False for p in Phase}
        self.revs = {"ss": 0, "loops": 0, "triage": 0, "pairings": 0}
        self.assignments: dict[str, SSAssignment] = {}
        self.loop_lists: dict[str, LoopList] = {}
        self.pairings: list[dict] = []  # {scaffold_loop_id, insert_loop_id, ranges...}
        self.models: dict[str, grafting.ChimericModel] = {}
        self.jobs: dict[str, Job] = {}
        self._cache: dict[str, _Derived] = {}
        self._stale: set[str] = set()
        self.lock = threading.RLock()

        for role in ROLES:
            chain_id = self.ids[role][1]
            self.assignments[role] = assign_secondary_structure(
                self.structures[role], chain_id)
            self._extract_loops(role)
        self.phase_completion[Phase.P1] = True

    # -- helpers ------------------------------------------------------------

    def chain_id(self, role: str) -> str:
        return self.ids[role][1]

    def trace(self, role: str) -> CaTrace:
        return self.structures[role].ca_trace(self.chain_id(role))

    def _extract_loops(self, role: str) -> None:
        pdb_id, chain_id = self.ids[role]
        extracted = extract_loops(self.assignments[role], pdb_id, chain_id)
        self.loop_lists[role] = LoopList.from_loops(extracted)

    def _snapshot(self, *layers: str) -> dict[str, int]:
        return {layer: self.revs[layer] for layer in layers}

    def _bump(self, layer: str) -> None:
        self.revs[layer] += 1
        phase_of = {"flexibility": Phase.P3, "xcorr": Phase.P4,
                    "pairings": Phase.P5, "models": Phase.P6}
        for downstream in _DOWNSTREAM.get(layer, ()):
            had_results = (any(key.startswith(downstream) for key in self._cache)
                           or (downstream == "pairings" and self.pairings)
                           or (downstream == "models" and self.models))
            for key in list(self._cache):
                if key.startswith(downstream):
                    del self._cache[key]
            if had_results:
                self._stale.add(downstream)
            p = phase_of.get(downstream)
            if p is not None and had_results:
                self.phase_completion[p.value] = False
        if layer == "pairings" and not self.pairings:
            self.phase_completion[Phase.P5] = False

    def _fresh(self, key: str, layers: tuple[str, ...]):
        hit = self._cache.get(key)
        if hit is not None and hit.revs == self._snapshot(*layers):
            return hit.value
        return None

    def _store(self, key: str, layers: tuple[str, ...], value):
        self._cache[key] = _Derived(value=value, revs=self._snapshot(*layers))
        self._stale.discard(key.split(":", 1)[0])
        return value

    # -- staleness report ----------------------------------------------------

    def staleness(self) -> dict[str, bool]:
        """Which derived layers are out of date with respect to their inputs."""
        layers = ("loops", "flexibility", "xcorr", "geometry", "pairings", "models")
        return {layer: layer in self._stale for layer in layers}

    # -- phase machine --------------------------------------------------------

    def gate_reason(self, to_phase: Phase) -> str | None:
        """Why `to_phase` is unreachable, or None if it is reachable.
        A pure function of session state."""
        if to_phase <= self.phase:
            return None
        if to_phase >= Phase.P5 and not self.loop_lists["scaffold"].candidates():
            return "phase P5 requires at least one candidate loop"
        if to_phase >= Phase.P6 and not self.pairings:
            return "phase P6 requires at least one confirmed pairing"
        return None

    def _enforce_gates(self) -> None:
        """Demote the current phase if an edit removed what its gate required."""
        if self.phase >= Phase.P6 and not self.pairings:
            self.phase = Phase.P5
        if self.phase >= Phase.P5 and not self.loop_lists["scaffold"].candidates():
            self.phase = Phase.P4

    def advance_phase(self, to_phase: Phase) -> None:
        reason = self.gate_reason(to_phase)
        if reason:
            raise GateUnsatisfiedError(reason)
        if to_phase < self.phase:
            self.phase = to_phase
            return
        for p in range(self.phase.value, to_phase.value):
            self.phase_completion[p] = True
        self.phase = to_phase

    # -- mutations -------------------------------------------------------------

    def override_ss(self, role: str, start_seq: int, end_seq: int,
                    new_class: SSClass) -> None:
        self.assignments[role] = reassign_region(
            self.assignments[role], start_seq, end_seq, new_class)
        self._bump("ss")
        # loop extraction is derived from SS: redo it, preserving triage where
        # loop ids survive
        old = self.loop_lists[role]
        self._extract_loops(role)
        new_list = self.loop_lists[role]
        for loop_id in new_list.sorted_ids("id"):
            try:
                state = old.state(loop_id)
            except loops_mod.UnknownLoopError:
                continue
            new_list = new_list.set_triage(loop_id, state)
        self.loop_lists[role] = new_list
        self._bump("loops")
        self._stale.discard("loops")  # re-extracted just above
        self.pairings = [p for p in self.pairings
                         if self._pairing_valid(p)]
        self._bump("pairings")
        self._enforce_gates()

    def _pairing_valid(self, pairing: dict) -> bool:
        try:
            self.loop_lists["scaffold"].loop(pairing["scaffold_loop_id"])
            self.loop_lists["insert"].loop(pairing["insert_loop_id"])
        except loops_mod.UnknownLoopError:
            return False
        return True

    def set_triage(self, loop_id: str, state: TriageState) -> None:
        self.loop_lists["scaffold"] = self.loop_lists["scaffold"].set_triage(
            loop_id, state)
        self._bump("triage")
        before = len(self.pairings)
        if state is not TriageState.CANDIDATE:
            self.pairings = [p for p in self.pairings
                             if p["scaffold_loop_id"] != loop_id]
        if len(self.pairings) != before:
            self._bump("pairings")
        self._enforce_gates()

    def set_pairings(self, pairings: list[dict]) -> None:
        for p in pairings:
            if not self._pairing_valid(p):
                raise loops_mod.UnknownLoopError(
                    f"pairing references unknown loop: {p}")
        self.pairings = list(pairings)
        self._bump("pairings")
        self._stale.discard("pairings")
        self.phase_completion[Phase.P5] = bool(pairings)
        self._enforce_gates()

    # -- derived results ---------------------------------------------------------

    def flexibility(self, role: str, method: str) -> FlexibilityProfile:
        key = f"flexibility:{role}:{method}"
        hit = self._fresh(key, ("ss", "loops"))
        if hit is not None:
            return hit
        trace = self.trace(role)
        if method == "PDB_B":
            profile = bfactor_profile(self.structures[role], self.chain_id(role))
        elif method == "GNM":
            profile = gnm_fluctuations(trace)
        elif method == "ANM":
            profile = anm_fluctuations(trace)
        else:
            raise ValueError(f"unknown flexibility method {method!r}")
        return self._store(key, ("ss", "loops"), profile)

    def xcorr(self) -> MotionCorrelationSet:
        key = "xcorr:scaffold"
        hit = self._fresh(key, ("ss", "loops"))
        if hit is not None:
            return hit
        trace = self.trace("scaffold")
        all_loops = self.loop_lists["scaffold"].all_loops()
        result = motion_cross_correlation(trace, all_loops)
        return self._store(key, ("ss", "loops"), result)

    def xcorr_rows(self, metric: str = "ss_to_coil", order: str = "desc") -> list[str]:
        corr = self.xcorr()
        candidates = self.loop_lists["scaffold"].candidates()
        return sort_correlation_rows(corr, candidates, metric=metric, order=order)

    def loop_geometry(self, role: str) -> dict[str, geometry.LoopGeometry]:
        key = f"geometry:{role}"
        hit = self._fresh(key, ("ss", "loops"))
        if hit is not None:
            return hit
        trace = self.trace(role)
        out = {}
        for loop in self.loop_lists[role].all_loops():
            try:
                out[loop.id] = geometry.compute_descriptors(loop, trace)
            except geometry.DegenerateSegmentError:
                continue
        return self._store(key, ("ss", "loops"), out)

    def pair_suggestions(self) -> list[geometry.PairSuggestion]:
        key = "pairings:suggestions"
        hit = self._fresh(key, ("ss", "loops", "triage"))
        if hit is not None:
            return hit
        sg = self.loop_geometry("scaffold")
        ig = self.loop_geometry("insert")
        cands = [(loop, sg[loop.id]) for loop in
                 self.loop_lists["scaffold"].candidates() if loop.id in sg]
        inserts = [(loop, ig[loop.id]) for loop in
                   self.loop_lists["insert"].all_loops() if loop.id in ig]
        if not cands or not inserts:
            suggestions: list[geometry.PairSuggestion] = []
        else:
            suggestions = geometry.suggest_pairs(cands, inserts)
        return self._store(key, ("ss", "loops", "triage"), suggestions)

    # -- grafting -------------------------------------------------------------

    def default_graft_specs(self, window: int = 0) -> list[grafting.GraftSpec]:
        """Graft specs from the confirmed pairings; each pairing's ranges are
        the paired loops' coil spans unless explicit ranges were supplied."""
        pairs = []
        s_chain = self.structures["scaffold"].chain(self.chain_id("scaffold"))
        i_chain = self.structures["insert"].chain(self.chain_id("insert"))
        for p in self.pairings:
            s_loop = self.loop_lists["scaffold"].loop(p["scaffold_loop_id"])
            i_loop = self.loop_lists["insert"].loop(p["insert_loop_id"])
            s_res = s_chain.residues
            i_res = i_chain.residues
            s_span = s_loop.coil_indices() or s_loop.residue_indices()
            i_span = i_loop.coil_indices() or i_loop.residue_indices()
            pairs.append(grafting.GraftPair(
                scaffold_loop_id=s_loop.id, insert_loop_id=i_loop.id,
                scaffold_start=p.get("scaffold_start", s_res[s_span[0]].seq_num),
                scaffold_end=p.get("scaffold_end", s_res[s_span[-1]].seq_num),
                insert_start=p.get("insert_start", i_res[i_span[0]].seq_num),
                insert_end=p.get("insert_end", i_res[i_span[-1]].seq_num),
            ))
        base = grafting.GraftSpec(pairs=tuple(pairs))
        if window == 0:
            return [base]
        return grafting.enumerate_variants(base, s_chain, i_chain, window=window)

    def run_graft_specs(self, specs: list[grafting.GraftSpec], job: Job) -> None:
        """Executed on a worker thread; models appear incrementally."""
        total = len(specs)
        done = 0
        for spec in specs:
            try:
                model = grafting.splice(
                    self.structures["scaffold"], self.structures["insert"],
                    spec, self.chain_id("scaffold"), self.chain_id("insert"))
                grafting.surrogate_score(model)
            except grafting.GraftError:
                done += 1
                job.progress = done / total
                continue
            model_id = uuid.uuid4().hex[:12]
            with self.lock:
                self.models[model_id] = model
                job.model_ids.append(model_id)
            done += 1
            job.progress = done / total
        with self.lock:
            self.phase_completion[Phase.P6] = bool(job.model_ids)
            if job.model_ids:
                self._stale.discard("models")

    # -- persistence -------------------------------------------------------------

    def to_document(self) -> dict:
        def assignment_doc(role):
            a = self.assignments[role]
            return {"classes": "".join(c.value for c in a.classes),
                    "provenance": [p for p in a.provenance]}

        return {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "scaffold": {"pdb_id": self.ids["scaffold"][0],
                         "chain": self.ids["scaffold"][1]},
            "insert": {"pdb_id": self.ids["insert"][0],
                       "chain": self.ids["insert"][1]},
            "phase": self.phase.value,
            "phase_completion": {str(k): v for k, v in self.phase_completion.items()},
            "assignments": {role: assignment_doc(role) for role in ROLES},
            "triage": {loop_id: self.loop_lists["scaffold"].state(loop_id).value
                       for loop_id in self.loop_lists["scaffold"].sorted_ids("id")},
            "pairings": self.pairings,
        }

    def save(self) -> bytes:
        return json.dumps(self.to_document(), indent=1).encode()

    def apply_document(self, doc: dict) -> None:
        for role in ROLES:
            stored = doc.get("assignments", {}).get(role)
            if stored is None:
                continue
            classes = [SSClass(c) for c in stored["classes"]]
            current = self.assignments[role]
            if len(classes) == len(current.classes):
                self.assignments[role] = SSAssignment(
                    chain_id=current.chain_id, classes=classes,
                    provenance=list(stored.get("provenance",
                                               ["automatic"] * len(classes))),
                    residue_keys=current.residue_keys)
                self._extract_loops(role)
        scaffold = self.loop_lists["scaffold"]
        for loop_id, state in doc.get("triage", {}).items():
            try:
                scaffold = scaffold.set_triage(loop_id, TriageState(state))
            except loops_mod.UnknownLoopError:
                continue
        self.loop_lists["scaffold"] = scaffold
        self.pairings = [p for p in doc.get("pairings", [])
                         if self._pairing_valid(p)]
        self.phase = Phase(doc.get("phase", 1))
        for k, v in doc.get("phase_completion", {}).items():
            self.phase_completion[int(k)] = bool(v)

    # -- views -----------------------------------------------------------------

    def to_summary(self) -> dict:
        return {
            "id": self.id,
            "scaffold": {"pdb_id": self.ids["scaffold"][0],
                         "chain": self.ids["scaffold"][1]},
            "insert": {"pdb_id": self.ids["insert"][0],
                       "chain": self.ids["insert"][1]},
            "phase": self.phase.value,
            "phase_completion": {str(k): v for k, v in self.phase_completion.items()},
            "pairings": self.pairings,
            "jobs": [job.to_dict() for job in self.jobs.values()],
            "model_ids": sorted(self.models),
        }

    def segments_payload(self, role: str) -> list[dict]:
        a = self.assignments[role]
        return [{"ss_class": seg.ss_class.value, "start_index": seg.start_index,
                 "end_index": seg.end_index} for seg in segments_of(a)]

    def loops_payload(self) -> dict:
        def one(role):
            out = []
            ll = self.loop_lists[role]
            for loop in ll.all_loops():
                entry = {
                    "id": loop.id,
                    "ordinal": loop.ordinal,
                    "custom": loop.custom,
                    "start_index": loop.start_index,
                    "end_index": loop.end_index,
                    "coil": {"start_index": loop.coil.start_index,
                             "end_index": loop.coil.end_index},
                }
                if role == "scaffold":
                    entry["triage"] = ll.state(loop.id).value
                out.append(entry)
            return out
        return {role: one(role) for role in ROLES}


def parse_document(data: bytes) -> dict:
    try:
        doc = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaVersionMismatchError(f"unreadable session file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"expected schema_version {SCHEMA_VERSION}, "
            f"got {doc.get('schema_version') if isinstance(doc, dict) else type(doc)}")
    return doc


class SessionManager:
    """Holds live sessions; serializes mutations per session and runs graft
    jobs on a per-session FIFO worker."""

    def __init__(self, loader=None):
        self._sessions: dict[str, Session] = {}
        self._queues: dict[str, queue.Queue] = {}
        self._workers: dict[str, threading.Thread] = {}
        self._models: dict[str, tuple[str, str]] = {}  # model_id -> (session, model)
        self._jobs: dict[str, str] = {}  # job_id -> session_id
        self._lock = threading.Lock()
        self._loader = loader or _default_loader

    def create_session(self, scaffold_id: str, scaffold_chain: str,
                       insert_id: str, insert_chain: str) -> Session:
        structures = {
            "scaffold": self._loader(scaffold_id),
            "insert": self._loader(insert_id),
        }
        session = Session(uuid.uuid4().hex[:12], scaffold_id, scaffold_chain,
                          insert_id, insert_chain, structures)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def load_session(self, data: bytes) -> Session:
        doc = parse_document(data)
        session = self.create_session(
            doc["scaffold"]["pdb_id"], doc["scaffold"]["chain"],
            doc["insert"]["pdb_id"], doc["insert"]["chain"])
        with session.lock:
            session.apply_document(doc)
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def submit_graft(self, session: Session, specs: list[grafting.GraftSpec]) -> Job:
        if session.phase != Phase.P6:
            raise GateUnsatisfiedError("graft jobs require phase P6")
        if not specs:
            raise EmptySpecsError("no graft specs supplied")
        job = Job(id=uuid.uuid4().hex[:12], kind="grafting")
        with session.lock:
            session.jobs[job.id] = job
        with self._lock:
            self._jobs[job.id] = session.id
            q = self._queues.setdefault(session.id, queue.Queue())
            q.put((job, specs))
            if session.id not in self._workers or not self._workers[session.id].is_alive():
                worker = threading.Thread(target=self._drain, args=(session, q),
                                          daemon=True)
                self._workers[session.id] = worker
                worker.start()
        return job

    def _drain(self, session: Session, q: queue.Queue) -> None:
        while True:
            try:
                job, specs = q.get(timeout=1.0)
            except queue.Empty:
                return
            job.state = "running"
            try:
                session.run_graft_specs(specs, job)
                job.state = "done"
                job.progress = 1.0
            except Exception as exc:  # job must never crash the worker
                job.state = "failed"
                job.error = str(exc)
            finally:
                q.task_done()

    def job(self, job_id: str) -> Job:
        with self._lock:
            session_id = self._jobs.get(job_id)
        if session_id is None:
            raise UnknownJobError(job_id)
        return self.get(session_id).jobs[job_id]

    def model(self, model_id: str) -> grafting.ChimericModel:
        for session in list(self._sessions.values()):
            if model_id in session.models:
                return session.models[model_id]
        raise UnknownModelError(model_id)


def _default_loader(pdb_id: str) -> Structure:
    return fetch_structure(pdb_id, cache_dir=config.cache_dir(),
                           base_url=config.archive_url(),
                           retries=config.fetch_retries())
