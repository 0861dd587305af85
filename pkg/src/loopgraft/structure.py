"""PDB structure parsing, archive fetch with disk cache, and Cα traces.

Legacy fixed-column PDB format only. One residue per distinct
(chain, seq_num, insertion_code); alternate locations are resolved to the
highest-occupancy conformer; only the first MODEL of multi-model files is
read; HETATM records (waters included) are dropped.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from . import config


class PdbParseError(Exception):
    pass


class NoAtomsError(PdbParseError):
    """Input contained no parsable ATOM record."""


class MalformedRecordError(PdbParseError):
    """One or more ATOM lines were too short to carry coordinates."""

    def __init__(self, line_numbers: list[int]):
        self.line_numbers = line_numbers
        shown = ", ".join(str(n) for n in line_numbers[:20])
        super().__init__(f"malformed ATOM record(s) at line(s): {shown}")


class UnknownChainError(KeyError):
    pass


class NotFoundError(Exception):
    """Archive returned HTTP 404 for the requested entry."""


class NetworkFailureError(Exception):
    """Transport-level failure after exhausting retries."""


@dataclass(frozen=True)
class Atom:
    name: str
    element: str
    position: np.ndarray  # (3,) in Angstrom
    b_factor: float = 0.0
    occupancy: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))


@dataclass
class Residue:
    seq_num: int
    insertion_code: str  # "" when absent
    name: str
    atoms: list[Atom] = field(default_factory=list)

    @property
    def key(self) -> tuple[int, str]:
        return (self.seq_num, self.insertion_code)

    def atom(self, name: str) -> Atom | None:
        for a in self.atoms:
            if a.name == name:
                return a
        return None


@dataclass
class Chain:
    id: str
    residues: list[Residue] = field(default_factory=list)


@dataclass
class Structure:
    pdb_id: str
    chains: list[Chain]
    source: str = "file"  # "file" | "remote-fetch"

    def chain(self, chain_id: str) -> Chain:
        for c in self.chains:
            if c.id == chain_id:
                return c
        raise UnknownChainError(chain_id)

    def ca_trace(self, chain_id: str) -> "CaTrace":
        return ca_trace(self, chain_id)


@dataclass
class CaTrace:
    chain_id: str
    positions: np.ndarray  # (n, 3)
    residue_keys: list[tuple[int, str]]
    # chain residue index (position within Chain.residues) per trace point;
    # lets downstream modules map segment indices onto trace rows.
    chain_indices: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.residue_keys)

    def rows_for_chain_range(self, start_index: int, end_index: int) -> list[int]:
        """Trace rows whose source residue index lies in [start, end]."""
        return [r for r, ci in enumerate(self.chain_indices) if start_index <= ci <= end_index]


_WATER_NAMES = {"HOH", "WAT", "DOD"}


def parse_pdb(data: bytes | str, pdb_id: str = "XXXX", source: str = "file") -> Structure:
    """Parse ATOM records of a legacy PDB file into a Structure.

    Raises NoAtomsError when nothing parses and MalformedRecordError (with
    line numbers) when an ATOM line is shorter than the coordinate columns.
    """
    if isinstance(data, bytes):
        text = data.decode("ascii", errors="replace")
    else:
        text = data

    chains: list[Chain] = []
    chain_by_id: dict[str, Chain] = {}
    residue_by_key: dict[tuple[str, int, str], Residue] = {}
    # altloc resolution: (chain, seq, icode, atom name) -> (occupancy, insert order)
    best_alt: dict[tuple[str, int, str, str], tuple[float, int]] = {}
    malformed: list[int] = []
    in_first_model = True
    order = 0

    for lineno, line in enumerate(text.splitlines(), start=1):
        rec = line[:6]
        if rec.startswith("MODEL"):
            try:
                in_first_model = int(line[10:14]) <= 1
            except ValueError:
                in_first_model = False
            continue
        if rec.startswith("ENDMDL"):
            in_first_model = False
            continue
        if not in_first_model:
            continue
        if rec == "HETATM":
            continue  # waters and all other het groups dropped
        if not rec.startswith("ATOM"):
            continue

        if len(line.rstrip("\n")) < 54:
            malformed.append(lineno)
            continue
        try:
            name = line[12:16].strip()
            res_name = line[17:20].strip()
            chain_id = line[21]
            seq_num = int(line[22:26])
            icode = line[26].strip()
            pos = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError:
            malformed.append(lineno)
            continue
        if res_name in _WATER_NAMES:
            continue
        occupancy = _float_col(line, 54, 60, 1.0)
        b_factor = _float_col(line, 60, 66, 0.0)
        element = line[76:78].strip() if len(line) >= 78 else ""
        if not element and name:
            element = name[0]

        if chain_id not in chain_by_id:
            chain = Chain(id=chain_id)
            chain_by_id[chain_id] = chain
            chains.append(chain)
        chain = chain_by_id[chain_id]

        rkey = (chain_id, seq_num, icode)
        if rkey not in residue_by_key:
            residue = Residue(seq_num=seq_num, insertion_code=icode, name=res_name)
            residue_by_key[rkey] = residue
            chain.residues.append(residue)
        residue = residue_by_key[rkey]

        atom = Atom(name=name, element=element, position=np.array(pos),
                    b_factor=b_factor, occupancy=occupancy)
        akey = (chain_id, seq_num, icode, name)
        prev = best_alt.get(akey)
        if prev is None:
            best_alt[akey] = (occupancy, order)
            residue.atoms.append(atom)
        elif occupancy > prev[0]:
            # replace the stored conformer, keeping its slot in the residue
            best_alt[akey] = (occupancy, prev[1])
            for i, a in enumerate(residue.atoms):
                if a.name == name:
                    residue.atoms[i] = atom
                    break
        order += 1

    if malformed:
        raise MalformedRecordError(malformed)
    if not residue_by_key:
        raise NoAtomsError("no parsable ATOM record in input")

    for chain in chains:
        chain.residues.sort(key=lambda r: (r.seq_num, r.insertion_code))
    return Structure(pdb_id=pdb_id.lower(), chains=chains, source=source)


def _float_col(line: str, start: int, end: int, default: float) -> float:
    raw = line[start:end].strip() if len(line) >= end else ""
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError:
        return default


def serialize_pdb(structure: Structure, b_factor_override=None) -> str:
    """Write ATOM/TER records for the retained subset of a Structure.

    `b_factor_override` maps (chain_id, residue key) -> value; used by the
    grafting module to export the origin mask in the B-factor column.
    """
    lines = []
    serial = 1
    for chain in structure.chains:
        for residue in chain.residues:
            for atom in residue.atoms:
                b = atom.b_factor
                if b_factor_override is not None:
                    b = b_factor_override.get((chain.id, residue.key), b)
                name = atom.name if len(atom.name) >= 4 else f" {atom.name:<3s}"
                lines.append(
                    "ATOM  {serial:5d} {name:4s} {res:<3s} {ch}{seq:4d}{icode:1s}   "
                    "{x:8.3f}{y:8.3f}{z:8.3f}{occ:6.2f}{b:6.2f}          {el:>2s}".format(
                        serial=serial % 100000, name=name, res=residue.name,
                        ch=chain.id, seq=residue.seq_num,
                        icode=residue.insertion_code or " ",
                        x=atom.position[0], y=atom.position[1], z=atom.position[2],
                        occ=atom.occupancy, b=b, el=atom.element[:2],
                    )
                )
                serial += 1
        lines.append("TER")
    lines.append("END")
    return "\n".join(lines) + "\n"


_ID_RE = re.compile(r"^[0-9][A-Za-z0-9]{3}$")
_fetch_locks: dict[str, threading.Lock] = {}
_fetch_locks_guard = threading.Lock()


def _lock_for(pdb_id: str) -> threading.Lock:
    with _fetch_locks_guard:
        return _fetch_locks.setdefault(pdb_id, threading.Lock())


def fetch_structure(
    pdb_id: str,
    cache_dir: Path | None = None,
    base_url: str | None = None,
    retries: int | None = None,
) -> Structure:
    """Download (or reuse the cached copy of) a PDB-format entry and parse it.

    Cache keys are lowercase ids, so "1ISP" and "1isp" share one file.
    """
    pdb_id = pdb_id.lower()
    if not _ID_RE.match(pdb_id):
        raise ValueError(f"not a valid PDB id: {pdb_id!r}")
    cache = Path(cache_dir) if cache_dir is not None else config.cache_dir()
    base = (base_url or config.archive_url()).rstrip("/")
    attempts = retries if retries is not None else config.fetch_retries()

    path = cache / f"{pdb_id}.pdb"
    if not path.exists():
        with _lock_for(pdb_id):
            if not path.exists():
                body = _download(f"{base}/{pdb_id.upper()}.pdb", attempts)
                cache.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".pdb.tmp")
                tmp.write_bytes(body)
                tmp.replace(path)
    return parse_pdb(path.read_bytes(), pdb_id=pdb_id, source="remote-fetch")


def _download(url: str, attempts: int) -> bytes:
    last_error: Exception | None = None
    for attempt in range(max(1, attempts)):
        try:
            resp = requests.get(url, timeout=60)
        except requests.RequestException as exc:
            last_error = exc
            time.sleep(min(2.0, 0.2 * (attempt + 1)))
            continue
        if resp.status_code == 404:
            raise NotFoundError(url)
        if resp.status_code != 200:
            last_error = RuntimeError(f"HTTP {resp.status_code} from {url}")
            time.sleep(min(2.0, 0.2 * (attempt + 1)))
            continue
        return resp.content
    raise NetworkFailureError(f"failed to download {url}: {last_error}")


def ca_trace(structure: Structure, chain_id: str) -> CaTrace:
    """Cα positions of one chain, order preserved; residues lacking a Cα are
    skipped (their keys simply do not appear)."""
    chain = structure.chain(chain_id)
    positions = []
    keys = []
    chain_indices = []
    for idx, residue in enumerate(chain.residues):
        ca = residue.atom("CA")
        if ca is None:
            continue
        positions.append(ca.position)
        keys.append(residue.key)
        chain_indices.append(idx)
    pos = np.array(positions, dtype=float) if positions else np.zeros((0, 3))
    return CaTrace(chain_id=chain_id, positions=pos, residue_keys=keys,
                   chain_indices=chain_indices)
