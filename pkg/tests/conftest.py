"""Shared fixtures and synthetic-structure builders.

The geometry builders construct full-backbone polypeptides from internal
coordinates (bond length / bond angle / torsion), which gives an independent
way to produce structures whose secondary structure, loop geometry, and
grafting behavior are known by construction.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from loopgraft.structure import Atom, Chain, Residue, Structure

FIXTURE_DIR = Path(__file__).parent / "fixtures"

# ideal backbone internal coordinates (Engh & Huber averages)
BOND_N_CA = 1.458
BOND_CA_C = 1.525
BOND_C_N = 1.329
BOND_C_O = 1.231
ANGLE_N_CA_C = 111.2
ANGLE_CA_C_N = 116.2
ANGLE_C_N_CA = 121.7
ANGLE_CA_C_O = 120.8

HELIX_PHI_PSI = (-57.0, -47.0)
STRAND_PHI_PSI = (-139.0, 135.0)
PP2_PHI_PSI = (-75.0, 145.0)  # polyproline-II-like coil


def place_atom(a: np.ndarray, b: np.ndarray, c: np.ndarray,
               length: float, angle_deg: float, torsion_deg: float) -> np.ndarray:
    """Position atom D given the three preceding atoms A-B-C, the C-D bond
    length, the B-C-D angle, and the A-B-C-D torsion (NeRF construction)."""
    angle = math.radians(angle_deg)
    torsion = math.radians(torsion_deg)
    bc = c - b
    bc /= np.linalg.norm(bc)
    n = np.cross(b - a, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    d_local = np.array([
        -length * math.cos(angle),
        length * math.sin(angle) * math.cos(torsion),
        length * math.sin(angle) * math.sin(torsion),
    ])
    return c + d_local[0] * bc + d_local[1] * m + d_local[2] * n


def build_backbone(phi_psi: list[tuple[float, float]],
                   start_seq: int = 1,
                   res_names: list[str] | None = None) -> list[dict]:
    """Full-backbone residues (N, CA, C, O) for the given torsion sequence.
    Returns a list of dicts  {name, seq_num, atoms: {atom_name: xyz}}."""
    n_res = len(phi_psi)
    names = res_names or ["ALA"] * n_res
    residues = []

    # seed the first residue in a canonical frame
    n0 = np.array([0.0, 0.0, 0.0])
    ca0 = np.array([BOND_N_CA, 0.0, 0.0])
    angle = math.radians(ANGLE_N_CA_C)
    c0 = ca0 + BOND_CA_C * np.array([-math.cos(angle), math.sin(angle), 0.0])
    coords = [{"N": n0, "CA": ca0, "C": c0}]

    for i in range(1, n_res):
        prev = coords[-1]
        psi_prev = phi_psi[i - 1][1]
        n_i = place_atom(prev["N"], prev["CA"], prev["C"],
                         BOND_C_N, ANGLE_CA_C_N, psi_prev)
        ca_i = place_atom(prev["CA"], prev["C"], n_i,
                          BOND_N_CA, ANGLE_C_N_CA, 180.0)  # omega = trans
        c_i = place_atom(prev["C"], n_i, ca_i,
                         BOND_CA_C, ANGLE_N_CA_C, phi_psi[i][0])
        coords.append({"N": n_i, "CA": ca_i, "C": c_i})

    for i, frame in enumerate(coords):
        psi = phi_psi[i][1]
        frame["O"] = place_atom(frame["N"], frame["CA"], frame["C"],
                                BOND_C_O, ANGLE_CA_C_O, psi + 180.0)
        residues.append({"name": names[i], "seq_num": start_seq + i,
                         "atoms": dict(frame)})
    return residues


def residues_to_structure(residue_dicts: list[dict], pdb_id: str = "SYNT",
                          chain_id: str = "A", b_factor: float = 10.0) -> Structure:
    residues = []
    for rd in residue_dicts:
        atoms = [Atom(name=name, element=name[0], position=np.asarray(xyz, float),
                      b_factor=rd.get("b_factor", b_factor), occupancy=1.0)
                 for name, xyz in rd["atoms"].items()]
        residues.append(Residue(seq_num=rd["seq_num"], insertion_code="",
                                name=rd["name"], atoms=atoms))
    return Structure(pdb_id=pdb_id, chains=[Chain(id=chain_id, residues=residues)],
                     source="file")


def helix_residues(n: int, start_seq: int = 1) -> list[dict]:
    return build_backbone([HELIX_PHI_PSI] * n, start_seq=start_seq)


def transform_residues(residue_dicts: list[dict], rotation: np.ndarray,
                       translation: np.ndarray) -> list[dict]:
    out = []
    for rd in residue_dicts:
        atoms = {name: rotation @ np.asarray(xyz) + translation
                 for name, xyz in rd["atoms"].items()}
        out.append({**rd, "atoms": atoms})
    return out


def rotation_about(axis: np.ndarray, angle_deg: float) -> np.ndarray:
    axis = np.asarray(axis, float)
    axis = axis / np.linalg.norm(axis)
    a = math.radians(angle_deg)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(a) * k + (1 - math.cos(a)) * (k @ k)


def sheet_residues(n_per_strand: int = 8, numbering_gap: int = 2) -> list[dict]:
    """Idealized flat antiparallel two-strand sheet.

    Residues sit on two parallel lines 4.23 A apart with carbonyls pointing
    straight across, so the expected rungs of mutual hydrogen bonds hold
    exactly; geometry is intentionally schematic (no pleat, no twist)."""
    step, d = 3.5, 4.23
    residues = []
    for i in range(n_per_strand):
        x = step * i
        o_dir = 1.0 if i % 2 == 0 else -1.0  # O points across on even i
        residues.append({"name": "ALA", "seq_num": i + 1, "atoms": {
            "N": np.array([x, 0.0, 0.0]),
            "CA": np.array([x + 1.0, 0.0, 0.0]),
            "C": np.array([x + 2.2, 0.0, 0.0]),
            "O": np.array([x + 2.2, 1.23 * o_dir, 0.0]),
        }})
    x0 = step * (n_per_strand - 1) + 2.2  # registers partner j = (n-1-i) - 1
    start2 = n_per_strand + 1 + numbering_gap
    for j in range(n_per_strand):
        x = x0 - step * j
        o_dir = 1.0 if j % 2 == 0 else -1.0  # odd j carbonyls point at strand 1
        residues.append({"name": "ALA", "seq_num": start2 + j, "atoms": {
            "N": np.array([x, d, 0.0]),
            "CA": np.array([x - 1.0, d, 0.0]),
            "C": np.array([x - 2.2, d, 0.0]),
            "O": np.array([x - 2.2, d + 1.23 * o_dir, 0.0]),
        }})
    return residues


def helix_loop_helix(n_helix: int = 8, coil_phi_psi: list | None = None,
                     start_seq: int = 1, pdb_id: str = "SYNT") -> Structure:
    """Helix - short coil - helix: the canonical extractable loop."""
    coil = coil_phi_psi or [PP2_PHI_PSI, (-80.0, 80.0), (60.0, 40.0), PP2_PHI_PSI]
    torsions = ([HELIX_PHI_PSI] * n_helix) + coil + ([HELIX_PHI_PSI] * n_helix)
    return residues_to_structure(build_backbone(torsions, start_seq=start_seq),
                                 pdb_id=pdb_id)


def format_pdb(structure: Structure) -> str:
    from loopgraft.structure import serialize_pdb

    return serialize_pdb(structure)


def load_archive_fixture(pdb_id: str) -> Structure | None:
    """Real archive entries are not redistributable with the repository; they
    are looked up in tests/fixtures/rcsb/ and then in the configured cache."""
    from loopgraft import config
    from loopgraft.structure import parse_pdb

    for directory in (FIXTURE_DIR / "rcsb", Path(config.cache_dir())):
        path = directory / f"{pdb_id.lower()}.pdb"
        if path.exists():
            return parse_pdb(path.read_text(), pdb_id=pdb_id.upper())
    return None


def require_archive_fixture(pdb_id: str) -> Structure:
    structure = load_archive_fixture(pdb_id)
    if structure is None:
        pytest.fail(
            f"PDB entry {pdb_id} is required for this criterion but is not "
            f"available: this environment has no route to the public archive "
            f"(only a package-manager mirror is reachable). Place the entry at "
            f"tests/fixtures/rcsb/{pdb_id.lower()}.pdb to run it.",
            pytrace=False,
        )
    return structure


@pytest.fixture
def helix_structure() -> Structure:
    return residues_to_structure(helix_residues(12))


@pytest.fixture
def hlh_structure() -> Structure:
    return helix_loop_helix()
