import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    HELIX_PHI_PSI,
    PP2_PHI_PSI,
    build_backbone,
    helix_loop_helix,
    helix_residues,
    residues_to_structure,
    sheet_residues,
)
from loopgraft.secondary import (
    MissingBackboneError,
    RangeOutOfChainError,
    SSAssignment,
    SSClass,
    assign_secondary_structure,
    hydrogen_bond_energy,
    reassign_region,
    segments_of,
)


def classes_string(assignment: SSAssignment) -> str:
    return "".join(c.value for c in assignment.classes)


class TestHBondEnergy:
    def test_textbook_linear_bond(self):
        # N-H...O=C colinear: H 1 A from N, O 2 A beyond H, C 1.23 beyond O
        n = np.array([0.0, 0.0, 0.0])
        h = np.array([1.0, 0.0, 0.0])
        o = np.array([3.0, 0.0, 0.0])
        c = np.array([4.23, 0.0, 0.0])
        q = 0.084 * 332
        expected = q * (1 / 3.0 + 1 / 3.23 - 1 / 2.0 - 1 / 4.23)
        assert hydrogen_bond_energy(n, h, c, o) == pytest.approx(expected)
        assert expected < -0.5  # a real bond under the cutoff

    def test_distant_pair_is_weak(self):
        n = np.array([0.0, 0.0, 0.0])
        h = np.array([1.0, 0.0, 0.0])
        o = np.array([20.0, 0.0, 0.0])
        c = np.array([21.23, 0.0, 0.0])
        assert hydrogen_bond_energy(n, h, c, o) > -0.5


class TestAssignment:
    def test_ideal_helix_is_h(self, helix_structure):
        a = assign_secondary_structure(helix_structure, "A")
        s = classes_string(a)
        assert "HHHH" in s
        assert s.count("H") >= 8
        assert all(p == "automatic" for p in a.provenance)

    def test_antiparallel_sheet_is_e(self):
        s = residues_to_structure(sheet_residues(8))
        a = assign_secondary_structure(s, "A")
        text = classes_string(a)
        assert "EEE" in text
        assert text.count("E") >= 8

    def test_coil_only(self):
        s = residues_to_structure(build_backbone([PP2_PHI_PSI] * 10))
        a = assign_secondary_structure(s, "A")
        assert set(classes_string(a)) == {"C"}

    def test_short_helix_pruned(self):
        # too few residues to sustain a >= 4-long helix run
        torsions = [PP2_PHI_PSI] * 4 + [HELIX_PHI_PSI] * 5 + [PP2_PHI_PSI] * 4
        s = residues_to_structure(build_backbone(torsions))
        a = assign_secondary_structure(s, "A")
        text = classes_string(a)
        for run_char, min_len in (("H", 4), ("E", 3)):
            run = 0
            for ch in text + "C":
                if ch == run_char:
                    run += 1
                else:
                    assert run == 0 or run >= min_len
                    run = 0

    def test_numbering_gap_blocks_donation(self):
        from loopgraft.secondary import _backbone, _hbond_matrix

        intact = residues_to_structure(helix_residues(12)).chains[0]
        hb_intact = _hbond_matrix(intact, _backbone(intact))

        rds = helix_residues(12)
        for rd in rds[6:]:
            rd["seq_num"] += 5  # gap in author numbering = broken backbone
        broken = residues_to_structure(rds).chains[0]
        hb_broken = _hbond_matrix(broken, _backbone(broken))

        # the residue right after the break has no defined amide hydrogen
        assert hb_intact[6].any()
        assert not hb_broken[6].any()

    def test_missing_backbone_raises(self):
        rds = helix_residues(12)
        for rd in rds:
            rd["atoms"] = {"CA": rd["atoms"]["CA"]}
        s = residues_to_structure(rds)
        with pytest.raises(MissingBackboneError):
            assign_secondary_structure(s, "A")

    def test_proline_cannot_donate(self):
        rds = helix_residues(12)
        plain = assign_secondary_structure(residues_to_structure(rds), "A")
        for rd in rds:
            rd["name"] = "PRO"
        allpro = assign_secondary_structure(residues_to_structure(rds), "A")
        assert classes_string(allpro) == "C" * 12
        assert classes_string(plain).count("H") >= 8


class TestReassign:
    def test_manual_provenance_and_split(self, helix_structure):
        a = assign_secondary_structure(helix_structure, "A")
        b = reassign_region(a, 6, 7, SSClass.C)  # seq numbers -> indices 5, 6
        assert b.classes[5] is SSClass.C and b.classes[6] is SSClass.C
        assert b.provenance[5] == "manual" and b.provenance[4] == "automatic"
        assert a.classes[5] is not SSClass.C  # original untouched

    def test_idempotent(self, helix_structure):
        a = assign_secondary_structure(helix_structure, "A")
        once = reassign_region(a, 2, 4, SSClass.E)
        twice = reassign_region(once, 2, 4, SSClass.E)
        assert classes_string(once) == classes_string(twice)
        assert once.provenance == twice.provenance

    def test_range_checks(self, helix_structure):
        a = assign_secondary_structure(helix_structure, "A")
        with pytest.raises(RangeOutOfChainError):
            reassign_region(a, 5, 99, SSClass.C)
        with pytest.raises(Exception):
            reassign_region(a, 6, 5, SSClass.C)


class TestSegments:
    def _assignment(self, text: str) -> SSAssignment:
        return SSAssignment(chain_id="A",
                            classes=[SSClass(c) for c in text],
                            provenance=["automatic"] * len(text),
                            residue_keys=[(i + 1, "") for i in range(len(text))])

    def test_example_runs(self):
        segs = segments_of(self._assignment("HHHCCEE"))
        assert [(s.ss_class.value, s.start_index, s.end_index) for s in segs] == [
            ("H", 0, 2), ("C", 3, 4), ("E", 5, 6)]

    def test_uniform_single_segment(self):
        segs = segments_of(self._assignment("CCCC"))
        assert len(segs) == 1

    def test_reassign_middle_splits(self):
        a = self._assignment("HHHHHHH")
        b = reassign_region(a, 3, 3, SSClass.C)
        assert [s.ss_class.value for s in segments_of(b)] == ["H", "C", "H"]

    @given(st.text(alphabet="HGEC", min_size=1, max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_tiling_property(self, text):
        segs = segments_of(self._assignment(text))
        flattened = "".join(s.ss_class.value * len(s) for s in segs)
        assert flattened == text
        for s1, s2 in zip(segs, segs[1:]):
            assert s1.ss_class != s2.ss_class
            assert s2.start_index == s1.end_index + 1
        assert segs[0].start_index == 0
        assert segs[-1].end_index == len(text) - 1


class TestDeterminism:
    def test_assignment_is_deterministic(self):
        s = helix_loop_helix()
        a1 = assign_secondary_structure(s, "A")
        a2 = assign_secondary_structure(s, "A")
        assert classes_string(a1) == classes_string(a2)
