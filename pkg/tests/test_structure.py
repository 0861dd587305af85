import threading
from functools import partial
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from conftest import format_pdb, helix_loop_helix, helix_residues, residues_to_structure
from loopgraft.structure import (
    MalformedRecordError,
    NetworkFailureError,
    NoAtomsError,
    NotFoundError,
    UnknownChainError,
    ca_trace,
    fetch_structure,
    parse_pdb,
    serialize_pdb,
)


def _atom_line(serial, name, res_name, chain, seq, x, y, z,
               occ=1.00, b=10.0, element=None, altloc=" ", record="ATOM"):
    element = element or name[0]
    return (f"{record:<6}{serial:>5} {name:<4}{altloc}{res_name:<3} {chain}"
            f"{seq:>4}    {x:8.3f}{y:8.3f}{z:8.3f}{occ:6.2f}{b:6.2f}"
            f"          {element:>2}")


class TestParse:
    def test_single_atom_fixed_columns(self):
        text = _atom_line(1, "CA", "ALA", "A", 1, 1.0, 2.0, 3.0)
        s = parse_pdb(text)
        assert len(s.chains) == 1
        assert len(s.chains[0].residues) == 1
        atom = s.chains[0].residues[0].atoms[0]
        assert np.allclose(atom.position, [1.0, 2.0, 3.0])

    def test_chain_order_preserved(self):
        text = "\n".join([
            _atom_line(1, "CA", "ALA", "A", 1, 0, 0, 0),
            _atom_line(2, "CA", "ALA", "B", 1, 5, 0, 0),
        ])
        s = parse_pdb(text)
        assert [c.id for c in s.chains] == ["A", "B"]

    def test_empty_input_raises(self):
        with pytest.raises(NoAtomsError):
            parse_pdb("")

    def test_malformed_line_reports_line_numbers(self):
        text = "\n".join([
            _atom_line(1, "CA", "ALA", "A", 1, 0, 0, 0),
            "ATOM      2  CA  ALA A   2    1.0",
        ])
        with pytest.raises(MalformedRecordError) as err:
            parse_pdb(text)
        assert 2 in err.value.line_numbers

    def test_altloc_keeps_highest_occupancy(self):
        text = "\n".join([
            _atom_line(1, "CA", "SER", "A", 1, 0, 0, 0, occ=0.4, altloc="A"),
            _atom_line(2, "CA", "SER", "A", 1, 9, 9, 9, occ=0.6, altloc="B"),
        ])
        s = parse_pdb(text)
        res = s.chains[0].residues[0]
        assert len(res.atoms) == 1
        assert np.allclose(res.atoms[0].position, [9, 9, 9])

    def test_waters_and_hetatm_dropped(self):
        text = "\n".join([
            _atom_line(1, "CA", "ALA", "A", 1, 0, 0, 0),
            _atom_line(2, "O", "HOH", "A", 2, 1, 1, 1),
            _atom_line(3, "FE", "HEM", "A", 3, 2, 2, 2, record="HETATM"),
        ])
        s = parse_pdb(text)
        assert len(s.chains) == 1
        assert [r.name for r in s.chains[0].residues] == ["ALA"]

    def test_first_model_only(self):
        text = "\n".join([
            "MODEL        1",
            _atom_line(1, "CA", "ALA", "A", 1, 0, 0, 0),
            "ENDMDL",
            "MODEL        2",
            _atom_line(1, "CA", "ALA", "A", 1, 5, 5, 5),
            "ENDMDL",
        ])
        s = parse_pdb(text)
        assert len(s.chains[0].residues) == 1
        assert np.allclose(s.chains[0].residues[0].atoms[0].position, [0, 0, 0])

    def test_residues_sorted_within_chain(self):
        text = "\n".join([
            _atom_line(1, "CA", "ALA", "A", 2, 0, 0, 0),
            _atom_line(2, "CA", "GLY", "A", 1, 3, 0, 0),
        ])
        s = parse_pdb(text)
        assert [r.seq_num for r in s.chains[0].residues] == [1, 2]


class TestRoundTrip:
    @pytest.mark.parametrize("structure", [
        residues_to_structure(helix_residues(10)),
        helix_loop_helix(),
    ], ids=["helix", "helix-loop-helix"])
    def test_parse_serialize_idempotent(self, structure):
        once = parse_pdb(serialize_pdb(structure))
        twice = parse_pdb(serialize_pdb(once))
        assert len(once.chains) == len(twice.chains)
        for c1, c2 in zip(once.chains, twice.chains):
            assert len(c1.residues) == len(c2.residues)
            for r1, r2 in zip(c1.residues, c2.residues):
                assert r1.key == r2.key and r1.name == r2.name
                for a1, a2 in zip(r1.atoms, r2.atoms):
                    assert a1.name == a2.name
                    assert np.allclose(a1.position, a2.position, atol=1e-3)

    def test_parsed_atoms_sane(self):
        s = parse_pdb(format_pdb(helix_loop_helix()))
        for chain in s.chains:
            for res in chain.residues:
                for atom in res.atoms:
                    assert np.all(np.isfinite(atom.position))
                    assert atom.b_factor >= 0


class TestCaTrace:
    def test_length_and_keys(self, helix_structure):
        trace = ca_trace(helix_structure, "A")
        assert len(trace) == 12
        assert trace.positions.shape == (12, 3)

    def test_missing_ca_skipped(self):
        rds = helix_residues(4)
        del rds[2]["atoms"]["CA"]
        s = residues_to_structure(rds)
        trace = ca_trace(s, "A")
        assert len(trace) == 3
        assert (3, "") not in trace.residue_keys
        assert len(trace) <= len(s.chains[0].residues)

    def test_unknown_chain(self, helix_structure):
        with pytest.raises(UnknownChainError):
            ca_trace(helix_structure, "Z")


class _ArchiveHandler(BaseHTTPRequestHandler):
    hits = None
    payload = None

    def do_GET(self):
        type(self).hits.append(self.path)
        if self.path.lower().endswith("9mis.pdb"):
            self.send_response(404)
            self.end_headers()
            return
        self.send_response(200)
        self.end_headers()
        self.wfile.write(type(self).payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def archive_server():
    handler = type("Handler", (_ArchiveHandler,), {
        "hits": [], "payload": format_pdb(helix_loop_helix()).encode()})
    server = HTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}", handler
    server.shutdown()


class TestFetch:
    def test_fetch_and_cache(self, archive_server, tmp_path):
        url, handler = archive_server
        get = partial(fetch_structure, "1abc", cache_dir=tmp_path, base_url=url)
        s1 = get()
        assert s1.source == "remote-fetch"
        assert len(handler.hits) == 1
        s2 = get()
        assert len(handler.hits) == 1  # served from cache
        assert len(s2.chains[0].residues) == len(s1.chains[0].residues)

    def test_not_found(self, archive_server, tmp_path):
        url, _handler = archive_server
        with pytest.raises(NotFoundError):
            fetch_structure("9mis", cache_dir=tmp_path, base_url=url)

    def test_bad_id_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            fetch_structure("x", cache_dir=tmp_path, base_url="http://127.0.0.1:1")

    def test_network_failure_after_retries(self, tmp_path):
        with pytest.raises(NetworkFailureError):
            fetch_structure("1abc", cache_dir=tmp_path,
                            base_url="http://127.0.0.1:9", retries=2)
