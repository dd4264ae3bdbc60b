import json

import numpy as np
import pytest

from superdense import bases, serialize
from superdense import protocol as pr
from superdense import rigidity as rg
from superdense.cli import main


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestRoundTrip:
    def test_basis_exact(self, tmp_path):
        b = bases.clock_shift_basis(4)
        path = str(tmp_path / "b.json")
        serialize.save_basis(b, path)
        loaded = serialize.load_basis(path)
        assert loaded.d == 4 and loaded.labels == b.labels
        for a, c in zip(loaded.elements, b.elements):
            assert np.array_equal(a, c)

    def test_protocol_exact(self, tmp_path):
        p, _ = pr.random_scrambled_bw(np.random.default_rng(1), 2, 2, 2)
        path = str(tmp_path / "p.json")
        serialize.save_protocol(p, path)
        loaded = serialize.load_protocol(path)
        assert loaded.dims == p.dims
        assert np.array_equal(loaded.tau, p.tau)
        for a, c in zip(loaded.encoders, p.encoders):
            assert np.array_equal(a, c)

    def test_decomposition_exact(self, tmp_path):
        _, dec = pr.random_scrambled_bw(np.random.default_rng(2), 3, 2, 2)
        path = str(tmp_path / "dec.json")
        serialize.save_decomposition(dec, path)
        loaded = serialize.load_decomposition(path)
        assert np.array_equal(loaded.v, dec.v)
        assert np.array_equal(loaded.w, dec.w)
        assert np.array_equal(loaded.rho, dec.rho)
        for (p1, s1, g1), (p2, s2, g2) in zip(loaded.blocks, dec.blocks):
            assert np.array_equal(p1, p2) and np.array_equal(s1, s2) and g1 == g2

    def test_eigenvalue_csv(self, tmp_path):
        path = str(tmp_path / "esd.csv")
        vals = [2.5, 1.0, 0.5, 0.0]
        serialize.save_eigenvalues_csv(vals, path)
        text = read(path).decode()
        assert text.splitlines()[0] == "eigenvalue"
        assert len(text.splitlines()) == 5
        assert serialize.load_eigenvalues_csv(path) == vals

    def test_malformed_inputs(self, tmp_path):
        trunc = tmp_path / "trunc.json"
        trunc.write_text('{"d": 2, "elements": [[[')
        with pytest.raises(serialize.SerializationError):
            serialize.load_basis(str(trunc))
        missing = tmp_path / "missing.json"
        missing.write_text('{"elements": []}')
        with pytest.raises(serialize.SerializationError) as err:
            serialize.load_basis(str(missing))
        assert "d" in str(err.value)


class TestExitCodes:
    def test_unknown_command(self, capsys):
        assert main(["nosuch"]) == 2

    def test_unknown_flag(self):
        assert main(["basis", "build", "--bogus"]) == 2

    def test_check_pass_and_fail(self, tmp_path, capsys):
        path = str(tmp_path / "b.json")
        assert main(["basis", "build", "--kind", "clock-shift", "--d", "3", "-o", path]) == 0
        assert main(["basis", "check", path]) == 0
        doc = json.loads((tmp_path / "b.json").read_text())
        doc["elements"][1] = doc["elements"][0]
        (tmp_path / "dup.json").write_text(json.dumps(doc))
        assert main(["basis", "check", str(tmp_path / "dup.json")]) == 1

    def test_truncated_json_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"d": 2')
        assert main(["basis", "check", str(bad)]) == 2


class TestDeterminism:
    def test_basis_build_bytes(self, tmp_path):
        p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        for path in (p1, p2):
            assert main(["basis", "build", "--kind", "matching", "--d", "5", "-o", path]) == 0
        assert read(p1) == read(p2)

    def test_scramble_bytes(self, tmp_path):
        p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        for path in (p1, p2):
            assert (
                main(
                    ["protocol", "scramble", "--seed", "9", "--dim-a-prime", "2",
                     "--dim-b-prime", "2", "--blocks", "2", "-o", path]
                )
                == 0
            )
        assert read(p1) == read(p2)

    def test_random_run_bytes(self, tmp_path):
        p1, p2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        for path in (p1, p2):
            assert (
                main(["random", "run", "--d", "3", "--trials", "2", "--seed", "4", "-o", path])
                == 0
            )
        assert read(p1) == read(p2)


class TestFlows:
    def test_basis_kinds(self, tmp_path, capsys):
        for kind, d in (("clock-shift", 4), ("pauli-tensor", 4), ("matching", 6), ("werner3", 3)):
            path = str(tmp_path / f"{kind}.json")
            assert main(["basis", "build", "--kind", kind, "--d", str(d), "-o", path]) == 0
            assert main(["basis", "check", path]) == 0

    def test_certify_output(self, tmp_path, capsys):
        path = str(tmp_path / "m5.json")
        main(["basis", "build", "--kind", "matching", "--d", "5", "-o", path])
        assert main(["basis", "certify", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        kinds = {c["kind"] for c in doc["certificates"]}
        assert "eigenvalue-ratio" in kinds

    def test_scramble_verify_canonicalize(self, tmp_path, capsys):
        proto = str(tmp_path / "p.json")
        planted = str(tmp_path / "plant.json")
        dec = str(tmp_path / "dec.json")
        assert (
            main(
                ["protocol", "scramble", "--seed", "11", "--dim-a-prime", "3",
                 "--dim-b-prime", "2", "--blocks", "2", "-o", proto, "--planted", planted]
            )
            == 0
        )
        assert main(["protocol", "verify", proto]) == 0
        capsys.readouterr()
        assert main(["protocol", "canonicalize", proto, "-o", dec]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["passed"] and out["state_residual"] < 1e-8
        # the written decomposition verifies against the written protocol
        p = serialize.load_protocol(proto)
        d = serialize.load_decomposition(dec)
        assert rg.verify_decomposition(p, d, 1e-7).passed

    def test_random_run_with_csv(self, tmp_path, capsys):
        csv = str(tmp_path / "esd.csv")
        out = str(tmp_path / "stats.json")
        assert (
            main(
                ["random", "run", "--d", "2", "--trials", "2", "--seed", "0",
                 "--esd-csv", csv, "-o", out]
            )
            == 0
        )
        stats = json.loads((tmp_path / "stats.json").read_text())
        assert stats["trials"] == 2 and len(stats["hc"]) == 2
        rows = (tmp_path / "esd.csv").read_text().splitlines()
        assert rows[0] == "eigenvalue" and len(rows) == 5  # d=2 -> 4 eigenvalues

    def test_random_mp_table_and_ks(self, tmp_path, capsys):
        table = str(tmp_path / "mp.csv")
        assert main(["random", "mp", "--points", "11", "-o", table]) == 0
        rows = (tmp_path / "mp.csv").read_text().splitlines()
        assert rows[0] == "x,density,cdf" and len(rows) == 12
        csv = str(tmp_path / "esd.csv")
        serialize.save_eigenvalues_csv([0.5, 1.0, 1.5, 2.5], csv)
        assert main(["random", "mp", "--esd-csv", csv]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0 <= doc["ks_distance"] <= 1
