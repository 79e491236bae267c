import json
import math

from moserlab import cli


def run(args) -> int:
    return cli.main(args)


def csv_body(path) -> str:
    # the timestamped comment line is excluded from determinism comparisons
    lines = path.read_text().splitlines()
    return "\n".join(l for l in lines if not l.startswith("#"))


class TestVerifyCommand:
    def test_fresh_checkout_passes(self, tmp_path):
        assert run(["verify", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["ok"] is True
        assert sorted(report["suites"]) == [
            "disc2d", "functional", "profiles", "radial", "rearrangement", "seqgen",
        ]

    def test_corrupted_profile_file_fails_with_named_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps({"n": 2, "nodes": [0.0, 2.0, 1.0], "values": [0.0, 1.0, 0.5]})
        )
        code = run(["verify", "--profile", str(bad), "--out", str(tmp_path)])
        assert code == 2
        assert "strictly increasing" in capsys.readouterr().err


class TestMoserLimitCommand:
    def test_table_shape_and_gap_trend(self, tmp_path):
        assert run([
            "moser-limit", "--l-values", "5,10,20,40", "--out", str(tmp_path),
        ]) == 0
        rows = json.loads((tmp_path / "moser_limit.json").read_text())
        assert len(rows) == 4
        gaps = [abs(r["j_direct"] - 2 * math.pi) for r in rows]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_csv_deterministic_modulo_timestamp(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(["moser-limit", "--l-values", "2,4", "--out", str(out)]) == 0
        assert csv_body(a / "moser_limit.csv") == csv_body(b / "moser_limit.csv")
        assert (a / "moser_limit.json").read_bytes() == (b / "moser_limit.json").read_bytes()


class TestCounterexampleCommand:
    def test_constant_energy_and_decaying_quasinorm(self, tmp_path):
        assert run(["counterexample", "--k-max", "12", "--out", str(tmp_path)]) == 0
        rows = json.loads((tmp_path / "counterexample.json").read_text())
        assert len(rows) == 12
        energies = [r["grad_norm"] for r in rows]
        assert max(energies) - min(energies) <= 1e-10
        expl2 = [r["expl2"] for r in rows]
        assert expl2[-1] < expl2[0]
        # the boundary-index quasinorm diverges for every member
        assert all(math.isinf(r["lz_inf_2_-0.5"]) for r in rows)


class TestNormsCommand:
    def test_zero_profile_all_zero(self, tmp_path):
        prof = tmp_path / "zero.json"
        prof.write_text(json.dumps({"n": 2, "nodes": [0.0, 1.0], "values": [0.0, 0.0]}))
        assert run([
            "norms", "--input", str(prof),
            "--indices", "inf,inf,-0.5;inf,2,-1",
            "--out", str(tmp_path),
        ]) == 0
        rows = json.loads((tmp_path / "norms.json").read_text())
        assert all(r["value"] == 0.0 for r in rows)

    def test_unknown_input_rejected(self, tmp_path, capsys):
        bad = tmp_path / "what.json"
        bad.write_text(json.dumps({"stuff": 1}))
        assert run(["norms", "--input", str(bad), "--out", str(tmp_path)]) == 1
        assert "unrecognized" in capsys.readouterr().err


class TestGenerateDecompose:
    def test_round_trip_with_recovery(self, tmp_path):
        seq_dir = tmp_path / "seq"
        assert run([
            "generate", "--kind", "superposition", "--seed", "3",
            "--out", str(seq_dir),
        ]) == 0
        dec_dir = tmp_path / "dec"
        assert run([
            "decompose", "--manifest", str(seq_dir / "manifest.json"),
            "--out", str(dec_dir), "--j-max", "8",
        ]) == 0
        doc = json.loads((dec_dir / "decomposition.json").read_text())
        assert len(doc["terms"]) == 1
        assert doc["energy_ledger"]["slack"] >= -1e-6
        assert (dec_dir / "term_00.json").exists()

    def test_generate_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run([
                "generate", "--kind", "counterexample", "--seed", "7",
                "--out", str(out),
            ]) == 0
        for name in sorted(p.name for p in a.iterdir()):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_radial_manifest_rejected_by_decompose(self, tmp_path, capsys):
        seq_dir = tmp_path / "ce"
        assert run([
            "generate", "--kind", "counterexample", "--out", str(seq_dir),
        ]) == 0
        code = run([
            "decompose", "--manifest", str(seq_dir / "manifest.json"),
            "--out", str(tmp_path / "d"),
        ])
        assert code == 2
        assert "disc" in capsys.readouterr().err
