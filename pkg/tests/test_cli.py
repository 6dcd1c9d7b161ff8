"""CLI: subcommand behavior, exit codes, deterministic output."""

import json

import pytest

import qa_fairsample.cli as cli
from qa_fairsample.data import toy_embedding_path, toy_source_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ------------------------------------------------------------------ solve


def test_solve_bundled_model(capsys):
    code, out, _ = run(capsys, "solve", "matsuda5")
    assert code == 0
    assert "E_0 = -4" in out
    assert "degeneracy = 6" in out
    assert "↑↑↑↑↑" in out  # the fully aligned state
    assert "11001" in out


def test_solve_two_spin_fixture(capsys, tmp_path):
    path = tmp_path / "pair.json"
    path.write_text('{"num_spins": 2, "couplings": [[0, 1, 1.0]]}')
    code, out, _ = run(capsys, "solve", str(path))
    assert code == 0
    assert "E_0 = -1" in out
    assert "degeneracy = 2" in out
    assert "↑↑" in out and "↓↓" in out


def test_solve_truncated_json(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"num_spins": 2, "couplings": [[0, 1,')
    code, _, err = run(capsys, "solve", str(path))
    assert code == 2
    assert "line" in err and "column" in err


def test_solve_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "solve", str(tmp_path / "nope.json"))
    assert code == 2
    assert err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["solve", "matsuda5", "--nope"])
    assert excinfo.value.code == 2


# --------------------------------------------------------------- validate


def test_validate_bundled_files(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == 0
    assert "FAIL" not in out
    assert out.count("PASS") == 14  # 11 toy clauses + 3 embedding reports


def test_validate_negative_chain_strength(capsys, tmp_path):
    data = json.loads(toy_embedding_path().read_text())
    data["chain_strength"] = -1.0
    bad = tmp_path / "neg.json"
    bad.write_text(json.dumps(data))
    code, _, err = run(capsys, "validate", "--embedded", str(bad))
    assert code == 2
    assert "positive" in err


def test_validate_flipped_coupling_exits_3(capsys, tmp_path):
    data = json.loads(toy_source_path().read_text())
    data["couplings"][0][2] = -1.0
    bad = tmp_path / "flipped.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "validate", "--source", str(bad))
    assert code == 3
    assert "FAIL  source_degeneracy" in out


# ------------------------------------------------------------------ anneal


def test_anneal_tau_zero_uniform(capsys):
    code, out, _ = run(capsys, "anneal", "matsuda5", "--tau", "0")
    assert code == 0
    payload = json.loads(out)
    assert payload["tau"] == 0.0
    for p in payload["probabilities"].values():
        assert p == pytest.approx(1.0 / 32.0, abs=1e-12)
    for p in payload["folded"].values():
        assert p == pytest.approx(2.0 / 32.0, abs=1e-12)
    assert payload["ratio_PS_PC"] == pytest.approx(1.0, abs=1e-12)
    assert payload["excited_weight"] == pytest.approx(26.0 / 32.0, abs=1e-12)


def test_anneal_embedded_smoke(capsys):
    code, out, _ = run(
        capsys, "anneal", "matsuda5",
        "--embedding", "matsuda5_embedded", "--jf", "1.0", "--tau", "5",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["norm_drift"] <= 1e-6
    assert set(payload["folded"]) == {"00000", "11000", "00110"}
    total = sum(payload["folded"].values()) + payload["excited_weight"]
    assert total == pytest.approx(1.0, abs=1e-9)


def test_anneal_integration_failure_exits_4(capsys):
    code, _, err = run(
        capsys, "anneal", "matsuda5", "--tau", "200", "--steps", "600"
    )
    assert code == 4
    assert "drift" in err


def test_anneal_bad_model_exits_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"num_spins": 2}')
    code, _, err = run(capsys, "anneal", str(path), "--tau", "1")
    assert code == 2


def test_anneal_no_renormalize(capsys):
    _, raw_out, _ = run(capsys, "anneal", "matsuda5", "--tau", "1", "--no-renormalize")
    _, renorm_out, _ = run(capsys, "anneal", "matsuda5", "--tau", "1")
    raw = json.loads(raw_out)
    renorm = json.loads(renorm_out)
    # raw weights are the renormalized ones scaled back by the squared norm
    for key, p in raw["probabilities"].items():
        assert p == pytest.approx(
            renorm["probabilities"][key] * renorm["norm_squared"], rel=1e-12
        )


# ---------------------------------------------------------------------- pt


def test_pt_embedded_dump_matrix(capsys):
    code, out, _ = run(
        capsys, "pt", "matsuda5",
        "--embedding", "matsuda5_embedded", "--jf", "1", "--dump-matrix",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["resolved_order"] == 2
    second = payload["second_order"]["entries"]
    assert len(second) == 6 and len(second[0]) == 6
    for i in range(6):
        assert -second[i][i] == pytest.approx(7.0 / 3.0, abs=1e-9)
    first = payload["first_order"]["entries"]
    assert all(v == 0.0 for row in first for v in row)
    for p in payload["folded"].values():
        assert p == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert payload["ratio_PS_PC"] == pytest.approx(1.0, abs=1e-9)


def test_pt_source_suppression(capsys):
    code, out, _ = run(capsys, "pt", "matsuda5")
    assert code == 0
    payload = json.loads(out)
    assert payload["resolved_order"] == 1
    assert payload["ratio_PS_PC"] == 0.0
    assert payload["probabilities"]["11111"] == 0.0


def test_pt_custom_partition(capsys):
    code, out, _ = run(capsys, "pt", "matsuda5", "--s-set", "1", "--c-set", "0", "2")
    assert code == 0
    payload = json.loads(out)
    # source PT folds to (0, 1/2, 1/2); S = second class, C = the others
    assert payload["ratio_PS_PC"] == pytest.approx(2.0, abs=1e-10)


def test_pt_deterministic_output(capsys):
    _, first, _ = run(capsys, "pt", "matsuda5", "--dump-matrix")
    _, second, _ = run(capsys, "pt", "matsuda5", "--dump-matrix")
    assert first == second


# -------------------------------------------------------------------- embed


def test_embed_subcommand(capsys):
    code, out, _ = run(
        capsys, "embed", "matsuda5", "matsuda5_embedded", "--jf", "1.0"
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["model"]["num_spins"] == 6
    assert len(payload["model"]["couplings"]) == 9
    assert payload["report"]["bijective"] is True
    assert payload["report"]["embedded_energy"] == -5.0


# ---------------------------------------------------------------- reproduce


def test_reproduce_fig3b(capsys, tmp_path):
    out_path = tmp_path / "fig3b.csv"
    code, out, _ = run(capsys, "reproduce", "fig3b", "--out", str(out_path))
    assert code == 0
    assert "wrote" in out
    lines = out_path.read_text().strip().split("\n")
    assert len(lines) == 41  # header + 40 PT rows
    header = lines[0].split(",")
    assert header[:4] == ["model", "parameter", "method", "P_1"]
    fair_row = next(l for l in lines[1:] if l.startswith("embedded[jf=1],"))
    cells = fair_row.split(",")
    p_values = [float(cells[i]) for i in (3, 4, 5)]
    for p in p_values:
        assert p == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert float(cells[7]) == pytest.approx(1.0)  # gap ratio at the fair point

    # byte-identical on rerun
    second_path = tmp_path / "fig3b_again.csv"
    run(capsys, "reproduce", "fig3b", "--out", str(second_path))
    assert out_path.read_bytes() == second_path.read_bytes()


def test_reproduce_fig2_small_grid(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "fig2_tau_grid", lambda: [1.0, 2.0])
    out_path = tmp_path / "fig2.csv"
    code, _, _ = run(capsys, "reproduce", "fig2", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().strip().split("\n")
    assert len(lines) == 9  # header + 2 taus x (original + 3 embeddings)
    assert lines[1].startswith("original,1,SE")
    assert lines[2].startswith("embedded[jf=0.5],1,SE")


def test_reproduce_fig3a_single_point(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "fig3_chain_grid", lambda: [1.0])
    out_path = tmp_path / "fig3a.csv"
    code, _, _ = run(capsys, "reproduce", "fig3a", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().strip().split("\n")
    assert len(lines) == 3  # header + PT row + SE row
    pt_cells = lines[1].split(",")
    se_cells = lines[2].split(",")
    assert pt_cells[2] == "PT" and se_cells[2] == "SE"
    for i in (3, 4, 5):
        assert float(pt_cells[i]) == pytest.approx(float(se_cells[i]), abs=0.01)
    assert se_cells[-1] != ""  # SE rows report their norm drift
    assert float(se_cells[-1]) <= 1e-6


def test_reproduce_aborts_on_validation_failure(capsys, tmp_path):
    data = json.loads(toy_source_path().read_text())
    data["couplings"][0][2] = -1.0
    bad = tmp_path / "flipped.json"
    bad.write_text(json.dumps(data))
    out_path = tmp_path / "never.csv"
    code, _, err = run(
        capsys, "reproduce", "fig3b", "--out", str(out_path), "--source", str(bad)
    )
    assert code == 3
    assert "FAIL" in err
    assert not out_path.exists()
