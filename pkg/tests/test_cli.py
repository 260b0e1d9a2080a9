import csv
import io
import json

import pytest

from qdesk import __version__
from qdesk.cli import main, parse_state, parse_target
from qdesk.hamsim import format_hamiltonian, ising_chain


def body_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def header(text):
    return [ln for ln in text.splitlines() if ln.startswith("#")]


@pytest.fixture
def files(tmp_path):
    (tmp_path / "bell.txt").write_text("H 0\nCNOT 0 1\n")
    (tmp_path / "empty.txt").write_text("# nothing\n")
    (tmp_path / "bad.txt").write_text("H 0\nCNOT 0 0\n")
    (tmp_path / "z.ham").write_text("n 1 k 1 h 1\n1.0 Z0\n")
    (tmp_path / "zz.ham").write_text("n 2 k 2 h 1\n1.0 Z0 Z1\n0.5 Z0\n")
    (tmp_path / "ising.ham").write_text(format_hamiltonian(ising_chain(4)))
    return tmp_path


def run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (out.read_text() if out.exists() else "")


def test_run_bell_pair(files):
    code, text = run(["run", str(files / "bell.txt"), "--shots", "10000", "--seed", "1"], files)
    assert code == 0
    rows = {r["bitstring"]: int(r["count"]) for r in body_rows(text)}
    assert set(rows) == {"00", "11"}
    assert abs(rows["00"] / 10000 - 0.5) < 0.02


def test_header_echo(files):
    code, text = run(["run", str(files / "bell.txt"), "--seed", "7"], files)
    h = header(text)
    assert h[0] == f"# qdesk {__version__}"
    assert h[1].startswith("# command: qdesk run")
    cfg = json.loads(h[2].split(":", 1)[1])
    assert cfg["seed"] == 7 and cfg["shots"] == 1000
    assert h[3] == "# seed: 7"


def test_run_empty_circuit(files):
    code, text = run(["run", str(files / "empty.txt"), "--n", "3", "--shots", "50"], files)
    assert code == 0
    assert body_rows(text) == [{"bitstring": "000", "count": "50", "frequency": "1"}]


def test_run_majority_flag(files):
    code, text = run(["run", str(files / "empty.txt"), "--n", "2", "--majority"], files)
    assert any("majority outcome=00" in ln and "accepted" in ln for ln in header(text))


def test_same_seed_byte_identical(files):
    argv = ["run", str(files / "bell.txt"), "--shots", "500", "--seed", "3"]
    _, first = run(argv, files, "a.csv")
    _, b = run(argv, files, "a.csv")
    assert first == b
    _, c = run(["run", str(files / "bell.txt"), "--shots", "500", "--seed", "4"], files, "a.csv")
    assert body_rows(c) != body_rows(first)


def test_parse_error_exit_code(files, capsys):
    code, _ = run(["run", str(files / "bad.txt")], files)
    assert code == 1
    assert "line 2" in capsys.readouterr().err


def test_missing_file_and_usage(files):
    assert main(["run", str(files / "nope.txt")]) == 1
    assert main(["run"]) == 1
    assert main(["bogus"]) == 1


def test_trotter_table(files):
    code, text = run(["trotter", str(files / "ising.ham")], files)
    assert code == 0
    rows = body_rows(text)
    assert [int(r["steps"]) for r in rows] == [10, 20, 40]
    errs = [float(r["operator_error"]) for r in rows]
    for a, b in zip(errs, errs[1:]):
        assert abs(b / a - 0.5) < 0.05
    for r in rows:
        assert int(r["gate_count"]) == 7 * int(r["steps"])
        assert float(r["operator_error"]) <= float(r["commutator_bound_prediction"])


def test_trotter_commuting_file(files):
    code, text = run(["trotter", str(files / "zz.ham"), "--steps", "1", "5"], files)
    assert all(float(r["operator_error"]) < 1e-10 for r in body_rows(text))


def test_trotter_target_error(files):
    code, text = run(["trotter", str(files / "ising.ham"), "--target-error", "0.05"], files)
    rows = body_rows(text)
    assert len(rows) == 1 and float(rows[0]["operator_error"]) < 0.05


def test_trotter_oracle_limit(files):
    (files / "big.ham").write_text(format_hamiltonian(ising_chain(11)))
    assert main(["trotter", str(files / "big.ham"), "--steps", "1"]) == 2


def test_spectrum_z_plus(files):
    code, text = run(["spectrum", str(files / "z.ham"), "--state", "+", "--m", "4",
                      "--T", "1.5707963267948966", "--shots", "10000"], files)
    assert code == 0
    peaks = [ln for ln in header(text) if ln.startswith("# peak")]
    assert len(peaks) == 2
    fields = [dict(kv.split("=") for kv in ln[len("# peak "):].split()) for ln in peaks]
    assert sorted(round(float(f["energy"]), 9) for f in fields) == [-1.0, 1.0]
    assert all(abs(float(f["weight"]) - 0.5) < 0.02 for f in fields)
    assert len(body_rows(text)) == 16


def test_spectrum_eigenstate_single_bin(files):
    code, text = run(["spectrum", str(files / "z.ham"), "--state", "0", "--shots", "300"], files)
    counts = [int(r["count"]) for r in body_rows(text)]
    assert sorted(counts)[-1] == 300


def test_spectrum_trotter_mode_matches_exact(files):
    base = ["spectrum", str(files / "ising.ham"), "--state", "0+0+", "--m", "3", "--shots", "4000"]
    _, exact = run(base, files, "e.csv")
    _, trot = run([*base, "--mode", "trotter", "--steps", "60"], files, "t.csv")
    fe = [float(r["frequency"]) for r in body_rows(exact)]
    ft = [float(r["frequency"]) for r in body_rows(trot)]
    assert 0.5 * sum(abs(a - b) for a, b in zip(fe, ft)) < 0.05


def test_spectrum_aliasing_warning(files, capsys):
    code, text = run(["spectrum", str(files / "z.ham"), "--T", "5"], files)
    assert code == 0
    assert "AliasingWarning" in capsys.readouterr().err
    assert any("AliasingWarning" in ln for ln in header(text))


def test_compile_named(files):
    code, text = run(["compile", "--target", "S"], files)
    assert code == 0 and "sequence: T T" in text
    code, text = run(["compile", "--target", "H"], files)
    assert "sequence: H\n" in text


def test_compile_rotation(files):
    code, text = run(["compile", "--target", "rz:0.3", "--eps", "0.1"], files)
    dist = float(next(ln for ln in text.splitlines() if ln.startswith("distance")).split()[1])
    assert code == 0 and dist <= 0.1


def test_compile_not_found(files):
    code, _ = run(["compile", "--target", "rz:0.3", "--eps", "1e-5", "--max-depth", "3"], files)
    assert code == 3


def test_surface_trials_and_zero_noise(files):
    code, text = run(["surface", "trials", "--d", "3", "--eps", "0", "0.05", "--trials", "2000"], files)
    rows = body_rows(text)
    assert code == 0 and rows[0]["failures"] == "0"
    assert 0 < float(rows[1]["p_logical"]) < 0.1


def test_surface_threshold_no_crossing(files):
    # far above threshold the larger code is worse everywhere: the curves never cross
    code, _ = run(["surface", "threshold", "--d", "3", "5", "--eps", "0.2", "0.25", "0.3", "0.35",
                   "--trials", "1000", "--bootstrap", "10"], files)
    assert code == 3


def test_surface_bound_and_verify(files):
    code, text = run(["surface", "bound", "--d", "5", "--eps", "0.01"], files)
    assert code == 0 and float(body_rows(text)[0]["union_bound"]) < 1
    code, text = run(["surface", "verify"], files)
    assert code == 0 and "all conditions hold" in text and text.count("VIOLATED") == 2


def test_surface_precondition(files):
    assert main(["surface", "trials", "--d", "4", "--trials", "10"]) == 2


def test_config_file_and_flag_precedence(files):
    cfg = files / "cfg.json"
    cfg.write_text(json.dumps({"shots": 64, "seed": 5}))
    code, text = run(["run", str(files / "bell.txt"), "--config", str(cfg), "--seed", "6"], files)
    eff = json.loads(header(text)[2].split(":", 1)[1])
    assert eff["shots"] == 64 and eff["seed"] == 6
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["run", str(files / "bell.txt"), "--config", str(cfg)]) == 1


def test_atomic_write_leaves_no_temp_files(files):
    run(["run", str(files / "bell.txt")], files)
    assert not list(files.glob(".qdesk-*"))


def test_state_and_target_parsers():
    s = parse_state("1+", 2)
    assert abs(abs(s.amplitudes[2]) ** 2 - 0.5) < 1e-12
    assert abs(parse_target("0,1,1,0")[0, 1] - 1) < 1e-12
    with pytest.raises(Exception):
        parse_state("2", 1)
