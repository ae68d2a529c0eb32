import json
import math
import subprocess
import sys

import numpy as np
import pytest

from thermal_superres import cli, tables


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse(text):
    cols, rows, meta = tables.read_csv(text)
    return cols, np.array(rows, dtype=object), meta


def column(cols, rows, name):
    return np.array(rows[:, cols.index(name)], dtype=float)


def test_qfi_scan_normalized_curves_start_at_one(capsys):
    code, out, _ = run(capsys, "qfi-scan", "--points", "41")
    assert code == 0
    cols, rows, meta = parse(out)
    strength = column(cols, rows, "strength")
    theta2 = column(cols, rows, "theta2")
    per = column(cols, rows, "F22_per_strength")
    assert sorted(set(strength)) == [0.2, 1.0, 5.0]
    assert theta2.max() == pytest.approx(4 * math.pi)
    np.testing.assert_allclose(per[theta2 == 0], 1.0, rtol=1e-12)
    assert meta["subcommand"] == "qfi-scan"


def test_pmn_scan_vacuum_probability_peaks_at_two_pi(capsys):
    code, out, _ = run(capsys, "pmn-scan", "--strength", "0.1", "--points", "101")
    assert code == 0
    cols, rows, _ = parse(out)
    dphi = column(cols, rows, "dphi")
    p00 = column(cols, rows, "P_0_0")
    i = int(np.argmin(np.abs(dphi - 2 * math.pi)))
    assert dphi[i] == pytest.approx(2 * math.pi)
    assert p00[i] == pytest.approx(p00.max(), rel=1e-14)
    assert p00[25] < p00[i]


def test_data_sections_deterministic_and_thread_independent(capsys):
    args = ["misalignment-scan", "--points", "2", "--c-values", "1e-3", "1e-2", "--theta2-start", "1e-3",
            "--theta2-stop", "1e-2"]
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--threads", "3")
    _, c, _ = run(capsys, *args)
    assert tables.data_section(a) == tables.data_section(b) == tables.data_section(c)
    cols, rows, _ = parse(a)
    assert list(column(cols, rows, "c")) == [1e-3, 1e-2, 1e-3, 1e-2]


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"subcommand": "qfi-scan", "strengths": [0.5], "theta2-stop": 1.0, "points": 5}))
    code, out, _ = run(capsys, "qfi-scan", "--config", str(cfg), "--points", "3")
    assert code == 0
    cols, rows, meta = parse(out)
    assert len(rows) == 3
    assert column(cols, rows, "theta2").max() == 1.0
    assert set(column(cols, rows, "strength")) == {0.5}
    assert meta["params"]["points"] == 3


@pytest.mark.parametrize("doc", [{"bogus": 1}, {"subcommand": "pmn-scan"}, [1, 2]])
def test_bad_config_exit_code(tmp_path, capsys, doc):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(doc))
    code, _, err = run(capsys, "qfi-scan", "--config", str(cfg))
    assert code == 2 and err


def test_unreadable_config(tmp_path, capsys):
    (tmp_path / "broken.json").write_text("{not json")
    assert run(capsys, "qfi-scan", "--config", str(tmp_path / "broken.json"))[0] == 2
    assert run(capsys, "qfi-scan", "--config", str(tmp_path / "missing.json"))[0] == 2


@pytest.mark.parametrize("argv", [
    ["qfi-scan", "--points", "1"],
    ["qfi-scan", "--points", "x"],
    ["qfi-scan", "--log", "--theta2-start", "0"],
    ["qfi-scan", "--threads", "0"],
    ["pmn-scan", "--radial-nodes", "4", "--misalignment", "0.2"],
    ["nonsense"],
])
def test_parse_and_validation_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_convergence_failure_exit_3(capsys):
    code, _, err = run(capsys, "misalignment-scan", "--points", "2", "--radial-nodes", "8", "--c-values", "0.5",
                       "--theta2-start", "0.5", "--theta2-stop", "1")
    assert code == 3 and "convergence" in err


def test_singular_metric_exit_3(tmp_path, capsys):
    scene = {"sources": [{"x": 0.1, "N": 1.0}], "detectors": [{"u": 0}, {"u": 1}], "eta": [[0.5, 0.5]]}
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(scene))
    assert run(capsys, "multi-qfi", "--scene", str(path))[0] == 3


def test_json_output_matches_csv(tmp_path, capsys):
    csv_path, json_path = tmp_path / "a.csv", tmp_path / "a.json"
    assert run(capsys, "truncated-fi", "--points", "3", "--out", str(csv_path))[0] == 0
    assert run(capsys, "truncated-fi", "--points", "3", "--out", str(json_path), "--format", "json")[0] == 0
    c_cols, c_rows, c_meta = tables.read_csv(csv_path.read_text())
    j_cols, j_rows, j_meta = tables.read_json(json_path.read_text())
    assert c_cols == j_cols and c_rows == j_rows
    assert c_meta == j_meta


def test_truncated_fi_includes_full_counting_row(capsys):
    _, out, _ = run(capsys, "truncated-fi", "--points", "2", "--cutoffs", "1", "3")
    cols, rows, meta = parse(out)
    cut = column(cols, rows, "cutoff")
    assert list(cut) == [1, 1, 3, 3, meta["full_counting_cutoff"], meta["full_counting_cutoff"]]
    ratio = column(cols, rows, "FI_over_QFI")
    assert ratio[4] == pytest.approx(1.0, rel=1e-4)


def test_cutoff_scan_flattens(capsys):
    _, out, _ = run(capsys, "cutoff-scan", "--b-start", "0.6", "--b-stop", "1.2", "--points", "3")
    cols, rows, meta = parse(out)
    fi = column(cols, rows, "FI")
    assert fi[0] == pytest.approx(fi[-1], rel=1e-4)
    assert meta["default_b"] == pytest.approx(math.sqrt(0.01 * math.log(1e12)))


def test_compare_conventional_columns(capsys):
    _, out, _ = run(capsys, "compare-conventional", "--angles-arcsec", "0.05")
    cols, rows, _ = parse(out)
    assert column(cols, rows, "angle_rad")[0] == pytest.approx(0.05 * math.pi / 648000)
    q = column(cols, rows, "QFI")[0]
    fis = [column(cols, rows, c)[0] for c in ("FI_delay_0", "FI_delay_pi", "FI_delay_0_alt", "FI_delay_pi_2_alt")]
    assert all(0 < f <= q for f in fis)
    assert column(cols, rows, "ratio")[0] == pytest.approx(q / np.mean(fis[:2]))


def test_weak_limit_tables(capsys):
    _, out, _ = run(capsys, "weak-limit", "--points", "3")
    cols, rows, _ = parse(out)
    assert cols[:3] == ["strength", "dphi", "F22_per_strength"]
    _, out, _ = run(capsys, "weak-limit", "--table", "misaligned", "--points", "3")
    cols, rows, _ = parse(out)
    assert column(cols, rows, "I22")[0] == pytest.approx(0.25, abs=1e-12)


def test_dirty_beam_outputs(tmp_path, capsys):
    mat, pgm = tmp_path / "beam.csv", tmp_path / "beam.pgm"
    code, out, _ = run(capsys, "dirty-beam", "--grid", "64", "--half-width", "4", "--matrix-out", str(mat),
                       "--pgm", str(pgm))
    assert code == 0
    cols, rows, _ = parse(out)
    assert np.all(column(cols, rows, "error_cells") <= 1)
    beam = np.loadtxt(mat, delimiter=",")
    assert beam.shape == (64, 64) and beam[32, 32] == beam.max()
    assert pgm.read_bytes().startswith(b"P5\n64 64\n255\n")


def test_multi_qfi_from_config(tmp_path, capsys):
    scene = {"k": 1.0, "s0": 1.0, "sources": [{"x": 0.3, "y": 0.0, "N": 0.75}, {"x": -0.3, "y": 0.0, "N": 0.75}],
             "detectors": [{"u": 0.0, "v": 0.0}, {"u": 1.0, "v": 0.0}], "eta": [[0.4, 0.4], [0.4, 0.4]]}
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scene": scene, "centroid_separation": "x"}))
    code, out, _ = run(capsys, "multi-qfi", "--config", str(cfg))
    assert code == 0
    cols, rows, _ = parse(out)
    F = column(cols, rows, "F").reshape(2, 2)
    e = 0.3
    expected = -e * (1 + 3 * e + e * math.cos(0.6)) / (-1 - 2 * e * (2 + e) + 2 * e**2 * math.cos(0.6))
    assert F[1, 1] == pytest.approx(expected, rel=1e-6)
    assert abs(F[0, 1]) < 1e-6 * F[1, 1]


def test_multi_qfi_without_scene(capsys):
    assert run(capsys, "multi-qfi")[0] == 2


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "thermal_superres.cli", "qfi-scan", "--points", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "F22_per_strength" in proc.stdout
