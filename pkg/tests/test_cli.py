import subprocess
import sys

import numpy as np
import pytest

from dimscope.cli import main
from dimscope.io import read_dataset, read_keyvalue


@pytest.fixture(scope="module")
def cube_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "h.csv"
    assert main(["generate", "--family", "hypercube", "--d", "15", "--D", "60", "--n", "500", "--seed", "7", "--out", str(path)]) == 0
    return path


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


class TestGenerate:
    def test_files(self, cube_file):
        data = read_dataset(cube_file)
        assert data.points.shape == (500, 60)
        meta = read_keyvalue(f"{cube_file}.meta")
        assert meta["family"] == "hypercube" and meta["d"] == "15" and meta["seed"] == "7"
        manifest = read_keyvalue(f"{cube_file}.manifest")
        assert manifest["command"] == "generate" and manifest["flag.n"] == "500"

    def test_dset_by_extension(self, tmp_path):
        out = tmp_path / "s.dset"
        assert main(["generate", "--family", "sphere", "--d", "3", "--n", "20", "--out", str(out)]) == 0
        assert out.read_bytes()[:4] == b"DSET"

    def test_cube_union(self, tmp_path):
        out = tmp_path / "u.csv"
        assert main(["generate", "--family", "cube-union", "--d", "2,3", "--D", "6", "--n", "10", "--out", str(out)]) == 0
        assert read_dataset(out).points.shape == (20, 6)

    def test_invalid_spec_is_data_error(self, tmp_path):
        code = main(["generate", "--family", "hypercube", "--d", "9", "--D", "3", "--n", "5", "--out", str(tmp_path / "x.csv")])
        assert code == 3


class TestEstimate:
    def test_prints_estimate(self, cube_file, tmp_path, capsys):
        out = tmp_path / "e.csv"
        assert main(["estimate", "--in", str(cube_file), "--out", str(out)]) == 0
        d_est = float(capsys.readouterr().out)
        assert d_est == pytest.approx(15, abs=1)
        header, rows = read_rows(out)
        assert header == ["d_est", "d_sphere", "r_s", "rss", "n_curve_points", "converged", "n_samples"]
        assert float(rows[0][0]) == d_est and rows[0][5] == "true"

    def test_one_sample(self, tmp_path, capsys):
        path = tmp_path / "one.csv"
        path.write_text("1.0,2.0,3.0\n")
        assert main(["estimate", "--in", str(path)]) == 3
        assert "5" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["estimate", "--in", str(tmp_path / "none.csv")]) == 3

    def test_input_untouched(self, cube_file, tmp_path):
        before = cube_file.read_bytes()
        main(["estimate", "--in", str(cube_file), "--out", str(tmp_path / "e.csv")])
        assert cube_file.read_bytes() == before

    def test_byte_identical_reruns(self, cube_file, tmp_path):
        outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for out in outs:
            assert main(["estimate", "--in", str(cube_file), "--seed", "3", "--out", str(out)]) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()


class TestUsage:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["estimate"],
            ["generate", "--family", "torus", "--n", "5", "--out", "x.csv"],
            ["curve", "--out", "c.csv"],
            ["curve", "--model", "9", "--out", "c.csv"],
            ["baseline", "--in", "x.csv", "--method", "corrdim", "--band", "a,b", "--out", "o.csv"],
        ],
    )
    def test_exit_2(self, argv, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        (tmp_path / "x.csv").write_text("0,0\n1,1\n2,0\n")
        assert main(argv) == 2


class TestCurve:
    def test_with_model(self, tmp_path):
        sphere = tmp_path / "s.csv"
        main(["generate", "--family", "sphere", "--d", "9", "--n", "300", "--seed", "1", "--out", str(sphere)])
        out = tmp_path / "c.csv"
        assert main(["curve", "--in", str(sphere), "--model", "9,1", "--out", str(out)]) == 0
        header, rows = read_rows(out)
        assert header == ["r", "rho_empirical", "rho_model"]
        vals = np.array(rows, dtype=float)
        assert len(vals) == 1000
        assert np.max(np.abs(vals[:, 1] - vals[:, 2])) < 0.05

    def test_empirical_only(self, cube_file, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["curve", "--in", str(cube_file), "--subsample", "0", "--out", str(out)]) == 0
        header, rows = read_rows(out)
        assert header == ["r", "rho"] and len(rows) == 500 * 499 // 2

    def test_model_only(self, tmp_path):
        out = tmp_path / "m.csv"
        assert main(["curve", "--model", "2,1", "--grid", "5", "--out", str(out)]) == 0
        header, rows = read_rows(out)
        assert header == ["r", "rho_model"]
        np.testing.assert_allclose(np.array(rows, dtype=float)[:, 1], [0, 1 / 16, 1 / 4, 9 / 16, 1], atol=1e-12)


class TestBaselineAndMultiscale:
    def test_corrdim(self, cube_file, tmp_path):
        out = tmp_path / "b.csv"
        assert main(["baseline", "--in", str(cube_file), "--method", "corrdim", "--out", str(out)]) == 0
        assert read_rows(out)[0] == ["d_est", "q_lo", "q_hi", "n_points_used", "r_squared"]
        assert "d_est" in read_keyvalue(f"{out}.manifest")

    def test_gpca(self, cube_file, tmp_path, capsys):
        out = tmp_path / "g.csv"
        assert main(["baseline", "--in", str(cube_file), "--method", "gpca", "--out", str(out)]) == 0
        assert capsys.readouterr().out.strip() == "15"
        header, rows = read_rows(out)
        assert header == ["index", "eigenvalue"] and len(rows) == 60

    def test_mpca(self, cube_file, tmp_path):
        out = tmp_path / "m.csv"
        assert main(["baseline", "--in", str(cube_file), "--method", "mpca", "--centers", "5", "--out", str(out)]) == 0
        header, rows = read_rows(out)
        assert header == ["radius", "eig_index", "avg_eigenvalue"]
        assert max(int(r[1]) for r in rows) == 15

    def test_multiscale(self, tmp_path, capsys):
        data = tmp_path / "h.csv"
        main(["generate", "--family", "hypercube", "--d", "3", "--D", "5", "--n", "200", "--out", str(data)])
        capsys.readouterr()
        out = tmp_path / "p.csv"
        argv = ["multiscale", "--in", str(data), "--centers", "3", "--scales", "20,50,199", "--out", str(out)]
        assert main(argv) == 0
        header, rows = read_rows(out)
        assert header == ["center", "scale_kind", "scale", "n_neighbors", "d_est", "reliable"]
        assert len(rows) == 9
        summary = read_keyvalue(f"{out}.summary")
        assert float(summary["d_summary"]) == pytest.approx(float(capsys.readouterr().out))

    def test_multiscale_no_reliable_scale(self, cube_file, tmp_path):
        argv = ["multiscale", "--in", str(cube_file), "--centers", "2", "--scales", "10", "--out", str(tmp_path / "p.csv")]
        assert main(argv) == 4


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dimscope", "curve", "--model", "5,1", "--out", str(tmp_path / "m.csv")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m.csv").exists()
