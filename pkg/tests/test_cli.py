import numpy as np
import pytest

from ectkit.cli import main
from ectkit.fileio import read_archive, read_matrix_csv, read_point_cloud_text, read_pgm, write_off_mesh
from ectkit.solids import platonic_solid


@pytest.fixture
def tetra(tmp_path):
    K = platonic_solid("tetrahedron")
    path = tmp_path / "tetrahedron.off"
    write_off_mesh(path, K.coordinates, K.simplices_by_dim[2])
    return path


@pytest.fixture
def origin(tmp_path):
    path = tmp_path / "cloud.txt"
    path.write_text("0 0\n")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_chi(capsys, tetra, origin):
    assert run(capsys, "chi", tetra)[:2] == (0, "2\n")
    assert run(capsys, "chi", origin)[:2] == (0, "1\n")


def test_ect_single_point(capsys, origin):
    code, out, _ = run(capsys, "ect", origin, "--k", 1, "--l", 4, "--strategy", "global")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,0"
    assert [int(line.split(",")[1]) for line in lines[1:]] == [0, 0, 1, 1]
    assert [float(line.split(",")[0]) for line in lines[1:]] == pytest.approx([-1, -1 / 3, 1 / 3, 1])


def test_ect_per_direction_and_smooth(capsys, tetra):
    code, out, _ = run(capsys, "ect", tetra, "--k", 3, "--l", 5, "--strategy", "per-direction")
    assert code == 0
    assert out.splitlines()[0] == "row,0,1,2"
    assert out.splitlines()[-1] == "4,2,2,2"
    code, out, _ = run(capsys, "ect", tetra, "--k", 2, "--l", 3, "--lambda", 10)
    assert code == 0 and "." in out.splitlines()[1].split(",")[1]


def test_ect_outputs(capsys, tmp_path, tetra):
    prefix = tmp_path / "res" / "tetra"
    code, out, _ = run(capsys, "ect", tetra, "--k", 4, "--l", 8, "--out", prefix, "--plot")
    assert code == 0
    for suffix in (".ectkit", ".csv", ".pgm", ".pgm.json", ".png", "_columns.png"):
        assert (tmp_path / "res" / f"tetra{suffix}").exists()
    M, meta = read_archive(f"{prefix}.ectkit")
    values, thresholds = read_matrix_csv(f"{prefix}.csv")
    assert np.array_equal(values, M.values) and np.array_equal(thresholds, M.thresholds.values)
    assert read_pgm(f"{prefix}.pgm").shape == (8, 4)
    assert meta["seed"] == "0" and "config_hash" in meta
    assert out.splitlines()[-1].startswith("sha256,")


def test_ect_is_deterministic(capsys, tmp_path, tetra):
    for name in ("a", "b"):
        assert run(capsys, "ect", tetra, "--k", 5, "--l", 6, "--seed", 9, "--out", tmp_path / name)[0] == 0
    assert (tmp_path / "a.ectkit").read_bytes() == (tmp_path / "b.ectkit").read_bytes()
    run(capsys, "ect", tetra, "--k", 5, "--l", 6, "--seed", 10, "--out", tmp_path / "c")
    assert (tmp_path / "a.ectkit").read_bytes() != (tmp_path / "c.ectkit").read_bytes()


def test_ecc(capsys, tmp_path, tetra):
    code, out, _ = run(capsys, "ecc", tetra, "--direction", 0, 0, 2, "--l", 3, "--tmin", -2, "--tmax", 2)
    assert code == 0
    assert out.splitlines() == ["t,value", "-2.0,0", "0.0,1", "2.0,2"]
    code, out, _ = run(capsys, "ecc", tetra, "--direction", 0, 0, 1, "--lambda", 5, "--plot", tmp_path / "c.png")
    assert code == 0 and (tmp_path / "c.png").exists()


def test_ecc_angle_needs_planar_input(capsys, tetra, origin):
    assert run(capsys, "ecc", origin, "--angle", 0.5, "--l", 2)[0] == 0
    code, _, err = run(capsys, "ecc", tetra, "--angle", 0.5)
    assert code == 1 and "planar" in err


def test_usage_errors(capsys, tetra):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "usage" in err
    code, _, err = run(capsys, "chi", tetra, "--bogus")
    assert code == 1 and "usage" in err
    assert run(capsys)[0] == 1


def test_io_errors(capsys, tmp_path):
    code, _, err = run(capsys, "chi", tmp_path / "missing.off")
    assert code == 2 and "missing.off" in err
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\n3 1 0\n0 0 0\n")
    code, _, err = run(capsys, "chi", bad)
    assert code == 2 and "bad.off:3" in err


def test_divergence_exit_code(capsys, tmp_path):
    code, _, err = run(
        capsys, "learn-coordinates", "--k", 8, "--l", 8, "--n", 10, "--steps", 5, "--lr", "inf", "--out", tmp_path
    )
    assert code == 3 and "diverged" in err


def test_gen_and_normalize(capsys, tmp_path):
    cloud = tmp_path / "c.txt"
    assert run(capsys, "gen", "double-annulus", "--n", 21, "--seed", 1, "-o", cloud)[0] == 0
    assert read_point_cloud_text(cloud).shape == (21, 2)
    code, out, _ = run(capsys, "gen", "noisy-circle", "--n", 5, "--noise", 0)
    assert code == 0 and len(out.splitlines()) == 5

    raw = tmp_path / "raw.txt"
    raw.write_text("0 0\n2 0\n")
    code, out, err = run(capsys, "normalize", raw)
    assert code == 0
    assert out.splitlines() == ["-1.0 0.0", "1.0 0.0"]
    assert "center 1.0 0.0" in err and "scale 1.0" in err
    normalized = tmp_path / "n.txt"
    assert run(capsys, "normalize", raw, "-o", normalized)[0] == 0
    assert read_point_cloud_text(normalized).tolist() == [[-1.0, 0.0], [1.0, 0.0]]


def test_learn_directions_outputs(capsys, tmp_path):
    out_dir = tmp_path / "ld"
    args = ["learn-directions", "--k", 4, "--l", 8, "--steps", 20, "--n", 30, "--log-every", 5]
    code, out, _ = run(capsys, *args, "--out", out_dir, "--plot")
    assert code == 0
    for name in ("target.ectkit", "learned.ectkit", "trace.csv", "angles.csv", "loss.png", "ect_learned.png"):
        assert (out_dir / name).exists()
    trace = (out_dir / "trace.csv").read_text().splitlines()
    assert trace[0] == "step,loss" and trace[1].startswith("0,") and trace[-1].startswith("final,")
    assert len(trace) == 2 + 4
    summary = dict(line.split(",", 1) for line in out.splitlines())
    assert float(summary["final_loss"]) < float(summary["initial_loss"])
    code, out2, _ = run(capsys, *args, "--out", tmp_path / "ld2")
    assert out2 == out
    assert (out_dir / "learned.ectkit").read_bytes() == (tmp_path / "ld2" / "learned.ectkit").read_bytes()


def test_learn_directions_rejects_3d_input(capsys, tetra, tmp_path):
    code, _, err = run(capsys, "learn-directions", "--input", tetra, "--steps", 1, "--out", tmp_path)
    assert code == 1 and "planar" in err


def test_learn_coordinates_outputs(capsys, tmp_path):
    out_dir = tmp_path / "lc"
    args = ["learn-coordinates", "--k", 16, "--l", 16, "--steps", 10, "--n", 20, "--out", out_dir, "--plot"]
    code, out, _ = run(capsys, *args)
    assert code == 0
    for name in ("target_points.txt", "initial_points.txt", "learned_points.txt", "point_clouds.png", "loss.png"):
        assert (out_dir / name).exists()
    summary = dict(line.split(",", 1) for line in out.splitlines())
    assert {"chamfer", "target_diameter", "steps"} <= summary.keys()
    assert read_point_cloud_text(out_dir / "learned_points.txt").shape == (20, 2)
