"""
Тесты запуска экспериментов и командной строки
"""
from pathlib import Path

import numpy as np
import pytest

from main import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main
from services.experiments import ExperimentRunner, apply_overrides
from utils.config import load_config
from utils.export import read_csv, read_grid


COMMON = """
TRANSPORT_V=1.0
KINETICS_LAMBDA=1.0
KINETICS_MU=1.0
OUTPUT_TIMESTAMP=false
"""


def make_config(tmp_path: Path, experiment: str, body: str):
    path = tmp_path / f"{experiment}.env"
    path.write_text(f"EXPERIMENT={experiment}\n{COMMON}{body}\nOUTPUT_DIR={tmp_path / 'out'}\n", encoding="utf-8")
    return path


def run_experiment(tmp_path, experiment, body):
    config = load_config(str(make_config(tmp_path, experiment, body)))
    return ExperimentRunner(config).run()


def names(paths):
    return {Path(p).name for p in paths}


def test_simulate(tmp_path):
    written = run_experiment(tmp_path, "simulate",
                             "TRANSPORT_D_L=0.1\nTRANSPORT_D_T=0.05\nRUN_TIMES=1\nRUN_N=500\nRUN_DIMS=2\nRUN_BINS=10")
    assert names(written) == {"simulate_particles_t1.csv", "simulate_residence_t1.csv", "simulate_stats.csv"}
    particles = read_csv(tmp_path / "out" / "simulate_particles_t1.csv")
    assert len(particles) == 500
    stats = read_csv(tmp_path / "out" / "simulate_stats.csv")
    assert stats["analytic_mean"].iloc[0] == pytest.approx(0.5)
    residence = read_csv(tmp_path / "out" / "simulate_residence_t1.csv")
    assert len(residence) == 10


def test_lattice(tmp_path):
    run_experiment(tmp_path, "lattice", "TRANSPORT_D_L=0.1\nRUN_TIMES=0.5\nLATTICE_DT=0.01")
    moments = read_csv(tmp_path / "out" / "lattice_moments.csv")
    assert moments["steps"].iloc[0] == 50
    assert moments["mean"].iloc[0] == pytest.approx(moments["discrete_mean"].iloc[0], rel=1e-10)
    assert moments["variance"].iloc[0] == pytest.approx(moments["discrete_variance"].iloc[0], rel=1e-9)
    snapshot = read_csv(tmp_path / "out" / "lattice_t0.5.csv")
    assert (snapshot["p_f"] + snapshot["p_a"]).sum() == pytest.approx(1.0)


def test_moments(tmp_path):
    run_experiment(tmp_path, "moments", "TRANSPORT_D_L=0.1\nRUN_TIMES=2,1")
    moments = read_csv(tmp_path / "out" / "moments.csv")
    assert len(moments) == 6
    assert set(moments["conditioning"]) == {"none", "free", "adsorbed"}
    effective = read_csv(tmp_path / "out" / "moments_effective.csv")
    assert list(effective["t"]) == [1.0, 2.0]
    assert set(effective["regime"]) <= {"wave", "telegraph", "diffusion"}


def test_plume1d(tmp_path):
    run_experiment(tmp_path, "plume1d", "TRANSPORT_D_L=0\nRUN_TIMES=1\nGRID_NX=50")
    profile = read_csv(tmp_path / "out" / "plume1d_t1.csv")
    assert len(profile) == 50
    assert list(profile.columns) == ["x", "x_hat", "n_free", "n_adsorbed", "n_total", "gaussian_ref"]
    assert np.all(profile["n_total"] >= 0)
    header = (tmp_path / "out" / "plume1d_t1.csv").read_text(encoding="utf-8")
    assert "# atom_xvt:" in header


def test_plume2d_transverse_only(tmp_path):
    written = run_experiment(tmp_path, "plume2d",
                             "TRANSPORT_D_L=0\nTRANSPORT_D_T=0.1\nRUN_TIMES=1\nGRID_NX=40\nGRID_NY=30")
    assert {"plume2d_free_t1.csv", "plume2d_adsorbed_t1.grid", "plume2d_total_t1.csv"} <= names(written)
    x, y, values = read_grid(tmp_path / "out" / "plume2d_total_t1.grid")
    assert values.shape == (30, 40)
    assert np.all(values >= 0)
    assert any(name.startswith("plume2d_contours_") for name in names(written))


def test_condmom(tmp_path):
    body = ("TRANSPORT_D_L=0.1\nTRANSPORT_D_T=0.05\nRUN_TIMES=5\nGRID_NX=20\nGRID_NY=20\n"
            "CONDMOM_PHASES=free\nCONDMOM_ORDERS=0,1")
    written = run_experiment(tmp_path, "condmom", body)
    assert names(written) == {"condmom_y_free_t5.csv", "condmom_x_t5.csv"}
    along_x = read_csv(tmp_path / "out" / "condmom_x_t5.csv")
    assert set(along_x["order"].astype(str)) == {"0", "2", "ratio"}
    header = (tmp_path / "out" / "condmom_x_t5.csv").read_text(encoding="utf-8")
    assert "# implied_peclet: 10" in header


def test_apply_overrides(tmp_path):
    config = load_config(str(make_config(tmp_path, "moments", "TRANSPORT_D_L=0.1\nRUN_TIMES=1")))
    updated = apply_overrides(config, seed=7, out=str(tmp_path / "other"), threads=3, no_timestamp=True)
    assert updated.run.seed == 7 and updated.run.threads == 3
    assert updated.output.directory == tmp_path / "other"
    assert config.run.seed == 42


def test_cli_success_and_reproducible(tmp_path):
    config = make_config(tmp_path, "simulate", "TRANSPORT_D_L=0.1\nRUN_TIMES=1\nRUN_N=300")
    out = tmp_path / "cli"
    argv = ["simulate", "--config", str(config), "--out", str(out), "--seed", "5", "--no-timestamp"]
    assert main(argv) == EXIT_OK
    first = (out / "simulate_particles_t1.csv").read_bytes()
    assert main(argv + ["--threads", "2"]) == EXIT_OK
    assert (out / "simulate_particles_t1.csv").read_bytes() == first


def test_cli_command_overrides_file_experiment(tmp_path):
    config = make_config(tmp_path, "simulate", "TRANSPORT_D_L=0.1\nRUN_TIMES=1")
    out = tmp_path / "cli"
    assert main(["moments", "--config", str(config), "--out", str(out)]) == EXIT_OK
    assert (out / "moments.csv").exists()


def test_cli_config_errors(tmp_path):
    assert main(["moments", "--config", str(tmp_path / "absent.env")]) == EXIT_CONFIG
    broken = tmp_path / "broken.env"
    broken.write_text("EXPERIMENT=moments\nTRANSPORT_V=1\n", encoding="utf-8")
    assert main(["moments", "--config", str(broken)]) == EXIT_CONFIG


def test_cli_runtime_error(tmp_path):
    config = make_config(tmp_path, "plume1d", "TRANSPORT_D_L=0\nRUN_TIMES=1")
    text = config.read_text(encoding="utf-8").replace("TRANSPORT_V=1.0", "TRANSPORT_V=0")
    config.write_text(text, encoding="utf-8")
    assert main(["plume1d", "--config", str(config), "--out", str(tmp_path / "cli")]) == EXIT_FAILURE


def test_cli_rejects_unknown_command():
    with pytest.raises(SystemExit):
        main(["plot"])
