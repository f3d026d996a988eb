import json

from gridqm.cli import main


def run(tmp_path, *args):
    out = tmp_path / "out"
    rc = main([*args, "--out", str(out)])
    return rc, out


def read_json(path):
    return json.loads(path.read_text())


def test_demo_gaussian_default(tmp_path):
    rc, out = run(tmp_path, "demo-gaussian")
    assert rc == 0
    report = read_json(out / "report.json")
    assert report["max_chi_error"] < 1e-8
    assert report["max_wigner_error"] < 1e-6
    assert report["header"]["config"]["seed"] == 1234
    chi_lines = (out / "chi.csv").read_text().splitlines()
    assert chi_lines[0].startswith("# {")
    assert chi_lines[1] == "k1,q1,re,im,ref_re,ref_im,abs_err"
    assert len(chi_lines) == 2 + 33 * 33
    assert (out / "demo_gaussian.png").exists()


def test_demo_gaussian_bad_lambda_exit_2(tmp_path, capsys):
    rc, _ = run(tmp_path, "demo-gaussian", "--lambda", "0.01")
    assert rc == 2
    assert "under-resolved" in capsys.readouterr().err


def test_demo_gaussian_tolerance_breach_exit_1(tmp_path):
    rc, out = run(tmp_path, "demo-gaussian", "--tol-override", "max_chi_error=1e-20")
    assert rc == 1
    assert read_json(out / "report.json")["pass"] is False


def test_byte_reproducibility(tmp_path):
    rc1 = main(["demo-gaussian", "--grid-n", "256", "--seed", "7", "--out", str(tmp_path / "a")])
    rc2 = main(["demo-gaussian", "--grid-n", "256", "--seed", "7", "--out", str(tmp_path / "b")])
    assert rc1 == rc2 == 0
    for name in ("chi.csv", "wigner.csv", "report.json", "demo_gaussian.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_check_invariants(tmp_path):
    rc, out = run(tmp_path, "check-invariants")
    assert rc == 0
    report = read_json(out / "invariants.json")
    assert report["pass"] is True
    assert len(report["results"]) >= 25
    for entry in report["results"]:
        assert set(entry) == {"name", "measured", "tolerance", "pass"}


def test_check_invariants_override_failure(tmp_path):
    rc, out = run(tmp_path, "check-invariants", "--tol-override", "ccr_residual=1e-20")
    assert rc == 1
    report = read_json(out / "invariants.json")
    failed = [r for r in report["results"] if not r["pass"]]
    assert [r["name"] for r in failed] == ["ccr_residual"]


def test_check_invariants_seed_robust(tmp_path):
    rc1, out1 = run(tmp_path / "s1", "check-invariants", "--seed", "1")
    rc2, out2 = run(tmp_path / "s2", "check-invariants", "--seed", "31337")
    assert rc1 == rc2 == 0
    r1 = {r["name"]: r["pass"] for r in read_json(out1 / "invariants.json")["results"]}
    r2 = {r["name"]: r["pass"] for r in read_json(out2 / "invariants.json")["results"]}
    assert r1 == r2


def test_cocycle_table(tmp_path):
    rc, out = run(tmp_path, "cocycle-table")
    assert rc == 0
    lines = (out / "cocycle.csv").read_text().splitlines()
    assert len(lines) == 2 + 200  # header comment + column row + 200 cases
    report = read_json(out / "report.json")
    assert report["max_residual"] < 1e-8
    residual_col = [float(line.split(",")[-1]) for line in lines[2:]]
    assert max(residual_col) < 1e-8


def test_spin_demo(tmp_path):
    rc, out = run(tmp_path, "spin-demo")
    assert rc == 0
    report = read_json(out / "report.json")
    assert report["xi_pi_pi"] == -1
    assert report["max_phase_error"] < 1e-8
    assert report["lift_2pi_error"] < 1e-10
    assert report["lift_4pi_error"] < 1e-10
    rows = (out / "spin.csv").read_text().splitlines()[2:]
    pi_rows = [r for r in rows if r.split(",")[2] == "-1"]
    assert pi_rows, "the xi(pi, pi) = -1 row must be present"


def test_vn_check(tmp_path):
    rc, out = run(tmp_path, "vn-check")
    assert rc == 0
    rep = read_json(out / "vn_check.json")
    res = rep["results"]
    assert res["e2_gap"] < 1e-8
    assert res["adjoint_gap"] < 1e-10
    assert res["rank_one_gap"] < 1e-6
    assert res["max_compression_error"] < 1e-6


def test_circle_spectrum(tmp_path):
    rc, out = run(tmp_path, "circle-spectrum", "--grid-n", "64")
    assert rc == 0
    lines = (out / "circle_spectrum.csv").read_text().splitlines()
    assert len(lines) == 2 + 63  # modes n with |n| < 32
    ns = [int(float(line.split(",")[0])) for line in lines[2:]]
    assert ns == list(range(-31, 32))
    ks = [float(line.split(",")[1]) for line in lines[2:]]
    assert all(k == int(k) for k in ks)


def test_export_state_roundtrip(tmp_path):
    rc, out = run(tmp_path, "export-state", "--grid-n", "128", "--box", "20")
    assert rc == 0
    assert read_json(out / "report.json")["roundtrip_error"] == 0.0
    assert (out / "state.txt").exists() and (out / "spectrum.txt").exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid_n = 256\nlam = 2.0\nseed = 5\n")
    rc = main(["export-state", "--config", str(cfg), "--lambda", "1.5",
               "--out", str(tmp_path / "o")])
    assert rc == 0
    header = read_json(tmp_path / "o" / "report.json")["header"]["config"]
    assert header["grid_n"] == 256       # from the file
    assert header["lam"] == 1.5          # flag wins
    assert header["seed"] == 5


def test_config_json_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"grid_n": 128, "box": 20.0}))
    rc = main(["export-state", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 0
    assert read_json(tmp_path / "o" / "report.json")["header"]["config"]["grid_n"] == 128


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("gridn = 256\n")
    rc = main(["export-state", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GRIDQM_OUT", str(tmp_path / "fromenv"))
    rc = main(["export-state", "--grid-n", "128", "--box", "20"])
    assert rc == 0
    assert (tmp_path / "fromenv" / "state.txt").exists()


def test_bad_tol_override_exit_2(tmp_path):
    rc = main(["check-invariants", "--tol-override", "nonsense", "--out", str(tmp_path / "o")])
    assert rc == 2
    rc = main(["check-invariants", "--tol-override", "parseval=-1", "--out", str(tmp_path / "o")])
    assert rc == 2
