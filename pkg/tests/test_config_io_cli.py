import numpy as np
import pytest
import yaml

from stokes2p import cli, io, resolvent as rs, symbols as sy
from stokes2p.config import ConfigError, load_config, parse_config
from stokes2p.grid import GridSpec

FAST = {
    "sector": {"n": 2, "n_radii": 3, "n_angles": 3, "n_xi_radii": 3, "n_xi_angles": 3, "n_xn": 3},
    "sweep": {"count": 5, "Nv": 96, "beta": 8.0, "X": 30.0},
    "grid": {"Nv": 64},
}


def write_cfg(tmp_path, cfg, name="run.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def test_defaults_parse_and_hash_stable():
    a, b = parse_config({}), parse_config(None)
    assert a.hash() == b.hash()
    c = parse_config({"seed": 4})
    assert c.hash() != a.hash()


@pytest.mark.parametrize(
    "raw",
    [
        {"bogus": 1},
        {"fluid": {"rho": 1.0}},
        {"fluid": {"mu_plus": -1.0}},
        {"sector": {"eta": 0.8}},
        {"sector": {"n_radii": 2.5}},
        {"grid": {"N": 8}},
        {"problem": {"lam": [[-1.0, 0.0]]}},
        {"problem": {"lam": ["x"]}},
        {"problem": {"extension": "wide"}},
        {"contour": {"nodes": 7}},
        {"profile": {"kind": "wave"}},
        {"sweep": {"rays": [3.0]}},
        {"data": {"modes": [{"g1": 1.0}]}},
        {"problem": {"surface": "yes"}},
    ],
)
def test_invalid_configs_rejected(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_load_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.yaml")


def test_csv_round_trip(tmp_path):
    p = tmp_path / "x.csv"
    io.write_csv(p, ["a", "b", "ok"], [[1, 0.5, True]], "abc")
    h, cols, rows = io.read_csv(p)
    assert h == "abc" and cols == ["a", "b", "ok"]
    assert rows == [["1", "5.000000000000e-01", "true"]]


def test_mode_file_round_trip(tmp_path):
    g = GridSpec(n=3, N=(4, 4), L=(1.0, 1.0))
    d = rs.InterfaceData.from_modes(g, {(1, -1): {"g2": 1 + 2j, "d": 0.5}, (0, 1): {"h3": -1.0}})
    p = tmp_path / "modes.csv"
    io.write_modes(p, d, "h")
    back = io.read_modes(p, g)
    assert np.array_equal(back.g_hat, d.g_hat) and np.array_equal(back.h_hat, d.h_hat)
    assert np.array_equal(back.d_hat, d.d_hat)


def test_mode_file_dimension_mismatch(tmp_path):
    g3 = GridSpec(n=3, N=(4, 4), L=(1.0, 1.0))
    p = tmp_path / "modes.csv"
    io.write_modes(p, rs.InterfaceData.from_modes(g3, {(1, 1): {"g1": 1.0}}), "h")
    with pytest.raises(ConfigError):
        io.read_modes(p, GridSpec(n=2, N=(4,), L=(1.0,)))
    with pytest.raises(ConfigError):
        io.read_modes(p, GridSpec(n=3, N=(2, 2), L=(1.0, 1.0)))


def test_field_dump_round_trip(tmp_path):
    g = GridSpec(n=3, N=(4, 6), L=(1.0, 2.0), X=10.0, Nv=16)
    d = rs.InterfaceData.from_modes(g, {(1, 2): {"g1": 1.0, "h3": 0.5j}})
    fld = rs.solve_rswithout(None, d, 2.0 + 1.0j, sy.FluidParams(), g)
    p = tmp_path / "f.bin"
    io.write_field(p, fld)
    dump = io.read_field(p)
    assert dump.n == 3 and dump.N == (4, 6) and dump.Nv == 16
    assert dump.lam == 2.0 + 1.0j and dump.L == (1.0, 2.0)
    u, th = fld.physical(-1)
    assert np.array_equal(dump.values[1, :3], u) and np.array_equal(dump.values[1, 3], th)
    raw = p.read_bytes()
    assert raw[:4] == b"S2PF"
    p.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        io.read_field(p)


def test_cli_exit_codes(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["solve", "--config", write_cfg(tmp_path, FAST), "--out", str(out)]) == 0
    bad = write_cfg(tmp_path, {"sector": {"eta": 1.0}}, "bad.yaml")
    assert cli.main(["solve", "--config", bad, "--out", str(out)]) == 2
    mode = write_cfg(tmp_path, {"data": {"modes": [{"k": [40], "g1": 1.0}]}}, "mode.yaml")
    assert cli.main(["solve", "--config", mode, "--out", str(out)]) == 2
    grow = write_cfg(tmp_path, {"profile": {"kind": "step_exp", "rate": 3.0}}, "grow.yaml")
    assert cli.main(["evolve", "--config", grow, "--out", str(out)]) == 1
    assert cli.main(["solve", "--threads", "0", "--out", str(out)]) == 2


def test_cli_mode_file_and_dump(tmp_path):
    g = GridSpec(n=2, N=(8,), L=(1.0,))
    mp = tmp_path / "m.csv"
    io.write_modes(mp, rs.InterfaceData.from_modes(g, {(2,): {"g2": 1.0, "d": 1.0}}), "x")
    cfg = dict(FAST, data={"file": str(mp)}, problem={"surface": True, "dump_fields": True, "lam": [2.0, [1.0, 3.0]]})
    out = tmp_path / "o"
    assert cli.main(["solve", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == 0
    _, cols, rows = io.read_csv(out / "ratios.csv")
    assert len(rows) == 2 and rows[0][-1] != ""
    assert io.read_field(out / "field_001.bin").lam == 1 + 3j


def test_cli_mode_file_wrong_dimension(tmp_path):
    g3 = GridSpec(n=3, N=(4, 4), L=(1.0, 1.0))
    mp = tmp_path / "m.csv"
    io.write_modes(mp, rs.InterfaceData.from_modes(g3, {(1, 1): {"g1": 1.0}}), "x")
    cfg = dict(FAST, data={"file": str(mp)})
    assert cli.main(["solve", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path)]) == 2


def test_certify_and_sweep_deterministic_across_threads(tmp_path, monkeypatch):
    path = write_cfg(tmp_path, FAST)
    blobs = {}
    for t in (1, 3):
        out = tmp_path / f"t{t}"
        assert cli.main(["certify", "--config", path, "--out", str(out), "--threads", str(t)]) == 0
        assert cli.main(["sweep", "--config", path, "--out", str(out), "--threads", str(t)]) == 0
        blobs[t] = [(out / f).read_bytes() for f in ("certify.csv", "sweep.csv", "sweep_summary.csv")]
    assert blobs[1] == blobs[3]
    monkeypatch.setenv("STOKES2P_THREADS", "2")
    out = tmp_path / "env"
    assert cli.main(["certify", "--config", path, "--out", str(out), "--seed", "0"]) == 0
    assert (out / "certify.csv").read_bytes() == blobs[1][0]


def test_seed_override_changes_hash(tmp_path):
    path = write_cfg(tmp_path, FAST)
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["certify", "--config", path, "--out", str(a), "--seed", "1"])
    cli.main(["certify", "--config", path, "--out", str(b), "--seed", "2"])
    assert io.read_csv(a / "certify.csv")[0] != io.read_csv(b / "certify.csv")[0]
