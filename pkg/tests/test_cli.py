"""Exit codes, artifacts and manifests of the batch command line."""

import json

import numpy as np
import pytest

from phasescope.cli import main
from phasescope.defaults import DEFAULTS
from phasescope.grid import GridSpec
from phasescope.io import load_field
from phasescope.signals import GaussianPacket, sample

PACKET = '{"type":"gaussian_packet","x0":[0.3],"xi0":[-1.2],"sigma":0.9,"B":[[0.4]]}'
PSI0 = '{"type":"gaussian_packet","x0":[0.0],"xi0":[0.0],"sigma":1.0}'
DELTA = '{"type":"point_mass","x0":[0.0],"weight":1.0}'


def _manifest(out_dir, command):
    path = out_dir / (command.replace("-", "_") + "_manifest.json")
    return json.loads(path.read_text())


def test_transform_writes_artifacts(tmp_path):
    out = tmp_path / "r1"
    rc = main(["transform", "--signal", PACKET, "--csv", "--out-dir", str(out)])
    assert rc == 0
    for name in ("field.psf1", "field.psf1.json", "field.psf1.csv", "transform_manifest.json"):
        assert (out / name).exists()
    m = _manifest(out, "transform")
    assert m["command"] == "transform"
    assert m["results"]["norm"] == pytest.approx(1.0, abs=1e-9)
    assert m["defaults"]["version"] == DEFAULTS["version"]
    assert m["created"] == 0


def test_transform_reruns_are_byte_identical(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["transform", "--signal", PACKET, "--out-dir", str(out)]) == 0
    for name in ("field.psf1", "field.psf1.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_transform_invert_round_trip(tmp_path):
    out = tmp_path / "fwd"
    assert main(["transform", "--signal", PSI0, "--out-dir", str(out)]) == 0
    back = tmp_path / "bwd"
    rc = main(["invert", "--field", str(out / "field.psf1"), "--out-dir", str(back)])
    assert rc == 0
    rec, _ = load_field(str(back / "signal.psf1"))
    d1 = DEFAULTS["grid_d1"]
    spec = GridSpec.regular(1, d1["n"], d1["half_width"])
    ref = sample(GaussianPacket((0.0,), (0.0,), 1.0), spec)
    assert np.abs(rec.values - ref.values).max() < 1e-7


def test_exit_codes(tmp_path):
    out = str(tmp_path)
    # malformed JSON
    assert main(["transform", "--signal", "not json", "--out-dir", out]) == 3
    # missing input file
    assert main(["invert", "--field", str(tmp_path / "nope.psf1"), "--out-dir", out]) == 3
    # unknown symbol kind
    assert main(["symbol-order", "--symbol", '{"kind":"mystery"}', "--out-dir", out]) == 3
    # symbol values overflow to inf
    with pytest.warns(RuntimeWarning):
        rc = main(["symbol-order", "--symbol", '{"kind":"bracket","degree":4000}', "--out-dir", out])
    assert rc == 4
    # verdict failures exit 2
    assert main(["symbol-check", "--symbol", '{"kind":"chirp"}', "--out-dir", out]) == 2
    assert main(["symbol-check", "--symbol", '{"kind":"bracket","degree":1.0}', "--out-dir", out]) == 0


def test_weyl_kernel_and_apply(tmp_path):
    kout = tmp_path / "k"
    rc = main(["weyl-kernel", "--symbol", '{"kind":"gaussian"}', "--out-dir", str(kout)])
    assert rc == 0
    kpath = kout / "kernel.psf1"
    assert kpath.exists()
    assert _manifest(kout, "weyl-kernel")["results"]["rank"] == 2

    a1 = tmp_path / "a1"
    a2 = tmp_path / "a2"
    rc = main(["weyl-apply", "--kernel", str(kpath), "--signal", PSI0, "--out-dir", str(a1)])
    assert rc == 0
    rc = main(["weyl-apply", "--symbol", '{"kind":"gaussian"}', "--signal", PSI0, "--out-dir", str(a2)])
    assert rc == 0
    # stored <c16 kernels reload exactly, so both routes agree bitwise
    f1, _ = load_field(str(a1 / "applied.psf1"))
    f2, _ = load_field(str(a2 / "applied.psf1"))
    np.testing.assert_array_equal(f1.values, f2.values)
    assert main(["weyl-apply", "--signal", PSI0, "--out-dir", str(tmp_path)]) == 3


def test_qs_norm_of_ground_state(tmp_path):
    rc = main(["qs-norm", "--signal", PSI0, "--s", "0", "--out-dir", str(tmp_path)])
    assert rc == 0
    m = _manifest(tmp_path, "qs-norm")
    assert m["results"]["norm"] == pytest.approx(1.0, abs=1e-8)


def test_continuity_of_constant_symbol(tmp_path):
    rc = main(["continuity", "--symbol", '{"kind":"constant"}', "--s", "0", "--out-dir", str(tmp_path)])
    assert rc == 0
    m = _manifest(tmp_path, "continuity")
    assert m["results"]["report"]["max_ratio"] == pytest.approx(1.0, abs=1e-6)


def test_conormal_commands(tmp_path):
    mk = tmp_path / "mk"
    rc = main(["conormal-make", "--symbol", '{"kind":"gaussian"}', "--M1", "[[]]",
               "--M2", "[[1.0]]", "--dim", "1", "--out-dir", str(mk)])
    assert rc == 0
    assert (mk / "conormal.psf1").exists()
    assert _manifest(mk, "conormal-make")["results"]["subspace"]["basis"] == []

    sub = '{"basis": [], "dim": 1}'
    rc = main(["conormal-test", "--signal", DELTA, "--subspace", sub, "--order", "0",
               "--out-dir", str(tmp_path / "t0")])
    assert rc == 0
    rc = main(["conormal-test", "--signal", DELTA, "--subspace", sub, "--order", "-1",
               "--out-dir", str(tmp_path / "tm1")])
    assert rc == 2


def test_wavefront_command(tmp_path):
    rc = main(["wavefront", "--signal", DELTA, "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "wavefront.json").exists()
    assert (tmp_path / "wavefront.csv").exists()
    m = _manifest(tmp_path, "wavefront")
    assert m["results"]["in_count"] == 2


def test_transport_command(tmp_path):
    rc = main(["transport-check", "--signal", '{"type":"chirp","B":[[1.0]]}',
               "--op", '{"type":"fourier","dim":1}', "--out-dir", str(tmp_path)])
    assert rc == 0
    assert _manifest(tmp_path, "transport-check")["results"]["pass"] is True


def test_thread_controls(tmp_path, monkeypatch):
    monkeypatch.setenv("PHASESCOPE_THREADS", "2")
    assert main(["qs-norm", "--signal", PSI0, "--s", "0", "--out-dir", str(tmp_path)]) == 0
    assert _manifest(tmp_path, "qs-norm")["threads"] == 2
    # the flag wins over the environment
    assert main(["qs-norm", "--signal", PSI0, "--s", "0", "--threads", "3",
                 "--out-dir", str(tmp_path)]) == 0
    assert _manifest(tmp_path, "qs-norm")["threads"] == 3
    monkeypatch.setenv("PHASESCOPE_THREADS", "abc")
    assert main(["qs-norm", "--signal", PSI0, "--s", "0", "--out-dir", str(tmp_path)]) == 3
    monkeypatch.delenv("PHASESCOPE_THREADS")
    assert main(["qs-norm", "--signal", PSI0, "--s", "0", "--threads", "0",
                 "--out-dir", str(tmp_path)]) == 3


def test_metaplectic_command(tmp_path):
    rc = main(["metaplectic", "--signal", PSI0,
               "--op", '{"type":"shift","x0":[1.0],"xi0":[0.0]}', "--out-dir", str(tmp_path)])
    assert rc == 0
    m = _manifest(tmp_path, "metaplectic")
    assert m["results"]["signal"]["type"] == "gaussian_packet"
    assert m["results"]["signal"]["x0"] == [1.0]
    assert (tmp_path / "image.psf1").exists()
