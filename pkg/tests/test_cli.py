import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from ifslab.cli import main
from ifslab.imaging import read_ppm

GOLDEN = {
    "builtin": "sierpinski",
    "stream": {"kind": "champernowne", "N": 3},
    "x0": [0, 0],
    "kmax": 20000,
    "Ks": [100],
    "viewport": [0, 1, 0, 1],
    "image": {"width": 64, "height": 64},
}
GOLDEN_SHA256 = "6c4c2ccd0a4973d112e97b16f4036a4ecbb1c243f190c1e2a9ebb2fa296cebbd"
GOLDEN_PIXELS = 1022


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_golden_render(tmp_path):
    cfg = write(tmp_path, "g.json", GOLDEN)
    out = tmp_path / "g.ppm"
    assert main(["render", "--config", cfg, "--out", str(out)]) == 0
    assert hashlib.sha256(out.read_bytes()).hexdigest() == GOLDEN_SHA256
    mask = read_ppm(out)
    assert mask.sum() == GOLDEN_PIXELS
    # independent rasterisation of the same orbit
    x, y = 0.0, 0.0
    verts = [(0.0, 0.0), (1.0, 0.0), (0.5, 3**0.5 / 2)]
    want = np.zeros((64, 64), bool)
    syms = [s for L in range(1, 12) for w in np.ndindex(*(3,) * L) for s in w][:20000]
    for k, s in enumerate(syms, 1):
        x, y = 0.5 * x + 0.5 * verts[s][0], 0.5 * y + 0.5 * verts[s][1]
        if k >= 100:
            c, r = int(np.floor(x * 64)), int(np.floor((1 - y) * 64))
            if 0 <= c < 64 and 0 <= r < 64:
                want[r, c] = True
    assert np.array_equal(mask, want)


def test_converge_csv(tmp_path, capsys):
    cfg = dict(GOLDEN, Ks=[100, 1000], delta=0.005, reference={"k": 10})
    assert main(["converge", "--config", write(tmp_path, "c.json", cfg), "--out", "-"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "K,hausdorff"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["100", "1000"]
    assert all(float(ln.split(",")[1]) < 0.02 for ln in lines[1:])


def test_converge_threshold_failure_exit_1(tmp_path):
    cfg = dict(GOLDEN, Ks=[100], delta=0.005, threshold=1e-6, reference={"k": 8})
    assert main(["converge", "--config", write(tmp_path, "c.json", cfg), "--out", str(tmp_path / "o")]) == 1


def test_seqgen(tmp_path, capsys):
    assert main(["seqgen", "--stream", '{"kind": "champernowne", "N": 2}', "--count", "6"]) == 0
    assert capsys.readouterr().out == "1\n2\n1\n1\n1\n2\n"
    cfg = write(tmp_path, "s.json", {"stream": {"kind": "bernoulli", "probs": [0.5, 0.5], "seed": 1}})
    main(["seqgen", "--config", cfg, "--count", "50", "--out", str(tmp_path / "a")])
    main(["seqgen", "--config", cfg, "--count", "50", "--seed", "2", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a").read_text() != (tmp_path / "b").read_text()


@pytest.mark.parametrize(
    "cfg,field",
    [
        ({"builtin": "sierpinski", "stream": {"kind": "champernowne", "N": 3}, "x0": [0, 0], "kmax": 10, "Ks": [100], "delta": 0.1}, "kmax"),
        ({"builtin": "sierpinski", "stream": {"kind": "champernowne", "N": 3}, "x0": [0, 0], "kmax": 10, "Ks": [1], "delta": -1}, "delta"),
        ({"stream": {"kind": "champernowne", "N": 3}, "x0": [0, 0], "kmax": 10, "Ks": [1], "delta": 0.1}, "space"),
        ({"builtin": "sierpinski", "stream": {"kind": "bernoulli"}, "x0": [0, 0], "kmax": 10, "Ks": [1], "delta": 0.1}, "probs"),
        ({"builtin": "sierpinski", "stream": {"kind": "champernowne", "N": 3}, "x0": [0, 0], "kmax": 10, "Ks": [1]}, "delta"),
        ({"space": "plane", "maps": [{"kind": "affine2d", "matrix": [1, 0, 0]}], "stream": {"kind": "champernowne", "N": 1},
          "x0": [0, 0], "kmax": 10, "Ks": [1], "delta": 0.1}, "maps/0"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg, field):
    assert main(["converge", "--config", write(tmp_path, "bad.json", cfg)]) == 2
    assert field in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path, capsys):
    assert main(["converge", "--config", str(tmp_path / "nope.json")]) == 2
    assert main(["render"]) == 2


def test_custom_mobius_maps(tmp_path, capsys):
    cfg = {
        "space": "sphere",
        "maps": [
            {"kind": "mobius", "matrix": [[1, 0], [0, 0], [0, 0], [2, 0]]},
            {"kind": "mobius", "matrix": [[3, 0], [1, 0], [1, 0], [3, 0]]},
        ],
        "stream": {"kind": "champernowne", "N": 2},
        "x0": [-1, 0],
        "dual_x0": [0, 1],
        "kmax": 20000,
        "Ks": [1000],
        "delta": 0.005,
        "epsilon": 0.05,
        "reference": {"k": 12, "seed": [0, 0], "dual_seed": "inf"},
    }
    assert main(["rapunzel", "--config", write(tmp_path, "r.json", cfg)]) == 0
    out = capsys.readouterr().out
    assert "exceptional: false" in out and "escape_index: 1" in out
    del cfg["reference"]["dual_seed"]
    assert main(["rapunzel", "--config", write(tmp_path, "r.json", cfg)]) == 2


def test_rapunzel_exceptional_is_not_failure(tmp_path, capsys):
    cfg = {"builtin": "halving-pair", "stream": {"kind": "champernowne", "N": 2}, "x0": "inf",
           "kmax": 100, "Ks": [10], "delta": 0.01, "epsilon": 0.05}
    assert main(["rapunzel", "--config", write(tmp_path, "h.json", cfg)]) == 0
    assert "exceptional: true" in capsys.readouterr().out


def test_fibre_command(tmp_path, capsys):
    cfg = dict(GOLDEN, Ks=[1000], delta=0.005, epsilon=0.02, rho=[3, 1, 2, 2, 1, 3], reference={"k": 10})
    assert main(["fibre", "--config", write(tmp_path, "f.json", cfg)]) == 0
    assert "meets: true" in capsys.readouterr().out


def test_cgr_command(tmp_path):
    (tmp_path / "s.txt").write_text("ACGT\nTTGA\n")
    args = ["cgr", "--input", str(tmp_path / "s.txt"), "--alphabet", "ACGT", "--out", str(tmp_path / "c.ppm"),
            "--hist", str(tmp_path / "h.csv"), "--grid", "4", "--size", "32"]
    assert main(args) == 0
    rows = (tmp_path / "h.csv").read_text().splitlines()
    assert rows[0] == "ix,iy,count" and len(rows) == 17
    assert sum(int(r.split(",")[2]) for r in rows[1:]) == 8
    assert read_ppm(tmp_path / "c.ppm").shape == (32, 32)
    (tmp_path / "bad.txt").write_text("ACXG")
    args[2] = str(tmp_path / "bad.txt")
    assert main(args) == 2


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ifslab", "seqgen", "--stream", '{"kind":"periodic","word":[1,2]}',
                        "--count", "3"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "1\n2\n1\n"
    r = subprocess.run([sys.executable, "-m", "ifslab", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2
