import json
import re

import numpy as np
import pytest

from fracsum.cli import emit_raster_image, load_config, main, render_report, run, write_points_csv
from fracsum.errors import ConfigInvalid
from fracsum.grid import Raster


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return p


CANTOR_MAPS = [{"type": "similitude", "ratio": "1/3", "translation": [0]},
               {"type": "similitude", "ratio": "1/3", "translation": ["2/3"]}]


def test_bundled_cantor_passes(tmp_path):
    assert run("cantor", tmp_path, workers=1) == 0
    rec = json.loads((tmp_path / "results.json").read_text())
    res = rec["result"]
    assert rec["status"] == "PASS" and res["d_H_measured"] <= res["tolerance"]


def test_bundled_ex73_certificate(tmp_path):
    assert main(["--config", "ex73.json", "--out", str(tmp_path), "--workers", "1"]) == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["valid"] and len(cert["steps"]) == 4
    assert all(s["margin"] > 0 for s in cert["steps"])


def test_ratio_at_least_one_is_config_error(tmp_path, capsys):
    cfg = {"dimension": 1, "task": "attractor", "params": {"depth": 3},
           "maps": [CANTOR_MAPS[0], {"type": "similitude", "ratio": 1.5, "translation": [0]}]}
    assert run(write(tmp_path, cfg), tmp_path / "o") == 2
    assert "maps[1]" in capsys.readouterr().err


def test_affine_expansion_is_config_error(tmp_path, capsys):
    cfg = {"dimension": 1, "task": "attractor", "params": {"depth": 3},
           "maps": [{"type": "affine", "matrix": [[2]], "translation": [0]}]}
    assert run(write(tmp_path, cfg), tmp_path / "o") == 2
    assert "maps[0]" in capsys.readouterr().err


@pytest.mark.parametrize("mutate", [
    lambda c: c.update(colour="red"),
    lambda c: c["maps"][0].update(shear=1),
    lambda c: c.update(task="paint"),
    lambda c: c["params"].pop("depth"),
    lambda c: c["maps"][0].update(fixed_point=[0]),
])
def test_schema_rejects(tmp_path, mutate):
    cfg = {"dimension": 1, "task": "attractor", "params": {"depth": 3}, "maps": [dict(m) for m in CANTOR_MAPS]}
    mutate(cfg)
    with pytest.raises(ConfigInvalid):
        load_config(write(tmp_path, cfg))
    assert run(write(tmp_path, cfg), tmp_path / "o") == 2


def test_json_syntax_error_reports_line(tmp_path):
    p = write(tmp_path, '{\n  "dimension": 1,\n  "maps": [\n}')
    with pytest.raises(ConfigInvalid, match=r"line 4"):
        load_config(p)


def test_attractor_outputs(tmp_path):
    cfg = {"name": "c", "dimension": 1, "task": "attractor", "params": {"depth": 3, "delta": "1/27"},
           "maps": CANTOR_MAPS}
    assert run(write(tmp_path, cfg), tmp_path / "o") == 0
    lines = (tmp_path / "o" / "points.csv").read_text().splitlines()
    assert len(lines) == 8
    assert lines[1] == f"{2 / 27:.17g}"
    assert (tmp_path / "o" / "attractor.pbm").read_bytes().startswith(b"P4\n")
    side = (tmp_path / "o" / "attractor.pbm.txt").read_text()
    assert "mode: INNER" in side and "delta:" in side


def test_csv_format(tmp_path):
    p = tmp_path / "p.csv"
    write_points_csv(np.array([[1 / 3, 2.0], [0.1, -0.25]]), p)
    assert p.read_text() == "0.33333333333333331,2\n0.10000000000000001,-0.25\n"


def test_emit_raster_image_3d(tmp_path):
    cells = np.zeros((8, 2, 3), bool)
    cells[0, 0, 1] = True
    paths = emit_raster_image(Raster.from_cells(cells, [0, 0, 0], 0.5), tmp_path / "r.pbm")
    assert [p.name for p in paths] == ["r_z0000.pbm", "r_z0001.pbm", "r_z0002.pbm"]
    assert paths[1].read_bytes() == b"P4\n8 2\n\x00\x80"
    assert (tmp_path / "r_z0001.pbm.txt").exists()


def test_report_numbers_come_from_record(tmp_path):
    assert run("sierpinski", tmp_path, workers=1) == 0
    rec = json.loads((tmp_path / "results.json").read_text())
    report = (tmp_path / "report.txt").read_text()
    # results.json is key-sorted, so compare line sets
    assert sorted(report.splitlines()) == sorted(render_report(rec).splitlines())
    blob = json.dumps(rec)
    for num in re.findall(r"-?\d+\.\d+(?:e-?\d+)?", report):
        assert num in blob


def test_artifacts_identical_across_runs_and_workers(tmp_path):
    cfg = {"name": "s", "dimension": 2, "task": "sumset", "params": {"n": 3, "depth": 4, "delta": "1/64"},
           "maps": [{"type": "similitude", "ratio": "1/2", "fixed_point": p} for p in ([0, 0], [1, 0], [0, 1])]}
    path = write(tmp_path, cfg)
    outs = []
    for i, w in enumerate((1, 1, 2, 8)):
        out = tmp_path / f"o{i}"
        assert run(path, out, workers=w) == 0
        outs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    assert all(o == outs[0] for o in outs[1:])
    assert set(outs[0]) == {"results.json", "report.txt", "sum.pbm", "sum.pbm.txt"}


def test_threshold_refusal_and_force(tmp_path):
    cfg = {"dimension": 1, "task": "verify-thm71", "params": {"n": 2, "depth": 6, "delta": "1/729"},
           "maps": CANTOR_MAPS}
    path = write(tmp_path, cfg)
    assert run(path, tmp_path / "a") == 1
    assert run(path, tmp_path / "b", force=True) == 0
    rec = json.loads((tmp_path / "b" / "results.json").read_text())
    assert rec["result"]["label"] == "INFORMATIONAL PASS"


def test_lemma_check_task(tmp_path):
    cfg = {"dimension": 2, "task": "lemma-check", "params": {"trials": 5, "dims": [2]}, "maps": [
        {"type": "similitude", "ratio": 0.5, "translation": [0, 0]}]}
    assert run(write(tmp_path, cfg), tmp_path / "o") == 0
    rec = json.loads((tmp_path / "o" / "results.json").read_text())
    assert rec["result"]["failures"] == 0 and len(rec["result"]["runs"]) == 4


def test_failed_certificate_exit_code(tmp_path):
    cfg = json.loads((__import__("importlib").resources.files("fracsum") / "configs" / "ex73.json").read_text())
    cfg["params"] = {"n": 8, "depth": 2}
    assert run(write(tmp_path, cfg), tmp_path / "o") == 1
    cert = json.loads((tmp_path / "o" / "certificate.json").read_text())
    assert not cert["valid"] and cert["failed_step"] == "sumset-exclusion"


def test_thickness_task(tmp_path):
    assert run("homogeneous", tmp_path) == 0
    res = json.loads((tmp_path / "results.json").read_text())["result"]
    assert res["estimate"]["kind"] == "EMPIRICAL"
    assert res["certified"]["kind"] == "CERTIFIED_SELF_SIMILAR"
    assert 0 < res["certified"]["value"] <= res["estimate"]["value"]


def test_unknown_config_name():
    assert run("no-such-config") == 2
