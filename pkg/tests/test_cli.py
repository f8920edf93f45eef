import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from friedrichs.cli import main, parse_config, parse_config_text
from friedrichs.errors import ParseError, ValidationFailure

MODELS = Path(__file__).resolve().parents[1] / "models"
SCALAR = str(MODELS / "scalar.json")
TWO = str(MODELS / "two_by_two.json")


def write(tmp_path, doc, name="model.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def scalar_doc(**changes):
    doc = json.loads(Path(SCALAR).read_text())
    doc.update(changes)
    return doc


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines()]


# ------------------------------------------------------------------ configuration


def test_parse_bundled_models():
    for path in MODELS.glob("*.json"):
        cfg = parse_config(path)
        assert len(cfg.config_hash) == 16


def test_coefficients_are_row_major():
    from friedrichs.model import eval_M, two_by_two_example
    cfg = parse_config(TWO)
    z = np.array([0.7 - 0.2j, 2.0 + 0.4j])
    ref = two_by_two_example(0.5)
    assert np.allclose(eval_M(cfg.spec.M, z), eval_M(ref.M, z), rtol=1e-15, atol=0)


def test_missing_epsilon_warns(caplog):
    doc = scalar_doc()
    del doc["epsilon"]
    with caplog.at_level("WARNING"):
        cfg = parse_config_text(json.dumps(doc))
    assert cfg.spec.epsilon == 1.0
    assert "epsilon" in caplog.text


@pytest.mark.parametrize("text,field", [
    ("{", None),
    ('{"a": [1], "M": {"terms": []}}', "n"),
    ('{"n": 1, "a": [1, 2], "M": {"terms": []}}', "a"),
    ('{"n": 1, "a": [1], "epsilon": "x", "M": {"terms": []}}', "epsilon"),
    ('{"n": 1, "a": [1], "M": {"terms": [{"pole": [0, -1], "order": 0, "coeff": [[1, 0]]}]}}',
     "M.terms[0].order"),
    ('{"n": 1, "a": [1], "M": {"terms": [{"pole": [0, -1], "order": 2, "coeff": []}]}}',
     "M.terms[0].coeff"),
])
def test_parse_errors(text, field):
    with pytest.raises(ParseError) as info:
        parse_config_text(text)
    if field:
        assert info.value.field == field


def test_parse_error_carries_line():
    with pytest.raises(ParseError) as info:
        parse_config_text('{\n  "n": 1,\n  "a": [1]\n  "M": {}\n}')
    assert info.value.line == 4


def test_validation_failure(tmp_path):
    doc = scalar_doc(M={"terms": [{"pole": [1.0, 0.0], "order": 2, "coeff": [[1.0, 0.0]]}]})
    with pytest.raises(ValidationFailure):
        parse_config(write(tmp_path, doc))


# ------------------------------------------------------------------ exit codes


def test_exit_codes(tmp_path, capsys):
    assert main(["validate", "--config", SCALAR]) == 0
    assert main(["validate", "--config", write(tmp_path, "{", "bad.json")]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["nonsense", "--config", SCALAR]) == 2
    assert main(["resonances", "--config", SCALAR, "--region", "1,2,3"]) == 2
    real_pole = scalar_doc(M={"terms": [{"pole": [1.0, 0.0], "order": 2, "coeff": [[1.0, 0.0]]}]})
    assert main(["validate", "--config", write(tmp_path, real_pole, "real.json")]) == 3
    assert main(["smatrix", "--config", SCALAR, "--tol", "1e-20"]) == 5
    err = capsys.readouterr().err.strip().splitlines()
    last = json.loads(err[-1])
    assert last["exit_code"] == 5 and "config_hash" in last


def test_exit_code_numerical(tmp_path, capsys):
    doc = json.loads(Path(TWO).read_text())
    doc["search"] = {"region": [0.5, 4.0, -1.0, -1e-6], "max_depth": 0}
    assert main(["resonances", "--config", write(tmp_path, doc)]) == 4
    rec = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert rec["exit_code"] == 4


# ------------------------------------------------------------------ commands


def test_resonances_region(tmp_path):
    out = tmp_path / "out"
    code = main(["resonances", "--config", SCALAR, "--region", "0.2,2,-1,-1e-6", "--out", str(out)])
    assert code == 0
    recs = read_jsonl(out / "resonances.jsonl")
    assert len(recs) == 1
    assert all(r["config_hash"] == recs[0]["config_hash"] for r in recs)
    zeta = complex(*recs[0]["zeta"])
    assert abs(zeta - (1.25137866919414147 - 0.10255637224501084j)) <= 1e-12


def test_smatrix_grid(tmp_path):
    out = tmp_path / "out"
    assert main(["smatrix", "--config", TWO, "--lambda", "0.05:50:200", "--out", str(out)]) == 0
    rows = read_csv(out / "smatrix.csv")
    assert len(rows) == 200
    assert max(float(r["unitarity_defect"]) for r in rows) <= 1e-9
    assert {"S01_re", "S10_im"} <= set(rows[0])


def test_trajectory(tmp_path):
    out = tmp_path / "out"
    assert main(["trajectory", "--config", SCALAR, "--eps-grid", "0.5,0.3,0.2", "--out", str(out)]) == 0
    rows = read_csv(out / "trajectory.csv")
    assert [float(r["epsilon"]) for r in rows] == [0.5, 0.3, 0.2]
    im = [float(r["im"]) for r in rows]
    assert im[0] < im[1] < im[2] < 0


def test_gamov_and_laurent(tmp_path):
    out = tmp_path / "out"
    assert main(["gamov", "--config", SCALAR, "--out", str(out)]) == 0
    decay = read_csv(out / "gamov_decay.csv")
    for row in decay:
        assert abs(float(row["pairing_ratio"]) - float(row["exp_im_zeta_t"])) <= 1e-3
    assert main(["laurent", "--config", SCALAR, "--out", str(out)]) == 0
    recs = read_jsonl(out / "laurent.jsonl")
    assert recs and all(r["order2_rel"] <= 1e-8 for r in recs)
    assert read_csv(out / "laurent_holo.csv")


def test_project(tmp_path):
    out = tmp_path / "out"
    assert main(["project", "--config", SCALAR, "--out", str(out)]) == 0
    rows = read_csv(out / "project.csv")
    assert rows and max(float(r["abs_err"]) for r in rows) <= 1e-6


def test_verify(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--config", SCALAR, "--out", str(out)]) == 0
    recs = read_jsonl(out / "verify.jsonl")
    assert recs and all(r["passed"] for r in recs)


def test_stdout_output(capsys):
    assert main(["validate", "--config", SCALAR]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all("config_hash" in json.loads(line) for line in lines)


def test_outputs_are_deterministic(tmp_path):
    for run in ("a", "b"):
        for cmd in ("resonances", "smatrix", "laurent"):
            assert main([cmd, "--config", SCALAR, "--out", str(tmp_path / run)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "friedrichs.cli", "validate", "--config", SCALAR],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout
