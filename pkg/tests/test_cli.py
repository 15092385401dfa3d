import json
import re
import time
from pathlib import Path

import numpy as np
import pytest

from planarpot.cli import main
from planarpot.config import CONFIG_SCHEMA, ConfigError, config_from_dict, parse_config
from planarpot.exceptions import ConfigurationError
from planarpot.report import emit_plot, fit_line, format_value, write_csv
from planarpot.verify import ACCEPTANCE

DOCS_SCHEMA = Path(__file__).resolve().parents[1] / "docs" / "config.schema.json"
DISK = {"ambient": {"type": "disk", "center": [0, 0], "radius": 1}, "base_point": [0, 0]}


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_minimal_disk_config_is_valid(tmp_path):
    cfg = parse_config(_write(tmp_path, {"task": "green", "domain": DISK}))
    assert cfg.task == "green"
    assert cfg.domain.base_point == 0j


def test_missing_base_point_names_the_field():
    doc = {"task": "green", "domain": {"ambient": DISK["ambient"]}}
    with pytest.raises(ConfigError) as exc:
        config_from_dict(doc)
    assert "$.domain.base_point: required field is missing" in exc.value.errors


def test_lambda_at_least_one_is_a_range_error():
    with pytest.raises(ConfigError) as exc:
        config_from_dict({"task": "density", "domain": {"preset": "slit_disk"}, "params": {"lam": 1.0}})
    assert any(e.startswith("$.params.lam:") for e in exc.value.errors)


def test_errors_are_aggregated():
    doc = {"task": "density", "domain": {"ambient": DISK["ambient"]}, "params": {"lam": 1.5}}
    with pytest.raises(ConfigError) as exc:
        config_from_dict(doc)
    paths = {e.split(":")[0] for e in exc.value.errors}
    assert {"$.domain.base_point", "$.params.lam"} <= paths


def test_domain_file_is_resolved_relative_to_config(tmp_path):
    sub = tmp_path / "domains"
    sub.mkdir()
    _write(sub, DISK, "disk.json")
    cfg = parse_config(_write(tmp_path, {"task": "green", "domain": "domains/disk.json"}))
    assert cfg.domain.ambient.radius == 1.0


def test_missing_domain_file_is_rejected(tmp_path):
    with pytest.raises(ConfigurationError):
        parse_config(_write(tmp_path, {"task": "green", "domain": "nowhere.json"}))


def test_unknown_task_exits_two(tmp_path, capsys):
    assert main(["--config", str(_write(tmp_path, {"task": "nope"})), "--out-dir", str(tmp_path)]) == 2
    assert "$.task" in capsys.readouterr().err


def test_unknown_subcommand_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_task_needing_config_exits_two(tmp_path):
    assert main(["green", "--out-dir", str(tmp_path)]) == 2


def test_command_and_config_task_must_match(tmp_path):
    path = _write(tmp_path, {"task": "green", "domain": DISK})
    assert main(["density", "--config", str(path), "--out-dir", str(tmp_path)]) == 2


def test_cap_task_writes_table_and_report(tmp_path):
    doc = {"task": "cap", "params": {"compact": [{"type": "segment", "a": [0, 0], "b": [4, 0]}], "n": 128}}
    out = tmp_path / "out"
    assert main(["cap", "--config", str(_write(tmp_path, doc)), "--out-dir", str(out)]) == 0
    lines = (out / "cap.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "quantity,value"
    values = dict(line.split(",") for line in lines[1:])
    assert float(values["capacity"]) == pytest.approx(1.0, abs=1e-2)
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert [c["id"] for c in report["checks"]] == ["cap"]
    assert report["checks"][0]["status"] == "pass"


@pytest.fixture(scope="module")
def ct_density_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("ct")
    doc = {"task": "density", "domain": {"preset": "carleson_totik"},
           "params": {"n_max": 24, "points": [[0, 0], [-1, 0], [0.0625, 0]]}}
    cfg = _write(tmp, doc)
    codes = [main(["--config", str(cfg), "--out-dir", str(tmp / d)]) for d in ("a", "b")]
    return tmp, codes


def test_carleson_totik_density_has_24_rows_per_point(ct_density_run):
    tmp, codes = ct_density_run
    assert codes == [0, 0]
    lines = (tmp / "a" / "density.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "a_re,a_im,n,qualifies,log_cap_scaled,d_n"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 3 * 24
    for k in range(3):
        assert [int(r[2]) for r in rows[24 * k:24 * (k + 1)]] == list(range(1, 25))


def test_rerun_reproduces_csv_bytes(ct_density_run):
    tmp, _ = ct_density_run
    assert (tmp / "a" / "density.csv").read_bytes() == (tmp / "b" / "density.csv").read_bytes()


def test_csv_uses_nine_significant_digits(tmp_path):
    path = write_csv(tmp_path / "t.csv", ("a", "b", "c"), [(1 / 3, True, 7)])
    assert path.read_text(encoding="utf-8") == "a,b,c\n3.33333333e-01,true,7\n"
    assert format_value(float("-inf")) == "-inf"


def test_csv_rejects_ragged_rows(tmp_path):
    with pytest.raises(ConfigurationError):
        write_csv(tmp_path / "t.csv", ("a", "b"), [(1.0,)])


def test_plot_rejects_single_point(tmp_path):
    with pytest.raises(ConfigurationError):
        emit_plot(([0.1], [0.2]), None, tmp_path / "p.svg")


def test_plot_rejects_empty_series(tmp_path):
    with pytest.raises(ConfigurationError):
        emit_plot(([], []), None, tmp_path / "p.svg")


def test_plot_rejects_nonpositive_log_data(tmp_path):
    with pytest.raises(ConfigurationError):
        emit_plot(([0.1, 0.0], [1.0, 2.0]), None, tmp_path / "p.svg")


def test_plot_annotation_and_determinism(tmp_path):
    x = np.geomspace(1e-3, 1e-1, 12)
    fit = {"slope": 1.0, "intercept": 0.0, "value": 1.0, "uncertainty": 0.1}
    a = emit_plot((x, x), fit, tmp_path / "a.svg", name="β")
    b = emit_plot((x, x), fit, tmp_path / "b.svg", name="β")
    text = a.read_text(encoding="utf-8")
    assert "β=1.00±0.10" in text
    assert text.startswith("<?xml") or text.startswith("<svg")
    assert a.read_bytes() == b.read_bytes()


def test_fit_line_recovers_slope():
    x = np.geomspace(1e-3, 1, 10)
    fit = fit_line(x, 5 * x ** 2)
    assert fit["slope"] == pytest.approx(2.0, abs=1e-12)
    assert fit["uncertainty"] == pytest.approx(0.0, abs=1e-10)


def test_green_task_decay_plot_annotates_unit_exponent(tmp_path):
    doc = {"task": "green", "domain": {"preset": "unit_disk"},
           "grid": {"h": 1 / 64, "focus": [[1, 0]], "h_focus": 1e-4},
           "params": {"samples": [[0.5, 0]], "approach": {"point": [1, 0], "direction": [-1, 0]}},
           "outputs": {"csv": "g.csv", "plot": "decay.svg"}}
    out = tmp_path / "out"
    assert main(["--config", str(_write(tmp_path, doc)), "--out-dir", str(out)]) == 0
    m = re.search(r"β=(-?\d+\.\d\d)±(\d+\.\d\d)", (out / "decay.svg").read_text(encoding="utf-8"))
    assert m is not None
    assert abs(float(m.group(1)) - 1.0) <= 0.1
    assert (out / "decay.csv").exists()
    g = (out / "g.csv").read_text(encoding="utf-8").splitlines()
    assert g[0] == "x,y,value" and len(g) == 2
    assert float(g[1].split(",")[2]) == pytest.approx(np.log(0.5), abs=2e-2)


def test_global_flags_accepted_after_subcommand(tmp_path):
    doc = {"task": "potential", "domain": {"preset": "unit_disk"},
           "params": {"compact": [{"type": "disk", "center": [0, 0], "radius": 0.36787944117144233}],
                      "samples": [[0.6065306597126334, 0]]}}
    path = _write(tmp_path, doc)
    assert main(["potential", "--config", str(path), "--grid", str(1 / 64), "--out-dir", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "potential.csv").read_text(encoding="utf-8").splitlines()
    assert float(lines[1].split(",")[2]) == pytest.approx(0.5, rel=0.02)


def test_bergman_task_rows(tmp_path):
    doc = {"task": "bergman", "domain": {"preset": "unit_disk"},
           "params": {"degree": 30, "samples": [[0, 0], [0.5, 0]]}}
    out = tmp_path / "o"
    assert main(["--config", str(_write(tmp_path, doc)), "--out-dir", str(out)]) == 0
    lines = (out / "bergman.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "z_re,z_im,delta,K,b,d_B"
    K0 = float(lines[1].split(",")[3])
    assert K0 == pytest.approx(1 / np.pi, rel=0.01)


def test_verify_domain_suite_on_coarse_disk(tmp_path):
    doc = {"task": "verify", "domain": DISK, "grid": {"h": 1 / 32}, "params": {"suite": "domain"}}
    t0 = time.perf_counter()
    code = main(["--config", str(_write(tmp_path, doc)), "--out-dir", str(tmp_path / "o")])
    elapsed = time.perf_counter() - t0
    report = json.loads((tmp_path / "o" / "report.json").read_text(encoding="utf-8"))
    assert code == 0
    assert elapsed < 60
    assert {c["status"] for c in report["checks"]} <= {"pass", "skip"}
    assert [c["id"] for c in report["checks"]] == ["D01", "D02", "D03", "D04", "D05"]


def test_verify_selected_check_lists_every_identifier(tmp_path, capsys):
    assert main(["verify", "--checks", "AC01", "--out-dir", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
    ids = [c["id"] for c in report["checks"]]
    assert ids == sorted(ACCEPTANCE)
    status = {c["id"]: c["status"] for c in report["checks"]}
    assert status["AC01"] == "pass"
    assert all(s == "skip" for k, s in status.items() if k != "AC01")
    assert len(capsys.readouterr().out.splitlines()) == len(ACCEPTANCE)


def test_verify_unknown_check_exits_two(tmp_path):
    assert main(["verify", "--checks", "AC99", "--out-dir", str(tmp_path)]) == 2


def test_invalid_jobs_exits_two(tmp_path):
    assert main(["verify", "--checks", "AC01", "--jobs", "0", "--out-dir", str(tmp_path)]) == 2


def test_shipped_schema_matches_validator():
    assert json.loads(DOCS_SCHEMA.read_text(encoding="utf-8")) == CONFIG_SCHEMA
