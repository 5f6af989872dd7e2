import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from liedeconv.errors import ConfigError
from liedeconv.experiment import (
    CSV_HEADER,
    ExperimentConfig,
    dumps17,
    fit_loglog_slope,
    run_rate_sweep,
    theoretical_slope,
    version_string,
    weyl_check,
)

BASE = {
    "group": "Torus1",
    "truth_name": "poly",
    "truth_params": {"band": 200},
    "density_name": "poly_decay",
    "density_params": {"nu": 1, "band": 64},
    "epsilon": 0.5,
    "s": 3,
    "nu": 1,
    "A": 1,
    "n_grid": [64, 128, 256],
    "replicates": 8,
    "seed": 5,
}


def config(**kw):
    doc = dict(BASE)
    doc.update(kw)
    return ExperimentConfig.from_dict(doc)


def schema():
    text = resources.files("liedeconv").joinpath("schemas/risk_report.schema.json").read_text()
    return json.loads(text)


@pytest.mark.parametrize("key,value", [
    ("group", "SU2"), ("truth_name", "nope"), ("density_name", "gauss"), ("epsilon", -1.0),
    ("epsilon", float("nan")), ("s", 0.4), ("nu", -0.5), ("A", 0.0), ("n_grid", []),
    ("n_grid", [64, 32]), ("n_grid", [1, 2]), ("n_grid", [10.5]), ("replicates", 3),
    ("seed", -1), ("threads", 0),
])
def test_config_rejects_bad_values(key, value):
    with pytest.raises(ConfigError):
        config(**{key: value})


def test_config_missing_and_unknown_keys():
    doc = dict(BASE)
    del doc["seed"]
    with pytest.raises(ConfigError, match="seed"):
        ExperimentConfig.from_dict(doc)
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict({**BASE, "colour": 1})


def test_config_output_relative_to_file(tmp_path):
    sub = tmp_path / "cfg"
    sub.mkdir()
    (sub / "a.json").write_text(json.dumps({**BASE, "output": "../out/r.csv"}))
    cfg = ExperimentConfig.load(sub / "a.json")
    assert cfg.output == str(tmp_path / "out" / "r.csv")
    (sub / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(sub / "bad.json")


def test_fit_exact_power_law():
    pairs = [(n, 3.0 * n ** -0.7, 0.01 * n ** -0.7) for n in (10, 100, 1000, 10_000)]
    slope, se = fit_loglog_slope(pairs)
    assert slope == pytest.approx(-0.7, abs=1e-12)
    assert se > 0


def test_fit_constant_and_degenerate():
    slope, se = fit_loglog_slope([(n, 2.0, 0.0) for n in (4, 8, 16)])
    assert abs(slope) < 1e-12 and se == pytest.approx(0, abs=1e-12)
    assert fit_loglog_slope([(8, 1.0, 0.1)]) == (None, None)
    assert fit_loglog_slope([(8, 1.0, 0.1), (8, 2.0, 0.1)]) == (None, None)
    with pytest.raises(ValueError):
        fit_loglog_slope([(8, 1.0, 0.1), (16, 0.0, 0.1)])


def test_fit_weights_against_ols_on_equal_relative_errors(rng):
    n = np.array([100, 200, 400, 800, 1600])
    risk = n ** -0.5 * np.exp(0.05 * rng.standard_normal(5))
    slope, _ = fit_loglog_slope(zip(n, risk, 0.1 * risk))
    ols = np.polyfit(np.log(n), np.log(risk), 1)[0]
    assert slope == pytest.approx(ols, abs=1e-12)


def test_theoretical_slope():
    assert theoretical_slope(3, 1, 1) == pytest.approx(-2 / 3)
    assert theoretical_slope(2, 0, 3) == pytest.approx(-4 / 7)


def test_synthetic_mode_recovers_exponent():
    cfg = config(n_grid=[128, 256, 512, 1024, 2048], synthetic_risk={"scale": 4.0})
    with pytest.warns(RuntimeWarning):
        table = run_rate_sweep(cfg)
    assert abs(table.fitted_slope - (-2 / 3)) < 1e-12
    assert len(table.rows) == 5 and all(r.std_error == 0 for r in table.rows)


def test_single_n_has_no_slope():
    with pytest.warns(RuntimeWarning):
        table = run_rate_sweep(config(n_grid=[64]))
    assert table.fitted_slope is None and table.slope_stderr is None
    doc = table.report(config(n_grid=[64]))
    jsonschema.validate(doc, schema())


def test_csv_header_and_report_schema(tmp_path):
    cfg = config()
    with pytest.warns(RuntimeWarning, match="proven upper rate"):
        table = run_rate_sweep(cfg)
    lines = table.csv_text().splitlines()
    assert lines[0] == "n,T,mean_risk,std_error,bias_sq,variance_term,tail_term"
    assert tuple(lines[0].split(",")) == CSV_HEADER
    assert [int(l.split(",")[0]) for l in lines[1:]] == [64, 128, 256]
    csv_path, json_path = table.write(tmp_path / "r" / "out.csv", cfg)
    doc = json.loads(json_path.read_text())
    jsonschema.validate(doc, schema())
    assert doc["table"]["rows"][0]["n"] == 64
    # 17 significant digits survive the round trip
    row = table.rows[1]
    assert doc["table"]["rows"][1]["mean_risk"] == row.mean_risk
    assert float(lines[2].split(",")[2]) == row.mean_risk


def test_row_fields_consistent():
    with pytest.warns(RuntimeWarning):
        table = run_rate_sweep(config(replicates=16))
    for r in table.rows:
        assert r.T == math.floor(r.n ** (2 / 9))
        assert r.bias_sq >= r.tail_term > 0
        assert r.mean_risk == pytest.approx(r.bias_sq + r.variance_term * 15 / 16, rel=1e-10)


def test_sweep_rows_do_not_depend_on_grid():
    with pytest.warns(RuntimeWarning):
        a = run_rate_sweep(config(n_grid=[64, 128, 256]))
        b = run_rate_sweep(config(n_grid=[128, 512]))
    assert a.rows[1] == b.rows[0]


def test_nu_mismatch_uses_profiled_value():
    # uniform-decay kernel band with nu = 1 profile, declared as nu = 3
    with pytest.warns(RuntimeWarning, match="differ by more than"):
        table = run_rate_sweep(config(nu=3, synthetic_risk={"scale": 1.0}))
    assert abs(table.nu_hat - 1) < 0.15
    assert table.nu_used == table.nu_hat
    assert any("nu_hat" in w for w in table.warnings)


def test_supersmooth_flag_recorded():
    cfg = config(density_name="heat", density_params={"t": 0.05}, nu=0, synthetic_risk={"scale": 1.0})
    with pytest.warns(RuntimeWarning):
        table = run_rate_sweep(cfg)
    assert table.supersmooth
    assert any("supersmooth" in w for w in table.warnings)


def test_dumps17_roundtrip():
    doc = {"a": [0.1, 1 / 3, 1e-300, None], "b": {"c": True, "d": "x"}, "e": float("nan"), "f": 7}
    back = json.loads(dumps17(doc))
    assert back["a"][:3] == [0.1, 1 / 3, 1e-300] and back["a"][3] is None
    assert back["e"] is None and back["f"] == 7 and back["b"] == {"c": True, "d": "x"}


def test_version_string():
    assert version_string().startswith("0.1.0")


@pytest.mark.parametrize("group,expected", [("SO3", 1.5), ("Torus2", 1.0), ("Torus1", 0.5)])
def test_weyl_check(group, expected):
    doc = weyl_check(group)
    assert doc["expected"] == expected
    assert abs(doc["exponent"] - expected) < 0.05
    assert len(doc["rows"]) == 13
    with pytest.raises(ValueError):
        weyl_check(group, 10, 1)
