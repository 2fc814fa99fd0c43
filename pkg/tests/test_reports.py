import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bilinlab.fitting import dyadic_fit, loglog_fit
from bilinlab.reports import atomic_write, emit_plot, loglog_svg, to_jsonable, write_csv, write_json
from bilinlab.trilinear import certify_weight
from bilinlab.weights import SumPower


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_loglog_fit_recovers_power_laws(a, c):
    x = np.array([4, 8, 16, 32.0])
    fit = loglog_fit(x, 2.0 ** c * x ** a)
    assert fit.slope == pytest.approx(a, abs=1e-9) and fit.residual < 1e-9


def test_dyadic_fit_and_errors():
    assert dyadic_fit([0, 1, 2], [1, 2, 4]).slope == pytest.approx(1.0)
    with pytest.raises(ValueError):
        loglog_fit([1], [1])
    with pytest.raises(ValueError):
        loglog_fit([1, 2], [1, 0])


def test_jsonable_handles_numpy_and_special_floats():
    out = to_jsonable({"a": np.arange(2), "b": math.inf, "c": math.nan, "d": np.float64(0.5), "e": 1 + 2j,
                       (1, 2): np.bool_(True)})
    assert out == {"a": [0, 1], "b": "inf", "c": "nan", "d": 0.5, "e": [1.0, 2.0], "(1, 2)": True}
    json.dumps(out)


def test_json_carries_schema_and_config(tmp_path):
    doc = write_json(tmp_path / "r.json", {"x": 1}, {"seed": 7})
    assert doc["schema"] == 1 and doc["config"]["seed"] == 7
    assert json.loads((tmp_path / "r.json").read_text()) == doc


def test_csv_and_atomic_write(tmp_path):
    write_csv(tmp_path / "r.csv", ["a", "b"], [(1, 0.5)])
    assert (tmp_path / "r.csv").read_text() == "a,b\n1,0.5\n"
    atomic_write(tmp_path / "sub" / "x.txt", "hi")
    assert (tmp_path / "sub" / "x.txt").read_text() == "hi"
    assert not [p for p in (tmp_path / "sub").iterdir() if p.name.endswith(".tmp")]


def test_svg_is_deterministic_with_markers_and_fit(tmp_path):
    cert = certify_weight(SumPower(-0.5), (2, 4, 8, 16), restarts=2, seed=1)
    emit_plot(cert, tmp_path / "a.svg")
    emit_plot(cert, tmp_path / "b.svg")
    a = (tmp_path / "a.svg").read_bytes()
    assert a == (tmp_path / "b.svg").read_bytes()
    text = a.decode()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert text.count("<circle") == 4 and "<line" in text


def test_empty_report_writes_nothing(tmp_path):
    class Empty:
        def plot_data(self):
            return [], [], None, {}

    with pytest.raises(ValueError):
        emit_plot(Empty(), tmp_path / "e.svg")
    assert not (tmp_path / "e.svg").exists()


def test_svg_rejects_nonpositive_data():
    with pytest.raises(ValueError):
        loglog_svg([1, 2], [1, -1])
