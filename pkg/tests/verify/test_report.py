import json
import math
import os
import sys

import numpy as np

# Add src directory to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', '..', 'src'))


def test_to_plain_converts_numpy_values():
    from gibbsdyn.verify.report import to_plain

    plain = to_plain({"a": np.float64(1.5), "b": np.arange(3), "c": (np.int64(2), math.inf),
                      "d": np.float64(-np.inf)})
    assert plain == {"a": 1.5, "b": [0, 1, 2], "c": [2, "inf"], "d": "-inf"}
    assert isinstance(plain["b"][0], int)


def test_report_json_is_stable():
    from gibbsdyn.verify.report import VerificationReport

    report = VerificationReport(name="demo", passed=np.bool_(True), statistic=np.float64(0.5), threshold=1.0,
                                stderr=0.1, sample_sizes={"snapshots": 10}, seed=3, runtime=1.23,
                                details={"max": math.inf})
    data = json.loads(report.to_json(include_runtime=False))
    assert "runtime" not in data
    assert data["passed"] is True
    assert data["details"] == {"max": "inf"}
    assert json.loads(report.to_json())["runtime"] == 1.23
    assert report.to_json(include_runtime=False) == report.to_json(include_runtime=False)


def test_timed_fills_runtime():
    from gibbsdyn.verify.report import timed

    with timed() as clock:
        sum(range(1000))
    assert clock["runtime"] >= 0.0
