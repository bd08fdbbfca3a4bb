import json

import pytest

COMMON_MEAN = {
    "sources": [
        {"id": "y1", "kind": "normal_sample", "data": [0.523, 2.460, 1.119]},
        {"id": "y2", "kind": "normal_sample", "data": [0.072, -2.275, -4.554, -0.077]},
        {"id": "a1", "kind": "subjective_normal", "mean": 0, "sd": 3},
        {"id": "a2", "kind": "subjective_normal", "mean": 2, "sd": 4},
    ]
}


@pytest.fixture
def common_mean_record():
    return json.loads(json.dumps(COMMON_MEAN))


@pytest.fixture
def write_evidence(tmp_path):
    def write(record, name="evidence.json"):
        path = tmp_path / name
        path.write_text(json.dumps(record, indent=2))
        return str(path)

    return write


@pytest.fixture
def common_mean_file(write_evidence, common_mean_record):
    return write_evidence(common_mean_record)
