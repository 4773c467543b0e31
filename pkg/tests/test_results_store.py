import json

import pandas as pd
import pytest

from src import __version__
from src.data.results_store import ResultsStore, provenance
from src.experiments.config import ExperimentConfig, config_hash


@pytest.fixture
def store():
    return ResultsStore()


@pytest.fixture
def frame():
    return pd.DataFrame({"scheme": ["switch_control", "parallel"], "n": [5, 5], "rmse": [4.0e-4, 1 / 3]})


@pytest.fixture
def header():
    config = ExperimentConfig(seed=7)
    return provenance(config, "simulate")


def test_provenance_fields():
    config = ExperimentConfig(seed=7)
    header = provenance(config, "bounds")
    assert header == {"command": "bounds", "config_hash": config_hash(config), "seed": 7, "version": __version__}


class TestCsv:
    def test_header_then_table(self, store, frame, header):
        text = store.render(frame, "csv", header)
        lines = text.splitlines()
        assert lines[0] == "# command: simulate"
        assert lines[4] == "scheme,n,rmse"
        assert lines[6] == "parallel,5,0.3333333333"

    def test_round_trip_through_file(self, store, frame, header, tmp_path):
        path = tmp_path / "out" / "results.csv"
        store.write(frame, str(path), "csv", header)
        read_header, rows = store.read(str(path))
        assert read_header["seed"] == "7"
        assert read_header["command"] == "simulate"
        assert list(rows["scheme"]) == ["switch_control", "parallel"]
        assert rows["rmse"][0] == pytest.approx(4e-4)

    def test_byte_identical_output(self, store, frame, header, tmp_path):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        store.write(frame, str(first), "csv", header)
        store.write(frame.copy(), str(second), "csv", dict(reversed(list(header.items()))))
        assert first.read_bytes() == second.read_bytes()


class TestJson:
    def test_document_layout(self, store, frame, header):
        document = json.loads(store.render(frame, "json", header))
        assert document["provenance"]["seed"] == 7
        assert document["rows"][1] == {"scheme": "parallel", "n": 5, "rmse": pytest.approx(1 / 3)}

    def test_read_back(self, store, frame, header, tmp_path):
        path = tmp_path / "results.json"
        store.write(frame, str(path), "json", header)
        read_header, rows = store.read(str(path))
        assert read_header["command"] == "simulate"
        assert rows.shape == (2, 3)


def test_unknown_format(store, frame, header):
    with pytest.raises(ValueError):
        store.render(frame, "xml", header)


def test_missing_file(store, tmp_path):
    with pytest.raises(FileNotFoundError):
        store.read(str(tmp_path / "absent.csv"))
