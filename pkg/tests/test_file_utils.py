import json

import pytest

from quillen_singularity.errors import ParseError
from quillen_singularity.fiber_integrals import IntegralSample, SampleGrid
from quillen_singularity.file_utils import (
    dump_json,
    load_json,
    read_sample_table,
    read_table_header,
    write_sample_table,
)


@pytest.fixture
def samples():
    grid = SampleGrid.geometric(1e-4, 1e-1, 3, 2)
    return [IntegralSample(t=t, value=0.1 * index - 1 / 3, est_error=1e-9 * index) for index, t in enumerate(grid.points())]


def test_csv_round_trip_is_exact(tmp_path, samples):
    path = str(tmp_path / "samples.csv")
    write_sample_table(samples, path)
    assert read_table_header(path) == ("t_re", "t_im", "value", "est_error")
    assert read_sample_table(path) == samples


def test_xlsx_round_trip(tmp_path, samples):
    path = str(tmp_path / "samples.xlsx")
    write_sample_table(samples, path)
    loaded = read_sample_table(path)
    assert len(loaded) == len(samples)
    for got, want in zip(loaded, samples):
        assert got.t == pytest.approx(want.t, rel=1e-12)
        assert got.value == pytest.approx(want.value, rel=1e-12)


def test_unknown_extension(tmp_path, samples):
    with pytest.raises(ParseError):
        write_sample_table(samples, str(tmp_path / "samples.txt"))
    with pytest.raises(ParseError):
        read_sample_table(str(tmp_path / "samples.json"))


def test_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t_re,t_im,value\n0.1,0,1.0\n")
    with pytest.raises(ParseError, match="est_error"):
        read_sample_table(str(path))


def test_bad_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t_re,t_im,value,est_error\n0.1,0,abc,0\n")
    with pytest.raises(ParseError, match=":2:"):
        read_sample_table(str(path))


def test_json(tmp_path):
    text = dump_json({"b": 1, "a": [1, 2]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    path = tmp_path / "doc.json"
    path.write_text(text)
    assert load_json(str(path)) == {"a": [1, 2], "b": 1}
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_json(str(path))
    assert json.loads(dump_json({"x": "1/3"})) == {"x": "1/3"}
