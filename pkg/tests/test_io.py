"""CSV artifact formats: write, re-read, reject malformed input."""
from __future__ import annotations

import numpy as np
import pytest

from faultline.geometry import PointCloud
from faultline.io import (
    IngestError,
    read_narrowed,
    read_points,
    read_polylines,
    write_narrowed,
    write_points,
    write_polylines,
)
from faultline.narrower import NarrowedPoints


def test_points_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    xy = rng.random((50, 2))
    vals = np.concatenate([rng.standard_normal(48), [1e-17, 1.0 / 3.0]])
    cloud = PointCloud.from_arrays(xy, vals)
    path = tmp_path / "pts.csv"
    write_points(path, cloud)
    back = read_points(path)
    np.testing.assert_array_equal(back.xy, cloud.xy)
    np.testing.assert_array_equal(back.values, cloud.values)


def test_points_file_shape(tmp_path):
    path = tmp_path / "pts.csv"
    write_points(path, PointCloud.from_arrays([[0.25, 0.5]], [2.0]))
    raw = path.read_bytes()
    assert raw.startswith(b"x,y,f\n")
    assert b"\r" not in raw
    assert raw.decode("utf-8").splitlines()[1] == "0.25,0.5,2.0"


def test_three_row_file_parses(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("x,y,f\n0,0,1\n0.5,0.25,2\n1,1,3\n", encoding="utf-8")
    cloud = read_points(path)
    assert len(cloud) == 3
    assert cloud.values.tolist() == [1.0, 2.0, 3.0]


def test_nan_row_is_named(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("x,y,f\n0,0,1\n0.5,0.5,NaN\n", encoding="utf-8")
    with pytest.raises(IngestError, match="row 3"):
        read_points(path)


def test_non_numeric_row_is_named(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("x,y,f\n0,0,1\nfoo,0.5,2\n", encoding="utf-8")
    with pytest.raises(IngestError, match="row 3"):
        read_points(path)


def test_duplicate_sites_list_both_rows(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("x,y,f\n0,0,1\n0.5,0.5,2\n0,0,3\n", encoding="utf-8")
    with pytest.raises(IngestError) as err:
        read_points(path)
    assert "row 2" in str(err.value) and "row 4" in str(err.value)


def test_bad_header_rejected(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("a,b,c\n0,0,1\n", encoding="utf-8")
    with pytest.raises(IngestError, match="header"):
        read_points(path)


def test_short_row_rejected(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("x,y,f\n0,0\n", encoding="utf-8")
    with pytest.raises(IngestError, match="row 2"):
        read_points(path)


def test_empty_data_rejected(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("x,y,f\n", encoding="utf-8")
    with pytest.raises(IngestError, match="no data"):
        read_points(path)


def test_narrowed_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    xy = rng.random((20, 2))
    tangents = rng.standard_normal((20, 2))
    tangents /= np.hypot(*tangents.T)[:, None]
    np_pts = NarrowedPoints(xy=xy, tangents=tangents, source_indices=np.arange(20) * 3)
    path = tmp_path / "narrowed.csv"
    write_narrowed(path, np_pts)
    back = read_narrowed(path)
    np.testing.assert_array_equal(back.xy, xy)
    np.testing.assert_array_equal(back.tangents, tangents)
    np.testing.assert_array_equal(back.source_indices, np_pts.source_indices)


def test_narrowed_without_sources(tmp_path):
    pts = NarrowedPoints(xy=np.array([[0.1, 0.2]]), tangents=np.array([[1.0, 0.0]]))
    path = tmp_path / "narrowed.csv"
    write_narrowed(path, pts)
    back = read_narrowed(path)
    assert back.source_indices is None


def test_polylines_round_trip(tmp_path):
    a = np.array([[0.0, 0.0], [1.0, 0.5], [2.0, 0.25]])
    b = np.array([[5.0, 5.0], [6.0, 6.0]])
    path = tmp_path / "poly.csv"
    write_polylines(path, [a, b])
    back = read_polylines(path)
    assert [fid for fid, _ in back] == [0, 1]
    np.testing.assert_array_equal(back[0][1], a)
    np.testing.assert_array_equal(back[1][1], b)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "fault_id,seq,x,y"


def test_polylines_rows_sorted_on_read(tmp_path):
    path = tmp_path / "poly.csv"
    path.write_text(
        "fault_id,seq,x,y\n1,1,6.0,6.0\n0,0,0.0,0.0\n1,0,5.0,5.0\n0,1,1.0,0.5\n",
        encoding="utf-8",
    )
    back = read_polylines(path)
    np.testing.assert_array_equal(back[0][1], [[0.0, 0.0], [1.0, 0.5]])
    np.testing.assert_array_equal(back[1][1], [[5.0, 5.0], [6.0, 6.0]])


def test_polylines_duplicate_seq_rejected(tmp_path):
    path = tmp_path / "poly.csv"
    path.write_text("fault_id,seq,x,y\n0,0,0.0,0.0\n0,0,1.0,1.0\n", encoding="utf-8")
    with pytest.raises(IngestError, match="seq"):
        read_polylines(path)


def test_empty_polylines_file(tmp_path):
    path = tmp_path / "poly.csv"
    write_polylines(path, [])
    assert read_polylines(path) == []


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        read_points(tmp_path / "absent.csv")
