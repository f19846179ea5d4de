"""CSV/JSON export and the SVG renderer."""

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from axisym import io as aio
from axisym import svg


def _fake_run(n=25, n_traces=4, seed=0):
    rng = np.random.default_rng(seed)
    times = np.sort(rng.uniform(0.0, 10.0, n))
    states = rng.normal(size=(n, 6))
    labels = ["H", "X1", "X2", "Y3", "Y4"][:n_traces]
    traces = {lbl: rng.normal(size=n) for lbl in labels}
    return times, states, traces, labels


def test_csv_header_and_roundtrip(tmp_path):
    times, states, traces, labels = _fake_run()
    path = tmp_path / "run.csv"
    used = aio.write_trajectory_csv(str(path), times, states, traces)
    assert used == labels
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,x,y,z,px,py,pz," + ",".join(labels)
    assert len(lines) == times.size + 1
    # 17 significant digits: parsing back must be bit-exact
    data = np.loadtxt(str(path), delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], times)
    assert np.array_equal(data[:, 1:7], states)
    for j, lbl in enumerate(labels):
        assert np.array_equal(data[:, 7 + j], traces[lbl])


def test_csv_trace_order_is_canonical(tmp_path):
    times, states, traces, _ = _fake_run(n_traces=5)
    shuffled = {k: traces[k] for k in ["Y4", "X2", "H", "Y3", "X1"]}
    used = aio.write_trajectory_csv(str(tmp_path / "run.csv"), times, states,
                                    shuffled)
    assert used == ["H", "X1", "X2", "Y3", "Y4"]


def test_meta_and_reports_serialize_numpy_types(tmp_path):
    meta_path = tmp_path / "meta.json"
    aio.write_meta(str(meta_path), {
        "drift": np.float64(1e-12),
        "steps": np.int64(400),
        "state": np.arange(3.0),
        "singular_in": frozenset({"r", "z"}),
    })
    loaded = json.loads(meta_path.read_text())
    assert loaded["steps"] == 400
    assert loaded["state"] == [0.0, 1.0, 2.0]
    assert loaded["singular_in"] == ["r", "z"]

    rep_path = tmp_path / "reports.json"
    aio.write_reports(str(rep_path), [{"check": "x", "pass": True}])
    assert json.loads(rep_path.read_text())[0]["pass"] is True

    with pytest.raises(TypeError):
        aio.write_meta(str(tmp_path / "bad.json"), {"fn": lambda: None})


def test_project_views():
    pts = np.asarray([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    assert np.array_equal(svg.project(pts, "xy"), pts[:, :2])
    assert np.array_equal(svg.project(pts, "xz"), pts[:, (0, 2)])
    assert np.array_equal(svg.project(pts, "yz"), pts[:, 1:])
    assert svg.project(pts, "3d").shape == (2, 2)
    with pytest.raises(ValueError):
        svg.project(pts, "zz")


def test_render_polyline_document():
    theta = np.linspace(0.0, 2.0 * np.pi, 40)
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    doc = svg.render_polyline(pts, title="circle", annotation="closes")
    root = ET.fromstring(doc)  # well-formed XML
    assert root.tag.endswith("svg")
    assert 'version="1.1"' in doc
    assert 'fill="white"' in doc
    lines = [el for el in root.iter() if el.tag.endswith("line")]
    assert len(lines) == 39
    assert lines[0].get("stroke") == "#ff0000"     # red at the start
    assert lines[-1].get("stroke") == "#0000ff"    # blue at the end
    assert "closes" in doc and "circle" in doc


def test_render_polyline_caps_segment_count():
    t = np.linspace(0.0, 1.0, 10_000)
    pts = np.column_stack([t, t * t])
    doc = svg.render_polyline(pts, max_segments=100)
    assert doc.count("<line ") <= 100


def test_render_polyline_rejects_bad_input():
    with pytest.raises(ValueError):
        svg.render_polyline(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        svg.render_polyline(np.zeros((5, 3)))


def test_write_projections_creates_four_views(tmp_path):
    theta = np.linspace(0.0, 4.0 * np.pi, 100)
    pos = np.column_stack([np.cos(theta), np.sin(theta), 0.1 * theta])
    paths = svg.write_projections(str(tmp_path / "orbit"), pos, title="orbit")
    assert len(paths) == 4
    for p in paths:
        ET.parse(p)  # each file parses standalone
    names = {p.rsplit("_", 1)[-1] for p in paths}
    assert names == {"xy.svg", "xz.svg", "yz.svg", "3d.svg"}
