import io
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from granet.assembly import read_particles, write_particles
from granet.cli import main, read_labels
from granet.graph import Particle, Partition, build_contact_network
from granet.metrics import build_context, modularity
from granet.render import community_color, render_2d, render_slices
from helpers import graph_from_points, two_triangles

SVG = "{http://www.w3.org/2000/svg}"


def _circles(path):
    root = ET.parse(path).getroot()
    return root.findall(f".//{SVG}circle")


def _two_triangles_csv(path):
    g = two_triangles()
    write_particles([Particle(i, tuple(p), 0.5) for i, p in enumerate(g.positions.tolist())], path)
    return path


@pytest.fixture
def four_block_csv(tmp_path):
    path = tmp_path / "fb.csv"
    assert main(["gen", "four-block", "--n", "4", "--out", str(path)]) == 0
    return path


def test_gen_to_stdout(capsys):
    assert main(["gen", "hex-patch", "--width", "5", "--height", "5"]) == 0
    parts = read_particles(io.StringIO(capsys.readouterr().out))
    assert len(parts) > 20


def test_gen_config_file(tmp_path):
    cfg = tmp_path / "fb.cfg"
    cfg.write_text("# small block\nnx = 4\nny = 6\nnz = 4\n")
    out = tmp_path / "fb.csv"
    assert main(["gen", "four-block", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["gen", "four-block", "--config", str(cfg), "--ny", "4", "--out", str(tmp_path / "b.csv")]) == 0
    assert len(read_particles(out)) > len(read_particles(tmp_path / "b.csv"))


@pytest.mark.parametrize("metric", ["ng", "gravity", "radiation", "nature"])
def test_cluster_outputs_are_consistent(tmp_path, four_block_csv, metric, capsys):
    out = tmp_path / metric
    rc = main(["cluster", "--in", str(four_block_csv), "--metric", metric, "--out-dir", str(out),
               "--trace", str(out / "trace.csv")])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    report = json.loads((out / "report.json").read_text())
    assert set(report) == {"metric", "q", "n_nodes", "n_edges", "n_communities", "sizes", "wall_ms", "config"}
    assert summary["q"] == report["q"]
    assert sum(report["sizes"]) == report["n_nodes"]
    assert report["sizes"] == sorted(report["sizes"], reverse=True)
    assert len(report["sizes"]) == report["n_communities"]
    sizes = [int(line.split(",")[1]) for line in (out / "sizes.csv").read_text().splitlines()[1:]]
    assert sizes == report["sizes"]

    parts, mapping = read_particles(four_block_csv, return_mapping=True)
    g = build_contact_network(parts)
    original = np.array(sorted(mapping))
    p = read_labels(out / "labels.csv", original)
    assert p.q == report["n_communities"]
    assert modularity(build_context(g, metric), p) == pytest.approx(report["q"], abs=1e-12)
    assert (out / "trace.csv").read_text().startswith("phase,step,q\n")


def test_labels_keep_original_ids(tmp_path):
    src = tmp_path / "p.csv"
    src.write_text("id,x,y,radius\n100,0,0,0.5\n7,1,0,0.5\n55,0.5,0.8660254037844386,0.5\n")
    out = tmp_path / "o"
    assert main(["cluster", "--in", str(src), "--metric", "ng", "--out-dir", str(out)]) == 0
    ids = [int(line.split(",")[0]) for line in (out / "labels.csv").read_text().splitlines()[1:]]
    assert ids == [7, 55, 100]


def test_cluster_reads_stdin(tmp_path, monkeypatch, capsys):
    buf = io.StringIO()
    g = two_triangles()
    write_particles([Particle(i, tuple(p), 0.5) for i, p in enumerate(g.positions.tolist())], buf)
    monkeypatch.setattr("sys.stdin", io.StringIO(buf.getvalue()))
    assert main(["cluster", "--metric", "ng", "--out-dir", str(tmp_path / "o")]) == 0
    assert json.loads(capsys.readouterr().out)["q"] == pytest.approx(0.5, abs=1e-12)


def test_deterministic_labels(tmp_path, four_block_csv):
    for k in (1, 2):
        assert main(["cluster", "--in", str(four_block_csv), "--out-dir", str(tmp_path / f"r{k}")]) == 0
    assert (tmp_path / "r1" / "labels.csv").read_bytes() == (tmp_path / "r2" / "labels.csv").read_bytes()
    a, b = (json.loads((tmp_path / f"r{k}" / "report.json").read_text()) for k in (1, 2))
    a.pop("wall_ms"), b.pop("wall_ms")
    assert a == b


def test_oracle_subcommand(tmp_path, capsys):
    src = _two_triangles_csv(tmp_path / "t.csv")
    assert main(["oracle", "--in", str(src), "--metric", "ng"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["examined"] == 203 and res["q"] == pytest.approx(0.5, abs=1e-12)
    assert res["labels"] == [0, 0, 0, 1, 1, 1]


# ------------------------------------------------------------- exit codes

def test_missing_input_file_is_usage_error(tmp_path):
    assert main(["cluster", "--in", str(tmp_path / "nope.csv")]) == 2


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["cluster", "--metric", "louvain"])
    assert info.value.code == 2


def test_bad_slices_is_usage_error(tmp_path, four_block_csv):
    rc = main(["cluster", "--in", str(four_block_csv), "--out-dir", str(tmp_path / "o"), "--plot", "--slices", "1,x"])
    assert rc == 2


def test_malformed_csv_is_data_error(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("id,x,y,radius\n0,0,0\n")
    assert main(["cluster", "--in", str(src)]) == 3


def test_edgeless_graph_is_metric_error(tmp_path):
    src = tmp_path / "far.csv"
    src.write_text("id,x,y,radius\n0,0,0,0.5\n1,9,0,0.5\n")
    assert main(["cluster", "--in", str(src), "--metric", "ng", "--out-dir", str(tmp_path / "o")]) == 4


def test_bad_generator_config_is_metric_error(tmp_path):
    assert main(["gen", "four-block", "--n", "5", "--out", str(tmp_path / "x.csv")]) == 4


# ---------------------------------------------------------------- render

def test_single_particle_svg(tmp_path):
    g = graph_from_points([(0.0, 0.0)])
    path = render_2d(g, Partition([0]), tmp_path / "one.svg")
    assert len(_circles(path)) == 1


def test_two_triangles_two_colours(tmp_path):
    g = two_triangles()
    path = render_2d(g, Partition([0, 0, 0, 1, 1, 1]), tmp_path / "tt.svg")
    fills = [c.get("fill") for c in _circles(path)]
    assert len(fills) == 6 and len(set(fills)) == 2
    assert fills[:3] == [community_color(0)] * 3


def test_render_dimension_errors(tmp_path):
    from granet.errors import DimensionMismatchError

    g2 = two_triangles()
    g3 = graph_from_points([(0, 0, 0), (1, 0, 0)])
    with pytest.raises(DimensionMismatchError):
        render_2d(g3, Partition([0, 0]), tmp_path / "x.svg")
    with pytest.raises(DimensionMismatchError):
        render_slices(g2, Partition([0] * 6), [0.0], tmp_path / "x")


def test_slices_use_consistent_colours(tmp_path, four_block_csv):
    out = tmp_path / "o"
    assert main(["cluster", "--in", str(four_block_csv), "--out-dir", str(out), "--plot", "--slices", "0,1,3"]) == 0
    parts, mapping = read_particles(four_block_csv, return_mapping=True)
    p = read_labels(out / "labels.csv", np.array(sorted(mapping)))
    g = build_contact_network(parts)
    for k, z in enumerate([0, 1, 3], start=1):
        circles = _circles(out / f"partition_slice{k}.svg")
        expected = sorted(community_color(p.labels[i]) for i in np.flatnonzero(np.isclose(g.positions[:, 2], z)))
        assert sorted(c.get("fill") for c in circles) == expected


def test_empty_slice_still_has_axes(tmp_path):
    g = graph_from_points([(0, 0, 0), (1, 0, 0)])
    (path,) = render_slices(g, Partition([0, 0]), [40.0], tmp_path / "e")
    root = ET.parse(path).getroot()
    assert _circles(path) == []
    assert root.findall(f".//{SVG}rect")


def test_render_subcommand(tmp_path):
    src = _two_triangles_csv(tmp_path / "t.csv")
    out = tmp_path / "o"
    assert main(["cluster", "--in", str(src), "--metric", "ng", "--out-dir", str(out)]) == 0
    assert main(["render", "--in", str(src), "--labels", str(out / "labels.csv"), "--out", str(tmp_path / "r.svg")]) == 0
    assert len({c.get("fill") for c in _circles(tmp_path / "r.svg")}) == 2


def test_render_rejects_partial_labels(tmp_path):
    src = _two_triangles_csv(tmp_path / "t.csv")
    labels = tmp_path / "l.csv"
    labels.write_text("id,community\n0,0\n")
    assert main(["render", "--in", str(src), "--labels", str(labels), "--out", str(tmp_path / "r.svg")]) == 3
