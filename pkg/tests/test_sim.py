from fractions import Fraction

import pytest

from orthoexplore import instances
from orthoexplore.geometry import format_polygon
from orthoexplore.render import RenderSpec, render_svg
from orthoexplore.sim import (
    ScenarioError,
    artifact_texts,
    batch,
    batch_table,
    build_world,
    fmt_num,
    load_scenario,
    parse_scenario,
    run_scenario,
    write_artifacts,
)


def scen(body, name="t.ini"):
    return parse_scenario("[scenario]\n" + body, name)


def test_parse_defaults_and_sections():
    s = parse_scenario(
        "[scenario]\nworld = builtin:l6\np = 2\nstart = 1 3\n[sensor]\nmax_range = 4\n[thresholds]\ngoal_offset = 3\n",
        "runs/demo.ini",
    )
    assert (s.name, s.mode, s.p, s.start, s.seed) == ("demo", "geometric", 2, (1, 3), 0)
    assert s.sensor == {"max_range": 4} and s.thresholds == {"goal_offset": 3}
    assert s.echo()["start"] == "1 3"


@pytest.mark.parametrize(
    "text, match",
    [
        ("[other]\nx = 1\n", "missing \\[scenario\\]"),
        ("[scenario]\np = 2\n", "world"),
        ("[scenario]\nworld = a\np = two\n", "t.ini"),
        ("[scenario]\nworld = a\np = 0\n", "p must"),
        ("[scenario]\nworld = a\nmode = sonar\n", "mode"),
        ("[scenario]\nworld = a\nalpha = 2\n", "grid mode"),
        ("[scenario]\nworld = a\nstart = 1\n", "two numbers"),
        ("[scenario]\nworld = a\n[sensor]\nbeams = 3\n", "sensor field"),
        ("[scenario]\nworld = a\n[thresholds]\nfoo = 3\n", "threshold field"),
        ("not ini at all", "t.ini"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ScenarioError, match=match):
        parse_scenario(text, "t.ini")


def test_missing_scenario_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scenario(tmp_path / "nope.ini")


def test_world_resolution(tmp_path):
    P, s = instances.two_room()
    (tmp_path / "two.poly").write_text(format_polygon(P, s))
    (tmp_path / "a.ini").write_text("[scenario]\nworld = two.poly\n")
    w = build_world(load_scenario(tmp_path / "a.ini"))
    assert w.start == s
    with pytest.raises(FileNotFoundError):
        build_world(scen("world = missing.poly\n"))
    with pytest.raises(ScenarioError, match="outside"):
        build_world(scen("world = builtin:l6\nstart = 3 3\n"))
    with pytest.raises(ScenarioError, match="unknown builtin"):
        build_world(scen("world = builtin:moon\n"))
    with pytest.raises(ScenarioError, match="grid world"):
        build_world(scen("world = builtin:half-room\n"))


def test_unit_square_run():
    rec = run_scenario(scen("world = builtin:unit-square\n"))
    assert rec.makespan == 0 and len(rec.result.tree) == 1
    assert rec.metrics()["boundary_seen"] == 1.0


def test_grid_run_metrics():
    rec = run_scenario(scen("world = builtin:l6\nmode = grid\nresolution = 0.25\n[sensor]\nmax_range = 6\n"))
    m = rec.metrics()
    assert m["final_entropy"] == rec.entropy[-1][1]
    assert rec.makespan <= rec.result.tree_bound()
    assert m["scans"] >= 1


def test_alpha_two_grid_run_on_l6():
    base = "world = builtin:l6\nmode = grid\n[sensor]\nmax_range = 6\n"
    r1 = run_scenario(scen(base))
    r2 = run_scenario(scen(base.replace("grid\n", "grid\nalpha = 2\n")))
    assert r2.total_distance <= 2 * r1.total_distance
    assert r2.final_entropy <= r1.final_entropy + 1e-9


def test_batch_cardinality_and_seeds():
    a = scen("world = builtin:l6\nseed = 5\n", "a.ini")
    b = scen("world = builtin:two-room\np = 2\n", "b.ini")
    rows = batch([a, b], 3)
    assert len(rows) == 6
    assert [(s.name, seed) for s, seed, _, _ in rows] == [
        ("a", 5), ("a", 6), ("a", 7), ("b", 0), ("b", 1), ("b", 2)
    ]
    text = batch_table(rows)
    assert text.startswith("# seed=0,1,2,5,6,7 batch\n")
    assert len(text.splitlines()) == 8


def test_batch_reports_failures_and_continues():
    good = scen("world = builtin:l6\n", "good.ini")
    bad = scen("world = missing.poly\n", "bad.ini")
    rows = batch([bad, good])
    assert rows[0][2] is None and "not found" in rows[0][3]
    assert rows[1][2] is not None
    assert ",error," in batch_table(rows)


def test_same_seed_same_artifacts():
    s = scen("world = builtin:l6\nmode = grid\nseed = 3\n[sensor]\nmax_range = 6\nnoise_sigma = 0.05\n")
    a = artifact_texts(run_scenario(s))
    b = artifact_texts(run_scenario(s))
    assert a == b
    assert all(("seed=3" in v) if isinstance(v, str) else (b"seed=3" in v) for v in a.values())


def test_write_artifacts(tmp_path):
    rec = run_scenario(scen("world = builtin:two-room\np = 2\n"))
    files = write_artifacts(rec, tmp_path / "out")
    names = sorted(p.name for p in files)
    assert names == ["entropy.csv", "events.log", "metrics.csv", "overview.svg", "trajectories.csv", "tree.dot"]
    metrics = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
    assert "makespan,4" in metrics


def test_render_layers():
    rec = run_scenario(scen("world = builtin:l6\n"))
    svg = render_svg(rec.world, rec.result, RenderSpec(("polygon", "tree")), "seed=0")
    assert svg.startswith("<?xml") or svg.startswith("<svg")
    assert "seed=0" in svg
    with pytest.raises(ValueError):
        RenderSpec(("polygon", "heatmap"))


def test_fmt_num():
    assert fmt_num(Fraction(4)) == "4"
    assert fmt_num(Fraction(1, 3)) == "0.3333333333"
    assert fmt_num(None) == ""
    assert fmt_num(2.5) == "2.5"
