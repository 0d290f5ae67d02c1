import math

import pytest

from orthoexplore import instances
from orthoexplore.cli import main
from orthoexplore.geometry import format_polygon


@pytest.fixture
def l6_scenario(tmp_path):
    path = tmp_path / "l6.ini"
    path.write_text("[scenario]\nworld = builtin:l6\nseed = 4\n")
    return path


def test_bound_table(capsys):
    assert main(["bound", "--pmin", "1", "--pmax", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "# log base 2, alpha=1"
    assert lines[1] == "p,bound"
    values = {int(p): float(b) for p, b in (line.split(",") for line in lines[2:])}
    assert values[1] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert values[2] == pytest.approx(2 * math.sqrt(2) + 1, abs=1e-9)
    assert values[4] == pytest.approx(2 * (4 * math.sqrt(2) + 2) / 3, abs=1e-9)


def test_bound_bad_range(capsys):
    assert main(["bound", "--pmin", "3", "--pmax", "2"]) == 2
    assert "error:" in capsys.readouterr().err


def test_explore_writes_artifacts(l6_scenario, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["explore", str(l6_scenario), "--out", str(out)]) == 0
    assert "makespan=2" in capsys.readouterr().out
    metrics = (out / "metrics.csv").read_text()
    assert metrics.startswith("# seed=4 ")


def test_explore_uses_env_root(l6_scenario, tmp_path, monkeypatch):
    monkeypatch.setenv("ORTHOEXPLORE_OUT", str(tmp_path / "env"))
    assert main(["explore", str(l6_scenario), "--p", "2", "--seed", "9"]) == 0
    text = (tmp_path / "env" / "l6" / "metrics.csv").read_text()
    assert text.startswith("# seed=9 ") and "p,2" in text


def test_explore_twice_byte_identical(l6_scenario, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["explore", str(l6_scenario), "--out", str(d), "--mode", "grid"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


@pytest.mark.parametrize(
    "args",
    [
        ["explore", "missing.ini"],
        ["explore", "{scn}", "--p", "0"],
        ["explore", "{scn}", "--alpha", "2"],
        ["explore", "{scn}", "--start", "3", "3"],
    ],
)
def test_explore_errors_exit_2(args, l6_scenario, tmp_path, capsys):
    args = [a.format(scn=l6_scenario) for a in args]
    assert main(args + ["--out", str(tmp_path / "x")]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_batch(l6_scenario, tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["batch", str(l6_scenario), str(l6_scenario), "--reps", "2", "--out", str(out), "--artifacts"]) == 0
    rows = (out / "batch.csv").read_text().splitlines()
    assert rows[0] == "# seed=4,5 batch" and len(rows) == 6
    assert (out / "l6-seed5" / "metrics.csv").exists()


def test_compare(tmp_path, capsys):
    P, s = instances.two_room()
    (tmp_path / "two.poly").write_text(format_polygon(P, s))
    P, _ = instances.two_room()
    (tmp_path / "nostart.poly").write_text(format_polygon(P))
    assert main(["compare", str(tmp_path), "--p", "1", "2"]) == 0
    cap = capsys.readouterr()
    lines = cap.out.splitlines()
    assert lines[0] == "# seed=0 k=9"
    assert lines[1].startswith("instance,p,makespan")
    assert lines[2].startswith("two,1,8,8,8,") and lines[2].endswith(",pass")
    assert lines[3].startswith("two,2,4,4,4,") and lines[3].endswith(",pass")
    assert "nostart" in cap.err


def test_compare_empty_dir(tmp_path, capsys):
    assert main(["compare", str(tmp_path)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2
    assert main(["compare", str(tmp_path / "none")]) == 2


def test_render(l6_scenario, tmp_path):
    out = tmp_path / "f.svg"
    assert main(["render", str(l6_scenario), "-o", str(out), "--layers", "polygon", "tree"]) == 0
    assert "seed=4" in out.read_text()
