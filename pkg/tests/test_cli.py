import json

from starset.cli import main


def run(args):
    return main(args)


def test_approximate_disk_json(tmp_path):
    out = tmp_path / "disk.json"
    code = run(["approximate", "--set", "disk", "--degree", "2", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["command"] == "approximate"
    assert abs(payload["result"]["s_star"] - 1.0010) < 2e-3
    assert payload["config"]["seed"] == 0


def test_approximate_from_file_and_determinism(tmp_path):
    setfile = tmp_path / "disk.json"
    assert run(["dump-set", "--set", "disk", "--out", str(setfile)]) == 0
    out = tmp_path / "res.json"
    svg = tmp_path / "res.svg"
    argv = ["approximate", "--set", str(setfile), "--degree", "2", "--out", str(out), "--svg", str(svg)]
    assert run(argv) == 0
    first_json = out.read_bytes()
    first_svg = svg.read_bytes()
    assert run(argv) == 0
    assert out.read_bytes() == first_json
    assert svg.read_bytes() == first_svg
    assert first_svg.startswith(b"<svg")
    assert b"polyline" in first_svg


def test_missing_file_exit_2(tmp_path, capsys):
    code = run(["approximate", "--set", str(tmp_path / "nope.json"), "--degree", "2"])
    assert code == 2
    payload = json.loads(capsys.readouterr().out)
    assert "error" in payload


def test_volume_polar_disk(tmp_path):
    out = tmp_path / "vol.json"
    code = run(
        ["volume", "--set", "disk", "--method", "polar", "--center", "0,0", "--out", str(out)]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert abs(payload["result"]["value"] - 3.14159265) < 1e-3


def test_volume_degenerate_resolution_exit_2(tmp_path):
    code = run(
        ["volume", "--set", "disk", "--method", "grid", "--resolution", "0", "--out", str(tmp_path / "v.json")]
    )
    assert code == 2


def test_volume_polar_requires_center(tmp_path):
    code = run(["volume", "--set", "disk", "--method", "polar", "--out", str(tmp_path / "v.json")])
    assert code == 2


def test_kernel_outer_example_e_forced_empty(tmp_path):
    out = tmp_path / "ko.json"
    code = run(
        [
            "kernel", "outer", "--set", "exampleE", "--c", "0.9", "--r", "0.4",
            "--samples", "0", "--seed", "7",
            "--forced-dir=0.9,0.401", "--forced-dir=0.9,-0.401", "--forced-dir=-1,0",
            "--out", str(out),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["result"]["empty"] is True
    assert payload["result"]["farkas"]["margin"] > 0


def test_kernel_inner_example_a(tmp_path):
    out = tmp_path / "ki.json"
    svg = tmp_path / "ki.svg"
    code = run(
        [
            "kernel", "inner", "--set", "exampleA", "--directions", "8",
            "--mult-degree", "2", "--out", str(out), "--svg", str(svg),
        ]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["result"]["empty"] is False
    assert len(payload["result"]["vertices"]) == 8
    assert "chebyshev_center" in payload["result"]
    assert svg.read_bytes().startswith(b"<svg")


def test_table2_single_row(tmp_path):
    out = tmp_path / "table.csv"
    code = run(
        ["table2", "--rs", "0.3", "--degree", "4", "--grid-resolution", "500", "--out", str(out)]
    )
    assert code == 0
    import csv

    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    row = rows[0]
    assert abs(float(row["s_star"]) - 1.250) < 0.02
    assert abs(float(row["s_lb"]) - 1.250) < 1e-6
    assert abs(float(row["percent_error"]) - 35.1) < 3.0
