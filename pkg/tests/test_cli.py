import json
import subprocess
import sys

import pytest

from critgroup.cli import main
from critgroup.matrix import IntMatrix, write_matrix
from critgroup.pipeline import extract_L3
from critgroup.graphs import LayeredSpec

JSON_KEYS = {"spec", "method", "free_rank", "invariant_factors", "tree_count", "elapsed_ms"}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "spec, method, text, trees",
    [
        ("2,3", "closed", "Z/2 ⊕ Z/6", 12),
        ("2,2,2,2", "snf", "Z/4 ⊕ Z/8 ⊕ Z/8", 256),
        ("2,2", "snf", "Z/4", 4),
        ("2,2", "pipeline", "Z/4", 4),
        ("2,2", "closed", "Z/4", 4),
    ],
)
def test_group_text(capsys, spec, method, text, trees):
    code, out, _ = run(capsys, "group", spec, "--method", method)
    assert code == 0
    assert "= %s\n" % text in out
    assert "spanning trees: %d" % trees in out


def test_group_json_schema_and_determinism(capsys):
    outputs = []
    for method in ("snf", "pipeline", "closed"):
        code, out, _ = run(capsys, "group", "2,3,2,3", "--method", method, "--json")
        assert code == 0
        data = json.loads(out)
        assert set(data) == JSON_KEYS
        assert data["free_rank"] == 0
        data.pop("elapsed_ms")
        data.pop("method")
        outputs.append(data)
    assert outputs[0] == outputs[1] == outputs[2]
    _, a, _ = run(capsys, "group", "2,2,2,2,2", "--json")
    _, b, _ = run(capsys, "group", "2,2,2,2,2", "--json")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "elapsed_ms"}
    assert strip(a) == strip(b)


def test_group_pipeline_stages(capsys):
    code, out, _ = run(capsys, "group", "2,2,2,2", "--method", "pipeline", "--json", "--stages")
    assert code == 0
    data = json.loads(out)
    assert [s["stage"] for s in data["stage_reports"]] == ["stage1", "stage2", "final_k4"]
    assert all(s["unimodular_ok"] and s["cokernel_ok"] for s in data["stage_reports"])


def test_group_exit_codes(capsys):
    assert run(capsys, "group", "2,x")[0] == 2
    assert run(capsys, "group", "2, 3")[0] == 2
    code, _, err = run(capsys, "group", "3,1,3", "--method", "closed")
    assert code == 3 and "refused" in err
    assert run(capsys, "group", "3,1,3", "--method", "pipeline")[0] == 3
    assert run(capsys, "group", "3,1,3")[0] == 0
    with pytest.raises(SystemExit) as exc:
        main(["group", "2,2", "--method", "magic"])
    assert exc.value.code == 2


def test_verify_single(capsys):
    code, out, _ = run(capsys, "verify", "2,2,2,2,2")
    assert code == 0
    assert "PASS" in out and "sigma1=2 sigma2=4" in out
    code, out, _ = run(capsys, "verify", "3,1,3")
    assert code == 0
    assert out.startswith("PASS") and "refused" in out


def test_verify_grid_sorted_json(capsys):
    code, out, _ = run(capsys, "verify", "--grid", "k=2..3", "n=2..3", "--json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 4 + 8
    specs = [tuple(int(x) for x in r["spec"].split(",")) for r in rows]
    assert specs == sorted(specs, key=lambda p: (len(p), p))
    assert all(r["status"] == "PASS" for r in rows)


def test_verify_grid_parallel_matches_serial(capsys):
    _, serial, _ = run(capsys, "verify", "--grid", "2..4", "2..3")
    _, parallel, _ = run(capsys, "verify", "--grid", "2..4", "2..3", "--jobs", "2")
    assert serial == parallel


def test_verify_oversized_grid(capsys):
    code, _, err = run(capsys, "verify", "--grid", "2..9", "2..5")
    assert code == 2 and "limit" in err


def test_snf_command(capsys, tmp_path):
    f = tmp_path / "d.txt"
    write_matrix(IntMatrix.diag([4, 6]), f)
    code, out, _ = run(capsys, "snf", str(f))
    assert code == 0 and out == "1: 2\n2: 12\n"

    write_matrix(IntMatrix.identity(3), f)
    code, out, _ = run(capsys, "snf", str(f), "--transforms")
    assert code == 0 and out.startswith("1: 1\n2: 1\n3: 1\nP:\n3 3\n")

    L3, _ = extract_L3(LayeredSpec((2, 2)))
    write_matrix(L3, f)
    code, out, _ = run(capsys, "snf", str(f), "--json")
    data = json.loads(out)
    prod = 1
    for d in data["invariant_factors"]:
        prod *= d
    assert prod == 4

    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n1 2\n")
    assert run(capsys, "snf", str(bad))[0] == 2
    assert run(capsys, "snf", str(tmp_path / "missing.txt"))[0] == 2


def test_export_command(capsys, tmp_path):
    out_file = tmp_path / "g.dot"
    assert run(capsys, "export", "6,4,5,3,4", "--dot", str(out_file))[0] == 0
    text = out_file.read_text()
    assert text.count(" -- ") == 71
    nodes = {ln.strip().rstrip(";") for ln in text.splitlines() if ln.strip().startswith("p") and "--" not in ln}
    assert len(nodes) == 22
    code, out, _ = run(capsys, "export", "1,1")
    assert code == 0 and out.count(" -- ") == 1 and "p1_v1 -- p2_v1" in out
    code, out, _ = run(capsys, "export", "2,2")
    assert out.count("subgraph cluster_") == 2
    assert run(capsys, "export", "2,2", "--dot", str(tmp_path / "nope" / "g.dot"))[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "critgroup", "group", "2,2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "Z/4" in proc.stdout
