import json
import subprocess
import sys
from importlib import resources

import pytest

from opforge import cli
from opforge.exactlin import QQ

FIXTURE = str(resources.files("opforge") / "examples" / "com_q.opf")


def run(*argv):
    return cli.run(list(argv))


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data, indent=1), encoding="utf-8")
    return str(p)


def test_empty_workspace():
    ws = cli.parse_workspace([])
    assert ws.ring == QQ
    assert all(not ws.names(k) for k in cli.KINDS)


def test_fixture_loads_and_checks():
    ws = cli.parse_workspace([FIXTURE])
    assert "ComQ" in ws.names("operad")
    code, text = run("check-operad", "--operad", "ComQ", "-w", FIXTURE)
    assert code == 0, text


def test_d_squared_error_names_degree(tmp_path):
    bad = write(tmp_path, "bad.opf", {
        "schema": "opforge/1", "ring": "Q",
        "complex": {"B": {"basis": {"0": ["a"], "1": ["b"], "2": ["c"]},
                          "d": {"0": [[0, 0, "1"]], "1": [[0, 0, "1"]]}}},
    })
    with pytest.raises(cli.ValidationError) as err:
        cli.parse_workspace([bad])
    assert "degree 0" in str(err.value)
    assert "bad.opf" in str(err.value)
    code, text = run("homology", "--complex", "B", "-w", bad)
    assert code == 2
    assert "degree 0" in text


def test_probe_example_fails_with_witness():
    code, text = run("probe-admissibility", "--operad", "Com", "--ring", "F2", "--max-arity", "2")
    assert code == 1
    assert "nonzero H⁰ class x² in the arity-2 component" in text
    assert run("probe-admissibility", "--operad", "Com", "--ring", "Q")[0] == 0


def test_em_aw_example():
    code, text = run("em-aw", "--level", "3", "--ring", "Q")
    assert code == 0
    assert "AW∘EM = id verified" in text


def test_homology_of_cone_fixture():
    code, text = run("homology", "--complex", "C1", "-w", FIXTURE)
    assert code == 0
    assert "H^0: 0" in text and "H^1: 0" in text


@pytest.mark.parametrize("argv", [
    ["check-splitting", "--splitting", "rat", "-w", FIXTURE],
    ["check-module", "--module", "A_reg", "-w", FIXTURE],
    ["free", "--operad", "Ass", "--ring", "F3", "--truncation", "3"],
    ["homotopy-identity", "--operad", "Com", "--ring", "Q", "--max-arity", "3"],
    ["pushout-filtration", "--algebra", "A", "-w", FIXTURE, "--cofibration", "free"],
    ["envelope", "--algebra", "A", "-w", FIXTURE, "--truncation", "2"],
    ["dold-kan", "--ring", "F5", "--seed", "3"],
    ["omega", "--n", "1", "--truncation", "2"],
    ["prop-hom", "--operad", "uCom", "--source", "3", "--target", "2"],
    ["prop-check", "--operad", "Ass"],
    ["mo", "--operad", "Com", "--splitting", "rational"],
    ["power-by-category", "--operad", "Com", "--category", "arrow"],
    ["induce", "--ring", "Q"],
    ["restrict", "--ring", "Q"],
    ["weq", "--map", "identity"],
    ["strong-eq", "--map", "identity"],
], ids=lambda a: a[0])
def test_verbs_pass(argv):
    code, text = run(*argv)
    assert code == 0, text


def test_quasi_iso_verb(tmp_path):
    ws = write(tmp_path, "m.opf", {
        "schema": "opforge/1", "ring": "Q",
        "complex": {"K": {"basis": {"0": ["v"]}}, "Z": {"basis": {}}},
        "map": {"id": {"source": "K", "target": "K", "blocks": {"0": [[0, 0, "1"]]}},
                "zero": {"source": "K", "target": "K"}},
    })
    cross = write(tmp_path, "x.opf", {
        "schema": "opforge/1", "complex": {"P": {"basis": {"0": ["p"]}}},
        "map": {"from_cone": {"source": "C1", "target": "P"}},
    })
    assert run("quasi-iso", "--map", "id", "-w", ws)[0] == 0
    code, text = run("quasi-iso", "--map", "zero", "-w", ws)
    assert code == 1
    assert "witness" in text
    assert run("quasi-iso", "--map", "from_cone", "-w", FIXTURE, "-w", cross)[0] == 1
    assert run("quasi-iso", "--map", "missing", "-w", ws)[0] == 2


def test_equivalence_failure_exit_one():
    code, text = run("weq", "--map", "ass-to-com")
    assert code == 1
    assert "2 vs 1" in text


@pytest.mark.parametrize("argv", [
    ["no-such-verb"],
    ["homology", "--complex", "C1", "-w", "/nonexistent/file.opf"],
    ["omega", "--ring", "F2", "--n", "1"],
    ["check-operad", "--operad", "Nope"],
])
def test_usage_errors_exit_two(argv):
    assert run(*argv)[0] == 2


def test_bad_thread_setting(monkeypatch):
    monkeypatch.setenv("OPFORGE_THREADS", "zero")
    assert run("em-aw", "--level", "1")[0] == 2
    monkeypatch.setenv("OPFORGE_THREADS", "2")
    assert run("em-aw", "--level", "1")[0] == 0


@pytest.mark.parametrize("argv", [
    ["em-aw", "--level", "2", "--seed", "7", "--ring", "F5"],
    ["probe-admissibility", "--operad", "Com", "--ring", "F2", "--max-arity", "2"],
    ["check-operad", "--operad", "ComQ", "-w", FIXTURE],
])
def test_json_report_replays_byte_for_byte(argv):
    code, text = run(*argv, "--format", "json")
    report = json.loads(text)
    assert report["schema"] == "opforge-report/1"
    code2, text2 = cli.replay(report)
    assert (code2, text2) == (code, text)


def test_out_flag_writes_file(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["em-aw", "--level", "1", "--format", "json", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["verdict"] == "pass"


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "opforge.cli", "em-aw", "--level", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "AW∘EM = id" in proc.stdout


def test_unknown_kind_reports_line(tmp_path):
    p = write(tmp_path, "k.opf", {"schema": "opforge/1", "widget": {}})
    with pytest.raises(cli.ParseError) as err:
        cli.parse_workspace([p])
    assert "k.opf:" in str(err.value)


def test_duplicate_names_rejected(tmp_path):
    a = write(tmp_path, "a.opf", {"schema": "opforge/1", "complex": {"X": {"basis": {"0": ["a"]}}}})
    b = write(tmp_path, "b.opf", {"schema": "opforge/1", "complex": {"X": {"basis": {"0": ["b"]}}}})
    with pytest.raises(cli.ValidationError):
        cli.parse_workspace([a, b])
