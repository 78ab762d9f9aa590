"""Command line interface: subcommands, formats, exit codes, files."""

import json
import os
import subprocess
import sys

import pytest

from kohnmult import cli


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _domain_file(tmp_path, gens, name="domain.json"):
    return _write(
        tmp_path, name, {"variables": ["z1", "z2"], "generators": gens}
    )


def _run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, out


# -- multiplicity ------------------------------------------------------------

def test_multiplicity_json(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1^2", "z2^2"])
    code, out = _run(capsys, ["multiplicity", dom])
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "kohn-report/1"
    assert data["kind"] == "multiplicity"
    assert data["multiplicity"] == 4
    assert data["origin_isolated"] is True
    assert len(data["staircase"]) == 4


def test_multiplicity_table(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1^2", "z2^2"])
    code, out = _run(capsys, ["multiplicity", dom, "--format", "table"])
    assert code == 0
    assert "multiplicity" in out and "4" in out


def test_multiplicity_infinite(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1*z2"])
    code, out = _run(capsys, ["multiplicity", dom])
    assert code == 0
    data = json.loads(out)
    assert data["multiplicity"] == "infinite"
    assert data["staircase"] is None


# -- full-radical ------------------------------------------------------------

def test_full_radical_linear(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1", "z2"])
    code, out = _run(capsys, ["full-radical", dom])
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "kohn-trace/1"
    assert data["terminated"] is True
    assert data["order_bound"] == "1/4"
    assert [r["p"] for r in data["rounds"]] == [1]


def test_full_radical_cap_exit(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1^2", "z2^3 + z2*z1^9"])
    code, out = _run(
        capsys, ["full-radical", dom, "--power-cap", "8"]
    )
    assert code == 3


def test_full_radical_deformed(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1^2", "z2^3 + z2*z1^4"])
    code, out = _run(capsys, ["full-radical", dom])
    assert code == 0
    data = json.loads(out)
    assert [r["p"] for r in data["rounds"]] == [1, 6, 1]
    assert data["order_bound"] == "1/96"


# -- effective3d and verify --------------------------------------------------

def test_effective3d_writes_verifiable_certificate(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1", "z2"])
    cert_path = str(tmp_path / "cert.json")
    code, out = _run(
        capsys, ["effective3d", dom, "--out", cert_path]
    )
    assert code == 0
    envelope = json.loads(out)
    assert envelope["kind"] == "effective3d"
    assert envelope["final_order"] == "1/4"
    assert os.path.exists(cert_path)
    assert not [p for p in os.listdir(tmp_path) if ".tmp" in p]

    saved = json.loads(open(cert_path).read())
    assert saved["schema"] == "kohn-cert/1"

    code2, out2 = _run(
        capsys, ["verify", dom, cert_path]
    )
    assert code2 == 0
    assert "certificate ok" in out2


def test_verify_rejects_tampered_certificate(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1", "z2"])
    cert_path = str(tmp_path / "cert.json")
    _run(capsys, ["effective3d", dom, "--out", cert_path])
    data = json.loads(open(cert_path).read())
    for step in data["steps"]:
        if step["rule"] == "det":
            step["payload"] = ["z1"]
            break
    open(cert_path, "w").write(json.dumps(data))
    code, out = _run(
        capsys, ["verify", dom, cert_path]
    )
    assert code == 1
    assert "rejected" in out


def test_verify_rejects_foreign_domain(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1", "z2"])
    other = _domain_file(tmp_path, ["z1^2", "z2^2"], name="other.json")
    cert_path = str(tmp_path / "cert.json")
    _run(capsys, ["effective3d", dom, "--out", cert_path])
    code, out = _run(
        capsys, ["verify", other, cert_path]
    )
    assert code == 1


def test_effective3d_rejects_degenerate_family(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1^2", "z2^3 + z2*z1^4"])
    code, _ = _run(capsys, ["effective3d", dom])
    assert code == 3


# -- catlin-dangelo ----------------------------------------------------------

def test_catlin_dangelo_both_modes(tmp_path, capsys):
    code, out = _run(
        capsys, ["catlin-dangelo", "--M", "2", "--N", "3", "--K", "4"]
    )
    assert code == 0
    data = json.loads(out)
    assert data["kind"] == "catlin-dangelo"
    assert data["multiplicity"] == 6
    assert data["differentiation_counts"] == {
        "full_radical": 4, "effective": 5
    }


def test_catlin_dangelo_effective_mode(tmp_path, capsys):
    code, out = _run(
        capsys,
        ["catlin-dangelo", "--M", "2", "--N", "3", "--K", "4",
         "--mode", "effective"],
    )
    assert code == 0
    data = json.loads(out)
    assert data["kind"] == "effective-chain"
    assert data["final_order"] == "1/1024"


def test_catlin_dangelo_rejects_bad_params(tmp_path, capsys):
    code, _ = _run(
        capsys, ["catlin-dangelo", "--M", "3", "--N", "3", "--K", "2"]
    )
    assert code == 2


def test_catlin_dangelo_cap_exit(tmp_path, capsys):
    code, _ = _run(
        capsys,
        ["catlin-dangelo", "--M", "2", "--N", "3", "--K", "9",
         "--mode", "ineffective", "--power-cap", "8"],
    )
    assert code == 3


# -- matrix-lab --------------------------------------------------------------

def test_matrix_lab_triangular_report(tmp_path, capsys):
    mat = _write(
        tmp_path,
        "mat.json",
        {
            "vars": ["z1", "z2", "z3"],
            "entries": [
                ["z1", "z3", "0"],
                ["0", "z2", "z1"],
                ["0", "0", "z3"],
            ],
        },
    )
    code, out = _run(capsys, ["matrix-lab", mat])
    assert code == 0
    data = json.loads(out)
    assert data["kind"] == "triangular-comparison"
    assert data["narration_matches"] is False


def test_matrix_lab_general_report(tmp_path, capsys):
    mat = _write(
        tmp_path,
        "mat.json",
        {"vars": ["z1", "z2"], "entries": [["z1", "z2"], ["z2", "z1"]]},
    )
    code, out = _run(capsys, ["matrix-lab", mat])
    assert code == 0
    data = json.loads(out)
    assert data["kind"] == "procedure-comparison"
    assert data["verdict"] == "reducible"


def test_matrix_lab_rejects_non_square(tmp_path, capsys):
    mat = _write(
        tmp_path,
        "mat.json",
        {"vars": ["z1", "z2"], "entries": [["z1", "z2"]]},
    )
    code, _ = _run(capsys, ["matrix-lab", mat])
    assert code == 2


# -- error handling ----------------------------------------------------------

def test_missing_file_is_input_error(tmp_path, capsys):
    code, _ = _run(
        capsys, ["multiplicity", str(tmp_path / "nope.json")]
    )
    assert code == 2


def test_malformed_json_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = _run(capsys, ["multiplicity", str(bad)])
    assert code == 2


def test_bad_polynomial_is_input_error(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1 +- 3"])
    code, _ = _run(capsys, ["multiplicity", dom])
    assert code == 2


def test_out_files_are_written_atomically(tmp_path, capsys):
    dom = _domain_file(tmp_path, ["z1^2", "z2^2"])
    out_path = str(tmp_path / "report.json")
    code, _ = _run(
        capsys, ["multiplicity", dom, "--out", out_path]
    )
    assert code == 0
    data = json.loads(open(out_path).read())
    assert data["multiplicity"] == 4
    assert not [p for p in os.listdir(tmp_path) if ".tmp" in p]


# -- console entry point -----------------------------------------------------

def test_console_script_is_wired(tmp_path):
    dom = _domain_file(tmp_path, ["z1", "z2"])
    proc = subprocess.run(
        [sys.executable, "-m", "kohnmult.cli", "multiplicity", dom],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["multiplicity"] == 1
