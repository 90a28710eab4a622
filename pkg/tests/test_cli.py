import json

import pytest

from qdrinfeld import cli
from qdrinfeld.series import PrecisionExhausted


def run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_lattice_json(capsys):
    code, out, _ = run(capsys, "--q", "3", "--a", "0,0,1", "lattice")
    data = json.loads(out)
    assert code == 0 and data["schema"] == 1
    assert [v["degree"] for v in data["vectors"][:3]] == [2, 3, 4]


def test_zeta_and_period(capsys):
    code, out, _ = run(capsys, "--q", "3", "--a", "0,0,1", "zeta")
    assert code == 0 and json.loads(out)["Z1"] == "-1"
    code, out, _ = run(capsys, "--q", "3", "--a", "0,0,1", "period")
    data = json.loads(out)
    assert code == 0 and data["v_xi"] == "1/2" and data["eta"] == 2


def test_deterministic(capsys):
    args = ("--q", "3", "--a", "0,0,1", "trace-cert", "--nb", "2", "--nmu", "2")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first[0] == 0 and first[1] == second[1]


def test_threads_do_not_change_output(capsys, monkeypatch):
    args = ("--q", "2", "--a", "0,0,0,1", "trace-cert", "--nb", "2", "--nmu", "2")
    serial = run(capsys, *args)[1]
    monkeypatch.setenv("QDRINFELD_THREADS", "4")
    assert run(capsys, *args)[1] == serial


def test_csv_exponent_lemma(capsys):
    code, out, _ = run(capsys, "--format", "csv", "exponent-lemma", "--dmax", "5", "--qmax", "3")
    assert code == 0
    assert out.splitlines() == ["d,j,q,lhs,rhs,ok", "4,2,3,8,21,true", "5,2,2,10,12,true", "5,2,3,10,42,true",
                                "5,3,3,10,57,true"]


def test_full_exponent_lemma(capsys):
    code, out, _ = run(capsys, "--format", "csv", "exponent-lemma", "--dmax", "64", "--qmax", "64")
    rows = out.splitlines()[1:]
    assert code == 0 and rows and all(r.endswith(",true") for r in rows)


def test_config_and_precedence(tmp_path, capsys):
    cfg = write(tmp_path, "[field]\np = 2\n[context]\na = 0,0,1\nb = 1\n[job]\nN = 2\nl = 1\n")
    code, out, _ = run(capsys, "--config", cfg, "period")
    assert code == 0 and json.loads(out)["target"] == "eps(N=2,l=1)"
    code, out, _ = run(capsys, "--config", cfg, "period", "--N", "1")
    assert json.loads(out)["target"] == "eps(N=1,l=1)"
    code, out, _ = run(capsys, "--config", cfg, "--q", "3", "period")
    assert code == 0 and json.loads(out)["eta"] == 2


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "z.json"
    code, out, _ = run(capsys, "--q", "3", "--a", "0,0,1", "--out", str(dest), "zeta")
    assert code == 0 and out == "" and json.loads(dest.read_text())["t"] == -1


@pytest.mark.parametrize("text,fragment", [
    ("[field]\np = 3\n[context]\na = 0,0,1\nb = 0\n", ":5: b must be a nonzero constant"),
    ("[field]\np = 4\n", "field"),
    ("[context]\na = 0,0,1\nfoo = 1\n", ":3: unknown key"),
    ("[bogus]\nx = 1\n", ":1: unknown section"),
    ("[precision]\nprec = -4\n", ":2: prec must be positive"),
    ("[context]\na = 0,0,2\n", "monic"),
])
def test_validation_errors(tmp_path, capsys, text, fragment):
    code, out, err = run(capsys, "--config", write(tmp_path, text), "zeta")
    assert code == 2 and out == "" and fragment in err


def test_flag_validation(capsys):
    assert run(capsys, "--q", "6", "zeta")[0] == 2
    assert run(capsys, "--q", "3", "--b", "0", "zeta")[0] == 2
    assert run(capsys, "--q", "3", "qexp", "--l", "5")[0] == 2
    assert run(capsys, "--q", "3", "torsion", "--beta", "fT")[0] == 2
    assert run(capsys, "--q", "3", "torsion", "--beta", "0")[0] == 2


def test_precision_exit_code(capsys, monkeypatch):
    def exhausted(*args, **kwargs):
        raise PrecisionExhausted("window cap reached")
    monkeypatch.setattr(cli, "qt_exp_resolved", exhausted)
    code, _, err = run(capsys, "--q", "3", "qexp")
    assert code == 3 and "precision" in err


def test_failed_certificate_exit_code(capsys, monkeypatch):
    real = cli.certify

    def failing(*args, **kwargs):
        cert = real(*args, **kwargs)
        cert.verdict = "failed"
        return cert
    monkeypatch.setattr(cli, "certify", failing)
    code, out, _ = run(capsys, "--q", "3", "trace-cert", "--nb", "1", "--nmu", "1")
    assert code == 4 and json.loads(out)["items"][0]["verdict"] == "failed"


def test_torsion_noncoprime(capsys):
    code, out, _ = run(capsys, "--q", "3", "torsion", "--beta", "fT", "--allow-noncoprime")
    data = json.loads(out)
    assert code == 0 and data["count"] == 27 and data["coprime"] is False


def test_phi(capsys):
    code, out, _ = run(capsys, "--q", "3", "phi", "--i", "1")
    assert code == 0 and json.loads(out)["coeffs"][1]["series"] == "1*T^(0)"
