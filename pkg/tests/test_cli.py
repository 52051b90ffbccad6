import io
import json

import pytest

from jlcalc.cli import CHECKS, run


def call(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_dk_rank():
    code, out, _ = call("dk-rank", "--n", "4", "--k", "1")
    assert code == 0 and json.loads(out)["rank"] == 4


def test_lcs_and_reduce():
    code, out, _ = call("lcs", "--word", "a1")
    assert code == 0 and json.loads(out)["class"] == 1
    code, out, _ = call("reduce", "--word", "a1 a1^-1 b1")
    assert code == 0 and json.loads(out)["word"] == "b1"
    code, out, _ = call("--format", "text", "reduce", "--word", "b2 b2^-1")
    assert code == 0 and out.strip()


def test_quasi_lie_text_and_json():
    code, out, _ = call("quasi-lie", "--n", "2", "--k", "2")
    data = json.loads(out)
    assert (data["free"], data["torsion"]) == (1, [2, 2])
    code, out, _ = call("quasi-lie", "--n", "2", "--k", "2", "--format", "text")
    assert code == 0 and "Z/2" in out


def test_map_commands(tmp_path):
    m = write(tmp_path, "m.json", {"genus": 2, "images": {"a1": "a1 b1 b2 b1^-1 b2^-1"}})
    code, out, _ = call("tau-levine", "--degree", "1", m)
    assert code == 0
    assert json.loads(out)["terms"] == [{"factor": "x1", "word": "x1x2", "coeff": "-1"}]
    code, _, err = call("tau-levine-diagram", "--degree", "1", "--map", m)
    assert code == 1 and "NotInImage" in err


def test_linking_commands(tmp_path):
    lk = write(tmp_path, "lk.json", {"rows": [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 1, 0], [0, 1, 0, 0]]})
    code, out, _ = call("classify-lk", lk)
    assert code == 0 and json.loads(out)["verdict"] == "ILC"
    code, out, _ = call("strut-part", lk)
    assert code == 0
    struts = {tuple(s["colors"]): s["value"] for s in json.loads(out)["struts"]}
    assert struts[("1-", "1-")] == "1" and struts[("1+", "1-")] == "1"


def test_compose_identity(tmp_path):
    ident = {"source": 1, "target": 1, "cap": 4,
             "struts": [{"colors": ["1+", "1-"], "value": "1"}]}
    p = write(tmp_path, "id.json", ident)
    code, out, _ = call("compose", p, p)
    assert code == 0
    assert json.loads(out)["struts"] == ident["struts"]


@pytest.mark.parametrize("argv,flag", [
    (("lcs", "--word", "a1 zz"), "--word"),
    (("dk-rank", "--n", "4"), "--k"),
    (("tau", "--degree", "1"), "--map"),
    (("verify", "--suite", "nope"), "--suite"),
])
def test_usage_errors(argv, flag):
    code, out, err = call(*argv)
    assert code == 2 and flag in err and not out


def test_missing_and_unknown():
    assert call()[0] == 2
    assert call("nosuch")[0] == 2
    assert call("classify-lk", "/nonexistent/file.json")[0] == 2


def test_domain_error_exit_code(tmp_path):
    bad = write(tmp_path, "bad.json", {"rows": [[0, 1], [2, 0]]})
    code, _, err = call("classify-lk", bad)
    assert code == 1 and "error" in err


def strip_times(report):
    return [{k: v for k, v in c.items() if "elapsed" not in k} for c in report["checks"]]


@pytest.mark.parametrize("suite", ["linking-classification", "magnus-soundness", "category-laws"])
def test_verify_is_deterministic(suite):
    a = json.loads(call("verify", "--suite", suite, "--seed", "3")[1])
    b = json.loads(call("verify", "--suite", suite, "--seed", "3")[1])
    assert a["passed"] and strip_times(a) == strip_times(b)


def test_verify_text_lists_every_check_once():
    code, out, _ = call("--format", "text", "verify", "--suite", "all", "--seed", "7")
    lines = out.strip().splitlines()
    assert code == 0
    assert [ln.split()[0] for ln in lines] == [n for n, _, _ in CHECKS]
    assert all(ln.split()[1] == "PASS" for ln in lines)


def test_cache_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("JLCALC_CACHE_DIR", str(tmp_path / "cache"))
    first = call("dk-rank", "--n", "4", "--k", "1")[1]
    assert list((tmp_path / "cache").iterdir())
    assert call("dk-rank", "--n", "4", "--k", "1")[1] == first
