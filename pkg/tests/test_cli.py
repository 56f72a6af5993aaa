import json
import math

import numpy as np
import pytest

from jensen_cert.cli import dumps, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def body_file(tmp_path, capsys):
    def make(*gen_args):
        code, out, _ = run(capsys, "gen", *gen_args)
        assert code == 0
        path = tmp_path / f"body{len(list(tmp_path.iterdir()))}.json"
        path.write_text(out)
        return path
    return make


def write(tmp_path, doc, name="b.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_gen_examples(capsys):
    code, out, _ = run(capsys, "gen", "--kind", "cube", "--dim", 2, "--half-width", 1)
    assert code == 0
    doc = json.loads(out)
    assert doc["dim"] == 2 and len(doc["vertices"]) == 4

    code, out, _ = run(capsys, "gen", "--kind", "regular-polygon", "--n", 6, "--inradius", 1)
    v = np.array(json.loads(out)["vertices"])
    assert v.shape == (6, 2)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 2 / math.sqrt(3), rtol=1e-14)

    code, out, _ = run(capsys, "gen", "--kind", "needle", "--dim", 3, "--length", 50)
    assert len(json.loads(out)["vertices"]) == 8


def test_gen_invalid_spec_exits_2(capsys):
    code, _, err = run(capsys, "gen", "--kind", "cube")
    assert code == 2 and "dim" in err
    code, _, _ = run(capsys, "gen", "--kind", "hypersphere", "--dim", 3)
    assert code == 2


def test_certify_exit_codes(tmp_path, capsys, body_file):
    code, out, _ = run(capsys, "certify", body_file("--kind", "cube", "--dim", 3), "--json")
    rep = json.loads(out)["report"]
    assert code == 0 and rep["strict"]

    right = write(tmp_path, {"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]]})
    code, out, _ = run(capsys, "certify", right, "--json")
    assert code == 1 and json.loads(out)["report"]["is_candidate"] is False

    needle = body_file("--kind", "needle", "--dim", 3, "--length", 50)
    code, out, _ = run(capsys, "certify", needle, "--json")
    rep = json.loads(out)["report"]
    assert code == 1 and rep["is_candidate"] and not rep["certified"]


def test_certify_human_summary(capsys, body_file):
    code, out, _ = run(capsys, "certify", body_file("--kind", "regular-polygon", "--n", 5))
    assert code == 0 and "CERTIFIED (strict)" in out


@pytest.mark.parametrize("doc", [
    {"dim": 2},
    {"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]], "spec": {"kind": "cube"}},
    {"dim": 2, "vertices": [[0, 0], [1, 0, 3], [0, 1]]},
    {"dim": 2, "vertices": [[0, 0], [1, 1], [2, 2]]},
    {"dim": 2, "vertices": [[0, 0], [2, 0], [0, 2], [0.5, 0.5]]},
    {"spec": {"kind": "cube", "params": {"dim": 9}}},
    [1, 2, 3],
])
def test_malformed_body_files_exit_2(tmp_path, capsys, doc):
    code, _, err = run(capsys, "certify", write(tmp_path, doc))
    assert code == 2 and err.startswith("error:")


def test_unreadable_file_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "certify", bad)[0] == 2
    assert run(capsys, "certify", tmp_path / "missing.json")[0] == 2


def test_generator_body_file(tmp_path, capsys):
    path = write(tmp_path, {"spec": {"kind": "tangent-polytope", "params": {"dim": 3, "seed": 2}}})
    code, out, _ = run(capsys, "certify", path, "--json")
    assert code == 0 and json.loads(out)["report"]["tangent_identity_holds"]


def test_report_round_trip_and_determinism(capsys, body_file):
    path = body_file("--kind", "random-symmetric", "--dim", 3, "--points", 7, "--seed", 3)
    _, first, _ = run(capsys, "certify", path, "--json")
    _, second, _ = run(capsys, "certify", path, "--json")
    assert first == second
    doc = json.loads(first)
    assert dumps(doc) + "\n" == first
    _, timed, _ = run(capsys, "certify", path, "--json", "--timings")
    assert "timings" in json.loads(timed)


def test_dumps_seventeen_digits():
    text = dumps({"x": 0.1, "y": 1.0, "z": [1e-300, 2.5]})
    assert '"x": 0.10000000000000001' in text
    assert '"y": 1.0' in text
    back = json.loads(text)
    assert back == {"x": 0.1, "y": 1.0, "z": [1e-300, 2.5]}


def test_hh_test_examples(tmp_path, capsys, body_file):
    cube = body_file("--kind", "cube", "--dim", 3)
    code, out, _ = run(capsys, "hh-test", cube, "--functions", 100, "--samples", 100_000,
                       "--json")
    assert code == 0 and json.loads(out)["all_nonnegative"]

    tangent = body_file("--kind", "tangent-polytope", "--dim", 3, "--seed", 1)
    code, out, _ = run(capsys, "hh-test", tangent, "--family", "affine", "--functions", 30,
                       "--json")
    assert code == 0
    assert abs(json.loads(out)["families"]["affine"]["min_gap"]) <= 1e-9

    right = write(tmp_path, {"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]]})
    code, out, _ = run(capsys, "hh-test", right, "--family", "affine", "--functions", 20,
                       "--json")
    assert code == 1 and json.loads(out)["worst"]["gap"] < 0


def test_hh_test_deterministic(capsys, body_file):
    path = body_file("--kind", "cross-polytope", "--dim", 3)
    args = ("hh-test", path, "--functions", 5, "--samples", 40_000, "--seed", 11, "--json")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--workers", 3)
    assert a == b


def test_lemma_check_examples(capsys, body_file):
    cube = body_file("--kind", "cube", "--dim", 3)
    assert run(capsys, "lemma-check", cube, "--functions", 50)[0] == 0
    assert run(capsys, "lemma-check", cube, "--origin", 0.9, 0, 0, "--functions", 50)[0] == 0
    code, _, err = run(capsys, "lemma-check", cube, "--origin", 2, 0, 0)
    assert code == 2 and "not strictly inside" in err
    assert run(capsys, "lemma-check", cube, "--origin", 0, 0)[0] == 2


def test_search_runs(capsys):
    code, out, _ = run(capsys, "search", "--dim", 2, "--lengths", 3, "--bodies", 1,
                       "--functions", 2, "--samples", 5000)
    assert code in (0, 1) and "length 3" in out
