import csv
import io
import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from symlanczos.cli import main
from symlanczos.linop import read_matrix_market, to_dense

BUNDLED = str(resources.files("symlanczos") / "data" / "bipartite30.mtx")
SCHEMA = json.loads((resources.files("symlanczos") / "schemas" / "estimator_report.schema.json").read_text())


def write_mtx(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def edge(tmp_path):
    return write_mtx(tmp_path / "edge.mtx", ["%%MatrixMarket matrix coordinate real symmetric", "2 2 1", "2 1 1"])


@pytest.fixture
def directed(tmp_path):
    return write_mtx(
        tmp_path / "directed.mtx",
        ["%%MatrixMarket matrix coordinate pattern general", "4 4 5", "1 2", "2 3", "3 4", "4 1", "1 3"],
    )


def run(capsys, argv, tmp_path=None, name="out.json"):
    if tmp_path is not None:
        out = tmp_path / name
        code = main(argv + ["--out", str(out)])
        return code, out.read_text() if out.exists() else None
    code = main(argv)
    return code, capsys.readouterr().out


def test_two_node_partial_upper_exact(capsys, edge):
    code, text = run(capsys, ["estrada", edge, "--beta", "1", "--estimator", "partial-upper", "--N", "1", "--m", "2"])
    assert code == 0
    report = json.loads(text)
    assert math.isclose(report["estimate"], 2 * math.cosh(1.0), rel_tol=1e-14)
    jsonschema.validate(report, SCHEMA)


def test_two_node_hutchinson_statistical(capsys, edge):
    code, text = run(capsys, ["estrada", edge, "--estimator", "hutchinson", "--N", "1000", "--m", "2", "--seed", "7"])
    assert code == 0
    report = json.loads(text)
    assert abs(report["estimate"] - 2 * math.cosh(1.0)) <= 3 * report["std_error"]


def test_bipartize_square_has_zero_constant(capsys, directed):
    code, text = run(capsys, ["estrada", directed, "--bipartize", "--beta-over-lmax", "0.5",
                              "--estimator", "partial-lower", "--N", "20", "--m", "8"])
    assert code == 0
    report = json.loads(text)
    assert report["constant_term"] == 0
    assert report["n1"] == report["n2"] == 4


def test_bundled_partial_lower_matches_oracle(capsys):
    code, text = run(capsys, ["estrada", BUNDLED, "--estimator", "partial-lower", "--N", "2000", "--m", "30"])
    assert code == 0
    report = json.loads(text)
    exact = np.sum(np.exp(np.linalg.eigvalsh(to_dense(read_matrix_market(BUNDLED)))))
    assert abs(report["estimate"] - exact) <= 4 * report["std_error"]


def test_rerun_byte_identical_and_sidecar(capsys, tmp_path):
    argv = ["estrada", BUNDLED, "--estimator", "partial-upper", "--N", "50", "--m", "10", "--format", "csv"]
    assert main(argv + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    sidecar = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert sidecar["wall_clock_seconds"] >= 0
    assert sidecar["seed"] == 0 and sidecar["command"] == "estrada"
    assert "estimate=" in capsys.readouterr().out


def test_estrada_csv_parses(capsys, edge):
    code, text = run(capsys, ["estrada", edge, "--estimator", "partial-lower", "--N", "3", "--m", "2",
                              "--format", "csv"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["quantity", "index", "value"]
    assert all(len(r) == 3 for r in rows)
    assert [r[0] for r in rows if r[0] == "sample"] == ["sample"] * 3
    manifest = {r[1]: json.loads(r[2]) for r in rows if r[0] == "#manifest"}
    assert manifest["flags"]["estimator"] == "partial-lower"


def test_seed_environment_and_precedence(capsys, edge, monkeypatch):
    argv = ["estrada", edge, "--estimator", "hutchinson", "--N", "5", "--m", "2"]
    monkeypatch.setenv("SLQ_SEED", "11")
    _, env_text = run(capsys, argv)
    _, flag_text = run(capsys, argv + ["--seed", "3"])
    monkeypatch.delenv("SLQ_SEED")
    _, explicit = run(capsys, argv + ["--seed", "11"])
    _, flag_again = run(capsys, argv + ["--seed", "3"])
    assert json.loads(env_text)["manifest"]["seed"] == 11
    assert json.loads(env_text)["samples"] == json.loads(explicit)["samples"]
    assert flag_text == flag_again


def test_bad_seed_environment(capsys, edge, monkeypatch):
    monkeypatch.setenv("SLQ_SEED", "seven")
    assert main(["estrada", edge]) == 2


@pytest.mark.parametrize(
    "lines",
    [
        ["%%MatrixMarket matrix coordinate real symmetric", "2 2 2", "2 1 1"],
        ["not a header"],
        ["%%MatrixMarket matrix coordinate real symmetric", "2 2 1", "3 1 1"],
    ],
)
def test_parse_failures_exit_2(capsys, tmp_path, lines):
    path = write_mtx(tmp_path / "bad.mtx", lines)
    assert main(["estrada", path]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_file_and_bad_flags_exit_2(capsys, tmp_path):
    assert main(["estrada", str(tmp_path / "none.mtx")]) == 2
    assert main(["estrada", BUNDLED, "--N", "0"]) == 2
    assert main(["estrada", BUNDLED, "--beta", "nan"]) == 2


def test_structure_mismatch_exit_3(capsys, tmp_path, directed):
    triangle = write_mtx(
        tmp_path / "tri.mtx",
        ["%%MatrixMarket matrix coordinate real symmetric", "3 3 3", "2 1 1", "3 1 1", "3 2 1"],
    )
    assert main(["estrada", triangle, "--estimator", "partial-upper"]) == 3
    assert main(["estrada", directed, "--estimator", "hutchinson"]) == 3
    assert main(["estrada", BUNDLED, "--estimator", "partial-upper", "--split", "5"]) == 3


def test_numerical_failure_exit_4(capsys, edge):
    assert main(["estrada", edge, "--beta", "1000", "--N", "2", "--m", "2"]) == 4


def test_oracle_limit_exit_5(capsys):
    assert main(["error-vs-queries", "--synthetic", "1500", "1500", "0", "--queries", "3"]) == 5
    assert "variance" in capsys.readouterr().err


def test_variance_synthetic_csv(capsys, tmp_path):
    code, text = run(capsys, ["variance", "--synthetic", "10", "8", "1", "--trials", "5", "--m", "18",
                              "--reorth", "full"], tmp_path, "v.csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["record", "trial", "family", "value"]
    samples = [r for r in rows if r[0] == "sample"]
    assert len(samples) == 15
    assert {r[2] for r in rows if r[0] == "variance"} == {"lower", "upper", "full"}


def test_variance_single_trial_zero(capsys):
    code, text = run(capsys, ["variance", "--synthetic", "5", "5", "0", "--trials", "1", "--format", "json"])
    assert code == 0
    payload = json.loads(text)
    assert payload["variances"] == {"full": 0.0, "lower": 0.0, "upper": 0.0}
    jsonschema.validate(payload, SCHEMA)


def test_variance_zero_matrix(capsys, tmp_path):
    path = write_mtx(tmp_path / "zero.mtx", ["%%MatrixMarket matrix coordinate real general", "3 2 0"])
    code, text = run(capsys, ["variance", path, "--trials", "6", "--m", "3", "--format", "json"])
    assert code == 0
    payload = json.loads(text)
    assert all(v == 0.0 for v in payload["variances"].values())
    for samples in payload["samples"].values():
        assert len(set(samples)) == 1


def test_error_vs_queries_single_query(capsys):
    code, text = run(capsys, ["error-vs-queries", "--synthetic", "6", "6", "2", "--queries", "4", "--trials", "1",
                              "--m", "12"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["estimator", "queries", "p25", "p50", "p75"]
    body = [r for r in rows[1:] if r[0] != "#manifest"]
    assert sorted(r[0] for r in body) == ["hutchinson", "hutchpp", "partial-upper"]
    assert all(r[2] == r[3] == r[4] for r in body)


def test_error_vs_queries_identity_on_identity(capsys, tmp_path):
    lines = ["%%MatrixMarket matrix coordinate real symmetric", "4 4 4"] + [f"{i} {i} 1" for i in range(1, 5)]
    path = write_mtx(tmp_path / "eye.mtx", lines)
    code, text = run(capsys, ["error-vs-queries", path, "--function", "identity", "--estimators", "hutchinson",
                              "--queries", "3", "6", "--trials", "3", "--m", "2", "--format", "json"])
    assert code == 0
    payload = json.loads(text)
    assert all(r["p75"] < 1e-14 for r in payload["rows"])
    jsonschema.validate(payload, SCHEMA)


def test_hutchpp_needs_three_queries(capsys):
    assert main(["error-vs-queries", "--synthetic", "4", "4", "0", "--queries", "2"]) == 2


@pytest.mark.parametrize("case,symmetric", [(1, True), (3, False)])
def test_inspect_cases(capsys, case, symmetric):
    code, text = run(capsys, ["inspect", "--case", str(case), "--m", "10"])
    assert code == 0
    payload = json.loads(text)
    assert (payload["symmetry"]["classification"] == "symmetric") is symmetric
    if case == 1:
        assert math.isclose(payload["symmetry"]["shift"], 0.51, abs_tol=1e-12)
    jsonschema.validate(payload, SCHEMA)
    assert math.isclose(payload["measure"]["cumulative"][-1], 1.0, rel_tol=1e-12)


def test_inspect_single_step_is_rayleigh_quotient(capsys):
    code, text = run(capsys, ["inspect", BUNDLED, "--m", "1"])
    assert code == 0
    payload = json.loads(text)
    A = to_dense(read_matrix_market(BUNDLED))
    ones = np.ones(A.shape[0])
    assert payload["weights"] == [1.0]
    assert math.isclose(payload["nodes"][0], ones @ A @ ones / A.shape[0], rel_tol=1e-13)


def test_inspect_partial_vector_symmetric(capsys):
    code, text = run(capsys, ["inspect", BUNDLED, "--vector", "partial-lower", "--m", "7", "--reorth", "full",
                              "--shift", "0"])
    assert code == 0
    symmetry = json.loads(text)["symmetry"]
    assert symmetry["classification"] == "symmetric" and symmetry["unpaired_nodes"] == 1


def test_inspect_vector_file(capsys, tmp_path):
    vec = tmp_path / "v.txt"
    np.savetxt(vec, np.arange(1.0, 31.0))
    code, _ = run(capsys, ["inspect", BUNDLED, "--vector", f"file:{vec}", "--m", "4"])
    assert code == 0
    np.savetxt(vec, np.arange(1.0, 5.0))
    assert main(["inspect", BUNDLED, "--vector", f"file:{vec}"]) == 2


def test_manifest_records_resolved_seed(capsys, edge, monkeypatch):
    argv = ["estrada", edge, "--N", "4", "--m", "2"]
    _, default = run(capsys, argv)
    _, explicit = run(capsys, argv + ["--seed", "0"])
    monkeypatch.setenv("SLQ_SEED", "0")
    _, from_env = run(capsys, argv)
    assert default == explicit == from_env
    assert json.loads(default)["manifest"]["flags"]["seed"] == 0
