import numpy as np
import scipy.io

from phmor.cli import main
from phmor.containers import load_phdae, load_reduced, read_manifest, save_phdae


def _run(argv, capsys=None):
    code = main([str(a) for a in argv])
    if capsys is not None:
        return code, capsys.readouterr()
    return code


class TestGenerateValidate:
    def test_generate_then_validate(self, tmp_path, capsys):
        model = tmp_path / "chain"
        assert _run(["generate", "--benchmark", "chain", "--k", 5, "--out", model]) == 0
        code, captured = _run(["validate", model], capsys)
        assert code == 0
        assert "pass" in captured.out.lower()

    def test_generate_all_benchmarks(self, tmp_path):
        cases = [
            ["--benchmark", "chain-b2", "--k", 4],
            ["--benchmark", "oseen", "--n-grid", 3],
            ["--benchmark", "random-index1", "--n1", 6, "--n2", 2, "--m", 1],
            ["--benchmark", "mixed", "--k", 4],
        ]
        for i, extra in enumerate(cases):
            out = tmp_path / f"m{i}"
            assert _run(["generate", *extra, "--out", out]) == 0
            assert _run(["validate", out]) == 0

    def test_generate_sparse_container(self, tmp_path):
        out = tmp_path / "sparse"
        assert _run(["generate", "--benchmark", "chain", "--k", 8,
                     "--sparse", "--out", out]) == 0
        manifest = read_manifest(out / "manifest.txt")
        assert manifest["format"] == "sparse"

    def test_validate_flags_broken_skewness(self, tmp_path, capsys):
        model = tmp_path / "chain"
        _run(["generate", "--benchmark", "chain", "--k", 3, "--out", model])
        J = np.asarray(scipy.io.mmread(model / "J.mtx"))
        J[0, 1] += 0.5
        scipy.io.mmwrite(model / "J.mtx", J)
        code, captured = _run(["validate", model], capsys)
        assert code == 1
        assert "skew" in captured.out.lower()

    def test_missing_path_exits_2(self, tmp_path, capsys):
        code, captured = _run(["validate", tmp_path / "nope"], capsys)
        assert code == 2
        assert "nope" in captured.err


class TestReduce:
    def test_reduce_at_exact_point_matches_fixture(self, tmp_path, index2_fixture):
        model = tmp_path / "fixture"
        save_phdae(model, index2_fixture, extra={"index": "2", "n1": 2})
        out = tmp_path / "red"
        assert _run(["reduce", model, "--method", "index2", "--r", 1,
                     "--points", "1+0j", "--out", out]) == 0
        reduced = load_reduced(out)
        # full transfer is 1/(s+1); the order-1 interpolant reproduces it
        for s in (1j, 0.3 + 2j, 10.0):
            assert abs(reduced.transfer_eval(s)[0, 0] - 1.0 / (s + 1.0)) <= 1e-10
        rows = (out / "errors.csv").read_text().strip().splitlines()
        assert rows[0].startswith("r,interp_residual_max")
        assert float(rows[1].split(",")[1]) <= 1e-10

    def test_reduce_irka_writes_convergence_columns(self, tmp_path):
        model = tmp_path / "chain"
        _run(["generate", "--benchmark", "chain", "--k", 10, "--out", model])
        out = tmp_path / "red"
        assert _run(["reduce", model, "--method", "irka", "--r", 4,
                     "--h2", "--out", out]) == 0
        row = (out / "errors.csv").read_text().strip().splitlines()[1].split(",")
        assert row[4] != ""  # rel_h2 filled because of --h2
        assert row[5] in ("0", "1")
        assert int(row[6]) >= 1

    def test_reduce_unpartitioned_container_exits_1(self, tmp_path, index2_fixture,
                                                    capsys):
        model = tmp_path / "plain"
        save_phdae(model, index2_fixture)
        code, captured = _run(["reduce", model, "--r", 1], capsys)
        assert code == 1
        assert "index" in captured.err


class TestSweepRegularize:
    def test_sweep_is_deterministic(self, tmp_path):
        model = tmp_path / "chain"
        _run(["generate", "--benchmark", "chain", "--k", 12, "--out", model])
        outs = []
        for name in ("s1", "s2"):
            out = tmp_path / name
            assert _run(["sweep", model, "--method", "irka", "--r-sweep", "2:6:2",
                         "--out", out]) == 0
            outs.append((out / "errors.csv").read_bytes())
        assert outs[0] == outs[1]
        rows = outs[0].decode().strip().splitlines()
        assert [int(r.split(",")[0]) for r in rows[1:]] == [2, 4, 6]
        assert (tmp_path / "s1" / "r004").is_dir()
        assert (tmp_path / "s1" / "trace_r004.csv").exists()

    def test_sweep_errors_decay(self, tmp_path):
        model = tmp_path / "chain"
        _run(["generate", "--benchmark", "chain", "--k", 12, "--out", model])
        out = tmp_path / "sweep"
        _run(["sweep", model, "--method", "irka", "--r-sweep", "2:6:2", "--out", out])
        rows = (out / "errors.csv").read_text().strip().splitlines()[1:]
        hinf = [float(r.split(",")[3]) for r in rows]
        assert hinf[-1] < hinf[0]

    def test_regularize_drops_padded_states(self, tmp_path, index1_fixture, capsys):
        n, m = index1_fixture.n, index1_fixture.m
        pad = 2
        z = np.zeros((pad, pad))
        padded = type(index1_fixture)(
            E=np.block([[index1_fixture.E, np.zeros((n, pad))],
                        [np.zeros((pad, n)), z]]),
            J=np.block([[index1_fixture.J, np.zeros((n, pad))],
                        [np.zeros((pad, n)), z]]),
            R=np.block([[index1_fixture.R, np.zeros((n, pad))],
                        [np.zeros((pad, n)), z]]),
            B=np.vstack([index1_fixture.B, np.zeros((pad, m))]),
            P=np.vstack([index1_fixture.P, np.zeros((pad, m))]),
            S=index1_fixture.S, N=index1_fixture.N,
        )
        model = tmp_path / "padded"
        save_phdae(model, padded)
        out = tmp_path / "reg"
        code, captured = _run(["regularize", model, "--out", out], capsys)
        assert code == 0
        assert "dropped 2" in captured.out
        loaded, _ = load_phdae(out)
        assert loaded.n == n

    def test_regularize_feedback_yields_valid_closed_loop(self, tmp_path):
        model = tmp_path / "rand"
        _run(["generate", "--benchmark", "random-index1", "--n1", 8, "--n2", 3,
              "--m", 2, "--out", model])
        out = tmp_path / "fb"
        assert _run(["regularize", model, "--feedback", "0.5", "--out", out]) == 0
        assert _run(["validate", out]) == 0
        loaded, _ = load_phdae(out)
        assert loaded.m == 0
