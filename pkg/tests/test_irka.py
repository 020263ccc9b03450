import numpy as np
import pytest

from phmor import (
    IRKAConfig,
    InterpolationData,
    convergence_metric,
    irka_reduce,
    mirror_and_sanitize,
    partition_index2,
    pole_residue,
)
from phmor.benchmarks import MassSpringSpec, mass_spring_chain
from phmor.linalg import LinAlgContractError


class TestMirrorAndSanitize:
    def test_mirrors_stable_poles(self):
        data = mirror_and_sanitize(np.array([-2.0, -1.0 + 3j, -1.0 - 3j]))
        assert np.all(data.points.real > 0)
        assert sorted(np.abs(data.points.imag)) == pytest.approx([0.0, 3.0, 3.0])

    def test_shifts_points_near_imaginary_axis(self):
        data = mirror_and_sanitize(np.array([-1e-12 + 2j, -1e-12 - 2j]))
        assert np.all(data.points.real == pytest.approx(1e-8))

    def test_exact_conjugate_closure(self):
        # slightly asymmetric inputs come out exactly paired
        poles = np.array([-1.0 + 2.0000001j, -1.0 - 1.9999999j])
        res = np.array([[1.0 + 0.5j], [1.0 - 0.5000001j]])
        data = mirror_and_sanitize(poles, res)
        p = data.points
        assert p[0].conjugate() == p[1]
        assert np.allclose(data.directions[0].conjugate(), data.directions[1])

    def test_reflects_unstable_poles(self):
        data = mirror_and_sanitize(np.array([3.0]))
        assert data.points[0].real == pytest.approx(3.0)


class TestConvergenceMetric:
    def test_disjoint_singletons(self):
        assert convergence_metric([1.0], [10.0]) == pytest.approx(4.5)

    def test_small_relative_move(self):
        assert convergence_metric([1.0], [1.001]) == pytest.approx(5e-4)

    def test_permutation_invariance(self):
        a = np.array([1.0, 5.0, 2.0 + 1j, 2.0 - 1j])
        b = a[::-1]
        assert convergence_metric(a, b) == pytest.approx(0.0, abs=1e-15)

    def test_size_mismatch_is_inf(self):
        assert convergence_metric([1.0], [1.0, 2.0]) == np.inf


class TestIRKAFixture:
    @pytest.mark.parametrize("start", [1e-2, 0.5, 1.0, 37.0, 1e2])
    def test_fixture_converges_in_two_iterations(self, index2_fixture, start):
        part = partition_index2(index2_fixture, 2)
        init = InterpolationData(points=[complex(start)], directions=[[1.0]])
        result = irka_reduce(part, IRKAConfig(r=1, initial=init))
        assert result.converged
        assert result.iterations <= 2
        assert result.data.points[0] == pytest.approx(1.0, abs=1e-10)

    def test_trace_records_iterations(self, index2_fixture, tmp_path):
        part = partition_index2(index2_fixture, 2)
        init = InterpolationData(points=[5.0 + 0j], directions=[[1.0]])
        result = irka_reduce(part, IRKAConfig(r=1, initial=init))
        assert len(result.trace) == result.iterations
        csv = tmp_path / "trace.csv"
        result.trace.export_csv(csv)
        lines = csv.read_text().strip().splitlines()
        assert lines[0].startswith("iteration,metric,ph_valid")
        assert len(lines) == 1 + result.iterations


class TestIRKAChain:
    def test_chain_converges_and_is_ph(self):
        part = mass_spring_chain(MassSpringSpec(k=20))
        result = irka_reduce(part, IRKAConfig(r=4))
        assert result.converged
        assert result.model.ph_valid
        assert result.model.order == 4

    def test_fixed_point_is_stationary(self):
        part = mass_spring_chain(MassSpringSpec(k=20))
        result = irka_reduce(part, IRKAConfig(r=4))
        pr = pole_residue(result.model)
        nxt = mirror_and_sanitize(pr.poles, pr.right)
        assert convergence_metric(result.data.points, nxt.points) <= 1e-5

    def test_nonconvergence_returns_best_iterate(self):
        part = mass_spring_chain(MassSpringSpec(k=20))
        cfg = IRKAConfig(r=4, max_iterations=2, tol=1e-14)
        with pytest.warns(RuntimeWarning, match="did not converge"):
            result = irka_reduce(part, cfg)
        assert not result.converged
        assert result.model is not None
        assert np.isfinite(result.final_metric)


def test_config_validation():
    with pytest.raises(LinAlgContractError):
        IRKAConfig(r=0)
    with pytest.raises(LinAlgContractError):
        IRKAConfig(r=2, tol=0.0)
