import numpy as np
import pytest
from scipy.optimize import minimize

from arnnsci.determinant import Configuration, hf_configuration
from arnnsci.eigensolver import SparseState, fci_reference, lowest_eigenpair, solve_subspace, sorted_by_born
from arnnsci.integrals import assemble_subspace, load_fcidump, slater_condon
from arnnsci.trainer import TrainingSet
from arnnsci.vmc_oracle import local_energy, local_energy_expectation, mh_ratio, upsilon_lambda

from conftest import fixture_path


@pytest.fixture(scope="module")
def h2():
    return load_fcidump(fixture_path("h2_sto3g"))


@pytest.fixture(scope="module")
def h4():
    return load_fcidump(fixture_path("h4_sto3g"))


class TestLocalEnergy:
    def test_eigenstate_gives_constant_energy(self, h2):
        gs = fci_reference(h2)
        for c in gs.support:
            assert local_energy(gs, c, h2) == pytest.approx(gs.energy, abs=1e-9)

    def test_point_mass_on_hf(self, h4):
        hf = hf_configuration(h4.m, h4.n_electrons)
        psi = SparseState((hf,), np.ones(1), slater_condon(hf, hf, h4).value)
        assert local_energy(psi, hf, h4) == pytest.approx(psi.energy, abs=1e-12)

    def test_expectation_equals_rayleigh_quotient(self, h4):
        gs = fci_reference(h4)
        basis = sorted_by_born(gs)[:12]
        state = solve_subspace(basis, h4)
        h = assemble_subspace(basis, h4)
        rq = float(state.amplitudes @ (h @ state.amplitudes))
        assert local_energy_expectation(state, h4) == pytest.approx(rq, abs=1e-9)

    def test_zero_amplitude_rejected(self, h4):
        gs = fci_reference(h4)
        outside = Configuration((1 << h4.n_electrons) - 1, h4.m)
        assert outside.bits not in {c.bits for c in gs.support}
        with pytest.raises(ValueError):
            local_energy(gs, outside, h4)


class TestUpsilonLambda:
    def test_single_config_zero_phase(self, h4):
        hf = hf_configuration(h4.m, h4.n_electrons)
        psi0 = SparseState((hf,), np.ones(1), 0.0)
        counts = TrainingSet(((hf, 17),))
        upsilon, lam = upsilon_lambda(psi0, counts, np.zeros(1), h4)
        assert lam == 1.0
        assert upsilon == pytest.approx(slater_condon(hf, hf, h4).value, abs=1e-12)

    def test_eigenvector_counts_reproduce_subspace_energy(self, h4):
        gs = fci_reference(h4)
        basis = sorted_by_born(gs)[:10]
        state = solve_subspace(basis, h4)
        scale = 10**12
        counts_raw = np.rint(state.born_probabilities() * scale).astype(int)
        entries = tuple(
            (c, int(k)) for c, k in zip(basis, counts_raw) if k > 0
        )
        phases = np.where(state.amplitudes < 0, np.pi, 0.0)
        upsilon, lam = upsilon_lambda(state, TrainingSet(entries), phases, h4)
        assert lam == 1.0
        assert upsilon == pytest.approx(state.energy, abs=1e-8)

    def test_variational_bound(self, h4):
        gs = fci_reference(h4)
        basis = sorted_by_born(gs)[:8]
        e_min, _ = lowest_eigenpair(assemble_subspace(basis, h4))
        rng = np.random.default_rng(5)
        psi0 = SparseState(tuple(basis), np.full(8, np.sqrt(1 / 8)), 0.0)
        for _ in range(5):
            counts = TrainingSet(
                tuple((c, int(k)) for c, k in zip(basis, rng.integers(1, 50, 8)))
            )
            upsilon, _ = upsilon_lambda(psi0, counts, rng.uniform(0, np.pi, 8), h4)
            assert upsilon >= e_min - 1e-10

    def test_direct_optimization_reaches_subspace_eigenvalue(self, h4):
        # minimizing over amplitude reweightings and sign phases must land on
        # the lowest eigenvalue of the same subspace Hamiltonian
        gs = fci_reference(h4)
        basis = sorted_by_born(gs)[:14]
        h = assemble_subspace(basis, h4).toarray()
        e_min, _ = lowest_eigenpair(h)

        def rayleigh(x):
            nrm = x @ x
            hx = h @ x
            val = (x @ hx) / nrm
            grad = 2.0 * (hx - val * x) / nrm
            return val, grad

        rng = np.random.default_rng(7)
        best = np.inf
        for _ in range(3):
            res = minimize(rayleigh, rng.normal(size=len(basis)), jac=True,
                           method="L-BFGS-B", options={"gtol": 1e-13, "maxiter": 2000})
            best = min(best, res.fun)
        assert best == pytest.approx(e_min, abs=1e-8)

        # replay the optimum through the empirical functional
        x = res.x / np.linalg.norm(res.x)
        counts = np.rint(x**2 * 10**12).astype(int)
        entries = tuple((c, int(k)) for c, k in zip(basis, counts) if k > 0)
        psi0 = SparseState(tuple(basis), np.abs(x) / np.linalg.norm(np.abs(x)), 0.0)
        upsilon, _ = upsilon_lambda(
            psi0, TrainingSet(entries), np.where(x < 0, np.pi, 0.0), h4
        )
        assert upsilon == pytest.approx(e_min, abs=1e-7)


class TestMhRatio:
    def test_ratio_formula(self, h4):
        gs = fci_reference(h4)
        a, b = gs.support[0], gs.support[1]
        expect = gs.amplitudes[1] ** 2 / gs.amplitudes[0] ** 2
        assert mh_ratio(gs, a, b) == pytest.approx(expect, abs=1e-15)

    def test_outside_support_is_zero(self, h4):
        gs = fci_reference(h4)
        outside = Configuration((1 << h4.n_electrons) - 1, h4.m)
        assert mh_ratio(gs, gs.support[0], outside) == 0.0
