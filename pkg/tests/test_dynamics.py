import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from omlattice import (
    CouplingProfile,
    LatticeSpec,
    ModulationParams,
    bessel_zero,
    build_regime_b,
    build_regime_c_kitaev,
    build_regime_d_nnn,
    time_generator,
)
from omlattice.dynamics import (
    ConvergenceError,
    compare_effective,
    propagate_full,
    quantum_walk,
    symplectic_defect,
    walk_suppression_metric,
)
from omlattice.model import TimeDependentGenerator

J2Z = bessel_zero(2, 1)
KAPPA_OFF = 4.236376735087921  # J2 = 0.3, oracle bisection


# --- quantum walks -------------------------------------------------------------


def test_single_site_walk():
    rec = quantum_walk(np.zeros((1, 1)), 0, np.linspace(0, 10, 11))
    np.testing.assert_array_equal(rec.probabilities, 1.0)


def test_rabi_oscillation():
    v = 0.37
    t = np.linspace(0, 20, 201)
    rec = quantum_walk(np.array([[0, v], [v, 0]]), 0, t)
    np.testing.assert_allclose(rec.probabilities[:, 1], np.sin(v * t) ** 2, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(sites=st.integers(2, 40), t_eff=st.floats(-1, 1), start=st.integers(0, 39), seed=st.integers(0, 1000))
def test_walk_unitarity(sites, t_eff, start, seed):
    rng = np.random.default_rng(seed)
    spec = LatticeSpec.from_sites(sites)
    h = build_regime_d_nnn(spec, CouplingProfile(rng.normal(), rng.normal()), t_eff).hopping
    rec = quantum_walk(h, start % sites, np.linspace(0, 200, 101))
    np.testing.assert_allclose(rec.probabilities.sum(axis=1), 1.0, atol=1e-8)
    assert rec.probabilities.min() >= -1e-12


@settings(max_examples=20, deadline=None)
@given(half=st.lists(st.floats(-1, 1), min_size=1, max_size=10))
def test_walk_mirror_symmetry(half):
    bonds = np.array(half + half[::-1])
    m = bonds.size + 1
    h = np.diag(bonds, 1) + np.diag(bonds, -1)
    rec = quantum_walk(h, m // 2, np.linspace(0, 30, 61))
    np.testing.assert_allclose(rec.probabilities, rec.probabilities[:, ::-1], atol=1e-8)


def test_walk_errors():
    with pytest.raises(ValueError):
        quantum_walk(np.array([[0, 1.0], [0, 0]]), 0, [0.0])
    with pytest.raises(IndexError):
        quantum_walk(np.zeros((3, 3)), 3, [0.0])


def test_frozen_walk_metric():
    rec = quantum_walk(np.zeros((4, 4)), 2, np.linspace(0, 5, 11))
    assert walk_suppression_metric(rec) == 1.0


def test_uniform_chain_metric_is_order_one_over_l():
    # long-time return probability of an end site on an open uniform chain: 3 / (2 (L + 1))
    sites = 40
    h = build_regime_b(LatticeSpec.from_sites(sites), CouplingProfile(-0.5, 0.5)).hopping
    rec = quantum_walk(h, 0, np.linspace(0, 4000, 40001))
    assert walk_suppression_metric(rec) == pytest.approx(3 / (2 * (sites + 1)), rel=0.1)


def test_metric_window_errors():
    rec = quantum_walk(np.zeros((2, 2)), 0, np.linspace(0, 1, 5))
    with pytest.raises(ValueError):
        walk_suppression_metric(rec, (0.3, 0.4))
    with pytest.raises(ValueError):
        walk_suppression_metric(rec, (0.5, 0.5))


def test_topological_walk_suppressed():
    spec = LatticeSpec.from_sites(40)
    t = np.linspace(0, 100, 1001)
    topo = quantum_walk(build_regime_b(spec, CouplingProfile(-0.25, 0.5)).hopping, 0, t)
    triv = quantum_walk(build_regime_b(spec, CouplingProfile(-0.5, 0.25)).hopping, 0, t)
    assert walk_suppression_metric(topo) > walk_suppression_metric(triv)


def test_nnn_hopping_weakens_suppression():
    spec = LatticeSpec.from_sites(40)
    t = np.linspace(0, 100, 1001)
    metrics = [
        walk_suppression_metric(quantum_walk(build_regime_d_nnn(spec, CouplingProfile(-0.25, 0.5), te).hopping, 0, t))
        for te in (0.1, 0.45, 0.75, 1.0)
    ]
    assert all(a > b for a, b in zip(metrics, metrics[1:]))


# --- full propagation ------------------------------------------------------------


def regime_b_validation(nu, kappa, sites=5, couplings=(-0.5, 1.0), t_end=5.0):
    spec = LatticeSpec.from_sites(sites)
    c = CouplingProfile(*couplings)
    params = ModulationParams.uniform(spec, kappa / 2, kappa / 2, nu)
    rec = propagate_full(time_generator(params, c, spec), t_end, samples=np.linspace(0, t_end, 11))
    return rec, compare_effective(rec, build_regime_b(spec, c).hopping)


def test_zero_couplings_give_identity():
    spec = LatticeSpec.from_sites(5)
    gen = time_generator(ModulationParams.uniform(spec, 1.0, 0.5, 20.0), CouplingProfile(0.0, 0.0), spec)
    rec = propagate_full(gen, 3.0, samples=[0.0, 1.0, 3.0])
    np.testing.assert_array_equal(rec.propagators, np.eye(10)[None].repeat(3, axis=0))


def test_static_generator_matches_exponential():
    qh = build_regime_c_kitaev(LatticeSpec.from_sites(6), 0.5, 0.2, 0.3)
    d = qh.dynamical_matrix()
    samples = np.array([0.0, 0.7, 2.0, 5.0])
    rec = propagate_full(d, 5.0, samples=samples, tol=1e-10, period=0.5)
    for t, u in zip(samples, rec.propagators):
        np.testing.assert_allclose(u, expm(-1j * d * t), atol=1e-8)


def test_symplectic_defect_bound():
    rec, _ = regime_b_validation(20.0, J2Z)
    assert rec.symplectic_defect <= 1e-6
    assert max(symplectic_defect(u) for u in rec.propagators) <= 1e-6
    assert rec.steps_per_period >= 64


def test_step_control_failure():
    spec = LatticeSpec.from_sites(3)
    gen = time_generator(ModulationParams.uniform(spec, 2.0, 1.0, 5.0), CouplingProfile(-1.0, 1.0), spec)
    with pytest.raises(ConvergenceError):
        propagate_full(gen, 5.0, tol=1e-14, steps_per_period=8, max_steps_per_period=16)


def test_bad_propagation_arguments():
    d = np.zeros((4, 4))
    with pytest.raises(ValueError):
        propagate_full(d, 0.0)
    with pytest.raises(ValueError):
        propagate_full(d, 1.0, samples=[0.5, 0.2])
    with pytest.raises(ValueError):
        propagate_full(d, 1.0, samples=[0.5, 2.0])


def test_zero_pairing_conserves_particle_norm():
    spec = LatticeSpec.from_sites(5)
    full = time_generator(ModulationParams.uniform(spec, 1.5, 0.7, 10.0), CouplingProfile(-0.5, 1.0, 0.3), spec)
    hop_only = [t for t in full.terms if t.kind == "hop"]
    gen = TimeDependentGenerator(full.params, full.couplings, spec, hop_only)
    rec = propagate_full(gen, 4.0, samples=np.linspace(0, 4, 9))
    m = spec.total_sites
    for u in rec.propagators:
        upp = u[:m, :m]
        np.testing.assert_allclose(upp.conj().T @ upp, np.eye(m), atol=1e-7)
        assert np.abs(u[:m, m:]).max() < 1e-12


def test_compare_effective_exact_static():
    h = build_regime_b(LatticeSpec.from_sites(7), CouplingProfile(-0.3, 0.6)).hopping
    zero = np.zeros_like(h)
    d = np.block([[h, zero], [zero, -h.conj()]])
    rec = propagate_full(d, 5.0, samples=np.linspace(0, 5, 6), tol=1e-10)
    assert np.max(compare_effective(rec, h)) < 1e-8


def test_compare_effective_dimension_mismatch():
    rec = propagate_full(np.zeros((4, 4)), 1.0)
    with pytest.raises(ValueError):
        compare_effective(rec, np.zeros((3, 3)))


def test_regime_b_doubling_nu_halves_deviation():
    _, e20 = regime_b_validation(20.0, J2Z)
    _, e40 = regime_b_validation(40.0, J2Z)
    assert e20[-1] < 0.05
    assert e40[-1] <= 0.5 * e20[-1] * 1.5


def test_regime_b_correction_is_second_order():
    # at a J2 zero the first-order Magnus term of this scheme cancels, so eps ~ nu^-2
    _, e20 = regime_b_validation(20.0, J2Z)
    _, e40 = regime_b_validation(40.0, J2Z)
    assert 3.0 < e20[-1] / e40[-1] < 5.0


def test_off_zero_deviation_grows():
    _, on = regime_b_validation(20.0, J2Z)
    _, off = regime_b_validation(20.0, KAPPA_OFF)
    assert off[-1] >= 10 * on[-1]
    # secular growth: the deviation keeps rising over the run
    assert off[-1] > off[len(off) // 2] > off[1]
