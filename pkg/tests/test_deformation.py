import numpy as np
import pytest
from numpy.testing import assert_allclose

from spinordeform.connection import all_spinor_derivatives, gamma_general, inverse_metric
from spinordeform.deformation import (
    DEFAULT_EPS_LADDER,
    DeformationTooLarge,
    Perturbation,
    PerturbationNotSymmetric,
    build_tables,
    convergence_order,
    deformed_frame,
    deformed_geometry,
    delta_connection,
    delta_connection_raw,
    delta_gamma,
    delta_infeld,
    delta_lagrangian_chain,
    delta_spin_connection,
    first_order_check,
    first_order_suite,
    nabla_h,
    preserved_deltas,
)
from spinordeform.dirac_matter import PhysicalConstants
from spinordeform.frame_geometry import Field
from spinordeform.samplers import random_spinor_field, random_symmetric_field
from spinordeform.spin_algebra import ETA

P = [0.3, -0.2, 0.5, 0.1]


def test_tables(exp_geom, h_field):
    t = build_tables(exp_geom, Perturbation(h_field, 1e-3), P)
    h = h_field(P)
    assert_allclose(t.f_mixed, 0.5 * ETA @ h)
    assert_allclose(t.h_up, ETA @ h @ ETA)
    assert_allclose(t.F, np.eye(4) + 1e-3 * t.f_mixed)
    assert_allclose(t.delta_g_low, -1e-3 * h)
    assert_allclose(t.delta_g_up, 1e-3 * t.h_up)


def test_inverse_metric_variation_is_second_order(rng, curved_geom):
    for _ in range(10):
        h = random_symmetric_field(rng, 0.4)
        for eps in (1e-2, 1e-3):
            t = build_tables(curved_geom, Perturbation(h, eps), P)
            g = curved_geom.g(P)
            prod = (g + t.delta_g_low) @ (inverse_metric(g) + t.delta_g_up)
            # |h| <= 0.8 entrywise; the residual is eps^2 h g^-1 h
            bound = eps**2 * np.max(np.abs(t.h_low @ inverse_metric(g) @ t.h_low)) * 1.0001
            assert np.max(np.abs(prod - np.eye(4))) <= bound


def test_asymmetric_h_rejected(exp_geom):
    bad = Field.constant(np.triu(np.ones((4, 4))))
    with pytest.raises(PerturbationNotSymmetric):
        build_tables(exp_geom, Perturbation(bad, 1e-3), P)
    with pytest.raises(ValueError):
        Perturbation(bad, 0.0)
    with pytest.raises(ValueError):
        Perturbation(Field.constant(np.zeros(4)), 1e-3)


def test_deformed_frame_admissibility(exp_geom, h_field):
    C, flags = deformed_frame(exp_geom, Perturbation(h_field, 1e-2), P)
    assert flags.admissible
    assert_allclose(C, build_tables(exp_geom, Perturbation(h_field, 1e-2), P).F.T)
    big = Field.constant(np.diag([-10.0, 0.0, 0.0, 0.0]))
    with pytest.raises(DeformationTooLarge):
        deformed_frame(exp_geom, Perturbation(big, 1.0), P)
    _, flags = deformed_frame(exp_geom, Perturbation(big, 1.0), P, check=False)
    assert not flags.time_component_positive


def test_variation_forms_agree(curved_geom, h_field):
    pert = Perturbation(h_field, 1e-3)
    assert_allclose(delta_infeld(curved_geom, pert, P, "lower"), delta_infeld(curved_geom, pert, P, "upper"), atol=1e-15)
    assert_allclose(delta_gamma(curved_geom, pert, P, "lower"), delta_gamma(curved_geom, pert, P, "upper"), atol=1e-15)


def test_preserved_fields():
    assert all(np.all(v == 0) for v in preserved_deltas().values())


def test_delta_connection_raw_form(exp_geom, h_field):
    pert = Perturbation(h_field, 1e-3)
    Gamma = exp_geom.gamma_coeffs(P)
    assert_allclose(delta_connection_raw(exp_geom, pert, P), delta_connection(exp_geom, pert, Gamma, P), atol=1e-15)


def test_delta_connection_raw_needs_orthonormal(conformal_geom, h_field):
    with pytest.raises(ValueError):
        delta_connection_raw(conformal_geom, Perturbation(h_field, 1e-3), P)


def test_delta_spin_connection_brute_force(curved_geom, h_field):
    eps = 1e-3
    pert = Perturbation(h_field, eps)
    Gamma = curved_geom.gamma_coeffs(P)
    g = curved_geom.g(P)
    ginv = inverse_metric(g)
    gam = curved_geom.gamma(P)
    nh = nabla_h(curved_geom, pert, Gamma, P)
    nh_up = np.einsum("mp,rpq,nq->rmn", ginv, nh, ginv)
    expected = np.zeros((4, 4, 4), complex)
    for i in range(4):
        for a in range(4):
            for b in range(4):
                s = 0.0
                for m in range(4):
                    for n in range(4):
                        for r in range(4):
                            for q in range(4):
                                w = eps * g[i, n] * ginv[r, q] * nh_up[r, m, n] / 8.0
                                for x in range(4):
                                    s += w * (gam[q, a, x] * gam[m, x, b] - gam[m, a, x] * gam[q, x, b])
                expected[i, a, b] = s
    dA = delta_spin_connection(curved_geom, pert, Gamma, P)
    assert_allclose(dA.A, expected, atol=1e-15)
    assert_allclose(dA.Abar, np.conj(expected), atol=1e-15)
    assert np.max(np.abs(np.trace(dA.A, axis1=1, axis2=2))) <= 1e-15


def test_linearity_in_h(curved_geom, rng):
    h1 = random_symmetric_field(rng)
    h2 = random_symmetric_field(rng)
    both = Field(lambda x: 2.0 * h1.fn(x) - 0.5 * h2.fn(x), (4, 4), lambda x: 2.0 * h1.grad(x) - 0.5 * h2.grad(x))
    Gamma = curved_geom.gamma_coeffs(P)
    for fn in (
        lambda h: delta_gamma(curved_geom, Perturbation(h, 1e-3), P),
        lambda h: delta_infeld(curved_geom, Perturbation(h, 1e-3), P),
        lambda h: delta_connection(curved_geom, Perturbation(h, 1e-3), Gamma, P),
        lambda h: delta_spin_connection(curved_geom, Perturbation(h, 1e-3), Gamma, P).A,
    ):
        combo = 2.0 * fn(h1) - 0.5 * fn(h2)
        assert np.max(np.abs(fn(both) - combo)) <= 1e-12 * max(1.0, np.max(np.abs(combo)))


def test_exact_deformed_geometry_is_consistent(curved_geom, h_field):
    eps = 1e-2
    hat = deformed_geometry(curved_geom, Perturbation(h_field, eps))
    F = build_tables(curved_geom, Perturbation(h_field, eps), P).F
    Finv = np.linalg.inv(F)
    assert_allclose(hat.g(P), Finv.T @ curved_geom.g(P) @ Finv, atol=1e-14)
    assert_allclose(hat.g(P), curved_geom.g(P) - eps * h_field(P), atol=2 * eps**2)
    assert hat.tetrad_flags(P).admissible


def test_first_order_suite_orders(curved_geom, h_field, psi_field):
    checks = first_order_suite(curved_geom, h_field, P, psi_field, DEFAULT_EPS_LADDER, PhysicalConstants.natural())
    assert set(checks) == {"delta_g_inv", "delta_G", "delta_gamma", "delta_Gamma", "delta_A", "delta_nabla_psi", "delta_L"}
    for name, chk in checks.items():
        assert chk.passed(), (name, chk)
        assert 1.9 <= chk.order <= 2.1


def test_oracle_detects_wrong_variation(exp_geom, h_field):
    Gamma = exp_geom.gamma_coeffs(P)
    chk = first_order_check(
        "bad_delta_Gamma",
        lambda: Gamma,
        lambda eps: gamma_general(deformed_geometry(exp_geom, Perturbation(h_field, eps), "linear").g, exp_geom.frame, P),
        lambda eps: 0.5 * delta_connection(exp_geom, Perturbation(h_field, eps), Gamma, P),
    )
    assert chk.order == pytest.approx(1.0, abs=0.1)
    assert not chk.passed()


def test_exact_case_reported(flat_geom):
    h = Field.constant(0.1 * np.eye(4))
    chk = first_order_check(
        "delta_gamma_const",
        lambda: flat_geom.gamma_coeffs(P),
        lambda eps: gamma_general(deformed_geometry(flat_geom, Perturbation(h, eps), "linear").g, flat_geom.frame, P),
        lambda eps: delta_connection(flat_geom, Perturbation(h, eps), flat_geom.gamma_coeffs(P), P),
    )
    assert chk.exact and chk.passed()


def test_convergence_order():
    eps = np.array([1e-2, 5e-3, 2.5e-3])
    assert convergence_order(eps, 3 * eps**2) == pytest.approx(2.0)
    assert convergence_order(eps, [0.0, 1.0, 1.0]) is None


def test_lagrangian_chain(curved_geom, h_field, rng):
    psi = random_spinor_field(rng)
    pert = Perturbation(h_field, 1e-3)
    chain = delta_lagrangian_chain(curved_geom, pert, psi, P)
    # delta gamma_m g^mn + gamma_m delta g^mn = eps/2 gamma_m h^mn
    assert_allclose(chain.subexpression, chain.subexpression_closed, atol=1e-15)
    conn_hat = deformed_geometry(curved_geom, pert).spin_connection(P)
    conn = curved_geom.spin_connection(P)
    direct = all_spinor_derivatives(psi, conn_hat, curved_geom.frame, P)[1] - all_spinor_derivatives(psi, conn, curved_geom.frame, P)[1]
    assert_allclose(chain.delta_nabla_psi, direct, atol=1e-5)
