import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osserman_workbench.core import (
    CurvatureTensor,
    MetricFrame,
    check_curvature_like,
    eigen_spectrum,
    endomorphism_from_tensor,
    kulkarni_nomizu,
    sectional_curvature,
)
from osserman_workbench.errors import InapplicableHypotheses, StructuralError
from osserman_workbench.gff import HermitianStructure, build_canonical_gff, project_im_phi, random_hermitian_J
from osserman_workbench.jacobi import jacobi_null, lift_null, sample_phi_celestial, split_phi_block
from osserman_workbench.models import (
    ModelParams,
    build_theorem_curvature,
    check_characterization_lemma,
    check_degenerate_lemma,
    check_s_identities,
    constant_curvature_tensor,
    eval_R0,
    eval_RJ,
    eval_S,
    eval_T,
    eval_theorem,
    model_tensor,
    sample_null_first_kind,
    sample_null_second_kind,
    ts_form,
)

from conftest import theorem_tensor, unit_im_phi

GRID = [(n, s) for n in range(1, 5) for s in range(1, 5)]


def _random_vectors(S, rng, count=3):
    return rng.standard_normal((count, S.dim))


# --- model maps ---------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_s1_T_minus_S_is_negative_constant_curvature(n, rng):
    S = build_canonical_gff(n, 1)
    g = S.frame.inner
    for _ in range(20):
        x, y, z = _random_vectors(S, rng)
        lhs = eval_T(S, x, y, z) - eval_S(S, x, y, z)
        np.testing.assert_allclose(lhs, g(x, z) * y - g(y, z) * x, atol=1e-12)


def test_S_vanishes_on_xi_span(rng):
    S = build_canonical_gff(2, 3)
    for _ in range(10):
        x, y, z = rng.standard_normal((3, S.s)) @ S.xi
        np.testing.assert_allclose(eval_S(S, x, y, z), 0.0, atol=1e-15)


def test_T_xi1_y_xi1_term_by_term(rng):
    S = build_canonical_gff(2, 2)
    y = unit_im_phi(S, rng)
    xi1 = S.xi[0]
    te = S.tilde_eta_of(xi1)
    # only the tilde-eta(x) tilde-eta(z) phi^2 y term survives
    expected = te * te * S.apply_phi2(y)
    np.testing.assert_allclose(eval_T(S, xi1, y, xi1), expected, atol=1e-15)
    np.testing.assert_allclose(eval_T(S, xi1, y, xi1), -y, atol=1e-15)


def test_R0_orthonormal_pair(rng):
    S = build_canonical_gff(3, 2)
    x = unit_im_phi(S, rng)
    y = project_im_phi(S, rng.standard_normal(S.dim))
    y = y - S.frame.inner(x, y) * x
    y /= np.sqrt(S.frame.norm2(y))
    # phi^2 = -1 on Im(phi), so the three phi^2 factors leave one sign
    np.testing.assert_allclose(eval_R0(S, x, y, y), -x, atol=1e-14)
    np.testing.assert_allclose(eval_R0(S, x, x, rng.standard_normal(S.dim)), 0.0, atol=1e-14)


def test_RJ_two_evaluation_paths(rng):
    S = build_canonical_gff(2, 2)
    J = random_hermitian_J(2, 5)
    Jf = J.full(S)
    x = unit_im_phi(S, rng)
    direct = eval_RJ(S, J, x, Jf @ x, Jf @ x)
    R = endomorphism_from_tensor(model_tensor(S, "RJ", J))
    via_tensor = np.einsum("cdbi,c,d,b->i", R, x, Jf @ x, Jf @ x)
    np.testing.assert_allclose(direct, -3 * x, atol=1e-13)
    np.testing.assert_allclose(via_tensor, direct, atol=1e-13)


def test_RJ_jacobi_form(rng):
    S = build_canonical_gff(3, 1)
    J = random_hermitian_J(3, 2)
    Jf = J.full(S)
    x = unit_im_phi(S, rng)
    y = project_im_phi(S, rng.standard_normal(S.dim))
    np.testing.assert_allclose(
        eval_RJ(S, J, y, x, x), -3 * S.frame.inner(y, Jf @ x) * (Jf @ x), atol=1e-13
    )


@pytest.mark.parametrize("name", ["T", "S", "R0", "RJ"])
def test_model_tensors_curvature_like(name):
    S = build_canonical_gff(2, 3)
    F = model_tensor(S, name, random_hermitian_J(2, 0))
    assert check_curvature_like(F).max_violation < 1e-12


def test_model_tensor_RJ_needs_J():
    with pytest.raises(StructuralError):
        model_tensor(build_canonical_gff(1, 1), "RJ")


def test_tensor_matches_pointwise_evaluation(rng):
    S, p, F = theorem_tensor(2, 3, 1.5, 0.25, seed=3)
    for _ in range(10):
        x, y, z, w = rng.standard_normal((4, S.dim))
        # F(w, z, x, y) = g(R(x, y) z, w)
        assert F(w, z, x, y) == pytest.approx(S.frame.inner(eval_theorem(S, p, x, y, z), w), abs=1e-12)


# --- theorem-form tensors ---------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(GRID), st.floats(-4, 4), st.floats(-4, 4), st.integers(0, 1000))
def test_theorem_tensor_curvature_like(ns, c1, c2, seed):
    _, _, F = theorem_tensor(*ns, c1, c2, seed)
    assert check_curvature_like(F).max_violation < 1e-10


def test_theorem_rejects_invalid_J():
    S = build_canonical_gff(1, 1)
    with pytest.raises(StructuralError):
        build_theorem_curvature(S, ModelParams(1.0, 1.0, HermitianStructure(np.eye(2))))
    with pytest.raises(StructuralError):
        build_theorem_curvature(S, ModelParams(1.0, 1.0, random_hermitian_J(2, 0)))


@pytest.mark.parametrize("n,s", [(1, 2), (2, 2), (3, 3)])
@pytest.mark.parametrize("c", [0.0, 1.5, -2.0])
def test_equal_constants_give_single_eigenvalue(n, s, c):
    S, _, F = theorem_tensor(n, s, c, c)
    for x in sample_phi_celestial(S, 5, seed=1):
        realization, M = jacobi_null(F, S, lift_null(S, x))
        A = split_phi_block(realization, M).A
        assert eigen_spectrum(A).matches([(c, 2 * n - 1)])


@pytest.mark.parametrize("c", [0.0, 1.0, 3.0])
def test_s1_xi_pair_value(c, rng):
    S, _, F = theorem_tensor(2, 1, c, c)
    x = unit_im_phi(S, rng)
    assert F(x, S.xi[0], x, S.xi[0]) == pytest.approx(1.0, abs=1e-12)


def test_K_of_x_and_xi1(rng):
    S, _, F = theorem_tensor(2, 2, 2.0, -1.0)
    x = unit_im_phi(S, rng)
    # F(x, xi_1, x, xi_1) = 1 while Delta = -1
    assert sectional_curvature(F, x, S.xi[0]) == pytest.approx(-1.0, abs=1e-12)


# --- S-manifold identities -----------------------------------------------------------


@pytest.mark.parametrize("n,s", GRID)
def test_identities_hold_for_theorem_tensors(n, s):
    _, _, F = theorem_tensor(n, s, 2.0, -1.0, seed=n + s)
    rep = check_s_identities(F, build_canonical_gff(n, s))
    assert rep.max_violation < 1e-10


def test_constant_curvature_violates_xi_pair_identity():
    S = build_canonical_gff(2, 2)
    F = constant_curvature_tensor(S.frame, 1.0)
    rep = check_s_identities(F, S)
    assert rep.violations["xi_pairs"] > 0.5
    assert not rep.holds("xi_pairs")


def test_zero_tensor_xi_pair_deviation_is_one():
    S = build_canonical_gff(2, 2)
    F = CurvatureTensor(S.frame, np.zeros((S.dim,) * 4))
    assert check_s_identities(F, S).violations["xi_pairs"] == pytest.approx(1.0)


def test_identities_frame_mismatch():
    S = build_canonical_gff(1, 1)
    with pytest.raises(StructuralError):
        check_s_identities(constant_curvature_tensor(MetricFrame((1, -1)), 1.0), S)


# --- constant curvature ------------------------------------------------------------------


def test_constant_curvature_values():
    frame = MetricFrame((1, 1, 1, -1))
    assert np.all(constant_curvature_tensor(frame, 0.0).values == 0)
    F = constant_curvature_tensor(frame, 2.0)
    x, y, t = np.eye(4)[0], np.eye(4)[1], np.eye(4)[3]
    assert F(x, y, x, y) == pytest.approx(2.0)
    assert frame.norm2(x) * frame.norm2(t) - frame.inner(x, t) ** 2 == -1.0
    assert sectional_curvature(F, x, t) == pytest.approx(2.0)


# --- degenerate-plane criterion --------------------------------------------------------------


def test_degenerate_lemma_constant_curvature():
    S = build_canonical_gff(2, 2)
    rep = check_degenerate_lemma(constant_curvature_tensor(S.frame, 3.0), samples=200)
    assert rep.max_degenerate_value < 1e-9
    assert rep.fitted_k == pytest.approx(3.0, abs=1e-8)
    assert rep.constant_form and rep.degenerate_vanishes and rep.equivalent


@pytest.mark.parametrize("s", [2, 3])
def test_degenerate_lemma_theorem_tensor_not_constant(s):
    S, _, F = theorem_tensor(2, s, 2.0, -1.0)
    rep = check_degenerate_lemma(F, samples=50, structure=S)
    assert rep.max_degenerate_value > 1e-3
    assert not rep.constant_form and rep.equivalent


def test_degenerate_lemma_zero_tensor():
    frame = MetricFrame((1, 1, -1))
    rep = check_degenerate_lemma(CurvatureTensor(frame, np.zeros((3,) * 4)), samples=20)
    assert rep.fitted_k == 0.0 and rep.max_degenerate_value == 0.0


def test_null_samplers(rng):
    S = build_canonical_gff(2, 3)
    for _ in range(10):
        for u in (sample_null_first_kind(S, rng), sample_null_second_kind(S, rng)):
            assert S.frame.norm2(u) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(InapplicableHypotheses):
        sample_null_second_kind(build_canonical_gff(2, 1), rng)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.0, 1e-2, 1.0]), st.floats(-3, 3))
def test_degenerate_lemma_equivalence_on_perturbed_constant(seed, eps, k):
    frame = MetricFrame((1, 1, -1, 1))
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((4, 4))
    P = kulkarni_nomizu(frame, h + h.T, np.diag(frame.signs))
    F = CurvatureTensor(frame, constant_curvature_tensor(frame, k).values + eps * P.values)
    assert check_degenerate_lemma(F, samples=30, seed=seed).equivalent


# --- characterization of T - S ----------------------------------------------------------------


@pytest.mark.parametrize("n,s", [(1, 1), (2, 2), (2, 3)])
def test_ts_form_satisfies_condition_a(n, s):
    S = build_canonical_gff(n, s)
    rep = check_characterization_lemma(ts_form(S), S, samples=50)
    assert rep.max_a < 1e-10 and rep.a_holds and rep.b_holds


def test_zero_constants_reduce_to_ts():
    S, _, F = theorem_tensor(2, 2, 0.0, 0.0)
    rep = check_characterization_lemma(F, S)
    assert rep.max_h < 1e-12 and rep.agree


def test_c2_one_breaks_both_sides():
    S, _, F = theorem_tensor(2, 2, 0.0, 1.0)
    rep = check_characterization_lemma(F, S)
    assert not rep.a_holds and not rep.b_holds and rep.agree


def test_characterization_inapplicable_without_xi_pairs():
    S = build_canonical_gff(2, 2)
    with pytest.raises(InapplicableHypotheses):
        check_characterization_lemma(constant_curvature_tensor(S.frame, 1.0), S)


def _im_phi_perturbation(S, rng):
    P = np.diag([1.0] * (2 * S.n) + [0.0] * S.s)
    h = rng.standard_normal((S.dim, S.dim))
    k = rng.standard_normal((S.dim, S.dim))
    return kulkarni_nomizu(S.frame, P @ (h + h.T) @ P, P @ (k + k.T) @ P)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([(1, 1), (2, 2), (2, 3), (3, 1)]), st.sampled_from([0.0, 1e-3, 0.3]))
def test_characterization_equivalence_under_admissible_perturbation(seed, ns, eps):
    S = build_canonical_gff(*ns)
    rng = np.random.default_rng(seed)
    Pt = _im_phi_perturbation(S, rng)
    F = CurvatureTensor(S.frame, ts_form(S).values + eps * Pt.values)
    rep = check_characterization_lemma(F, S, samples=30, seed=seed)
    assert rep.agree
    assert rep.b_holds == (eps == 0.0)
