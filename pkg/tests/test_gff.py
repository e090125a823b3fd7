import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osserman_workbench.errors import NotLightlike, StructuralError
from osserman_workbench.gff import (
    HermitianStructure,
    SecondKind,
    build_canonical_gff,
    classify_lightlike,
    project_im_phi,
    random_hermitian_J,
    standard_complex_structure,
    validate_gff,
)

GRID = [(n, s) for n in range(1, 5) for s in range(1, 5)]


def test_canonical_n1_s1():
    S = build_canonical_gff(1, 1)
    assert S.dim == 3
    np.testing.assert_array_equal(S.frame.metric, np.diag([1.0, 1.0, -1.0]))
    e1, e2, e3 = np.eye(3)
    np.testing.assert_array_equal(S.apply_phi(e1), e2)
    np.testing.assert_array_equal(S.apply_phi(e2), -e1)
    np.testing.assert_array_equal(S.apply_phi(e3), 0)


def test_canonical_n2_s3():
    S = build_canonical_gff(2, 3)
    assert S.dim == 7
    assert S.frame.signs == (1, 1, 1, 1, -1, 1, 1)
    assert np.linalg.matrix_rank(S.phi) == 4


@pytest.mark.parametrize("n,s", GRID)
def test_canonical_identities_exact(n, s):
    S = build_canonical_gff(n, s)
    assert np.max(np.abs(S.phi @ S.phi @ S.phi + S.phi)) == 0.0
    rep = validate_gff(S)
    assert rep.max_violation == 0.0 and rep.valid


def test_invalid_sizes():
    with pytest.raises(StructuralError):
        build_canonical_gff(0, 1)
    with pytest.raises(StructuralError):
        build_canonical_gff(1, 0)


def test_flipped_eps_breaks_compatibility():
    S = build_canonical_gff(2, 2)
    bad = dataclasses.replace(S, eps=(1, 1))
    rep = validate_gff(bad)
    assert rep.compatibility > 0.5
    assert not rep.valid


def test_perturbed_phi_cubed_violation():
    S = build_canonical_gff(2, 1)
    phi = np.array(S.phi)
    phi[0, 1] += 1e-3
    rep = validate_gff(dataclasses.replace(S, phi=phi))
    assert rep.phi_cubed == pytest.approx(1e-3, rel=0.05)


def test_tilde_eta_is_metric_dual_of_tilde_xi(rng):
    S = build_canonical_gff(2, 3)
    v = rng.standard_normal(S.dim)
    assert S.tilde_eta_of(v) == pytest.approx(S.frame.inner(v, S.tilde_xi))


# --- lightlike classification -------------------------------------------------


def test_xi1_plus_xi2_is_second_kind():
    S = build_canonical_gff(2, 3)
    dec = classify_lightlike(S, S.xi[0] + S.xi[1])
    assert isinstance(dec.kind, SecondKind)
    np.testing.assert_allclose(dec.kind.h, [1.0, 0.0])


def test_xi1_plus_unit_x_is_first_kind():
    S = build_canonical_gff(2, 2)
    x = S.embed_im_phi([0.6, 0.0, 0.8, 0.0])
    dec = classify_lightlike(S, x + S.xi[0])
    assert dec.is_first_kind
    assert dec.kind.t == pytest.approx(1.0)
    np.testing.assert_allclose(dec.kind.k, [0.0])


def test_first_kind_scaled_reconstruction():
    S = build_canonical_gff(2, 2)
    x = S.embed_im_phi([0.0, 1.0, 0.0, 0.0])
    u = 2 * (0.6 * x + S.xi[0] + 0.8 * S.xi[1])
    dec = classify_lightlike(S, u)
    assert dec.kind.t == pytest.approx(0.6)
    np.testing.assert_allclose(dec.kind.k, [0.8])
    assert dec.scale == pytest.approx(2.0)
    assert dec.kind.t**2 + sum(k * k for k in dec.kind.k) == pytest.approx(1.0)
    np.testing.assert_allclose(dec.reconstruct(S), u, atol=1e-14)


def test_classify_errors():
    S = build_canonical_gff(1, 2)
    with pytest.raises(NotLightlike):
        classify_lightlike(S, S.xi[1])
    with pytest.raises(StructuralError):
        classify_lightlike(S, np.zeros(S.dim))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(GRID), st.floats(-5, 5).filter(lambda a: abs(a) > 1e-2))
def test_classify_round_trip(seed, ns, scale):
    n, s = ns
    S = build_canonical_gff(n, s)
    rng = np.random.default_rng(seed)
    # random null vector: timelike component fixed by the spacelike part
    w = rng.standard_normal(S.dim)
    w[2 * n] = 0.0
    w /= np.linalg.norm(w)
    u = scale * (S.xi[0] + w)
    dec = classify_lightlike(S, u)
    np.testing.assert_allclose(dec.reconstruct(S), u, atol=1e-12)
    if dec.is_first_kind:
        assert dec.kind.t**2 + sum(k * k for k in dec.kind.k) == pytest.approx(1.0)
        assert S.frame.norm2(dec.kind.x) == pytest.approx(1.0)
    else:
        assert sum(h * h for h in dec.kind.h) == pytest.approx(1.0)


# --- projection ----------------------------------------------------------------


def test_project_im_phi():
    S = build_canonical_gff(2, 3)
    for xi in S.xi:
        np.testing.assert_array_equal(project_im_phi(S, xi), 0)
    x = S.embed_im_phi([1.0, -2.0, 0.5, 3.0])
    np.testing.assert_array_equal(project_im_phi(S, x), x)
    np.testing.assert_array_equal(project_im_phi(S, x + 3 * S.xi[0]), x)


# --- Hermitian structures ---------------------------------------------------------


@pytest.mark.parametrize("seed", range(8))
def test_n1_random_J_is_plus_minus_rotation(seed):
    J = random_hermitian_J(1, seed).J
    J0 = standard_complex_structure(1)
    assert min(np.max(np.abs(J - J0)), np.max(np.abs(J + J0))) < 1e-12


def test_random_J_n3_seed7():
    H = random_hermitian_J(3, 7)
    sq, orth = H.violations()
    assert sq < 1e-12 and orth < 1e-12
    assert np.max(np.abs(H.J + H.J.T)) == 0.0


def test_random_J_deterministic():
    a = random_hermitian_J(4, 11).J
    b = random_hermitian_J(4, 11).J
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, random_hermitian_J(4, 12).J)


def test_standard_J_is_phi_on_im_phi():
    S = build_canonical_gff(3, 2)
    np.testing.assert_array_equal(standard_complex_structure(3), S.phi[:6, :6])


def test_hermitian_structure_shape_checks():
    with pytest.raises(StructuralError):
        HermitianStructure(np.eye(3))
    with pytest.raises(StructuralError):
        HermitianStructure(standard_complex_structure(1)).full(build_canonical_gff(2, 1))
    assert not HermitianStructure(np.eye(2)).is_valid(1e-6)
