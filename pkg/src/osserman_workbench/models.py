"""Model curvature tensors of Lorentzian S-manifolds and checks of the
algebraic curvature lemmas.

All ``eval_*`` functions return the vector R(x, y) z of a (1,3) tensor and
broadcast over leading axes of ``x``, ``y``, ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL,
    CurvatureTensor,
    MetricFrame,
    TolerancePolicy,
    tensor_from_endomorphism,
)
from .errors import InapplicableHypotheses, StructuralError
from .gff import GffStructure, HermitianStructure

__all__ = [
    "ModelParams",
    "eval_T",
    "eval_S",
    "eval_R0",
    "eval_RJ",
    "eval_theorem",
    "model_tensor",
    "build_theorem_curvature",
    "constant_curvature_tensor",
    "IdentityReport",
    "check_s_identities",
    "DegenerateLemmaReport",
    "check_degenerate_lemma",
    "CharacterizationReport",
    "check_characterization_lemma",
    "hypothesis_violations",
    "sample_null_first_kind",
    "sample_null_second_kind",
]


def _g(S: GffStructure, a, b) -> np.ndarray:
    return np.sum(np.asarray(a) * S.frame.sign_vector * np.asarray(b), axis=-1)[..., None]


def eval_T(S: GffStructure, x, y, z) -> np.ndarray:
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    px, py, pz = S.apply_phi(x), S.apply_phi(y), S.apply_phi(z)
    tx, ty, tz = (S.tilde_eta_of(v)[..., None] for v in (x, y, z))
    xi_t = S.tilde_xi
    return (
        _g(S, py, pz) * tx * xi_t
        - _g(S, px, pz) * ty * xi_t
        - ty * tz * S.apply_phi2(x)
        + tx * tz * S.apply_phi2(y)
    )


def eval_S(S: GffStructure, x, y, z) -> np.ndarray:
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    px, py, pz = S.apply_phi(x), S.apply_phi(y), S.apply_phi(z)
    return _g(S, px, pz) * S.apply_phi2(y) - _g(S, py, pz) * S.apply_phi2(x)


def eval_R0(S: GffStructure, x, y, z) -> np.ndarray:
    qx, qy, qz = (S.apply_phi2(v) for v in (x, y, z))
    return _g(S, qy, qz) * qx - _g(S, qx, qz) * qy


def eval_RJ(S: GffStructure, J: HermitianStructure, x, y, z) -> np.ndarray:
    Jf = J.full(S)
    qx, qy, qz = (S.apply_phi2(v) for v in (x, y, z))
    Jx, Jy, Jz = qx @ Jf.T, qy @ Jf.T, qz @ Jf.T
    return _g(S, Jy, qz) * Jx - _g(S, Jx, qz) * Jy + 2.0 * _g(S, qx, Jy) * Jz


@dataclass(frozen=True)
class ModelParams:
    c1: float
    c2: float
    J: HermitianStructure


def eval_theorem(S: GffStructure, p: ModelParams, x, y, z) -> np.ndarray:
    """R(x,y)z = T(x,y)z - S(x,y)z - c2 R0(x,y)z - (c1 - c2)/3 RJ(x,y)z."""
    return (
        eval_T(S, x, y, z)
        - eval_S(S, x, y, z)
        - p.c2 * eval_R0(S, x, y, z)
        - (p.c1 - p.c2) / 3.0 * eval_RJ(S, p.J, x, y, z)
    )


def model_tensor(S: GffStructure, name: str, J: HermitianStructure | None = None) -> CurvatureTensor:
    """4-tensor of one of the model maps 'T', 'S', 'R0', 'RJ'."""
    maps = {
        "T": lambda x, y, z: eval_T(S, x, y, z),
        "S": lambda x, y, z: eval_S(S, x, y, z),
        "R0": lambda x, y, z: eval_R0(S, x, y, z),
        "RJ": lambda x, y, z: eval_RJ(S, J, x, y, z),
    }
    if name == "RJ" and J is None:
        raise StructuralError("RJ needs a Hermitian structure")
    return tensor_from_endomorphism(S.frame, maps[name])


def build_theorem_curvature(
    S: GffStructure, p: ModelParams, tol: TolerancePolicy = DEFAULT_TOL
) -> CurvatureTensor:
    """Curvature 4-tensor of T - S - c2 R0 - (c1 - c2)/3 RJ.

    The S term is evaluated at (x, y) z: only that reading is trilinear and
    curvature-like.
    """
    if not p.J.is_valid(tol.fit_tol):
        raise StructuralError(f"J is not an almost Hermitian structure: {p.J.violations()}")
    p.J.full(S)  # dimension check
    return tensor_from_endomorphism(S.frame, lambda x, y, z: eval_theorem(S, p, x, y, z))


def constant_curvature_tensor(frame: MetricFrame, k: float) -> CurvatureTensor:
    """F(x,y,z,w) = k (g(x,z) g(y,w) - g(y,z) g(x,w))."""
    G = frame.metric
    values = k * (np.einsum("ac,bd->abcd", G, G) - np.einsum("bc,ad->abcd", G, G))
    return CurvatureTensor(frame, values)


# ---------------------------------------------------------------------------
# S-manifold curvature identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    violations: dict[str, float]
    abs_tol: float

    @property
    def max_violation(self) -> float:
        return max(self.violations.values())

    @property
    def passed(self) -> bool:
        return self.max_violation < self.abs_tol

    def holds(self, *names: str) -> bool:
        return all(self.violations[n] < self.abs_tol for n in names)


HYPOTHESES = ("hyp_xi_pairs", "hyp_phi_triple")


def _peak(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def hypothesis_violations(F: CurvatureTensor, S: GffStructure) -> dict[str, float]:
    """Only the two xi-pair / phi-triple conditions of :func:`check_s_identities`."""
    if F.frame.dim != S.dim:
        raise StructuralError("tensor and structure live on different frames")
    E = np.eye(S.dim)
    Xi = S.xi
    Ph = S.apply_phi(E)
    eps = np.asarray(S.eps, dtype=float)
    gpp = Ph @ S.frame.metric @ Ph.T
    rhs = eps[None, :, None, None] * eps[None, None, None, :] * gpp[:, None, :, None]
    return {
        "hyp_xi_pairs": _peak(F.on(E, Xi, E, Xi) - rhs),
        "hyp_phi_triple": _peak(F.on(Ph, Ph, Ph, Xi)),
    }


def check_s_identities(
    F: CurvatureTensor, S: GffStructure, tol: TolerancePolicy = DEFAULT_TOL
) -> IdentityReport:
    """Exhaustive frame sweeps of the S-manifold curvature identities.

    Keys: ``xi_third_slot`` ... ``xi_span_pairs``, ``im_phi_xi_last``, ``im_phi_xi_pairs``,
    ``hyp_xi_pairs``, ``hyp_phi_triple``.
    """
    if F.frame.dim != S.dim:
        raise StructuralError("tensor and structure live on different frames")
    E = np.eye(S.dim)
    Xi = S.xi
    Ph = S.apply_phi(E)  # rows phi e_i
    Im = S.im_phi_basis()
    eps = np.asarray(S.eps, dtype=float)
    te = S.tilde_eta_of(E)  # tilde_eta(e_i)
    gpp = Ph @ S.frame.metric @ Ph.T  # g(phi e_i, phi e_j)
    G_im = Im @ S.frame.metric @ Im.T

    # xi in the third slot: R(X, Y, xi_a, Z) = eps_a {teta(X) g(phiY, phiZ) - teta(Y) g(phiX, phiZ)}
    lhs1 = F.on(E, E, Xi, E)  # [X, Y, a, Z]
    rhs1 = eps[None, None, :, None] * (
        te[:, None, None, None] * gpp[None, :, None, :]
        - te[None, :, None, None] * gpp[:, None, None, :]
    )
    # xi pairs: R(xi_b, Y, xi_a, Z) = eps_b eps_a g(phiY, phiZ)
    lhs2 = F.on(Xi, E, Xi, E)
    rhs2 = eps[:, None, None, None] * eps[None, None, :, None] * gpp[None, :, None, :]
    # xi triples: R(xi_b, xi_c, xi_a, Z) = 0
    lhs3 = F.on(Xi, Xi, Xi, E)
    # R(phi X, phi Y, xi_a, Z) = 0
    lhs4 = F.on(Ph, Ph, Xi, E)
    # R(U, Y, V, Z) = teta(U) teta(V) g(phiY, phiZ), U, V in span(xi)
    U = np.vstack([Xi, S.tilde_xi[None, :]])
    tu = S.tilde_eta_of(U)
    lhs5 = F.on(U, E, U, E)
    rhs5 = tu[:, None, None, None] * tu[None, None, :, None] * gpp[None, :, None, :]
    # on Im(phi): R(X, Y, Z, xi_a) = 0 and R(X, xi_a, Y, xi_b) = eps_a eps_b g(X, Y) on Im(phi)
    lhs6 = F.on(Im, Im, Im, Xi)
    lhs7 = F.on(Im, Xi, Im, Xi)
    rhs7 = eps[None, :, None, None] * eps[None, None, None, :] * G_im[:, None, :, None]
    # hypotheses: F(x, xi_a, y, xi_b) = eps_a eps_b g(phi x, phi y); F(phi x, phi y, phi z, xi_a) = 0
    lhs8 = F.on(E, Xi, E, Xi)
    rhs8 = eps[None, :, None, None] * eps[None, None, None, :] * gpp[:, None, :, None]
    lhs9 = F.on(Ph, Ph, Ph, Xi)
    return IdentityReport(
        {
            "xi_third_slot": _peak(lhs1 - rhs1),
            "xi_pairs": _peak(lhs2 - rhs2),
            "xi_triples": _peak(lhs3),
            "phi_pair_xi": _peak(lhs4),
            "xi_span_pairs": _peak(lhs5 - rhs5),
            "im_phi_xi_last": _peak(lhs6),
            "im_phi_xi_pairs": _peak(lhs7 - rhs7),
            "hyp_xi_pairs": _peak(lhs8 - rhs8),
            "hyp_phi_triple": _peak(lhs9),
        },
        tol.abs_tol,
    )


# ---------------------------------------------------------------------------
# Degenerate planes
# ---------------------------------------------------------------------------


def _unit(rng: np.random.Generator, m: int) -> np.ndarray:
    v = rng.standard_normal(m)
    return v / np.linalg.norm(v)


def sample_null_first_kind(S: GffStructure, rng: np.random.Generator) -> np.ndarray:
    """t x + xi_1 + sum k_a xi_a with t^2 + sum k_a^2 = 1, t != 0."""
    direction = _unit(rng, S.s)  # (t, k_2, ..., k_s)
    if abs(direction[0]) < 1e-3:
        direction[0] = 1e-3
        direction /= np.linalg.norm(direction)
    t, k = abs(direction[0]), direction[1:]
    x = S.embed_im_phi(_unit(rng, 2 * S.n))
    return t * x + S.xi[0] + k @ S.xi[1:]


def sample_null_second_kind(S: GffStructure, rng: np.random.Generator) -> np.ndarray:
    """xi_1 + sum h_a xi_a with sum h_a^2 = 1 (needs s >= 2)."""
    if S.s < 2:
        raise InapplicableHypotheses("second-kind null vectors need s >= 2")
    h = _unit(rng, S.s - 1)
    return S.xi[0] + h @ S.xi[1:]


def _timelike_index(frame: MetricFrame) -> int:
    neg = [i for i, s in enumerate(frame.signs) if s < 0]
    if len(neg) != 1:
        raise StructuralError("degenerate-plane sampling needs a Lorentzian frame")
    return neg[0]


def _degenerate_plane(frame: MetricFrame, S: GffStructure | None, index: int, seed: int):
    rng = np.random.default_rng([seed, index])
    t_idx = _timelike_index(frame)
    if S is not None:
        if S.s >= 2 and index % 2 == 1:
            u = sample_null_second_kind(S, rng)
        else:
            u = sample_null_first_kind(S, rng)
    else:
        spacelike = np.array([i for i in range(frame.dim) if i != t_idx])
        u = np.zeros(frame.dim)
        u[t_idx] = 1.0
        u[spacelike] = _unit(rng, spacelike.size)
    e_t = np.eye(frame.dim)[t_idx]
    r = rng.standard_normal(frame.dim)
    # g(e_t, u) != 0 for null u, so this lands in u^perp
    y = r - frame.inner(r, u) / frame.inner(e_t, u) * e_t
    return u, y / np.linalg.norm(y)


@dataclass(frozen=True)
class DegenerateLemmaReport:
    """Both sides of the degenerate-plane criterion.

    ``constant_form`` is the verdict of the least-squares fit over
    non-degenerate planes, ``degenerate_vanishes`` the verdict over
    degenerate planes; ``equivalent`` says whether they agree.
    """

    constant_form: bool
    fitted_k: float
    fit_residual: float
    max_degenerate_value: float
    degenerate_vanishes: bool
    samples: int

    @property
    def equivalent(self) -> bool:
        return self.constant_form == self.degenerate_vanishes


def check_degenerate_lemma(
    F: CurvatureTensor,
    samples: int = 200,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
    structure: GffStructure | None = None,
) -> DegenerateLemmaReport:
    """Sample degenerate planes span(u, y) and, independently, fit the
    constant-curvature form on 10x as many non-degenerate planes.

    With ``structure`` given, null vectors alternate between the two
    lightlike normal forms (second kind only when s >= 2).
    """
    frame = F.frame
    planes = [_degenerate_plane(frame, structure, i, seed) for i in range(samples)]
    U = np.array([p[0] for p in planes])
    Y = np.array([p[1] for p in planes])
    degenerate_values = F(U, Y, U, Y)
    max_deg = float(np.max(np.abs(degenerate_values)))

    # a separate stream so fit samples never reuse degenerate-plane draws
    rng = np.random.default_rng([seed, samples, 1])
    need = 10 * samples
    kept_x, kept_y, have = [], [], 0
    while have < need:
        X = rng.standard_normal((need, frame.dim))
        Yf = rng.standard_normal((need, frame.dim))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        Yf /= np.linalg.norm(Yf, axis=1, keepdims=True)
        delta = frame.inner(X, X) * frame.inner(Yf, Yf) - frame.inner(X, Yf) ** 2
        keep = np.abs(delta) >= 1e-2
        kept_x.append(X[keep])
        kept_y.append(Yf[keep])
        have += int(keep.sum())
    X = np.concatenate(kept_x)[:need]
    Yf = np.concatenate(kept_y)[:need]
    delta = frame.inner(X, X) * frame.inner(Yf, Yf) - frame.inner(X, Yf) ** 2
    values = F(X, Yf, X, Yf)
    k = float(np.dot(values, delta) / np.dot(delta, delta))
    residual = float(np.max(np.abs(values - k * delta)))
    return DegenerateLemmaReport(
        constant_form=residual < tol.fit_tol,
        fitted_k=k,
        fit_residual=residual,
        max_degenerate_value=max_deg,
        degenerate_vanishes=max_deg < tol.abs_tol,
        samples=samples,
    )


# ---------------------------------------------------------------------------
# Characterization of T - S
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharacterizationReport:
    max_a: float
    max_h: float
    a_holds: bool
    b_holds: bool
    samples: int

    @property
    def agree(self) -> bool:
        return self.a_holds == self.b_holds


def ts_form(S: GffStructure) -> CurvatureTensor:
    """The 4-tensor (x,y,z,w) -> g(S(x,y)z, w) - g(T(x,y)z, w)."""
    d = S.dim
    e = np.eye(d)
    x = np.broadcast_to(e[:, None, None, :], (d, d, d, d))
    y = np.broadcast_to(e[None, :, None, :], (d, d, d, d))
    z = np.broadcast_to(e[None, None, :, :], (d, d, d, d))
    diff = eval_S(S, x, y, z) - eval_T(S, x, y, z)  # [x, y, z, :]
    return CurvatureTensor(S.frame, np.einsum("xyzm,m->xyzm", diff, S.frame.sign_vector))


def check_characterization_lemma(
    F: CurvatureTensor,
    S: GffStructure,
    samples: int = 100,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> CharacterizationReport:
    """Condition (a): F(u, y, u, y) = 0 for u in N_phi(xi_1), y in u^perp n Im(phi).
    Condition (b): H = F - g(S.,.) + g(T.,.) vanishes identically.

    Raises :class:`InapplicableHypotheses` unless F satisfies the xi-pair and
    phi-triple conditions the equivalence assumes.
    """
    hyp = hypothesis_violations(F, S)
    if max(hyp.values()) >= tol.abs_tol:
        raise InapplicableHypotheses(
            "F violates the hypotheses: " + ", ".join(f"{k}={v:.3e}" for k, v in hyp.items())
        )
    us, ys = [], []
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        x = S.embed_im_phi(_unit(rng, 2 * S.n))
        r = S.embed_im_phi(rng.standard_normal(2 * S.n))
        y = r - S.frame.inner(r, x) * x
        us.append(S.xi[0] + x)
        ys.append(y / np.linalg.norm(y))
    U, Y = np.array(us), np.array(ys)
    max_a = float(np.max(np.abs(F(U, Y, U, Y))))
    H = F.values - ts_form(S).values
    max_h = float(np.max(np.abs(H)))
    return CharacterizationReport(
        max_a=max_a,
        max_h=max_h,
        a_holds=max_a < tol.abs_tol,
        b_holds=max_h < tol.abs_tol,
        samples=samples,
    )
