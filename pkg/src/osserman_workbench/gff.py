"""Lorentzian globally framed f-structures on a model tangent space.

Frame ordering is fixed everywhere:

    (X_1, ..., X_n, phi X_1, ..., phi X_n, xi_1, ..., xi_s)

with xi_1 the unique timelike vector.  Im(phi) is therefore spanned by the
first 2n coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import DEFAULT_TOL, MetricFrame, TolerancePolicy, _frozen
from .errors import NotLightlike, StructuralError

__all__ = [
    "GffStructure",
    "GffReport",
    "FirstKind",
    "SecondKind",
    "LightlikeDecomposition",
    "HermitianStructure",
    "build_canonical_gff",
    "validate_gff",
    "classify_lightlike",
    "random_hermitian_J",
    "standard_complex_structure",
    "project_im_phi",
]


@dataclass(frozen=True, eq=False)
class GffStructure:
    """(phi, xi_a, eta^a, eps_a) on a frame of dimension 2n + s.

    ``xi`` holds the characteristic vectors as rows, ``eta`` the 1-forms as
    rows (eta^a(v) = eta[a] @ v).  Nothing is validated on construction so
    that deliberately broken structures can be fed to :func:`validate_gff`.
    """

    frame: MetricFrame
    n: int
    s: int
    phi: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    eps: tuple[int, ...]

    def __post_init__(self):
        d = 2 * self.n + self.s
        if self.frame.dim != d:
            raise StructuralError(f"frame dimension {self.frame.dim} != 2n+s = {d}")
        for name, shape in (("phi", (d, d)), ("xi", (self.s, d)), ("eta", (self.s, d))):
            arr = _frozen(getattr(self, name))
            if arr.shape != shape:
                raise StructuralError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)
        if len(self.eps) != self.s:
            raise StructuralError("one sign eps_a per characteristic vector")
        object.__setattr__(self, "eps", tuple(int(e) for e in self.eps))

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def im_phi_dim(self) -> int:
        return 2 * self.n

    @property
    def tilde_xi(self) -> np.ndarray:
        """Sum of the characteristic vectors."""
        return self.xi.sum(axis=0)

    @property
    def tilde_eta(self) -> np.ndarray:
        """Sum of eps_a eta^a, as a covector."""
        return np.asarray(self.eps, dtype=float) @ self.eta

    @property
    def phi2(self) -> np.ndarray:
        return self.phi @ self.phi

    def apply_phi(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.phi.T

    def apply_phi2(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.phi2.T

    def eta_of(self, v) -> np.ndarray:
        """(eta^1(v), ..., eta^s(v)) along the last axis."""
        return np.asarray(v, dtype=float) @ self.eta.T

    def tilde_eta_of(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.tilde_eta

    def im_phi_basis(self) -> np.ndarray:
        return np.eye(self.dim)[: 2 * self.n]

    def embed_im_phi(self, coords) -> np.ndarray:
        """Lift Im(phi) coordinates (length 2n) to full frame coordinates."""
        coords = np.asarray(coords, dtype=float)
        out = np.zeros(coords.shape[:-1] + (self.dim,))
        out[..., : 2 * self.n] = coords
        return out


def build_canonical_gff(n: int, s: int) -> GffStructure:
    if n < 1 or s < 1:
        raise StructuralError(f"need n >= 1 and s >= 1, got n={n}, s={s}")
    d = 2 * n + s
    signs = (1,) * (2 * n) + (-1,) + (1,) * (s - 1)
    labels = (
        tuple(f"X{i + 1}" for i in range(n))
        + tuple(f"phiX{i + 1}" for i in range(n))
        + tuple(f"xi{a + 1}" for a in range(s))
    )
    frame = MetricFrame(signs, labels)
    phi = np.zeros((d, d))
    for i in range(n):
        phi[n + i, i] = 1.0  # X_i -> phi X_i
        phi[i, n + i] = -1.0  # phi X_i -> -X_i
    xi = np.eye(d)[2 * n :]
    eps = (-1,) + (1,) * (s - 1)
    # g(v, xi_a) = eps_a eta^a(v)  =>  eta^a(v) = v[2n + a]
    eta = xi.copy()
    return GffStructure(frame, n, s, phi, xi, eta, eps)


@dataclass(frozen=True)
class GffReport:
    phi_cubed: float
    phi_squared: float
    duality: float
    compatibility: float
    metric_dual: float
    orthogonality: float
    rank_defect: int
    eps_signs: float
    abs_tol: float

    def as_dict(self) -> dict[str, float]:
        return {
            "phi_cubed": self.phi_cubed,
            "phi_squared": self.phi_squared,
            "duality": self.duality,
            "compatibility": self.compatibility,
            "metric_dual": self.metric_dual,
            "orthogonality": self.orthogonality,
            "rank_defect": float(self.rank_defect),
            "eps_signs": self.eps_signs,
        }

    @property
    def max_violation(self) -> float:
        return max(self.as_dict().values())

    @property
    def valid(self) -> bool:
        return self.max_violation < self.abs_tol


def validate_gff(S: GffStructure, tol: TolerancePolicy = DEFAULT_TOL) -> GffReport:
    """Max violation of each structure identity over the frame."""
    G = S.frame.metric
    phi = S.phi
    eps = np.asarray(S.eps, dtype=float)
    eye = np.eye(S.dim)
    outer = S.xi.T @ S.eta  # sum_a xi_a (x) eta^a as a matrix
    eta_outer = S.eta.T @ (eps[:, None] * S.eta)

    def peak(m) -> float:
        m = np.asarray(m)
        return float(np.max(np.abs(m))) if m.size else 0.0

    rank = np.linalg.matrix_rank(phi, tol=max(tol.abs_tol, 1e-12))
    xi_norms = np.einsum("ai,i,ai->a", S.xi, S.frame.sign_vector, S.xi)
    eps_expected = np.array([-1.0] + [1.0] * (S.s - 1))
    return GffReport(
        phi_cubed=peak(phi @ phi @ phi + phi),
        phi_squared=peak(phi @ phi + eye - outer),
        duality=peak(S.eta @ S.xi.T - np.eye(S.s)),
        compatibility=peak(phi.T @ G @ phi - (G - eta_outer)),
        metric_dual=peak((G @ S.xi.T).T - eps[:, None] * S.eta),
        orthogonality=peak(phi.T @ G @ S.xi.T),
        rank_defect=abs(int(rank) - 2 * S.n),
        eps_signs=max(peak(xi_norms - eps), peak(eps - eps_expected)),
        abs_tol=tol.abs_tol,
    )


def project_im_phi(S: GffStructure, v) -> np.ndarray:
    """Projection onto Im(phi) along span(xi_a), i.e. -phi^2 v."""
    return -S.apply_phi2(v)


@dataclass(frozen=True)
class FirstKind:
    """u ~ t x + xi_1 + sum_{a>=2} k_a xi_a with x a unit vector in Im(phi)."""

    t: float
    x: np.ndarray
    k: tuple[float, ...]


@dataclass(frozen=True)
class SecondKind:
    """u ~ xi_1 + sum_{a>=2} h_a xi_a."""

    h: tuple[float, ...]


@dataclass(frozen=True)
class LightlikeDecomposition:
    kind: Union[FirstKind, SecondKind]
    scale: float

    @property
    def is_first_kind(self) -> bool:
        return isinstance(self.kind, FirstKind)

    def normal_form(self, S: GffStructure) -> np.ndarray:
        kind = self.kind
        if isinstance(kind, FirstKind):
            coeffs = np.concatenate([[1.0], kind.k])
            return kind.t * np.asarray(kind.x) + coeffs @ S.xi
        coeffs = np.concatenate([[1.0], kind.h])
        return coeffs @ S.xi

    def reconstruct(self, S: GffStructure) -> np.ndarray:
        return self.scale * self.normal_form(S)


def classify_lightlike(S: GffStructure, u, tol: TolerancePolicy = DEFAULT_TOL) -> LightlikeDecomposition:
    """Write a null vector in one of the two lightlike normal forms."""
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm <= tol.abs_tol:
        raise StructuralError("the zero vector is not lightlike")
    q = S.frame.inner(u, u)
    if abs(q) > tol.abs_tol * max(1.0, norm**2):
        raise NotLightlike(f"g(u, u) = {q:.3e}")
    scale = float(S.eta_of(u)[0])
    # xi_1^perp is positive definite, so a null vector always has a xi_1 part
    v = u / scale
    im_part = project_im_phi(S, v)
    t = float(np.linalg.norm(im_part))
    rest = tuple(float(c) for c in S.eta_of(v)[1:])
    if t > tol.abs_tol:
        return LightlikeDecomposition(FirstKind(t, im_part / t, rest), scale)
    return LightlikeDecomposition(SecondKind(rest), scale)


@dataclass(frozen=True, eq=False)
class HermitianStructure:
    """Almost Hermitian structure on Im(phi), in Im(phi) coordinates."""

    J: np.ndarray

    def __post_init__(self):
        J = _frozen(self.J)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] % 2:
            raise StructuralError(f"J must be an even-dimensional square matrix, got {J.shape}")
        object.__setattr__(self, "J", J)

    @property
    def n(self) -> int:
        return self.J.shape[0] // 2

    def violations(self) -> tuple[float, float]:
        """(max |J^2 + I|, max |J^T J - I|); the metric on Im(phi) is Euclidean."""
        eye = np.eye(self.J.shape[0])
        return (
            float(np.max(np.abs(self.J @ self.J + eye))),
            float(np.max(np.abs(self.J.T @ self.J - eye))),
        )

    def is_valid(self, tol: float) -> bool:
        return max(self.violations()) < tol

    def full(self, S: GffStructure) -> np.ndarray:
        """J as a dim x dim matrix acting on Im(phi) and killing span(xi_a)."""
        if S.n != self.n:
            raise StructuralError(f"J acts on dimension {2 * self.n}, Im(phi) has {2 * S.n}")
        out = np.zeros((S.dim, S.dim))
        out[: 2 * S.n, : 2 * S.n] = self.J
        return out


def standard_complex_structure(n: int) -> np.ndarray:
    """Block form [[0, -I], [I, 0]], i.e. the action of phi on Im(phi)."""
    J0 = np.zeros((2 * n, 2 * n))
    J0[n:, :n] = np.eye(n)
    J0[:n, n:] = -np.eye(n)
    return J0


def random_hermitian_J(n: int, seed: int) -> HermitianStructure:
    """Q J0 Q^T for a Haar-random orthogonal Q drawn from ``seed``."""
    if n < 1:
        raise StructuralError("n must be positive")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((2 * n, 2 * n))
    Q, R = np.linalg.qr(Z)
    Q = Q * np.sign(np.diag(R))
    J = Q @ standard_complex_structure(n) @ Q.T
    # exact skew-symmetry; removes rounding asymmetry from the products
    J = (J - J.T) / 2
    return HermitianStructure(J)
