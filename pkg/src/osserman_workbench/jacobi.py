"""Jacobi operators for unit and null vectors, Osserman scans and recovery of
the almost Hermitian structure from two-eigenvalue spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .core import (
    DEFAULT_TOL,
    CurvatureTensor,
    SpectrumReport,
    TolerancePolicy,
    char_poly,
    eigen_spectrum,
    general_spectrum,
    orthonormalize,
)
from .errors import (
    InapplicableHypotheses,
    NotLightlike,
    PreconditionError,
    RecoveryFailure,
    StructuralError,
    SymmetryError,
)
from .gff import FirstKind, GffStructure, HermitianStructure, classify_lightlike
from .models import hypothesis_violations

__all__ = [
    "JacobiOperator",
    "jacobi_unit",
    "QuotientRealization",
    "realize_quotient",
    "jacobi_null",
    "PhiSplit",
    "split_phi_block",
    "CharpolyReport",
    "verify_charpoly_relations",
    "sample_phi_celestial",
    "lift_null",
    "OssermanVerdict",
    "osserman_scan",
    "NullFailureRecord",
    "reproduce_prop31",
    "recover_hermitian_J",
    "EigenCase",
    "classify_eigenstructure",
]

ScanMode = Literal["phi_null", "null", "unit_spacelike_im_phi"]


# ---------------------------------------------------------------------------
# Unit vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JacobiOperator:
    """R_z(y) = R(y, z) z on z^perp.

    ``form[i, j] = g(R_z b_i, b_j)`` is symmetric; ``matrix`` is the operator
    in the orthonormal basis ``basis`` (rows) with causal signs ``signs``,
    i.e. ``diag(signs) @ form``.
    """

    z: np.ndarray
    basis: np.ndarray
    signs: np.ndarray
    form: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.signs[:, None] * self.form

    @property
    def self_adjointness(self) -> float:
        f = self.form
        return float(np.max(np.abs(f - f.T))) if f.size else 0.0


def jacobi_unit(F: CurvatureTensor, z, tol: TolerancePolicy = DEFAULT_TOL) -> JacobiOperator:
    frame = F.frame
    z = np.asarray(z, dtype=float)
    q = frame.inner(z, z)
    if abs(abs(q) - 1.0) > tol.abs_tol:
        raise PreconditionError(f"z must be a unit vector, g(z, z) = {q:.6g}")
    # timelike frame vectors first: after them the remaining complement is
    # definite, so indefinite Gram-Schmidt never meets a null residual
    order = sorted(range(frame.dim), key=lambda i: frame.signs[i])
    candidates = np.vstack([z[None, :], np.eye(frame.dim)[order]])
    basis, signs = orthonormalize(frame, candidates, count=frame.dim)
    basis, signs = basis[1:], signs[1:]
    form = F.on(z, basis, z, basis)[0, :, 0, :]
    return JacobiOperator(z, basis, signs, form)


# ---------------------------------------------------------------------------
# Null vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuotientRealization:
    """A complement W of span(u) in u^perp, W = u^perp n reference^perp.

    ``basis_W`` rows are g-orthonormal and spacelike.  When u is a multiple of
    xi_1 + x with x in Im(phi) and the reference is xi_1, the basis is ordered
    V = x^perp n Im(phi) first and U = span(xi_2, ..., xi_s) after, and
    ``V_indices`` / ``U_indices`` are set.
    """

    u: np.ndarray
    reference: np.ndarray
    basis_W: np.ndarray
    metric_signs: np.ndarray
    V_indices: tuple[int, ...] | None = None
    U_indices: tuple[int, ...] | None = None

    @property
    def has_split(self) -> bool:
        return self.V_indices is not None

    @property
    def projector(self) -> np.ndarray:
        """Matrix of the projection u^perp -> W along span(u)."""
        gz = self.metric_signs * self.reference
        return np.eye(self.u.size) - np.outer(self.u, gz) / float(self.u @ gz)

    def project(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.projector.T

    def coordinates(self, v) -> np.ndarray:
        """Coordinates of the class of v (v in u^perp) in ``basis_W``."""
        w = self.project(v)
        return (w * self.metric_signs) @ self.basis_W.T


def _check_null(S: GffStructure, u: np.ndarray, tol: TolerancePolicy) -> None:
    norm = float(np.linalg.norm(u))
    if norm <= tol.abs_tol:
        raise PreconditionError("u must be nonzero")
    q = S.frame.inner(u, u)
    if abs(q) > tol.abs_tol * max(1.0, norm**2):
        raise NotLightlike(f"g(u, u) = {q:.3e}")


def realize_quotient(
    S: GffStructure,
    u,
    tol: TolerancePolicy = DEFAULT_TOL,
    *,
    reference=None,
    order: Sequence[int] | None = None,
) -> QuotientRealization:
    """Geometrical realization of u^perp / span(u) by Gram-Schmidt over the
    frame vectors (in ``order``) projected onto u^perp n reference^perp.

    ``reference`` must be timelike; it defaults to xi_1.
    """
    frame = S.frame
    u = np.asarray(u, dtype=float)
    _check_null(S, u, tol)
    default_ref = reference is None
    z = S.xi[0] if default_ref else np.asarray(reference, dtype=float)
    if frame.inner(z, z) >= 0:
        raise PreconditionError("the reference vector must be timelike")
    order = list(range(frame.dim)) if order is None else list(order)
    if sorted(order) != list(range(frame.dim)):
        raise StructuralError("order must be a permutation of the frame indices")

    # orthogonal projection onto span(u, z)^perp
    gram = np.array([[0.0, frame.inner(u, z)], [frame.inner(u, z), frame.inner(z, z)]])
    span = np.vstack([u, z])

    def project(c: np.ndarray) -> np.ndarray:
        coeffs = np.linalg.solve(gram, np.array([frame.inner(c, u), frame.inner(c, z)]))
        return c - coeffs @ span

    E = np.eye(frame.dim)
    signs = frame.sign_vector
    split = False
    if default_ref:
        dec = classify_lightlike(S, u, tol)
        kind = dec.kind
        split = isinstance(kind, FirstKind) and all(abs(k) <= tol.abs_tol for k in kind.k)

    if split:
        im = [i for i in order if i < 2 * S.n]
        xis = [i for i in order if i >= 2 * S.n + 1]
        V, _ = orthonormalize(frame, [project(E[i]) for i in im], count=2 * S.n - 1)
        U = E[xis].reshape(len(xis), frame.dim)
        basis = np.vstack([V, U])
        nv = V.shape[0]
        return QuotientRealization(
            u, z, basis, signs, tuple(range(nv)), tuple(range(nv, nv + U.shape[0]))
        )
    basis, bsigns = orthonormalize(frame, [project(E[i]) for i in order], count=frame.dim - 2)
    if np.any(bsigns < 0):
        raise StructuralError("realization is not spacelike; the metric is not Lorentzian")
    return QuotientRealization(u, z, basis, signs)


def jacobi_null(
    F: CurvatureTensor,
    S: GffStructure,
    u,
    tol: TolerancePolicy = DEFAULT_TOL,
    *,
    reference=None,
    order: Sequence[int] | None = None,
) -> tuple[QuotientRealization, np.ndarray]:
    """Matrix of the induced operator on u^perp / span(u), class of x -> class of R(x, u) u,
    in a geometrical realization."""
    realization = realize_quotient(S, u, tol, reference=reference, order=order)
    W = realization.basis_W
    u = realization.u
    M = F.on(u, W, u, W)[0, :, 0, :]
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if asym > 1e-9 * scale:
        raise SymmetryError(f"null Jacobi matrix is not symmetric ({asym:.3e}); F is not curvature-like")
    return realization, (M + M.T) / 2


@dataclass(frozen=True, eq=False)
class PhiSplit:
    A: np.ndarray
    U_block: np.ndarray
    coupling: float


def split_phi_block(realization: QuotientRealization, M) -> PhiSplit:
    """Blocks of the null Jacobi matrix on V and on U = span(xi_2, ..., xi_s)."""
    if not realization.has_split:
        raise StructuralError("realization has no V/U split (u is not in N_phi(xi_1))")
    M = np.asarray(M, dtype=float)
    v = list(realization.V_indices)
    w = list(realization.U_indices)
    off = M[np.ix_(v, w)]
    return PhiSplit(
        A=M[np.ix_(v, v)],
        U_block=M[np.ix_(w, w)],
        coupling=float(np.max(np.abs(off))) if off.size else 0.0,
    )


# ---------------------------------------------------------------------------
# Characteristic polynomial relations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CharpolyReport:
    p_A: Polynomial
    p_C: Polynomial
    p_D: Polynomial
    expected_C: Polynomial
    expected_D: Polynomial
    deviation_C: float
    deviation_D: float
    fit_tol: float
    branch: str

    @property
    def max_deviation(self) -> float:
        return max(self.deviation_C, self.deviation_D)

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.fit_tol


def _coef_distance(p: Polynomial, q: Polynomial) -> float:
    a, b = p.coef, q.coef
    m = max(a.size, b.size)
    return float(np.max(np.abs(np.pad(a, (0, m - a.size)) - np.pad(b, (0, m - b.size)))))


def _check_phi_celestial(S: GffStructure, x: np.ndarray, tol: TolerancePolicy) -> None:
    if abs(S.frame.inner(x, x) - 1.0) > tol.abs_tol or np.max(np.abs(S.eta_of(x))) > tol.abs_tol:
        raise PreconditionError("x must be a unit vector in Im(phi)")


def verify_charpoly_relations(
    F: CurvatureTensor, S: GffStructure, x, tol: TolerancePolicy = DEFAULT_TOL
) -> CharpolyReport:
    """Compare the characteristic polynomials of the null Jacobi matrix C at
    u = xi_1 + x and of the unit Jacobi matrix D at x with the products
    predicted from the V-block A."""
    if max(hypothesis_violations(F, S).values()) >= tol.abs_tol:
        raise InapplicableHypotheses("F violates the xi-pair / phi-triple hypotheses")
    x = np.asarray(x, dtype=float)
    _check_phi_celestial(S, x, tol)
    s = S.s
    realization, C = jacobi_null(F, S, S.xi[0] + x, tol)
    A = split_phi_block(realization, C).A
    D = jacobi_unit(F, x, tol).matrix
    p_A, p_C, p_D = char_poly(A), char_poly(C), char_poly(D)
    lam = Polynomial([0.0, 1.0])
    if s == 1:
        expected_C = p_A
        branch = "s=1"
    else:
        expected_C = p_A * (-1.0) ** (s - 1) * lam ** (s - 2) * (lam - (s - 1))
        branch = "s>=2"
    # p_A(lambda + 1) * (-1)^s lambda^(s-1) (lambda - (s-2)); s = 1 gives -(lambda+1) p_A(lambda+1)
    shifted = p_A(Polynomial([1.0, 1.0]))
    expected_D = shifted * (-1.0) ** s * lam ** (s - 1) * (lam - (s - 2))
    return CharpolyReport(
        p_A=p_A,
        p_C=p_C,
        p_D=p_D,
        expected_C=expected_C,
        expected_D=expected_D,
        deviation_C=_coef_distance(p_C, expected_C),
        deviation_D=_coef_distance(p_D, expected_D),
        fit_tol=tol.fit_tol,
        branch=branch,
    )


# ---------------------------------------------------------------------------
# Osserman scans
# ---------------------------------------------------------------------------


def sample_phi_celestial(S: GffStructure, count: int, seed: int) -> np.ndarray:
    """``count`` unit vectors of Im(phi) (automatically orthogonal to every xi_a).

    Sample i is drawn from the stream (seed, i) and so does not depend on count.
    """
    if count < 1:
        raise PreconditionError("count must be at least 1")
    out = np.empty((count, S.dim))
    for i in range(count):
        v = np.random.default_rng([seed, i]).standard_normal(2 * S.n)
        out[i] = S.embed_im_phi(v / np.linalg.norm(v))
    return out


def lift_null(S: GffStructure, x) -> np.ndarray:
    """xi_1 + x: the element of N(xi_1) sent to x by u -> u - xi_1."""
    return S.xi[0] + np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class OssermanVerdict:
    is_osserman: bool
    common_spectrum: SpectrumReport | None
    witness: tuple[np.ndarray, np.ndarray] | None
    samples_used: int
    mode: str
    max_deviation: float = 0.0
    witness_spectra: tuple[SpectrumReport, SpectrumReport] | None = None
    block_spectra: tuple[SpectrumReport, SpectrumReport] | None = None
    block_deviation: float = 0.0


def _null_directions(S: GffStructure, samples: int, seed: int) -> np.ndarray:
    """Unit vectors of xi_1^perp: xi_2..xi_s, the Im(phi) frame, then random
    directions alternating between generic ones and span(xi_2, ..., xi_s)."""
    E = np.eye(S.dim)
    dirs = [E[2 * S.n + a] for a in range(1, S.s)] + list(E[: 2 * S.n])
    spacelike = [i for i in range(S.dim) if i != 2 * S.n]
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        v = np.zeros(S.dim)
        if S.s >= 2 and i % 2 == 1:
            idx = list(range(2 * S.n + 1, S.dim))
        else:
            idx = spacelike
        v[idx] = rng.standard_normal(len(idx))
        dirs.append(v / np.linalg.norm(v))
    return np.array(dirs)


def osserman_scan(
    F: CurvatureTensor,
    S: GffStructure,
    mode: ScanMode = "phi_null",
    samples: int = 100,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> OssermanVerdict:
    """Check whether Jacobi spectra (with multiplicities) are independent of
    the base vector.

    phi_null: null operators at xi_1 + x, x in the phi-celestial sphere.
    null: null operators at xi_1 + v, v anywhere on the celestial sphere of xi_1.
    unit_spacelike_im_phi: unit operators R_x, x in the phi-celestial sphere.
    Each mode scans the relevant frame directions plus ``samples`` random ones.
    """
    if mode == "null":
        directions = _null_directions(S, samples, seed)
    elif mode in ("phi_null", "unit_spacelike_im_phi"):
        directions = np.vstack([S.im_phi_basis(), sample_phi_celestial(S, samples, seed)])
    else:
        raise StructuralError(f"unknown scan mode {mode!r}")

    ref_vec = ref = ref_blocks = None
    max_dev = block_dev = 0.0
    for d in directions:
        blocks = None
        if mode == "unit_spacelike_im_phi":
            vec = d
            spec = general_spectrum(jacobi_unit(F, d, tol).matrix, tol, source="R_x")
        else:
            vec = lift_null(S, d)
            realization, M = jacobi_null(F, S, vec, tol)
            spec = eigen_spectrum(M, tol, source="null Jacobi")
            if mode == "phi_null":
                parts = split_phi_block(realization, M)
                blocks = (
                    eigen_spectrum(parts.A, tol, source="V-block"),
                    eigen_spectrum(parts.U_block, tol, source="U-block"),
                )
        if ref is None:
            ref_vec, ref, ref_blocks = vec, spec, blocks
            continue
        dev = ref.deviation(spec)
        if dev > tol.cluster_gap:
            return OssermanVerdict(
                is_osserman=False,
                common_spectrum=None,
                witness=(ref_vec, vec),
                samples_used=len(directions),
                mode=mode,
                max_deviation=dev,
                witness_spectra=(ref, spec),
            )
        max_dev = max(max_dev, dev)
        if blocks is not None:
            block_dev = max(block_dev, ref_blocks[0].deviation(blocks[0]), ref_blocks[1].deviation(blocks[1]))
    return OssermanVerdict(
        is_osserman=True,
        common_spectrum=ref,
        witness=None,
        samples_used=len(directions),
        mode=mode,
        max_deviation=max_dev,
        block_spectra=ref_blocks,
        block_deviation=block_dev,
    )


# ---------------------------------------------------------------------------
# Failure of the null Osserman condition for s >= 2
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NullFailureRecord:
    """``null_norms[b]`` is max |entry| of the null Jacobi matrix at xi_1 + xi_b.
    ``images[i][:, j]`` holds the U-coordinates (on xi_2, ..., xi_s) of the
    operator at xi_1 + xs[i] applied to the class of xi_{j+2}."""

    null_norms: dict[int, float]
    xs: np.ndarray
    images: np.ndarray
    coupling: float
    spectra_differ: bool

    @property
    def max_null_norm(self) -> float:
        return max(self.null_norms.values())

    @property
    def image_deviation(self) -> float:
        """Distance of every U-coordinate from 1."""
        return float(np.max(np.abs(self.images - 1.0)))


def reproduce_prop31(
    F: CurvatureTensor,
    S: GffStructure,
    tol: TolerancePolicy = DEFAULT_TOL,
    xs=None,
) -> NullFailureRecord:
    if S.s < 2:
        raise InapplicableHypotheses("needs at least two characteristic vectors")
    null_norms = {}
    spectra = []
    for b in range(2, S.s + 1):
        _, M = jacobi_null(F, S, S.xi[0] + S.xi[b - 1], tol)
        null_norms[b] = float(np.max(np.abs(M))) if M.size else 0.0
        spectra.append(eigen_spectrum(M, tol))
    xs = S.im_phi_basis()[:1] if xs is None else np.atleast_2d(np.asarray(xs, dtype=float))
    images, coupling = [], 0.0
    for x in xs:
        _check_phi_celestial(S, x, tol)
        realization, M = jacobi_null(F, S, lift_null(S, x), tol)
        parts = split_phi_block(realization, M)
        images.append(parts.U_block)
        coupling = max(coupling, parts.coupling)
        spectra.append(eigen_spectrum(M, tol))
    differ = any(not spectra[0].agrees_with(sp) for sp in spectra[1:])
    return NullFailureRecord(null_norms, xs, np.array(images), coupling, differ)


# ---------------------------------------------------------------------------
# Almost Hermitian structure from the c1-eigenvectors
# ---------------------------------------------------------------------------


def _c1_eigenvector(
    F: CurvatureTensor, S: GffStructure, x: np.ndarray, c1: float, c2: float, tol: TolerancePolicy
) -> np.ndarray:
    """Unit c1-eigenvector of the V-block at xi_1 + x, in Im(phi) coordinates."""
    realization, M = jacobi_null(F, S, lift_null(S, x), tol)
    A = split_phi_block(realization, M).A
    spec = eigen_spectrum(A, tol)
    if not spec.matches([(c1, 1), (c2, 2 * S.n - 2)]):
        raise RecoveryFailure(
            f"V-block spectrum {spec.pairs} does not match ({c1}, 1), ({c2}, {2 * S.n - 2})"
        )
    w, vecs = np.linalg.eigh(A)
    hits = np.flatnonzero(np.abs(w - c1) <= tol.cluster_gap)
    if hits.size != 1:
        raise RecoveryFailure(f"c1-eigenspace has dimension {hits.size}, expected 1")
    V = realization.basis_W[list(realization.V_indices)]
    return (vecs[:, hits[0]] @ V)[: 2 * S.n]


def recover_hermitian_J(
    F: CurvatureTensor,
    S: GffStructure,
    c1: float,
    c2: float,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> HermitianStructure:
    """Assemble J column by column: J e_i is the unit c1-eigenvector of the
    V-block at xi_1 + e_i.

    Eigenvectors carry a sign each.  Column 0 is fixed by making its first
    nonzero coordinate positive; the sign of column j is then propagated
    from the probe direction (e_0 + e_j)/sqrt(2), whose eigenvector must be
    +-(J e_0 + J e_j)/sqrt(2).
    """
    if abs(c1 - c2) <= tol.cluster_gap:
        raise RecoveryFailure("c1 and c2 coincide: the c1-eigenspace is not one-dimensional")
    m = 2 * S.n
    E = S.im_phi_basis()
    cols = np.array([_c1_eigenvector(F, S, E[i], c1, c2, tol) for i in range(m)]).T
    lead = cols[:, 0][np.abs(cols[:, 0]) > 1e-8]
    if lead.size and lead[0] < 0:
        cols[:, 0] *= -1
    for j in range(1, m):
        probe = (E[0] + E[j]) / np.sqrt(2.0)
        v = _c1_eigenvector(F, S, probe, c1, c2, tol)
        plus = abs(v @ (cols[:, 0] + cols[:, j]))
        minus = abs(v @ (cols[:, 0] - cols[:, j]))
        if minus > plus:
            cols[:, j] *= -1
    J = HermitianStructure(cols)
    sq, orth = J.violations()
    if max(sq, orth) > 1e-6:
        raise RecoveryFailure(f"assembled J fails J^2 = -I ({sq:.3e}) or orthogonality ({orth:.3e})")
    return J


# ---------------------------------------------------------------------------
# Eigenstructure cases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenCase:
    tag: Literal["(i)", "(ii)", "other"]
    anomaly: bool


def classify_eigenstructure(spectrum: SpectrumReport, n_phi_dim: int) -> EigenCase:
    """Case (i): one eigenvalue of full multiplicity; case (ii): two
    eigenvalues with multiplicities 1 and n_phi_dim - 2.

    "other" on dim Im(phi) = 4m + 2 is flagged as an anomaly, since it cannot
    occur for genuinely phi-null Osserman input there.
    """
    dim = n_phi_dim - 1
    if spectrum.dim != dim:
        raise StructuralError(f"multiplicities sum to {spectrum.dim}, expected {dim}")
    mults = sorted(spectrum.multiplicities)
    if len(mults) == 1:
        tag = "(i)"
    elif len(mults) == 2 and mults == sorted([1, n_phi_dim - 2]):
        tag = "(ii)"
    else:
        tag = "other"
    return EigenCase(tag, tag == "other" and n_phi_dim % 4 == 2)
