"""Signature-aware linear algebra, curvature 4-tensors, characteristic
polynomials and eigenvalue clustering.

Index convention: a :class:`CurvatureTensor` stores ``F[a, b, c, d]`` with

    F(x, y, z, w) = g(R(z, w) y, x)

for the underlying (1,3) tensor ``R``.  :func:`tensor_from_endomorphism` and
:func:`endomorphism_from_tensor` convert between the two forms.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DegeneratePlane, PreconditionError, StructuralError, SymmetryError

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "MetricFrame",
    "CurvatureTensor",
    "SymmetryReport",
    "SpectrumReport",
    "check_curvature_like",
    "sectional_curvature",
    "char_poly",
    "cluster_eigenvalues",
    "eigen_spectrum",
    "general_spectrum",
    "orthonormalize",
    "tensor_from_endomorphism",
    "endomorphism_from_tensor",
    "kulkarni_nomizu",
]


@dataclass(frozen=True)
class TolerancePolicy:
    abs_tol: float = 1e-9
    cluster_gap: float = 1e-6
    fit_tol: float = 1e-8

    def __post_init__(self):
        for name in ("abs_tol", "cluster_gap", "fit_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise StructuralError(f"{name} must be strictly positive, got {value!r}")
        if self.cluster_gap <= self.abs_tol:
            raise StructuralError("cluster_gap must exceed abs_tol")


DEFAULT_TOL = TolerancePolicy()


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class MetricFrame:
    """A real inner-product space with diagonal metric in a fixed ordered
    orthonormal frame."""

    signs: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if not signs:
            raise StructuralError("a frame needs at least one vector")
        if any(s not in (1, -1) for s in signs):
            raise StructuralError(f"signs must be +1 or -1, got {self.signs!r}")
        object.__setattr__(self, "signs", signs)
        labels = tuple(self.labels) or tuple(f"e{i + 1}" for i in range(len(signs)))
        if len(labels) != len(signs):
            raise StructuralError("one label per frame vector is required")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return len(self.signs)

    @property
    def metric(self) -> np.ndarray:
        return np.diag(np.asarray(self.signs, dtype=float))

    @property
    def sign_vector(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float)

    def basis(self) -> np.ndarray:
        """Frame vectors as the rows of the identity."""
        return np.eye(self.dim)

    def inner(self, x, y) -> np.ndarray | float:
        """g(x, y); broadcasts over leading axes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self._check(x)
        self._check(y)
        out = np.sum(x * self.sign_vector * y, axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def norm2(self, x) -> np.ndarray | float:
        return self.inner(x, x)

    def lower(self, x) -> np.ndarray:
        """The covector g(x, .) in frame coordinates."""
        return np.asarray(x, dtype=float) * self.sign_vector

    def _check(self, v: np.ndarray) -> None:
        if v.shape[-1:] != (self.dim,):
            raise StructuralError(f"expected vectors of length {self.dim}, got shape {v.shape}")


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    """Dense 4-tensor ``F[a, b, c, d] = F(e_a, e_b, e_c, e_d)``."""

    frame: MetricFrame
    values: np.ndarray
    symmetry_checked: bool = False
    max_violation: float | None = None

    def __post_init__(self):
        values = _frozen(self.values)
        d = self.frame.dim
        if values.shape != (d, d, d, d):
            raise StructuralError(
                f"tensor shape {values.shape} does not match frame dimension {d}"
            )
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.frame.dim

    def __call__(self, x, y, z, w) -> np.ndarray | float:
        """F(x, y, z, w); broadcasts over leading axes of the arguments."""
        x, y, z, w = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z, w)))
        if x.ndim == 1:
            return float(np.einsum("abcd,a,b,c,d->", self.values, x, y, z, w))
        lead = x.shape[:-1]
        x, y, z, w = (v.reshape(-1, self.dim) for v in (x, y, z, w))
        # contract one slot at a time; the single einsum is far slower on batches
        t = np.einsum("abcd,nd->nabc", self.values, w)
        t = np.einsum("nabc,nc->nab", t, z)
        out = np.einsum("nab,na,nb->n", t, x, y)
        return out.reshape(lead)

    def on(self, xs, ys, zs, ws) -> np.ndarray:
        """All values F(xs[i], ys[j], zs[k], ws[l]) as an array [i, j, k, l]."""
        return np.einsum(
            "abcd,ia,jb,kc,ld->ijkl",
            self.values,
            np.atleast_2d(xs),
            np.atleast_2d(ys),
            np.atleast_2d(zs),
            np.atleast_2d(ws),
            optimize=True,
        )

    def __add__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        if other.frame != self.frame:
            raise StructuralError("cannot add tensors on different frames")
        return CurvatureTensor(self.frame, self.values + other.values)

    def __sub__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> "CurvatureTensor":
        return CurvatureTensor(self.frame, factor * self.values)

    def verified(self, tol: TolerancePolicy = DEFAULT_TOL) -> "CurvatureTensor":
        """Copy of this tensor carrying the outcome of :func:`check_curvature_like`."""
        report = check_curvature_like(self, tol)
        return dataclasses.replace(
            self, symmetry_checked=report.passed, max_violation=report.max_violation
        )


@dataclass(frozen=True)
class SymmetryReport:
    pair: float
    antisym_first: float
    antisym_last: float
    bianchi: float
    abs_tol: float

    @property
    def max_violation(self) -> float:
        return max(self.pair, self.antisym_first, self.antisym_last, self.bianchi)

    @property
    def passed(self) -> bool:
        return self.max_violation < self.abs_tol

    def as_dict(self) -> dict[str, float]:
        return {
            "pair": self.pair,
            "antisym_first": self.antisym_first,
            "antisym_last": self.antisym_last,
            "bianchi": self.bianchi,
        }


def check_curvature_like(F: CurvatureTensor, tol: TolerancePolicy = DEFAULT_TOL) -> SymmetryReport:
    """Max absolute deviation of ``F`` from each curvature-like symmetry.

    The Bianchi entry is the cyclic sum F(x,y,z,w) + F(x,z,w,y) + F(x,w,y,z)
    over the last three slots.
    """
    v = np.asarray(F.values)
    if v.shape != (F.frame.dim,) * 4:
        raise StructuralError("tensor does not match its frame")
    pair = v - np.einsum("cdab->abcd", v)
    anti1 = v + np.einsum("bacd->abcd", v)
    anti2 = v + np.einsum("abdc->abcd", v)
    bianchi = v + np.einsum("acdb->abcd", v) + np.einsum("adbc->abcd", v)
    return SymmetryReport(
        pair=float(np.max(np.abs(pair))),
        antisym_first=float(np.max(np.abs(anti1))),
        antisym_last=float(np.max(np.abs(anti2))),
        bianchi=float(np.max(np.abs(bianchi))),
        abs_tol=tol.abs_tol,
    )


def sectional_curvature(F: CurvatureTensor, x, y, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """K(x, y) = F(x, y, x, y) / (g(x,x) g(y,y) - g(x,y)^2)."""
    g = F.frame.inner
    delta = g(x, x) * g(y, y) - g(x, y) ** 2
    if abs(delta) <= tol.abs_tol:
        raise DegeneratePlane(f"plane is degenerate (Delta = {delta:.3e})")
    return F(x, y, x, y) / delta


def char_poly(A) -> Polynomial:
    """Coefficients of det(A - lambda I), ascending in lambda.

    Faddeev-LeVerrier recursion; exact in exact arithmetic and well behaved
    for the small (dim <= 20) matrices used here.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise StructuralError(f"char_poly needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    # c[k] is the coefficient of lambda^(n-k) in det(lambda I - A)
    c = np.zeros(n + 1)
    c[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + c[k - 1] * eye
        c[k] = -np.trace(A @ M) / k
    ascending = c[::-1] * (-1.0) ** n
    return Polynomial(ascending)


@dataclass(frozen=True)
class SpectrumReport:
    """Clustered eigenvalues with multiplicities, ascending."""

    pairs: tuple[tuple[float, int], ...]
    cluster_gap: float
    source: str = ""

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.pairs)

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(v for v, _ in self.pairs)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(m for _, m in self.pairs)

    def deviation(self, other: "SpectrumReport") -> float:
        """Largest eigenvalue distance if the cluster structures match, else inf."""
        if self.multiplicities != other.multiplicities:
            return float("inf")
        if not self.pairs:
            return 0.0
        return float(max(abs(a - b) for a, b in zip(self.eigenvalues, other.eigenvalues)))

    def agrees_with(self, other: "SpectrumReport", gap: float | None = None) -> bool:
        return self.deviation(other) <= (self.cluster_gap if gap is None else gap)

    def matches(self, expected: Sequence[tuple[float, int]], gap: float | None = None) -> bool:
        """Compare against a (value, multiplicity) list; zero multiplicities are dropped
        and coinciding values are merged."""
        merged: dict[float, int] = {}
        for value, mult in expected:
            if mult <= 0:
                continue
            key = next((k for k in merged if abs(k - value) <= self.cluster_gap), value)
            merged[key] = merged.get(key, 0) + mult
        ref = SpectrumReport(tuple(sorted(merged.items())), self.cluster_gap)
        return self.agrees_with(ref, gap)

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "pairs": [[float(v), int(m)] for v, m in self.pairs],
        }


def cluster_eigenvalues(values, cluster_gap: float, source: str = "") -> SpectrumReport:
    """Sort, then merge neighbours closer than ``cluster_gap``; each cluster is
    represented by its mean."""
    vals = np.sort(np.asarray(values, dtype=float).ravel())
    pairs: list[tuple[float, int]] = []
    if vals.size:
        groups = [[vals[0]]]
        for v in vals[1:]:
            if v - groups[-1][-1] < cluster_gap:
                groups[-1].append(v)
            else:
                groups.append([v])
        pairs = [(float(np.mean(g)), len(g)) for g in groups]
    return SpectrumReport(tuple(pairs), cluster_gap, source)


def eigen_spectrum(A, tol: TolerancePolicy = DEFAULT_TOL, source: str = "") -> SpectrumReport:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise StructuralError(f"expected a square matrix, got shape {A.shape}")
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym >= tol.abs_tol:
        raise SymmetryError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
    if A.size == 0:
        return SpectrumReport((), tol.cluster_gap, source)
    return cluster_eigenvalues(np.linalg.eigvalsh((A + A.T) / 2), tol.cluster_gap, source)


def general_spectrum(A, tol: TolerancePolicy = DEFAULT_TOL, source: str = "") -> SpectrumReport:
    """Clustered spectrum of a real matrix with real eigenvalues that need not
    be symmetric (Jacobi operators on Lorentzian complements).

    Nilpotent blocks split eigenvalues by about sqrt(eps), well below the
    default cluster gap.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return SpectrumReport((), tol.cluster_gap, source)
    ev = np.linalg.eigvals(A)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.max(np.abs(ev.imag)) > tol.cluster_gap * scale:
        raise PreconditionError("operator has non-real eigenvalues")
    return cluster_eigenvalues(ev.real, tol.cluster_gap, source)


def orthonormalize(
    frame: MetricFrame,
    candidates,
    *,
    count: int | None = None,
    tol: float = 1e-10,
) -> tuple[np.ndarray, np.ndarray]:
    """Gram-Schmidt for the (possibly indefinite) metric of ``frame``.

    Candidates are processed in order; those that become zero are skipped.
    A nonzero null residual cannot be normalized and raises.  Returns
    ``(basis, signs)`` with basis vectors as rows.
    """
    basis: list[np.ndarray] = []
    signs: list[float] = []
    for c in np.atleast_2d(np.asarray(candidates, dtype=float)):
        r = c.copy()
        # two passes keep the residual orthogonal to working precision
        for _ in range(2):
            for b, s in zip(basis, signs):
                r = r - s * frame.inner(r, b) * b
        scale = max(1.0, float(np.linalg.norm(c)))
        if np.linalg.norm(r) <= tol * scale:
            continue
        q = frame.inner(r, r)
        if abs(q) <= tol * scale**2:
            raise StructuralError("Gram-Schmidt hit a null residual; reorder candidates")
        basis.append(r / np.sqrt(abs(q)))
        signs.append(float(np.sign(q)))
        if count is not None and len(basis) == count:
            break
    if count is not None and len(basis) < count:
        raise StructuralError(f"candidates span only {len(basis)} of {count} required directions")
    return np.array(basis).reshape(len(basis), frame.dim), np.array(signs)


def tensor_from_endomorphism(
    frame: MetricFrame, endomorphism: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
) -> CurvatureTensor:
    """4-tensor F(a, b, c, d) = g(R(c, d) b, a) of a (1,3) map ``R(x, y) z``.

    ``endomorphism`` must broadcast over leading axes.
    """
    d = frame.dim
    e = np.eye(d)
    x = np.broadcast_to(e[:, None, None, :], (d, d, d, d))
    y = np.broadcast_to(e[None, :, None, :], (d, d, d, d))
    z = np.broadcast_to(e[None, None, :, :], (d, d, d, d))
    R = endomorphism(x, y, z)  # R[c, d, b, :] = R(e_c, e_d) e_b
    # F[a, b, c, d] = g(R(e_c, e_d) e_b, e_a) = sign_a * R[c, d, b, a]
    values = np.einsum("cdba,a->abcd", R, frame.sign_vector)
    return CurvatureTensor(frame, values)


def endomorphism_from_tensor(F: CurvatureTensor) -> np.ndarray:
    """Inverse of :func:`tensor_from_endomorphism`: array ``R[c, d, b, :]`` with
    ``R[c, d, b]`` the frame components of R(e_c, e_d) e_b."""
    return np.einsum("abcd,a->cdba", F.values, F.frame.sign_vector)


def kulkarni_nomizu(frame: MetricFrame, h, k) -> CurvatureTensor:
    """(h . k)(x,y,z,w) = h(x,z)k(y,w) + h(y,w)k(x,z) - h(x,w)k(y,z) - h(y,z)k(x,w).

    Curvature-like whenever ``h`` and ``k`` are symmetric bilinear forms.
    """
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    values = (
        np.einsum("ac,bd->abcd", h, k)
        + np.einsum("bd,ac->abcd", h, k)
        - np.einsum("ad,bc->abcd", h, k)
        - np.einsum("bc,ad->abcd", h, k)
    )
    return CurvatureTensor(frame, values)
