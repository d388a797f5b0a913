"""Dense complex linear algebra used by every inequality check.

Matrices are ``numpy.ndarray`` values of dtype ``complex128``. The spectral
work is done by the Jacobi kernels in :mod:`blocknorm._kernels`; numpy is
used for storage, products and elementwise arithmetic only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    NoConvergence,
    NonFinite,
    NonPositiveInput,
    NotHermitian,
    NotPositiveDefinite,
    NotPsd,
    NotSquare,
    NotUnitary,
    WrongDimension,
)

MAX_SWEEPS = 64
DEFAULT_SWEEP_TOL = 1e-14
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ToleranceConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    indeterminate_band: float = 1e-8

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "indeterminate_band"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value!r}")

    def bound(self, scale: float) -> float:
        """Absolute-plus-relative slack at magnitude ``scale``."""
        return self.abs_tol + self.rel_tol * scale


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in descending order with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def max(self) -> float:
        return float(self.values[0])

    @property
    def min(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class PolarPair:
    """Left polar factors ``x = d @ u``."""

    d: np.ndarray
    u: np.ndarray


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} has non-finite entries")
    return arr


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def fro(m: np.ndarray) -> float:
    return float(np.sqrt(np.sum(m.real**2 + m.imag**2)))


def _square(m, name="matrix") -> np.ndarray:
    arr = as_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise NotSquare(f"{name} must be square, got shape {arr.shape}")
    return arr


def hermitian_part(m, tol: ToleranceConfig = DEFAULT_TOL, name="matrix") -> np.ndarray:
    """Return ``(m + m*)/2`` after checking ``m`` is Hermitian within tolerance."""
    arr = _square(m, name)
    skew = fro(arr - adjoint(arr))
    if skew > tol.bound(fro(arr)):
        raise NotHermitian(f"{name} is not Hermitian (||m - m*||_F = {skew:.3e})")
    return 0.5 * (arr + adjoint(arr))


def herm_eigen(
    m,
    tol: ToleranceConfig = DEFAULT_TOL,
    sweep_tol: float = DEFAULT_SWEEP_TOL,
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Ties keep their original (lowest index first) order.
    """
    h = hermitian_part(m, tol)
    w, v, sweeps = _kernels.jacobi_eigh(np.ascontiguousarray(h), sweep_tol, MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(values=w[order], vectors=v[:, order])


def _is_exactly_hermitian(m: np.ndarray) -> bool:
    return m.shape[0] == m.shape[1] and fro(m - adjoint(m)) <= 4 * _EPS * fro(m)


def operator_norm(m, sweep_tol: float = DEFAULT_SWEEP_TOL) -> float:
    """Largest singular value: the square root of the top eigenvalue of m*m."""
    arr = as_matrix(m)
    if _is_exactly_hermitian(arr):
        eig = herm_eigen(arr, sweep_tol=sweep_tol)
        return max(abs(eig.max), abs(eig.min))
    gram = adjoint(arr) @ arr if arr.shape[1] <= arr.shape[0] else arr @ adjoint(arr)
    top = herm_eigen(gram, sweep_tol=sweep_tol).max
    return math.sqrt(max(top, 0.0))


def two_by_two_norm(a: float, c: float) -> float:
    """Closed-form norm of ``[[a, 1], [1, c]]`` for positive ``a`` and ``c``."""
    if not (a > 0 and c > 0):
        raise NonPositiveInput(f"a and c must be positive, got a={a!r}, c={c!r}")
    return (a + c + math.sqrt((a - c) ** 2 + 4.0)) / 2.0


def psd_threshold(m: np.ndarray, tol: ToleranceConfig, eig: EigenDecomposition) -> float:
    scale = max(abs(eig.max), abs(eig.min))
    return tol.bound(scale)


def is_psd(m, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    eig = herm_eigen(m, tol)
    return eig.min >= -psd_threshold(m, tol, eig)


def min_eigenvalue(m, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    return herm_eigen(m, tol).min


def pd_inverse(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    eig = herm_eigen(m, tol)
    if eig.min <= tol.abs_tol:
        raise NotPositiveDefinite(f"minimal eigenvalue {eig.min:.3e} is not above {tol.abs_tol:.1e}")
    v = eig.vectors
    inv = (v / eig.values) @ adjoint(v)
    return 0.5 * (inv + adjoint(inv))


def _spectral_function(m, tol, fn, name) -> np.ndarray:
    eig = herm_eigen(m, tol)
    floor = psd_threshold(m, tol, eig)
    if eig.min < -floor:
        raise NotPsd(f"{name}: eigenvalue {eig.min:.3e} below -{floor:.1e}")
    values = np.clip(eig.values, 0.0, None)
    v = eig.vectors
    out = (v * fn(values)) @ adjoint(v)
    return 0.5 * (out + adjoint(out))


def psd_sqrt(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    return _spectral_function(m, tol, np.sqrt, "psd_sqrt")


def pd_inverse_sqrt(m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    eig = herm_eigen(m, tol)
    if eig.min <= tol.abs_tol:
        raise NotPositiveDefinite(f"minimal eigenvalue {eig.min:.3e} is not above {tol.abs_tol:.1e}")
    v = eig.vectors
    out = (v / np.sqrt(eig.values)) @ adjoint(v)
    return 0.5 * (out + adjoint(out))


def _complement_basis(q: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of span(q)^perp, grown greedily from e_1, ..., e_n."""
    basis = [q[:, j] for j in range(q.shape[1])]
    extra = []
    # a residual of at least 1/sqrt(n) always exists until the basis is full
    accept = 0.5 / math.sqrt(n)
    for k in range(n):
        if len(basis) == n:
            break
        vec = np.zeros(n, dtype=np.complex128)
        vec[k] = 1.0
        for _ in range(2):
            for b in basis:
                vec = vec - b * np.vdot(b, vec)
        norm = np.linalg.norm(vec)
        if norm > accept:
            vec = vec / norm
            basis.append(vec)
            extra.append(vec)
    if not extra:
        return np.zeros((n, 0), dtype=np.complex128)
    return np.stack(extra, axis=1)


def polar_left(x, tol: ToleranceConfig = DEFAULT_TOL) -> PolarPair:
    """Left polar decomposition ``x = d u`` with ``d = (x x*)^(1/2)``.

    On the null space of ``d`` the unitary factor maps the Gram-Schmidt
    completion of the standard basis against the row space onto the one
    against the column space, so ``x = 0`` gives ``u = I``.
    """
    arr = _square(x, "x")
    n = arr.shape[0]
    xv, v, sweeps = _kernels.one_sided_jacobi(np.ascontiguousarray(arr), 4 * _EPS, MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(f"one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")
    sigma = np.sqrt(np.sum(xv.real**2 + xv.imag**2, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma, xv, v = sigma[order], xv[:, order], v[:, order]
    rank_floor = n * _EPS * sigma[0]
    big = sigma > max(rank_floor, np.finfo(float).tiny)
    w = xv[:, big] / sigma[big]
    vb = v[:, big]
    d = (w * sigma[big]) @ adjoint(w)
    d = 0.5 * (d + adjoint(d))
    u = w @ adjoint(vb)
    if not np.all(big):
        u = u + _complement_basis(w, n) @ adjoint(_complement_basis(vb, n))
    return PolarPair(d=d, u=u)


def unitarity_defect(u) -> float:
    arr = _square(u, "u")
    return operator_norm(adjoint(arr) @ arr - np.eye(arr.shape[0]))


def check_unitary(u, tol: ToleranceConfig = DEFAULT_TOL, name="u") -> np.ndarray:
    arr = _square(u, name)
    defect = fro(adjoint(arr) @ arr - np.eye(arr.shape[0]))
    if defect > tol.bound(arr.shape[0]):
        raise NotUnitary(f"{name} is not unitary (||u*u - I||_F = {defect:.3e})")
    return arr


def commutator_defect(x) -> float:
    """``||x x* - x* x||``; zero exactly for normal ``x``."""
    arr = _square(x, "x")
    return operator_norm(arr @ adjoint(arr) - adjoint(arr) @ arr)


def is_line_segment_range(x, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether the numerical range of a 2x2 matrix is a line segment.

    For 2x2 matrices this is exactly normality.
    """
    arr = as_matrix(x, "x")
    if arr.shape != (2, 2):
        raise WrongDimension(f"only 2x2 matrices are supported, got {arr.shape}")
    scale = operator_norm(arr) ** 2
    return commutator_defect(arr) <= tol.bound(scale)
