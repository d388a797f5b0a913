"""Evaluable forms of the block-matrix norm inequality and the constructions around it.

The central quantity is the gap ``||[[A, X], [X*, B]]|| - ||A + B||`` of a
triple ``(A, X, B)`` with ``A > 0``. A positive gap on a feasible triple
(``B >= X* A^-1 X``) is a violation of the inequality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    DpZero,
    EigenvalueCollision,
    HypothesisNotMet,
    NotCommuting,
    NotPositiveDefinite,
    NotProjection,
    NotPsd,
    NumericalDegeneracy,
)
from .matcore import (
    DEFAULT_TOL,
    ToleranceConfig,
    adjoint,
    as_matrix,
    check_unitary,
    commutator_defect,
    fro,
    hermitian_part,
    herm_eigen,
    is_psd,
    operator_norm,
    pd_inverse,
    pd_inverse_sqrt,
    polar_left,
    two_by_two_norm,
)

CERT_SWEEP_TOL = 1e-12
CERT_MARGIN = 1e-6
K_MAX = 2.0**20


def _sandwich(x: np.ndarray, a_inv: np.ndarray) -> np.ndarray:
    """``x* a_inv x``, symmetrized."""
    out = adjoint(x) @ a_inv @ x
    return 0.5 * (out + adjoint(out))


def _require_pd(a, tol: ToleranceConfig, name="a") -> np.ndarray:
    h = hermitian_part(a, tol, name)
    eig = herm_eigen(h, tol)
    if eig.min <= tol.abs_tol:
        raise NotPositiveDefinite(f"{name} is not positive definite (min eigenvalue {eig.min:.3e})")
    return h


def _require_psd(d, tol: ToleranceConfig, name="d") -> np.ndarray:
    h = hermitian_part(d, tol, name)
    if not is_psd(h, tol):
        raise NotPsd(f"{name} is not positive semidefinite")
    return h


@dataclass(frozen=True)
class ProblemInstance:
    """A triple ``(A, X, B)``; ``feasible`` records ``B >= X* A^-1 X``."""

    a: np.ndarray
    x: np.ndarray
    b: np.ndarray
    feasible: bool

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def h(self) -> np.ndarray:
        return assemble_block(self)


def make_instance(a, x, b, tol: ToleranceConfig = DEFAULT_TOL) -> ProblemInstance:
    a = _require_pd(as_matrix(a, "A"), tol, "A")
    x = as_matrix(x, "X")
    b = hermitian_part(as_matrix(b, "B"), tol, "B")
    n = a.shape[0]
    if x.shape != (n, n) or b.shape != (n, n):
        raise DimensionMismatch(f"A is {a.shape}, X is {x.shape}, B is {b.shape}")
    return ProblemInstance(a=a, x=x, b=b, feasible=schur_feasible(a, x, b, tol))


def assemble_block(inst: ProblemInstance) -> np.ndarray:
    a, x, b = inst.a, inst.x, inst.b
    n = a.shape[0]
    if x.shape != (n, n) or b.shape != (n, n):
        raise DimensionMismatch(f"A is {a.shape}, X is {x.shape}, B is {b.shape}")
    return np.block([[a, x], [adjoint(x), b]])


def schur_slack(a, x, b, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    a = _require_pd(a, tol, "A")
    return hermitian_part(b, tol, "B") - _sandwich(as_matrix(x, "X"), pd_inverse(a, tol))


def schur_feasible(a, x, b, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    return is_psd(schur_slack(a, x, b, tol), tol)


def gap(inst: ProblemInstance, sweep_tol: Optional[float] = None) -> float:
    """``||H|| - ||A + B||``; positive means the inequality fails."""
    kw = {} if sweep_tol is None else {"sweep_tol": sweep_tol}
    return operator_norm(assemble_block(inst), **kw) - operator_norm(inst.a + inst.b, **kw)


def feasible_b(a, x, slack=None, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """``X* A^-1 X + slack``: the smallest feasible B plus an optional PSD term."""
    b = _sandwich(as_matrix(x, "X"), pd_inverse(a, tol))
    if slack is not None:
        b = b + slack
    return b


def minimal_b_sides(a, x, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float]:
    """``(||A + A^-1/2 X X* A^-1/2||, ||A + X* A^-1 X||)``."""
    a = _require_pd(a, tol)
    x = as_matrix(x, "X")
    a_mhalf = pd_inverse_sqrt(a, tol)
    lhs_m = a + a_mhalf @ x @ adjoint(x) @ a_mhalf
    lhs = operator_norm(0.5 * (lhs_m + adjoint(lhs_m)))
    rhs = operator_norm(a + _sandwich(x, pd_inverse(a, tol)))
    return lhs, rhs


@dataclass(frozen=True)
class AlphaBeta:
    alpha: float
    beta: float


def alpha_beta(a, x, tol: ToleranceConfig = DEFAULT_TOL) -> AlphaBeta:
    a = _require_pd(a, tol)
    x = as_matrix(x, "X")
    a_inv = pd_inverse(a, tol)
    alpha = operator_norm(a + _sandwich(x, a_inv))
    beta = operator_norm(a + _sandwich(adjoint(x), a_inv))
    return AlphaBeta(alpha=alpha, beta=beta)


class Trichotomy(enum.Enum):
    ALPHA_GREATER = "alpha_greater"
    BETA_GREATER = "beta_greater"
    EQUAL_WITHIN_BAND = "equal_band"


def classify_trichotomy(a, x, tol: ToleranceConfig = DEFAULT_TOL) -> Trichotomy:
    """Which of the two block inequalities is guaranteed.

    ALPHA_GREATER guarantees ``||[[A, X], [X*, B]]|| <= ||A + B||`` for every
    feasible B; BETA_GREATER guarantees the mirrored arrangement
    ``||[[A, X*], [X, C]]|| <= ||A + C||`` for every ``C >= X A^-1 X*``;
    inside the band both are asserted.
    """
    ab = alpha_beta(a, x, tol)
    band = tol.indeterminate_band * max(ab.alpha, ab.beta)
    if ab.alpha - ab.beta > band:
        return Trichotomy.ALPHA_GREATER
    if ab.beta - ab.alpha > band:
        return Trichotomy.BETA_GREATER
    return Trichotomy.EQUAL_WITHIN_BAND


def mirrored(inst: ProblemInstance, c=None, tol: ToleranceConfig = DEFAULT_TOL) -> ProblemInstance:
    """The arrangement ``(A, X*, C)``; C defaults to ``X A^-1 X*``."""
    x_star = adjoint(inst.x)
    if c is None:
        c = feasible_b(inst.a, x_star, tol=tol)
    return make_instance(inst.a, x_star, c, tol)


@dataclass(frozen=True)
class ResolventWitness:
    """Top eigenpair of H split as ``(xi, eta)`` with the resolvent check.

    ``resolvent_residual`` is ``||(A + X (lam - B)^-1 X*) xi - lam xi||`` and
    ``beta`` is ``||A + X A^-1 X*||``, which must dominate ``lam``.
    """

    lam: float
    xi: np.ndarray
    eta: np.ndarray
    resolvent_residual: float
    beta: float
    sum_norm: float


def resolvent_witness(inst: ProblemInstance, tol: ToleranceConfig = DEFAULT_TOL) -> Optional[ResolventWitness]:
    h = assemble_block(inst)
    n = inst.n
    eig = herm_eigen(h, tol)
    lam = max(abs(eig.max), abs(eig.min))
    sum_norm = operator_norm(inst.a + inst.b)
    scale = max(1.0, sum_norm)
    excess = lam - sum_norm
    if excess <= tol.bound(scale):
        return None
    if excess <= tol.indeterminate_band * scale:
        raise NumericalDegeneracy(f"lambda - ||A+B|| = {excess:.3e} is inside the band")
    # ||H|| is the top eigenvalue since A, B > 0 keep lambda_min(H) >= -lambda_max(H)
    vec = eig.vectors[:, 0]
    xi, eta = vec[:n], vec[n:]
    for name, blk in (("lambda - A", inst.a), ("lambda - B", inst.b)):
        if herm_eigen(lam * np.eye(n) - blk, tol).min <= 0.0:
            raise NumericalDegeneracy(f"{name} is not positive definite")
    if np.linalg.norm(xi) <= tol.abs_tol:
        raise NumericalDegeneracy("upper block of the top eigenvector vanishes")
    res_b = pd_inverse(lam * np.eye(n) - inst.b, tol)
    resolvent = inst.a + inst.x @ res_b @ adjoint(inst.x)
    residual = float(np.linalg.norm(resolvent @ xi - lam * xi))
    beta = operator_norm(inst.a + _sandwich(adjoint(inst.x), pd_inverse(inst.a, tol)))
    return ResolventWitness(lam=lam, xi=xi, eta=eta, resolvent_residual=residual, beta=beta, sum_norm=sum_norm)


@dataclass(frozen=True)
class ViolationCertificate:
    instance: ProblemInstance
    block_norm: float
    sum_norm: float
    gap: float
    margin: float


def certification_margin(sum_norm: float) -> float:
    return CERT_MARGIN * max(1.0, sum_norm)


def certify(inst: ProblemInstance, tol: ToleranceConfig = DEFAULT_TOL) -> Optional[ViolationCertificate]:
    """Certificate for a feasible instance whose gap clears the margin.

    Norms are recomputed at the tight sweep threshold and feasibility is
    rechecked on the assembled block rather than trusted from ``inst``.
    """
    h = assemble_block(inst)
    if not (schur_feasible(inst.a, inst.x, inst.b, tol) and is_psd(h, tol)):
        return None
    block_norm = operator_norm(h, sweep_tol=CERT_SWEEP_TOL)
    sum_norm = operator_norm(inst.a + inst.b, sweep_tol=CERT_SWEEP_TOL)
    margin = certification_margin(sum_norm)
    g = block_norm - sum_norm
    if not g > margin:
        return None
    checked = ProblemInstance(a=inst.a, x=inst.x, b=inst.b, feasible=True)
    return ViolationCertificate(instance=checked, block_norm=block_norm, sum_norm=sum_norm, gap=g, margin=margin)


def verify_certificate(cert: ViolationCertificate, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    again = certify(cert.instance, tol)
    return again is not None and again.gap > cert.margin


@dataclass(frozen=True)
class InverseSumComparison:
    lhs: float
    rhs: float
    holds: bool
    endpoint_max: float


def compare_inverse_sums(a, u, tol: ToleranceConfig = DEFAULT_TOL) -> InverseSumComparison:
    """Compare ``||A + A^-1||`` with ``||A + U* A^-1 U||``.

    ``endpoint_max`` is ``max(l + 1/l, L + 1/L)`` over the extreme eigenvalues
    of A; it must equal ``lhs``.
    """
    a = _require_pd(a, tol)
    u = check_unitary(u, tol)
    a_inv = pd_inverse(a, tol)
    lhs = operator_norm(a + a_inv)
    rhs = operator_norm(a + _sandwich(u, a_inv))
    eig = herm_eigen(a, tol)
    lo, hi = eig.min, eig.max
    endpoint_max = max(lo + 1.0 / lo, hi + 1.0 / hi)
    return InverseSumComparison(lhs=lhs, rhs=rhs, holds=lhs <= rhs + tol.bound(rhs), endpoint_max=endpoint_max)


def both_arrangements_psd(inst: ProblemInstance, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Both ``[[A, X], [X*, B]]`` and ``[[A, X*], [X, B]]`` are PSD."""
    h1 = assemble_block(inst)
    h2 = np.block([[inst.a, adjoint(inst.x)], [inst.x, inst.b]])
    return is_psd(h1, tol) and is_psd(h2, tol)


def _cyclic_shift(n: int) -> np.ndarray:
    return np.roll(np.eye(n, dtype=np.complex128), 1, axis=1)


@dataclass(frozen=True)
class CommutingCounterexample:
    instance: ProblemInstance
    sum_norm: float
    block_lower_bound: float
    c: np.ndarray
    u: np.ndarray


def commuting_counterexample(tol: ToleranceConfig = DEFAULT_TOL) -> CommutingCounterexample:
    """The commuting 3x3 pair ``A = diag(1,2,3)``, ``C = diag(1,1/2,2)`` with
    the cyclic shift U, written as ``(A, X = U, B = U* C U)``.
    """
    a = np.diag([1.0, 2.0, 3.0]).astype(np.complex128)
    c = np.diag([1.0, 0.5, 2.0]).astype(np.complex128)
    u = _cyclic_shift(3)
    b = adjoint(u) @ c @ u
    inst = make_instance(a, u, b, tol)
    return CommutingCounterexample(
        instance=inst,
        sum_norm=operator_norm(a + b),
        # the (3, 2) diagonal pair isolates a 2x2 compression of [[A, 1], [1, C]]
        block_lower_bound=two_by_two_norm(3.0, 2.0),
        c=c,
        u=u,
    )


def rotation_gap(d, u, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """``2||D|| - ||D + U* D U||``; zero is necessary for normality of ``DU``."""
    d = _require_psd(as_matrix(d, "d"), tol)
    u = check_unitary(u, tol)
    rotated = adjoint(u) @ d @ u
    return 2.0 * operator_norm(d) - operator_norm(0.5 * (d + rotated + adjoint(d + rotated)))


def rotation_violation(d, u, tol: ToleranceConfig = DEFAULT_TOL) -> Optional[ViolationCertificate]:
    """Instance ``A = D, X = D U, B = U* D U`` when ``rotation_gap`` is positive.

    Its block norm is ``2||D||`` and its sum norm ``||D + U* D U||``.
    """
    d = _require_pd(as_matrix(d, "d"), tol, "d")
    u = check_unitary(u, tol)
    g = rotation_gap(d, u, tol)
    if g <= tol.bound(2.0 * operator_norm(d)):
        return None
    b = adjoint(u) @ d @ u
    inst = make_instance(d, d @ u, b, tol)
    return certify(inst, tol)


def common_top_vector(d, u, tol: ToleranceConfig = DEFAULT_TOL, p=None) -> Optional[np.ndarray]:
    """Unit ``xi`` with ``D xi = ||D|| xi`` and ``D U xi = ||D|| U xi``.

    With a projection ``p`` the search is restricted to ``range(p)`` by
    working with ``D p``. Returns None when ``||Dp + U* Dp U|| < 2||Dp||``.
    """
    d = hermitian_part(as_matrix(d, "d"), tol, "d")
    u = as_matrix(u, "u")
    dp = d if p is None else d @ p
    dp = 0.5 * (dp + adjoint(dp))
    top = operator_norm(dp)
    s = dp + adjoint(u) @ dp @ u
    eig = herm_eigen(0.5 * (s + adjoint(s)), tol)
    eq_tol = tol.bound(2.0 * top)
    if 2.0 * top - eig.max > eq_tol:
        return None
    xi = eig.vectors[:, 0]
    # near-maximality only controls the eigen-residuals to square-root order
    resid_tol = math.sqrt(2.0 * top * eq_tol) + tol.abs_tol
    r1 = np.linalg.norm(dp @ xi - top * xi)
    r2 = np.linalg.norm(dp @ (u @ xi) - top * (u @ xi))
    if r1 > resid_tol or r2 > resid_tol:
        return None
    return xi


def norm_additivity_scaled(a, b, s: float, t: float, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Check ``||s a + t b|| = s||a|| + t||b||`` for PSD a, b with additive norms."""
    a = _require_psd(as_matrix(a, "a"), tol, "a")
    b = _require_psd(as_matrix(b, "b"), tol, "b")
    if s < 0 or t < 0:
        raise ValueError("scalars must be nonnegative")
    na, nb = operator_norm(a), operator_norm(b)
    if operator_norm(a + b) < na + nb - tol.bound(na + nb):
        raise HypothesisNotMet("||a + b|| < ||a|| + ||b||")
    target = s * na + t * nb
    return abs(operator_norm(s * a + t * b) - target) <= tol.bound(target)


def _commute_tol(tol: ToleranceConfig) -> float:
    # peeled vectors are only accurate to square-root order of the band
    return math.sqrt(tol.indeterminate_band)


def _is_projection(q: np.ndarray, tol: ToleranceConfig) -> bool:
    return fro(q - adjoint(q)) <= tol.bound(fro(q)) and fro(q @ q - q) <= tol.bound(fro(q))


def compressed_instance(d, u, q, k: float, tol: ToleranceConfig = DEFAULT_TOL) -> ProblemInstance:
    """``A = k D p + q``, ``X = D U``, ``B = X* A^-1 X`` with ``p = I - q``."""
    d = as_matrix(d, "d")
    u = as_matrix(u, "u")
    q = as_matrix(q, "q")
    n = d.shape[0]
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    if not _is_projection(q, tol):
        raise NotProjection("q is not an orthogonal projection")
    scale = max(1.0, operator_norm(d))
    limit = _commute_tol(tol)
    if fro(d @ q - q @ d) > limit * scale or fro(u @ q - q @ u) > limit:
        raise NotCommuting("q does not commute with both d and u")
    p = np.eye(n) - q
    dp = d @ p
    dp = 0.5 * (dp + adjoint(dp))
    if operator_norm(dp) <= tol.bound(scale):
        raise DpZero("D p vanishes")
    a = k * dp + q
    x = d @ u
    return make_instance(a, x, feasible_b(a, x, tol=tol), tol)


@dataclass(frozen=True)
class Violation:
    certificate: ViolationCertificate
    stage: int
    k: float


@dataclass(frozen=True)
class NormalCertified:
    commutator_defect: float


@dataclass(frozen=True)
class Indeterminate:
    stage: int
    margin_shortfall: float
    reason: str = ""


FalsifyOutcome = Union[Violation, NormalCertified, Indeterminate]


def _k_schedule(k_max: float):
    k = 1.0
    while k <= k_max:
        yield k
        k *= 2.0


def _search_k(d, u, q, k_max, tol, stage) -> FalsifyOutcome:
    best = -math.inf
    for k in _k_schedule(k_max):
        try:
            inst = compressed_instance(d, u, q, k, tol)
        except NotPositiveDefinite:
            return Indeterminate(stage, math.inf, "k D p + q is singular")
        except NotCommuting:
            return Indeterminate(stage, math.inf, "peeled projection does not commute")
        cert = certify(inst, tol)
        if cert is not None:
            return Violation(cert, stage, k)
        g = gap(inst, sweep_tol=CERT_SWEEP_TOL)
        best = max(best, g - certification_margin(operator_norm(inst.a + inst.b)))
    return Indeterminate(stage, -best, f"no k <= {k_max:g} certifies")


def peel_falsify(x, tol: ToleranceConfig = DEFAULT_TOL, k_max: float = K_MAX) -> FalsifyOutcome:
    """Either certify that ``X = D U`` is normal or produce a violating instance.

    Walks down the (distinct) eigenvalues of ``D = (X X*)^(1/2)``. At each
    stage the compressed pair must satisfy ``||Dp + U* Dp U|| = 2||Dp||``;
    a strict failure is turned into a certified violation through
    ``A = k D p + q``, success peels off a common eigenvector of D and U.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    polar = polar_left(x, tol)
    d, u = polar.d, polar.u
    eig_d = herm_eigen(d, tol)
    d_norm = max(eig_d.max, 0.0)
    spacing = -np.diff(eig_d.values)
    if n > 1 and np.min(spacing) <= tol.indeterminate_band * max(1.0, d_norm):
        raise EigenvalueCollision(f"eigenvalues of D are not distinct (min spacing {abs(np.min(spacing)):.3e})")

    q = np.zeros((n, n), dtype=np.complex128)
    for stage in range(n):
        p = np.eye(n) - q
        dp = 0.5 * (d @ p + adjoint(d @ p))
        dp_norm = operator_norm(dp)
        eq_tol = tol.bound(2.0 * d_norm)
        if dp_norm <= eq_tol:
            # only the kernel of D is left; p is rank one
            xi = eig_d.vectors[:, stage]
        else:
            s = dp + adjoint(u) @ dp @ u
            shortfall = 2.0 * dp_norm - operator_norm(0.5 * (s + adjoint(s)))
            if shortfall > max(eq_tol, tol.indeterminate_band * max(1.0, d_norm)):
                return _search_k(d, u, q, k_max, tol, stage)
            if shortfall > eq_tol:
                return Indeterminate(stage, shortfall, "norm equality inside the band")
            xi = common_top_vector(d, u, tol, p=p)
            if xi is None:
                return Indeterminate(stage, shortfall, "no common eigenvector extracted")
        xi = p @ xi
        xi = xi / np.linalg.norm(xi)
        q_new = np.outer(xi, xi.conj())
        comm = max(fro(u @ q_new - q_new @ u), fro(d @ q_new - q_new @ d) / max(1.0, d_norm))
        if comm > _commute_tol(tol):
            return Indeterminate(stage, comm, "peeled projection does not commute with U")
        q = q + q_new

    defect = commutator_defect(x)
    x_norm = operator_norm(x)
    if defect <= tol.indeterminate_band * x_norm**2:
        return NormalCertified(defect)
    return Indeterminate(n, defect, "commutator defect above tolerance after peeling")
