"""Seeded instance generators and the randomized violation search."""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .blockineq import (
    K_MAX,
    ProblemInstance,
    Trichotomy,
    Violation,
    ViolationCertificate,
    certify,
    classify_trichotomy,
    feasible_b,
    gap,
    make_instance,
    minimal_b_sides,
    peel_falsify,
    rotation_gap,
    schur_slack,
)
from .errors import BlockNormError, EigenvalueCollision, InvalidConfig
from .matcore import DEFAULT_TOL, ToleranceConfig, adjoint, herm_eigen, operator_norm, psd_sqrt

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed & _MASK64, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(seq))


RngLike = Union[np.random.Generator, RngStream]


def _gen(rng: RngLike) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def _ginibre(n: int, g: np.random.Generator, cols: Optional[int] = None) -> np.ndarray:
    cols = n if cols is None else cols
    return (g.standard_normal((n, cols)) + 1j * g.standard_normal((n, cols))) / math.sqrt(2.0)


def random_unitary(n: int, rng: RngLike) -> np.ndarray:
    """Haar unitary: QR of a complex Gaussian with the R diagonal made positive."""
    g = _gen(rng)
    q, r = np.linalg.qr(_ginibre(n, g))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_pd(n: int, cond_cap: float, rng: RngLike) -> np.ndarray:
    """Hermitian PD matrix with spectrum uniform in ``[cap^-1/2, cap^1/2]``."""
    if not cond_cap > 1:
        raise InvalidConfig(f"cond_cap must exceed 1, got {cond_cap!r}")
    g = _gen(rng)
    root = math.sqrt(cond_cap)
    w = g.uniform(1.0 / root, root, size=n)
    v = random_unitary(n, g)
    a = (v * w) @ adjoint(v)
    return 0.5 * (a + adjoint(a))


def random_normal_matrix(n: int, rng: RngLike) -> np.ndarray:
    g = _gen(rng)
    lam = g.standard_normal(n) + 1j * g.standard_normal(n)
    v = random_unitary(n, g)
    return (v * lam) @ adjoint(v)


def random_psd_slack(n: int, g: np.random.Generator, lo: float = 1e-6, hi: float = 10.0) -> np.ndarray:
    """``s W W* / ||W W*||`` with ``s`` log-uniform on ``[lo, hi]``."""
    w = _ginibre(n, g)
    ww = w @ adjoint(w)
    ww = 0.5 * (ww + adjoint(ww))
    s = math.exp(g.uniform(math.log(lo), math.log(hi)))
    return s * ww / operator_norm(ww)


def random_x(n: int, kind: str, g: np.random.Generator) -> np.ndarray:
    if kind == "gaussian":
        return _ginibre(n, g)
    if kind == "hermitian":
        z = _ginibre(n, g)
        return 0.5 * (z + adjoint(z))
    if kind == "normal":
        return random_normal_matrix(n, g)
    raise InvalidConfig(f"unknown x kind {kind!r}")


class Mode(enum.Enum):
    PROBLEM1 = "problem1"
    PROBLEM2 = "problem2"
    PROBLEM5 = "problem5"


X_KINDS = ("gaussian", "hermitian", "normal")


@dataclass(frozen=True)
class SearchConfig:
    """Search parameters.

    ``problem1`` draws ``(A, X, B)`` with random PSD slack, ``problem2`` uses
    the minimal ``B = X* A^-1 X``, and ``problem5`` draws ``X = D U`` with a
    distinct positive diagonal ``D`` and Haar ``U`` and runs the peeling
    falsifier on it.
    """

    mode: Mode
    dim: int
    trials: int
    seed: int
    hill_climb_steps: int = 50
    condition_cap: float = 1e4
    x_kind: str = "gaussian"
    k_max: float = K_MAX
    workers: int = 1
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        if not isinstance(self.mode, Mode):
            try:
                object.__setattr__(self, "mode", Mode(self.mode))
            except ValueError as exc:
                raise InvalidConfig(f"unknown mode {self.mode!r}") from exc
        if self.dim < 2:
            raise InvalidConfig(f"dim must be at least 2, got {self.dim}")
        if self.trials < 0:
            raise InvalidConfig(f"trials must be nonnegative, got {self.trials}")
        if self.hill_climb_steps < 0:
            raise InvalidConfig("hill_climb_steps must be nonnegative")
        if not self.condition_cap > 1:
            raise InvalidConfig("condition_cap must exceed 1")
        if self.x_kind not in X_KINDS:
            raise InvalidConfig(f"x_kind must be one of {X_KINDS}")
        if not self.k_max >= 1:
            raise InvalidConfig("k_max must be at least 1")
        if self.workers < 1:
            raise InvalidConfig("workers must be at least 1")

    def echo(self) -> dict:
        return {
            "mode": self.mode.value,
            "dim": self.dim,
            "trials": self.trials,
            "seed": self.seed,
            "hill_climb_steps": self.hill_climb_steps,
            "condition_cap": self.condition_cap,
            "x_kind": self.x_kind,
            "k_max": self.k_max,
        }


@dataclass
class SearchReport:
    config: SearchConfig
    best_gap: Optional[float]
    best_instance: Optional[ProblemInstance]
    trichotomy_counts: dict
    violations: list = field(default_factory=list)
    alpha_greater_violations: int = 0
    elapsed: float = 0.0


@dataclass
class TrialResult:
    index: int
    classification: Trichotomy
    gap: float
    instance: ProblemInstance
    certificate: Optional[ViolationCertificate]


def hill_climb(
    inst: ProblemInstance,
    steps: int,
    rng: RngLike,
    *,
    vary_slack: bool = True,
    cond_cap: Optional[float] = None,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> ProblemInstance:
    """Accept-if-better Gaussian perturbation of ``(A, X, slack)``.

    The slack is kept as ``W W*`` so every proposal is feasible by
    construction. The returned instance's gap is at least the input's.
    """
    if steps <= 0:
        return inst
    g = _gen(rng)
    n = inst.n
    a, x = inst.a, inst.x
    w = psd_sqrt(schur_slack(a, x, inst.b, tol), tol) if vary_slack else None
    best = gap(inst)
    scale = 0.1 * operator_norm(inst.h)
    floor = 1e-8
    current = inst
    for _ in range(steps):
        da = _ginibre(n, g)
        a_new = a + scale * 0.5 * (da + adjoint(da))
        x_new = x + scale * _ginibre(n, g)
        w_new = w + scale * _ginibre(n, g) if vary_slack else None
        eig = herm_eigen(a_new, tol)
        if eig.min <= tol.abs_tol or (cond_cap is not None and eig.max / eig.min > cond_cap):
            scale = max(scale * 0.95, floor)
            continue
        extra = None if w_new is None else w_new @ adjoint(w_new)
        try:
            cand = make_instance(a_new, x_new, feasible_b(a_new, x_new, extra, tol), tol)
        except BlockNormError:
            scale = max(scale * 0.95, floor)
            continue
        g_new = gap(cand)
        if g_new > best:
            best, current = g_new, cand
            a, x, w = a_new, x_new, w_new
        else:
            scale = max(scale * 0.95, floor)
    return current


def planted_problem5(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Known non-normal ``X = D U`` whose rotation gap is 1.

    For ``n >= 3`` it is ``diag(2, 3, 1)`` times the cyclic shift, padded by
    ``diag(1/2, 1/4, ...)`` and the identity; for ``n = 2`` it is
    ``diag(2, 1)`` times the swap.
    """
    if n == 2:
        return np.diag([2.0, 1.0]).astype(np.complex128), np.array([[0, 1], [1, 0]], dtype=np.complex128)
    d = np.diag([2.0, 3.0, 1.0] + [2.0**-j for j in range(1, n - 2)]).astype(np.complex128)
    u = np.eye(n, dtype=np.complex128)
    u[:3, :3] = np.roll(np.eye(3), 1, axis=1)
    return d, u


def _distinct_diagonal(n: int, cap: float, g: np.random.Generator) -> np.ndarray:
    root = math.sqrt(cap)
    while True:
        w = np.sort(g.uniform(1.0 / root, root, size=n))
        if np.min(np.diff(w)) > 1e-3 * w[-1]:
            return w


def _finish(cfg: SearchConfig, index: int, cls, inst, g_val, g, vary_slack=True, cert=None) -> TrialResult:
    if g_val > 0:
        start = cert.instance if cert is not None else inst
        climbed = hill_climb(
            start, cfg.hill_climb_steps, g, vary_slack=vary_slack, cond_cap=cfg.condition_cap, tol=cfg.tol
        )
        new_cert = cert if climbed is start and cert is not None else certify(climbed, cfg.tol)
        if new_cert is not None and (cert is None or new_cert.gap >= cert.gap):
            cert = new_cert
        inst = climbed
        g_val = max(g_val, gap(climbed))
    if cert is not None:
        inst = cert.instance
        g_val = max(g_val, cert.gap)
    return TrialResult(index, cls, g_val, inst, cert)


def run_trial(cfg: SearchConfig, index: int) -> TrialResult:
    g = RngStream(cfg.seed, index).generator()
    n, tol = cfg.dim, cfg.tol
    if cfg.mode is Mode.PROBLEM5:
        if index == 0:
            d, u = planted_problem5(n)
        else:
            d = np.diag(_distinct_diagonal(n, cfg.condition_cap, g)).astype(np.complex128)
            u = random_unitary(n, g)
        x = d @ u
        cls = classify_trichotomy(d, x, tol)
        inst = make_instance(d, x, feasible_b(d, x, tol=tol), tol)
        cert = None
        try:
            outcome = peel_falsify(x, tol, k_max=cfg.k_max)
        except EigenvalueCollision:
            outcome = None
        if isinstance(outcome, Violation):
            cert = outcome.certificate
        return _finish(cfg, index, cls, inst, rotation_gap(d, u, tol), g, cert=cert)

    a = random_pd(n, cfg.condition_cap, g)
    x = random_x(n, cfg.x_kind, g)
    cls = classify_trichotomy(a, x, tol)
    if cfg.mode is Mode.PROBLEM2:
        lhs, rhs = minimal_b_sides(a, x, tol)
        inst = make_instance(a, x, feasible_b(a, x, tol=tol), tol)
        return _finish(cfg, index, cls, inst, lhs - rhs, g, vary_slack=False)
    b = feasible_b(a, x, random_psd_slack(n, g), tol)
    inst = make_instance(a, x, b, tol)
    return _finish(cfg, index, cls, inst, gap(inst), g)


def _run_chunk(args):
    cfg, indices = args
    return [run_trial(cfg, i) for i in indices]


def search(cfg: SearchConfig) -> SearchReport:
    """Run ``cfg.trials`` independent trials; the reduction is by trial index,
    so the report does not depend on ``cfg.workers``.
    """
    start = time.perf_counter()
    indices = list(range(cfg.trials))
    if cfg.workers > 1 and cfg.trials > 1:
        chunks = [indices[i :: cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_chunk, [(cfg, c) for c in chunks if c]))
        results = sorted((r for part in parts for r in part), key=lambda r: r.index)
    else:
        results = [run_trial(cfg, i) for i in indices]

    counts = {t.value: 0 for t in Trichotomy}
    best_gap, best_inst = None, None
    violations = []
    alpha_bad = 0
    for r in results:
        counts[r.classification.value] += 1
        if best_gap is None or r.gap > best_gap:
            best_gap, best_inst = r.gap, r.instance
        if r.certificate is not None:
            violations.append(r.certificate)
            c = r.certificate.instance
            if classify_trichotomy(c.a, c.x, cfg.tol) is Trichotomy.ALPHA_GREATER:
                alpha_bad += 1
    return SearchReport(
        config=cfg,
        best_gap=best_gap,
        best_instance=best_inst,
        trichotomy_counts=counts,
        violations=violations,
        alpha_greater_violations=alpha_bad,
        elapsed=time.perf_counter() - start,
    )
