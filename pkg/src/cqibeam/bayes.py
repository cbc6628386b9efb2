"""Tuning-free choice of the ridge weight by evidence maximization.

With the phase rotations frozen at a reference beam, the magnitude
fitting problem becomes linear regression y ~ Phi w with y = sqrt(cqi)
and design rows e^{j phi_t} v_t^H Q_eff(t)^H. Placing a zero-mean
isotropic Gaussian prior with precision alpha on w and Gaussian noise
with precision beta on y makes the ridge weight lam = alpha / beta; both
precisions are learned by iterating the standard evidence fixed point

    gamma = sum_i mu_i / (alpha + mu_i),   mu_i = beta * eig(Phi^H Phi)
    alpha <- gamma / (m^H m)
    1/beta <- ||y - Phi m||^2 / (T - gamma)

where m is the posterior mean. The eigendecomposition of Phi^H Phi is
computed once per call; everything inside the loop is O(N).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .am import DEGENERATE_PHASE_TOL, resolve_rows
from .errors import NumericalError

__all__ = [
    "EvidenceProblem",
    "HyperParams",
    "TunerConfig",
    "TunedLambda",
    "build_design",
    "posterior_mean",
    "log_evidence",
    "fixed_point",
    "tune_lambda",
]

CLAMP_LO = 1e-8
CLAMP_HI = 1e8


@dataclass(frozen=True)
class EvidenceProblem:
    """Phase-resolved regression instance.

    Attributes:
        design: (T, N) complex matrix Phi.
        targets: (T,) nonnegative reals y = sqrt(cqi).
        reference_w: beam used to freeze the phase rotations.
    """

    design: np.ndarray
    targets: np.ndarray
    reference_w: np.ndarray

    def __post_init__(self):
        if self.design.ndim != 2:
            raise ValueError("design must be a matrix")
        if self.targets.shape != (self.design.shape[0],):
            raise ValueError("one target per design row required")
        if np.any(self.targets < 0):
            raise ValueError("targets must be nonnegative")

    @property
    def n_rounds(self) -> int:
        return self.design.shape[0]

    @property
    def dim(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class HyperParams:
    """Learned precisions and the induced ridge weight lam = alpha/beta.

    gamma_eff is the effective number of well-determined directions at
    the returned point; `clamped` marks runs where alpha or beta hit the
    [1e-8, 1e8] guard rails (callers fall back to a default lam).
    """

    alpha: float
    beta: float
    lam: float
    gamma_eff: float
    iterations: int
    converged: bool
    clamped: bool

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("precisions must be positive")
        if abs(self.lam - self.alpha / self.beta) > 1e-12 * self.lam:
            raise ValueError("lam must equal alpha/beta")


@dataclass(frozen=True)
class TunerConfig:
    """How to pick lam: evidence fixed point or a fixed value."""

    mode: str = "auto"
    fixed_lam: float = 1.0
    alpha0: float = 1.0
    beta0: float = 1.0
    tol: float = 1e-6
    max_iter: int = 200
    fallback_lam: float = 1.0

    def __post_init__(self):
        if self.mode not in ("auto", "fixed"):
            raise ValueError(f"unknown tuner mode: {self.mode!r}")
        if min(self.fixed_lam, self.alpha0, self.beta0,
               self.fallback_lam) <= 0:
            raise ValueError("tuner parameters must be positive")


@dataclass(frozen=True)
class TunedLambda:
    """Tuner outcome; `fallback` marks a defaulted lam (failed/clamped)."""

    lam: float
    hyper: HyperParams | None
    fallback: bool


def build_design(records, effective_pilots, reference_w,
                 layer: int = 0, targets=None) -> EvidenceProblem:
    """Freeze phases against reference_w and assemble (Phi, y).

    Row t is e^{j phi_t} v_t^H Q_eff(t)^H with e^{j phi_t} the optimal
    rotation for reference_w, so Phi @ reference_w is entrywise real
    nonnegative. `targets` overrides the per-record CQI values.
    """
    reference_w = np.asarray(reference_w, dtype=complex)
    if np.linalg.norm(reference_w) == 0:
        raise ValueError("reference_w must be nonzero")
    rows = resolve_rows(records, effective_pilots, layer)
    a = rows @ reference_w
    mag = np.abs(a)
    safe = np.where(mag < DEGENERATE_PHASE_TOL, 1.0, mag)
    phases = np.where(mag < DEGENERATE_PHASE_TOL, 1.0 + 0j, a.conj() / safe)
    if targets is None:
        targets = [rec.cqi for rec in records]
    targets = np.asarray(targets, dtype=float)
    if np.any(targets < 0):
        raise ValueError("CQI targets must be nonnegative")
    return EvidenceProblem(design=phases[:, None] * rows,
                           targets=np.sqrt(targets),
                           reference_w=reference_w)


def posterior_mean(problem: EvidenceProblem, alpha: float,
                   beta: float) -> np.ndarray:
    """Solve (alpha I + beta Phi^H Phi) m = beta Phi^H y."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("precisions must be positive")
    phi = problem.design
    b = alpha * np.eye(problem.dim) + beta * (phi.conj().T @ phi)
    return np.linalg.solve(b, beta * (phi.conj().T @ problem.targets))


def log_evidence(problem: EvidenceProblem, alpha: float, beta: float) -> float:
    """Log marginal likelihood ln p(y | alpha, beta) at the posterior mode."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("precisions must be positive")
    phi = problem.design
    y = problem.targets
    t, n = phi.shape
    m = posterior_mean(problem, alpha, beta)
    resid = y - phi @ m
    energy = 0.5 * beta * np.vdot(resid, resid).real \
        + 0.5 * alpha * np.vdot(m, m).real
    b = alpha * np.eye(n) + beta * (phi.conj().T @ phi)
    _, logdet = np.linalg.slogdet(b)
    return float(0.5 * n * np.log(alpha) + 0.5 * t * np.log(beta)
                 - energy - 0.5 * logdet - 0.5 * t * np.log(2 * np.pi))


def _clamp(value: float) -> float:
    return min(max(value, CLAMP_LO), CLAMP_HI)


def fixed_point(problem: EvidenceProblem, alpha0: float = 1.0,
                beta0: float = 1.0, tol: float = 1e-6,
                max_iter: int = 200) -> HyperParams:
    """Iterate the gamma/alpha/beta updates to an evidence stationary point.

    Stops when both precisions move by less than `tol` relative. Raises
    NumericalError when T - gamma falls below 1e-6 (noise precision
    undetermined); callers then fall back to a default lam.
    """
    if alpha0 <= 0 or beta0 <= 0:
        raise ValueError("initial precisions must be positive")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter >= 1")
    t_rounds = problem.n_rounds
    if t_rounds < 2:
        raise ValueError("fixed point needs at least two rounds")

    phi = problem.design
    y = problem.targets
    gram = phi.conj().T @ phi
    evals, vecs = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    evals = np.clip(evals, 0.0, None)
    z = vecs.conj().T @ (phi.conj().T @ y)
    y_norm2 = float(np.vdot(y, y).real)

    def stats(alpha, beta):
        denom = alpha + beta * evals
        f = beta * z / denom
        m_norm2 = float(np.sum(np.abs(f) ** 2))
        gamma = float(np.sum(beta * evals / denom))
        resid2 = y_norm2 - 2.0 * np.vdot(z, f).real \
            + float(np.sum(evals * np.abs(f) ** 2))
        return gamma, m_norm2, max(resid2, 0.0)

    start_evidence = log_evidence(problem, alpha0, beta0)
    alpha, beta = float(alpha0), float(beta0)
    clamped = False
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gamma, m_norm2, resid2 = stats(alpha, beta)
        if t_rounds - gamma <= 1e-6:
            raise NumericalError(
                "noise precision undetermined: T - gamma <= 1e-6")
        alpha_new = CLAMP_HI if m_norm2 <= 1e-300 else gamma / m_norm2
        beta_new = CLAMP_HI if resid2 <= 1e-300 else (t_rounds - gamma) / resid2
        alpha_c, beta_c = _clamp(alpha_new), _clamp(beta_new)
        if alpha_c != alpha_new or beta_c != beta_new:
            clamped = True
        rel = max(abs(alpha_c - alpha) / alpha, abs(beta_c - beta) / beta)
        alpha, beta = alpha_c, beta_c
        if rel <= tol:
            converged = True
            break

    gamma_exit, _, _ = stats(alpha, beta)
    if converged:
        end_evidence = log_evidence(problem, alpha, beta)
        if end_evidence < start_evidence - 1e-6:
            warnings.warn(
                "evidence decreased across the fixed-point run "
                f"({start_evidence:.6g} -> {end_evidence:.6g})",
                RuntimeWarning, stacklevel=2)
    return HyperParams(alpha=alpha, beta=beta, lam=alpha / beta,
                       gamma_eff=gamma_exit, iterations=iterations,
                       converged=converged, clamped=clamped)


def tune_lambda(records, effective_pilots, reference_w,
                config: TunerConfig | None = None, layer: int = 0,
                targets=None) -> TunedLambda:
    """Pick the ridge weight for one estimation problem.

    Fixed mode returns the configured value. Auto mode runs the evidence
    fixed point and falls back to `fallback_lam` when it raises or ends
    with a clamped precision.
    """
    config = config or TunerConfig()
    if config.mode == "fixed":
        return TunedLambda(lam=config.fixed_lam, hyper=None, fallback=False)
    records = tuple(records)
    if len(records) < 2:
        # noise precision needs at least two rounds; default until then
        return TunedLambda(lam=config.fallback_lam, hyper=None, fallback=True)
    problem = build_design(records, effective_pilots, reference_w,
                           layer=layer, targets=targets)
    try:
        hyper = fixed_point(problem, config.alpha0, config.beta0,
                            config.tol, config.max_iter)
    except NumericalError:
        return TunedLambda(lam=config.fallback_lam, hyper=None, fallback=True)
    if hyper.clamped:
        return TunedLambda(lam=config.fallback_lam, hyper=hyper, fallback=True)
    return TunedLambda(lam=hyper.lam, hyper=hyper, fallback=False)
