"""Experiment orchestration: configs, trials, metrics, CSV persistence.

A trial fixes one synthetic covariance and replays the feedback protocol
round by round for each requested method, re-estimating beams from the
history after every round and scoring them by beam precision. Trials are
seeded from a master seed by counter-based splitting, so repeated runs
(and any trial-level parallelism) produce byte-identical CSV output.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .am import AmProblem, run_am
from .baseline import accumulate, baseline_beams, baseline_pilots
from .baseline import codeword_beam
from .bayes import TunerConfig, tune_lambda
from .channel import Dccm, dft_pilot, make_dccm, pilot_for_round
from .codebook import build_multi_layer, build_single_layer
from .errors import ConfigError
from .feedback import make_feedback
from .multistream import BeamMatrix, run_multistream

__all__ = [
    "ExperimentConfig",
    "PrecisionCurve",
    "BetaCheckReport",
    "load_config",
    "beam_precision",
    "run_trial",
    "run_experiment",
    "write_csv",
    "empirical_beta_check",
]

KNOWN_METHODS = ("proposed", "baseline", "codeword")


@dataclass(frozen=True)
class ExperimentConfig:
    """Scenario description; validated on construction."""

    n_antennas: int = 32
    n_ports: int = 8
    n_user: int = 2
    n_streams: int = 1
    rounds: int = 100
    trials: int = 100
    lambda_mode: str = "auto"
    partition_mode: str = "average"
    methods: tuple = KNOWN_METHODS
    eigen_profile: tuple = (8.0, 1.0)
    master_seed: int = 0
    output_path: str = "results.csv"
    codebook_size: int = 16

    def __post_init__(self):
        if not 1 <= self.n_streams <= self.n_user <= self.n_ports <= self.n_antennas:
            raise ConfigError(
                "need n_streams <= n_user <= n_ports <= n_antennas, all >= 1")
        if self.rounds < 1 or self.trials < 1:
            raise ConfigError("rounds and trials must be >= 1")
        if not self.methods:
            raise ConfigError("at least one method required")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ConfigError(f"unknown methods: {unknown}")
        if self.partition_mode not in ("average", "oracle"):
            raise ConfigError(f"unknown partition_mode: {self.partition_mode!r}")
        profile = tuple(float(x) for x in self.eigen_profile)
        if len(profile) != self.n_user:
            raise ConfigError("eigen_profile length must equal n_user")
        if any(x <= 0 for x in profile) or any(
                a < b for a, b in zip(profile, profile[1:])):
            raise ConfigError("eigen_profile must be positive and descending")
        if self.codebook_size < self.n_ports:
            raise ConfigError("codebook_size must be >= n_ports")
        if self.n_streams > 1 and self.codebook_size % self.n_ports:
            raise ConfigError(
                "multi-layer codebooks need codebook_size divisible by n_ports")
        self.fixed_lambda()  # validates lambda_mode syntax

    def fixed_lambda(self) -> float | None:
        """The fixed ridge weight, or None in auto mode."""
        if self.lambda_mode == "auto":
            return None
        if self.lambda_mode.startswith("fixed(") and self.lambda_mode.endswith(")"):
            try:
                value = float(self.lambda_mode[6:-1])
            except ValueError:
                value = -1.0
            if value > 0:
                return value
        raise ConfigError(
            f"lambda_mode must be 'auto' or 'fixed(<positive>)', "
            f"got {self.lambda_mode!r}")

    def tuner(self) -> TunerConfig:
        fixed = self.fixed_lambda()
        if fixed is None:
            return TunerConfig(mode="auto")
        return TunerConfig(mode="fixed", fixed_lam=fixed)


_INT_KEYS = ("n_antennas", "n_ports", "n_user", "n_streams", "rounds",
             "trials", "master_seed", "codebook_size")
_STR_KEYS = ("lambda_mode", "partition_mode", "output_path")
_LIST_KEYS = ("methods", "eigen_profile")


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat `key = value` config file; unknown keys are rejected."""
    fields = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in fields:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                if key in _INT_KEYS:
                    fields[key] = int(value)
                elif key in _STR_KEYS:
                    fields[key] = value
                elif key == "methods":
                    fields[key] = tuple(
                        m.strip() for m in value.split(",") if m.strip())
                elif key == "eigen_profile":
                    fields[key] = tuple(
                        float(x) for x in value.split(",") if x.strip())
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return ExperimentConfig(**fields)


@dataclass(frozen=True, eq=False)
class PrecisionCurve:
    """Per-round beam precision for one method.

    From run_trial: one trial's curve (stderrs zero). From
    run_experiment: trial-averaged, with standard errors filled in.
    lambda_trace holds the per-round ridge weight for the proposed
    method, None for methods that have no such parameter.
    """

    method: str
    precisions: np.ndarray
    trials: int
    lambda_trace: np.ndarray | None = None
    stderrs: np.ndarray | None = None

    def __post_init__(self):
        p = self.precisions
        if np.any(p < 0) or np.any(p > 1 + 1e-9):
            raise ValueError("precision values must lie in [0, 1 + 1e-9]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def n_rounds(self) -> int:
        return self.precisions.shape[0]


def beam_precision(dccm: Dccm, beams: BeamMatrix) -> float:
    """Fraction of attainable received power captured by the beams.

    Single beam: w^H C w over the largest eigenvalue. Multiple beams:
    Tr(W^H C W) over Tr(C). Both lie in [0, 1]; tiny negative rounding
    is clipped to 0.
    """
    w = beams.columns
    if w.shape[0] != dccm.n_antennas:
        raise ValueError("beam length must match antenna count")
    captured = float(np.real(np.trace(w.conj().T @ dccm.matrix @ w)))
    if beams.n_streams == 1:
        reference = float(dccm.eigenvalues[0])
    else:
        reference = dccm.trace
    return max(captured / reference, 0.0)


def _trial_words(trial_seed) -> tuple[int, int, int, int]:
    """Derive (dccm, proposed-pilot, baseline-pilot, init) seed words."""
    if isinstance(trial_seed, np.random.SeedSequence):
        ss = trial_seed
    else:
        ss = np.random.SeedSequence(trial_seed)
    words = ss.generate_state(4)
    return tuple(int(w) for w in words)


def _oracle_fractions(dccm: Dccm, records, n_streams: int) -> np.ndarray:
    """Ground-truth per-stream CQI shares, renormalized over n_streams.

    Share k of record t is sigma_k ||V_t^H Q_t^H u_k||^2, the k-th
    eigencomponent of the reported trace.
    """
    out = np.empty((len(records), n_streams))
    for t, rec in enumerate(records):
        compressed = rec.codeword.conj().T @ (
            rec.pilot.matrix.conj().T @ dccm.eigenvectors)
        shares = dccm.eigenvalues * np.sum(np.abs(compressed) ** 2, axis=0)
        top = shares[:n_streams]
        total = top.sum()
        out[t] = top / total if total > 0 else np.full(n_streams, 1.0 / n_streams)
    return out


def _complex_normal(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _proposed_single(dccm, records, tuner_cfg, init0):
    """Per-round single-beam re-estimation, warm-started across rounds."""
    t_rounds = len(records)
    precisions = np.empty(t_rounds)
    lams = np.empty(t_rounds)
    cold_ref = records[0].pilot.matrix @ records[0].codeword[:, 0]
    prev_w = None
    for t in range(1, t_rounds + 1):
        recs = records[:t]
        reference = cold_ref if prev_w is None else prev_w
        tuned = tune_lambda(recs, None, reference, tuner_cfg)
        problem = AmProblem.from_records(recs, tuned.lam)
        init = init0 if prev_w is None else prev_w
        w, _ = run_am(problem, init)
        precisions[t - 1] = beam_precision(dccm, BeamMatrix(columns=w[:, None]))
        lams[t - 1] = tuned.lam
        prev_w = w
    return precisions, lams


def _proposed_multi(dccm, records, n_streams, partition_mode, tuner_cfg,
                    fractions):
    """Per-round multi-beam re-estimation, warm-started across rounds."""
    t_rounds = len(records)
    precisions = np.empty(t_rounds)
    lams = np.empty(t_rounds)
    prev = None
    for t in range(1, t_rounds + 1):
        info: dict = {}
        beams = run_multistream(
            records[:t], n_streams, partition_mode,
            None if fractions is None else fractions[:t],
            tuner_cfg, init_beams=prev, reference_beams=prev, out_info=info)
        precisions[t - 1] = beam_precision(dccm, beams)
        lams[t - 1] = float(np.mean(info["lams"]))
        prev = beams.columns
    return precisions, lams


def _baseline_curve(dccm, records, n_streams):
    t_rounds = len(records)
    precisions = np.empty(t_rounds)
    for t in range(1, t_rounds + 1):
        beams = baseline_beams(accumulate(records[:t]), n_streams)
        precisions[t - 1] = beam_precision(dccm, beams)
    return precisions


def run_trial(config: ExperimentConfig, trial_seed, dccm: Dccm | None = None,
              pilot_overrides: dict | None = None) -> dict:
    """One seeded trial; returns method -> PrecisionCurve.

    `dccm` and `pilot_overrides` (method -> list of per-round pilots)
    exist so constructed scenarios can reuse the exact harness protocol.
    """
    dccm_seed, pilot_seed, base_seed, init_seed = _trial_words(trial_seed)
    if dccm is None:
        dccm = make_dccm(config.n_antennas, config.n_user,
                         config.eigen_profile, dccm_seed)
    if config.n_streams == 1:
        codebook = build_single_layer(config.n_ports, config.codebook_size)
    else:
        codebook = build_multi_layer(config.n_ports, config.n_streams,
                                     config.codebook_size)
    overrides = pilot_overrides or {}
    q1 = dft_pilot(config.n_antennas, config.n_ports)
    tuner_cfg = config.tuner()
    rng_init = np.random.default_rng(init_seed)

    def pilots_for(method):
        if method in overrides:
            pilots = list(overrides[method])
            if len(pilots) != config.rounds:
                raise ValueError("pilot override must cover every round")
            return pilots
        if method == "proposed":
            return [pilot_for_round(t, config.n_antennas, config.n_ports,
                                    [q1], pilot_seed)
                    for t in range(1, config.rounds + 1)]
        if method == "baseline":
            return [baseline_pilots(q1, t, base_seed)
                    for t in range(1, config.rounds + 1)]
        return [q1]  # codeword: round-1 feedback only

    curves = {}
    for method in config.methods:
        records = [make_feedback(dccm, pilot, codebook)
                   for pilot in pilots_for(method)]
        lams = None
        if method == "proposed":
            init0 = _complex_normal(rng_init, config.n_antennas)
            if config.n_streams == 1:
                precisions, lams = _proposed_single(dccm, records, tuner_cfg,
                                                    init0)
            else:
                fractions = None
                if config.partition_mode == "oracle":
                    fractions = _oracle_fractions(dccm, records,
                                                  config.n_streams)
                precisions, lams = _proposed_multi(
                    dccm, records, config.n_streams, config.partition_mode,
                    tuner_cfg, fractions)
        elif method == "baseline":
            precisions = _baseline_curve(dccm, records, config.n_streams)
        else:
            beams = codeword_beam(records[0].pilot,
                                  records[0].codeword[:, :config.n_streams])
            precisions = np.full(config.rounds,
                                 beam_precision(dccm, beams))
        curves[method] = PrecisionCurve(
            method=method, precisions=precisions, trials=1,
            lambda_trace=lams, stderrs=np.zeros(config.rounds))
    return curves


def run_experiment(config: ExperimentConfig) -> dict:
    """Average run_trial over seeded trials and write the CSV.

    Returns method -> trial-averaged PrecisionCurve. Deterministic in
    (config, master_seed): the CSV is byte-identical across repeats.
    """
    children = np.random.SeedSequence(config.master_seed).spawn(config.trials)
    per_trial = [run_trial(config, child) for child in children]

    curves = {}
    for method in config.methods:
        stack = np.stack([trial[method].precisions for trial in per_trial])
        mean = stack.mean(axis=0)
        if config.trials > 1:
            stderr = stack.std(axis=0, ddof=1) / np.sqrt(config.trials)
        else:
            stderr = np.zeros(config.rounds)
        lam_traces = [trial[method].lambda_trace for trial in per_trial]
        lam_mean = (np.stack(lam_traces).mean(axis=0)
                    if lam_traces[0] is not None else None)
        curves[method] = PrecisionCurve(
            method=method, precisions=mean, trials=config.trials,
            lambda_trace=lam_mean, stderrs=stderr)
    write_csv(config.output_path, curves, order=config.methods)
    return curves


def write_csv(path: str, curves: dict, order=None) -> None:
    """Emit `method,round,mean_precision,stderr_precision,mean_lambda`.

    Floats carry 9 significant digits; rows without a ridge weight print
    nan; line endings are LF regardless of platform.
    """
    methods = list(order) if order is not None else sorted(curves)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("method,round,mean_precision,stderr_precision,mean_lambda\n")
        for method in methods:
            curve = curves[method]
            stderrs = (curve.stderrs if curve.stderrs is not None
                       else np.zeros(curve.n_rounds))
            for t in range(curve.n_rounds):
                lam = (float(curve.lambda_trace[t])
                       if curve.lambda_trace is not None else float("nan"))
                fh.write(f"{method},{t + 1},{curve.precisions[t]:.9g},"
                         f"{stderrs[t]:.9g},{lam:.9g}\n")


@dataclass(frozen=True)
class BetaCheckReport:
    """Empirical moments of the beam-mismatch and alignment statistics.

    bm is |o^H Q^H u|^2 for a random direction o orthogonal (in port
    space) to the compressed optimal beam; ac is the squared codebook
    alignment a^2 of the selected codeword. Theory values are the
    real-sphere moments mean 1/N and variance 2(N-1)/(N^3 + 2N).
    """

    dimension: int
    samples: int
    mean_bm: float
    var_bm: float
    theory_mean_bm: float
    theory_var_bm: float
    se_mean_bm: float
    se_var_bm: float
    mean_ac: float
    var_ac: float

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.var_bm < 0 or self.var_ac < 0:
            raise ValueError("variances must be nonnegative")


def _real_orthonormal(rng: np.random.Generator, rows: int,
                      cols: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
    d = np.sign(np.diagonal(r))
    d[d == 0] = 1.0
    return q * d


def empirical_beta_check(n_antennas: int, n_ports: int = 16,
                         codebook_size: int = 256, samples: int = 10_000,
                         seed: int = 0) -> BetaCheckReport:
    """Monte-Carlo check of the sphere-decomposition moment claims.

    Each sample draws a real orthonormal pilot Q with the optimal beam
    w* inside its column space, a unit codebook of random directions,
    and a random unit u orthogonal to w*; the selected codeword v is
    split as v = a g + sqrt(1-a^2) o against g = Q^T w*, and the
    mismatch power |o^T Q^T u|^2 is recorded alongside a^2.

    Draws are real-valued: the reference moments are stated for real
    spheres, where the squared coordinate has twice the variance of its
    complex counterpart.
    """
    if samples < 1000:
        raise ValueError("at least 1000 samples required")
    if not 1 < n_ports <= n_antennas:
        raise ValueError("need 1 < n_ports <= n_antennas")
    rng = np.random.default_rng(seed)
    bm2 = np.empty(samples)
    ac2 = np.empty(samples)
    for i in range(samples):
        q = _real_orthonormal(rng, n_antennas, n_ports)
        g = rng.standard_normal(n_ports)
        g /= np.linalg.norm(g)
        w_star = q @ g
        u = rng.standard_normal(n_antennas)
        u -= w_star * (w_star @ u)
        u /= np.linalg.norm(u)
        book = rng.standard_normal((codebook_size, n_ports))
        book /= np.linalg.norm(book, axis=1)[:, None]
        dots = book @ g
        pick = int(np.argmax(np.abs(dots)))
        a = abs(float(dots[pick]))
        o = book[pick] - g * dots[pick]
        norm_o = np.linalg.norm(o)
        if norm_o < 1e-12:
            # selected codeword aligned with g: any unit direction _|_ g
            o = np.zeros(n_ports)
            o[int(np.argmin(np.abs(g)))] = 1.0
            o -= g * (g @ o)
            norm_o = np.linalg.norm(o)
        o /= norm_o
        bm2[i] = float(o @ (q.T @ u)) ** 2
        ac2[i] = a * a
    mean_bm = float(bm2.mean())
    var_bm = float(bm2.var(ddof=1))
    fourth = float(np.mean((bm2 - mean_bm) ** 4))
    se_var = float(np.sqrt(max(fourth - var_bm ** 2, 0.0) / samples))
    n = n_antennas
    return BetaCheckReport(
        dimension=n, samples=samples, mean_bm=mean_bm, var_bm=var_bm,
        theory_mean_bm=1.0 / n,
        theory_var_bm=2.0 * (n - 1) / (n ** 3 + 2.0 * n),
        se_mean_bm=float(np.sqrt(var_bm / samples)), se_var_bm=se_var,
        mean_ac=float(ac2.mean()), var_ac=float(ac2.var(ddof=1)))
