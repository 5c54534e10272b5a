"""Monte Carlo trials, MISE estimation and convergence-rate sweeps."""
import math
import sys
from functools import cached_property, partial
from typing import Dict, List, Optional

import anyio
import numpy as np
from scipy.stats import linregress

from fracback.errors import ConvergenceError, FracbackError, NumericalFailure, ParameterValidationError
from fracback.forward import Trajectory, forward_solve
from fracback.noise import NoiseSampler, ObservedData
from fracback.quasi_reversibility import (
    QRParams,
    choose_Q_n,
    evaluate_qr_bounds,
    qr_error_at_zero,
    solve_qr,
)
from fracback.spectral import GridSamples, MidpointTransform, NormSpec, squared_norms
from fracback.truncation import (
    TruncationParams,
    choose_M_n,
    evaluate_second_bound,
    evaluate_truncation_bound,
    solve_first_regularizer,
    solve_second_regularizer,
)
from .assumptions import verify_assumptions
from .config import ExperimentConfig
from .scenario import build_instance
from .schemas import (
    AssumptionReport,
    MiseEstimate,
    MiseRow,
    SlopeFit,
    SmoothnessAssumptions,
    SweepResult,
    SweepRow,
    TrialReport,
)

# Slack, in standard errors, before a rise in MISE counts as real
MONOTONE_SLACK = 3.0


def _aligned(first: np.ndarray, second: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cap = max(first.shape[-1], second.shape[-1])
    out = []
    for array in (first, second):
        padded = np.zeros(array.shape[:-1] + (cap,))
        padded[..., : array.shape[-1]] = array
        out.append(padded)
    return out[0], out[1]


class ExperimentRunner:
    """Runs the configured regularizer against a ground truth solved once."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.instance = build_instance(config.problem)
        self.grid = config.time_grid()
        self.noise = config.noise_spec()
        self.method = config.run.method
        self.eval_times = config.eval_times
        self.eval_indices = [self._grid_index(t) for t in self.eval_times]

    def _grid_index(self, t: float) -> int:
        index = int(np.argmin(np.abs(self.grid - t)))
        if not math.isclose(self.grid[index], t, rel_tol=0.0, abs_tol=1e-9):
            error_msg = f"evaluation time {t} is not a node of the {self.config.grid.steps}-step grid"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ParameterValidationError(error_msg)
        return index

    @cached_property
    def truth(self) -> Trajectory:
        print(
            f"[INFO] Solving ground truth '{self.instance.name}' on {self.grid.size - 1} steps, "
            f"cap {self.config.problem.cap}",
            file=sys.stderr,
        )
        return forward_solve(self.instance, self.grid, self.config.problem.cap)

    @cached_property
    def assumptions(self) -> AssumptionReport:
        reg = self.config.regularizer
        claims = SmoothnessAssumptions(gamma=reg.gamma, alpha=reg.alpha, delta=reg.delta)
        if self.method == "first_truncation":
            claims = claims.model_copy(update={
                "ass1": reg.alpha is None,
                "ass2": reg.alpha is not None,
                "assu2": self.instance.has_source,
            })
        elif self.method == "quasi_reversibility":
            claims = claims.model_copy(update={"v_tilde": True})
        return verify_assumptions(self.truth, claims, self.config.problem.cap, self.instance)

    def cutoff(self, n: int) -> int:
        """Configured M_n, or the cutoff rule at n; must stay below n."""
        reg = self.config.regularizer
        M = reg.M_n if reg.M_n is not None else choose_M_n(n, reg.sigma_rate, self.instance.T, self.instance.beta)
        if M >= n:
            raise ParameterValidationError(f"cutoff M_n={M} must be below n={n}")
        return M

    def clamp_level(self, n: int) -> Optional[float]:
        """Configured Q_n, the clamp rule for locally Lipschitz F, or None."""
        if self.config.regularizer.Q_n is not None:
            return self.config.regularizer.Q_n
        nonlinearity = self.instance.nonlinearity
        if nonlinearity.globally_lipschitz:
            return None
        return choose_Q_n(n, self.instance.T, nonlinearity.local_lipschitz)

    def truncation_params(self, n: int, M_n: int) -> TruncationParams:
        reg = self.config.regularizer
        return TruncationParams(
            M_n=M_n,
            n=n,
            sigma_rate=reg.sigma_rate,
            picard_tol=reg.picard_tol,
            picard_max_iters=reg.picard_max_iters,
            clamp_level=self.clamp_level(n),
        )

    def qr_params(self, n: int, M_n: int, b0: Optional[float] = None) -> QRParams:
        reg = self.config.regularizer
        Q = self.clamp_level(n)
        return QRParams(
            M_n=M_n,
            n=n,
            Q_n=math.inf if Q is None else Q,
            a0=self.instance.a0,
            b0=b0,
            picard_tol=reg.picard_tol,
            picard_max_iters=reg.picard_max_iters,
        )

    def observe(self, trial: int, n: int) -> ObservedData:
        """Noisy observations of the ground truth for one trial."""
        cap = self.truth.cap
        transform = MidpointTransform(n, cap)
        true_final = GridSamples(n=n, values=transform.synthesize(self.truth.states[-1]))
        source_samples = transform.synthesize(self.instance.source_coefficients(self.grid, cap))
        a_samples = self.instance.coefficient(self.grid)
        return NoiseSampler(self.noise).observe(
            true_final, source_samples, a_samples, self.grid, self.instance.a0, trial
        )

    def _errors(self, coefficients: np.ndarray, spec: NormSpec) -> List[float]:
        estimate, truth = _aligned(coefficients[self.eval_indices], self.truth.states[self.eval_indices])
        return np.sqrt(squared_norms(estimate - truth, spec)).tolist()

    def run_trial(self, trial: int, n: Optional[int] = None, M_n: Optional[int] = None) -> TrialReport:
        """One noisy observation, one regularized solve, errors at the evaluation times."""
        n = self.config.run.n if n is None else n
        try:
            M = self.cutoff(n) if M_n is None else M_n
            observed = self.observe(trial, n)
            return self._solve_trial(trial, n, M, observed)
        except ConvergenceError as e:
            error_msg = f"trial {trial}: {e}"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise ConvergenceError(error_msg, iterations=e.iterations, last_ratio=e.last_ratio) from e
        except FracbackError as e:
            error_msg = f"trial {trial}: {e}"
            print(f"[ERROR] {error_msg}", file=sys.stderr)
            raise type(e)(error_msg) from e

    def _solve_trial(self, trial: int, n: int, M: int, observed: ObservedData) -> TrialReport:
        flags: Dict[str, bool] = {
            "coefficient_within_bounds": observed.coefficient.within_bounds,
            "assumptions_verified": self.assumptions.all_verified,
        }
        common = dict(trial=trial, seed=self.noise.seed, method=self.method, n=n, M_n=M,
                      times=self.eval_times, b0=observed.coefficient.b0, flags=flags)
        l2 = NormSpec.l2()

        if self.method == "first_truncation":
            solution = solve_first_regularizer(observed, self.instance, self.truncation_params(n, M), self.grid)
            return TrialReport(l2_errors=self._errors(solution.coefficients, l2),
                               diagnostics=solution.diagnostics, **common)

        if self.method == "second_truncation":
            cap = max(self.config.problem.cap, M)
            solution = solve_second_regularizer(observed.final_samples, self.instance,
                                                self.truncation_params(n, M), self.grid, cap)
            return TrialReport(l2_errors=self._errors(solution.coefficients, l2),
                               diagnostics=solution.diagnostics, **common)

        cap = max(self.config.problem.cap, M)
        params = self.qr_params(n, M, b0=observed.coefficient.b0)
        solution = solve_qr(observed, self.instance, params, self.grid, cap)
        flags["b0_positive"] = observed.coefficient.b0 > 0.0
        error_at_t_n = None
        if solution.t_n is not None:
            error_at_t_n = qr_error_at_zero(solution, self.truth.initial)
        return TrialReport(
            l2_errors=self._errors(solution.coefficients, l2),
            h_beta_errors=self._errors(solution.coefficients, NormSpec.h_gamma(self.instance.beta / 2.0)),
            t_n=solution.t_n,
            error_at_t_n=error_at_t_n,
            diagnostics=solution.diagnostics,
            **common,
        )

    async def _run_all(self, n: int, M: int, trials: int) -> List[TrialReport]:
        limiter = anyio.CapacityLimiter(self.config.run.workers)
        reports: List[TrialReport] = []

        async def worker(trial: int) -> None:
            report = await anyio.to_thread.run_sync(partial(self.run_trial, trial, n, M), limiter=limiter)
            reports.append(report)

        async with anyio.create_task_group() as tg:
            for trial in range(trials):
                tg.start_soon(worker, trial)
        return sorted(reports, key=lambda report: report.trial)

    def run_trials(self, n: int, M: int, trials: Optional[int] = None) -> List[TrialReport]:
        """Trials 0..R-1, run on the worker pool and sorted by trial index."""
        trials = self.config.run.trials if trials is None else trials
        # solved before the pool starts so every worker shares one truth
        self.truth
        self.assumptions
        try:
            return anyio.run(self._run_all, n, M, trials)
        except ExceptionGroup as group:
            first = group.exceptions[0]
            while isinstance(first, ExceptionGroup):
                first = first.exceptions[0]
            raise first

    def _bounds(self, n: int, M: int, reports: List[TrialReport], notes: List[str]) -> Dict[str, List[float]]:
        reg = self.config.regularizer
        try:
            if self.method == "first_truncation":
                bound = evaluate_truncation_bound(self.truth, self.instance, self.truncation_params(n, M),
                                                  self.noise, gamma=reg.gamma, alpha=reg.alpha)
                return {"l2": [bound.values[j] for j in self.eval_indices]}
            if self.method == "second_truncation":
                bound = evaluate_second_bound(self.truth, self.instance, self.truncation_params(n, M),
                                              self.noise, gamma=reg.gamma)
                return {"l2": [bound.values[j] for j in self.eval_indices]}
            # Pi grows as b0 shrinks, so the smallest positive per-trial b0 gives the
            # largest per-trial H^beta estimate; trials with b0 <= 0 have none.
            positive = [report.b0 for report in reports if report.b0 > 0.0]
            excluded = len(reports) - len(positive)
            if excluded and positive:
                notes.append(f"H^beta estimate excludes {excluded} trial(s) with b0 <= 0")
            b0 = min(positive) if positive else min(report.b0 for report in reports)
            bounds = evaluate_qr_bounds(self.truth, self.instance, self.qr_params(n, M, b0), self.noise,
                                        delta=reg.delta, b0=b0)
            notes.append(bounds.exponent_note)
            out = {
                "l2": [bounds.l2_bound[j] for j in self.eval_indices],
                "t_n": [bounds.initial_time_bound] * len(self.eval_indices),
            }
            if bounds.h_beta_bound is not None:
                out["h_beta"] = [bounds.h_beta_bound[j] for j in self.eval_indices]
            return out
        except (NumericalFailure, ParameterValidationError) as e:
            note = f"estimate unavailable: {e}"
            print(f"[WARNING] {note}", file=sys.stderr)
            notes.append(note)
            return {}

    def estimate(self, n: Optional[int] = None, M_n: Optional[int] = None,
                 trials: Optional[int] = None) -> MiseEstimate:
        """Sample mean and standard error of squared errors over R trials."""
        n = self.config.run.n if n is None else n
        M = self.cutoff(n) if M_n is None else M_n
        return self.summarize(self.run_trials(n, M, trials))

    def summarize(self, reports: List[TrialReport]) -> MiseEstimate:
        """Aggregate trial reports of one (n, M_n) pair."""
        if not reports:
            raise ParameterValidationError("no trial reports to aggregate")
        n, M = reports[0].n, reports[0].M_n
        R = len(reports)
        print(f"[INFO] {self.method}: {R} trials at n={n}, M_n={M}", file=sys.stderr)

        notes: List[str] = []
        bounds = self._bounds(n, M, reports, notes)
        if not self.assumptions.all_verified:
            notes.append(f"unverified assumptions: {', '.join(self.assumptions.unverified)}")

        series = {"l2": np.array([report.l2_errors for report in reports]) ** 2}
        if self.method == "quasi_reversibility":
            series["h_beta"] = np.array([report.h_beta_errors for report in reports]) ** 2
            if all(report.error_at_t_n is not None for report in reports):
                at_t_n = np.array([report.error_at_t_n for report in reports]) ** 2
                series["t_n"] = np.repeat(at_t_n[:, None], len(self.eval_times), axis=1)

        rows = []
        for metric, squared in series.items():
            means = squared.mean(axis=0)
            stderrs = squared.std(axis=0, ddof=1) / math.sqrt(R) if R >= 2 else [None] * len(means)
            metric_bounds = bounds.get(metric)
            for i, t in enumerate(self.eval_times):
                rows.append(MiseRow(
                    t=t,
                    metric=metric,
                    mise=float(means[i]),
                    stderr=None if stderrs[i] is None else float(stderrs[i]),
                    bound=None if metric_bounds is None else float(metric_bounds[i]),
                ))

        flagged = [report.trial for report in reports if not report.flags.get("coefficient_within_bounds", True)]
        return MiseEstimate(
            method=self.method,
            n=n,
            M_n=M,
            trials=R,
            seed=self.noise.seed,
            rows=rows,
            assumptions=self.assumptions,
            flagged_trials=flagged,
            notes=notes,
        )

    def sweep(self) -> SweepResult:
        """MISE over the sweep list with M_n from the cutoff rule, and fitted slopes."""
        ns = self.config.run.sweep
        if len(ns) < 3:
            raise ParameterValidationError(f"rate sweep needs at least 3 sample counts, got {len(ns)}")
        reg = self.config.regularizer
        if reg.M_n is not None:
            print(f"[INFO] sweep ignores the fixed cutoff M_n={reg.M_n} and applies the cutoff rule",
                  file=sys.stderr)
        T, beta = self.instance.T, self.instance.beta
        estimates = [self.estimate(n, choose_M_n(n, reg.sigma_rate, T, beta)) for n in ns]

        fits = [self._fit(t, [estimate.row(t) for estimate in estimates], ns) for t in self.eval_times]
        rows = []
        for estimate in estimates:
            for fit in fits:
                row = estimate.row(fit.t)
                rows.append(SweepRow(n=estimate.n, M_n=estimate.M_n, t=fit.t, mise=row.mise,
                                     stderr=row.stderr, bound=row.bound, slope=fit.slope))
        return SweepResult(method=self.method, sigma_rate=reg.sigma_rate, rows=rows, fits=fits,
                           estimates=estimates)

    def _fit(self, t: float, rows: List[MiseRow], ns: List[int]) -> SlopeFit:
        predicted = -self.config.regularizer.sigma_rate * t / self.instance.T
        mise = np.array([row.mise for row in rows])
        se = np.array([row.stderr or 0.0 for row in rows])
        noise_free = self.noise.noise_free
        if np.any(mise <= 0.0):
            print(f"[WARNING] t={t:g}: zero MISE, no slope fitted", file=sys.stderr)
            return SlopeFit(t=t, predicted=predicted, degenerate=True, noise_free_floor=noise_free)

        slack = MONOTONE_SLACK * np.sqrt(se[1:] ** 2 + se[:-1] ** 2)
        degenerate = bool(np.any(mise[1:] - mise[:-1] > slack))
        fit = linregress(np.log(ns), np.log(mise))
        slope = float(fit.slope)
        within = None
        if t > 0:
            within = 1.5 * predicted <= slope <= 0.5 * predicted
        if degenerate:
            print(f"[WARNING] t={t:g}: MISE is not monotone in n beyond Monte Carlo noise", file=sys.stderr)
        return SlopeFit(t=t, slope=slope, intercept=float(fit.intercept), predicted=predicted,
                        within_band=within, degenerate=degenerate, noise_free_floor=noise_free)


def run_trial(config: ExperimentConfig, trial: int) -> TrialReport:
    return ExperimentRunner(config).run_trial(trial)


def estimate_mise(config: ExperimentConfig) -> MiseEstimate:
    return ExperimentRunner(config).estimate()


def rate_sweep(config: ExperimentConfig) -> SweepResult:
    return ExperimentRunner(config).sweep()
