import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score
from tqdm import tqdm

from src.core.exceptions import ConfigurationError, NonPositiveInput, NumericalFailure
from src.schemes.instances import ProblemInstance, SchemeTag
from src.schemes.protocols import EstimationScheme, get_scheme

logger = logging.getLogger(__name__)

_TAG_IDS = {tag: i for i, tag in enumerate(SchemeTag)}


class SchemeResult(BaseModel):
    """Empirical RMSE of one scheme on one instance."""

    scheme_tag: SchemeTag
    n: int
    nu: int
    trials: int
    rmse: float
    rmse_std_error: float
    bias: float
    bias_std_error: float
    discarded: int = 0
    predicted_rmse: Optional[float] = None
    estimates: List[float] = Field(default_factory=list, repr=False)


class ScalingFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def trial_streams(seed: int, tag: SchemeTag, n: int, trials: int, instance: int = 0) -> List[np.random.SeedSequence]:
    """Independent per-trial seed sequences; trial i always gets the same stream."""
    if seed < 0:
        raise ConfigurationError(f"Seed must be non-negative, got {seed}")
    return np.random.SeedSequence([seed, _TAG_IDS[tag], n, instance]).spawn(trials)


def _run_trial(
    scheme: EstimationScheme,
    inst: ProblemInstance,
    nu: int,
    stream: np.random.SeedSequence,
) -> Optional[float]:
    rng = np.random.Generator(np.random.Philox(stream))
    outcomes = scheme.run(inst, nu, rng)
    try:
        return float(scheme.estimate(outcomes, inst))
    except NumericalFailure as e:
        logger.debug("Trial discarded: %s", e)
        return None


def jackknife_rmse_error(errors: np.ndarray) -> float:
    """Jackknife standard error of √(mean e²)."""
    n = errors.shape[0]
    squares = errors ** 2
    total = math.fsum(squares)
    leave_one_out = np.sqrt(np.maximum(total - squares, 0.0) / (n - 1))
    spread = leave_one_out - leave_one_out.mean()
    return math.sqrt((n - 1) / n * math.fsum(spread ** 2))


def monte_carlo_rmse(
    scheme: Union[EstimationScheme, SchemeTag, str],
    inst: ProblemInstance,
    nu: int,
    trials: int,
    seed: int,
    workers: int = 1,
    progress: bool = False,
    instance: int = 0,
) -> SchemeResult:
    """Run the scheme and its estimator `trials` times on split streams.

    Results are reduced in trial order, so they do not depend on the number
    of workers or on completion order.
    """
    if trials < 2:
        raise ConfigurationError(f"Monte Carlo RMSE needs at least 2 trials, got {trials}")
    if nu < 1:
        raise NonPositiveInput(f"nu must be >= 1, got {nu}")
    if not isinstance(scheme, EstimationScheme):
        scheme = get_scheme(scheme)

    streams = trial_streams(seed, scheme.tag, inst.n, trials, instance)
    results: Dict[int, Optional[float]] = {}
    label = f"{scheme.tag.value} N={inst.n}"
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_trial, scheme, inst, nu, s): i for i, s in enumerate(streams)}
            for future in tqdm(as_completed(futures), total=trials, desc=label, disable=not progress):
                results[futures[future]] = future.result()
    else:
        for i, s in enumerate(tqdm(streams, desc=label, disable=not progress)):
            results[i] = _run_trial(scheme, inst, nu, s)

    estimates = [results[i] for i in range(trials) if results[i] is not None]
    discarded = trials - len(estimates)
    if discarded:
        logger.warning("%s: discarded %d of %d trials", label, discarded, trials)
    if len(estimates) < 2:
        raise NumericalFailure(f"{label}: only {len(estimates)} of {trials} trials produced an estimate")

    errors = np.asarray(estimates) - scheme.target(inst)
    kept = errors.shape[0]
    rmse = math.sqrt(math.fsum(errors ** 2) / kept)
    bias = math.fsum(errors) / kept
    result = SchemeResult(
        scheme_tag=scheme.tag,
        n=inst.n,
        nu=nu,
        trials=kept,
        rmse=rmse,
        rmse_std_error=jackknife_rmse_error(errors),
        bias=bias,
        bias_std_error=float(np.std(errors, ddof=1)) / math.sqrt(kept),
        discarded=discarded,
        predicted_rmse=scheme.predicted_rmse(inst, nu),
        estimates=estimates,
    )
    logger.info("%s: rmse = %.4e ± %.1e (predicted %.4e)", label, rmse, result.rmse_std_error, result.predicted_rmse)
    return result


def scaling_fit(points: Sequence[Tuple[float, float]]) -> ScalingFit:
    """Least-squares line through (log n, log rmse)."""
    if len(points) < 3:
        raise NonPositiveInput(f"A scaling fit needs at least 3 points, got {len(points)}")
    ns = np.array([p[0] for p in points], dtype=float)
    rmses = np.array([p[1] for p in points], dtype=float)
    if np.any(ns <= 0) or np.any(rmses <= 0):
        raise NonPositiveInput("Scaling fit points must be strictly positive")

    log_n = np.log(ns).reshape(-1, 1)
    log_rmse = np.log(rmses)
    model = LinearRegression().fit(log_n, log_rmse)
    return ScalingFit(
        slope=float(model.coef_[0]),
        intercept=float(model.intercept_),
        r_squared=float(r2_score(log_rmse, model.predict(log_n))),
    )
