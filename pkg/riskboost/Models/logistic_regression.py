import logging
from dataclasses import dataclass
from typing import List
import numpy as np
from scipy.special import expit
from ..Utils.dataset import Dataset


MAX_ITERATIONS = 100
LOGLIKELIHOOD_TOLERANCE = 1e-8
GRADIENT_TOLERANCE = 1e-6
RIDGE_JITTER = 1e-10


@dataclass(frozen=True)
class LogisticModel:
    """
    p = 1 / (1 + exp(-(intercept + coefficients . x)))

    `converged` is False when the Newton iterations hit the iteration cap; the model is still usable.
    """
    feature_names: List[str]
    intercept: float
    coefficients: np.ndarray
    converged: bool = True
    iterations: int = 0

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=np.float64)
        if len(coefficients) != len(self.feature_names):
            raise ValueError('Expected {} coefficients, got {}.'.format(len(self.feature_names), len(coefficients)))
        if not (np.all(np.isfinite(coefficients)) and np.isfinite(self.intercept)):
            raise ValueError('Logistic coefficients must be finite.')
        coefficients.setflags(write=False)
        object.__setattr__(self, 'coefficients', coefficients)


def log_likelihood(design: np.ndarray, target: np.ndarray, beta: np.ndarray) -> float:
    margin = design @ beta
    return float(np.sum(target * margin - np.logaddexp(0.0, margin)))


def log_likelihood_gradient(design: np.ndarray, target: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return design.T @ (target - expit(design @ beta))


def train_logistic(ds: Dataset) -> LogisticModel:
    """
    Maximum-likelihood fit by Newton-Raphson (iteratively reweighted least squares) with step halving.

    Iterations stop once the log-likelihood improves by less than 1e-8 and the gradient max-norm is below 1e-6,
    or after 100 iterations, in which case a warning is logged and `converged` is False.

    Parameters
    ----------
    ds : Dataset
        Preprocessed dataset holding both classes. Zero-feature datasets fit the intercept only.
    Returns
    -------
    LogisticModel
        Fitted intercept and coefficients.
    """
    if not ds.has_both_classes():
        raise ValueError('Logistic regression requires both classes in the target.')
    if ds.has_missing():
        raise ValueError('Logistic regression requires a dataset without missing values.')

    design = np.hstack([np.ones((ds.n_rows, 1)), ds.values])
    target = ds.target.astype(np.float64)
    beta = np.zeros(design.shape[1])
    current = log_likelihood(design, target, beta)
    converged = False
    iteration = 0
    for iteration in range(1, MAX_ITERATIONS + 1):
        probabilities = expit(design @ beta)
        gradient = design.T @ (target - probabilities)
        weights = probabilities * (1.0 - probabilities)
        hessian = (design * weights[:, None]).T @ design + RIDGE_JITTER * np.eye(design.shape[1])
        step = np.linalg.solve(hessian, gradient)

        scale = 1.0
        candidate = beta + step
        updated = log_likelihood(design, target, candidate)
        while updated < current and scale > 1e-10:
            scale /= 2.0
            candidate = beta + scale * step
            updated = log_likelihood(design, target, candidate)
        if updated < current:
            # No ascent direction left at machine precision
            converged = np.max(np.abs(gradient)) <= GRADIENT_TOLERANCE
            break

        improvement = updated - current
        beta, current = candidate, updated
        if improvement < LOGLIKELIHOOD_TOLERANCE and \
                np.max(np.abs(log_likelihood_gradient(design, target, beta))) <= GRADIENT_TOLERANCE:
            converged = True
            break

    if not converged:
        logging.warning('Logistic regression did not converge after {} iterations (log-likelihood {:.6f}).'.format(
            iteration, current))
    return LogisticModel(feature_names=list(ds.feature_names), intercept=float(beta[0]), coefficients=beta[1:],
                         converged=bool(converged), iterations=iteration)


def predict_logistic(m: LogisticModel, ds: Dataset) -> np.ndarray:
    if ds.n_features != len(m.coefficients):
        raise ValueError('The model expects {} features, the dataset has {}.'.format(len(m.coefficients),
                                                                                     ds.n_features))
    return expit(m.intercept + ds.values @ m.coefficients)
