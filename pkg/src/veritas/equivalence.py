"""Change-of-measure equivalence, KL/MLE fitting, and distance evaluability.

The optimization demos are discrete: measures live on a finite support grid
and maximization is exhaustive over the feasible subset.  Masses may be
floats or Fractions; with Fractions the change-of-measure identity
f(x)*nu(x) == f(x)*h(x)*mu(x) holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .rng import RngState, next_u64, seed_state


class AbsoluteContinuityViolation(ValueError):
    """nu puts mass where mu has none; the density nu/mu does not exist."""


class NonFiniteLikelihood(ArithmeticError):
    """The model produced a non-finite log-likelihood."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """A probability measure on a finite ordered support, normalized on build."""

    support: tuple
    mass: tuple

    def __post_init__(self):
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass must have equal length")
        if len(self.support) == 0:
            raise ValueError("empty support")
        if any(m < 0 for m in self.mass):
            raise ValueError("masses must be non-negative")
        total = sum(self.mass)
        if total == 0:
            raise ValueError("total mass is zero")
        if abs(total - 1) > 1e-12:
            object.__setattr__(self, "mass", tuple(m / total for m in self.mass))

    def __getitem__(self, x):
        return self.mass[self.support.index(x)]


@dataclass(frozen=True)
class Density:
    """Pointwise mass ratio h = d(nu)/d(mu) on a shared support."""

    support: tuple
    ratio: tuple

    def __getitem__(self, x):
        return self.ratio[self.support.index(x)]


def radon_nikodym(nu: DiscreteMeasure, mu: DiscreteMeasure) -> Density:
    if nu.support != mu.support:
        raise ValueError("measures must share an identical support")
    ratio = []
    for x, n_mass, m_mass in zip(mu.support, nu.mass, mu.mass):
        if m_mass == 0:
            if n_mass != 0:
                raise AbsoluteContinuityViolation(f"mu({x!r}) = 0 but nu({x!r}) = {n_mass}")
            ratio.append(0 * n_mass)
        else:
            ratio.append(n_mass / m_mass)
    return Density(mu.support, tuple(ratio))


def _pointwise_gains(f: Callable, measure, feasible) -> list:
    """Weighted gain f(x)*mass(x) at each feasible point.

    measure is either a DiscreteMeasure or a (mu, h) pair.
    """
    if isinstance(measure, DiscreteMeasure):
        mass = dict(zip(measure.support, measure.mass))
    else:
        mu, h = measure
        mass = {x: hx * mx for x, hx, mx in zip(mu.support, h.ratio, mu.mass)}
    return [f(x) * mass[x] for x in feasible]


def argmax_expected_gain(f: Callable, measure, feasible: Sequence):
    """Feasible point with the largest mass-weighted gain; ties break to the
    earliest feasible point."""
    feasible = list(feasible)
    if not feasible:
        raise ValueError("feasible set is empty")
    gains = _pointwise_gains(f, measure, feasible)
    best = max(range(len(feasible)), key=lambda i: (gains[i], -i))
    return feasible[best]


@dataclass(frozen=True)
class EquivalenceReport:
    objective_gap: float
    same_argmax: bool
    argmax_nu: object
    argmax_mu: object
    integral_nu: float
    integral_mu: float


def observational_equivalence_report(
    f: Callable, mu: DiscreteMeasure, nu: DiscreteMeasure, feasible: Sequence
) -> EquivalenceReport:
    """Compare the two formulations of the same decision problem.

    Under nu the weighted gain is f(x)*nu(x); under mu with gain f*h it is
    f(x)*h(x)*mu(x).  The gaps and argmaxes should coincide.
    """
    h = radon_nikodym(nu, mu)
    feasible = list(feasible)
    gains_nu = _pointwise_gains(f, nu, feasible)
    gains_mu = _pointwise_gains(f, (mu, h), feasible)
    gap = max(abs(a - b) for a, b in zip(gains_nu, gains_mu))
    x_nu = argmax_expected_gain(f, nu, feasible)
    x_mu = argmax_expected_gain(f, (mu, h), feasible)
    integral_nu = sum(f(x) * m for x, m in zip(nu.support, nu.mass))
    integral_mu = sum(f(x) * hx * m for x, hx, m in zip(mu.support, h.ratio, mu.mass))
    return EquivalenceReport(gap, x_nu == x_mu, x_nu, x_mu, integral_nu, integral_mu)


def kl_divergence(p: DiscreteMeasure, q: DiscreteMeasure) -> float:
    """Sum of p(x)*log(p(x)/q(x)) in nats, with 0*log(0) = 0."""
    if p.support != q.support:
        raise ValueError("measures must share an identical support")
    total = 0.0
    for x, pm, qm in zip(p.support, p.mass, q.mass):
        if pm == 0:
            continue
        if qm == 0:
            raise AbsoluteContinuityViolation(f"q({x!r}) = 0 but p({x!r}) = {pm}")
        total += float(pm) * math.log(float(pm) / float(qm))
    return total


NOT_EVALUABLE = "NotEvaluable"

KULLBACK_LEIBLER = "kullback_leibler"
SQUARED_ERROR = "squared_error"


@dataclass(frozen=True)
class DistanceSpec:
    kind: str = SQUARED_ERROR
    truth_available: bool = False

    def __post_init__(self):
        if self.kind not in (KULLBACK_LEIBLER, SQUARED_ERROR):
            raise ValueError(f"unknown distance kind: {self.kind!r}")


@dataclass(frozen=True)
class NotEvaluable:
    """Explicit refusal: one argument of the distance is not calculable."""

    reason: str


def evaluate_distance(spec: DistanceSpec, candidate, truth=None):
    """Distance between candidate and truth, or NotEvaluable when the truth
    is not available to the machine."""
    if not spec.truth_available or truth is None:
        return NotEvaluable(
            "the true function is not directly observable, so the distance "
            "has an incalculable argument"
        )
    if spec.kind == KULLBACK_LEIBLER:
        return kl_divergence(candidate, truth)
    a = [float(v) for v in candidate]
    b = [float(v) for v in truth]
    if len(a) != len(b):
        raise ValueError("candidate and truth must have equal length")
    return sum((x - y) ** 2 for x, y in zip(a, b)) / len(a)


_PROB_FLOOR = 1e-12


def likelihood_indistinguishability(
    outcomes: Sequence[int], probs_a: Sequence[float], probs_b: Sequence[float]
) -> float:
    """Log-likelihood of model A minus model B on the observed outcomes."""
    if not (len(outcomes) == len(probs_a) == len(probs_b)):
        raise ValueError("outcomes and model probabilities must have equal lengths")

    def loglik(probs):
        total = 0.0
        for y, p in zip(outcomes, probs):
            p = min(max(float(p), _PROB_FLOOR), 1.0 - _PROB_FLOOR)
            total += math.log(p) if y else math.log1p(-p)
        return total

    return loglik(probs_a) - loglik(probs_b)


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


@dataclass
class ParametricModel:
    """Feedforward Bernoulli probability model.

    Hidden layers use tanh; the output head squashes an affine combination
    through a sigmoid, so the output probability is in (0, 1) for any finite
    parameters.  Zero hidden layers gives plain logistic regression.
    """

    weights: list = field(default_factory=list)  # per layer, shape (out, in)
    biases: list = field(default_factory=list)  # per layer, shape (out,)

    @classmethod
    def create(cls, n_inputs: int, hidden: Sequence[int] = (), seed: int = 0, scale: float = 0.5):
        rng = seed_state(seed)
        weights, biases = [], []
        sizes = [n_inputs, *hidden, 1]
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            w = np.empty((fan_out, fan_in))
            for i in range(fan_out):
                for j in range(fan_in):
                    u, rng = next_u64(rng)
                    w[i, j] = ((u >> 11) * 2.0**-53 - 0.5) * 2 * scale
            weights.append(w)
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, X: np.ndarray) -> np.ndarray:
        """Bernoulli probabilities for each row of X, with activations cached."""
        probs, _ = self._forward_cached(np.asarray(X, dtype=float))
        return probs

    def _forward_cached(self, X):
        activations = [X]
        a = X
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.tanh(a @ w.T + b)
            activations.append(a)
        z = a @ self.weights[-1].T + self.biases[-1]
        return _sigmoid(z[:, 0]), activations

    def log_likelihood(self, X, y) -> tuple[float, int]:
        """Total Bernoulli log-likelihood and the number of clamped probabilities."""
        p, _ = self._forward_cached(np.asarray(X, dtype=float))
        clamped = int(np.sum((p < _PROB_FLOOR) | (p > 1 - _PROB_FLOOR)))
        p = np.clip(p, _PROB_FLOOR, 1 - _PROB_FLOOR)
        y = np.asarray(y, dtype=float)
        ll = float(np.sum(y * np.log(p) + (1 - y) * np.log1p(-p)))
        if not math.isfinite(ll):
            raise NonFiniteLikelihood("log-likelihood is not finite")
        return ll, clamped

    def gradient(self, X, y) -> tuple[list, list]:
        """Analytic gradient of the total log-likelihood via backprop."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        p, activations = self._forward_cached(X)
        p = np.clip(p, _PROB_FLOOR, 1 - _PROB_FLOOR)
        delta = (y - p)[:, None]  # d(ll)/d(z_out)
        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        for layer in range(self.n_layers - 1, -1, -1):
            a_in = activations[layer]
            grads_w[layer] = delta.T @ a_in
            grads_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer]) * (1.0 - activations[layer] ** 2)
        return grads_w, grads_b

    def copy(self) -> "ParametricModel":
        return ParametricModel([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass(frozen=True)
class FitResult:
    model: ParametricModel
    ll_trace: tuple[float, ...]
    clamp_warnings: int
    final_step_size: float


_LL_TOLERANCE = 1e-9
_MAX_HALVINGS = 30


def mle_fit(
    model: ParametricModel,
    X,
    y,
    step_size: float = 1e-3,
    iterations: int = 500,
) -> FitResult:
    """Full-batch gradient ascent on the total log-likelihood.

    The trace is non-decreasing up to 1e-9 per step: a worse step halves the
    step size and retries, up to 30 halvings.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise ValueError("data is empty")
    model = model.copy()
    ll, clamps = model.log_likelihood(X, y)
    trace = [ll]
    for _ in range(iterations):
        gw, gb = model.gradient(X, y)
        step = step_size
        for _halving in range(_MAX_HALVINGS + 1):
            trial = model.copy()
            for layer in range(trial.n_layers):
                trial.weights[layer] += step * gw[layer]
                trial.biases[layer] += step * gb[layer]
            new_ll, new_clamps = trial.log_likelihood(X, y)
            if new_ll >= ll - _LL_TOLERANCE:
                model, ll = trial, new_ll
                clamps += new_clamps
                break
            step /= 2
        else:
            break  # no acceptable step; converged as far as this rule goes
        trace.append(ll)
        step_size = step
    return FitResult(model, tuple(trace), clamps, step_size)


def _flatten(model: ParametricModel) -> np.ndarray:
    return np.concatenate([w.ravel() for w in model.weights] + [b for b in model.biases])


def _unflatten(model: ParametricModel, theta: np.ndarray) -> ParametricModel:
    out = model.copy()
    i = 0
    for layer, w in enumerate(out.weights):
        out.weights[layer] = theta[i : i + w.size].reshape(w.shape)
        i += w.size
    for layer, b in enumerate(out.biases):
        out.biases[layer] = theta[i : i + b.size]
        i += b.size
    return out


def grad_check(model: ParametricModel, X, y, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if h <= 0:
        raise ValueError("perturbation must be > 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    gw, gb = model.gradient(X, y)
    analytic = np.concatenate([g.ravel() for g in gw] + [g for g in gb])
    theta = _flatten(model)
    worst = 0.0
    for i in range(len(theta)):
        bumped = theta.copy()
        bumped[i] = theta[i] + h
        up, _ = _unflatten(model, bumped).log_likelihood(X, y)
        bumped[i] = theta[i] - h
        down, _ = _unflatten(model, bumped).log_likelihood(X, y)
        numeric = (up - down) / (2 * h)
        err = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]), abs(numeric))
        worst = max(worst, err)
    return worst
