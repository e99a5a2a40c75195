"""Critical-exponent algebra for semilinear wave equations with time-dependent damping.

Closed-form exponents that organise the blow-up / global-existence landscape:

* the Strauss exponent ``p_S(n)``, positive root of ``2 + (n+1)p - (n-1)p^2 = 0``,
* the Fujita exponent ``p_F(n) = 1 + 2/n``,
* the damping-regime classification of ``(1+t)^(-beta)`` coefficients,
* the admissible window ``1.5 <= mu < 2``, ``p_S(3+mu) < p <= 2`` for the
  scaling-invariant damped equation in three space dimensions, and
* the weight exponents ``s, alpha, beta, gamma`` that drive the contraction
  argument for the null-form fixed-point iteration.

Everything here is a pure function of its arguments; safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class DampingRegime(Enum):
    """Asymptotic classes of the damping coefficient mu/(1+t)^beta."""

    OVERDAMPING = "overdamping"          # beta < -1: solution does not decay
    EFFECTIVE = "effective"              # -1 <= beta < 1: heat-like behaviour
    SCALING_INVARIANT = "scaling_invariant"  # beta = 1: depends on mu
    SCATTERING = "scattering"            # beta > 1: undamped-wave-like


@dataclass(frozen=True)
class ExponentSet:
    """Iteration exponents for one (mu, p) point.

    ``s`` is the interpolation weight exponent ``1/4 + 1/(2p)``; ``alpha``,
    ``beta`` weight the source integrand; ``gamma = alpha + beta + 4s - 1``
    controls integrability in the outgoing direction.  ``violations`` lists
    the sign conditions that fail at this point; on the admissible set it is
    empty.
    """

    mu: float
    p: float
    s: float
    alpha: float
    beta: float
    gamma: float
    admissible: bool
    violations: tuple[str, ...] = field(default=())


def gamma_quadratic(p: float, n: float) -> float:
    """Evaluate 2 + (n+1)p - (n-1)p^2, whose positive root is p_S(n)."""
    if not (p > 1.0):
        raise ValueError(f"gamma_quadratic requires p > 1, got p={p}")
    if not (n > 1.0):
        raise ValueError(f"gamma_quadratic requires n > 1, got n={n}")
    return 2.0 + (n + 1.0) * p - (n - 1.0) * p * p


def strauss_exponent(n: float) -> float:
    """Positive root p_S(n) of the Strauss quadratic.

    Accepts non-integer n (needed for shifted dimensions like n = 3 + mu).
    The root is ((n+1) + sqrt((n+1)^2 + 8(n-1))) / (2(n-1)); both terms in
    the numerator are positive, so this branch has no cancellation.
    """
    if not (n > 1.0):
        raise ValueError(f"strauss_exponent requires n > 1, got n={n}")
    b = n + 1.0
    disc = b * b + 8.0 * (n - 1.0)
    return (b + math.sqrt(disc)) / (2.0 * (n - 1.0))


def fujita_exponent(n: float) -> float:
    """Fujita exponent 1 + 2/n of the semilinear heat equation."""
    if not (n > 0.0):
        raise ValueError(f"fujita_exponent requires n > 0, got n={n}")
    return 1.0 + 2.0 / n


def critical_power_mu2(n: int) -> float:
    """Critical power max(p_F(n), p_S(n+2)) for mu = 2, where the damping
    can be transformed away into a free wave equation in n+2 dimensions."""
    if n < 1 or int(n) != n:
        raise ValueError(f"critical_power_mu2 requires integer n >= 1, got n={n}")
    return max(fujita_exponent(float(n)), strauss_exponent(float(n) + 2.0))


def damping_regime(beta_damping: float) -> DampingRegime:
    """Classify the damping exponent beta of a (1+t)^(-beta) coefficient.

    Half-open boundaries: beta = -1 is effective, beta = 1 is scaling
    invariant.
    """
    if not math.isfinite(beta_damping):
        raise ValueError(f"damping_regime requires finite beta, got {beta_damping}")
    if beta_damping < -1.0:
        return DampingRegime.OVERDAMPING
    if beta_damping < 1.0:
        return DampingRegime.EFFECTIVE
    if beta_damping == 1.0:
        return DampingRegime.SCALING_INVARIANT
    return DampingRegime.SCATTERING


def admissible(mu: float, p: float) -> bool:
    """True iff (mu, p) lies in the global-existence window
    1.5 <= mu < 2 and p_S(3+mu) < p <= 2 (both inequalities strict where shown)."""
    if not (math.isfinite(mu) and math.isfinite(p)):
        return False
    if not (1.5 <= mu < 2.0):
        return False
    return strauss_exponent(3.0 + mu) < p <= 2.0


# Condition labels reported in ExponentSet.violations.
_CONDITIONS = ("alpha>0", "beta>=0", "2-beta>0", "1-beta>=s", "gamma>2")


def iteration_exponents(mu: float, p: float) -> ExponentSet:
    """Weight exponents of the fixed-point iteration at (mu, p).

    s     = 1/4 + 1/(2p)
    alpha = mu(p-1) + (2/p)(p-1) - 3s
    beta  = -s + 2(p-1) - 1
    gamma = alpha + beta + 4s - 1

    The five sign conditions needed by the contraction argument are checked
    and the failures collected; ``admissible`` is the window test above.
    """
    if not (0.0 < mu < 2.0):
        raise ValueError(f"iteration_exponents requires 0 < mu < 2, got mu={mu}")
    if not (1.0 < p <= 2.0):
        raise ValueError(f"iteration_exponents requires 1 < p <= 2, got p={p}")
    s = 0.25 + 1.0 / (2.0 * p)
    alpha = mu * (p - 1.0) + (2.0 / p) * (p - 1.0) - 3.0 * s
    beta = -s + 2.0 * (p - 1.0) - 1.0
    gamma = alpha + beta + 4.0 * s - 1.0
    checks = (alpha > 0.0, beta >= 0.0, 2.0 - beta > 0.0, 1.0 - beta >= s, gamma > 2.0)
    violations = tuple(name for name, ok in zip(_CONDITIONS, checks) if not ok)
    return ExponentSet(
        mu=mu,
        p=p,
        s=s,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        admissible=admissible(mu, p),
        violations=violations,
    )


def alpha_regrouped(mu: float, p: float) -> float:
    """Algebraically regrouped form of alpha, kept as a cross-check:
    ((mu+2)p^2 - (mu+4)p - 2)/p - 2p + 21/4 - 3/(2p)."""
    return ((mu + 2.0) * p * p - (mu + 4.0) * p - 2.0) / p - 2.0 * p + 5.25 - 1.5 / p
