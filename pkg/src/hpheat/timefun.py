"""Time signals with analytic derivative and running integral.

Boundary data enters the semi-discrete system both directly and, for
essential flux constraints, through its time derivative.  Exact per-step
averages of the load (used by the time integrator to conserve the supplied
energy to machine precision) additionally need the running integral.  A
TimeFunction therefore bundles all three as closed-form callables instead of
leaving differentiation and quadrature to the consumer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class TimeFunction:
    """A scalar signal t -> value(t) with its derivative and running integral.

    integral(t) must return the definite integral from 0 to t, so that
    integral(0) == 0 and per-step averages follow from differences.
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    integral: Callable[[float], float]

    def average(self, t0: float, t1: float) -> float:
        """Exact mean value over [t0, t1] via the running integral."""
        if t1 <= t0:
            raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
        return (self.integral(t1) - self.integral(t0)) / (t1 - t0)


def constant(value: float) -> TimeFunction:
    return TimeFunction(
        value=lambda t: value,
        derivative=lambda t: 0.0,
        integral=lambda t: value * t,
    )


ZERO = constant(0.0)
