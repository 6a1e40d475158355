"""Problem geometry: the constraint angle, offspring count and dimension.

The search happens in coordinates where e1 is the objective gradient and the
constraint normal is n = (cos theta, sin theta); only the first two
coordinates feel the constraint and the selection.  A point x is feasible
iff x . n <= delta, with delta the distance to the constraint in step-size
units.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import ConfigurationError


class Step2(NamedTuple):
    """A mutation/selection step in the (e1, e2) plane."""

    c1: float
    c2: float


@dataclass(frozen=True)
class ProblemConfig:
    """Immutable geometry of one experiment.

    theta : constraint angle in radians, strictly inside (0, pi/2)
    lam   : offspring per generation, >= 2
    dim   : search-space dimension, >= 2 (coordinates 3..dim are i.i.d.
            standard normal and only matter for the CSA path length)
    """

    theta: float
    lam: int
    dim: int = 2

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi / 2):
            raise ConfigurationError(
                f"constraint angle must lie strictly inside (0, pi/2), got {self.theta}")
        if self.lam < 2:
            raise ConfigurationError(f"offspring count must be >= 2, got {self.lam}")
        if self.dim < 2:
            raise ConfigurationError(f"dimension must be >= 2, got {self.dim}")

    @property
    def cos_theta(self) -> float:
        return math.cos(self.theta)

    @property
    def sin_theta(self) -> float:
        return math.sin(self.theta)

    @property
    def n_vec(self) -> Step2:
        """Unit normal of the constraint, pointing away from the feasible side."""
        return Step2(self.cos_theta, self.sin_theta)

    @property
    def n_perp(self) -> Step2:
        """Unit vector orthogonal to n_vec (sign fixed for trace
        reproducibility; the distribution of the perpendicular component is
        symmetric, so the choice is immaterial)."""
        return Step2(self.sin_theta, -self.cos_theta)

    def dot_n(self, c1, c2):
        """Component of (c1, c2) along the constraint normal."""
        return c1 * self.cos_theta + c2 * self.sin_theta
