"""Bodies of revolution r = f(x), wave parameters and paraxiality checks.

Profiles are polynomials in x. This keeps f, its derivatives and the
cancellation-free Taylor differences needed near the kernel diagonal exact,
and lets the compiled quadrature engine evaluate them from a coefficient
array.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError

PARAXIAL_THRESHOLD = 0.3
HARD_LIMIT = 1.0


@dataclass(frozen=True)
class Profile:
    """Axisymmetric body ``r < f(x)`` for ``x_start < x < x_end``.

    Parameters
    ----------
    coeffs : array_like
        Polynomial coefficients of ``f`` in ascending powers of ``x``.
    x_start, x_end : float
        Axial extent; ``x_end`` may be ``inf`` for a half-infinite body.
    name : str
        Short label used in metadata.
    alpha : float or None
        Half-angle slope for conical profiles, ``None`` otherwise.
    """

    coeffs: np.ndarray
    x_start: float
    x_end: float
    name: str = "profile"
    alpha: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        object.__setattr__(self, "coeffs", c)
        if not self.x_start < self.x_end:
            raise DomainError(f"need x_start < x_end, got {self.x_start}, {self.x_end}")
        if math.isinf(self.x_end) and c.size > 2:
            raise DomainError("a half-infinite profile must be linear")
        probe = np.linspace(self.x_start, min(self.x_end, self.x_start + 1.0), 9)[1:-1]
        if np.any(self.f(probe) <= 0):
            raise DomainError("profile radius must be positive inside its support")

    @property
    def is_cone(self) -> bool:
        return self.alpha is not None

    @property
    def is_compact(self) -> bool:
        return math.isfinite(self.x_end)

    def f(self, x):
        """Radius ``f(x)``."""
        return P.polyval(x, self.coeffs)

    def f_dot(self, x):
        """Slope ``df/dx``."""
        return P.polyval(x, P.polyder(self.coeffs)) if self.coeffs.size > 1 else 0.0 * np.asarray(x, float)

    def f_ddot(self, x):
        """Curvature term ``d2f/dx2``."""
        return P.polyval(x, P.polyder(self.coeffs, 2)) if self.coeffs.size > 2 else 0.0 * np.asarray(x, float)

    def contains(self, x) -> bool:
        return self.x_start <= x <= self.x_end

    def sample_points(self, n: int = 2001, x_max: float | None = None) -> np.ndarray:
        """Uniform sample of the support (half-infinite bodies cut at ``x_max``)."""
        hi = self.x_end if self.is_compact else (x_max if x_max is not None else self.x_start + 1.0)
        return np.linspace(self.x_start, hi, n)


def make_cone(alpha: float) -> Profile:
    """Half-infinite cone ``f = alpha x`` with its tip at the origin.

    Raises
    ------
    DomainError
        Unless ``0 < alpha < 1``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"cone slope must satisfy 0 < alpha < 1, got {alpha}")
    return Profile(np.array([0.0, alpha]), 0.0, math.inf, name="cone", alpha=float(alpha),
                   params={"alpha": float(alpha)})


def make_spindle(alpha: float, x1: float, x2: float) -> Profile:
    """Parabolic spindle ``f = 4 alpha (x - x1)(x2 - x) / (x2 - x1)``.

    Zero at both ends, maximal radius ``alpha (x2 - x1)`` at the midpoint,
    end slopes ``+-4 alpha`` and constant ``f'' = -8 alpha / (x2 - x1)``.
    """
    if not (math.isfinite(x1) and math.isfinite(x2)) or not x1 < x2:
        raise DomainError(f"spindle needs finite x1 < x2, got {x1}, {x2}")
    if alpha <= 0:
        raise DomainError("spindle alpha must be positive")
    s = 4.0 * alpha / (x2 - x1)
    # -s x^2 + s (x1 + x2) x - s x1 x2
    coeffs = np.array([-s * x1 * x2, s * (x1 + x2), -s])
    return Profile(coeffs, float(x1), float(x2), name="spindle",
                   params={"alpha": float(alpha), "x1": float(x1), "x2": float(x2)})


@dataclass(frozen=True)
class WaveParams:
    """Wavenumber ``k`` (limiting absorption ``Im k >= 0``) and incidence angle.

    ``theta`` is the angle between the incident direction and the body axis.
    """

    k: complex
    theta: float = 0.0

    def __post_init__(self):
        k = complex(self.k)
        object.__setattr__(self, "k", k)
        if not (math.isfinite(k.real) and math.isfinite(k.imag)) or k.real <= 0:
            raise DomainError(f"need Re k > 0, got {k}")
        if k.imag < 0:
            raise DomainError(f"need Im k >= 0, got {k}")
        if self.theta < 0 or not math.isfinite(self.theta):
            raise DomainError(f"need theta >= 0, got {self.theta}")

    @classmethod
    def from_eta(cls, k_real: float, eta: float, theta: float = 0.0) -> "WaveParams":
        """``k = k_real (1 + i eta)``."""
        return cls(complex(k_real, k_real * eta), theta)

    @property
    def eta(self) -> float:
        return self.k.imag / self.k.real

    def with_eta(self, eta: float) -> "WaveParams":
        return WaveParams.from_eta(self.k.real, eta, self.theta)


class Verdict(enum.IntEnum):
    """Ordered outcome of one paraxiality condition."""

    PASS = 0
    WARN = 1
    FAIL = 2


@dataclass(frozen=True)
class ParaxialityReport:
    """The three smallness parameters of the paraxial model and their verdicts.

    ``fock_length`` is the longitudinal Fock scale ``|f''|^(-2/3) k^(-1/3)``
    (``inf`` for zero curvature), reported for information only.
    """

    theta: float
    max_slope: float
    max_fock_angle: float
    fock_length: float
    threshold: float
    verdict: dict

    @property
    def worst(self) -> Verdict:
        return max(self.verdict.values())

    @property
    def passed(self) -> bool:
        return self.worst == Verdict.PASS

    def as_dict(self) -> dict:
        return {"theta": self.theta, "max_slope": self.max_slope,
                "max_fock_angle": self.max_fock_angle, "fock_length": self.fock_length,
                "threshold": self.threshold,
                "verdict": {k: v.name.lower() for k, v in self.verdict.items()}}


def _grade(value: float, threshold: float, hard: float) -> Verdict:
    if value <= threshold:
        return Verdict.PASS
    return Verdict.WARN if value <= hard else Verdict.FAIL


def validate_paraxial(profile: Profile, wp: WaveParams,
                      threshold: float = PARAXIAL_THRESHOLD,
                      hard: float = HARD_LIMIT) -> ParaxialityReport:
    """Check the small-angle, small-slope and small-curvature conditions.

    Each quantity is compared with ``threshold`` (warning above it) and with
    ``hard`` (failure above it). Incidence is measured by the slope
    ``tan(theta)`` of the incident direction, like the body slope ``f'``.
    The report is always produced; whether a warning blocks a run is the
    caller's choice.
    """
    x = profile.sample_points(4001)
    slope = float(np.max(np.abs(profile.f_dot(x))))
    curv = float(np.max(np.abs(profile.f_ddot(x))))
    fock = (curv / wp.k.real) ** (1.0 / 3.0)
    fock_len = math.inf if curv == 0 else curv ** (-2.0 / 3.0) * wp.k.real ** (-1.0 / 3.0)
    # incidence is graded on the slope tan(theta) of the incident direction,
    # the same measure as the body slope f'
    inc = math.tan(wp.theta) if wp.theta < 0.5 * math.pi else math.inf
    verdict = {"incidence": _grade(inc, threshold, hard),
               "slope": _grade(slope, threshold, hard),
               "curvature": _grade(fock, threshold, hard)}
    return ParaxialityReport(float(wp.theta), slope, fock, fock_len, float(threshold), verdict)
