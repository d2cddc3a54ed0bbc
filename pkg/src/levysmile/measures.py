"""Jump-size measures and their complex characteristic integrals.

Five families are supported, each with a closed form for

    char_integral(lam) = integral of (e^{i*lam*z} - 1 - i*lam*z) nu(dz)

evaluated on the measure's strip of analyticity lam = lam_r + i*lam_i.
Merton, Gumbel, Dirac and Uniform are probability measures (finite
activity, unit mass); VarianceGamma is an infinite-activity measure and
cannot be sampled directly.

Admissibility, checked by ``validate`` and enforced by every
constructor, requires three integrability conditions on nu:
min(1, z^2), e^z over |z| >= 1, and |z| over |z| >= 1 must all be
integrable.  For VarianceGamma the exponential-moment condition forces
the positive-side decay rate a > 1.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from .errors import InvalidMeasureError, StripError

EULER_GAMMA = 0.5772156649015328606

# Lanczos approximation, g = 7, 9 coefficients.  Accurate to roughly
# 1e-13 for Re(z) > 0, which covers every strip used by the pricer.
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def complex_gamma(z):
    """Gamma function for complex argument via the Lanczos series.

    Uses the reflection formula for Re(z) < 0.5.  Accepts scalars or
    numpy arrays and returns the matching shape.
    """
    z = np.asarray(z, dtype=np.complex128)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    out = np.empty_like(z)
    left = z.real < 0.5
    if np.any(left):
        zl = z[left]
        out[left] = np.pi / (np.sin(np.pi * zl) * complex_gamma(1.0 - zl))
    zr = z[~left] - 1.0
    acc = np.full_like(zr, _LANCZOS_COEFFS[0])
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc = acc + coeff / (zr + i)
    t = zr + 7.5
    out[~left] = np.sqrt(2.0 * np.pi) * t ** (zr + 0.5) * np.exp(-t) * acc
    return out[0] if scalar else out


def _as_complex(lam):
    lam = np.asarray(lam, dtype=np.complex128)
    return lam, lam.ndim == 0


class LevyMeasure(ABC):
    """Common interface for the five jump-measure families."""

    # JSON tag and sampling capability, overridden per subclass.
    # Deliberately unannotated so dataclass subclasses do not inherit
    # them as fields.
    variant = ""
    is_probability = True

    # -- admissibility ------------------------------------------------
    def __post_init__(self):
        bad = validate(self)
        if bad:
            raise InvalidMeasureError(bad)

    @classmethod
    def unchecked(cls, **kwargs):
        """Build an instance without admissibility checks.

        Intended for probing ``validate`` on parameter sets that the
        normal constructor rejects.
        """
        obj = object.__new__(cls)
        for f in fields(cls):
            object.__setattr__(obj, f.name, kwargs[f.name])
        return obj

    @abstractmethod
    def _violations(self) -> list[str]:
        ...

    # -- analytic structure -------------------------------------------
    def strip(self) -> tuple[float, float]:
        """Open interval of admissible lam_i for char_integral."""
        return (-math.inf, math.inf)

    def _check_strip(self, lam):
        lo, hi = self.strip()
        lam_i = np.atleast_1d(lam).imag
        if lam_i.min() <= lo or lam_i.max() >= hi:
            raise StripError(
                f"{self.variant}: Im(lambda) must lie in ({lo:g}, {hi:g}), "
                f"got [{lam_i.min():g}, {lam_i.max():g}]"
            )

    @abstractmethod
    def char_integral(self, lam):
        """Closed form of integral (e^{i lam z} - 1 - i lam z) nu(dz)."""

    @abstractmethod
    def exp_moment(self) -> float:
        """Closed form of integral (e^z - 1 - z) nu(dz)."""

    @abstractmethod
    def mean_jump(self) -> float:
        """integral z nu(dz)."""

    @abstractmethod
    def second_moment(self) -> float:
        """integral z^2 nu(dz), used for contour placement heuristics."""

    # -- sampling (probability measures only) --------------------------
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError(
            f"{self.variant} is not a probability measure and cannot be sampled"
        )

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        d = {"variant": self.variant}
        d.update({f.name: getattr(self, f.name) for f in fields(self)})
        return d


@dataclass(frozen=True)
class Merton(LevyMeasure):
    """Log-normal jumps: nu(dz) = N(m, s^2) density.

    char_integral(lam) = e^{i lam m - s^2 lam^2 / 2} - 1 - i lam m
    """

    m: float
    s: float

    variant = "merton"

    def _violations(self) -> list[str]:
        bad = []
        if not (math.isfinite(self.m) and math.isfinite(self.s)):
            bad.append("merton: m and s must be finite")
        elif self.s < 0:
            bad.append("merton: jump std s must be >= 0")
        return bad

    def char_integral(self, lam):
        lam, scalar = _as_complex(lam)
        val = np.exp(1j * lam * self.m - 0.5 * self.s**2 * lam * lam) - 1.0 - 1j * lam * self.m
        return val[()] if scalar else val

    def exp_moment(self) -> float:
        return math.exp(self.m + 0.5 * self.s**2) - 1.0 - self.m

    def mean_jump(self) -> float:
        return self.m

    def second_moment(self) -> float:
        return self.m**2 + self.s**2

    def sample(self, rng, size):
        return rng.normal(self.m, self.s, size)


@dataclass(frozen=True)
class Gumbel(LevyMeasure):
    """Minimum-Gumbel jumps.

    nu(dz) = (1/sigma) exp((z - m)/sigma - e^{(z - m)/sigma}) dz, i.e.
    Z = m + sigma * ln E with E standard exponential, so

    char_integral(lam) = e^{i lam m} Gamma(1 + i lam sigma) - 1 - i lam mu,
    mu = m - sigma * gamma_E.

    The gamma factor requires Re(1 + i lam sigma) > 0, i.e.
    lam_i < 1/sigma.
    """

    m: float
    sigma: float

    variant = "gumbel"

    def _violations(self) -> list[str]:
        bad = []
        if not (math.isfinite(self.m) and math.isfinite(self.sigma)):
            bad.append("gumbel: m and sigma must be finite")
        elif self.sigma <= 0:
            bad.append("gumbel: scale sigma must be > 0")
        return bad

    def strip(self):
        return (-math.inf, 1.0 / self.sigma)

    def char_integral(self, lam):
        lam, scalar = _as_complex(lam)
        self._check_strip(lam)
        mu = self.m - self.sigma * EULER_GAMMA
        val = np.exp(1j * lam * self.m) * complex_gamma(1.0 + 1j * lam * self.sigma) - 1.0 - 1j * lam * mu
        # Lanczos Gamma(1) carries rounding noise; the integral is 0 exactly.
        val = np.where(lam == 0, 0.0 + 0.0j, val)
        return val[()] if scalar else val

    def exp_moment(self) -> float:
        mu = self.m - self.sigma * EULER_GAMMA
        return math.exp(self.m) * math.gamma(1.0 + self.sigma) - 1.0 - mu

    def mean_jump(self) -> float:
        return self.m - self.sigma * EULER_GAMMA

    def second_moment(self) -> float:
        return self.mean_jump() ** 2 + (math.pi * self.sigma) ** 2 / 6.0

    def sample(self, rng, size):
        return self.m + self.sigma * np.log(rng.standard_exponential(size))


@dataclass(frozen=True)
class Dirac(LevyMeasure):
    """All jumps have the same size a: nu = delta_a."""

    a: float

    variant = "dirac"

    def _violations(self) -> list[str]:
        if not math.isfinite(self.a):
            return ["dirac: jump size a must be finite"]
        return []

    def char_integral(self, lam):
        lam, scalar = _as_complex(lam)
        val = np.exp(1j * lam * self.a) - 1.0 - 1j * lam * self.a
        return val[()] if scalar else val

    def exp_moment(self) -> float:
        return math.exp(self.a) - 1.0 - self.a

    def mean_jump(self) -> float:
        return self.a

    def second_moment(self) -> float:
        return self.a**2

    def sample(self, rng, size):
        return np.full(size, self.a)


@dataclass(frozen=True)
class VarianceGamma(LevyMeasure):
    """Two-sided exponential-decay density with a 1/|z| singularity.

    nu(dz) = e^{-a z}/z 1{z>0} dz + B e^{b z}/(-z) 1{z<0} dz

    char_integral(lam) = -ln(1 - i lam/a) - i lam/a
                         - B ln(1 + i lam/b) + i lam B/b

    Principal logarithms stay single-valued while both branch arguments
    keep a positive real part, giving the strip -a < lam_i < b.  The
    exponential-moment condition requires a > 1.
    """

    a: float
    b: float
    B: float

    variant = "variancegamma"
    is_probability = False

    def _violations(self) -> list[str]:
        bad = []
        if not all(math.isfinite(v) for v in (self.a, self.b, self.B)):
            bad.append("variancegamma: a, b, B must be finite")
            return bad
        if self.a <= 1:
            bad.append(
                "variancegamma: integral of e^z over |z|>=1 diverges unless a > 1"
            )
        if self.b <= 0:
            bad.append("variancegamma: negative-side decay b must be > 0")
        if self.B < 0:
            bad.append("variancegamma: negative-side weight B must be >= 0")
        return bad

    def strip(self):
        return (-self.a, self.b)

    def char_integral(self, lam):
        lam, scalar = _as_complex(lam)
        self._check_strip(lam)
        wa = 1j * lam / self.a
        wb = 1j * lam / self.b
        val = -np.log1p(-wa) - wa - self.B * np.log1p(wb) + self.B * wb
        return val[()] if scalar else val

    def exp_moment(self) -> float:
        return (
            -math.log(1.0 - 1.0 / self.a)
            - 1.0 / self.a
            - self.B * math.log(1.0 + 1.0 / self.b)
            + self.B / self.b
        )

    def mean_jump(self) -> float:
        return 1.0 / self.a - self.B / self.b

    def second_moment(self) -> float:
        return 1.0 / self.a**2 + self.B / self.b**2


@dataclass(frozen=True)
class Uniform(LevyMeasure):
    """Jumps uniform on [a, b].

    char_integral(lam) = (e^{i lam b} - e^{i lam a}) / (i lam (b - a))
                         - 1 - i lam (a + b)/2

    The lam -> 0 singularity is removable; below _SERIES_CUTOFF the
    value is computed from the moment series to avoid cancellation.
    """

    a: float
    b: float

    variant = "uniform"

    # |lam| * max(|a|, |b|, b - a) below which the 4-term series is used.
    _SERIES_CUTOFF = 1e-4

    def _violations(self) -> list[str]:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            return ["uniform: endpoints must be finite"]
        if not self.a < self.b:
            return ["uniform: support endpoints must satisfy a < b"]
        return []

    def char_integral(self, lam):
        lam, scalar = _as_complex(lam)
        a, b = self.a, self.b
        scale = max(abs(a), abs(b), b - a)
        small = np.abs(lam) * scale < self._SERIES_CUTOFF
        lam_safe = np.where(small, 1.0, lam)
        with np.errstate(invalid="ignore", over="ignore"):
            direct = (
                (np.exp(1j * lam_safe * b) - np.exp(1j * lam_safe * a))
                / (1j * lam_safe * (b - a))
                - 1.0
                - 1j * lam_safe * 0.5 * (a + b)
            )
        w = 1j * lam
        series = np.zeros_like(lam)
        fact = 1.0
        for n in range(2, 6):
            fact *= n
            moment = (b ** (n + 1) - a ** (n + 1)) / ((n + 1) * (b - a))
            series = series + w**n * (moment / fact)
        val = np.where(small, series, direct)
        return val[()] if scalar else val

    def exp_moment(self) -> float:
        a, b = self.a, self.b
        return (math.exp(b) - math.exp(a)) / (b - a) - 1.0 - 0.5 * (a + b)

    def mean_jump(self) -> float:
        return 0.5 * (self.a + self.b)

    def second_moment(self) -> float:
        return (self.a**2 + self.a * self.b + self.b**2) / 3.0

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)


AnyMeasure = Union[Merton, Gumbel, Dirac, VarianceGamma, Uniform]

_VARIANTS: dict[str, type] = {
    cls.variant: cls for cls in (Merton, Gumbel, Dirac, VarianceGamma, Uniform)
}
#: CLI shorthand accepted in addition to the canonical tags.
VARIANT_ALIASES = {"vg": "variancegamma"}


def validate(measure: LevyMeasure) -> list[str]:
    """Return the list of violated admissibility conditions (empty if ok)."""
    return measure._violations()


def measure_from_dict(data: dict) -> AnyMeasure:
    """Build a measure from its JSON dict form, e.g. {"variant": "merton", ...}."""
    if not isinstance(data, dict) or "variant" not in data:
        raise InvalidMeasureError(["measure JSON must be an object with a 'variant' key"])
    tag = str(data["variant"]).lower()
    tag = VARIANT_ALIASES.get(tag, tag)
    cls = _VARIANTS.get(tag)
    if cls is None:
        raise InvalidMeasureError(
            [f"unknown measure variant {data['variant']!r}; expected one of {sorted(_VARIANTS)}"]
        )
    expected = {f.name for f in fields(cls)}
    given = {k: v for k, v in data.items() if k != "variant"}
    if set(given) != expected:
        raise InvalidMeasureError(
            [f"{tag}: expected parameters {sorted(expected)}, got {sorted(given)}"]
        )
    try:
        params = {k: float(v) for k, v in given.items()}
    except (TypeError, ValueError):
        raise InvalidMeasureError([f"{tag}: parameters must be numbers"]) from None
    return cls(**params)


def measure_to_dict(measure: LevyMeasure) -> dict:
    return measure.to_dict()
