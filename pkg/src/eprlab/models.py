"""Correlation laws for a polarization pair, in closed form and by quadrature.

All raw integrals over one period are divided by ``4*pi`` (twice the integral of
``cos^2 + sin^2``), so Furry's mixed-pair integral and the phase-linked integral
land on the same scale and can be compared on one plot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidModelError
from .polarization import Angle, _as_radians
from .quadrature import DEFAULT_QUADRATURE, QuadratureSettings, integrate, integrate_period

TWO_PI = 2.0 * math.pi

__all__ = [
    "ComplexField",
    "SetupOffset",
    "LhvModelSpec",
    "JointTable",
    "PhaseLinkedIntegral",
    "phase_linked_probability",
    "phase_linked_integral",
    "kracklauer_normalized",
    "furry_probability",
    "factorized_correlation",
    "lhv_correlation",
    "lhv_coincidence_probability",
    "default_lhv_spec",
    "joint_outcome_table",
    "model_probability",
    "model_correlation",
    "MODEL_NAMES",
]


@dataclass(frozen=True)
class ComplexField:
    """Photon field with a transversal (real) and a kinetic (imaginary) component."""

    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise InvalidModelError("complex field components must be finite")

    def __complex__(self):
        return complex(self.re, self.im)

    @classmethod
    def first_photon(cls, x: float, alpha: float) -> "ComplexField":
        return cls(math.cos(x - alpha), math.sin(x - alpha))

    @classmethod
    def second_photon(cls, x: float, beta: float, phi0: float = 0.0) -> "ComplexField":
        # sin and cos swapped relative to the first photon: a quarter-period shift
        return cls(math.sin(x - beta + phi0), math.cos(x - beta + phi0))


@dataclass(frozen=True)
class SetupOffset:
    """Phase offset of the setup, in radians.

    This is a phase with period ``2*pi``; it is not folded like a polarizer axis.
    ``0`` counts transmissions as the coincidence event, ``pi/2`` absorptions.
    """

    phi0: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.phi0):
            raise InvalidModelError(f"setup offset must be finite, got {self.phi0!r}")

    @classmethod
    def transmission(cls) -> "SetupOffset":
        return cls(0.0)

    @classmethod
    def absorption(cls) -> "SetupOffset":
        return cls(math.pi / 2)


def _phi0(offset) -> float:
    if offset is None:
        return 0.0
    return offset.phi0 if isinstance(offset, SetupOffset) else float(offset)


def phase_linked_probability(alpha: Angle | float, beta: Angle | float,
                             offset: SetupOffset | float = 0.0) -> float:
    """Average coincidence probability ``0.5 * sin^2(beta - alpha - phi0)``."""
    s = math.sin(_as_radians(beta) - _as_radians(alpha) - _phi0(offset))
    return 0.5 * s * s


@dataclass(frozen=True)
class PhaseLinkedIntegral:
    """Result of the interference integral.

    ``real`` is the normalized integral of the squared real part of the product
    field and is the correlation probability. ``imag`` is the same quantity for
    the imaginary part; it is reported as a diagnostic only. ``raw`` is the
    plain complex integral of the product, unnormalized.
    """

    real: float
    imag: float
    raw: complex


def _normalizer(q: QuadratureSettings) -> float:
    return 2.0 * integrate_period(lambda x: np.cos(x) ** 2 + np.sin(x) ** 2, q)


def phase_linked_integral(alpha: Angle | float, beta: Angle | float,
                          offset: SetupOffset | float = 0.0,
                          q: QuadratureSettings = DEFAULT_QUADRATURE) -> PhaseLinkedIntegral:
    a, b, p = _as_radians(alpha), _as_radians(beta), _phi0(offset)

    def product(x):
        first = np.cos(x - a) + 1j * np.sin(x - a)
        second = np.sin(x - b + p) + 1j * np.cos(x - b + p)
        return first * second

    x_re = integrate_period(lambda x: product(x).real ** 2, q)
    x_im = integrate_period(lambda x: product(x).imag ** 2, q)
    raw = complex(integrate_period(product, q))
    norm = _normalizer(q)
    return PhaseLinkedIntegral(float(x_re / norm), float(x_im / norm), raw)


def kracklauer_normalized(phi: float, q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Normalized ratio of the squared sine-difference integral, ``0.5 * sin^2(phi)``."""
    num = integrate_period(lambda x: (np.cos(x) * np.sin(x - phi) - np.sin(x) * np.cos(x - phi)) ** 2, q)
    return float(num / _normalizer(q))


def furry_probability(alpha: Angle | float, beta: Angle | float,
                      q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Mixed-pair coincidence integral of two independent Malus factors, normalized by 4*pi."""
    d = _as_radians(alpha) - _as_radians(beta)
    num = integrate_period(lambda x: np.cos(x) ** 2 * np.cos(x - d) ** 2, q)
    return float(num / _normalizer(q))


def factorized_correlation(alpha: Angle | float, beta: Angle | float,
                           q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """E(a, b) when each photon is transmitted independently with Malus probability
    about a shared uniform polarization angle."""
    a, b = _as_radians(alpha), _as_radians(beta)
    val = integrate_period(lambda x: (2 * np.cos(x - a) ** 2 - 1) * (2 * np.cos(x - b) ** 2 - 1), q)
    return float(val / TWO_PI)


def factorized_coincidence_probability(alpha: Angle | float, beta: Angle | float,
                                       q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """P(+,+) for per-photon Malus sampling, averaged over a uniform shared angle."""
    a, b = _as_radians(alpha), _as_radians(beta)
    val = integrate_period(lambda x: np.cos(x - a) ** 2 * np.cos(x - b) ** 2, q)
    return float(val / TWO_PI)


# -- factorizable hidden-variable model --------------------------------------------

def _sign_response(setting: float, lam: np.ndarray) -> np.ndarray:
    return np.where(np.cos(2.0 * (setting - lam)) >= 0.0, 1.0, -1.0)


def _uniform_density(lam: np.ndarray) -> np.ndarray:
    return np.full(np.shape(lam), 1.0 / TWO_PI)


@dataclass(frozen=True)
class LhvModelSpec:
    """Deterministic local responses plus a distribution for the hidden variable.

    Responses are vectorized callables ``(setting, lam_array) -> array of +-1``.
    ``density`` is a vectorized pdf on ``[0, 2*pi)``; ``density_periodic`` picks the
    quadrature rule used to check its normalization.
    """

    response_a: Callable[[float, np.ndarray], np.ndarray] = _sign_response
    response_b: Callable[[float, np.ndarray], np.ndarray] = field(
        default=lambda s, lam: -_sign_response(s, lam))
    density: Callable[[np.ndarray], np.ndarray] = _uniform_density
    density_periodic: bool = True
    name: str = "doubled-angle-sign"


def default_lhv_spec() -> LhvModelSpec:
    """``A = sign(cos 2(a - lam))``, ``B = -sign(cos 2(b - lam))``, uniform lam."""
    return LhvModelSpec()


def _jumps(fn: Callable[[np.ndarray], np.ndarray], n: int) -> list[float]:
    """Locations in (0, 2*pi) where a piecewise-constant ``fn`` changes value."""
    grid = np.linspace(0.0, TWO_PI, n + 1)
    vals = fn(grid)
    out = []
    for i in np.nonzero(vals[1:] != vals[:-1])[0]:
        lo, hi = grid[i], grid[i + 1]
        left = vals[i]
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if fn(np.array([mid]))[0] == left:
                lo = mid
            else:
                hi = mid
        out.append(0.5 * (lo + hi))
    return out


_GL_PIECE = 16


def _lhv_integral(a: float, b: float, spec: LhvModelSpec, q: QuadratureSettings,
                  combine: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    check_rule = "trapezoid-periodic" if spec.density_periodic else "gauss-legendre"
    mass = integrate_period(spec.density, QuadratureSettings(q.node_count, check_rule))
    if not math.isfinite(mass) or abs(mass - 1.0) > 1e-6:
        raise InvalidModelError(f"hidden-variable density integrates to {mass!r}, not 1")

    def resp_a(lam):
        return np.asarray(spec.response_a(a, lam), dtype=float)

    def resp_b(lam):
        return np.asarray(spec.response_b(b, lam), dtype=float)

    probe = np.linspace(0.0, TWO_PI, q.node_count, endpoint=False)
    for r in (resp_a(probe), resp_b(probe)):
        if not np.all(np.abs(r) == 1.0):
            raise InvalidModelError("hidden-variable responses must take values in {-1, +1}")

    # the integrand is piecewise constant times the density: split at every jump
    cuts = sorted(set([0.0, TWO_PI] + _jumps(resp_a, q.node_count) + _jumps(resp_b, q.node_count)))
    piece = QuadratureSettings(_GL_PIECE, "gauss-legendre")
    weighted, masses = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        mid = np.array([0.5 * (lo + hi)])
        c = float(combine(resp_a(mid), resp_b(mid))[0])
        m = float(integrate(spec.density, lo, hi, piece))
        weighted.append(c * m)
        masses.append(m)
    # dividing by the summed piece mass keeps constant integrands exact
    return math.fsum(weighted) / math.fsum(masses)


def lhv_correlation(a: Angle | float, b: Angle | float, spec: LhvModelSpec | None = None,
                    q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Factorizable correlation: integral of ``rho(lam) * A(a, lam) * B(b, lam)``."""
    spec = spec or default_lhv_spec()
    val = _lhv_integral(_as_radians(a), _as_radians(b), spec, q, lambda ra, rb: ra * rb)
    return float(min(1.0, max(-1.0, val)))


def lhv_coincidence_probability(a: Angle | float, b: Angle | float,
                                spec: LhvModelSpec | None = None,
                                q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Probability that both stations report +1 under the hidden-variable model."""
    spec = spec or default_lhv_spec()
    return _lhv_integral(_as_radians(a), _as_radians(b), spec, q,
                         lambda ra, rb: (1 + ra) * (1 + rb) / 4)


# -- joint outcome table -------------------------------------------------------------

@dataclass(frozen=True)
class JointTable:
    """Outcome probabilities for one setting pair, keyed by station outcomes."""

    pp: float
    pm: float
    mp: float
    mm: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.pp, self.pm, self.mp, self.mm)

    @property
    def correlation(self) -> float:
        return self.pp + self.mm - self.pm - self.mp

    @property
    def marginal_1(self) -> float:
        return self.pp + self.pm

    @property
    def marginal_2(self) -> float:
        return self.pp + self.mp


def joint_outcome_table(alpha: Angle | float, beta: Angle | float,
                        offset: SetupOffset | float = 0.0) -> JointTable:
    """Symmetric, no-signaling completion of the phase-linked coincidence entry."""
    d = _as_radians(beta) - _as_radians(alpha) - _phi0(offset)
    s2 = math.sin(d) ** 2
    c2 = 1.0 - s2
    return JointTable(0.5 * s2, 0.5 * c2, 0.5 * c2, 0.5 * s2)


# -- uniform access for curves and CHSH --------------------------------------------

MODEL_NAMES = ("single-photon", "phase-linked", "furry", "lhv")


def model_probability(model: str, alpha: float, beta: float, offset: float = 0.0,
                      q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Coincidence-type probability of ``model`` at settings ``(alpha, beta)``."""
    from .polarization import conditional_probability

    if model == "single-photon":
        return conditional_probability(alpha, beta)
    if model == "phase-linked":
        return phase_linked_probability(alpha, beta, offset)
    if model == "furry":
        return furry_probability(alpha, beta, q)
    if model == "lhv":
        return lhv_coincidence_probability(alpha, beta, q=q)
    raise InvalidModelError(f"unknown model {model!r}; expected one of {MODEL_NAMES}")


def model_correlation(model: str, alpha: float, beta: float, offset: float = 0.0,
                      q: QuadratureSettings = DEFAULT_QUADRATURE) -> float:
    """Correlation ``E(a, b)`` of a two-outcome model."""
    if model == "phase-linked":
        return joint_outcome_table(alpha, beta, offset).correlation
    if model in ("furry", "factorized-local"):
        return factorized_correlation(alpha, beta, q)
    if model == "lhv":
        return lhv_correlation(alpha, beta, q=q)
    raise InvalidModelError(f"model {model!r} has no two-station correlation")
