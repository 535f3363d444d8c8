"""
Equilibrium thermodynamics of the working substances.

Spectra are closed-form (2 or 4 levels, never diagonalized numerically).
Forces for the XX pair use the hyperbolic closed forms; the general XY
pair goes through -sum_n p_n dE_n/dL with closed-form level slopes. Both
are evaluated in a shifted-exponential form so low temperatures do not
overflow.
"""

import math
from typing import Union

from app.config import settings
from app.exceptions import DomainError
from app.schemas.substances import (
    Coordinate,
    CoupledPair,
    Level,
    LocalState,
    PairModel,
    Spectrum,
    SpinHalf,
    ThermalPoint,
)

logger = settings.get_logger(__name__)

AnySubstance = Union[SpinHalf, CoupledPair]

PAIR_LABELS = ("psi1", "psi2", "psi3", "psi4")
SPIN_LABELS = ("ground", "excited")


def _check_beta(beta: float) -> None:
    if not beta > 0.0:
        raise DomainError(
            f"Inverse temperature must be positive, got beta={beta}",
            quantity="beta",
            value=beta,
        )


def _sinh_ratio(a: float, b: float) -> float:
    """sinh(a) / (cosh(a) + cosh(b)) for a, b >= 0, overflow-free."""
    m = max(a, b)
    if a < 20.0:
        # expm1 keeps the numerator accurate for small a
        num = math.exp(-a - m) * math.expm1(2.0 * a)
    else:
        num = math.exp(a - m) - math.exp(-a - m)
    den = (
        math.exp(a - m)
        + math.exp(-a - m)
        + math.exp(b - m)
        + math.exp(-b - m)
    )
    return num / den


def _mixing_radius(s: CoupledPair) -> float:
    return math.hypot(s.B, s.J * s.gamma)


def energies(s: AnySubstance) -> tuple[float, ...]:
    """Closed-form energy levels in conventional order."""
    if isinstance(s, SpinHalf):
        return (-0.5 * s.B, 0.5 * s.B)
    if s.model is PairModel.XX:
        return (-s.B, -s.J, s.J, s.B)
    radius = _mixing_radius(s)
    return (
        s.J * s.delta - radius,
        -s.J * (1.0 + s.delta),
        s.J * (1.0 - s.delta),
        s.J * s.delta + radius,
    )


def level_slopes(s: AnySubstance, wrt: str) -> tuple[float, ...]:
    """dE_n/dB (wrt="B") or dE_n/dJ (wrt="J"), closed form."""
    if isinstance(s, SpinHalf):
        if wrt != "B":
            raise DomainError("A single spin has no coupling", quantity=wrt)
        return (-0.5, 0.5)
    if s.model is PairModel.XX:
        if wrt == "B":
            return (-1.0, 0.0, 0.0, 1.0)
        return (0.0, -1.0, 1.0, 0.0)
    radius = _mixing_radius(s)
    if wrt == "B":
        slope = s.B / radius
        return (-slope, 0.0, 0.0, slope)
    slope = s.J * s.gamma**2 / radius
    return (
        s.delta - slope,
        -(1.0 + s.delta),
        1.0 - s.delta,
        s.delta + slope,
    )


def populations(
    levels: tuple[float, ...], beta: float
) -> tuple[tuple[float, ...], float]:
    """Gibbs probabilities and ln Z for the given levels."""
    ground = min(levels)
    weights = [math.exp(-beta * (energy - ground)) for energy in levels]
    total = math.fsum(weights)
    probs = tuple(w / total for w in weights)
    return probs, -beta * ground + math.log(total)


def spectrum(s: AnySubstance) -> Spectrum:
    """Closed-form spectrum with eigenstate labels."""
    labels = SPIN_LABELS if isinstance(s, SpinHalf) else PAIR_LABELS
    return Spectrum(
        substance=s,
        levels=tuple(
            Level(label=label, energy=energy)
            for label, energy in zip(labels, energies(s))
        ),
    )


def gibbs(spec: Spectrum, beta: float) -> ThermalPoint:
    """Gibbs state p_n = exp(-beta E_n) / Z of a spectrum."""
    _check_beta(beta)
    probs, log_z = populations(spec.energies, beta)
    return ThermalPoint(
        substance=spec.substance,
        beta=beta,
        energies=spec.energies,
        probs=probs,
        log_z=log_z,
    )


def thermal_point(s: AnySubstance, beta: float) -> ThermalPoint:
    """Shortcut for gibbs(spectrum(s), beta)."""
    return gibbs(spectrum(s), beta)


def entropy(tp: ThermalPoint) -> float:
    """S = -sum p_n ln p_n with 0 ln 0 = 0 (k = 1)."""
    return -math.fsum(p * math.log(p) for p in tp.probs if p > 0.0)


def internal_energy(tp: ThermalPoint) -> float:
    """U = sum p_n E_n."""
    return math.fsum(p * e for p, e in zip(tp.probs, tp.energies))


def free_energy(s: AnySubstance, beta: float) -> float:
    """Helmholtz free energy -ln(Z) / beta."""
    _check_beta(beta)
    _, log_z = populations(energies(s), beta)
    return -log_z / beta


def single_spin_force(L: float, beta: float) -> float:
    """F = -tanh(beta / 2L) / 2L^2 for one spin with coordinate L = 1/B."""
    if not L > 0.0:
        raise DomainError(
            f"Coordinate must be positive, got L={L}", quantity="L", value=L
        )
    _check_beta(beta)
    return -math.tanh(beta / (2.0 * L)) / (2.0 * L * L)


def _pair_slope_sum(s: CoupledPair, beta: float, wrt: str) -> float:
    probs, _ = populations(energies(s), beta)
    return math.fsum(
        p * slope for p, slope in zip(probs, level_slopes(s, wrt))
    )


def generalized_force(
    s: AnySubstance, beta: float, which: Coordinate = Coordinate.X
) -> float:
    """Generalized force conjugate to X = 1/B or Y = 1/J.

    F = -sum_n p_n dE_n/dL; never positive for the XX pair and a single
    spin. For a single spin only which=X (the coordinate L) exists.
    """
    _check_beta(beta)
    which = Coordinate(which)
    if isinstance(s, SpinHalf):
        if which is Coordinate.Y:
            raise DomainError("A single spin has no coordinate Y", "Y")
        return single_spin_force(s.L, beta)

    if which is Coordinate.Y and s.J == 0.0:
        raise DomainError(
            "F_y is undefined at J = 0 (Y = 1/J diverges)",
            quantity="J",
            value=s.J,
        )
    if s.model is PairModel.XX:
        if which is Coordinate.X:
            return -s.B**2 * _sinh_ratio(beta * s.B, beta * s.J)
        return -s.J**2 * _sinh_ratio(beta * s.J, beta * s.B)
    # dE/dX = -B^2 dE/dB, dE/dY = -J^2 dE/dJ
    if which is Coordinate.X:
        return s.B**2 * _pair_slope_sum(s, beta, "B")
    return s.J**2 * _pair_slope_sum(s, beta, "J")


def force_moment(
    s: AnySubstance, beta: float, which: Coordinate = Coordinate.X
) -> float:
    """F * coordinate (F_x X or F_y Y), finite at J = 0 where it vanishes."""
    _check_beta(beta)
    which = Coordinate(which)
    if isinstance(s, SpinHalf):
        if which is Coordinate.Y:
            raise DomainError("A single spin has no coordinate Y", "Y")
        return -0.5 * s.B * math.tanh(0.5 * beta * s.B)
    if s.model is PairModel.XX:
        if which is Coordinate.X:
            return -s.B * _sinh_ratio(beta * s.B, beta * s.J)
        return -s.J * _sinh_ratio(beta * s.J, beta * s.B)
    if which is Coordinate.X:
        return s.B * _pair_slope_sum(s, beta, "B")
    return s.J * _pair_slope_sum(s, beta, "J")


def excited_weights(s: CoupledPair) -> tuple[float, ...]:
    """Weight of each pair eigenstate in one spin's excited population."""
    if s.model is PairModel.XX:
        return (0.0, 0.5, 0.5, 1.0)
    # psi1 and psi4 mix |00> and |11>; cos^2(theta) = (R - B) / 2R
    half_ratio = 0.5 * s.B / _mixing_radius(s)
    return (0.5 - half_ratio, 0.5, 0.5, 0.5 + half_ratio)


def excited_weight_rates(
    s: CoupledPair, dB: float, dJ: float
) -> tuple[float, ...]:
    """Derivatives of excited_weights along a direction (dB, dJ)."""
    if s.model is PairModel.XX or s.gamma == 0.0:
        return (0.0, 0.0, 0.0, 0.0)
    radius = _mixing_radius(s)
    d_radius = (s.B * dB + s.J * s.gamma**2 * dJ) / radius
    d_half_ratio = 0.5 * (dB * radius - s.B * d_radius) / radius**2
    return (-d_half_ratio, 0.0, 0.0, d_half_ratio)


def excited_population(s: CoupledPair, probs: tuple[float, ...]) -> float:
    """Excited-state population of one spin after tracing out its partner."""
    return math.fsum(w * p for w, p in zip(excited_weights(s), probs))


def _ground_population(s: CoupledPair, probs: tuple[float, ...]) -> float:
    return math.fsum(
        (1.0 - w) * p for w, p in zip(excited_weights(s), probs)
    )


def reduced_local_state(s: CoupledPair, beta: float) -> LocalState:
    """Reduced state of one spin, its local temperature and local force."""
    _check_beta(beta)
    if not isinstance(s, CoupledPair):
        raise DomainError("Local states need a coupled pair", "substance")
    probs, _ = populations(energies(s), beta)
    p_e = excited_population(s, probs)
    p_g = _ground_population(s, probs)
    X = s.X
    if p_e == 0.0:
        beta_loc = math.inf
    else:
        beta_loc = X * math.log(p_g / p_e)
    F_loc = -math.tanh(beta_loc / (2.0 * X)) / (2.0 * X * X)
    return LocalState(
        p_e=min(max(p_e, 0.0), 1.0), beta_loc=beta_loc, F_loc=F_loc
    )


def local_energy(s: CoupledPair, beta: float) -> float:
    """Internal energy of one spin in its local levels +-B/2."""
    _check_beta(beta)
    probs, _ = populations(energies(s), beta)
    return s.B * (excited_population(s, probs) - 0.5)
