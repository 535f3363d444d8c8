"""
Quasi-static processes.

ProcessBuilder lays out isobars (by beta continuation), adiabats,
isochores and isotherms as densely sampled Paths. PathIntegrator computes
heat sum_n E_n dp_n, work -sum_n p_n dE_n and the local heat of one spin
along a Path by quadrature over the path variable, evaluating the path at
arbitrary points (isobars are re-solved from the nearest stored sample).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

from app.config import settings
from app.exceptions import DomainError, InfeasibleForce
from app.schemas.processes import (
    HeatWork,
    HeldQuantity,
    Path,
    PathKind,
    PathVariable,
)
from app.schemas.substances import (
    Coordinate,
    CoupledPair,
    SpinHalf,
    ThermalPoint,
    Tolerances,
)
from app.services.numerics import central_diff, find_root, integrate
from app.services.substance import (
    energies,
    entropy,
    excited_weight_rates,
    excited_weights,
    generalized_force,
    internal_energy,
    level_slopes,
    populations,
    thermal_point,
)

logger = settings.get_logger(__name__)

AnySubstance = Union[SpinHalf, CoupledPair]

# First outward step, in ln(beta), of the nearest-root search
INITIAL_LOG_STEP = 1e-3
# Points of the log-spaced beta scan used without a continuation seed
SCAN_POINTS = 600
# A seed whose force residual is this small relative to the target is a root
SEED_ACCEPT_REL = 1e-10
# Quadrature nodes this close to a stored isobar sample reuse its beta
SAMPLE_MATCH_REL = 1e-12


def substance_on_coordinate(
    template: AnySubstance, which: Coordinate, value: float
) -> AnySubstance:
    """The template with X (B = 1/value) or Y (J = 1/value) replaced."""
    if not value > 0.0:
        raise DomainError(
            f"Coordinate {Coordinate(which).value} must be positive, "
            f"got {value}",
            quantity=Coordinate(which).value,
            value=value,
        )
    if Coordinate(which) is Coordinate.X:
        return template.with_params(B=1.0 / value)
    if isinstance(template, SpinHalf):
        raise DomainError("A single spin has no coordinate Y", "Y")
    return template.with_params(J=1.0 / value)


def coordinate_of(s: AnySubstance, which: Coordinate) -> float:
    return s.X if Coordinate(which) is Coordinate.X else s.Y


def scale_point(tp: ThermalPoint, k: float) -> ThermalPoint:
    """The adiabatic image of tp: levels divided by k, beta multiplied by k."""
    s = tp.substance
    return thermal_point(
        s.with_params(B=s.B / k, J=getattr(s, "J", 0.0) / k), tp.beta * k
    )


def _linspace(start: float, end: float, n: int) -> tuple[float, ...]:
    step = (end - start) / (n - 1)
    grid = [start + i * step for i in range(n - 1)]
    grid.append(end)
    return tuple(grid)


class ProcessBuilder:
    """Builds quasi-static paths and solves the isobar constraint for beta."""

    def __init__(
        self,
        tol: Optional[Tolerances] = None,
        n_samples: Optional[int] = None,
    ):
        self.tol = tol or settings.default_tolerances()
        self.n_samples = n_samples or settings.PATH_SAMPLES
        self.logger = logger

    def _samples(self, n_samples: Optional[int]) -> int:
        n = n_samples or self.n_samples
        if n < 33:
            raise DomainError(
                f"Paths need at least 33 samples, got {n}",
                quantity="n_samples",
                value=n,
            )
        return n

    # ------------------------------------------------------------------
    # Isobar constraint
    # ------------------------------------------------------------------

    def _force_residual(
        self, s: AnySubstance, which: Coordinate, F_target: float
    ) -> Callable[[float], float]:
        return lambda beta: generalized_force(s, beta, which) - F_target

    def force_supremum(self, s: AnySubstance, which: Coordinate) -> float:
        """sup over beta of |F_which|, from a log-spaced scan."""
        log_lo = math.log(settings.BETA_MIN)
        log_hi = math.log(settings.BETA_MAX)
        step = (log_hi - log_lo) / (SCAN_POINTS - 1)
        return max(
            abs(generalized_force(s, math.exp(log_lo + i * step), which))
            for i in range(SCAN_POINTS)
        )

    def _infeasible(
        self, s: AnySubstance, which: Coordinate, F_target: float
    ) -> InfeasibleForce:
        supremum = self.force_supremum(s, which)
        params = {"B": s.B, "J": getattr(s, "J", None), "which": which.value}
        return InfeasibleForce(
            f"F_{which.value.lower()}={F_target:.6g} is not attainable at "
            f"B={s.B:.6g}, J={params['J']} (sup |F| = {supremum:.6g})",
            target=F_target,
            supremum=supremum,
            parameters=params,
        )

    def _check_target(self, F_target: float) -> None:
        if not F_target < 0.0:
            raise InfeasibleForce(
                f"Generalized forces are strictly negative for beta > 0; "
                f"target {F_target} cannot be held",
                target=F_target,
            )

    def _outward_brackets(
        self, g: Callable[[float], float], seed: float
    ) -> list[tuple[float, float]]:
        """Sign-change brackets nearest to the seed, searched in ln(beta)."""
        # Bracket ends are the betas g was evaluated at, seed included
        lo_limit, hi_limit = settings.BETA_MIN, settings.BETA_MAX
        beta_lo = beta_hi = seed
        g_lo = g_hi = g(seed)
        step = INITIAL_LOG_STEP
        while beta_lo > lo_limit or beta_hi < hi_limit:
            brackets = []
            if beta_hi < hi_limit:
                upper = min(beta_hi * math.exp(step), hi_limit)
                g_upper = g(upper)
                if g_upper * g_hi <= 0.0:
                    brackets.append((beta_hi, upper))
                beta_hi, g_hi = upper, g_upper
            if beta_lo > lo_limit:
                lower = max(beta_lo * math.exp(-step), lo_limit)
                g_lower = g(lower)
                if g_lower * g_lo <= 0.0:
                    brackets.append((lower, beta_lo))
                beta_lo, g_lo = lower, g_lower
            if brackets:
                return brackets
            step *= 2.0
        return []

    def solve_beta_on_isobar(
        self,
        template: AnySubstance,
        which: Coordinate,
        F_target: float,
        varied_param_value: float,
        beta_seed: float,
    ) -> float:
        """Beta holding F_which = F_target at the given coordinate value.

        Returns the root nearest (in ln beta) to beta_seed, i.e. the root on
        the seed's solution branch.

        Raises:
            InfeasibleForce: no positive beta attains F_target here.
        """
        which = Coordinate(which)
        self._check_target(F_target)
        if not beta_seed > 0.0:
            raise DomainError(
                f"beta_seed must be positive, got {beta_seed}",
                quantity="beta_seed",
                value=beta_seed,
            )
        s = substance_on_coordinate(template, which, varied_param_value)
        g = self._force_residual(s, which, F_target)
        if abs(g(beta_seed)) <= SEED_ACCEPT_REL * abs(F_target):
            return beta_seed

        brackets = self._outward_brackets(g, beta_seed)
        if not brackets:
            raise self._infeasible(s, which, F_target)
        roots = [find_root(g, lo, hi, self.tol) for lo, hi in brackets]
        return min(roots, key=lambda beta: abs(math.log(beta / beta_seed)))

    def solve_anchor_beta(
        self, s: AnySubstance, which: Coordinate, F_target: float
    ) -> float:
        """Beta attaining F_target without a seed: the hottest root.

        Scans ln(beta) upward from BETA_MIN; forces vanish as beta -> 0, so
        the first sign change is the high-temperature branch.
        """
        which = Coordinate(which)
        self._check_target(F_target)
        g = self._force_residual(s, which, F_target)
        log_lo = math.log(settings.BETA_MIN)
        log_hi = math.log(settings.BETA_MAX)
        step = (log_hi - log_lo) / (SCAN_POINTS - 1)
        previous_beta = math.exp(log_lo)
        previous = g(previous_beta)
        for i in range(1, SCAN_POINTS):
            beta = math.exp(log_lo + i * step)
            current = g(beta)
            if previous * current <= 0.0:
                return find_root(g, previous_beta, beta, self.tol)
            previous_beta, previous = beta, current
        raise self._infeasible(s, which, F_target)

    # ------------------------------------------------------------------
    # Paths
    # ------------------------------------------------------------------

    def build_isobar(
        self,
        s0: ThermalPoint,
        which: Coordinate,
        varied_end: float,
        n_samples: Optional[int] = None,
    ) -> Path:
        """Isobar from s0 to coordinate value varied_end at constant F_which.

        which=X holds J and moves B = 1/X; which=Y holds B and moves J = 1/Y.
        Each sample is solved from the previous sample's beta.

        Raises:
            InfeasibleForce: the held force cannot be attained somewhere on
                the way, or the solution branch is lost between samples.
        """
        which = Coordinate(which)
        n = self._samples(n_samples)
        template = s0.substance
        start = coordinate_of(template, which)
        held = generalized_force(template, s0.beta, which)
        if not varied_end > 0.0:
            raise DomainError(
                f"Isobar end coordinate must be positive, got {varied_end}",
                quantity=which.value,
                value=varied_end,
            )
        grid = _linspace(start, varied_end, n)

        points = [s0]
        beta = s0.beta
        for value in grid[1:]:
            if value == start:
                points.append(s0)
                continue
            solved = self.solve_beta_on_isobar(
                template, which, held, value, beta
            )
            if max(solved / beta, beta / solved) > settings.MAX_BETA_JUMP:
                self.logger.warning(
                    "Isobar F_%s=%.6g lost its branch at %s=%.6g "
                    "(beta %.6g -> %.6g)",
                    which.value.lower(), held, which.value, value,
                    beta, solved,
                )
                raise InfeasibleForce(
                    f"Isobar F_{which.value.lower()}={held:.6g} lost its "
                    f"solution branch at {which.value}={value:.6g}",
                    target=held,
                    parameters={which.value: value, "beta": beta},
                )
            beta = solved
            points.append(
                thermal_point(
                    substance_on_coordinate(template, which, value), beta
                )
            )

        self.logger.debug(
            "Built isobar F_%s=%.6g over %s in [%.6g, %.6g]",
            which.value.lower(), held, which.value, start, varied_end,
        )
        return Path(
            kind=(
                PathKind.ISOBAR_X
                if which is Coordinate.X
                else PathKind.ISOBAR_Y
            ),
            variable=PathVariable(which.value),
            grid=grid,
            points=tuple(points),
            held=HeldQuantity(name=f"F_{which.value.lower()}", value=held),
        )

    def build_adiabat(
        self,
        s0: ThermalPoint,
        lam: float,
        n_samples: Optional[int] = None,
    ) -> Path:
        """Adiabat scaling every level by 1/s and beta by s, s from 1 to lam.

        All populations, hence the entropy, are unchanged.
        """
        if not lam > 0.0:
            raise DomainError(
                f"Adiabat scale must be positive, got {lam}",
                quantity="lambda",
                value=lam,
            )
        n = self._samples(n_samples)
        grid = _linspace(1.0, lam, n)
        points = [s0] + [scale_point(s0, k) for k in grid[1:]]
        return Path(
            kind=PathKind.ADIABAT,
            variable=PathVariable.SCALE,
            grid=grid,
            points=tuple(points),
            held=HeldQuantity(name="entropy", value=entropy(s0)),
        )

    def build_isochore(
        self,
        s0: ThermalPoint,
        beta_end: float,
        n_samples: Optional[int] = None,
    ) -> Path:
        """Fixed levels, beta moving from s0.beta to beta_end."""
        if not beta_end > 0.0:
            raise DomainError(
                f"beta_end must be positive, got {beta_end}",
                quantity="beta",
                value=beta_end,
            )
        n = self._samples(n_samples)
        grid = _linspace(s0.beta, beta_end, n)
        points = [s0] + [thermal_point(s0.substance, b) for b in grid[1:]]
        return Path(
            kind=PathKind.ISOCHORE,
            variable=PathVariable.BETA,
            grid=grid,
            points=tuple(points),
            held=HeldQuantity(name="levels"),
        )

    def build_isotherm(
        self,
        s0: ThermalPoint,
        varied: PathVariable,
        end: float,
        n_samples: Optional[int] = None,
    ) -> Path:
        """Fixed beta, B (varied=B) or J (varied=J) moving to end."""
        varied = PathVariable(varied)
        if varied not in (PathVariable.B, PathVariable.J):
            raise DomainError(
                f"Isotherms vary B or J, not {varied.value}",
                quantity="varied",
            )
        if varied is PathVariable.J and not isinstance(
            s0.substance, CoupledPair
        ):
            raise DomainError("A single spin has no coupling to vary", "J")
        if not end > 0.0:
            raise DomainError(
                f"Isotherm end value must be positive, got {end}",
                quantity=varied.value,
                value=end,
            )
        n = self._samples(n_samples)
        s = s0.substance
        start = s.B if varied is PathVariable.B else s.J
        grid = _linspace(start, end, n)
        points = [s0] + [
            thermal_point(s.with_params(**{varied.value: v}), s0.beta)
            for v in grid[1:]
        ]
        return Path(
            kind=PathKind.ISOTHERM,
            variable=varied,
            grid=grid,
            points=tuple(points),
            held=HeldQuantity(name="beta", value=s0.beta),
        )


@dataclass(frozen=True)
class _Snapshot:
    """State of a path at one value of its variable, with its rates."""

    substance: AnySubstance
    beta: float
    levels: tuple[float, ...]
    probs: tuple[float, ...]
    level_rates: tuple[float, ...]
    prob_rates: tuple[float, ...]
    dB: float
    dJ: float


class _PathCursor:
    """Evaluates a Path at arbitrary points of its variable."""

    def __init__(self, path: Path, builder: ProcessBuilder, tol: Tolerances):
        self.path = path
        self.builder = builder
        self.tol = tol
        self.start = path.start
        self._cache: dict[float, _Snapshot] = {}
        first = path.grid[0]
        if path.variable is PathVariable.SCALE:
            # Grid values are scale factors relative to the unscaled state
            self.base_B = self.start.substance.B * first
            self.base_J = getattr(self.start.substance, "J", 0.0) * first
            self.base_beta = self.start.beta / first

    def _substance(self, u: float) -> AnySubstance:
        s = self.start.substance
        variable = self.path.variable
        if variable is PathVariable.X:
            return substance_on_coordinate(s, Coordinate.X, u)
        if variable is PathVariable.Y:
            return substance_on_coordinate(s, Coordinate.Y, u)
        if variable is PathVariable.SCALE:
            return s.with_params(B=self.base_B / u, J=self.base_J / u)
        if variable is PathVariable.BETA:
            return s
        return s.with_params(**{variable.value: u})

    def _parameter_rates(
        self, s: AnySubstance, u: float
    ) -> tuple[float, float]:
        """(dB/du, dJ/du) along the path."""
        variable = self.path.variable
        J = getattr(s, "J", 0.0)
        if variable is PathVariable.X:
            return -s.B**2, 0.0
        if variable is PathVariable.Y:
            return 0.0, -(J**2)
        if variable is PathVariable.SCALE:
            return -s.B / u, -J / u
        if variable is PathVariable.B:
            return 1.0, 0.0
        if variable is PathVariable.J:
            return 0.0, 1.0
        return 0.0, 0.0

    def _nearest_sample(self, u: float) -> ThermalPoint:
        grid = self.path.grid
        span = grid[-1] - grid[0]
        if span == 0.0:
            return self.path.points[0]
        index = round((u - grid[0]) / span * (len(grid) - 1))
        return self.path.points[min(max(index, 0), len(grid) - 1)]

    def _isobar_beta(self, s: AnySubstance, u: float) -> tuple[float, float]:
        """Beta on the isobar at u and d(beta)/du from the force constraint."""
        which = Coordinate(self.path.variable.value)
        target = self.path.held.value
        seed = self._nearest_sample(u)
        sample_u = coordinate_of(seed.substance, which)
        if abs(sample_u - u) <= SAMPLE_MATCH_REL * abs(u):
            beta = seed.beta
        else:
            beta = self.builder.solve_beta_on_isobar(
                self.start.substance, which, target, u, seed.beta
            )
        template = self.start.substance
        dF_du = central_diff(
            lambda v: generalized_force(
                substance_on_coordinate(template, which, v), beta, which
            ),
            u,
            self.tol,
        )
        dF_dbeta = central_diff(
            lambda b: generalized_force(s, b, which), beta, self.tol
        )
        return beta, -dF_du / dF_dbeta

    def snapshot(self, u: float) -> _Snapshot:
        cached = self._cache.get(u)
        if cached is not None:
            return cached

        s = self._substance(u)
        variable = self.path.variable
        if variable in (PathVariable.X, PathVariable.Y):
            beta, beta_rate = self._isobar_beta(s, u)
        elif variable is PathVariable.SCALE:
            beta, beta_rate = self.base_beta * u, self.base_beta
        elif variable is PathVariable.BETA:
            beta, beta_rate = u, 1.0
        else:
            beta, beta_rate = self.start.beta, 0.0

        dB, dJ = self._parameter_rates(s, u)
        levels = energies(s)
        probs, _ = populations(levels, beta)
        slopes_B = level_slopes(s, "B")
        if isinstance(s, CoupledPair):
            slopes_J = level_slopes(s, "J")
        else:
            slopes_J = (0.0,) * len(levels)
        level_rates = tuple(
            dB * sb + dJ * sj for sb, sj in zip(slopes_B, slopes_J)
        )
        # dp_n = -p_n (g_n - <g>), g_n = d(beta E_n)
        exponent_rates = [
            beta_rate * e + beta * de for e, de in zip(levels, level_rates)
        ]
        mean_rate = math.fsum(p * g for p, g in zip(probs, exponent_rates))
        prob_rates = tuple(
            -p * (g - mean_rate) for p, g in zip(probs, exponent_rates)
        )
        snap = _Snapshot(
            substance=s,
            beta=beta,
            levels=levels,
            probs=probs,
            level_rates=level_rates,
            prob_rates=prob_rates,
            dB=dB,
            dJ=dJ,
        )
        self._cache[u] = snap
        return snap

    def energy_scale(self) -> float:
        return max(
            abs(e)
            for point in (self.path.start, self.path.end)
            for e in point.energies
        )


class PathIntegrator:
    """Heat, work and local heat along a Path by quadrature."""

    def __init__(
        self,
        tol: Optional[Tolerances] = None,
        builder: Optional[ProcessBuilder] = None,
    ):
        self.tol = tol or settings.default_tolerances()
        self.builder = builder or ProcessBuilder(self.tol)
        self.logger = logger

    def _cursor(self, path: Path) -> _PathCursor:
        return _PathCursor(path, self.builder, self.tol)

    def _integrate(
        self, cursor: _PathCursor, integrand: Callable[[_Snapshot], float]
    ) -> float:
        grid = cursor.path.grid
        return integrate(
            lambda u: integrand(cursor.snapshot(u)),
            grid[0],
            grid[-1],
            self.tol,
            scale=cursor.energy_scale(),
        )

    @staticmethod
    def _heat_rate(snap: _Snapshot) -> float:
        return math.fsum(
            e * dp for e, dp in zip(snap.levels, snap.prob_rates)
        )

    @staticmethod
    def _work_rate(snap: _Snapshot) -> float:
        return -math.fsum(
            p * de for p, de in zip(snap.probs, snap.level_rates)
        )

    @staticmethod
    def _local_heat_rate(snap: _Snapshot) -> float:
        s = snap.substance
        weights = excited_weights(s)
        weight_rates = excited_weight_rates(s, snap.dB, snap.dJ)
        dp_e = math.fsum(
            w * dp for w, dp in zip(weights, snap.prob_rates)
        ) + math.fsum(dw * p for dw, p in zip(weight_rates, snap.probs))
        # Local levels are -B/2 and +B/2
        return s.B * dp_e

    def heat_along(self, path: Path) -> float:
        """Heat absorbed, the quadrature of sum_n E_n dp_n."""
        return self._integrate(self._cursor(path), self._heat_rate)

    def work_along(self, path: Path) -> float:
        """Work done by the substance, -integral of sum_n p_n dE_n."""
        return self._integrate(self._cursor(path), self._work_rate)

    def local_heat_along(self, path: Path) -> float:
        """Heat absorbed by one spin of a pair in its local levels +-B/2.

        Raises:
            DomainError: the path's substance is a single spin.
        """
        if not isinstance(path.start.substance, CoupledPair):
            raise DomainError(
                "Local heat needs a coupled pair as working substance",
                quantity="substance",
            )
        return self._integrate(self._cursor(path), self._local_heat_rate)

    def heat_work_along(self, path: Path, local: bool = False) -> HeatWork:
        """Heat, work and energy change, sharing one set of path evaluations.

        With local=True the local heat of one spin is integrated as well.
        """
        cursor = self._cursor(path)
        Q = self._integrate(cursor, self._heat_rate)
        W_by = self._integrate(cursor, self._work_rate)
        dU = internal_energy(path.end) - internal_energy(path.start)
        Q_loc = None
        if local:
            if not isinstance(path.start.substance, CoupledPair):
                raise DomainError(
                    "Local heat needs a coupled pair as working substance",
                    quantity="substance",
                )
            Q_loc = self._integrate(cursor, self._local_heat_rate)
        return HeatWork(Q=Q, W_by=W_by, dU=dU, Q_loc=Q_loc)


process_builder = ProcessBuilder()
path_integrator = PathIntegrator(builder=process_builder)
