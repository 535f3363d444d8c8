"""
Invariant suite behind `spin-brayton verify`.

Each check evaluates one family of identities or cross-checks over a small
deterministic sample of parameters and reports the worst deviation it saw.
Failures to compute (infeasible isobars, non-convergence) fail the check
instead of aborting the suite.
"""

import math
from functools import cached_property
from typing import Callable, Iterable, Optional

import numpy as np

from app.config import settings
from app.exceptions import InfeasibleForce, SpinBraytonException
from app.schemas.cycles import (
    BraytonSpec,
    CornerSet,
    CycleKind,
    CycleReport,
)
from app.schemas.processes import BumpKind, HeatDirection
from app.schemas.substances import (
    Coordinate,
    CoupledPair,
    PairModel,
    SpinHalf,
    Tolerances,
)
from app.schemas.verification import CheckResult, VerificationSummary
from app.services.cycles import BraytonCycleSolver
from app.services.isothermal import IsothermalAnalyzer
from app.services.numerics import central_diff
from app.services.processes import substance_on_coordinate
from app.services.substance import (
    energies,
    entropy,
    force_moment,
    free_energy,
    generalized_force,
    internal_energy,
    reduced_local_state,
    single_spin_force,
    thermal_point,
)

logger = settings.get_logger(__name__)

IDENTITY_TOL = 1e-12
FORCE_ORACLE_TOL = 1e-8
ORACLE_TOL = 1e-7
RATIO_TOL = 1e-10
UNCOUPLED_TOL = 1e-3
RNG_SEED = 20240607

IDENTITY_GRID = 20
FORCE_ORACLE_POINTS = 200
# Randomized feasible cycles per kind in the equivalence check
CYCLES_PER_KIND = 30

ANISOTROPIC_PAIR = CoupledPair(
    B=1.0, J=2.0, model=PairModel.GENERAL_XY, gamma=0.3, delta=0.2
)


def _worst(values: Iterable[float]) -> float:
    return max(values, default=0.0)


def _relative(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


class InvariantSuite:
    """Named invariant checks over fixed parameter samples."""

    def __init__(self, tol: Optional[Tolerances] = None):
        self.tol = tol or settings.default_tolerances()
        self.solver = BraytonCycleSolver(self.tol)
        self.analyzer = IsothermalAnalyzer(
            self.tol, self.solver.integrator
        )
        self.logger = logger

    # ------------------------------------------------------------------
    # Sample cycles
    # ------------------------------------------------------------------

    @staticmethod
    def sample_specs() -> list[BraytonSpec]:
        pair = CoupledPair(B=1.0, J=0.5)
        return [
            BraytonSpec(
                kind=CycleKind.SINGLE_SPIN,
                anchor=thermal_point(SpinHalf(B=1.0 / 3.0), 6.0),
                r=3.0,
                phi=0.25,
            ),
            BraytonSpec(
                kind=CycleKind.FIXED_FX,
                anchor=thermal_point(pair, 2.0),
                r=3.0,
                phi=0.25,
            ),
            BraytonSpec(
                kind=CycleKind.FIXED_FX,
                anchor=thermal_point(CoupledPair(B=1.5, J=0.8), 1.2),
                r=2.0,
                phi=0.5,
            ),
            BraytonSpec(
                kind=CycleKind.FIXED_FY,
                anchor=thermal_point(CoupledPair(B=1.0, J=2.0), 2.0),
                r=3.0,
                phi=0.25,
            ),
            BraytonSpec(
                kind=CycleKind.FIXED_FY,
                anchor=thermal_point(ANISOTROPIC_PAIR, 2.0),
                r=3.0,
                phi=0.25,
            ),
        ]

    @cached_property
    def random_cycles(self) -> list[tuple[BraytonSpec, CornerSet]]:
        """CYCLES_PER_KIND feasible cycles of every kind with solved corners.

        Draws whose isobars cannot hold their force are skipped; any other
        failure propagates and fails the calling check.
        """
        rng = np.random.default_rng(RNG_SEED + 1)
        cycles = []
        for kind in CycleKind:
            found = 0
            for _ in range(10 * CYCLES_PER_KIND):
                if found == CYCLES_PER_KIND:
                    break
                B, J, beta, r, phi = (
                    float(v)
                    for v in rng.uniform(
                        (0.5, 0.1, 0.5, 1.5, 0.2), (2.0, 2.0, 4.0, 3.0, 0.9)
                    )
                )
                if kind is CycleKind.SINGLE_SPIN:
                    substance = SpinHalf(B=B)
                else:
                    substance = CoupledPair(B=B, J=J)
                spec = BraytonSpec(
                    kind=kind,
                    anchor=thermal_point(substance, beta),
                    r=r,
                    phi=phi,
                )
                try:
                    corners = self.solver.solve_corners(spec)
                except InfeasibleForce:
                    continue
                cycles.append((spec, corners))
                found += 1
            self.logger.debug(
                "Drew %d feasible %s cycles", found, kind.value
            )
        return cycles

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def check_identities(self) -> CheckResult:
        """U = F_x X + F_y Y, U = F L, F_loc = F_x / 2, S(B, J) = S(J, B)."""
        deviations = []
        for B in np.linspace(0.2, 3.0, IDENTITY_GRID):
            for J in np.linspace(0.0, 3.0, IDENTITY_GRID):
                for beta in np.linspace(0.1, 20.0, IDENTITY_GRID):
                    B, J, beta = float(B), float(J), float(beta)
                    s = CoupledPair(B=B, J=J)
                    tp = thermal_point(s, beta)
                    U = internal_energy(tp)
                    moments = force_moment(
                        s, beta, Coordinate.X
                    ) + force_moment(s, beta, Coordinate.Y)
                    deviations.append(abs(U - moments))
                    local = reduced_local_state(s, beta)
                    F_x = generalized_force(s, beta, Coordinate.X)
                    deviations.append(abs(local.F_loc - 0.5 * F_x))
                    if J > 0.0:
                        swapped = thermal_point(CoupledPair(B=J, J=B), beta)
                        deviations.append(
                            abs(entropy(tp) - entropy(swapped))
                        )
                    single = SpinHalf(B=B)
                    U_single = internal_energy(thermal_point(single, beta))
                    F_single = single_spin_force(single.L, beta)
                    deviations.append(abs(U_single - F_single * single.L))
        worst = _worst(deviations)
        return CheckResult(
            name="identities",
            passed=worst <= IDENTITY_TOL,
            worst=worst,
            tolerance=IDENTITY_TOL,
        )

    def _force_deviation(self, s, beta: float, which: Coordinate) -> float:
        closed = generalized_force(s, beta, which)
        x0 = 1.0 / (s.B if which is Coordinate.X else s.J)

        def free(x: float) -> float:
            return free_energy(substance_on_coordinate(s, which, x), beta)

        def level_sum(x: float) -> float:
            probs = thermal_point(s, beta).probs
            moved = energies(substance_on_coordinate(s, which, x))
            return math.fsum(p * e for p, e in zip(probs, moved))

        from_free = -central_diff(free, x0, self.tol)
        from_levels = -central_diff(level_sum, x0, self.tol)
        scale = max(abs(closed), s.B**2 if which is Coordinate.X else s.J**2)
        return max(
            abs(closed - from_free) / scale,
            abs(closed - from_levels) / scale,
        )

    def check_force_oracle(self) -> CheckResult:
        """Closed-form forces against both finite-difference definitions."""
        rng = np.random.default_rng(RNG_SEED)
        deviations = []
        for B, J, beta in rng.uniform(
            (0.5, 0.3, 0.5), (3.0, 3.0, 5.0), size=(FORCE_ORACLE_POINTS, 3)
        ):
            s = CoupledPair(B=float(B), J=float(J))
            for which in Coordinate:
                deviations.append(
                    self._force_deviation(s, float(beta), which)
                )
            deviations.append(
                self._force_deviation(
                    SpinHalf(B=float(B)), float(beta), Coordinate.X
                )
            )
        anisotropic = CoupledPair(
            B=1.0, J=0.5, model=PairModel.GENERAL_XY, gamma=0.3, delta=0.2
        )
        for which in Coordinate:
            deviations.append(self._force_deviation(anisotropic, 2.0, which))
        worst = _worst(deviations)
        return CheckResult(
            name="force_oracle",
            passed=worst <= FORCE_ORACLE_TOL,
            worst=worst,
            tolerance=FORCE_ORACLE_TOL,
        )

    def check_adiabats(self) -> CheckResult:
        """Populations, entropy, F X^2, F Y^2, X/Y and T L along adiabats."""
        builder = self.solver.builder
        deviations = []
        starts = [
            thermal_point(CoupledPair(B=1.0, J=0.5), 2.0),
            thermal_point(CoupledPair(B=0.7, J=2.2), 0.8),
            thermal_point(
                CoupledPair(
                    B=1.0,
                    J=0.5,
                    model=PairModel.GENERAL_XY,
                    gamma=0.3,
                    delta=0.2,
                ),
                2.0,
            ),
            thermal_point(SpinHalf(B=1.0), 2.0),
        ]
        for start in starts:
            path = builder.build_adiabat(start, 2.0, 33)
            s0 = start.substance
            S0 = entropy(start)
            moment_x = generalized_force(s0, start.beta) * s0.X**2
            for point in path.points:
                s = point.substance
                deviations.extend(
                    abs(p - p0) for p, p0 in zip(point.probs, start.probs)
                )
                deviations.append(abs(entropy(point) - S0))
                deviations.append(
                    _relative(
                        generalized_force(s, point.beta) * s.X**2, moment_x
                    )
                )
                if isinstance(s, SpinHalf):
                    deviations.append(
                        _relative(s.L / point.beta, s0.L / start.beta)
                    )
                else:
                    deviations.append(_relative(s.X / s.Y, s0.X / s0.Y))
                    deviations.append(
                        _relative(
                            generalized_force(s, point.beta, Coordinate.Y)
                            * s.Y**2,
                            generalized_force(s0, start.beta, Coordinate.Y)
                            * s0.Y**2,
                        )
                    )
        worst = _worst(deviations)
        return CheckResult(
            name="adiabats",
            passed=worst <= IDENTITY_TOL,
            worst=worst,
            tolerance=IDENTITY_TOL,
        )

    def _sample_cycles(self) -> list[tuple[BraytonSpec, CornerSet]]:
        fixed = [
            (spec, self.solver.solve_corners(spec))
            for spec in self.sample_specs()
        ]
        return fixed + self.random_cycles

    def check_cycle_equivalence(self) -> CheckResult:
        """Quadrature reports against closed forms; eta = 1 - sqrt(phi).

        Deviations are relative to the larger of the two values and the
        cycle's heat input, so a local work close to zero is not amplified.
        The plain fieldwise relative deviation goes into the detail.
        """
        fields = ("q_in", "q_out", "w_net", "w_loc")
        oracle_worst = []
        fieldwise_worst = []
        eta_worst = []
        for spec, corners in self._sample_cycles():
            closed = self.solver.brayton_report(corners, spec)
            oracle = self.solver.oracle_report(corners, spec)
            for f in fields:
                a, b = getattr(closed, f), getattr(oracle, f)
                scale = max(abs(a), abs(b), abs(closed.q_in))
                oracle_worst.append(abs(a - b) / scale)
                fieldwise_worst.append(_relative(a, b))
            eta_worst.append(abs(closed.eta - (1.0 - math.sqrt(spec.phi))))
        worst = _worst(oracle_worst)
        eta = _worst(eta_worst)
        fieldwise = _worst(fieldwise_worst)
        return CheckResult(
            name="cycle_equivalence",
            passed=worst <= ORACLE_TOL and eta <= RATIO_TOL,
            worst=worst,
            tolerance=ORACLE_TOL,
            detail=(
                f"{len(eta_worst)} cycles, worst eta deviation {eta:.3g}, "
                f"worst fieldwise relative deviation {fieldwise:.3g}"
            ),
        )

    def check_closure(self) -> CheckResult:
        """Closure residuals and the complete ratio chain."""
        residuals = []
        ratios = []
        for spec, corners in self._sample_cycles():
            residuals.append(corners.closure_residual)
            ratios.extend(
                abs(value - spec.phi)
                for value in self.solver.ratio_chain(corners).values()
            )
        residual = _worst(residuals)
        worst = _worst(ratios)
        return CheckResult(
            name="closure_ratio_chain",
            passed=residual <= settings.CLOSURE_TOL and worst <= RATIO_TOL,
            worst=worst,
            tolerance=RATIO_TOL,
            detail=f"worst closure residual {residual:.3g}",
        )

    def _fixed_fx_report(self, J: float) -> CycleReport:
        spec = BraytonSpec(
            kind=CycleKind.FIXED_FX,
            anchor=thermal_point(CoupledPair(B=1.0, J=J), 2.0),
            r=3.0,
            phi=0.25,
        )
        return self.solver.evaluate(spec)[1]

    def check_uncoupled_limit(self) -> CheckResult:
        """W_net / 2 W_loc -> 1 as J -> 0."""
        deviations = [
            abs(self._fixed_fx_report(J).w_ratio - 1.0)
            for J in (1e-6, 1e-7, 1e-8)
        ]
        worst = deviations[0]
        trending = deviations[2] <= deviations[0] + IDENTITY_TOL
        return CheckResult(
            name="uncoupled_limit",
            passed=worst <= UNCOUPLED_TOL and trending,
            worst=worst,
            tolerance=UNCOUPLED_TOL,
        )

    def check_coupling_enhancement(self) -> CheckResult:
        """W_net - 2 W_loc is the coupling bracket and never negative."""
        deviations = []
        margins = []
        for j_over_b in np.linspace(0.1, 2.0, 20):
            try:
                report = self._fixed_fx_report(float(j_over_b))
            except SpinBraytonException:
                continue
            surplus = report.w_net - 2.0 * report.w_loc
            deviations.append(abs(surplus - report.coupling_work))
            margins.append(-report.coupling_work)
        worst = _worst(deviations)
        margin = _worst(margins)
        return CheckResult(
            name="coupling_enhancement",
            passed=bool(deviations) and worst <= RATIO_TOL
            and margin <= IDENTITY_TOL,
            worst=worst,
            tolerance=RATIO_TOL,
            detail=f"{len(deviations)} feasible points",
        )

    def check_refrigerator(self) -> CheckResult:
        """Fixed-F_y refrigerator threshold and indicator agreement."""
        template = BraytonSpec(
            kind=CycleKind.FIXED_FY,
            anchor=thermal_point(CoupledPair(B=1.0, J=1.0), 2.0),
            r=3.0,
            phi=0.25,
        )
        threshold = self.solver.locate_refrigerator_threshold(
            template, 0.05, 5.0, n_scan=11
        )
        disagreements = 0
        for j_over_b in (0.5, 1.0, 2.0, 3.0, 4.0, 5.0):
            spec = self.solver.anchored_spec(template, j_over_b)
            try:
                report = self.solver.evaluate(spec)[1]
            except SpinBraytonException:
                continue
            indicators = {
                report.refrigerator,
                report.p_e_b < report.p_e_a,
                report.q1_loc < 0.0,
            }
            disagreements += len(indicators) > 1

        beyond = min(threshold + 0.25, 5.0)
        report = self.solver.evaluate(
            self.solver.anchored_spec(template, beyond)
        )[1]
        regime = (
            report.q1_loc < 0.0
            and report.q2_loc > 0.0
            and report.w_loc < 0.0
            and report.w_net > 0.0
        )
        return CheckResult(
            name="refrigerator",
            passed=disagreements == 0 and regime,
            worst=float(disagreements),
            tolerance=0.0,
            detail=f"threshold J/B = {threshold:.7f}",
        )

    def check_isothermal(self) -> CheckResult:
        """Heat directions of dB and dJ bumps at B = J = 1, beta = 20."""
        expected = {
            BumpKind.DB: (HeatDirection.RELEASE, HeatDirection.RELEASE),
            BumpKind.DJ: (HeatDirection.RELEASE, HeatDirection.ABSORB),
        }
        mismatches = []
        for bump, (total, local) in expected.items():
            result = self.analyzer.isothermal_heat_directions(
                1.0, 1.0, 20.0, bump, 0.01
            )
            if (result.total_heat_sign, result.local_heat_sign) != (
                total,
                local,
            ):
                mismatches.append(bump.value)
        return CheckResult(
            name="isothermal_directions",
            passed=not mismatches,
            detail=", ".join(mismatches) or None,
        )

    def check_general_xy(self) -> CheckResult:
        """General XY at gamma = delta = 0 reproduces the XX pair."""
        deviations = []
        for B, J, beta in ((1.0, 0.5, 2.0), (0.6, 1.7, 0.9), (2.0, 2.0, 5.0)):
            xx = CoupledPair(B=B, J=J)
            xy = CoupledPair(B=B, J=J, model=PairModel.GENERAL_XY)
            deviations.extend(
                abs(a - b) for a, b in zip(energies(xx), energies(xy))
            )
            for which in Coordinate:
                deviations.append(
                    abs(
                        generalized_force(xx, beta, which)
                        - generalized_force(xy, beta, which)
                    )
                )
            deviations.append(
                abs(
                    reduced_local_state(xx, beta).p_e
                    - reduced_local_state(xy, beta).p_e
                )
            )
        xx_report = self._fixed_fx_report(0.5)
        spec = BraytonSpec(
            kind=CycleKind.FIXED_FX,
            anchor=thermal_point(
                CoupledPair(B=1.0, J=0.5, model=PairModel.GENERAL_XY), 2.0
            ),
            r=3.0,
            phi=0.25,
        )
        xy_report = self.solver.evaluate(spec)[1]
        for field in ("q_in", "q_out", "w_net", "w_loc"):
            deviations.append(
                _relative(getattr(xx_report, field), getattr(xy_report, field))
            )
        worst = _worst(deviations)
        return CheckResult(
            name="general_xy_regression",
            passed=worst <= RATIO_TOL,
            worst=worst,
            tolerance=RATIO_TOL,
        )

    # ------------------------------------------------------------------

    def checks(self) -> list[tuple[str, Callable[[], CheckResult]]]:
        return [
            ("identities", self.check_identities),
            ("force_oracle", self.check_force_oracle),
            ("adiabats", self.check_adiabats),
            ("cycle_equivalence", self.check_cycle_equivalence),
            ("closure_ratio_chain", self.check_closure),
            ("uncoupled_limit", self.check_uncoupled_limit),
            ("coupling_enhancement", self.check_coupling_enhancement),
            ("refrigerator", self.check_refrigerator),
            ("isothermal_directions", self.check_isothermal),
            ("general_xy_regression", self.check_general_xy),
        ]

    def run_suite(self) -> VerificationSummary:
        results = []
        for name, check in self.checks():
            try:
                result = check()
            except SpinBraytonException as exc:
                result = CheckResult(name=name, passed=False, detail=str(exc))
            if result.passed:
                self.logger.info("verify %s: pass", name)
            else:
                self.logger.warning(
                    "verify %s: FAIL (worst %s, %s)",
                    name, result.worst, result.detail,
                )
            results.append(result)
        failed = sum(not r.passed for r in results)
        return VerificationSummary(
            checks=results, passed=failed == 0, failed=failed
        )


def run_suite(tol: Optional[Tolerances] = None) -> VerificationSummary:
    """Run every invariant check with the given (or default) tolerances."""
    return InvariantSuite(tol).run_suite()
