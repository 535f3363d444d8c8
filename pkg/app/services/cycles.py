"""
Quantum Brayton cycles.

A cycle is fixed by its corner A, the compression ratio r of stage 1 and
the pressure ratio phi. Stage 1 (A -> B) and stage 3 (C -> D) are isobars,
stages 2 and 4 adiabats scaling every coordinate by lam = 1/sqrt(phi) and
back. Reports come in two flavours: closed forms built from the corner
forces (brayton_report) and a quadrature twin that integrates heat and work
along the four stage paths (oracle_report).
"""

import math
from typing import Optional, Union

from app.config import settings
from app.exceptions import BracketError, NonClosure, SpinBraytonException
from app.schemas.cycles import (
    BraytonSpec,
    CornerSet,
    CycleKind,
    CycleReport,
    SweepHold,
)
from app.schemas.processes import Path
from app.schemas.requests import CycleRequest
from app.schemas.substances import (
    Coordinate,
    CoupledPair,
    SpinHalf,
    ThermalPoint,
    Tolerances,
)
from app.services.numerics import find_root
from app.services.processes import (
    PathIntegrator,
    ProcessBuilder,
    coordinate_of,
    scale_point,
)
from app.services.substance import (
    excited_population,
    force_moment,
    generalized_force,
    thermal_point,
)

logger = settings.get_logger(__name__)

AnySubstance = Union[SpinHalf, CoupledPair]

# J/B resolution of the refrigerator threshold
THRESHOLD_RESOLUTION = 1e-6


def cycle_coordinate(kind: CycleKind) -> Coordinate:
    """The coordinate the isobars of a cycle kind move along."""
    return Coordinate.Y if kind is CycleKind.FIXED_FY else Coordinate.X


def _other(which: Coordinate) -> Coordinate:
    return Coordinate.Y if which is Coordinate.X else Coordinate.X


def _excited(tp: ThermalPoint) -> float:
    if isinstance(tp.substance, SpinHalf):
        return tp.probs[1]
    return excited_population(tp.substance, tp.probs)


def build_spec(request: CycleRequest) -> BraytonSpec:
    """BraytonSpec for a cycle request, anchored at its temperature."""
    if request.kind is CycleKind.SINGLE_SPIN:
        substance: AnySubstance = SpinHalf(B=request.B)
    else:
        substance = CoupledPair(
            B=request.B,
            J=request.J,
            model=request.model,
            gamma=request.gamma,
            delta=request.delta,
        )
    return BraytonSpec(
        kind=request.kind,
        anchor=thermal_point(substance, request.anchor_beta),
        r=request.r,
        phi=request.phi,
    )


class BraytonCycleSolver:
    """Solves Brayton corners and reports heats, work and efficiencies."""

    def __init__(
        self,
        tol: Optional[Tolerances] = None,
        builder: Optional[ProcessBuilder] = None,
        integrator: Optional[PathIntegrator] = None,
    ):
        self.tol = tol or settings.default_tolerances()
        self.builder = builder or ProcessBuilder(self.tol)
        self.integrator = integrator or PathIntegrator(self.tol, self.builder)
        self.logger = logger

    # ------------------------------------------------------------------
    # Corners and stage paths
    # ------------------------------------------------------------------

    def solve_corners(self, spec: BraytonSpec) -> CornerSet:
        """Corners A..D of the cycle.

        B and D come from isobar continuation; C is the adiabatic image of
        B. D must come back as the adiabatic image of A, which is the
        closure check.

        Raises:
            InfeasibleForce: an isobar cannot hold its force.
            NonClosure: beta_D differs from lam * beta_A beyond CLOSURE_TOL.
        """
        which = cycle_coordinate(spec.kind)
        lam = spec.lam
        A = spec.anchor
        x_a = coordinate_of(A.substance, which)

        B = self.builder.build_isobar(A, which, x_a / spec.r).end
        C = scale_point(B, lam)
        D = self.builder.build_isobar(C, which, lam * x_a).end

        expected = lam * A.beta
        residual = abs(D.beta - expected) / expected
        if residual > settings.CLOSURE_TOL:
            self.logger.warning(
                "%s cycle did not close: beta_D=%.12g, expected %.12g",
                spec.kind.value, D.beta, expected,
            )
            raise NonClosure(
                f"Cycle does not close: beta_D={D.beta:.12g} but "
                f"lam*beta_A={expected:.12g} (residual {residual:.3g})",
                residual=residual,
                parameters={
                    "kind": spec.kind.value,
                    "beta_A": A.beta,
                    "r": spec.r,
                    "phi": spec.phi,
                },
            )

        self.logger.debug(
            "Solved %s corners: beta_A=%.6g beta_B=%.6g beta_C=%.6g "
            "beta_D=%.6g",
            spec.kind.value, A.beta, B.beta, C.beta, D.beta,
        )
        return CornerSet(
            kind=spec.kind,
            A=A,
            B=B,
            C=C,
            D=D,
            lam=lam,
            closure_residual=residual,
        )

    def stage_paths(
        self, corners: CornerSet, spec: BraytonSpec
    ) -> tuple[Path, Path, Path, Path]:
        """The four stage paths A->B, B->C, C->D, D->A."""
        which = cycle_coordinate(spec.kind)
        return (
            self.builder.build_isobar(
                corners.A, which, coordinate_of(corners.B.substance, which)
            ),
            self.builder.build_adiabat(corners.B, corners.lam),
            self.builder.build_isobar(
                corners.C, which, coordinate_of(corners.D.substance, which)
            ),
            self.builder.build_adiabat(corners.D, 1.0 / corners.lam),
        )

    def ratio_chain(self, corners: CornerSet) -> dict[str, float]:
        """Ratios that all equal phi on a closed reversible cycle."""
        which = cycle_coordinate(corners.kind)
        A, B, C, D = corners.A, corners.B, corners.C, corners.D
        name = which.value
        f = name.lower()

        def coord(tp: ThermalPoint) -> float:
            return coordinate_of(tp.substance, which)

        def force(tp: ThermalPoint, axis: Coordinate) -> float:
            return generalized_force(tp.substance, tp.beta, axis)

        chain = {
            f"{name}_A^2/{name}_D^2": (coord(A) / coord(D)) ** 2,
            f"{name}_B^2/{name}_C^2": (coord(B) / coord(C)) ** 2,
            f"F_{f}0/F_{f}1": force(C, which) / force(A, which),
        }
        if corners.kind is CycleKind.SINGLE_SPIN:
            return chain

        # The held-fixed coordinate, and the other force, scale too
        other = _other(which)
        held = "J" if other is Coordinate.Y else "B"
        hot = getattr(A.substance, held)
        cold = getattr(C.substance, held)
        o = other.value
        if hot > 0.0:
            chain[f"{o}_1^2/{o}_0^2"] = (cold / hot) ** 2
            g = o.lower()
            chain[f"F_{g}C/F_{g}B"] = force(C, other) / force(B, other)
            chain[f"F_{g}D/F_{g}A"] = force(D, other) / force(A, other)
        return chain

    # ------------------------------------------------------------------
    # Reports
    # ------------------------------------------------------------------

    def _report(
        self,
        corners: CornerSet,
        q_in: float,
        q_out: float,
        w_net: float,
        q1_loc: float,
        q2_loc: float,
        refrigerator: bool,
        coupling_work: Optional[float],
        w_loc: Optional[float] = None,
    ) -> CycleReport:
        pair = corners.kind is not CycleKind.SINGLE_SPIN
        if w_loc is None:
            w_loc = q1_loc + q2_loc
        eta = 1.0 - q_out / q_in
        return CycleReport(
            kind=corners.kind,
            q_in=q_in,
            q_out=q_out,
            w_net=w_net,
            eta=eta,
            q1_loc=q1_loc,
            q2_loc=q2_loc,
            w_loc=w_loc,
            eta_loc=w_loc / q1_loc if w_loc > 0.0 else None,
            refrigerator=refrigerator,
            p_e_a=_excited(corners.A),
            p_e_b=_excited(corners.B),
            w_ratio=(
                w_net / (2.0 * w_loc) if pair and w_loc != 0.0 else None
            ),
            coupling_work=coupling_work,
        )

    def brayton_report(
        self, corners: CornerSet, spec: BraytonSpec
    ) -> CycleReport:
        """Closed-form heats, work and efficiencies of a solved cycle.

        Isobar heats are 2 F (x_end - x_start) plus the change of the other
        force's moment F * coordinate. Pair subsystems run a local Brayton
        cycle under fixed F_x (local force F_x / 2) and a local Otto cycle
        under fixed F_y (B constant on each isobar). A single spin is its
        own subsystem.
        """
        A, B, C, D = corners.A, corners.B, corners.C, corners.D
        which = cycle_coordinate(spec.kind)

        def coord(tp: ThermalPoint) -> float:
            return coordinate_of(tp.substance, which)

        F1 = generalized_force(A.substance, A.beta, which)
        F0 = generalized_force(C.substance, C.beta, which)
        q_in = 2.0 * F1 * (coord(B) - coord(A))
        q_out = 2.0 * F0 * (coord(C) - coord(D))

        if spec.kind is CycleKind.SINGLE_SPIN:
            return self._report(
                corners,
                q_in=q_in,
                q_out=q_out,
                w_net=q_in - q_out,
                q1_loc=q_in,
                q2_loc=-q_out,
                refrigerator=False,
                coupling_work=None,
            )

        other = _other(which)

        def moment(tp: ThermalPoint) -> float:
            return force_moment(tp.substance, tp.beta, other)

        hot_bracket = moment(B) - moment(A)
        cold_bracket = moment(C) - moment(D)
        q_in += hot_bracket
        q_out += cold_bracket
        w_net = q_in - q_out

        if spec.kind is CycleKind.FIXED_FX:
            q1_loc = F1 * (coord(B) - coord(A))
            q2_loc = F0 * (coord(D) - coord(C))
            coupling_work = hot_bracket - cold_bracket
        else:
            q1_loc = (_excited(B) - _excited(A)) * A.substance.B
            q2_loc = (_excited(D) - _excited(C)) * C.substance.B
            coupling_work = None

        return self._report(
            corners,
            q_in=q_in,
            q_out=q_out,
            w_net=w_net,
            q1_loc=q1_loc,
            q2_loc=q2_loc,
            refrigerator=_excited(B) < _excited(A),
            coupling_work=coupling_work,
        )

    def oracle_report(
        self, corners: CornerSet, spec: BraytonSpec
    ) -> CycleReport:
        """The report rebuilt purely from quadrature along the stage paths."""
        pair = spec.kind is not CycleKind.SINGLE_SPIN
        balances = [
            self.integrator.heat_work_along(path, local=pair)
            for path in self.stage_paths(corners, spec)
        ]
        q_in = balances[0].Q
        q_out = -balances[2].Q
        w_net = math.fsum(b.W_by for b in balances)

        if not pair:
            return self._report(
                corners,
                q_in=q_in,
                q_out=q_out,
                w_net=w_net,
                q1_loc=q_in,
                q2_loc=-q_out,
                refrigerator=False,
                coupling_work=None,
            )

        q1_loc = balances[0].Q_loc
        q2_loc = balances[2].Q_loc
        # Adiabats exchange no local heat; their quadrature is kept anyway
        w_loc = math.fsum(b.Q_loc for b in balances)
        return self._report(
            corners,
            q_in=q_in,
            q_out=q_out,
            w_net=w_net,
            q1_loc=q1_loc,
            q2_loc=q2_loc,
            refrigerator=q1_loc < 0.0,
            coupling_work=(
                w_net - 2.0 * w_loc
                if spec.kind is CycleKind.FIXED_FX
                else None
            ),
            w_loc=w_loc,
        )

    def evaluate(
        self, spec: BraytonSpec, oracle: bool = False
    ) -> tuple[CornerSet, CycleReport]:
        corners = self.solve_corners(spec)
        if oracle:
            return corners, self.oracle_report(corners, spec)
        return corners, self.brayton_report(corners, spec)

    # ------------------------------------------------------------------
    # Parameter families
    # ------------------------------------------------------------------

    def anchored_spec(
        self,
        template: BraytonSpec,
        j_over_b: float,
        hold: SweepHold = SweepHold.ANCHOR_TEMPERATURE,
        anchor_force: Optional[float] = None,
    ) -> BraytonSpec:
        """template with J = j_over_b * B at corner A.

        hold=temperature keeps beta_A; hold=force keeps F_high (anchor_force,
        or the template's own) and solves beta_A on the hot branch.
        """
        substance = template.anchor.substance
        moved = substance.with_params(J=j_over_b * substance.B)
        if SweepHold(hold) is SweepHold.ANCHOR_TEMPERATURE:
            beta = template.anchor.beta
        else:
            which = cycle_coordinate(template.kind)
            if anchor_force is None:
                anchor_force = generalized_force(
                    substance, template.anchor.beta, which
                )
            beta = self.builder.solve_anchor_beta(moved, which, anchor_force)
        return template.model_copy(
            update={"anchor": thermal_point(moved, beta)}
        )

    def locate_refrigerator_threshold(
        self,
        template: BraytonSpec,
        lo: float = 0.05,
        hi: float = 5.0,
        n_scan: int = 25,
    ) -> float:
        """J/B where the local work changes sign, at the template's beta_A.

        A coarse scan finds the first feasible sign change of W_loc, which
        is then refined to THRESHOLD_RESOLUTION.

        Raises:
            BracketError: W_loc keeps its sign on every feasible scan pair.
        """
        def local_work(j_over_b: float) -> float:
            spec = self.anchored_spec(template, j_over_b)
            return self.brayton_report(self.solve_corners(spec), spec).w_loc

        step = (hi - lo) / (n_scan - 1)
        previous: Optional[tuple[float, float]] = None
        for i in range(n_scan):
            x = lo + i * step
            try:
                value = local_work(x)
            except SpinBraytonException as exc:
                self.logger.debug("Threshold scan skips J/B=%.6g: %s", x, exc)
                previous = None
                continue
            if previous is not None and previous[1] * value <= 0.0:
                tol = Tolerances(
                    root_rel=THRESHOLD_RESOLUTION / 10.0,
                    quad_rel=self.tol.quad_rel,
                    fd_step=self.tol.fd_step,
                )
                threshold = find_root(local_work, previous[0], x, tol)
                self.logger.info(
                    "Refrigerator threshold at J/B=%.7f", threshold
                )
                return threshold
            previous = (x, value)

        raise BracketError(
            f"W_loc does not change sign for J/B in [{lo:.6g}, {hi:.6g}]",
            parameters={"lo": lo, "hi": hi, "kind": template.kind.value},
        )


brayton_solver = BraytonCycleSolver()
