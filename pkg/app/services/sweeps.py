"""
J/B sweeps of Brayton cycles and their tabular output.

Each sweep point is an independent cycle; points that cannot be solved
(infeasible isobars, closure failures) become flagged rows rather than
errors. Rows always come back in grid order, also when points are spread
over worker processes.
"""

import io
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import pandas as pd

from app.config import settings
from app.exceptions import SpinBraytonException
from app.schemas.cycles import CSV_COLUMNS, SweepRow, SweepSpec
from app.schemas.requests import SweepRequest
from app.schemas.substances import Tolerances
from app.services.cycles import (
    BraytonCycleSolver,
    build_spec,
    cycle_coordinate,
)
from app.services.substance import generalized_force

logger = settings.get_logger(__name__)


def build_sweep_spec(request: SweepRequest) -> SweepSpec:
    """SweepSpec around the cycle the request describes at its own J/B."""
    return SweepSpec(
        lo=request.lo,
        hi=request.hi,
        n=request.n,
        hold=request.hold,
        cycle=build_spec(request),
        anchor_force=request.anchor_force,
    )


def _sweep_point(args: tuple[SweepSpec, float, Tolerances]) -> SweepRow:
    # Runs in a worker process, so it builds its own solver
    spec, j_over_b, tol = args
    return SweepRunner(BraytonCycleSolver(tol)).evaluate_point(spec, j_over_b)


class SweepRunner:
    """Evaluates SweepSpecs point by point."""

    def __init__(
        self,
        solver: Optional[BraytonCycleSolver] = None,
        workers: Optional[int] = None,
    ):
        self.solver = solver or BraytonCycleSolver()
        self.workers = workers or settings.SWEEP_WORKERS
        self.logger = logger

    def evaluate_point(self, spec: SweepSpec, j_over_b: float) -> SweepRow:
        """One row; solver failures are reported in the row's detail."""
        try:
            cycle = self.solver.anchored_spec(
                spec.cycle, j_over_b, spec.hold, spec.anchor_force
            )
            _, report = self.solver.evaluate(cycle)
        except SpinBraytonException as exc:
            self.logger.warning(
                "Sweep point J/B=%.6g flagged infeasible: %s", j_over_b, exc
            )
            return SweepRow(j_over_b=j_over_b, feasible=False, detail=str(exc))

        anchor = cycle.anchor
        return SweepRow(
            j_over_b=j_over_b,
            beta_a=anchor.beta,
            f_high=generalized_force(
                anchor.substance, anchor.beta, cycle_coordinate(cycle.kind)
            ),
            q_in=report.q_in,
            q_out=report.q_out,
            w_net=report.w_net,
            w_loc=report.w_loc,
            w_ratio=report.w_ratio,
            eta=report.eta,
            eta_loc=report.eta_loc,
            refrigerator=report.refrigerator,
            feasible=True,
        )

    def run(self, spec: SweepSpec) -> list[SweepRow]:
        """Rows for every grid point, ordered by J/B."""
        grid = spec.grid()
        if self.workers > 1:
            tasks = [(spec, x, self.solver.tol) for x in grid]
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                rows = list(executor.map(_sweep_point, tasks))
        else:
            rows = [self.evaluate_point(spec, x) for x in grid]

        flagged = sum(not row.feasible for row in rows)
        self.logger.info(
            "Sweep of %d points over J/B in [%.6g, %.6g] finished, "
            "%d flagged infeasible",
            len(rows), spec.lo, spec.hi, flagged,
        )
        return rows

    @staticmethod
    def to_frame(rows: list[SweepRow]) -> pd.DataFrame:
        """Rows as a DataFrame with exactly the CSV columns, in order."""
        records = [row.model_dump(include=set(CSV_COLUMNS)) for row in rows]
        return pd.DataFrame.from_records(records, columns=list(CSV_COLUMNS))

    @staticmethod
    def to_csv(rows: list[SweepRow], digits: Optional[int] = None) -> str:
        """CSV text; undefined values (eta_loc of a non-engine) stay empty."""
        digits = digits or settings.OUTPUT_DIGITS
        buffer = io.StringIO()
        SweepRunner.to_frame(rows).to_csv(
            buffer,
            index=False,
            float_format=f"%.{digits}g",
            na_rep="",
            lineterminator="\n",
        )
        return buffer.getvalue()


sweep_runner = SweepRunner()
