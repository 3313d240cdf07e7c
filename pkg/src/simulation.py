"""
Simulation Orchestrator
Time loop, snapshots, error reports and convergence studies for configured runs
"""
import logging
import time as wallclock
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .cases import init_case
from .config import RunConfig, thread_cap
from .core import FieldSet, Grid2D, check_admissible
from .diagnostics import DamBreakFeatures, ErrorReport, convergence_table, dam_break_features, error_norms
from .exceptions import ConfigError, NumericalFault
from .mood import MoodLimiter
from .scheme_fo import FirstOrderScheme
from .scheme_ho import HighOrderScheme, ssprk_step
from .snapshots import snapshot_frame, write_snapshot, write_summary, write_vtk
from .wb_correction import DetectorParams, WellBalancedCorrection

logger = logging.getLogger(__name__)

# Relative slack under which the clock counts as having reached a target time.
TIME_SLACK = 1e-12


def cap_time_step(dt: float, t: float, target: float) -> Tuple[float, float]:
    """
    Shorten dt so that the step lands exactly on target when it would reach it

    Args:
        dt: CFL time step
        t: Current time
        target: Next time that must be hit (final time or snapshot time)

    Returns:
        (dt, time after the step); the time equals target when capped
    """
    remaining = target - t
    if remaining <= 0:
        raise ConfigError(f"target time {target} is not after the current time {t}")
    if not dt > 0:
        raise NumericalFault(f"non-positive time step {dt}", time=t)
    if dt >= remaining * (1.0 - TIME_SLACK):
        return remaining, target
    return dt, t + dt


@dataclass
class RunResult:
    """Outcome of one run"""

    fields: FieldSet
    grid: Grid2D
    steps: int
    wall_time: float
    report: Optional[ErrorReport] = None
    features: Optional[DamBreakFeatures] = None
    min_height: float = 0.0
    candidates: int = 0
    snapshots: List[Path] = field(default_factory=list)

    def summary(self, config: RunConfig) -> Dict[str, Any]:
        return {
            'case': config.case,
            'config': dict(line.split('=', 1) for line in config.to_lines()),
            'steps': self.steps,
            'final_time': self.fields.time,
            'wall_time': self.wall_time,
            'min_height': self.min_height,
            'mood_candidates': self.candidates,
            'norms': self.report.as_dict() if self.report else None,
            'features': self.features.as_dict() if self.features else None,
        }


class Simulation:
    """
    Assembles the schemes for a configuration and runs the time loop
    """

    def __init__(self, config: RunConfig):
        """
        Build grid, boundaries and the limited blended scheme

        Args:
            config: Run configuration
        """
        self.config = config
        self.case = config.spec
        nx, ny = config.mesh
        degree = config.degree
        self.params = config.phys_params()
        self.grid = Grid2D.from_box(self.case.box, nx, ny, degree)
        self.bc = self.case.boundaries(self.grid, degree, self.params)
        self.fo = FirstOrderScheme(self.grid, self.params, self.bc, config.cutoff, degree)
        self.ho = HighOrderScheme(self.grid, self.params, degree, config.cutoff)
        lx, ly = config.char_lengths()
        self.correction = WellBalancedCorrection(
            self.fo, self.ho, DetectorParams(lx, ly, config.exponent()), enabled=config.wb
        )
        self.limiter = MoodLimiter(self.correction, enabled=config.use_mood)
        self._candidates = 0

        logger.info(
            f"Simulation {self.case.name}: {nx}x{ny}, degree {degree}, "
            f"wb={'on' if config.wb else 'off'}, mood={'on' if config.use_mood else 'off'}"
        )

    def initial_fields(self) -> FieldSet:
        return self.fo.fill(init_case(self.case, self.grid, self.config.degree, self.params))

    def apply_once(self, fields: FieldSet, dt: float) -> FieldSet:
        """One limited blended step from a Runge-Kutta stage input"""
        stage = self.fo.fill(fields)
        out = self.limiter.apply(stage, dt)
        self._candidates += self.limiter.last_report.candidates
        out.time = fields.time + dt
        return out

    def step(self, fields: FieldSet, dt: float) -> FieldSet:
        return self.fo.fill(ssprk_step(self.ho.method, self.apply_once, fields, dt))

    def _write_snapshot(self, fields: FieldSet, index: int) -> List[Path]:
        out_dir = Path(self.config.out_dir)
        report = self.limiter.last_report
        theta_x = theta_y = cpd = None
        if report is not None:
            theta_x, theta_y, cpd = report.theta.theta_x, report.theta.theta_y, report.cpd
        frame = snapshot_frame(fields, self.grid, theta_x, theta_y, cpd)
        paths = [write_snapshot(out_dir / f"snapshot_{index:04d}.csv", frame)]
        if self.config.vtk:
            paths.append(write_vtk(out_dir / f"snapshot_{index:04d}.vtk", frame, self.grid, f"{self.case.name} t={fields.time!r}"))
        return paths

    def run(self, fields: Optional[FieldSet] = None) -> RunResult:
        """
        Advance to the final time

        Returns:
            RunResult with the final fields, error report and snapshot paths

        Raises:
            NumericalFault: On non-finite values or negative heights
        """
        config = self.config
        t_end = config.final_time
        fields = self.initial_fields() if fields is None else self.fo.fill(fields)
        check_admissible(fields, self.grid, 0)
        rows, cols = self.grid.interior
        min_height = float(fields.h[rows, cols].min())

        snapshots: List[Path] = []
        snap_index = 0
        last_snap_time = None
        next_snap = None
        if config.out_dir:
            snapshots += self._write_snapshot(fields, snap_index)
            last_snap_time = fields.time
            if config.snap_every:
                next_snap = fields.time + config.snap_every

        start = wallclock.perf_counter()
        self._candidates = 0
        steps = 0
        while fields.time < t_end * (1.0 - TIME_SLACK):
            target = t_end if next_snap is None else min(next_snap, t_end)
            dt = self.fo.cfl_dt(fields, config.cfl)
            dt, new_time = cap_time_step(dt, fields.time, target)
            fields = self.step(fields, dt)
            fields.time = new_time
            steps += 1
            check_admissible(fields, self.grid, steps)
            min_height = min(min_height, float(fields.h[rows, cols].min()))

            if next_snap is not None and new_time >= next_snap * (1.0 - TIME_SLACK):
                snap_index += 1
                snapshots += self._write_snapshot(fields, snap_index)
                last_snap_time = new_time
                next_snap += config.snap_every
            if steps % config.log_every == 0:
                logger.info(f"Step {steps}: t={fields.time:.6g}, dt={dt:.3e}")
            else:
                logger.debug(f"Step {steps}: t={fields.time:.6g}, dt={dt:.3e}")

        wall_time = wallclock.perf_counter() - start
        result = RunResult(fields, self.grid, steps, wall_time, min_height=min_height, candidates=self._candidates)

        handle = self.case.reference_handle(self.grid, config.degree, self.params)
        if handle is not None:
            result.report = error_norms(fields, handle, self.grid, self.params, self.case.report or ('h', 'q'))
        if self.case.name == 'partial_dam_break':
            result.features = dam_break_features(fields, self.grid)

        if config.out_dir:
            if last_snap_time != fields.time:
                snapshots += self._write_snapshot(fields, snap_index + 1)
            snapshots.append(write_summary(Path(config.out_dir) / 'summary.json', result.summary(config)))
        result.snapshots = snapshots
        logger.info(f"Finished {self.case.name} at t={fields.time:.6g} after {steps} steps ({wall_time:.2f}s)")
        return result


def run(config: RunConfig) -> RunResult:
    return Simulation(config).run()


def _run_mesh(config: RunConfig) -> Tuple[int, int, ErrorReport]:
    nx, ny = config.mesh
    logger.info(f"Convergence mesh {nx}x{ny}")
    result = Simulation(config).run()
    return nx, ny, result.report


def convergence(config: RunConfig, meshes: Sequence[int], workers: Optional[int] = None) -> pd.DataFrame:
    """
    Error and order table over a sequence of meshes

    Square meshes are used for two-dimensional cases; cases with a single
    row keep ny = 1.

    Args:
        config: Base configuration (its mesh size and output directory are ignored per mesh)
        meshes: Cell counts along x, coarse to fine
        workers: Process count, SWELL_THREADS by default

    Returns:
        DataFrame from convergence_table

    Raises:
        ConfigError: If the case has no reference solution or fewer than three meshes are given
    """
    if not config.spec.has_reference:
        raise ConfigError(f"case '{config.case}' has no reference solution")
    if len(meshes) < 3:
        raise ConfigError(f"convergence needs at least three meshes, got {len(meshes)}")

    one_row = config.spec.ny == 1
    runs = [
        replace(config, nx=n, ny=1 if one_row else n, out_dir=None)
        for n in meshes
    ]
    workers = workers or thread_cap()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(runs))) as pool:
            results = list(pool.map(_run_mesh, runs))
    else:
        results = [_run_mesh(run_config) for run_config in runs]

    table = convergence_table(results)
    if config.out_dir:
        path = Path(config.out_dir) / 'convergence.csv'
        path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(path, index=False, float_format='%.17g')
        logger.info(f"Wrote convergence table {path}")
    return table
