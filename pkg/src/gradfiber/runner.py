"""Drive a scenario through time and collect its trace, events and snapshots."""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import StepFailed
from .io import TRACE_COLUMNS, EventTracker, RunWriter, trace_row
from .solver import Simulation

log = logging.getLogger(__name__)

# a step failure after the force has fallen below this fraction of its peak ends the run normally
BROKEN_FRACTION = 0.5


@dataclass
class RunResult:
    """Everything a finished run produced."""

    scenario: str
    rows: list
    events: list
    records: list = field(default_factory=list)
    state: object = None
    wall_time: float = 0.0
    stopped_early: bool = False
    error: str | None = None

    @property
    def trace(self):
        arr = np.array(self.rows, float).reshape(-1, len(TRACE_COLUMNS))
        return {name: arr[:, k] for k, name in enumerate(TRACE_COLUMNS)}

    def event(self, material, kind):
        """``(t, u)`` of the first matching event or ``None``."""
        for t, u, mat, k, _ in self.events:
            if mat == material and k == kind:
                return t, u
        return None

    @property
    def peak_force(self):
        return float(self.trace["F"].max())

    def failure_displacement(self, fraction=0.5):
        """Displacement at which the force first falls below ``fraction`` of its peak after the peak."""
        tr = self.trace
        k = int(np.argmax(tr["F"]))
        below = np.flatnonzero(tr["F"][k:] < fraction * tr["F"][k])
        return float(tr["u"][k + below[0]]) if below.size else None


def _broken(scenario, tracker, rows, peak):
    """Whether a load-controlled specimen has visibly failed: a crack event and a force below half its peak."""
    return (scenario.stop_fraction is not None and bool(tracker.events) and peak > 0.0
            and rows[-1][2] < BROKEN_FRACTION * peak)


def run_scenario(scenario, output_dir=None, cadence=1, fields=True, max_steps=None, on_row=None):
    """Run ``scenario`` from its initial state to ``t_end`` (or early stop).

    Parameters
    ----------
    scenario : Scenario
    output_dir : path-like, optional
        Where ``run.csv``, ``events.log`` and ``fields_*.vtu`` go; nothing is
        written when omitted.
    cadence : int
        Write a snapshot every ``cadence`` accepted steps (the first and the
        last step are always written).
    max_steps : int, optional
        Hard limit on the number of output intervals.
    on_row : callable, optional
        Called with every trace row, e.g. for progress reporting.

    Raises
    ------
    StepFailed
        When a step cannot be completed after the allowed cuts before the
        specimen has failed; everything written so far stays on disk and the
        exception carries the result up to the last accepted step as
        ``partial``.  After a crack event with the force below half its peak,
        a step failure ends the run normally with ``stopped_early`` and
        ``error`` set.
    """
    t0 = time.perf_counter()
    sim = Simulation(scenario.patch, scenario.material, scenario.layout, scenario.options)
    state = sim.initial_state()
    tracker = EventTracker()
    writer = RunWriter(output_dir, sim, cadence, fields) if output_dir is not None else None
    rows, records = [], []
    result = RunResult(scenario.name, rows, tracker.events, records)
    peak = [0.0]
    last = [state]

    def emit(rec, st):
        last[0] = st
        force = 0.0
        if rec is not None and scenario.load_group:
            force = scenario.load_sign * rec.reactions.get(scenario.load_group, 0.0)
        u = scenario.displacement(st.t)
        row = trace_row(st.t, u, force, st, sim)
        rows.append(row)
        if rec is not None:
            records.append(rec)
        peak[0] = max(peak[0], force)
        if writer is not None:
            writer.row(row)
        for ev in tracker.update(st.t, u, st):
            log.info("t=%.6g u=%.6g %s %s", *ev[:4])
            if writer is not None:
                writer.event(ev)
        if writer is not None:
            writer.snapshot(len(rows) - 1, st, force=rec is None)
        if on_row is not None:
            on_row(row)

    try:
        emit(None, state)
        dt = scenario.options.dt
        n_out = int(np.ceil(scenario.t_end / dt - 1e-9))
        if max_steps is not None:
            n_out = min(n_out, int(max_steps))
        for k in range(1, n_out + 1):
            t_target = min(k * dt, scenario.t_end)
            _, state = sim.advance(state, t_target, callback=emit)
            ruptured = any(e[3] == "rupture" for e in tracker.events)
            if (scenario.stop_fraction is not None and ruptured and peak[0] > 0.0
                    and rows[-1][2] < scenario.stop_fraction * peak[0]):
                result.stopped_early = True
                break
        if writer is not None and (len(rows) - 1) % writer.cadence:
            writer.snapshot(len(rows) - 1, state, force=True)
    except StepFailed as exc:
        result.error = str(exc)
        result.state = last[0]
        result.wall_time = time.perf_counter() - t0
        if not _broken(scenario, tracker, rows, peak[0]):
            exc.partial = result
            raise
        # the specimen has already failed; the solver cannot follow the unstable remainder
        result.stopped_early = True
        t, u = rows[-1][0], rows[-1][1]
        log.warning("run terminated at t=%.6g after failure: %s", t, exc)
        if writer is not None:
            writer.note(t, u, f"run terminated after failure: {exc}")
            writer.snapshot(len(rows) - 1, last[0], force=True)
    finally:
        if writer is not None:
            writer.close()
        result.state = last[0]
        result.wall_time = time.perf_counter() - t0
    return result
