"""Time loop: compute_dt, predictor, corrector, limiter."""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import ader_dg
from .mood_limiter import Status, mood_step

log = logging.getLogger(__name__)

PROGRESS_EVERY = 100


@dataclass
class RunStats:
    steps: int = 0
    wall: float = 0.0
    troubled_total: int = 0
    troubled_max: int = 0
    floored: int = 0
    extra: dict = field(default_factory=dict)

    def summary(self):
        mean = self.troubled_total / self.steps if self.steps else 0.0
        return (f"steps={self.steps} wall={self.wall:.2f}s "
                f"troubled_mean={mean:.2f} troubled_max={self.troubled_max} "
                f"floored={self.floored}")


def step(field, dt, limiter=True, workers=1, force_troubled=None, stats=None,
         dmp=None):
    """Advance ``field`` by one ADER-DG step of size ``dt``.

    ``dmp`` optionally overrides the limiter's ``delta0`` and ``eps_rel``.
    """
    q, failed = ader_dg.local_predictor(field.u, dt, field.eos, field.mesh, field.N, workers)
    parts = ader_dg.corrector_parts(field, q, dt, workers)
    cand = field.copy()
    cand.u = ader_dg.apply_face_terms(parts, field.mesh, field.N)
    cand.t = field.t + dt
    if not limiter:
        cand.status[...] = Status.UNLIMITED
        cand.sub_valid[...] = False
        return cand
    extra = {} if stats is None else stats.extra
    out = mood_step(field, cand, parts, dt, pred_failed=failed,
                    force_troubled=force_troubled, stats=extra, **(dmp or {}))
    if stats is not None:
        stats.floored = extra.get("floored", 0)
    return out


def run(field, t_end, cfl=None, limiter=True, workers=1, callback=None,
        max_steps=None, force_troubled=None, dmp=None):
    """Integrate to ``t_end``; ``callback(field)`` runs after every step.

    The last step is shortened to land on ``t_end`` exactly.
    """
    stats = RunStats()
    start = time.perf_counter()
    while field.t < t_end and (max_steps is None or stats.steps < max_steps):
        dt = ader_dg.compute_dt(field, cfl)
        if field.t + dt >= t_end:
            dt = t_end - field.t
        field = step(field, dt, limiter, workers, force_troubled, stats, dmp)
        if field.t + 1e-12 * max(1.0, abs(t_end)) >= t_end:
            field.t = t_end
        nt = int(np.count_nonzero(field.status == Status.TROUBLED))
        stats.steps += 1
        stats.troubled_total += nt
        stats.troubled_max = max(stats.troubled_max, nt)
        if callback is not None:
            callback(field)
        if stats.steps % PROGRESS_EVERY == 0:
            log.info("step %d t=%.6g dt=%.3g troubled=%d", stats.steps, field.t, dt, nt)
    stats.wall = time.perf_counter() - start
    return field, stats
