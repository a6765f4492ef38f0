"""Shared clock, counters and trajectory sampling for the engines."""
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..errors import VacuumState
from ..geometry import Configuration
from ..models import Event
from ..observables import Observable
from ..potentials import PairPotential

logger = logging.getLogger(__name__)

EventSink = Callable[[Event], None]


def sample_times(start: float, horizon: float, interval: Optional[float]) -> np.ndarray:
    """Uniform grid start, start + interval, ... up to start + horizon inclusive."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if horizon == 0:
        return np.array([start])
    interval = horizon if interval is None else interval
    if not interval > 0:
        raise ValueError("sample interval must be positive")
    count = int(np.floor(horizon / interval + 1e-9))
    return start + interval * np.arange(count + 1)


class Engine:
    """Base class for event-driven engines.

    Subclasses implement `_total_rate()` and `_fire(time)`; `ssa_step` and
    `run` are shared. Between events the state is constant.
    """

    kind = "engine"

    def __init__(self, potential: PairPotential, config: Configuration,
                 rng: Optional[np.random.Generator] = None, seed: int = 0):
        self.potential = potential
        self.box = config.box
        self.seed = seed
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.state = config.copy()
        self.state.attach(max(potential.range, 1e-9))
        self.clock = 0.0
        self.counters: Dict[str, int] = {}
        self.displacement: Optional[np.ndarray] = None

    def _count(self, kind: str):
        self.counters[kind] = self.counters.get(kind, 0) + 1

    def _total_rate(self) -> float:
        raise NotImplementedError

    def _fire(self, time: float) -> Event:
        raise NotImplementedError

    def _wait(self) -> float:
        total = self._total_rate()
        if total <= 0:
            raise VacuumState(f"{self.kind} engine has no possible event")
        return float(self.rng.exponential(1.0 / total))

    def ssa_step(self) -> Event:
        """Advance to the next (possibly null) event and apply it."""
        self.clock += self._wait()
        return self._fire(self.clock)

    def observe(self, observables: Sequence[Observable]) -> List[float]:
        return [obs(self.state, self.displacement) for obs in observables]

    def run(self, horizon: float, observables: Sequence[Observable],
            sample_interval: Optional[float] = None,
            event_sink: Optional[EventSink] = None) -> pd.DataFrame:
        """Simulate for `horizon` time units and sample observables on a grid.

        Returns:
            DataFrame with column "t" and one column per observable name
        """
        grid = sample_times(self.clock, horizon, sample_interval)
        end = grid[0] + horizon
        rows = []
        k = 0
        while k < len(grid):
            try:
                wait = self._wait()
            except VacuumState:
                wait = np.inf
            next_time = self.clock + wait
            while k < len(grid) and grid[k] < next_time:
                rows.append([grid[k]] + self.observe(observables))
                k += 1
            if next_time > end or k >= len(grid):
                self.clock = max(self.clock, end)
                break
            self.clock = next_time
            event = self._fire(next_time)
            if event_sink is not None:
                event_sink(event)
        self._log_summary()
        names = [obs.name for obs in observables]
        return pd.DataFrame(rows, columns=["t"] + names)

    def null_fraction(self) -> float:
        total = sum(self.counters.values())
        return self.counters.get("null", 0) / total if total else 0.0

    def _log_summary(self):
        logger.info(
            "%s engine at t=%g: counters %s, null fraction %.3f",
            self.kind, self.clock, dict(self.counters), self.null_fraction(),
        )
