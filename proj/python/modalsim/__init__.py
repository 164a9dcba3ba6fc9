# Copyright 2026 The modalsim Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Agent-based simulation of urban travel mode choice."""

import json

from . import _modalsim
from ._modalsim import ModelError, ValidationError, __version__

__all__ = [
    "ModelError",
    "Simulation",
    "SteeringSession",
    "ValidationError",
    "calibrate",
    "default_calibration",
    "run_scenario",
    "score",
    "series_csv",
]


def _text(obj):
    if obj is None:
        return ""
    return obj if isinstance(obj, str) else json.dumps(obj)


def score(values, priorities, mode):
    """Priority-weighted score of `mode`.

    values: {mode: {criterion: 0..100}}, priorities: {criterion: weight}.
    """
    return _modalsim.score(_text(values), _text(priorities), mode)


def default_calibration():
    return json.loads(_modalsim.default_calibration())


def calibrate(path, caps=None, columns=None):
    """Calibration dict computed from a survey CSV."""
    return json.loads(_modalsim.calibrate(str(path), caps or "", _text(columns)))


def run_scenario(scenario, calibration=None, threads=0):
    """One dict per seed: {seed, initial, snapshots}."""
    runs = _modalsim.run_scenario(_text(scenario), _text(calibration), threads)
    return [json.loads(r) for r in runs]


def series_csv(scenario, seed, calibration=None):
    return _modalsim.series_csv(_text(scenario), _text(calibration), seed)


class Simulation:
    def __init__(self, n_agents=200, seed=0, biases=True, habits=True,
                 calibration=None):
        self._sim = _modalsim.Simulation(n_agents, seed, biases, habits,
                                         _text(calibration))

    @property
    def tick(self):
        return self._sim.tick

    def step(self):
        return json.loads(self._sim.step())

    def run(self, ticks):
        return [self.step() for _ in range(ticks)]

    def observe(self):
        return json.loads(self._sim.observe())

    def apply(self, intervention):
        self._sim.apply(_text(intervention))

    def layout(self):
        return json.loads(self._sim.layout())

    def agents(self):
        return json.loads(self._sim.agents())

    def state(self):
        return json.loads(self._sim.state())


class SteeringSession:
    """Transport-free steering session, driven by hand."""

    def __init__(self, seed=0, n_agents=200, calibration=None):
        self._s = _modalsim.SteeringSession(seed, n_agents, _text(calibration))

    @property
    def paused(self):
        return self._s.paused

    def send(self, command):
        self._s.submit(_text(command))

    def process(self):
        self._s.process_commands()

    def advance(self):
        return self._s.advance()

    def events(self):
        return [json.loads(e) for e in self._s.drain_events()]

    def replay_log(self):
        return json.loads(self._s.replay_log())
