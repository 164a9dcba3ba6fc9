// Copyright 2026 The modalsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Synthetic population drawn from calibration statistics.

#ifndef MODALSIM_POPULATION_HPP_
#define MODALSIM_POPULATION_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "modalsim/calibration.hpp"
#include "modalsim/model.hpp"
#include "modalsim/rng.hpp"

namespace modalsim {

// Largest-remainder apportionment of n across the shares; ties in the
// remainders go to the earlier mode in canonical order. Sums exactly to n.
PerMode<std::size_t> allocate_counts(std::size_t n,
                                     const PerMode<double>& shares);

// Draws one agent whose usual mode is `mode`:
//  - priorities: group mean x uniform(0.8, 1.2) per criterion, clamped
//  - distance: Normal(mean, stdev) of the group, redrawn until it lies in
//    (0.1, 200] and keeps the usual mode reachable (walk, bike thresholds)
//  - car/bus access: Bernoulli from the group's access statistics, always
//    granted for the agent's own mode
//  - a full trip window of `mode`, and that mode's filter prototype
// Satisfaction is the score of `mode` under the agent's biased perception.
Agent sample_agent(Mode mode, const CalibrationData& calib, Rng& rng,
                   std::int64_t id = 0, const Reach& reach = {},
                   std::size_t window_capacity = kDefaultWindowCapacity);

// Agents are ordered by canonical mode, ids ascending from 0.
std::vector<Agent> sample_population(
    std::size_t n, const PerMode<double>& shares, const CalibrationData& calib,
    Rng& rng, const Reach& reach = {},
    std::size_t window_capacity = kDefaultWindowCapacity);

}  // namespace modalsim

#endif  // MODALSIM_POPULATION_HPP_
