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


#ifndef MODALSIM_RNG_HPP_
#define MODALSIM_RNG_HPP_

#include <random>

namespace modalsim {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits of one engine output,
// so the consumption is exactly one draw per call.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace modalsim

#endif  // MODALSIM_RNG_HPP_
