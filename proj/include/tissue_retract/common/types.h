// Copyright 2026 The TissueRetract Authors
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

#ifndef TISSUE_RETRACT_COMMON_TYPES_H_
#define TISSUE_RETRACT_COMMON_TYPES_H_

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace tissue_retract {

using Vec3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

// SplitMix64 finalizer; maps (base, stream) to a well-mixed child seed so
// sibling streams (episodes, seeds, workers) never share RNG state.
inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tissue_retract

#endif  // TISSUE_RETRACT_COMMON_TYPES_H_
