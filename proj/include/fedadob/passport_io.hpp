//
// Copyright 2026 The fedadob Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FEDADOB_PASSPORT_IO_HPP
#define FEDADOB_PASSPORT_IO_HPP

#include <json.hpp>

#include "fedadob/passport.hpp"

namespace fedadob {

// Sidecar format: generator seed and parameters only, never raw samples. A
// party restarting from the sidecar regenerates bit-identical passports.
inline nlohmann::json passport_sidecar_json(const PassportSampler& sampler) {
  const PassportGenParams& p = sampler.params();
  return nlohmann::json{{"seed", sampler.seed()},
                        {"passport_mean_range", p.passport_mean_range},
                        {"sigma2", p.sigma2},
                        {"channels", p.channels},
                        {"per_channel_shape", p.per_channel_shape}};
}

inline PassportSampler sampler_from_sidecar(const nlohmann::json& j) {
  PassportGenParams p;
  try {
    p.passport_mean_range = j.at("passport_mean_range").get<double>();
    p.sigma2 = j.at("sigma2").get<double>();
    p.channels = j.at("channels").get<std::size_t>();
    p.per_channel_shape = j.at("per_channel_shape").get<Shape>();
    return PassportSampler(p, j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad passport sidecar: ") + e.what());
  }
}

}  // namespace fedadob

#endif  // FEDADOB_PASSPORT_IO_HPP
