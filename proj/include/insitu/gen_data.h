// Copyright 2026 The insitu Authors
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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace insitu {

// Seeded survey-like table. Column 0 is `objid`, a strictly increasing
// integer key; then `ra` in [0, 360), `dec` in [-90, 90), then `c03`... with
// a rotating mix of uniform, normal, exponential and small-integer columns.
// `skew` >= 0 bends the uniform columns toward their lower bound.
struct GenDataOptions {
  std::uint64_t rows = 1000;
  std::uint32_t columns = 30;
  std::uint64_t seed = 1;
  double skew = 0;

  void Validate() const;  // throws Error(kConfig)
};

inline constexpr std::uint64_t kObjidBase = 1237645879000ULL;

std::vector<std::string> GeneratedHeader(std::uint32_t columns);

// Writes the CSV (header included) and returns its size in bytes.
std::uint64_t GenerateCsv(const GenDataOptions& options, const std::string& path);

}  // namespace insitu
