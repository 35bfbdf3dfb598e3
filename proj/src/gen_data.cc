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

#include "insitu/gen_data.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "insitu/error.h"

namespace insitu {

void GenDataOptions::Validate() const {
  if (columns == 0) throw Error(ErrorKind::kConfig, "gen-data needs at least one column");
  if (!(skew >= 0) || !std::isfinite(skew)) {
    throw Error(ErrorKind::kConfig, "gen-data skew must be a non-negative number");
  }
}

std::vector<std::string> GeneratedHeader(std::uint32_t columns) {
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < columns; ++i) {
    if (i == 0) names.emplace_back("objid");
    else if (i == 1) names.emplace_back("ra");
    else if (i == 2) names.emplace_back("dec");
    else {
      char buf[16];
      std::snprintf(buf, sizeof buf, "c%02u", i);
      names.emplace_back(buf);
    }
  }
  return names;
}

std::uint64_t GenerateCsv(const GenDataOptions& options, const std::string& path) {
  options.Validate();
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw Error(ErrorKind::kIo, "cannot create " + path);

  // Library distributions differ between standard libraries; only the raw
  // engine output of mt19937_64 is portable.
  std::mt19937_64 rng(options.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto normal = [&] {
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * uniform());
  };
  auto bent = [&] { return std::pow(uniform(), 1.0 + options.skew); };

  std::string out;
  const auto header = GeneratedHeader(options.columns);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  std::uint64_t bytes = 0;
  char buf[64];
  auto flush = [&] {
    if (std::fwrite(out.data(), 1, out.size(), f) != out.size()) {
      std::fclose(f);
      throw Error(ErrorKind::kIo, "cannot write " + path);
    }
    bytes += out.size();
    out.clear();
  };
  for (std::uint64_t r = 0; r < options.rows; ++r) {
    for (std::uint32_t c = 0; c < options.columns; ++c) {
      if (c) out += ',';
      int n;
      if (c == 0) {
        n = std::snprintf(buf, sizeof buf, "%llu",
                          static_cast<unsigned long long>(kObjidBase + r));
      } else if (c == 1) {
        n = std::snprintf(buf, sizeof buf, "%.10f", 360.0 * bent());
      } else if (c == 2) {
        n = std::snprintf(buf, sizeof buf, "%.10f", -90.0 + 180.0 * bent());
      } else {
        switch (c % 4) {
          case 0: n = std::snprintf(buf, sizeof buf, "%.10f", 1000.0 * bent()); break;
          case 1: n = std::snprintf(buf, sizeof buf, "%.10f", 50.0 + 10.0 * normal()); break;
          case 2:
            n = std::snprintf(buf, sizeof buf, "%.10f", -std::log1p(-uniform()) * 25.0);
            break;
          default:
            n = std::snprintf(buf, sizeof buf, "%llu",
                              static_cast<unsigned long long>(rng() % 100));
            break;
        }
      }
      out.append(buf, static_cast<std::size_t>(n));
    }
    out += '\n';
    if (out.size() >= (1u << 20)) flush();
  }
  flush();
  if (std::fclose(f) != 0) throw Error(ErrorKind::kIo, "cannot write " + path);
  return bytes;
}

}  // namespace insitu
