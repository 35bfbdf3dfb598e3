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
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace insitu {

// Comma-delimited fields without quoting; views point into `line`.
void SplitFields(std::string_view line, std::vector<std::string_view>& out);

// Splits only the first `n` fields into `out` and returns the line's total
// field count, so callers needing a prefix can still reject ragged rows.
std::size_t SplitFieldsPrefix(std::string_view line, std::size_t n,
                              std::vector<std::string_view>& out);

// Header names, trimmed and lower-cased.
std::vector<std::string> ParseHeader(std::string_view line);

// Streams the lines of a file, tracking the byte offset of each. Lines are
// returned without the terminating "\n" or "\r\n".
class LineReader {
 public:
  explicit LineReader(const std::string& path, std::size_t block_size = 1 << 20);
  ~LineReader();

  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // False at end of file. `begin` receives the line's starting offset.
  bool Next(std::string_view& line, std::uint64_t& begin);

  // Offset just past the last returned line, terminator included. This is
  // the number of file bytes the caller has consumed.
  std::uint64_t consumed() const { return consumed_; }

 private:
  bool Fill();

  std::FILE* file_ = nullptr;
  std::size_t block_size_;
  std::size_t next_read_;
  std::string buf_;
  std::size_t pos_ = 0;
  std::uint64_t buf_offset_ = 0;  // file offset of buf_[0]
  std::uint64_t consumed_ = 0;
  bool eof_ = false;
};

std::uint64_t FileSize(const std::string& path);

}  // namespace insitu
