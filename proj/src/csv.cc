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

#include "insitu/csv.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <system_error>

#include "insitu/error.h"

namespace insitu {

void SplitFields(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::size_t SplitFieldsPrefix(std::string_view line, std::size_t n,
                              std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (out.size() < n) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out.size();
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  const std::string_view rest = line.substr(start);
  return n + 1 + static_cast<std::size_t>(std::count(rest.begin(), rest.end(), ','));
}

std::vector<std::string> ParseHeader(std::string_view line) {
  std::vector<std::string_view> views;
  SplitFields(line, views);
  std::vector<std::string> names;
  names.reserve(views.size());
  for (auto v : views) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    std::string name(v);
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    names.push_back(std::move(name));
  }
  return names;
}

LineReader::LineReader(const std::string& path, std::size_t block_size)
    : block_size_(block_size), next_read_(std::min<std::size_t>(block_size, 64 << 10)) {
  file_ = std::fopen(path.c_str(), "rb");
  if (file_ == nullptr) throw Error(ErrorKind::kIo, "cannot open " + path);
}

LineReader::~LineReader() {
  if (file_ != nullptr) std::fclose(file_);
}

bool LineReader::Fill() {
  if (eof_) return false;
  if (pos_ > 0) {
    buf_.erase(0, pos_);
    buf_offset_ += pos_;
    pos_ = 0;
  }
  // Reads start small and double, so a scan that stops early reads little
  // more than it consumes.
  const std::size_t want = next_read_;
  next_read_ = std::min(next_read_ * 2, block_size_);
  const std::size_t old = buf_.size();
  buf_.resize(old + want);
  const std::size_t got = std::fread(buf_.data() + old, 1, want, file_);
  buf_.resize(old + got);
  if (got < want) {
    if (std::ferror(file_)) throw Error(ErrorKind::kIo, "read error");
    eof_ = true;
  }
  return got > 0;
}

bool LineReader::Next(std::string_view& line, std::uint64_t& begin) {
  std::size_t nl;
  while ((nl = buf_.find('\n', pos_)) == std::string::npos) {
    if (!Fill()) {
      if (pos_ >= buf_.size()) return false;
      // Final line without a terminator.
      nl = buf_.size();
      break;
    }
  }
  begin = buf_offset_ + pos_;
  std::size_t end = nl;
  if (end > pos_ && buf_[end - 1] == '\r') --end;
  line = std::string_view(buf_).substr(pos_, end - pos_);
  pos_ = nl < buf_.size() ? nl + 1 : nl;
  consumed_ = buf_offset_ + pos_;
  return true;
}

std::uint64_t FileSize(const std::string& path) {
  std::error_code ec;
  const auto n = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot stat " + path + ": " + ec.message());
  return n;
}

}  // namespace insitu
