// Copyright 2026 The Sievebank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIEVEBANK_IO_UTIL_HPP_
#define SIEVEBANK_IO_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"

namespace sievebank {

// Little-endian binary writer over an ostream. All on-disk integers and
// floats in the SJF* formats go through this, independent of host order.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(uint8_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void f32(float v);
  void f64(double v);
  void bytes(const void* data, size_t n);
  void string(const std::string& s);  // u32 length + raw bytes

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  // Reads the whole file up front; the SJF* artifacts are small enough.
  explicit BinaryReader(const std::filesystem::path& path);
  BinaryReader(const uint8_t* data, size_t size);

  uint8_t u8();
  uint32_t u32();
  uint64_t u64();
  float f32();
  double f64();
  void bytes(void* out, size_t n);
  std::string string(size_t max_len = 1 << 20);
  size_t remaining() const { return size_ - pos_; }
  bool at_end() const { return pos_ == size_; }

 private:
  void need(size_t n);
  std::vector<uint8_t> owned_;
  const uint8_t* data_ = nullptr;
  size_t size_ = 0;
  size_t pos_ = 0;
  std::string origin_;
};

// Writes via a sibling temp file and renames into place, so an interrupted
// run never leaves a half-written artifact under the final name.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& producer);

std::string read_text_file(const std::filesystem::path& path);

// %.9g formatting used by the text artifacts (neighbor lists, predictions).
std::string format_g9(double v);

}  // namespace sievebank

#endif  // SIEVEBANK_IO_UTIL_HPP_
