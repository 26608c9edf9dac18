// Copyright 2026 The ckad Authors.
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

#include "ckad/tensor_file.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <vector>

#include "ckad/error.hpp"

namespace ckad {
namespace {

constexpr char kMagic[4] = {'C', 'K', 'T', '1'};

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto& shape = t.shape();
  if (shape.size() > 255) throw FormatError(path.string() + ": too many dimensions");
  std::vector<unsigned char> buf(kMagic, kMagic + 4);
  buf.push_back(static_cast<unsigned char>(shape.size()));
  for (auto e : shape) {
    if (e > 0xffffffffu) throw FormatError(path.string() + ": extent exceeds u32");
    put_u32(buf, static_cast<std::uint32_t>(e));
  }
  for (double v : t.data()) put_u64(buf, std::bit_cast<std::uint64_t>(v));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (buf.size() < 5 || !std::equal(kMagic, kMagic + 4, buf.begin()))
    throw FormatError(where + ": bad magic");
  const std::size_t ndim = buf[4];
  if (ndim == 0) throw FormatError(where + ": zero dimensions");
  std::size_t off = 5;
  if (buf.size() < off + 4 * ndim) throw FormatError(where + ": truncated header");
  Shape shape(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    shape[i] = static_cast<std::size_t>(get_le(buf.data() + off, 4));
    if (shape[i] == 0) throw FormatError(where + ": zero extent");
    count *= shape[i];
    off += 4;
  }
  if (buf.size() != off + 8 * count)
    throw FormatError(where + ": expected " + std::to_string(off + 8 * count) + " bytes, found " +
                      std::to_string(buf.size()));
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<double>(get_le(buf.data() + off, 8));
    if (!std::isfinite(values[i])) throw FormatError(where + ": non-finite value");
    off += 8;
  }
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace ckad
