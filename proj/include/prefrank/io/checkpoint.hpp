// Copyright 2026 The prefrank Authors
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
#include <cstring>
#include <fstream>
#include <string>

#include "prefrank/core/param_store.hpp"

namespace prefrank {

// Checkpoint container, little-endian throughout:
//
//   bytes  8   magic "PFRKCKPT"
//   u32        format version (1)
//   u32        sizeof(Real) of the stored tensors (4 or 8)
//   u64        length of the embedded metadata text, then that many bytes
//              (the resolved run configuration, key=value lines)
//   i64        optimizer step counter
//   u64        parameter count, then per parameter:
//     u64      name length, then the name bytes
//     i64 i64  rows, cols
//     payload  rows*cols Reals for value, then m1, then m2 (row-major)
//
// Writing is byte-deterministic for identical stores and metadata.

inline constexpr char kCheckpointMagic[8] = {'P', 'F', 'R', 'K',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError(path + ": truncated checkpoint");
  return v;
}

inline void write_str(std::ostream& out, const std::string& s) {
  write_pod<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_str(std::istream& in, const std::string& path,
                            std::uint64_t max_len) {
  const auto len = read_pod<std::uint64_t>(in, path);
  if (len > max_len) throw IoError(path + ": implausible string length in checkpoint");
  std::string s(static_cast<std::size_t>(len), '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError(path + ": truncated checkpoint");
  return s;
}

template <typename Real>
void write_mat(std::ostream& out, const Matrix<Real>& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(Real) * static_cast<std::size_t>(m.size())));
}

template <typename Real>
void read_mat(std::istream& in, const std::string& path, Matrix<Real>& m) {
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(Real) * static_cast<std::size_t>(m.size())));
  if (!in) throw IoError(path + ": truncated checkpoint");
}

}  // namespace detail

template <typename Real>
void write_checkpoint(const std::string& path, const ParamStore<Real>& store,
                      const std::string& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_pod<std::uint32_t>(out, kCheckpointVersion);
  detail::write_pod<std::uint32_t>(out, sizeof(Real));
  detail::write_str(out, metadata);
  detail::write_pod<std::int64_t>(out, store.step());
  detail::write_pod<std::uint64_t>(out, store.size());
  for (const auto& p : store) {
    detail::write_str(out, p.name);
    detail::write_pod<std::int64_t>(out, p.rows());
    detail::write_pod<std::int64_t>(out, p.cols());
    detail::write_mat(out, p.value);
    detail::write_mat(out, p.m1);
    detail::write_mat(out, p.m2);
  }
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

// Reads a checkpoint into a fresh store; returns the embedded metadata text.
template <typename Real>
std::string read_checkpoint(const std::string& path, ParamStore<Real>& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError("'" + path + "' is not a prefrank checkpoint");
  }
  const auto version = detail::read_pod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto width = detail::read_pod<std::uint32_t>(in, path);
  if (width != sizeof(Real)) {
    throw IoError(path + ": checkpoint stores " + std::to_string(width * 8) +
                  "-bit scalars, expected " + std::to_string(sizeof(Real) * 8));
  }
  std::string metadata = detail::read_str(in, path, 1u << 20);
  const auto step = detail::read_pod<std::int64_t>(in, path);
  const auto count = detail::read_pod<std::uint64_t>(in, path);
  if (store.size() != 0) throw ConfigError("read_checkpoint: store must be empty");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = detail::read_str(in, path, 1u << 16);
    const auto rows = detail::read_pod<std::int64_t>(in, path);
    const auto cols = detail::read_pod<std::int64_t>(in, path);
    if (rows <= 0 || cols <= 0) {
      throw IoError(path + ": parameter '" + name + "' has invalid shape " +
                    shape_str(rows, cols));
    }
    Param<Real>& p = store.add(name, rows, cols);
    detail::read_mat(in, path, p.value);
    detail::read_mat(in, path, p.m1);
    detail::read_mat(in, path, p.m2);
  }
  store.set_step(step);
  return metadata;
}

}  // namespace prefrank
