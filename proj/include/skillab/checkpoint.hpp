// Copyright 2026 The skillab Authors
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

#ifndef SKILLAB_CHECKPOINT_HPP_
#define SKILLAB_CHECKPOINT_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "skillab/mlp.hpp"
#include "skillab/types.hpp"

namespace skillab {

// Versioned binary container: a magic header followed by named entries, each
// either a scalar array with an explicit shape header or an opaque blob.
// Numeric payloads are raw little-endian IEEE values, so save -> load -> save
// reproduces the file byte for byte.
//
//   magic        8 bytes "SKLBCKP1"
//   version      u32
//   scalar_size  u32 (4 = float, 8 = double)
//   entry_count  u64
//   entry        u32 name_len | name | u8 kind | payload
//     kind 0 (array): u32 ndims | u64 dims[] | scalars
//     kind 1 (blob):  u64 size | bytes

struct CheckpointEntry {
  std::vector<std::uint64_t> dims;  // arrays only
  std::vector<double> values;       // arrays only (held as double in memory)
  std::string blob;                 // blobs only
  bool is_blob = false;
};

class Checkpoint {
 public:
  int scalar_size = 8;
  std::map<std::string, CheckpointEntry> entries;

  template <typename S>
  void put_array(const std::string& name, const VecX<S>& values) {
    CheckpointEntry entry;
    entry.dims = {static_cast<std::uint64_t>(values.size())};
    entry.values.assign(values.data(), values.data() + values.size());
    entries[name] = std::move(entry);
  }

  void put_blob(const std::string& name, std::string blob) {
    CheckpointEntry entry;
    entry.is_blob = true;
    entry.blob = std::move(blob);
    entries[name] = std::move(entry);
  }

  const CheckpointEntry& at(const std::string& name) const {
    const auto it = entries.find(name);
    if (it == entries.end()) throw IoError("checkpoint: missing entry '" + name + "'");
    return it->second;
  }

  template <typename S>
  VecX<S> array(const std::string& name, Index expected_size = -1) const {
    const CheckpointEntry& entry = at(name);
    if (entry.is_blob) throw IoError("checkpoint: '" + name + "' is not an array");
    const Index n = static_cast<Index>(entry.values.size());
    if (expected_size >= 0 && n != expected_size) {
      throw DimensionError("checkpoint: '" + name + "' has " + std::to_string(n) +
                           " values, expected " + std::to_string(expected_size));
    }
    VecX<S> out(n);
    for (Index i = 0; i < n; ++i) out[i] = static_cast<S>(entry.values[i]);
    return out;
  }

  std::string blob(const std::string& name) const {
    const CheckpointEntry& entry = at(name);
    if (!entry.is_blob) throw IoError("checkpoint: '" + name + "' is not a blob");
    return entry.blob;
  }

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("checkpoint: truncated file");
  return value;
}

}  // namespace detail

inline void Checkpoint::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("checkpoint: cannot write '" + tmp + "'");
    out.write("SKLBCKP1", 8);
    detail::write_pod<std::uint32_t>(out, 1u);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(scalar_size));
    detail::write_pod<std::uint64_t>(out, entries.size());
    for (const auto& [name, entry] : entries) {
      detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      detail::write_pod<std::uint8_t>(out, entry.is_blob ? 1 : 0);
      if (entry.is_blob) {
        detail::write_pod<std::uint64_t>(out, entry.blob.size());
        out.write(entry.blob.data(), static_cast<std::streamsize>(entry.blob.size()));
      } else {
        detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(entry.dims.size()));
        for (std::uint64_t d : entry.dims) detail::write_pod<std::uint64_t>(out, d);
        if (scalar_size == 8) {
          out.write(reinterpret_cast<const char*>(entry.values.data()),
                    static_cast<std::streamsize>(entry.values.size() * sizeof(double)));
        } else {
          for (double v : entry.values) {
            detail::write_pod<float>(out, static_cast<float>(v));
          }
        }
      }
    }
    if (!out) throw IoError("checkpoint: write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("checkpoint: cannot rename '" + tmp + "' to '" + path + "'");
}

inline Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SKLBCKP1", 8) != 0) {
    throw IoError("checkpoint: '" + path + "' is not a skillab checkpoint");
  }
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != 1) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.scalar_size = static_cast<int>(detail::read_pod<std::uint32_t>(in));
  if (ckpt.scalar_size != 4 && ckpt.scalar_size != 8) {
    throw IoError("checkpoint: invalid scalar size");
  }
  const auto count = detail::read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = detail::read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto kind = detail::read_pod<std::uint8_t>(in);
    CheckpointEntry entry;
    if (kind == 1) {
      entry.is_blob = true;
      const auto size = detail::read_pod<std::uint64_t>(in);
      entry.blob.resize(size);
      in.read(entry.blob.data(), static_cast<std::streamsize>(size));
    } else {
      const auto ndims = detail::read_pod<std::uint32_t>(in);
      std::uint64_t total = 1;
      for (std::uint32_t d = 0; d < ndims; ++d) {
        entry.dims.push_back(detail::read_pod<std::uint64_t>(in));
        total *= entry.dims.back();
      }
      entry.values.resize(total);
      if (ckpt.scalar_size == 8) {
        in.read(reinterpret_cast<char*>(entry.values.data()),
                static_cast<std::streamsize>(total * sizeof(double)));
      } else {
        for (std::uint64_t v = 0; v < total; ++v) {
          entry.values[v] = detail::read_pod<float>(in);
        }
      }
    }
    if (!in) throw IoError("checkpoint: truncated entry '" + name + "'");
    ckpt.entries[name] = std::move(entry);
  }
  return ckpt;
}

inline std::string serialize_net_spec(const NetSpec& spec) {
  std::string out;
  for (std::size_t i = 0; i < spec.layer_widths.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(spec.layer_widths[i]);
  }
  out += "|" + to_string(spec.hidden_activation) + "|" +
         to_string(spec.output_activation);
  return out;
}

inline NetSpec parse_net_spec(const std::string& text) {
  NetSpec spec;
  std::stringstream ss(text);
  std::string widths, hidden, output;
  if (!std::getline(ss, widths, '|') || !std::getline(ss, hidden, '|') ||
      !std::getline(ss, output)) {
    throw IoError("checkpoint: malformed net spec '" + text + "'");
  }
  std::stringstream ws(widths);
  std::string w;
  while (std::getline(ws, w, ',')) spec.layer_widths.push_back(std::stoi(w));
  spec.hidden_activation = hidden == "relu" ? Activation::kRelu : Activation::kElu;
  spec.output_activation =
      output == "tanh" ? OutputActivation::kTanh : OutputActivation::kIdentity;
  spec.validate();
  return spec;
}

}  // namespace skillab

#endif  // SKILLAB_CHECKPOINT_HPP_
