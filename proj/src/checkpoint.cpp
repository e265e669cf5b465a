/*
 * Copyright 2026 The Linker Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "linker/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"

namespace linker {

namespace binio {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace binio

std::string encode_checkpoint(const std::vector<CheckpointRecord>& records) {
  std::string out(kCheckpointMagic, 4);
  binio::put_u32(out, kCheckpointVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    binio::put_u32(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    out.push_back(static_cast<char>(r.dtype));
    binio::put_u32(out, static_cast<std::uint32_t>(r.shape.size()));
    for (std::size_t d : r.shape) binio::put_u64(out, d);
    const std::size_t n = shape_numel(r.shape);
    switch (r.dtype) {
      case DType::kF64:
        if (r.values.size() != n) throw FormatError("record " + r.name + ": value count mismatch");
        for (double v : r.values) binio::put_f64(out, v);
        break;
      case DType::kF32:
        if (r.values.size() != n) throw FormatError("record " + r.name + ": value count mismatch");
        for (double v : r.values) binio::put_f32(out, static_cast<float>(v));
        break;
      case DType::kBytes:
        if (r.bytes.size() != n) throw FormatError("record " + r.name + ": byte count mismatch");
        out += r.bytes;
        break;
    }
  }
  return out;
}

std::vector<CheckpointRecord> decode_checkpoint(const std::string& bytes) {
  binio::Reader in(bytes);
  try {
    if (in.take(4, "magic") != std::string_view(kCheckpointMagic, 4)) {
      throw FormatError("checkpoint: bad magic");
    }
    const std::uint32_t version = in.u32("version");
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const std::uint32_t count = in.u32("record count");
    std::vector<CheckpointRecord> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      CheckpointRecord r;
      const std::uint32_t name_len = in.u32("name length");
      r.name = std::string(in.take(name_len, "name"));
      const auto dtype = static_cast<std::uint8_t>(in.take(1, "dtype")[0]);
      if (dtype > 2) throw FormatError("checkpoint: unknown dtype in " + r.name);
      r.dtype = static_cast<DType>(dtype);
      const std::uint32_t rank = in.u32("rank");
      for (std::uint32_t k = 0; k < rank; ++k) r.shape.push_back(in.u64("dim"));
      const std::size_t n = shape_numel(r.shape);
      if (r.dtype == DType::kBytes) {
        r.bytes = std::string(in.take(n, "bytes"));
      } else {
        const std::size_t width = r.dtype == DType::kF64 ? 8 : 4;
        if (n > in.remaining() / width) throw FormatError("checkpoint: truncated record " + r.name);
        r.values.resize(n);
        for (double& v : r.values) v = r.dtype == DType::kF64 ? in.f64("value") : in.f32("value");
      }
      records.push_back(std::move(r));
    }
    if (!in.done()) throw FormatError("checkpoint: trailing bytes");
    return records;
  } catch (const FormatError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void write_checkpoint(const std::string& path,
                      const std::vector<CheckpointRecord>& records) {
  binio::write_file(path, encode_checkpoint(records));
}

std::vector<CheckpointRecord> read_checkpoint(const std::string& path) {
  return decode_checkpoint(binio::read_file(path));
}

CheckpointRecord tensor_record(const std::string& name, const Tensor& t,
                               DType dtype) {
  CheckpointRecord r;
  r.name = name;
  r.shape = t.shape();
  r.dtype = dtype;
  r.values.assign(t.data().begin(), t.data().end());
  return r;
}

CheckpointRecord text_record(const std::string& name, const std::string& text) {
  CheckpointRecord r;
  r.name = name;
  r.shape = {text.size()};
  r.dtype = DType::kBytes;
  r.bytes = text;
  return r;
}

const CheckpointRecord* find_record(const std::vector<CheckpointRecord>& records,
                                    const std::string& name) {
  auto it = std::find_if(records.begin(), records.end(),
                         [&](const CheckpointRecord& r) { return r.name == name; });
  return it == records.end() ? nullptr : &*it;
}

void load_parameters(const std::vector<CheckpointRecord>& records,
                     const ParamList& params, const std::string& prefix) {
  for (const auto& p : params) {
    const CheckpointRecord* r = find_record(records, prefix + p.name);
    if (r == nullptr) throw FormatError("checkpoint: missing parameter " + prefix + p.name);
    if (r->shape != p.tensor.shape() || r->dtype == DType::kBytes) {
      throw FormatError("checkpoint: parameter " + p.name + " has shape " +
                        shape_str(r->shape) + ", expected " +
                        shape_str(p.tensor.shape()));
    }
    Tensor t = p.tensor;
    std::copy(r->values.begin(), r->values.end(), t.mutable_data().begin());
  }
}

}  // namespace linker
