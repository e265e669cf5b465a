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

#ifndef LINKER_CHECKPOINT_HPP_
#define LINKER_CHECKPOINT_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "linker/nn.hpp"
#include "linker/tensor.hpp"

namespace linker {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType : std::uint8_t { kF64 = 0, kF32 = 1, kBytes = 2 };

// One named record of a checkpoint file. Numeric records keep their values in
// `values`; kBytes records carry opaque text in `bytes` with shape {size}.
struct CheckpointRecord {
  std::string name;
  Shape shape;
  DType dtype = DType::kF64;
  std::vector<double> values;
  std::string bytes;
};

inline constexpr char kCheckpointMagic[4] = {'L', 'N', 'K', 'R'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: "LNKR", u32 version, u32 record count, then per record
// u32 name length, name, u8 dtype, u32 rank, rank x u64 dims, raw
// little-endian payload.
std::string encode_checkpoint(const std::vector<CheckpointRecord>& records);
std::vector<CheckpointRecord> decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::string& path,
                      const std::vector<CheckpointRecord>& records);
std::vector<CheckpointRecord> read_checkpoint(const std::string& path);

CheckpointRecord tensor_record(const std::string& name, const Tensor& t,
                               DType dtype = DType::kF64);
CheckpointRecord text_record(const std::string& name, const std::string& text);

const CheckpointRecord* find_record(const std::vector<CheckpointRecord>& records,
                                    const std::string& name);

// Copies matching records into the given parameters. Throws FormatError when
// a parameter is missing or its shape differs.
void load_parameters(const std::vector<CheckpointRecord>& records,
                     const ParamList& params, const std::string& prefix = "");

}  // namespace linker

#endif  // LINKER_CHECKPOINT_HPP_
