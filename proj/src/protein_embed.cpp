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

#include "linker/protein_embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "linker/hashing.hpp"

namespace linker {

std::size_t residue_index(char residue) {
  const auto pos = kResidueAlphabet.find(residue);
  if (pos == std::string_view::npos) {
    throw AlphabetError(std::string("invalid residue '") + residue + "'");
  }
  return pos;
}

void validate_sequence(const ProteinSequence& seq) {
  if (seq.residues.empty()) throw AlphabetError("empty sequence " + seq.id);
  for (char c : seq.residues) {
    if (kResidueAlphabet.find(c) == std::string_view::npos) {
      throw AlphabetError("sequence " + seq.id + ": invalid residue '" +
                          std::string(1, c) + "'");
    }
  }
}

std::vector<ProteinSequence> parse_fasta(const std::string& text) {
  std::vector<ProteinSequence> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '>') {
      ProteinSequence rec;
      std::istringstream header(line.substr(1));
      header >> rec.id;
      if (rec.id.empty()) throw AlphabetError("FASTA record without id");
      out.push_back(std::move(rec));
      continue;
    }
    if (out.empty()) throw AlphabetError("FASTA sequence data before first header");
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      out.back().residues.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  for (const auto& rec : out) validate_sequence(rec);
  return out;
}

std::vector<ProteinSequence> read_fasta(const std::string& path) {
  return parse_fasta(binio::read_file(path));
}

ProteinSequence concatenate_chains(const std::vector<ProteinSequence>& chains,
                                   const std::string& id) {
  ProteinSequence out{id, {}};
  for (std::size_t i = 0; i < chains.size(); ++i) {
    if (i) out.residues.push_back(kChainSeparator);
    out.residues += chains[i].residues;
  }
  validate_sequence(out);
  return out;
}

std::array<std::uint8_t, 32> sequence_hash(const std::string& residues) {
  return sha256(residues);
}

std::string encode_embeddings(const std::string& residues, const Tensor& matrix) {
  if (matrix.rank() != 2 || matrix.dim(0) != residues.size()) {
    throw ShapeMismatch("encode_embeddings: matrix " + shape_str(matrix.shape()) +
                        " does not match sequence length " +
                        std::to_string(residues.size()));
  }
  std::string out = "LNKE";
  binio::put_u32(out, kEmbeddingVersion);
  const auto hash = sequence_hash(residues);
  out.append(reinterpret_cast<const char*>(hash.data()), hash.size());
  binio::put_u32(out, static_cast<std::uint32_t>(matrix.dim(0)));
  binio::put_u32(out, static_cast<std::uint32_t>(matrix.dim(1)));
  for (double v : matrix.data()) binio::put_f32(out, static_cast<float>(v));
  return out;
}

ResidueEmbeddings decode_embeddings(const std::string& bytes,
                                    const std::string& expected_residues) {
  binio::Reader in(bytes);
  std::string_view hash;
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> values;
  try {
    if (in.take(4, "magic") != "LNKE") throw FormatError("embedding file: bad magic");
    const std::uint32_t version = in.u32("version");
    if (version != kEmbeddingVersion) {
      throw FormatError("embedding file: unsupported version " + std::to_string(version));
    }
    hash = in.take(32, "sequence hash");
    rows = in.u32("R");
    cols = in.u32("D");
    if (rows == 0 || cols == 0) throw FormatError("embedding file: empty matrix");
    if (static_cast<std::uint64_t>(rows) * cols * 4 != in.remaining()) {
      throw FormatError("embedding file: payload size does not match R*D");
    }
    values.resize(static_cast<std::size_t>(rows) * cols);
    for (double& v : values) {
      v = in.f32("value");
      if (!std::isfinite(v)) throw FormatError("embedding file: non-finite value");
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw FormatError(std::string("embedding file: ") + e.what());
  }
  const auto expected = sequence_hash(expected_residues);
  if (!std::equal(expected.begin(), expected.end(),
                  reinterpret_cast<const std::uint8_t*>(hash.data()))) {
    throw SequenceMismatch("embedding file was computed for a different sequence");
  }
  if (rows != expected_residues.size()) {
    throw SequenceMismatch("embedding rows do not match sequence length");
  }
  return {Tensor({rows, cols}, std::move(values)), EmbeddingSource::kFile};
}

void write_embeddings(const std::string& path, const std::string& residues,
                      const Tensor& matrix) {
  binio::write_file(path, encode_embeddings(residues, matrix));
}

ResidueEmbeddings load_embeddings(const std::string& path,
                                  const std::string& expected_residues) {
  return decode_embeddings(binio::read_file(path), expected_residues);
}

FallbackEmbedder::FallbackEmbedder(std::size_t dim, Rng& rng)
    : table_(uniform_param({kResidueVocab, dim}, 1.0 / std::sqrt(static_cast<double>(dim)), rng)),
      mixer_(kWindow * dim, dim, rng) {}

ResidueEmbeddings FallbackEmbedder::embed(const ProteinSequence& seq) const {
  validate_sequence(seq);
  const std::size_t r = seq.residues.size();
  std::vector<std::size_t> ids;
  ids.reserve(r);
  for (char c : seq.residues) ids.push_back(residue_index(c));
  const Tensor e = gather_rows(table_, ids);
  std::vector<Tensor> shifted;
  const long half = static_cast<long>(kWindow / 2);
  for (long off = -half; off <= half; ++off) {
    std::vector<std::size_t> rows(r);
    for (std::size_t i = 0; i < r; ++i) {
      const long j = std::clamp(static_cast<long>(i) + off, 0L, static_cast<long>(r) - 1);
      rows[i] = static_cast<std::size_t>(j);
    }
    shifted.push_back(gather_rows(e, rows));
  }
  const Tensor mixed = relu(mixer_.forward(concat(shifted, 1)));
  return {add(e, mixed), EmbeddingSource::kFallback};
}

void FallbackEmbedder::collect(ParamList& out, const std::string& prefix) const {
  out.push_back({prefix + ".table", table_});
  mixer_.collect(out, prefix + ".mixer");
}

}  // namespace linker
