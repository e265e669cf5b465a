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

#ifndef LINKER_PROTEIN_EMBED_HPP_
#define LINKER_PROTEIN_EMBED_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "linker/checkpoint.hpp"
#include "linker/nn.hpp"
#include "linker/tensor.hpp"

namespace linker {

class AlphabetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The embedding file was computed for a different sequence.
class SequenceMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 20 standard amino acids, then 'X' (unknown / chain separator).
inline constexpr std::string_view kResidueAlphabet = "ACDEFGHIKLMNPQRSTVWYX";
inline constexpr std::size_t kResidueVocab = 21;
inline constexpr char kChainSeparator = 'X';
inline constexpr std::size_t kDefaultFileEmbeddingDim = 960;
inline constexpr std::size_t kDefaultFallbackEmbeddingDim = 64;

struct ProteinSequence {
  std::string id;
  std::string residues;
};

// Index into kResidueAlphabet; throws AlphabetError for anything else.
std::size_t residue_index(char residue);
void validate_sequence(const ProteinSequence& seq);

// Standard FASTA: '>' header (id = first whitespace-delimited token), then
// sequence lines. Lowercase residues are upper-cased.
std::vector<ProteinSequence> read_fasta(const std::string& path);
std::vector<ProteinSequence> parse_fasta(const std::string& text);

// Joins the chains of one multi-chain protein with the 'X' separator.
ProteinSequence concatenate_chains(const std::vector<ProteinSequence>& chains,
                                   const std::string& id);

enum class EmbeddingSource : std::uint8_t { kFile, kFallback };

struct ResidueEmbeddings {
  Tensor matrix;  // (R, D)
  EmbeddingSource source = EmbeddingSource::kFile;
  std::size_t dim() const { return matrix.dim(1); }
};

// LNKE layout: "LNKE", u32 version (1), 32-byte SHA-256 of the residue
// string, u32 R, u32 D, then R*D little-endian f32 values row-major.
inline constexpr std::uint32_t kEmbeddingVersion = 1;

std::array<std::uint8_t, 32> sequence_hash(const std::string& residues);

std::string encode_embeddings(const std::string& residues, const Tensor& matrix);
ResidueEmbeddings decode_embeddings(const std::string& bytes,
                                    const std::string& expected_residues);

void write_embeddings(const std::string& path, const std::string& residues,
                      const Tensor& matrix);
ResidueEmbeddings load_embeddings(const std::string& path,
                                  const std::string& expected_residues);

// Trainable stand-in for a protein language model: per-residue table lookup
// followed by a width-5 window mixer with edge-replicated borders,
//   H[r] = E[r] + relu(concat(E[r-2..r+2]) W + b).
class FallbackEmbedder {
 public:
  static constexpr std::size_t kWindow = 5;

  FallbackEmbedder() = default;
  FallbackEmbedder(std::size_t dim, Rng& rng);

  std::size_t dim() const { return table_.dim(1); }
  ResidueEmbeddings embed(const ProteinSequence& seq) const;
  void collect(ParamList& out, const std::string& prefix) const;

  Tensor& table() { return table_; }
  Linear& mixer() { return mixer_; }

 private:
  Tensor table_;  // (21, dim)
  Linear mixer_;  // (5*dim -> dim)
};

}  // namespace linker

#endif  // LINKER_PROTEIN_EMBED_HPP_
