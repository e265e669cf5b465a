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

#ifndef LINKER_MOLGRAPH_HPP_
#define LINKER_MOLGRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "linker/tensor.hpp"

namespace linker {

class SmilesSyntaxError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Valid SMILES that uses a construct outside the supported subset
// (stereo, isotopes, disconnected components, atom classes).
class UnsupportedFeature : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DisconnectedGraph : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Hybridization : std::uint8_t { kSp = 0, kSp2 = 1, kSp3 = 2, kOther = 3 };

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;  // canonical capitalized symbol, e.g. "C", "Cl"
  int degree = 0;
  Hybridization hybridization = Hybridization::kSp3;
  int formal_charge = 0;
  bool is_aromatic = false;
  int hydrogens = 0;  // implicit + bracket hydrogens; never graph nodes
};

struct Bond {
  std::size_t a = 0;
  std::size_t b = 0;
  BondOrder order = BondOrder::kSingle;

  std::size_t other(std::size_t atom) const { return atom == a ? b : a; }
};

// Heavy-atom graph. Immutable once returned by parse_smiles.
struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<std::size_t> canonical_order;  // SMILES emission order
  std::vector<std::vector<std::size_t>> adjacency;  // bond indices per atom

  std::size_t size() const { return atoms.size(); }
  // Bond index between two atoms, or npos.
  std::size_t bond_between(std::size_t a, std::size_t b) const;
  std::vector<std::size_t> neighbors(std::size_t atom) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Element symbols in encoding order; atom_features column 0 is the index.
const std::vector<std::string>& element_table();
int element_index(std::string_view symbol);

MolecularGraph parse_smiles(std::string_view smiles);

// Writes a SMILES string for the graph by depth-first traversal from atom 0.
// Every atom is emitted in bracket form with its hydrogen count, so parsing
// the result reproduces the graph exactly. `order` receives the emission order.
std::string emit_smiles(const MolecularGraph& graph,
                        std::vector<std::size_t>* order = nullptr);

// Rows are [element_index, degree, hybridization_index, formal_charge,
// is_aromatic].
Tensor atom_features(const MolecularGraph& graph);
inline constexpr std::size_t kAtomFeatureWidth = 5;

// All-pairs hop counts by BFS from every atom.
std::vector<std::vector<int>> shortest_path_distances(const MolecularGraph& graph);

// True when the bond lies on a cycle.
bool bond_in_ring(const MolecularGraph& graph, std::size_t bond);

// Simple cycles of exactly `length` atoms, each reported once with atoms in
// ring order starting from the lowest index.
std::vector<std::vector<std::size_t>> rings_of_size(const MolecularGraph& graph,
                                                    std::size_t length);

}  // namespace linker

#endif  // LINKER_MOLGRAPH_HPP_
