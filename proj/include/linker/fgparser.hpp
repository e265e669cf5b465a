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

#ifndef LINKER_FGPARSER_HPP_
#define LINKER_FGPARSER_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "linker/molgraph.hpp"

namespace linker {

class CoverageViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Tri : std::uint8_t { kAny, kYes, kNo };

enum class BondSpec : std::uint8_t { kAny, kSingle, kDouble, kTriple, kAromatic };

// Per-atom constraints. Empty `elements` accepts any element; empty
// `neighbor_elements` places no restriction on the atom's neighbors.
struct AtomSpec {
  std::vector<std::string> elements;
  Tri aromatic = Tri::kAny;
  std::optional<int> charge;
  int min_hydrogens = 0;
  int max_hydrogens = 8;
  int min_degree = 0;
  int max_degree = 8;
  // "Acyl" here means carrying a non-aromatic double bond to O, S or N.
  Tri acyl = Tri::kAny;
  std::vector<std::string> neighbor_elements;
};

struct NeighborSpec {
  AtomSpec atom;
  BondSpec bond = BondSpec::kAny;
  bool member = true;
  std::vector<NeighborSpec> neighbors;  // matched among this atom's neighbors
};

struct FunctionalGroupPattern {
  enum class Kind : std::uint8_t { kNeighborhood, kAromaticRing6, kAromaticRing5Hetero };

  int pattern_id = 0;
  std::string name;
  Kind kind = Kind::kNeighborhood;
  AtomSpec root;
  bool root_member = true;
  std::vector<NeighborSpec> neighbors;
};

inline constexpr int kFallbackPattern = -1;

struct GroupAssignment {
  int group_id = 0;
  int pattern_id = kFallbackPattern;
  std::vector<std::size_t> member_atoms;    // from detection, sorted
  std::vector<std::size_t> assigned_atoms;  // added by interpolation, sorted

  std::vector<std::size_t> all_atoms() const;
};

// Binary N_atom x F membership matrix.
struct AtomGroupMatrix {
  std::size_t n_atoms = 0;
  std::size_t n_groups = 0;
  std::vector<std::uint8_t> entries;  // row-major

  std::uint8_t at(std::size_t atom, std::size_t group) const {
    return entries[atom * n_groups + group];
  }
};

// The built-in catalogue, ordered by pattern_id (0..size-1).
const std::vector<FunctionalGroupPattern>& default_catalogue();

// SHA-256 (hex, first 16 chars) over the catalogue's ids and names. Label
// files carry it so group indices cannot silently drift.
std::string catalogue_hash(const std::vector<FunctionalGroupPattern>& catalogue);

std::string pattern_name(const std::vector<FunctionalGroupPattern>& catalogue,
                         int pattern_id);

// Every match of every pattern, deduplicated per (pattern, atom set), with
// dense group ids ordered by (pattern_id, lowest member atom).
std::vector<GroupAssignment> detect_groups(
    const MolecularGraph& graph,
    const std::vector<FunctionalGroupPattern>& catalogue);

// Gives each uncovered atom to the group with the nearest detected member
// (hop distance); ties go to the lowest group_id. With no groups, returns a
// single fallback group holding every atom.
std::vector<GroupAssignment> interpolate_unassigned(
    const MolecularGraph& graph, std::vector<GroupAssignment> groups);

AtomGroupMatrix build_matrix(std::size_t n_atoms,
                             const std::vector<GroupAssignment>& groups);

// Detection, interpolation and matrix in one call.
struct LigandGroups {
  std::vector<GroupAssignment> groups;
  AtomGroupMatrix matrix;
};
LigandGroups parse_functional_groups(
    const MolecularGraph& graph,
    const std::vector<FunctionalGroupPattern>& catalogue = default_catalogue());

// One line of groups.jsonl:
// {"id", "n_atoms", "catalogue_hash", "groups":[{"group_id","pattern","atoms"}],
//  "matrix": row-major bits}
std::string groups_record_json(const std::string& id, const LigandGroups& lg,
                               const std::vector<FunctionalGroupPattern>& catalogue);

struct GroupsRecord {
  std::string id;
  std::size_t n_atoms = 0;
  std::string catalogue_hash;
  std::vector<std::string> patterns;
  std::vector<std::vector<std::size_t>> atoms;
  AtomGroupMatrix matrix;
};
GroupsRecord parse_groups_record(const std::string& line);

}  // namespace linker

#endif  // LINKER_FGPARSER_HPP_
