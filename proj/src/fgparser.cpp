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

#include "linker/fgparser.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "linker/hashing.hpp"

namespace linker {

namespace {

using Kind = FunctionalGroupPattern::Kind;

AtomSpec el(std::initializer_list<const char*> elements) {
  AtomSpec s;
  for (const char* e : elements) s.elements.emplace_back(e);
  return s;
}

AtomSpec aliphatic(AtomSpec s) {
  s.aromatic = Tri::kNo;
  return s;
}

AtomSpec with_h(AtomSpec s, int lo, int hi) {
  s.min_hydrogens = lo;
  s.max_hydrogens = hi;
  return s;
}

AtomSpec with_degree(AtomSpec s, int lo, int hi) {
  s.min_degree = lo;
  s.max_degree = hi;
  return s;
}

AtomSpec with_charge(AtomSpec s, int charge) {
  s.charge = charge;
  return s;
}

AtomSpec non_acyl(AtomSpec s) {
  s.acyl = Tri::kNo;
  return s;
}

NeighborSpec nb(AtomSpec atom, BondSpec bond, bool member,
                std::vector<NeighborSpec> nested = {}) {
  return NeighborSpec{std::move(atom), bond, member, std::move(nested)};
}

FunctionalGroupPattern neighborhood(std::string name, AtomSpec root, bool root_member,
                                    std::vector<NeighborSpec> neighbors) {
  FunctionalGroupPattern p;
  p.name = std::move(name);
  p.kind = Kind::kNeighborhood;
  p.root = std::move(root);
  p.root_member = root_member;
  p.neighbors = std::move(neighbors);
  return p;
}

std::vector<FunctionalGroupPattern> make_catalogue() {
  const auto S = BondSpec::kSingle;
  const auto D = BondSpec::kDouble;
  const auto T = BondSpec::kTriple;
  std::vector<FunctionalGroupPattern> c;

  // Alcohol or phenol O-H; the carbon must not be acyl (excludes acids).
  c.push_back(neighborhood("hydroxyl", with_charge(with_degree(with_h(el({"O"}), 1, 1), 1, 1), 0), true,
                           {nb(non_acyl(el({"C"})), S, false)}));
  c.push_back(neighborhood("carboxylic_acid", aliphatic(el({"C"})), true,
                           {nb(el({"O"}), D, true),
                            nb(with_degree(with_h(el({"O"}), 1, 1), 1, 1), S, true)}));
  c.push_back(neighborhood("carboxylate", aliphatic(el({"C"})), true,
                           {nb(el({"O"}), D, true),
                            nb(with_charge(with_degree(el({"O"}), 1, 1), -1), S, true)}));
  c.push_back(neighborhood("ester", aliphatic(el({"C"})), true,
                           {nb(el({"O"}), D, true),
                            nb(with_h(with_degree(el({"O"}), 2, 2), 0, 0), S, true,
                               {nb(el({"C"}), S, false)})}));
  c.push_back(neighborhood("ether", with_charge(aliphatic(with_h(with_degree(el({"O"}), 2, 2), 0, 0)), 0), true,
                           {nb(non_acyl(el({"C"})), S, false), nb(non_acyl(el({"C"})), S, false)}));
  {
    AtomSpec root = aliphatic(with_degree(with_h(el({"C"}), 1, 2), 1, 2));
    root.neighbor_elements = {"C", "O"};
    c.push_back(neighborhood("aldehyde", root, true, {nb(el({"O"}), D, true)}));
  }
  c.push_back(neighborhood("ketone", aliphatic(with_degree(el({"C"}), 3, 3)), true,
                           {nb(el({"O"}), D, true), nb(el({"C"}), S, false),
                            nb(el({"C"}), S, false)}));
  c.push_back(neighborhood("amide", aliphatic(el({"C"})), true,
                           {nb(el({"O"}), D, true), nb(aliphatic(el({"N"})), S, true)}));
  c.push_back(neighborhood("primary_amine", aliphatic(with_degree(with_h(el({"N"}), 2, 2), 1, 1)), true,
                           {nb(non_acyl(el({"C"})), S, false)}));
  c.push_back(neighborhood("secondary_amine", aliphatic(with_degree(with_h(el({"N"}), 1, 1), 2, 2)), true,
                           {nb(non_acyl(el({"C"})), S, false), nb(non_acyl(el({"C"})), S, false)}));
  c.push_back(neighborhood("tertiary_amine",
                           with_charge(aliphatic(with_degree(with_h(el({"N"}), 0, 0), 3, 3)), 0), true,
                           {nb(non_acyl(el({"C"})), S, false), nb(non_acyl(el({"C"})), S, false),
                            nb(non_acyl(el({"C"})), S, false)}));
  c.push_back(neighborhood("nitro", with_charge(el({"N"}), 1), true,
                           {nb(el({"O"}), D, true), nb(with_charge(el({"O"}), -1), S, true)}));
  c.push_back(neighborhood("nitrile", aliphatic(el({"C"})), true,
                           {nb(with_degree(el({"N"}), 1, 1), T, true)}));
  c.push_back(neighborhood("thiol", with_degree(with_h(el({"S"}), 1, 1), 1, 1), true,
                           {nb(el({"C"}), S, false)}));
  c.push_back(neighborhood("thioether", with_charge(aliphatic(with_h(with_degree(el({"S"}), 2, 2), 0, 0)), 0), true,
                           {nb(el({"C"}), S, false), nb(el({"C"}), S, false)}));
  c.push_back(neighborhood("sulfonamide", el({"S"}), true,
                           {nb(el({"O"}), D, true), nb(el({"O"}), D, true),
                            nb(aliphatic(el({"N"})), S, true)}));
  c.push_back(neighborhood("phosphate", el({"P"}), true,
                           {nb(el({"O"}), D, true), nb(el({"O"}), S, true),
                            nb(el({"O"}), S, true), nb(el({"O"}), S, true)}));
  c.push_back(neighborhood("halogen_c", with_degree(el({"F", "Cl", "Br", "I"}), 1, 1), true,
                           {nb(el({"C"}), S, false)}));
  {
    FunctionalGroupPattern p;
    p.name = "aromatic_ring6";
    p.kind = Kind::kAromaticRing6;
    c.push_back(p);
    p.name = "aromatic_ring5_hetero";
    p.kind = Kind::kAromaticRing5Hetero;
    c.push_back(p);
  }
  c.push_back(neighborhood("guanidine", aliphatic(with_degree(el({"C"}), 3, 3)), true,
                           {nb(aliphatic(el({"N"})), D, true), nb(aliphatic(el({"N"})), S, true),
                            nb(aliphatic(el({"N"})), S, true)}));
  c.push_back(neighborhood("urea", aliphatic(with_degree(el({"C"}), 3, 3)), true,
                           {nb(el({"O"}), D, true), nb(aliphatic(el({"N"})), S, true),
                            nb(aliphatic(el({"N"})), S, true)}));
  c.push_back(neighborhood("alkene", aliphatic(el({"C"})), true,
                           {nb(aliphatic(el({"C"})), D, true)}));
  c.push_back(neighborhood("alkyne", aliphatic(el({"C"})), true,
                           {nb(aliphatic(el({"C"})), T, true)}));
  for (std::size_t i = 0; i < c.size(); ++i) c[i].pattern_id = static_cast<int>(i);
  return c;
}

bool is_acyl(const MolecularGraph& g, std::size_t atom) {
  for (std::size_t bi : g.adjacency[atom]) {
    if (g.bonds[bi].order != BondOrder::kDouble) continue;
    const std::string& e = g.atoms[g.bonds[bi].other(atom)].element;
    if (e == "O" || e == "S" || e == "N") return true;
  }
  return false;
}

bool tri_ok(Tri t, bool value) {
  return t == Tri::kAny || (t == Tri::kYes) == value;
}

bool atom_ok(const MolecularGraph& g, std::size_t i, const AtomSpec& s) {
  const Atom& a = g.atoms[i];
  if (!s.elements.empty() &&
      std::find(s.elements.begin(), s.elements.end(), a.element) == s.elements.end()) {
    return false;
  }
  if (!tri_ok(s.aromatic, a.is_aromatic)) return false;
  if (s.charge && *s.charge != a.formal_charge) return false;
  if (a.hydrogens < s.min_hydrogens || a.hydrogens > s.max_hydrogens) return false;
  if (a.degree < s.min_degree || a.degree > s.max_degree) return false;
  if (s.acyl != Tri::kAny && !tri_ok(s.acyl, is_acyl(g, i))) return false;
  if (!s.neighbor_elements.empty()) {
    for (std::size_t v : g.neighbors(i)) {
      if (std::find(s.neighbor_elements.begin(), s.neighbor_elements.end(),
                    g.atoms[v].element) == s.neighbor_elements.end()) {
        return false;
      }
    }
  }
  return true;
}

bool bond_ok(BondOrder order, BondSpec spec) {
  switch (spec) {
    case BondSpec::kAny: return true;
    case BondSpec::kSingle: return order == BondOrder::kSingle;
    case BondSpec::kDouble: return order == BondOrder::kDouble;
    case BondSpec::kTriple: return order == BondOrder::kTriple;
    case BondSpec::kAromatic: return order == BondOrder::kAromatic;
  }
  return false;
}

// Backtracking assignment of neighbor specs to distinct atoms. Every complete
// assignment reports its member set through `emit`.
class NeighborhoodMatcher {
 public:
  NeighborhoodMatcher(const MolecularGraph& g, std::vector<bool>& used,
                      std::vector<std::size_t>& members)
      : g_(g), used_(used), members_(members) {}

  void match(std::size_t anchor, const std::vector<NeighborSpec>& specs,
             std::size_t k, const std::function<void()>& emit) {
    if (k == specs.size()) {
      emit();
      return;
    }
    const NeighborSpec& spec = specs[k];
    for (std::size_t bi : g_.adjacency[anchor]) {
      const std::size_t v = g_.bonds[bi].other(anchor);
      if (used_[v] || !bond_ok(g_.bonds[bi].order, spec.bond) || !atom_ok(g_, v, spec.atom)) {
        continue;
      }
      used_[v] = true;
      if (spec.member) members_.push_back(v);
      // Nested specs complete first, then the remaining siblings.
      match(v, spec.neighbors, 0, [&] { match(anchor, specs, k + 1, emit); });
      if (spec.member) members_.pop_back();
      used_[v] = false;
    }
  }

 private:
  const MolecularGraph& g_;
  std::vector<bool>& used_;
  std::vector<std::size_t>& members_;
};

std::vector<std::vector<std::size_t>> match_pattern(const MolecularGraph& g,
                                                    const FunctionalGroupPattern& p) {
  std::set<std::vector<std::size_t>> found;
  if (p.kind == Kind::kAromaticRing6 || p.kind == Kind::kAromaticRing5Hetero) {
    const std::size_t len = p.kind == Kind::kAromaticRing6 ? 6 : 5;
    for (auto ring : rings_of_size(g, len)) {
      bool aromatic = true;
      bool hetero = false;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t bi = g.bond_between(ring[i], ring[(i + 1) % len]);
        if (!g.atoms[ring[i]].is_aromatic || g.bonds[bi].order != BondOrder::kAromatic) {
          aromatic = false;
        }
        if (g.atoms[ring[i]].element != "C") hetero = true;
      }
      if (!aromatic) continue;
      if (p.kind == Kind::kAromaticRing5Hetero && !hetero) continue;
      std::sort(ring.begin(), ring.end());
      found.insert(ring);
    }
    return {found.begin(), found.end()};
  }
  std::vector<bool> used(g.size(), false);
  std::vector<std::size_t> members;
  NeighborhoodMatcher matcher(g, used, members);
  for (std::size_t root = 0; root < g.size(); ++root) {
    if (!atom_ok(g, root, p.root)) continue;
    used[root] = true;
    if (p.root_member) members.push_back(root);
    matcher.match(root, p.neighbors, 0, [&] {
      std::vector<std::size_t> m = members;
      std::sort(m.begin(), m.end());
      found.insert(std::move(m));
    });
    if (p.root_member) members.pop_back();
    used[root] = false;
  }
  return {found.begin(), found.end()};
}

}  // namespace

std::vector<std::size_t> GroupAssignment::all_atoms() const {
  std::vector<std::size_t> out = member_atoms;
  out.insert(out.end(), assigned_atoms.begin(), assigned_atoms.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<FunctionalGroupPattern>& default_catalogue() {
  static const std::vector<FunctionalGroupPattern> catalogue = make_catalogue();
  return catalogue;
}

std::string catalogue_hash(const std::vector<FunctionalGroupPattern>& catalogue) {
  std::ostringstream os;
  os << "linker-fg-catalogue/1\n";
  for (const auto& p : catalogue) os << p.pattern_id << ':' << p.name << '\n';
  return sha256_hex(os.str()).substr(0, 16);
}

std::string pattern_name(const std::vector<FunctionalGroupPattern>& catalogue,
                         int pattern_id) {
  if (pattern_id == kFallbackPattern) return "fallback";
  for (const auto& p : catalogue)
    if (p.pattern_id == pattern_id) return p.name;
  return "unknown";
}

std::vector<GroupAssignment> detect_groups(
    const MolecularGraph& graph,
    const std::vector<FunctionalGroupPattern>& catalogue) {
  std::vector<GroupAssignment> groups;
  for (const auto& p : catalogue) {
    for (auto& members : match_pattern(graph, p)) {
      GroupAssignment ga;
      ga.pattern_id = p.pattern_id;
      ga.member_atoms = std::move(members);
      groups.push_back(std::move(ga));
    }
  }
  std::stable_sort(groups.begin(), groups.end(),
                   [](const GroupAssignment& a, const GroupAssignment& b) {
                     if (a.pattern_id != b.pattern_id) return a.pattern_id < b.pattern_id;
                     return a.member_atoms < b.member_atoms;
                   });
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].group_id = static_cast<int>(i);
  return groups;
}

std::vector<GroupAssignment> interpolate_unassigned(
    const MolecularGraph& graph, std::vector<GroupAssignment> groups) {
  const std::size_t n = graph.size();
  if (groups.empty()) {
    GroupAssignment fallback;
    fallback.group_id = 0;
    fallback.pattern_id = kFallbackPattern;
    for (std::size_t i = 0; i < n; ++i) fallback.assigned_atoms.push_back(i);
    return {fallback};
  }
  std::vector<bool> covered(n, false);
  for (const auto& ga : groups)
    for (std::size_t a : ga.member_atoms) covered[a] = true;
  const auto dist = shortest_path_distances(graph);
  for (std::size_t atom = 0; atom < n; ++atom) {
    if (covered[atom]) continue;
    std::size_t best = 0;
    int best_d = std::numeric_limits<int>::max();
    // Groups are visited in ascending group_id; strict '<' keeps the lowest
    // id on ties.
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      int d = std::numeric_limits<int>::max();
      for (std::size_t m : groups[gi].member_atoms) d = std::min(d, dist[atom][m]);
      if (d < best_d) {
        best_d = d;
        best = gi;
      }
    }
    groups[best].assigned_atoms.push_back(atom);
  }
  return groups;
}

AtomGroupMatrix build_matrix(std::size_t n_atoms,
                             const std::vector<GroupAssignment>& groups) {
  AtomGroupMatrix m;
  m.n_atoms = n_atoms;
  m.n_groups = groups.size();
  m.entries.assign(n_atoms * groups.size(), 0);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    for (std::size_t a : groups[j].all_atoms()) {
      if (a >= n_atoms) throw CoverageViolation("group references atom out of range");
      m.entries[a * m.n_groups + j] = 1;
    }
  }
  for (std::size_t i = 0; i < n_atoms; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < m.n_groups; ++j) any = any || m.at(i, j);
    if (!any) {
      throw CoverageViolation("atom " + std::to_string(i) +
                              " belongs to no functional group");
    }
  }
  return m;
}

LigandGroups parse_functional_groups(
    const MolecularGraph& graph,
    const std::vector<FunctionalGroupPattern>& catalogue) {
  LigandGroups out;
  out.groups = interpolate_unassigned(graph, detect_groups(graph, catalogue));
  out.matrix = build_matrix(graph.size(), out.groups);
  return out;
}

std::string groups_record_json(const std::string& id, const LigandGroups& lg,
                               const std::vector<FunctionalGroupPattern>& catalogue) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["n_atoms"] = lg.matrix.n_atoms;
  j["catalogue_hash"] = catalogue_hash(catalogue);
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& ga : lg.groups) {
    nlohmann::ordered_json g;
    g["group_id"] = ga.group_id;
    g["pattern"] = pattern_name(catalogue, ga.pattern_id);
    g["atoms"] = ga.all_atoms();
    j["groups"].push_back(std::move(g));
  }
  std::vector<int> bits(lg.matrix.entries.begin(), lg.matrix.entries.end());
  j["matrix"] = bits;
  return j.dump();
}

GroupsRecord parse_groups_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  GroupsRecord r;
  r.id = j.at("id").get<std::string>();
  r.n_atoms = j.at("n_atoms").get<std::size_t>();
  r.catalogue_hash = j.value("catalogue_hash", "");
  for (const auto& g : j.at("groups")) {
    r.patterns.push_back(g.at("pattern").get<std::string>());
    r.atoms.push_back(g.at("atoms").get<std::vector<std::size_t>>());
  }
  r.matrix.n_atoms = r.n_atoms;
  r.matrix.n_groups = r.patterns.size();
  for (int b : j.at("matrix").get<std::vector<int>>()) {
    if (b != 0 && b != 1) throw std::invalid_argument("groups record: matrix entries must be 0/1");
    r.matrix.entries.push_back(static_cast<std::uint8_t>(b));
  }
  if (r.matrix.entries.size() != r.n_atoms * r.matrix.n_groups) {
    throw std::invalid_argument("groups record: matrix size mismatch");
  }
  return r;
}

}  // namespace linker
