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

#include "linker/molgraph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <map>
#include <optional>
#include <utility>

namespace linker {

namespace {

const std::vector<std::string> kElements = {
    "C",  "N",  "O",  "S",  "P",  "F",  "Cl", "Br", "I",  "B",  "Si", "Se",
    "As", "Na", "K",  "Li", "Mg", "Ca", "Zn", "Fe", "Cu", "Mn", "Co", "H"};

std::vector<int> normal_valences(std::string_view e) {
  if (e == "B") return {3};
  if (e == "C") return {4};
  if (e == "N" || e == "P") return {3, 5};
  if (e == "O") return {2};
  if (e == "S") return {2, 4, 6};
  return {1};  // halogens
}

struct ParsedAtom {
  Atom atom;
  bool bracket = false;
};

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  MolecularGraph parse() {
    if (text_.empty()) throw SmilesSyntaxError("empty SMILES");
    std::optional<std::size_t> prev;
    std::optional<BondOrder> pending;
    bool pending_set = false;
    std::vector<std::optional<std::size_t>> branch_stack;

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (!prev) fail("branch opened before any atom");
        if (pending_set) fail("bond symbol before '('");
        branch_stack.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branch_stack.empty()) fail("unbalanced ')'");
        if (pending_set) fail("bond symbol before ')'");
        if (pos_ > 0 && text_[pos_ - 1] == '(') fail("empty branch");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':') {
        if (!prev) fail("bond symbol before any atom");
        if (pending_set) fail("consecutive bond symbols");
        pending = c == '-'   ? BondOrder::kSingle
                  : c == '=' ? BondOrder::kDouble
                  : c == '#' ? BondOrder::kTriple
                             : BondOrder::kAromatic;
        pending_set = true;
        ++pos_;
      } else if (c == '/' || c == '\\') {
        unsupported("directional bond (stereo)");
      } else if (c == '$') {
        unsupported("quadruple bond");
      } else if (c == '.') {
        unsupported("multi-component SMILES ('.')");
      } else if (c == '%') {
        unsupported("two-digit ring closure");
      } else if (c >= '0' && c <= '9') {
        if (!prev) fail("ring closure before any atom");
        if (c == '0') unsupported("ring closure digit 0");
        ring_closure(c - '0', *prev, pending_set ? pending : std::nullopt);
        pending.reset();
        pending_set = false;
        ++pos_;
      } else {
        const std::size_t atom = read_atom();
        if (prev) add_bond(*prev, atom, pending_set ? pending : std::nullopt);
        else if (pending_set) fail("bond symbol before first atom");
        pending.reset();
        pending_set = false;
        prev = atom;
      }
    }
    if (pending_set) fail("dangling bond symbol at end of input");
    if (!branch_stack.empty()) fail("unbalanced '('");
    for (const auto& [digit, open] : open_rings_) {
      fail("dangling ring-closure digit " + std::to_string(digit));
    }
    return finish();
  }

 private:
  struct OpenRing {
    std::size_t atom;
    std::optional<BondOrder> order;
  };

  [[noreturn]] void fail(const std::string& what) const {
    throw SmilesSyntaxError("SMILES syntax error at position " +
                            std::to_string(pos_) + ": " + what + " in \"" +
                            std::string(text_) + "\"");
  }

  [[noreturn]] void unsupported(const std::string& what) const {
    throw UnsupportedFeature("unsupported SMILES feature at position " +
                             std::to_string(pos_) + ": " + what + " in \"" +
                             std::string(text_) + "\"");
  }

  std::size_t read_atom() {
    ParsedAtom pa;
    const char c = text_[pos_];
    if (c == '[') {
      read_bracket(pa);
    } else if (c == 'C' && peek(1) == 'l') {
      pa.atom.element = "Cl";
      pos_ += 2;
    } else if (c == 'B' && peek(1) == 'r') {
      pa.atom.element = "Br";
      pos_ += 2;
    } else if (std::string_view("BCNOPSFI").find(c) != std::string_view::npos) {
      pa.atom.element = std::string(1, c);
      ++pos_;
    } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
      pa.atom.element = std::string(1, static_cast<char>(std::toupper(c)));
      pa.atom.is_aromatic = true;
      ++pos_;
    } else if (c == '@') {
      unsupported("chirality marker");
    } else {
      fail(std::string("unknown element token '") + c + "'");
    }
    atoms_.push_back(std::move(pa));
    return atoms_.size() - 1;
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void read_bracket(ParsedAtom& pa) {
    pa.bracket = true;
    ++pos_;  // '['
    if (pos_ >= text_.size()) fail("unterminated bracket atom");
    if (std::isdigit(static_cast<unsigned char>(text_[pos_]))) unsupported("isotope label");
    // Element symbol.
    const char c = text_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string sym;
      if (c == 's' && peek(1) == 'e') sym = "Se";
      else if (c == 'a' && peek(1) == 's') sym = "As";
      if (!sym.empty()) {
        pos_ += 2;
      } else if (std::string_view("bcnops").find(c) != std::string_view::npos) {
        sym = std::string(1, static_cast<char>(std::toupper(c)));
        ++pos_;
      } else {
        fail(std::string("unknown aromatic element '") + c + "'");
      }
      pa.atom.element = sym;
      pa.atom.is_aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::string two{c, peek(1)};
      if (std::islower(static_cast<unsigned char>(peek(1))) && element_index(two) >= 0) {
        pa.atom.element = two;
        pos_ += 2;
      } else if (element_index(std::string(1, c)) >= 0) {
        pa.atom.element = std::string(1, c);
        ++pos_;
      } else {
        fail("unknown element in bracket atom");
      }
    } else if (c == '*') {
      fail("wildcard atom '*'");
    } else {
      fail("malformed bracket atom");
    }
    if (peek(0) == '@') unsupported("chirality marker");
    if (peek(0) == 'H') {
      ++pos_;
      int count = 1;
      if (std::isdigit(static_cast<unsigned char>(peek(0)))) {
        count = text_[pos_] - '0';
        ++pos_;
      }
      pa.atom.hydrogens = count;
    }
    if (peek(0) == '+' || peek(0) == '-') {
      const char sign_char = text_[pos_];
      const int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek(0)))) {
        magnitude = text_[pos_] - '0';
        ++pos_;
      } else {
        while (peek(0) == sign_char) {
          ++magnitude;
          ++pos_;
        }
      }
      pa.atom.formal_charge = sign * magnitude;
    }
    if (peek(0) == ':') unsupported("atom class");
    if (peek(0) != ']') fail("unterminated bracket atom");
    ++pos_;
  }

  void add_bond(std::size_t a, std::size_t b, std::optional<BondOrder> order) {
    if (a == b) fail("self-bond");
    for (const Bond& bd : bonds_) {
      if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) fail("duplicate bond");
    }
    BondOrder o;
    if (order) {
      o = *order;
    } else {
      o = atoms_[a].atom.is_aromatic && atoms_[b].atom.is_aromatic
              ? BondOrder::kAromatic
              : BondOrder::kSingle;
    }
    bonds_.push_back({a, b, o});
  }

  void ring_closure(int digit, std::size_t atom, std::optional<BondOrder> order) {
    auto it = open_rings_.find(digit);
    if (it == open_rings_.end()) {
      open_rings_[digit] = {atom, order};
      return;
    }
    const OpenRing open = it->second;
    open_rings_.erase(it);
    if (open.order && order && *open.order != *order) {
      fail("conflicting ring-closure bond orders");
    }
    add_bond(open.atom, atom, order ? order : open.order);
  }

  MolecularGraph finish();

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<ParsedAtom> atoms_;
  std::vector<Bond> bonds_;
  std::map<int, OpenRing> open_rings_;
};

void build_adjacency(MolecularGraph& g) {
  g.adjacency.assign(g.atoms.size(), {});
  for (std::size_t i = 0; i < g.bonds.size(); ++i) {
    g.adjacency[g.bonds[i].a].push_back(i);
    g.adjacency[g.bonds[i].b].push_back(i);
  }
}

Hybridization infer_hybridization(const MolecularGraph& g, std::size_t atom) {
  const Atom& a = g.atoms[atom];
  static const std::array<std::string_view, 9> kMainGroup = {
      "B", "C", "N", "O", "P", "S", "Si", "Se", "As"};
  if (std::find(kMainGroup.begin(), kMainGroup.end(), a.element) == kMainGroup.end()) {
    return Hybridization::kOther;
  }
  int doubles = 0, triples = 0, aromatic = 0;
  for (std::size_t bi : g.adjacency[atom]) {
    switch (g.bonds[bi].order) {
      case BondOrder::kDouble: ++doubles; break;
      case BondOrder::kTriple: ++triples; break;
      case BondOrder::kAromatic: ++aromatic; break;
      default: break;
    }
  }
  if (triples > 0 || doubles >= 2) return Hybridization::kSp;
  if (a.is_aromatic || aromatic > 0 || doubles == 1) return Hybridization::kSp2;
  return Hybridization::kSp3;
}

// Marks 6-rings of C/N atoms whose bonds alternate single/double as aromatic.
void perceive_kekule_aromaticity(MolecularGraph& g) {
  for (const auto& ring : rings_of_size(g, 6)) {
    bool ok = true;
    std::array<std::size_t, 6> ring_bonds{};
    for (std::size_t i = 0; i < 6 && ok; ++i) {
      const Atom& a = g.atoms[ring[i]];
      if ((a.element != "C" && a.element != "N") || a.formal_charge != 0) ok = false;
      ring_bonds[i] = g.bond_between(ring[i], ring[(i + 1) % 6]);
    }
    if (!ok) continue;
    const auto order_at = [&](std::size_t i) { return g.bonds[ring_bonds[i]].order; };
    bool alternating = true;
    for (std::size_t i = 0; i < 6; ++i) {
      const BondOrder expect_even = order_at(0) == BondOrder::kDouble ? BondOrder::kDouble
                                                                      : BondOrder::kSingle;
      const BondOrder expect_odd = expect_even == BondOrder::kDouble ? BondOrder::kSingle
                                                                     : BondOrder::kDouble;
      if (order_at(i) != (i % 2 == 0 ? expect_even : expect_odd)) alternating = false;
    }
    if (!alternating) continue;
    for (std::size_t i = 0; i < 6; ++i) {
      g.atoms[ring[i]].is_aromatic = true;
      g.bonds[ring_bonds[i]].order = BondOrder::kAromatic;
    }
  }
}

MolecularGraph SmilesParser::finish() {
  MolecularGraph g;
  for (auto& pa : atoms_) g.atoms.push_back(pa.atom);
  g.bonds = bonds_;
  build_adjacency(g);

  // Aromatic bonds outside rings (e.g. biaryl links) become single.
  for (std::size_t i = 0; i < g.bonds.size(); ++i) {
    if (g.bonds[i].order == BondOrder::kAromatic && !bond_in_ring(g, i)) {
      g.bonds[i].order = BondOrder::kSingle;
    }
  }
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    if (!g.atoms[i].is_aromatic) continue;
    bool in_ring = false;
    for (std::size_t bi : g.adjacency[i]) {
      if (g.bonds[bi].order == BondOrder::kAromatic) in_ring = true;
    }
    if (!in_ring) {
      throw SmilesSyntaxError("aromatic atom " + std::to_string(i) +
                              " is not part of an aromatic ring in \"" +
                              std::string(text_) + "\"");
    }
  }

  // Implicit hydrogens for organic-subset atoms, from the written bonds.
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    Atom& a = g.atoms[i];
    if (atoms_[i].bracket) continue;
    int valence = 0;
    int aromatic_bonds = 0;
    for (std::size_t bi : g.adjacency[i]) {
      const BondOrder o = g.bonds[bi].order;
      if (o == BondOrder::kAromatic) {
        ++aromatic_bonds;
        valence += 1;
      } else {
        valence += static_cast<int>(o);
      }
    }
    if (a.is_aromatic) {
      if (a.element == "C" || a.element == "B" || a.element == "P") valence += 1;
      else if (a.element == "N" && g.adjacency[i].size() == 2) valence += 1;
    }
    int h = 0;
    for (int v : normal_valences(a.element)) {
      if (v >= valence) {
        h = v - valence;
        break;
      }
    }
    a.hydrogens = h;
  }

  perceive_kekule_aromaticity(g);

  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    g.atoms[i].degree = static_cast<int>(g.adjacency[i].size());
    g.atoms[i].hybridization = infer_hybridization(g, i);
    g.canonical_order.push_back(i);
  }
  return g;
}

std::string bracket_token(const Atom& a) {
  std::string s = "[";
  if (a.is_aromatic) {
    std::string lower = a.element;
    for (char& ch : lower) ch = static_cast<char>(std::tolower(ch));
    s += lower;
  } else {
    s += a.element;
  }
  if (a.hydrogens > 0) {
    s += 'H';
    if (a.hydrogens > 1) s += std::to_string(a.hydrogens);
  }
  if (a.formal_charge != 0) {
    s += a.formal_charge > 0 ? '+' : '-';
    const int m = std::abs(a.formal_charge);
    if (m > 1) s += std::to_string(m);
  }
  s += ']';
  return s;
}

std::string bond_token(const MolecularGraph& g, const Bond& b) {
  switch (b.order) {
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return ":";
    case BondOrder::kSingle:
      return g.atoms[b.a].is_aromatic && g.atoms[b.b].is_aromatic ? "-" : "";
  }
  return "";
}

}  // namespace

const std::vector<std::string>& element_table() { return kElements; }

int element_index(std::string_view symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i)
    if (kElements[i] == symbol) return static_cast<int>(i);
  return -1;
}

std::size_t MolecularGraph::bond_between(std::size_t a, std::size_t b) const {
  for (std::size_t bi : adjacency[a]) {
    if (bonds[bi].other(a) == b) return bi;
  }
  return npos;
}

std::vector<std::size_t> MolecularGraph::neighbors(std::size_t atom) const {
  std::vector<std::size_t> out;
  for (std::size_t bi : adjacency[atom]) out.push_back(bonds[bi].other(atom));
  return out;
}

MolecularGraph parse_smiles(std::string_view smiles) {
  return SmilesParser(smiles).parse();
}

bool bond_in_ring(const MolecularGraph& g, std::size_t bond) {
  const std::size_t src = g.bonds[bond].a;
  const std::size_t dst = g.bonds[bond].b;
  std::vector<bool> seen(g.size(), false);
  std::deque<std::size_t> queue{src};
  seen[src] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t bi : g.adjacency[u]) {
      if (bi == bond) continue;
      const std::size_t v = g.bonds[bi].other(u);
      if (v == dst) return true;
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return false;
}

std::vector<std::vector<std::size_t>> rings_of_size(const MolecularGraph& g,
                                                    std::size_t length) {
  std::vector<std::vector<std::size_t>> rings;
  if (length < 3) return rings;
  std::vector<std::size_t> path;
  std::vector<bool> on_path(g.size(), false);
  // Depth-first extension restricted to atoms above the start index.
  auto extend = [&](auto&& self, std::size_t start) -> void {
    const std::size_t u = path.back();
    if (path.size() == length) {
      if (g.bond_between(u, start) != MolecularGraph::npos && path[1] < path.back()) {
        rings.push_back(path);
      }
      return;
    }
    for (std::size_t v : g.neighbors(u)) {
      if (v <= start || on_path[v]) continue;
      path.push_back(v);
      on_path[v] = true;
      self(self, start);
      on_path[v] = false;
      path.pop_back();
    }
  };
  for (std::size_t s = 0; s < g.size(); ++s) {
    path = {s};
    on_path[s] = true;
    extend(extend, s);
    on_path[s] = false;
  }
  return rings;
}

std::string emit_smiles(const MolecularGraph& g, std::vector<std::size_t>* order) {
  if (g.atoms.empty()) return "";
  const std::size_t n = g.size();
  // Pass 1: DFS tree and visit order.
  std::vector<std::size_t> visit_rank(n, MolecularGraph::npos);
  std::vector<std::size_t> parent_bond(n, MolecularGraph::npos);
  std::vector<bool> tree_bond(g.bonds.size(), false);
  std::vector<std::size_t> visit;
  auto dfs = [&](auto&& self, std::size_t u) -> void {
    visit_rank[u] = visit.size();
    visit.push_back(u);
    for (std::size_t bi : g.adjacency[u]) {
      const std::size_t v = g.bonds[bi].other(u);
      if (visit_rank[v] != MolecularGraph::npos) continue;
      tree_bond[bi] = true;
      parent_bond[v] = bi;
      self(self, v);
    }
  };
  dfs(dfs, 0);
  if (visit.size() != n) throw DisconnectedGraph("emit_smiles: graph is disconnected");

  // Ring-closure bonds grouped by atom: opened at the earlier-visited end.
  std::vector<std::vector<std::size_t>> opens(n), closes(n);
  for (std::size_t bi = 0; bi < g.bonds.size(); ++bi) {
    if (tree_bond[bi]) continue;
    const Bond& b = g.bonds[bi];
    const bool a_first = visit_rank[b.a] < visit_rank[b.b];
    opens[a_first ? b.a : b.b].push_back(bi);
    closes[a_first ? b.b : b.a].push_back(bi);
  }

  std::string out;
  std::map<std::size_t, int> bond_digit;
  std::array<bool, 10> in_use{};
  auto emit = [&](auto&& self, std::size_t u) -> void {
    out += bracket_token(g.atoms[u]);
    for (std::size_t bi : closes[u]) {
      const int d = bond_digit.at(bi);
      out += std::to_string(d);
      in_use[static_cast<std::size_t>(d)] = false;
    }
    for (std::size_t bi : opens[u]) {
      int d = 1;
      while (d <= 9 && in_use[static_cast<std::size_t>(d)]) ++d;
      if (d > 9) throw UnsupportedFeature("emit_smiles: more than 9 open rings");
      in_use[static_cast<std::size_t>(d)] = true;
      bond_digit[bi] = d;
      out += bond_token(g, g.bonds[bi]) + std::to_string(d);
    }
    std::vector<std::size_t> children;
    for (std::size_t bi : g.adjacency[u]) {
      if (tree_bond[bi] && parent_bond[g.bonds[bi].other(u)] == bi &&
          g.bonds[bi].other(u) != u && visit_rank[g.bonds[bi].other(u)] > visit_rank[u]) {
        children.push_back(bi);
      }
    }
    for (std::size_t k = 0; k < children.size(); ++k) {
      const std::size_t bi = children[k];
      const bool last = k + 1 == children.size();
      if (!last) out += '(';
      out += bond_token(g, g.bonds[bi]);
      self(self, g.bonds[bi].other(u));
      if (!last) out += ')';
    }
  };
  emit(emit, 0);
  if (order) *order = visit;
  return out;
}

Tensor atom_features(const MolecularGraph& g) {
  std::vector<double> values;
  values.reserve(g.size() * kAtomFeatureWidth);
  for (const Atom& a : g.atoms) {
    values.push_back(static_cast<double>(element_index(a.element)));
    values.push_back(static_cast<double>(a.degree));
    values.push_back(static_cast<double>(static_cast<int>(a.hybridization)));
    values.push_back(static_cast<double>(a.formal_charge));
    values.push_back(a.is_aromatic ? 1.0 : 0.0);
  }
  return Tensor({g.size(), kAtomFeatureWidth}, std::move(values));
}

std::vector<std::vector<int>> shortest_path_distances(const MolecularGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    std::deque<std::size_t> queue{s};
    dist[s][s] = 0;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : g.neighbors(u)) {
        if (dist[s][v] >= 0) continue;
        dist[s][v] = dist[s][u] + 1;
        queue.push_back(v);
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (dist[s][t] < 0) {
        throw DisconnectedGraph("atoms " + std::to_string(s) + " and " +
                                std::to_string(t) + " are not connected");
      }
    }
  }
  return dist;
}

}  // namespace linker
