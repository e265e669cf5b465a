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

#include "linker/dataset.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "binary_io.hpp"
#include "json.hpp"
#include "linker/hashing.hpp"

namespace linker {
namespace fs = std::filesystem;

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

std::string opt_string(const nlohmann::json& j, const char* key) {
  return j.contains(key) && !j[key].is_null() ? j[key].get<std::string>() : std::string();
}

}  // namespace

std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.protein_id = opt_string(j, "protein_id");
      r.ligand_id = opt_string(j, "ligand_id");
      if (r.ligand_id.empty()) r.ligand_id = r.id;
      r.fasta = resolve(base, opt_string(j, "fasta"));
      r.embeddings = resolve(base, opt_string(j, "embeddings"));
      r.smiles = j.at("smiles").get<std::string>();
      r.labels = resolve(base, opt_string(j, "labels"));
      if (j.contains("affinity") && !j["affinity"].is_null()) r.affinity = j["affinity"].get<double>();
      if (j.contains("split")) r.split = j["split"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (r.protein_id.empty()) r.protein_id = r.id;
    if (r.split != "train" && r.split != "val") {
      throw DataError(r.id + ": split must be train or val");
    }
    if (!seen.insert(r.id).second) throw DataError("duplicate manifest id " + r.id);
    if (r.fasta.empty()) throw DataError(r.id + ": needs a fasta path");
    for (const auto* p : {&r.fasta, &r.embeddings, &r.labels}) {
      if (!p->empty() && !fs::exists(*p)) throw DataError(r.id + ": missing file " + *p);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string cache_dir_from_env() {
  const char* v = std::getenv("LINKER_CACHE");
  return v ? std::string(v) : std::string();
}

LigandGroups featurize_groups(const MolecularGraph& graph, const std::string& smiles,
                              const std::string& cache_dir) {
  const auto& catalogue = default_catalogue();
  if (cache_dir.empty()) return parse_functional_groups(graph, catalogue);
  const std::string hash = catalogue_hash(catalogue);
  const fs::path file = fs::path(cache_dir) / (sha256_hex(smiles + "\n" + hash) + ".groups.json");
  if (fs::exists(file)) {
    const GroupsRecord rec = parse_groups_record(binio::read_file(file.string()));
    if (rec.catalogue_hash == hash && rec.n_atoms == graph.atoms.size()) {
      LigandGroups lg;
      lg.matrix = rec.matrix;
      for (std::size_t g = 0; g < rec.patterns.size(); ++g) {
        GroupAssignment a;
        a.group_id = static_cast<int>(g);
        a.pattern_id = kFallbackPattern;
        for (const auto& p : catalogue)
          if (p.name == rec.patterns[g]) a.pattern_id = p.pattern_id;
        a.member_atoms = rec.atoms[g];
        lg.groups.push_back(std::move(a));
      }
      return lg;
    }
  }
  LigandGroups lg = parse_functional_groups(graph, catalogue);
  fs::create_directories(cache_dir);
  const fs::path tmp = file.string() + ".tmp" +
                       std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  binio::write_file(tmp.string(), groups_record_json(smiles, lg, catalogue));
  fs::rename(tmp, file);
  return lg;
}

LigandInput featurize_ligand(const std::string& smiles, const std::string& cache_dir) {
  const MolecularGraph graph = parse_smiles(smiles);
  return make_ligand_input(graph, featurize_groups(graph, smiles, cache_dir));
}

Sample load_sample(const ManifestRecord& record, const ModelConfig& config, bool require_labels,
                   const std::string& cache_dir) {
  Sample s;
  s.split = record.split;
  s.affinity = record.affinity;
  s.input.id = record.id;
  try {
    s.input.protein = concatenate_chains(read_fasta(record.fasta), record.protein_id);
    validate_sequence(s.input.protein);
    if (!record.embeddings.empty()) {
      ResidueEmbeddings e = load_embeddings(record.embeddings, s.input.protein.residues);
      if (e.dim() != config.model_dim) {
        throw DataError("embedding dim " + std::to_string(e.dim()) + " != model dim " +
                        std::to_string(config.model_dim));
      }
      s.input.embeddings = e.matrix;
    } else if (config.protein_mode == ProteinMode::kFile) {
      throw DataError("file-mode model needs an embeddings path");
    }
    s.input.ligand = featurize_ligand(record.smiles, cache_dir);
    const std::size_t residues = s.input.protein.residues.size();
    if (!record.labels.empty()) {
      const std::string expected = catalogue_hash(default_catalogue());
      for (auto& ls : load_labels(record.labels, expected)) {
        if (ls.protein_id == record.protein_id && ls.ligand_id == record.ligand_id) {
          s.labels = std::move(ls);
          break;
        }
      }
      if (!s.labels) throw DataError("no label record for " + record.protein_id + "/" + record.ligand_id);
      if (s.labels->residues != residues || s.labels->groups != s.input.ligand.matrix.n_groups) {
        throw DataError("label shape R=" + std::to_string(s.labels->residues) +
                        ", F=" + std::to_string(s.labels->groups) + " but complex has R=" +
                        std::to_string(residues) + ", F=" +
                        std::to_string(s.input.ligand.matrix.n_groups));
      }
    } else if (require_labels) {
      throw DataError("labels path required");
    }
  } catch (const DataError& e) {
    throw DataError("complex " + record.id + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError("complex " + record.id + ": " + e.what());
  }
  return s;
}

std::vector<Sample> load_samples(const std::vector<ManifestRecord>& records,
                                 const ModelConfig& config, bool require_labels,
                                 std::size_t jobs, const std::string& cache_dir) {
  std::vector<Sample> out(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        out[i] = load_sample(records[i], config, require_labels, cache_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, records.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace linker
