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

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "linker/checkpoint.hpp"
#include "linker/dataset.hpp"
#include "linker/fgparser.hpp"
#include "linker/hashing.hpp"
#include "linker/labels.hpp"
#include "linker/metrics.hpp"
#include "linker/model.hpp"
#include "linker/molgraph.hpp"
#include "linker/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace linker {
namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool strict = false;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

void warn(const std::string& msg) { std::cerr << "linker: warning: " << one_line(msg) << "\n"; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

// Runs fn(i) for i in [0, n) on `jobs` workers; the first exception in
// index order is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::max<std::size_t>(1, std::min(jobs, n)); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- parse-fg ---------------------------------------------------------------

struct SmiEntry {
  std::size_t line = 0;
  std::string smiles;
  std::string id;
};

std::vector<SmiEntry> read_smi(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<SmiEntry> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream is(line);
    SmiEntry e{n, {}, {}};
    if (!(is >> e.smiles) || e.smiles.front() == '#') continue;
    std::getline(is >> std::ws, e.id);
    if (e.id.empty()) e.id = "mol" + std::to_string(n);
    out.push_back(std::move(e));
  }
  return out;
}

int cmd_parse_fg(const Globals& g, const std::string& input, const std::string& output) {
  const auto entries = read_smi(input);
  const auto& catalogue = default_catalogue();
  std::vector<std::optional<std::string>> lines(entries.size());
  std::vector<std::string> skipped(entries.size());
  parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    try {
      const MolecularGraph graph = parse_smiles(e.smiles);
      lines[i] = groups_record_json(e.id, parse_functional_groups(graph, catalogue), catalogue);
    } catch (const UnsupportedFeature& ex) {
      if (g.strict) throw DataError(input + ":" + std::to_string(e.line) + ": " + ex.what());
      skipped[i] = input + ":" + std::to_string(e.line) + ": skipped: " + ex.what();
    } catch (const DisconnectedGraph& ex) {
      if (g.strict) throw DataError(input + ":" + std::to_string(e.line) + ": " + ex.what());
      skipped[i] = input + ":" + std::to_string(e.line) + ": skipped: " + ex.what();
    } catch (const std::invalid_argument& ex) {
      throw DataError(input + ":" + std::to_string(e.line) + ": " + ex.what());
    }
  });
  auto out = open_out(output);
  std::size_t written = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!skipped[i].empty()) warn(skipped[i]);
    if (lines[i]) {
      out << *lines[i] << "\n";
      ++written;
    }
  }
  std::cout << json{{"molecules", written}, {"skipped", entries.size() - written}}.dump() << "\n";
  return kOk;
}

// ---- configuration ----------------------------------------------------------

struct LoadedConfig {
  TrainConfig train;
  bool has_model_section = false;
};

LoadedConfig load_config(const std::string& path, Stage stage, const Globals& g) {
  LoadedConfig out{TrainConfig::defaults(stage), false};
  if (!path.empty()) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(path, tree);
      out.train = TrainConfig::from_tree(tree, stage);
    } catch (const boost::property_tree::ptree_error& e) {
      throw UsageError("config " + path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError("config " + path + ": " + e.what());
    }
    out.has_model_section = static_cast<bool>(tree.get_child_optional("model"));
  }
  if (g.seed) {
    out.train.seed = *g.seed;
    out.train.model.seed = *g.seed;
  }
  return out;
}

ModelConfig model_config_from(const std::string& path, const Globals& g) {
  return load_config(path, Stage::kInteraction, g).train.model;
}

void split_samples(std::vector<Sample> all, std::vector<Sample>& train, std::vector<Sample>& val) {
  for (auto& s : all) (s.split == "val" ? val : train).push_back(std::move(s));
}

// ---- featurize --------------------------------------------------------------

int cmd_featurize(const Globals& g, const std::string& manifest, const std::string& config,
                  const std::string& output) {
  const auto records = load_manifest(manifest);
  const ModelConfig model = model_config_from(config, g);
  const std::string cache = cache_dir_from_env();
  const auto& catalogue = default_catalogue();
  std::vector<std::optional<std::string>> lines(records.size());
  std::vector<std::string> skipped(records.size());
  parallel_for(records.size(), g.jobs, [&](std::size_t i) {
    try {
      const Sample s = load_sample(records[i], model, false, cache);
      LigandGroups lg;
      lg.matrix = s.input.ligand.matrix;
      for (std::size_t f = 0; f < s.input.ligand.pattern_ids.size(); ++f) {
        GroupAssignment a;
        a.group_id = static_cast<int>(f);
        a.pattern_id = s.input.ligand.pattern_ids[f];
        for (std::size_t atom = 0; atom < lg.matrix.n_atoms; ++atom)
          if (lg.matrix.at(atom, f)) a.member_atoms.push_back(atom);
        lg.groups.push_back(std::move(a));
      }
      lines[i] = groups_record_json(records[i].id, lg, catalogue);
    } catch (const DataError& e) {
      const bool unsupported = std::strstr(e.what(), "unsupported") != nullptr;
      if (g.strict || !unsupported) throw;
      skipped[i] = std::string(e.what()) + "; skipped";
    }
  });
  auto out = open_out(output);
  std::size_t written = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!skipped[i].empty()) warn(skipped[i]);
    if (lines[i]) {
      out << *lines[i] << "\n";
      ++written;
    }
  }
  std::cout << json{{"complexes", written}, {"skipped", records.size() - written}}.dump() << "\n";
  return kOk;
}

// ---- training ---------------------------------------------------------------

struct TrainFlags {
  std::string config;
  std::string manifest;
  std::string out_dir;
  std::string backbone;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<std::size_t> max_epochs_this_run;
  bool resume = false;
};

void apply_overrides(TrainConfig& cfg, const TrainFlags& f) {
  if (f.epochs) cfg.epochs = *f.epochs;
  if (f.batch_size) {
    if (*f.batch_size == 0) throw UsageError("--batch-size must be >= 1");
    cfg.batch_size = *f.batch_size;
  }
  if (f.learning_rate) cfg.adam.learning_rate = *f.learning_rate;
}

TrainOptions train_options(const TrainFlags& f) {
  fs::create_directories(f.out_dir);
  return TrainOptions{(fs::path(f.out_dir) / "last.ckpt").string(),
                      (fs::path(f.out_dir) / "best.ckpt").string(),
                      (fs::path(f.out_dir) / "train_log.csv").string(), f.max_epochs_this_run};
}

json summary(const TrainState& st, const TrainOptions& opts) {
  json j{{"epochs_completed", st.next_epoch},
         {"best_epoch", st.best_epoch},
         {"best_score", st.best_score},
         {"checkpoint", opts.checkpoint_path},
         {"best_checkpoint", opts.best_path},
         {"log", opts.log_path}};
  if (!st.history.empty()) j["last_train_loss"] = st.history.back().train_loss;
  return j;
}

int cmd_train_interaction(const Globals& g, const TrainFlags& f) {
  LoadedConfig lc = load_config(f.config, Stage::kInteraction, g);
  apply_overrides(lc.train, f);
  const TrainOptions opts = train_options(f);
  std::vector<Sample> train, val;
  split_samples(load_samples(load_manifest(f.manifest), lc.train.model, true, g.jobs, cache_dir_from_env()),
                train, val);
  InteractionModel model(lc.train.model);
  TrainState state;
  if (f.resume && fs::exists(opts.checkpoint_path)) {
    const auto records = read_checkpoint(opts.checkpoint_path);
    model = load_model(records, &lc.train.model);
    state = load_train_state(records);
  }
  state = train_interaction(model, train, val, lc.train, opts, std::move(state));
  std::cout << summary(state, opts).dump() << "\n";
  return kOk;
}

int cmd_train_affinity(const Globals& g, const TrainFlags& f) {
  LoadedConfig lc = load_config(f.config, Stage::kAffinity, g);
  apply_overrides(lc.train, f);
  const TrainOptions opts = train_options(f);
  const auto backbone_records = read_checkpoint(f.backbone);
  InteractionModel backbone = load_model(backbone_records, lc.has_model_section ? &lc.train.model : nullptr);
  const ModelConfig& model_cfg = backbone.config();
  std::vector<Sample> train, val;
  split_samples(load_samples(load_manifest(f.manifest), model_cfg, false, g.jobs, cache_dir_from_env()),
                train, val);
  for (const auto& s : train)
    if (!s.affinity) throw DataError("complex " + s.input.id + ": missing affinity");
  for (const auto& s : val)
    if (!s.affinity) throw DataError("complex " + s.input.id + ": missing affinity");
  AffinityModel model(std::move(backbone), lc.train.seed);
  TrainState state;
  if (f.resume && fs::exists(opts.checkpoint_path)) {
    const auto records = read_checkpoint(opts.checkpoint_path);
    model = load_affinity_model(records);
    state = load_train_state(records);
  }
  state = train_affinity(model, train, val, lc.train, opts, std::move(state));
  std::cout << summary(state, opts).dump() << "\n";
  return kOk;
}

// ---- predict ----------------------------------------------------------------

std::string encode_probs(const Tensor& probs) {
  std::string bytes;
  bytes.reserve(probs.numel() * 4);
  for (double v : probs.data()) {
    const float x = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &x, 4);
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((u >> (8 * b)) & 0xFF));
  }
  return base64_encode(bytes);
}

std::vector<double> decode_probs(const std::string& text, std::size_t expected) {
  const std::string bytes = base64_decode(text);
  if (bytes.size() != expected * 4) {
    throw DataError("probability payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                    std::to_string(expected * 4));
  }
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t u = 0;
    for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    float x;
    std::memcpy(&x, &u, 4);
    out[i] = x;
  }
  return out;
}

int cmd_predict(const Globals& g, const std::string& checkpoint, const std::string& manifest,
                const std::string& out_dir, std::string affinity_csv) {
  const auto records = read_checkpoint(checkpoint);
  const bool has_head = find_record(records, "affinity.type_weights") != nullptr;
  const AffinityModel model = has_head ? load_affinity_model(records) : AffinityModel(load_model(records), 0);
  const auto man = load_manifest(manifest);
  const auto samples = load_samples(man, model.backbone().config(), false, g.jobs, cache_dir_from_env());
  fs::create_directories(out_dir);
  std::vector<double> affinities(samples.size());
  parallel_for(samples.size(), g.jobs, [&](std::size_t i) {
    NoGradGuard no_grad;
    const Sample& s = samples[i];
    Tensor probs;
    if (has_head) {
      const AffinityOutput out = model.forward(s.input);
      probs = out.interaction.probs;
      affinities[i] = out.head.prediction.item();
    } else {
      probs = model.backbone().forward(s.input).probs;
    }
    json j;
    j["complex_id"] = man[i].id;
    j["protein_id"] = man[i].protein_id;
    j["ligand_id"] = man[i].ligand_id;
    j["R"] = probs.dim(0);
    j["F"] = probs.dim(1);
    j["type_order"] = json::array();
    for (auto t : kInteractionTypeOrder) j["type_order"].push_back(std::string(t));
    j["probs"] = encode_probs(probs);
    open_out((fs::path(out_dir) / (man[i].id + ".json")).string()) << j.dump() << "\n";
  });
  if (has_head) {
    if (affinity_csv.empty()) affinity_csv = (fs::path(out_dir) / "affinity.csv").string();
    auto out = open_out(affinity_csv);
    out << "complex_id,y_true,y_pred\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
      out << man[i].id << ',' << (samples[i].affinity ? fmt(*samples[i].affinity) : "") << ','
          << fmt(affinities[i]) << '\n';
    }
  }
  std::cout << json{{"complexes", samples.size()}, {"affinity", has_head}}.dump() << "\n";
  return kOk;
}

// ---- evaluation -------------------------------------------------------------

struct Prediction {
  std::string complex_id, protein_id, ligand_id;
  std::size_t r = 0, f = 0;
  std::vector<double> probs;
};

std::vector<Prediction> load_predictions(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("prediction directory " + dir + " not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Prediction> out;
  for (const auto& file : files) {
    std::ifstream in(file);
    json j;
    try {
      in >> j;
      Prediction p;
      p.complex_id = j.at("complex_id").get<std::string>();
      p.protein_id = j.at("protein_id").get<std::string>();
      p.ligand_id = j.at("ligand_id").get<std::string>();
      p.r = j.at("R").get<std::size_t>();
      p.f = j.at("F").get<std::size_t>();
      p.probs = decode_probs(j.at("probs").get<std::string>(), p.r * p.f * kInteractionTypes);
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError(file.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw DataError("no predictions in " + dir);
  return out;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": not a number: " + item);
    }
  }
  return out;
}

struct EvalFlags {
  std::string preds;
  std::string labels;
  std::string level = "residue";
  double sigma = 2.0;
  std::string thresholds = "0.5";
  std::string recalls = "0.1,0.5";
  std::string affinity_csv;
  std::string output;
};

struct Flattened {
  std::vector<double> scores;
  std::vector<std::uint8_t> hard;
  std::vector<double> soft;  // graded target for weighted precision
};

Flattened flatten(const std::vector<Prediction>& preds, const std::string& labels_path,
                  const std::string& level, double sigma) {
  std::map<std::pair<std::string, std::string>, LabelSet> labels;
  for (auto& ls : load_labels(labels_path, catalogue_hash(default_catalogue())))
    labels.emplace(std::make_pair(ls.protein_id, ls.ligand_id), std::move(ls));
  Flattened out;
  for (const auto& p : preds) {
    const auto it = labels.find({p.protein_id, p.ligand_id});
    if (it == labels.end()) {
      throw DataError("complex " + p.complex_id + ": no label record for " + p.protein_id + "/" + p.ligand_id);
    }
    const LabelSet& y = it->second;
    if (y.residues != p.r || y.groups != p.f) {
      throw DataError("complex " + p.complex_id + ": prediction is " + std::to_string(p.r) + "x" +
                      std::to_string(p.f) + " but labels are " + std::to_string(y.residues) + "x" +
                      std::to_string(y.groups));
    }
    const Tensor probs({p.r, p.f, kInteractionTypes}, p.probs);
    if (level == "residue") {
      const auto scores = residue_scores(probs);
      const auto hard = residue_hard(y);
      const auto soft = smooth(hard, sigma);
      out.scores.insert(out.scores.end(), scores.begin(), scores.end());
      out.hard.insert(out.hard.end(), hard.begin(), hard.end());
      out.soft.insert(out.soft.end(), soft.begin(), soft.end());
    } else if (level == "pair") {
      for (std::size_t r = 0; r < p.r; ++r)
        for (std::size_t f = 0; f < p.f; ++f) {
          double m = 0.0;
          std::uint8_t any = 0;
          for (std::size_t k = 0; k < kInteractionTypes; ++k) {
            m = std::max(m, p.probs[(r * p.f + f) * kInteractionTypes + k]);
            any = static_cast<std::uint8_t>(any | y.at(r, f, k));
          }
          out.scores.push_back(m);
          out.hard.push_back(any);
          out.soft.push_back(any);
        }
    } else {
      out.scores.insert(out.scores.end(), p.probs.begin(), p.probs.end());
      out.hard.insert(out.hard.end(), y.values.begin(), y.values.end());
      for (auto v : y.values) out.soft.push_back(v);
    }
  }
  return out;
}

std::vector<double> read_affinity_column(const std::string& path, std::vector<double>& truth) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<double> pred;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, t, p;
    std::getline(ss, id, ',');
    std::getline(ss, t, ',');
    std::getline(ss, p, ',');
    if (t.empty()) continue;
    try {
      truth.push_back(std::stod(t));
      pred.push_back(std::stod(p));
    } catch (const std::exception&) {
      throw DataError(path + ": malformed row " + line);
    }
  }
  return pred;
}

struct Evaluation {
  EvalReport report;
  PrCurve pr;
  RocCurve roc;
};

Evaluation evaluate(const EvalFlags& f) {
  if (f.level != "residue" && f.level != "pair" && f.level != "entry") {
    throw UsageError("--level must be residue, pair or entry");
  }
  const auto thresholds = parse_list(f.thresholds, "--thresholds");
  const auto recalls = parse_list(f.recalls, "--recalls");
  const Flattened flat = flatten(load_predictions(f.preds), f.labels, f.level, f.sigma);
  Evaluation ev;
  ev.pr = pr_curve(flat.scores, flat.hard);
  ev.roc = roc_curve(flat.scores, flat.hard);
  EvalReport& rep = ev.report;
  rep.level = f.level;
  rep.n = flat.scores.size();
  rep.ap = ev.pr.ap;
  rep.roc_auc = ev.roc.auc;
  rep.prevalence = prevalence(flat.hard);
  for (double r : recalls) rep.enrichment_at_recall.push_back({r, enrichment_at_recall(ev.pr, rep.prevalence, r)});
  for (double t : thresholds) {
    std::vector<std::uint8_t> called(flat.scores.size());
    for (std::size_t i = 0; i < called.size(); ++i) called[i] = flat.scores[i] >= t;
    try {
      rep.weighted_precision_at.push_back({t, weighted_precision(called, flat.soft)});
    } catch (const NoPredictions&) {
      rep.weighted_precision_at.push_back({t, std::nullopt});
    }
  }
  if (!f.affinity_csv.empty()) {
    std::vector<double> truth;
    const auto pred = read_affinity_column(f.affinity_csv, truth);
    rep.rmse = rmse(pred, truth);
  }
  return ev;
}

int cmd_evaluate(const EvalFlags& f) {
  const Evaluation ev = evaluate(f);
  const std::string text = ev.report.to_json();
  if (f.output.empty()) {
    std::cout << text << "\n";
  } else {
    open_out(f.output) << text << "\n";
  }
  return kOk;
}

int cmd_export_curves(const EvalFlags& f, const std::string& out_dir) {
  const Evaluation ev = evaluate(f);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  open_out((dir / ("pr_" + f.level + ".csv")).string()) << pr_curve_csv(ev.pr);
  open_out((dir / ("roc_" + f.level + ".csv")).string()) << roc_curve_csv(ev.roc);
  open_out((dir / ("summary_" + f.level + ".json")).string()) << ev.report.to_json() << "\n";
  std::cout << json{{"pr_points", ev.pr.points.size()}, {"roc_points", ev.roc.points.size()}}.dump() << "\n";
  return kOk;
}

// ---- smooth-labels ----------------------------------------------------------

int cmd_smooth_labels(const std::string& labels_path, double sigma, const std::string& output) {
  const auto all = load_labels(labels_path, "");
  auto out = open_out(output);
  out << "protein_id,ligand_id,residue,y_hard,y_smooth\n";
  for (const auto& ls : all) {
    const auto hard = residue_hard(ls);
    const auto soft = smooth(hard, sigma);
    for (std::size_t r = 0; r < hard.size(); ++r) {
      out << ls.protein_id << ',' << ls.ligand_id << ',' << r << ',' << int{hard[r]} << ','
          << fmt(soft[r]) << '\n';
    }
  }
  return kOk;
}

// ---- entry point ------------------------------------------------------------

void add_eval_flags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--preds", f.preds, "Directory of prediction JSON files")->required();
  cmd->add_option("--labels", f.labels, "Label JSON-lines file")->required();
  cmd->add_option("--level", f.level, "Aggregation level: residue, pair or entry")->capture_default_str();
  cmd->add_option("--sigma", f.sigma, "Gaussian smoothing width for weighted precision (residue level)")
      ->capture_default_str();
  cmd->add_option("--thresholds", f.thresholds, "Comma-separated confidence thresholds")->capture_default_str();
  cmd->add_option("--recalls", f.recalls, "Comma-separated recall levels for enrichment")->capture_default_str();
  cmd->add_option("--affinity-csv", f.affinity_csv, "complex_id,y_true,y_pred file; adds RMSE");
}

std::string short_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void add_train_flags(CLI::App* cmd, TrainFlags& f, Stage stage) {
  const TrainConfig d = TrainConfig::defaults(stage);
  std::ostringstream keys;
  keys << "INI config with [train], [focal], [latent], [model] sections; defaults: train.epochs=" << d.epochs
       << " train.batch_size=" << d.batch_size << " train.learning_rate=" << d.adam.learning_rate
       << " train.beta1=" << d.adam.beta1 << " train.beta2=" << d.adam.beta2
       << " train.epsilon=" << d.adam.epsilon << " train.weight_decay=0 train.grad_clip=0";
  if (stage == Stage::kInteraction) {
    keys << " focal.alpha=" << d.focal.alpha << " focal.gamma=" << d.focal.gamma;
  } else {
    keys << " latent.beta=" << d.latent.beta << " latent.lambda=" << d.latent.lambda
         << " latent.tau=" << d.latent.tau;
  }
  keys << " model.dim=" << d.model.model_dim << " model.heads=" << d.model.heads
       << " model.protein_mode=fallback";
  cmd->add_option("--config", f.config, keys.str());
  cmd->add_option("--manifest", f.manifest, "Complex manifest (JSON lines)")->required();
  cmd->add_option("--out", f.out_dir, "Output directory for checkpoints and the training log")->required();
  cmd->add_option("--epochs", f.epochs, "Training epochs")->default_str(std::to_string(d.epochs));
  cmd->add_option("--batch-size", f.batch_size, "Complexes per optimizer step")
      ->default_str(std::to_string(d.batch_size));
  cmd->add_option("--lr", f.learning_rate, "Adam learning rate")->default_str(short_num(d.adam.learning_rate));
  cmd->add_option("--max-epochs-this-run", f.max_epochs_this_run, "Stop after this many epochs (resumable)");
  cmd->add_flag("--resume", f.resume, "Continue from <out>/last.ckpt when present");
}

int run(int argc, char** argv) {
  CLI::App app{"linker: protein-ligand interaction and affinity prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for initialization and shuffling (overrides config)")
      ->default_str("config value, else 0");
  app.add_option("--jobs", g.jobs, "Worker threads for loading and prediction")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "Fail on unsupported SMILES features instead of skipping");

  std::string input, output, manifest, config, checkpoint, out_dir, affinity_csv, labels;
  double sigma = 2.0;

  auto* parse_fg = app.add_subcommand("parse-fg", "Detect functional groups in a .smi file");
  parse_fg->add_option("--input", input, ".smi input (SMILES, optional tab and id)")->required();
  parse_fg->add_option("--output", output, "groups.jsonl output")->required();

  auto* featurize = app.add_subcommand("featurize", "Validate a manifest and export ligand groups");
  featurize->add_option("--manifest", manifest, "Complex manifest (JSON lines)")->required();
  featurize->add_option("--config", config, "INI config providing the [model] section");
  featurize->add_option("--output", output, "groups.jsonl output")->required();

  TrainFlags ti, ta;
  auto* train_i = app.add_subcommand("train-interaction", "Train the interaction model with focal loss");
  add_train_flags(train_i, ti, Stage::kInteraction);
  auto* train_a = app.add_subcommand("train-affinity", "Train the affinity head on a frozen backbone");
  add_train_flags(train_a, ta, Stage::kAffinity);
  train_a->add_option("--backbone", ta.backbone, "Interaction checkpoint")->required();

  auto* predict = app.add_subcommand("predict", "Write interaction maps (and affinities) per complex");
  predict->add_option("--backbone", checkpoint, "Interaction or affinity checkpoint")->required();
  predict->add_option("--manifest", manifest, "Complex manifest (JSON lines)")->required();
  predict->add_option("--out", out_dir, "Output directory, one JSON per complex")->required();
  predict->add_option("--affinity-csv", affinity_csv, "Affinity CSV path (default <out>/affinity.csv)");

  EvalFlags ev, ec;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against labels");
  add_eval_flags(evaluate_cmd, ev);
  evaluate_cmd->add_option("--output", ev.output, "Report path (default stdout)");

  auto* smooth_cmd = app.add_subcommand("smooth-labels", "Residue-level Gaussian-smoothed labels as CSV");
  smooth_cmd->add_option("--labels", labels, "Label JSON-lines file")->required();
  smooth_cmd->add_option("--sigma", sigma, "Smoothing width in residues")->capture_default_str();
  smooth_cmd->add_option("--output", output, "CSV output")->required();

  auto* curves = app.add_subcommand("export-curves", "Write PR and ROC curves plus a summary report");
  add_eval_flags(curves, ec);
  curves->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "linker: error: usage: " << one_line(e.what()) << "\n";
    return kUsage;
  }

  if (parse_fg->parsed()) return cmd_parse_fg(g, input, output);
  if (featurize->parsed()) return cmd_featurize(g, manifest, config, output);
  if (train_i->parsed()) return cmd_train_interaction(g, ti);
  if (train_a->parsed()) return cmd_train_affinity(g, ta);
  if (predict->parsed()) return cmd_predict(g, checkpoint, manifest, out_dir, affinity_csv);
  if (evaluate_cmd->parsed()) return cmd_evaluate(ev);
  if (smooth_cmd->parsed()) return cmd_smooth_labels(labels, sigma, output);
  if (curves->parsed()) return cmd_export_curves(ec, out_dir);
  return kUsage;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "linker: error: " << kind << ": " << one_line(e.what()) << "\n";
  return code;
}

}  // namespace
}  // namespace linker

int main(int argc, char** argv) {
  using namespace linker;
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    return report("usage", e, kUsage);
  } catch (const FrozenViolation& e) {
    return report("internal", e, kInternal);
  } catch (const CoverageViolation& e) {
    return report("internal", e, kInternal);
  } catch (const NoTape& e) {
    return report("internal", e, kInternal);
  } catch (const std::invalid_argument& e) {
    return report("data", e, kData);
  } catch (const std::out_of_range& e) {
    return report("data", e, kData);
  } catch (const std::domain_error& e) {
    return report("data", e, kData);
  } catch (const std::runtime_error& e) {
    return report("data", e, kData);
  } catch (const nlohmann::json::exception& e) {
    return report("data", e, kData);
  } catch (const std::exception& e) {
    return report("internal", e, kInternal);
  }
}
