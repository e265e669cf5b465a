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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "linker/affinity_head.hpp"
#include "linker/checkpoint.hpp"
#include "linker/dataset.hpp"
#include "linker/fgparser.hpp"
#include "linker/finger_id.hpp"
#include "linker/labels.hpp"
#include "linker/losses.hpp"
#include "linker/metrics.hpp"
#include "linker/model.hpp"
#include "linker/molgraph.hpp"
#include "linker/pairwise_unet.hpp"
#include "linker/scat.hpp"
#include "linker/training.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace linker {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail.str("");
      detail << what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void randomize_biases(ParamList params, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.3);
  for (auto& p : params)
    if (p.name.ends_with(".bias"))
      for (double& v : p.tensor.mutable_data()) v = u(rng);
}

// ---------------------------------------------------------------------------

Outcome gradient_fidelity() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(101);
  const auto check = [&](const std::string& name, const std::function<Tensor()>& f,
                         const std::vector<Tensor>& leaves) {
    const auto rep = testing::check_gradients(f, leaves, 1e-5, 1e-4, 1e-6);
    o.require(rep.ok, name + ": " + rep.detail);
    return rep.checked;
  };
  std::size_t checked = 0;

  for (const char* smiles : {"CC(=O)Oc1ccccc1C(=O)O", "OCC=O", "Nc1ccc(Cl)cc1"}) {
    FingerIdConfig cfg;
    cfg.graph_dim = 4;
    cfg.fg_dim = 3;
    cfg.pos_dim = 2;
    cfg.model_dim = 5;
    cfg.n_patterns = default_catalogue().size();
    FingerId fid(cfg, rng);
    ParamList params;
    fid.collect(params, "finger_id");
    randomize_biases(params, rng);
    const LigandInput lig = featurize_ligand(smiles);
    const Tensor w = testing::random_tensor({lig.pooling.dim(0), 5}, rng);
    checked += check(std::string("GCN/FINGER-ID ") + smiles, [&] { return sum(mul(fid.forward(lig), w)); },
                     tensors_of(params));
    Tensor x = testing::random_tensor(lig.features.shape(), rng, -1, 1, true);
    const Tensor wg = testing::random_tensor({lig.features.dim(0), 4}, rng);
    checked += check("GCN layers", [&] { return sum(mul(fid.gcn_forward(lig.adjacency, x), wg)); }, {x});
  }

  for (auto [r, f] : {std::pair<std::size_t, std::size_t>{3, 2}, {5, 4}, {1, 3}}) {
    Scat scat(6, 2, rng);
    ParamList params;
    scat.collect(params, "scat");
    randomize_biases(params, rng);
    Tensor hp = testing::random_tensor({r, 6}, rng, -1, 1, true);
    Tensor hl = testing::random_tensor({f, 6}, rng, -1, 1, true);
    const Tensor wp = testing::random_tensor({r, 6}, rng), wl = testing::random_tensor({f, 6}, rng);
    auto leaves = tensors_of(params);
    leaves.push_back(hp);
    leaves.push_back(hl);
    checked += check("SCAT", [&] {
      const ScatOutput out = scat.forward(hp, hl);
      return add(sum(mul(out.protein, wp)), sum(mul(out.ligand, wl)));
    }, leaves);
  }

  for (auto [r, f] : {std::pair<std::size_t, std::size_t>{6, 6}, {5, 3}, {9, 2}}) {
    PairwiseUNet net(UNetConfig{4, 2, 3}, rng);
    ParamList params = net.parameters();
    randomize_biases(params, rng);
    Tensor z = testing::random_tensor({r, f, 4}, rng, -1, 1, true);
    auto leaves = tensors_of(params);
    leaves.push_back(z);
    checked += check("PairwiseUNet", [&] { return mean(net.forward(z)); }, leaves);
  }

  for (auto [r, f] : {std::pair<std::size_t, std::size_t>{4, 3}, {2, 5}}) {
    AffinityHead head(AffinityHeadConfig{3, 6, 4}, rng);
    ParamList params;
    head.collect(params, "affinity");
    randomize_biases(params, rng);
    Tensor hp = testing::random_tensor({r, 3}, rng, -1, 1, true);
    Tensor hl = testing::random_tensor({f, 3}, rng, -1, 1, true);
    Tensor probs = testing::random_tensor({r, f, 7}, rng, 0.05, 0.95, true);
    auto leaves = tensors_of(params);
    leaves.push_back(hp);
    leaves.push_back(hl);
    leaves.push_back(probs);
    checked += check("Contact/Fusion/MLP", [&] { return head.forward(hp, hl, probs).prediction; }, leaves);
  }

  {
    Tensor p = testing::random_tensor({3, 2, 7}, rng, 0.05, 0.95, true);
    std::vector<double> yv(42);
    for (double& v : yv) v = rng() % 3 == 0;
    const Tensor y({3, 2, 7}, yv);
    for (double gamma : {0.0, 1.0, 2.5})
      checked += check("focal", [&] { return focal_loss(p, y, FocalConfig{0.85, gamma}); }, {p});
    Tensor a = testing::random_tensor({5}, rng, -1, 1, true);
    const Tensor b = testing::random_tensor({5}, rng);
    checked += check("mse", [&] { return mse(a, b); }, {a});
    Tensor h = testing::random_tensor({5, 4}, rng, -1, 1, true);
    const std::vector<double> aff{0.3, 2.2, 1.0, 4.1, 0.9};
    checked += check("InfoNCE", [&] { return info_nce(h, aff, 0.1); }, {h});
    checked += check("uniformity", [&] { return uniformity(l2_normalize(h, 1)); }, {h});
    checked += check("total", [&] {
      return total_affinity_loss(mse(a, b), info_nce(h, aff, 0.1), uniformity(l2_normalize(h, 1)));
    }, {a, h});
  }
  const double secs = seconds_since(t0);
  o.require(secs < 300.0, "took " + std::to_string(secs) + " s");
  if (o.ok) o.detail << checked << " partial derivatives within rtol 1e-4, atol 1e-6 in " << secs << " s";
  return o;
}

// ---------------------------------------------------------------------------

Outcome fgparser_coverage() {
  Outcome o;
  std::vector<std::string> corpus;
  std::ifstream in(testing::fixture("corpus.smi"));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) corpus.push_back(line.substr(0, line.find('\t')));
  o.require(corpus.size() >= 100, "corpus has only " + std::to_string(corpus.size()) + " molecules");

  const auto& catalogue = default_catalogue();
  const auto run = [&](std::size_t jobs) {
    std::vector<std::string> out(corpus.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t i = next++; i < corpus.size(); i = next++)
        out[i] = groups_record_json(std::to_string(i), parse_functional_groups(parse_smiles(corpus[i]), catalogue),
                                    catalogue);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
  };
  const auto reference = run(1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const GroupsRecord rec = parse_groups_record(reference[i]);
    for (std::size_t a = 0; a < rec.n_atoms; ++a) {
      bool covered = false;
      for (std::size_t g = 0; g < rec.matrix.n_groups; ++g) covered = covered || rec.matrix.at(a, g);
      o.require(covered, "atom " + std::to_string(a) + " of " + corpus[i] + " is uncovered");
    }
  }
  for (std::size_t trial = 0; trial < 10; ++trial)
    o.require(run(1 + trial % 4) == reference, "run " + std::to_string(trial) + " differs");

  const auto gly = parse_functional_groups(parse_smiles("OCC=O"), catalogue);
  const std::vector<std::uint8_t> want{1, 0, 1, 0, 0, 1, 0, 1};
  o.require(gly.groups.size() == 2 && gly.matrix.entries == want &&
                pattern_name(catalogue, gly.groups[0].pattern_id) == "hydroxyl",
            "glycolaldehyde: C2 not assigned to the ascending group");
  if (o.ok) o.detail << corpus.size() << " molecules fully covered, 10 identical runs at 1-4 workers, glycolaldehyde C2 -> group 0";
  return o;
}

// ---------------------------------------------------------------------------

double ap_oracle(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  std::size_t total = 0;
  for (auto v : y) total += v;
  double ap = 0.0;
  std::size_t last = 0;
  for (double t : thresholds) {
    std::size_t tp = 0, called = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) {
        ++called;
        tp += y[i];
      }
    ap += static_cast<double>(tp - last) / static_cast<double>(total) *
          (static_cast<double>(tp) / static_cast<double>(called));
    last = tp;
  }
  return ap;
}

double auc_oracle(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  std::uint64_t score = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] && !y[j]) {
        pairs += 2;
        score += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
      }
  return static_cast<double>(score) / static_cast<double>(pairs);
}

Outcome metric_oracles() {
  Outcome o;
  Rng rng(202);
  std::size_t compared = 0;
  while (compared < 1000) {
    const std::size_t n = 2 + rng() % 63;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    const unsigned levels = 1 + rng() % 16;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / 8.0;
      y[i] = rng() % 3 == 0;
    }
    y[0] = 1;
    y[n - 1] = 0;
    const double ap = pr_curve(s, y).ap, auc = roc_curve(s, y).auc;
    o.require(ap == ap_oracle(s, y), "AP differs from oracle");
    o.require(auc == auc_oracle(s, y), "AUC differs from oracle");
    ++compared;
  }
  const double ap = pr_curve({0.9, 0.8, 0.3}, {1, 0, 1}).ap;
  const double auc = roc_curve({0.9, 0.8, 0.3}, {1, 0, 1}).auc;
  o.require(std::abs(ap - 0.8333) < 5e-5, "fixture AP " + std::to_string(ap));
  o.require(auc == 0.5, "fixture AUC " + std::to_string(auc));
  if (o.ok) o.detail << compared << " tie-grouped instances match brute force; fixture AP " << ap << ", AUC " << auc;
  return o;
}

// ---------------------------------------------------------------------------

Outcome smoothing() {
  Outcome o;
  const auto y = smooth({0, 0, 1, 0, 0}, 2.0);
  o.require(std::abs(y[0] - std::exp(-0.5)) <= 1e-9, "distance-2 value " + std::to_string(y[0]));
  o.require(std::round(y[0] * 1e5) / 1e5 == 0.60653, "distance-2 value does not round to 0.60653");
  for (double v : smooth(std::vector<std::uint8_t>(9, 0), 2.0)) o.require(v == 0.0, "empty anchor set not zero");
  Rng rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint8_t> hard(5 + rng() % 60);
    for (auto& h : hard) h = rng() % 6 == 0;
    std::vector<double> last(hard.size(), 0.0);
    for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
      const auto cur = smooth(hard, sigma);
      for (std::size_t i = 0; i < hard.size(); ++i) o.require(cur[i] >= last[i], "not monotone in sigma");
      last = cur;
    }
  }
  if (o.ok) o.detail << "y(d=2, sigma=2) = " << std::setprecision(10) << y[0] << ", empty set -> 0, monotone on 100 vectors";
  return o;
}

// ---------------------------------------------------------------------------

std::string ligand_with_groups(std::size_t f) {
  if (f == 1) return "C";
  std::string s = "O";
  for (std::size_t k = 1; k < f; ++k) s += "CCCO";
  return s;
}

Outcome shape_law() {
  Outcome o;
  const InteractionModel model(testing::tiny_model_config(4));
  const std::string alphabet = "ACDEFGHIKLMNPQRSTVWY";
  Rng rng(404);
  std::size_t grids = 0;
  for (std::size_t f = 1; f <= 16; ++f) {
    const LigandInput lig = featurize_ligand(ligand_with_groups(f));
    o.require(lig.matrix.n_groups == f, "could not build a ligand with F=" + std::to_string(f));
    if (lig.matrix.n_groups != f) continue;
    for (std::size_t r = 4; r <= 32; ++r) {
      ComplexInput in;
      in.id = "shape";
      for (std::size_t i = 0; i < r; ++i) in.protein.residues.push_back(alphabet[rng() % 20]);
      in.ligand = lig;
      NoGradGuard no_grad;
      const Tensor p = model.forward(in).probs;
      o.require(p.shape() == Shape{r, f, 7}, "shape " + shape_str(p.shape()) + " at R=" + std::to_string(r));
      for (double v : p.data()) o.require(v > 0.0 && v < 1.0, "entry outside (0,1)");
      ++grids;
    }
  }
  if (o.ok) o.detail << grids << " (R,F) pairs in {4..32}x{1..16} give R x F x 7 in (0,1)";
  return o;
}

// ---------------------------------------------------------------------------

struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("linker_accept_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

std::vector<Sample> synthetic_samples(const fs::path& dir, std::size_t n, std::uint64_t seed) {
  const auto ds = testing::write_synthetic_dataset(dir, n, seed, 0);
  return load_samples(load_manifest(ds.manifest), testing::tiny_model_config(), true);
}

TrainConfig tiny_train(Stage stage, std::size_t epochs, double lr) {
  TrainConfig c = TrainConfig::defaults(stage);
  c.epochs = epochs;
  c.batch_size = stage == Stage::kInteraction ? 2 : 4;
  c.seed = 5;
  c.adam.learning_rate = lr;
  c.model = testing::tiny_model_config(6);
  return c;
}

Outcome overfit() {
  Outcome o;
  Scratch scratch("overfit");
  const auto samples = synthetic_samples(scratch.dir, 8, 77);
  const TrainConfig cfg = tiny_train(Stage::kInteraction, 200, 3e-3);
  InteractionModel model(cfg.model);
  const auto t0 = Clock::now();
  train_interaction(model, samples, {}, cfg, {});
  const double secs = seconds_since(t0);
  const double loss = interaction_loss(model, samples, cfg.focal);
  std::vector<double> scores;
  std::vector<std::uint8_t> hard;
  {
    NoGradGuard no_grad;
    for (const auto& s : samples) {
      const auto sc = residue_scores(model.forward(s.input).probs);
      const auto h = residue_hard(*s.labels);
      scores.insert(scores.end(), sc.begin(), sc.end());
      hard.insert(hard.end(), h.begin(), h.end());
    }
  }
  const double ap = pr_curve(scores, hard).ap;
  o.require(loss < 0.01, "train focal loss " + std::to_string(loss));
  o.require(ap > 0.99, "train residue AP " + std::to_string(ap));
  o.require(secs < 600.0, "took " + std::to_string(secs) + " s");
  o.detail.str("");
  o.detail << "8 complexes, 200 epochs: focal " << loss << ", residue AP " << ap << ", " << secs << " s";
  return o;
}

// ---------------------------------------------------------------------------

Outcome freezing() {
  Outcome o;
  Scratch scratch("freeze");
  const auto ds = testing::write_synthetic_dataset(scratch.dir, 10, 88, 2);
  std::vector<Sample> train, val;
  for (auto& s : load_samples(load_manifest(ds.manifest), testing::tiny_model_config(), true))
    (s.split == "val" ? val : train).push_back(std::move(s));
  const TrainConfig icfg = tiny_train(Stage::kInteraction, 5, 1e-2);
  InteractionModel backbone(icfg.model);
  train_interaction(backbone, train, val, icfg, {});
  const std::string before = parameter_hash(backbone.parameters());
  AffinityModel model(std::move(backbone), 9);
  const std::string head_before = parameter_hash(model.head_parameters());
  TrainState st;
  try {
    st = train_affinity(model, train, val, tiny_train(Stage::kAffinity, 20, 1e-2), {});
  } catch (const FrozenViolation& e) {
    o.require(false, e.what());
  }
  o.require(parameter_hash(model.backbone().parameters()) == before, "backbone hash changed");
  o.require(parameter_hash(model.head_parameters()) != head_before, "head did not train");
  if (o.ok) o.detail << "backbone SHA-256 " << before.substr(0, 12) << " unchanged over " << st.history.size()
                     << " epochs; zero backbone gradient asserted every step";
  return o;
}

// ---------------------------------------------------------------------------

Outcome loss_fixtures() {
  Outcome o;
  const double focal = focal_loss(Tensor({1}, {0.5}), Tensor({1}, {1.0})).item();
  o.require(std::abs(focal - 0.85 * 0.5 * std::log(2.0)) <= 1e-12, "focal closed form");
  o.require(std::abs(focal - 0.29459) <= 1e-5, "focal fixture " + std::to_string(focal));
  Rng rng(505);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Tensor p = testing::random_tensor({4, 3, 7}, rng, 0.001, 0.999);
    std::vector<double> yv(84);
    for (double& v : yv) v = rng() % 4 == 0;
    double bce = 0.0;
    for (std::size_t i = 0; i < 84; ++i)
      bce -= yv[i] > 0.5 ? 0.85 * std::log(p.data()[i]) : 0.15 * std::log(1 - p.data()[i]);
    worst = std::max(worst, std::abs(focal_loss(p, Tensor({4, 3, 7}, yv), FocalConfig{0.85, 0.0}).item() - bce / 84));
  }
  o.require(worst <= 1e-12, "gamma=0 vs BCE " + std::to_string(worst));
  const Tensor same({2, 4}, {0.1, 0.7, -0.2, 0.4, 0.1, 0.7, -0.2, 0.4});
  const double nce = info_nce(same, {1.0, 3.0}, 0.1).item();
  o.require(std::abs(nce - std::log(2.0)) <= 1e-9, "InfoNCE " + std::to_string(nce));
  const double unif = uniformity(l2_normalize(same, 1)).item();
  o.require(std::abs(unif) <= 1e-12, "uniformity " + std::to_string(unif));
  if (o.ok) o.detail << std::setprecision(8) << "focal " << focal << ", |focal(g=0) - BCE| " << worst << ", InfoNCE " << nce
                     << ", uniformity " << unif;
  return o;
}

// ---------------------------------------------------------------------------

Outcome aggregation() {
  Outcome o;
  Rng rng(606);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t r = 1 + rng() % 12, f = 1 + rng() % 9;
    const Tensor p = testing::random_tensor({r, f, 7}, rng, 0, 1);
    const auto y = residue_scores(p);
    for (std::size_t i = 0; i < r; ++i) {
      double m = -1.0;
      for (std::size_t j = 0; j < f; ++j)
        for (std::size_t k = 0; k < 7; ++k) m = std::max(m, p.at({i, j, k}));
      o.require(y[i] == m, "residue score differs from joint max");
    }
  }
  if (o.ok) o.detail << "1000 random tensors, exact equality";
  return o;
}

// ---------------------------------------------------------------------------

bool same_trajectory(const TrainState& a, const TrainState& b) {
  if (a.history.size() != b.history.size()) return false;
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    const auto& x = a.history[i];
    const auto& y = b.history[i];
    if (std::memcmp(&x.train_loss, &y.train_loss, sizeof(double)) != 0) return false;
    if (std::memcmp(&x.val_loss, &y.val_loss, sizeof(double)) != 0) return false;
  }
  return true;
}

Outcome determinism() {
  Outcome o;
  Scratch scratch("determinism");
  const auto ds = testing::write_synthetic_dataset(scratch.dir, 8, 99, 2);
  std::vector<Sample> train, val;
  for (auto& s : load_samples(load_manifest(ds.manifest), testing::tiny_model_config(), true))
    (s.split == "val" ? val : train).push_back(std::move(s));
  const TrainConfig cfg = tiny_train(Stage::kInteraction, 6, 1e-2);

  InteractionModel a(cfg.model), b(cfg.model);
  const TrainState sa = train_interaction(a, train, val, cfg, {});
  const TrainState sb = train_interaction(b, train, val, cfg, {});
  o.require(same_trajectory(sa, sb), "loss trajectories differ between runs");
  o.require(parameter_hash(a.parameters()) == parameter_hash(b.parameters()), "final parameters differ");

  const std::string bytes = encode_checkpoint(model_records(a));
  const auto decoded = decode_checkpoint(bytes);
  o.require(encode_checkpoint(decoded) == bytes, "checkpoint re-encoding is not byte-identical");
  o.require(parameter_hash(load_model(decoded).parameters()) == parameter_hash(a.parameters()),
            "restored parameters differ");

  const std::string ckpt = (scratch.dir / "resume.ckpt").string();
  InteractionModel c(cfg.model);
  train_interaction(c, train, val, cfg, {ckpt, "", "", 2});
  const auto records = read_checkpoint(ckpt);
  InteractionModel resumed = load_model(records);
  const TrainState sc = train_interaction(resumed, train, val, cfg, {ckpt, "", "", std::nullopt}, load_train_state(records));
  o.require(same_trajectory(sc, sa), "resumed trajectory differs");
  o.require(parameter_hash(resumed.parameters()) == parameter_hash(a.parameters()), "resumed parameters differ");

  TrainConfig acfg = tiny_train(Stage::kAffinity, 4, 1e-2);
  acfg.batch_size = 3;
  AffinityModel x(InteractionModel(cfg.model), 3), y(InteractionModel(cfg.model), 3);
  const TrainState ax = train_affinity(x, train, val, acfg, {});
  const TrainState ay = train_affinity(y, train, val, acfg, {});
  o.require(same_trajectory(ax, ay), "affinity trajectories differ");
  if (o.ok) o.detail << "identical loss trajectories, byte-identical checkpoint round trip, resume after 2 of 6 epochs matches";
  return o;
}

}  // namespace
}  // namespace linker

int main() {
  using namespace linker;
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"gradient fidelity", gradient_fidelity},
      {"fgparser coverage", fgparser_coverage},
      {"metric oracle equivalence", metric_oracles},
      {"smoothing closed forms", smoothing},
      {"shape law", shape_law},
      {"overfit check", overfit},
      {"freezing contract", freezing},
      {"loss fixtures", loss_fixtures},
      {"aggregation law", aggregation},
      {"determinism and persistence", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail.str(std::string("exception: ") + e.what());
    }
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << ": " << o.detail.str() << std::endl;
    failures += !o.ok;
  }
  return failures == 0 ? 0 : 1;
}
