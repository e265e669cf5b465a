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

#include "linker/training.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "json.hpp"

namespace linker {
namespace pt = boost::property_tree;

TrainConfig TrainConfig::defaults(Stage stage) {
  TrainConfig c;
  c.stage = stage;
  if (stage == Stage::kAffinity) {
    c.epochs = 80;
    c.batch_size = 16;
  }
  return c;
}

TrainConfig TrainConfig::from_tree(const pt::ptree& tree, Stage stage) {
  TrainConfig c = defaults(stage);
  c.epochs = tree.get<std::size_t>("train.epochs", c.epochs);
  c.batch_size = tree.get<std::size_t>("train.batch_size", c.batch_size);
  c.seed = tree.get<std::uint64_t>("train.seed", c.seed);
  c.adam.learning_rate = tree.get<double>("train.learning_rate", c.adam.learning_rate);
  c.adam.beta1 = tree.get<double>("train.beta1", c.adam.beta1);
  c.adam.beta2 = tree.get<double>("train.beta2", c.adam.beta2);
  c.adam.epsilon = tree.get<double>("train.epsilon", c.adam.epsilon);
  c.adam.weight_decay = tree.get<double>("train.weight_decay", c.adam.weight_decay);
  c.adam.grad_clip = tree.get<double>("train.grad_clip", c.adam.grad_clip);
  c.focal.alpha = tree.get<double>("focal.alpha", c.focal.alpha);
  c.focal.gamma = tree.get<double>("focal.gamma", c.focal.gamma);
  c.latent.beta = tree.get<double>("latent.beta", c.latent.beta);
  c.latent.lambda = tree.get<double>("latent.lambda", c.latent.lambda);
  c.latent.tau = tree.get<double>("latent.tau", c.latent.tau);
  c.model = ModelConfig::from_tree(tree);
  if (c.batch_size == 0) throw std::invalid_argument("train.batch_size must be >= 1");
  if (!(c.focal.alpha > 0.0 && c.focal.alpha < 1.0) || c.focal.gamma < 0.0) {
    throw std::invalid_argument("focal.alpha must lie in (0,1) and focal.gamma >= 0");
  }
  if (!(c.latent.tau > 0.0)) throw std::invalid_argument("latent.tau must be > 0");
  return c;
}

TrainConfig load_train_config(const std::string& path, Stage stage) {
  pt::ptree tree;
  pt::read_ini(path, tree);
  return TrainConfig::from_tree(tree, stage);
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  const auto e = static_cast<std::uint64_t>(epoch);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(e >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

namespace {

double finite_or_nan(const nlohmann::json& j) {
  return j.is_null() ? kNoValue : j.get<double>();
}

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class CsvLog {
 public:
  CsvLog(const std::string& path, bool append) {
    if (path.empty()) return;
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open log " + path);
    if (!append) out_ << "epoch,split,loss,mse,infonce,uniformity,rmse\n";
  }
  void row(std::size_t epoch, const char* split, double loss, double mse_v, double nce,
           double unif, double rmse_v) {
    if (!out_.is_open()) return;
    out_ << epoch << ',' << split << ',' << csv_num(loss) << ',' << csv_num(mse_v) << ','
         << csv_num(nce) << ',' << csv_num(unif) << ',' << csv_num(rmse_v) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

Tensor labels_tensor(const Sample& s) {
  if (!s.labels) throw DataError("complex " + s.input.id + ": missing labels");
  return s.labels->as_tensor();
}

double affinity_of(const Sample& s) {
  if (!s.affinity) throw DataError("complex " + s.input.id + ": missing affinity");
  return *s.affinity;
}

double rmse_of(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return a.empty() ? kNoValue : std::sqrt(acc / static_cast<double>(a.size()));
}

void save(const std::string& path, std::vector<CheckpointRecord> records, const TrainState& st) {
  if (path.empty()) return;
  for (auto& r : state_records(st)) records.push_back(std::move(r));
  write_checkpoint(path, records);
}

void check_frozen(const ParamList& backbone) {
  for (const auto& p : backbone) {
    for (double g : p.tensor.grad()) {
      if (g != 0.0) throw FrozenViolation("backbone parameter " + p.name + " received a gradient");
    }
  }
}

}  // namespace

double interaction_loss(const InteractionModel& model, const std::vector<Sample>& samples,
                        const FocalConfig& focal) {
  if (samples.empty()) return kNoValue;
  NoGradGuard no_grad;
  double acc = 0.0;
  for (const auto& s : samples) {
    acc += focal_loss(model.forward(s.input).probs, labels_tensor(s), focal).item();
  }
  return acc / static_cast<double>(samples.size());
}

std::vector<double> predict_affinities(const AffinityModel& model,
                                       const std::vector<Sample>& samples) {
  NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(model.forward(s.input).head.prediction.item());
  return out;
}

TrainState train_interaction(InteractionModel& model, const std::vector<Sample>& train,
                             const std::vector<Sample>& validation, const TrainConfig& config,
                             const TrainOptions& options, TrainState state) {
  if (train.empty()) throw DataError("training set is empty");
  std::vector<Tensor> params = tensors_of(model.parameters());
  CsvLog log(options.log_path, state.next_epoch > 0);
  std::size_t ran = 0;
  for (std::size_t epoch = state.next_epoch; epoch < config.epochs; ++epoch) {
    if (options.max_epochs_this_run && ran == *options.max_epochs_this_run) break;
    const auto order = epoch_permutation(train.size(), config.seed, epoch);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double inv = 1.0 / static_cast<double>(end - start);
      zero_grads(params);
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train[order[i]];
        Tape tape;
        const Tensor loss = focal_loss(model.forward(s.input).probs, labels_tensor(s), config.focal);
        total += loss.item();
        backward(scale(loss, inv));
      }
      adam_step(params, state.adam, config.adam);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = total / static_cast<double>(train.size());
    entry.val_loss = interaction_loss(model, validation, config.focal);
    log.row(epoch, "train", entry.train_loss, kNoValue, kNoValue, kNoValue, kNoValue);
    if (!validation.empty()) log.row(epoch, "val", entry.val_loss, kNoValue, kNoValue, kNoValue, kNoValue);
    state.history.push_back(entry);
    state.next_epoch = epoch + 1;
    ++ran;
    const double score = validation.empty() ? entry.train_loss : entry.val_loss;
    if (score < state.best_score) {
      state.best_score = score;
      state.best_epoch = epoch;
      save(options.best_path, model_records(model), state);
    }
    save(options.checkpoint_path, model_records(model), state);
  }
  return state;
}

TrainState train_affinity(AffinityModel& model, const std::vector<Sample>& train,
                          const std::vector<Sample>& validation, const TrainConfig& config,
                          const TrainOptions& options, TrainState state) {
  if (train.empty()) throw DataError("training set is empty");
  const ParamList backbone = model.backbone().parameters();
  const std::string backbone_hash = parameter_hash(backbone);
  for (auto p : backbone) p.tensor.zero_grad();
  std::vector<Tensor> params = tensors_of(model.head_parameters());
  std::vector<double> val_truth;
  for (const auto& s : validation) val_truth.push_back(affinity_of(s));
  CsvLog log(options.log_path, state.next_epoch > 0);
  std::size_t ran = 0;
  for (std::size_t epoch = state.next_epoch; epoch < config.epochs; ++epoch) {
    if (options.max_epochs_this_run && ran == *options.max_epochs_this_run) break;
    const auto order = epoch_permutation(train.size(), config.seed, epoch);
    double sum_loss = 0.0, sum_mse = 0.0, sum_nce = 0.0, sum_unif = 0.0;
    std::size_t batches = 0, latent_batches = 0;
    std::vector<double> preds, truths;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      zero_grads(params);
      Tape tape;
      std::vector<Tensor> rows, outs;
      std::vector<double> ys;
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train[order[i]];
        const AffinityOutput out = model.forward(s.input);
        rows.push_back(reshape(out.head.features.h, {1, out.head.features.h.numel()}));
        outs.push_back(reshape(out.head.prediction, {1}));
        ys.push_back(affinity_of(s));
        preds.push_back(out.head.prediction.item());
        truths.push_back(ys.back());
      }
      const Tensor pred = concat(outs, 0);
      const Tensor mse_term = mse(pred, Tensor({ys.size()}, ys));
      Tensor nce = Tensor::scalar(0.0), unif = Tensor::scalar(0.0);
      if (ys.size() >= 2) {
        const Tensor h = concat(rows, 0);
        nce = info_nce(h, ys, config.latent.tau);
        unif = uniformity(l2_normalize(h, 1));
        sum_nce += nce.item();
        sum_unif += unif.item();
        ++latent_batches;
      }
      const Tensor loss = total_affinity_loss(mse_term, nce, unif, config.latent);
      sum_loss += loss.item();
      sum_mse += mse_term.item();
      ++batches;
      backward(loss);
      check_frozen(backbone);
      adam_step(params, state.adam, config.adam);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = sum_loss / static_cast<double>(batches);
    entry.train_mse = sum_mse / static_cast<double>(batches);
    if (latent_batches > 0) {
      entry.train_infonce = sum_nce / static_cast<double>(latent_batches);
      entry.train_uniformity = sum_unif / static_cast<double>(latent_batches);
    }
    entry.train_rmse = rmse_of(preds, truths);
    if (!validation.empty()) {
      entry.val_rmse = rmse_of(predict_affinities(model, validation), val_truth);
      entry.val_loss = entry.val_rmse * entry.val_rmse;
    }
    log.row(epoch, "train", entry.train_loss, entry.train_mse, entry.train_infonce,
            entry.train_uniformity, entry.train_rmse);
    if (!validation.empty()) {
      log.row(epoch, "val", entry.val_loss, entry.val_loss, kNoValue, kNoValue, entry.val_rmse);
    }
    state.history.push_back(entry);
    state.next_epoch = epoch + 1;
    ++ran;
    const double score = validation.empty() ? entry.train_rmse : entry.val_rmse;
    if (score < state.best_score) {
      state.best_score = score;
      state.best_epoch = epoch;
      save(options.best_path, affinity_records(model), state);
    }
    save(options.checkpoint_path, affinity_records(model), state);
  }
  if (parameter_hash(model.backbone().parameters()) != backbone_hash) {
    throw FrozenViolation("backbone parameters changed during affinity training");
  }
  return state;
}

std::vector<CheckpointRecord> state_records(const TrainState& state) {
  nlohmann::ordered_json meta;
  meta["next_epoch"] = state.next_epoch;
  meta["adam_step"] = state.adam.step;
  meta["best_epoch"] = state.best_epoch;
  meta["history"] = nlohmann::ordered_json::array();
  for (const auto& h : state.history) {
    meta["history"].push_back({{"epoch", h.epoch},
                               {"train_loss", num(h.train_loss)},
                               {"train_mse", num(h.train_mse)},
                               {"train_infonce", num(h.train_infonce)},
                               {"train_uniformity", num(h.train_uniformity)},
                               {"train_rmse", num(h.train_rmse)},
                               {"val_loss", num(h.val_loss)},
                               {"val_rmse", num(h.val_rmse)}});
  }
  std::vector<CheckpointRecord> out;
  out.push_back(text_record("state.meta", meta.dump()));
  out.push_back(tensor_record("state.best_score", Tensor::scalar(state.best_score)));
  for (std::size_t i = 0; i < state.adam.first_moment.size(); ++i) {
    const auto& m = state.adam.first_moment[i];
    const auto& v = state.adam.second_moment[i];
    out.push_back(tensor_record("state.m." + std::to_string(i), Tensor({m.size()}, m)));
    out.push_back(tensor_record("state.v." + std::to_string(i), Tensor({v.size()}, v)));
  }
  return out;
}

TrainState load_train_state(const std::vector<CheckpointRecord>& records) {
  const auto* meta_rec = find_record(records, "state.meta");
  if (!meta_rec) throw FormatError("checkpoint carries no training state");
  const auto meta = nlohmann::json::parse(meta_rec->bytes);
  TrainState st;
  st.next_epoch = meta.at("next_epoch").get<std::size_t>();
  st.adam.step = meta.at("adam_step").get<std::int64_t>();
  st.best_epoch = meta.at("best_epoch").get<std::size_t>();
  for (const auto& h : meta.at("history")) {
    EpochLog e;
    e.epoch = h.at("epoch").get<std::size_t>();
    e.train_loss = finite_or_nan(h.at("train_loss"));
    e.train_mse = finite_or_nan(h.at("train_mse"));
    e.train_infonce = finite_or_nan(h.at("train_infonce"));
    e.train_uniformity = finite_or_nan(h.at("train_uniformity"));
    e.train_rmse = finite_or_nan(h.at("train_rmse"));
    e.val_loss = finite_or_nan(h.at("val_loss"));
    e.val_rmse = finite_or_nan(h.at("val_rmse"));
    st.history.push_back(e);
  }
  if (const auto* best = find_record(records, "state.best_score")) st.best_score = best->values.at(0);
  for (std::size_t i = 0;; ++i) {
    const auto* m = find_record(records, "state.m." + std::to_string(i));
    const auto* v = find_record(records, "state.v." + std::to_string(i));
    if (!m || !v) break;
    st.adam.first_moment.push_back(m->values);
    st.adam.second_moment.push_back(v->values);
  }
  return st;
}

std::vector<CheckpointRecord> affinity_records(const AffinityModel& model) {
  auto out = model_records(model.backbone());
  for (const auto& p : model.head_parameters()) out.push_back(tensor_record(p.name, p.tensor));
  return out;
}

AffinityModel load_affinity_model(const std::vector<CheckpointRecord>& records) {
  AffinityModel model(load_model(records), 0);
  load_parameters(records, model.head_parameters());
  return model;
}

}  // namespace linker
