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

#ifndef LINKER_TRAINING_HPP_
#define LINKER_TRAINING_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "linker/checkpoint.hpp"
#include "linker/dataset.hpp"
#include "linker/losses.hpp"
#include "linker/model.hpp"
#include "linker/nn.hpp"

namespace linker {

// A frozen parameter received a gradient or changed value.
class FrozenViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Stage { kInteraction, kAffinity };

struct TrainConfig {
  Stage stage = Stage::kInteraction;
  std::size_t epochs = 30;
  std::size_t batch_size = 2;
  std::uint64_t seed = 0;
  AdamConfig adam;
  FocalConfig focal;
  LatentConfig latent;
  ModelConfig model;

  static TrainConfig defaults(Stage stage);
  // Sections [train], [focal], [latent], [model]; missing keys keep defaults.
  static TrainConfig from_tree(const boost::property_tree::ptree& tree, Stage stage);
};

TrainConfig load_train_config(const std::string& path, Stage stage);

inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = kNoValue;
  double train_mse = kNoValue;
  double train_infonce = kNoValue;
  double train_uniformity = kNoValue;
  double train_rmse = kNoValue;
  double val_loss = kNoValue;
  double val_rmse = kNoValue;
};

struct TrainState {
  std::size_t next_epoch = 0;
  AdamState adam;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::vector<EpochLog> history;
};

struct TrainOptions {
  std::string checkpoint_path;  // rewritten after every epoch, with state
  std::string best_path;        // best validation score so far
  std::string log_path;         // CSV: epoch,split,loss,mse,infonce,uniformity,rmse
  std::optional<std::size_t> max_epochs_this_run;
};

// Batch composition of an epoch is a pure function of (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch);

double interaction_loss(const InteractionModel& model, const std::vector<Sample>& samples,
                        const FocalConfig& focal);
std::vector<double> predict_affinities(const AffinityModel& model,
                                       const std::vector<Sample>& samples);

TrainState train_interaction(InteractionModel& model, const std::vector<Sample>& train,
                             const std::vector<Sample>& validation, const TrainConfig& config,
                             const TrainOptions& options, TrainState state = {});

TrainState train_affinity(AffinityModel& model, const std::vector<Sample>& train,
                          const std::vector<Sample>& validation, const TrainConfig& config,
                          const TrainOptions& options, TrainState state = {});

std::vector<CheckpointRecord> state_records(const TrainState& state);
TrainState load_train_state(const std::vector<CheckpointRecord>& records);

std::vector<CheckpointRecord> affinity_records(const AffinityModel& model);
AffinityModel load_affinity_model(const std::vector<CheckpointRecord>& records);

}  // namespace linker

#endif  // LINKER_TRAINING_HPP_
