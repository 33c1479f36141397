// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ctft/data/dataset.h"
#include "ctft/eval/metrics.h"
#include "ctft/model/ctftnet.h"
#include "ctft/objectives/losses.h"
#include "ctft/train/checkpoint.h"
#include "ctft/train/optim.h"

namespace ctft {

struct TrainConfig {
  int batch = 8;
  int epochs = 100;
  double clip_norm = 10.0;
  int accumulation = 2;
  uint64_t seed = 0;
  // Periodic checkpoint every this many epochs; 0 disables it.
  int checkpoint_every = 1;
  // Validation every this many epochs; 0 disables it.
  int eval_every = 1;
  // Stop after this many optimizer steps in total; 0 runs all epochs.
  int64_t max_steps = 0;
  // Clips per epoch checked against the band-limit invariant.
  int spot_check = 2;
  AdamConfig adam;
  SchedulerConfig scheduler;
  LossConfig loss;

  void validate() const;
};

// Raised on a non-finite loss or gradient. The message names the last
// checkpoint written before the failure.
class TrainingHalted : public NumericError {
 public:
  TrainingHalted(const std::string& what, std::filesystem::path last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const std::filesystem::path& last_good() const { return last_good_; }

 private:
  std::filesystem::path last_good_;
};

// What the loop optimizes: a module and a differentiable per-batch loss.
template <typename Real>
class Objective {
 public:
  virtual ~Objective() = default;
  virtual const Module<Real>& module() const = 0;
  virtual LossValue<Real> loss(const Batch& batch, const Context& ctx) = 0;
};

// Batch rows stacked into [B, L] tensors.
template <typename Real>
ComplexTensor<Real> stack_inputs(const Batch& batch);
template <typename Real>
ComplexTensor<Real> stack_targets(const Batch& batch);

// Differentiable waveform-to-waveform pass: [B, L] at the model rate with
// L = clip samples.
template <typename Real>
ComplexTensor<Real> predict_waveforms(CtftNet<Real>& net, const ComplexTensor<Real>& lr, const Context& ctx);

template <typename Real>
class NetObjective : public Objective<Real> {
 public:
  NetObjective(CtftNet<Real>& net, LossConfig loss) : net_(net), loss_(std::move(loss)) {}
  const Module<Real>& module() const override { return net_; }
  LossValue<Real> loss(const Batch& batch, const Context& ctx) override;

 private:
  CtftNet<Real>& net_;
  LossConfig loss_;
};

struct StepRecord {
  int64_t step = 0;
  int64_t epoch = 0;
  double lr = 0.0;
  double grad_norm = 0.0;
  LossReport loss;
};

struct TrainResult {
  std::vector<StepRecord> steps;
  std::filesystem::path last_checkpoint;
  std::optional<std::filesystem::path> best_checkpoint;
  TrainProgress progress;
};

struct TrainIo {
  // Checkpoints and train_log.jsonl go here; empty disables all file output.
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> resume;
  Digest config_digest{};
  // Validation: returns the mean LSD of the current model.
  std::function<double()> validate;
};

int64_t steps_per_epoch(const BatchIterator& data, const TrainConfig& cfg);

template <typename Real>
TrainResult train(Objective<Real>& objective, const BatchIterator& data, const TrainConfig& cfg,
                  const TrainIo& io = {});

struct SplitReport {
  MetricReport unprocessed;
  MetricReport enhanced;

  // Per clip and mean: clip_id then lsd/stoi/si_sdr for each column group.
  void write_csv(std::ostream& os) const;
};

// Runs `enhancer` on every pair's low-rate input and scores both it and the
// input against the reference. Throws DomainError for an empty split.
SplitReport evaluate_split(const std::function<Waveform(const Waveform&)>& enhancer, const BatchIterator& data);

template <typename Real>
SplitReport evaluate_split(CtftNet<Real>& net, const BatchIterator& data, const EnhanceOptions& opts = {});

// Mean LSD of the enhanced outputs only.
template <typename Real>
double validation_lsd(CtftNet<Real>& net, const BatchIterator& data, const EnhanceOptions& opts = {});

}  // namespace ctft
