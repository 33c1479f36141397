// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/train/trainer.h"

#include <cmath>
#include <fstream>
#include <iomanip>

#include <json.hpp>

#include "ctft/core/ops.h"

namespace ctft {

namespace {

template <typename Real>
ComplexTensor<Real> stack(const Batch& batch, bool inputs) {
  if (batch.examples.empty()) throw DimensionError("empty batch");
  const auto B = static_cast<int64_t>(batch.examples.size());
  const auto L = static_cast<int64_t>(batch.examples[0].hr.size());
  ComplexTensor<Real> t(Shape{B, L}, true);
  for (int64_t b = 0; b < B; ++b) {
    const Waveform& w = inputs ? batch.examples[b].lr_upsampled : batch.examples[b].hr;
    if (static_cast<int64_t>(w.size()) != L) throw DimensionError("batch rows differ in length");
    for (int64_t i = 0; i < L; ++i) t.mutable_real()[b * L + i] = static_cast<Real>(w[i]);
  }
  return t;
}

nlohmann::ordered_json loss_json(const LossReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  for (const auto& [k, v] : r.components) j[k] = v;
  return j;
}

class JsonLog {
 public:
  JsonLog(const std::filesystem::path& dir, bool append) {
    if (dir.empty()) return;
    out_.open(dir / "train_log.jsonl", append ? std::ios::app : std::ios::trunc);
    if (!out_) throw IoError((dir / "train_log.jsonl").string() + ": cannot open for writing");
  }
  void write(const nlohmann::ordered_json& j) {
    if (!out_.is_open()) return;
    out_ << j.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace

void TrainConfig::validate() const {
  if (batch < 1) throw ConfigError("batch must be at least 1");
  if (accumulation < 1) throw ConfigError("accumulation must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(clip_norm > 0)) throw ConfigError("clip norm must be positive");
  if (checkpoint_every < 0 || eval_every < 0 || max_steps < 0 || spot_check < 0)
    throw ConfigError("checkpoint_every, eval_every, max_steps and spot_check must be non-negative");
  if (!(scheduler.t0 > 0) || scheduler.t_mult < 1 || scheduler.eta_min < 0 || scheduler.base_lr < scheduler.eta_min)
    throw ConfigError("scheduler needs t0 > 0, t_mult >= 1 and 0 <= eta_min <= base_lr");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1 && adam.eps > 0 &&
        adam.weight_decay >= 0))
    throw ConfigError("Adam needs betas in [0, 1), eps > 0, weight_decay >= 0");
  loss.resolutions.validate();
}

template <typename Real>
ComplexTensor<Real> stack_inputs(const Batch& batch) {
  return stack<Real>(batch, true);
}

template <typename Real>
ComplexTensor<Real> stack_targets(const Batch& batch) {
  return stack<Real>(batch, false);
}

template <typename Real>
ComplexTensor<Real> predict_waveforms(CtftNet<Real>& net, const ComplexTensor<Real>& lr, const Context& ctx) {
  const ModelConfig& cfg = net.config();
  if (lr.shape().size() != 2 || lr.shape()[1] != cfg.clip_samples())
    throw DimensionError("expected [B, " + std::to_string(cfg.clip_samples()) + "] waveforms, got " +
                         to_string(lr.shape()));
  const int64_t B = lr.shape()[0], L = lr.shape()[1], F = cfg.bins(), bound = cfg.bound_frames();
  ComplexTensor<Real> x = narrow(stft(lr, cfg.stft), 1, 0, F);
  const int64_t T = x.shape()[2];
  if (T < bound) x = T >= 2 ? pad_reflect(x, 2, 0, bound - T) : pad_zero(x, 2, 0, bound - T);
  ComplexTensor<Real> y = net.forward(reshape(x, Shape{B, 1, F, bound}), ctx);
  y = narrow(reshape(y, Shape{B, F, bound}), 2, 0, T);
  return istft(pad_zero(y, 1, 0, 1), cfg.stft, L);
}

template <typename Real>
LossValue<Real> NetObjective<Real>::loss(const Batch& batch, const Context& ctx) {
  return total_loss(stack_targets<Real>(batch), predict_waveforms(net_, stack_inputs<Real>(batch), ctx), loss_);
}

int64_t steps_per_epoch(const BatchIterator& data, const TrainConfig& cfg) {
  const int64_t n = data.batches_per_epoch() / cfg.accumulation;
  if (n < 1)
    throw ConfigError(std::to_string(data.clips().size()) + " clips give " + std::to_string(data.batches_per_epoch()) +
                      " batches of " + std::to_string(data.options().batch_size) + ", fewer than accumulation " +
                      std::to_string(cfg.accumulation));
  return n;
}

template <typename Real>
TrainResult train(Objective<Real>& objective, const BatchIterator& data, const TrainConfig& cfg, const TrainIo& io) {
  namespace fs = std::filesystem;
  cfg.validate();
  if (data.options().mode != IterMode::kTrain) throw ConfigError("training needs a train-mode iterator");
  if (data.options().batch_size != cfg.batch)
    throw ConfigError("iterator batch " + std::to_string(data.options().batch_size) + " differs from config batch " +
                      std::to_string(cfg.batch));
  const int64_t spe = steps_per_epoch(data, cfg);
  const int64_t total = cfg.max_steps > 0 ? std::min<int64_t>(cfg.max_steps, cfg.epochs * spe) : cfg.epochs * spe;
  const Module<Real>& module = objective.module();
  ParameterList<Real> params = module.parameters();

  TrainResult result;
  AdamState<Real> adam;
  TrainProgress& prog = result.progress;
  if (io.resume) {
    const Checkpoint ck = Checkpoint::load(*io.resume);
    if (ck.config_digest != io.config_digest)
      throw ConfigError("config digest " + to_hex(io.config_digest) + " conflicts with checkpoint " +
                        io.resume->string() + " (" + to_hex(ck.config_digest) + ")");
    restore_parameters(module, ck);
    auto a = restore_optimizer<Real>(ck);
    auto p = restore_progress(ck);
    if (!a || !p) throw ConfigError(io.resume->string() + ": checkpoint has no optimizer state to resume from");
    adam = std::move(*a);
    prog = *p;
    result.last_checkpoint = *io.resume;
  }
  const bool files = !io.out_dir.empty();
  if (files) fs::create_directories(io.out_dir);
  JsonLog log(io.out_dir, io.resume.has_value());
  auto save = [&](const std::string& name) {
    const fs::path path = io.out_dir / name;
    make_checkpoint(module, io.config_digest, &adam, &prog).save(path);
    return path;
  };
  auto halt = [&](const std::string& why, int64_t step) {
    nlohmann::ordered_json j;
    j["event"] = "halt";
    j["step"] = step;
    j["reason"] = why;
    log.write(j);
    const std::string ref = result.last_checkpoint.empty() ? "none" : result.last_checkpoint.string();
    throw TrainingHalted("training halted at step " + std::to_string(step) + ": " + why +
                             "; last good checkpoint: " + ref,
                         result.last_checkpoint);
  };

  for (int64_t s = prog.step; s < total; ++s) {
    const int64_t epoch = s / spe, within = s % spe;
    if (within == 0 && cfg.spot_check > 0) {
      const auto bad = data.spot_check(epoch, cfg.spot_check);
      if (!bad.empty()) throw NumericError("pair " + bad[0] + " breaks the band-limit invariant");
    }
    const double lr = lr_at(cfg.scheduler, static_cast<double>(epoch));
    GradientMap<Real> grads;
    LossReport report;
    for (int j = 0; j < cfg.accumulation; ++j) {
      const Batch batch = data.batch(epoch, within * cfg.accumulation + j);
      Rng rng = Rng::derive(cfg.seed, static_cast<uint64_t>(s), static_cast<uint64_t>(j));
      const Context ctx{Mode::kTrain, &rng};
      for (auto& p : params) p.tensor.clear_grad();
      LossValue<Real> value = objective.loss(batch, ctx);
      if (!std::isfinite(value.report.total)) halt("non-finite loss", s + 1);
      const GradientMap<Real> g =
          backward(scale(value.total, std::complex<Real>(Real(1) / Real(cfg.accumulation))), params);
      for (const auto& [name, gv] : g.grads) {
        auto it = grads.grads.find(name);
        if (it == grads.grads.end()) {
          grads.grads.emplace(name, gv);
          continue;
        }
        for (size_t i = 0; i < gv.first.size(); ++i) it->second.first[i] += gv.first[i];
        for (size_t i = 0; i < gv.second.size(); ++i) it->second.second[i] += gv.second[i];
      }
      report.total += value.report.total / cfg.accumulation;
      for (const auto& [k, v] : value.report.components) report.components[k] += v / cfg.accumulation;
    }
    for (auto& p : params) p.tensor.clear_grad();
    const double norm = clip_global_norm(grads, cfg.clip_norm);
    if (!std::isfinite(norm)) halt("non-finite gradient norm", s + 1);
    try {
      adam_step(params, grads, adam, cfg.adam, lr);
    } catch (const NumericError& e) {
      halt(e.what(), s + 1);
    }
    prog.step = s + 1;
    result.steps.push_back({s + 1, epoch, lr, norm, report});
    nlohmann::ordered_json j;
    j["step"] = s + 1;
    j["epoch"] = epoch;
    j["lr"] = lr;
    j["grad_norm"] = norm;
    j["loss"] = loss_json(report);
    log.write(j);

    if ((s + 1) % spe != 0) continue;
    const int64_t done = epoch + 1;
    if (io.validate && cfg.eval_every > 0 && done % cfg.eval_every == 0) {
      const double v = io.validate();
      nlohmann::ordered_json e;
      e["event"] = "validation";
      e["epoch"] = epoch;
      e["step"] = s + 1;
      e["lsd"] = v;
      log.write(e);
      if (prog.best_step < 0 || v < prog.best_val_lsd) {
        prog.best_step = s + 1;
        prog.best_val_lsd = v;
        if (files) result.best_checkpoint = save("best.ckpt");
      }
    }
    if (files && cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0) {
      std::ostringstream name;
      name << "epoch" << std::setw(4) << std::setfill('0') << done << ".ckpt";
      result.last_checkpoint = save(name.str());
    }
  }
  if (files) result.last_checkpoint = save("last.ckpt");
  if (files && prog.best_step >= 0 && !result.best_checkpoint && fs::exists(io.out_dir / "best.ckpt"))
    result.best_checkpoint = io.out_dir / "best.ckpt";
  return result;
}

void SplitReport::write_csv(std::ostream& os) const {
  os << "clip_id,lsd_unprocessed,stoi_unprocessed,si_sdr_unprocessed,lsd_enhanced,stoi_enhanced,si_sdr_enhanced\n"
     << std::setprecision(10);
  auto row = [&](const ClipMetrics& u, const ClipMetrics& e) {
    os << u.clip_id << ',' << u.lsd << ',' << u.stoi << ',' << u.si_sdr << ',' << e.lsd << ',' << e.stoi << ','
       << e.si_sdr << '\n';
  };
  for (size_t i = 0; i < unprocessed.clips.size(); ++i) row(unprocessed.clips[i], enhanced.clips.at(i));
  if (!unprocessed.clips.empty()) row(unprocessed.aggregate(), enhanced.aggregate());
}

SplitReport evaluate_split(const std::function<Waveform(const Waveform&)>& enhancer, const BatchIterator& data) {
  SplitReport r;
  const int64_t n = data.batches_per_epoch();
  for (int64_t b = 0; b < n; ++b) {
    const Batch batch = data.batch(0, b);
    for (size_t i = 0; i < batch.examples.size(); ++i) {
      const PairedExample& ex = batch.examples[i];
      const Waveform est = enhancer(ex.lr_upsampled);
      r.unprocessed.add(batch.ids[i], ex.hr, ex.lr_upsampled);
      r.enhanced.add(batch.ids[i], ex.hr, est);
    }
  }
  if (r.unprocessed.clips.empty()) throw DomainError("evaluate_split: empty split");
  return r;
}

template <typename Real>
SplitReport evaluate_split(CtftNet<Real>& net, const BatchIterator& data, const EnhanceOptions& opts) {
  return evaluate_split([&](const Waveform& w) { return enhance(net, w, opts); }, data);
}

template <typename Real>
double validation_lsd(CtftNet<Real>& net, const BatchIterator& data, const EnhanceOptions& opts) {
  double total = 0;
  int64_t count = 0;
  for (int64_t b = 0; b < data.batches_per_epoch(); ++b) {
    const Batch batch = data.batch(0, b);
    for (const auto& ex : batch.examples) {
      total += lsd(ex.hr, enhance(net, ex.lr_upsampled, opts));
      ++count;
    }
  }
  if (count == 0) throw DomainError("validation_lsd: empty split");
  return total / count;
}

#define CTFT_TRAIN(R)                                                                                   \
  template ComplexTensor<R> stack_inputs<R>(const Batch&);                                              \
  template ComplexTensor<R> stack_targets<R>(const Batch&);                                             \
  template ComplexTensor<R> predict_waveforms(CtftNet<R>&, const ComplexTensor<R>&, const Context&);     \
  template class NetObjective<R>;                                                                       \
  template TrainResult train(Objective<R>&, const BatchIterator&, const TrainConfig&, const TrainIo&);  \
  template SplitReport evaluate_split(CtftNet<R>&, const BatchIterator&, const EnhanceOptions&);         \
  template double validation_lsd(CtftNet<R>&, const BatchIterator&, const EnhanceOptions&);
CTFT_TRAIN(float)
CTFT_TRAIN(double)

}  // namespace ctft
