// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/app/cli.h"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "ctft/app/gradcheck_suite.h"
#include "ctft/app/run_config.h"
#include "ctft/data/dataset.h"
#include "ctft/data/manifest.h"
#include "ctft/data/pairs.h"
#include "ctft/data/wav.h"
#include "ctft/dsp/resample.h"
#include "ctft/eval/metrics.h"
#include "ctft/model/ctftnet.h"
#include "ctft/train/checkpoint.h"
#include "ctft/train/trainer.h"

namespace ctft {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

template <typename Real>
std::string parameter_census(const Module<Real>& net) {
  std::vector<std::pair<std::string, int64_t>> groups;
  int64_t total = 0;
  for (const auto& p : net.parameters()) {
    std::string key = p.name.substr(0, p.name.find('.'));
    if (key.rfind("cgab", 0) == 0 || key.rfind("ftb", 0) == 0) {
      const auto dot = p.name.find('.', key.size() + 1);
      key = p.name.substr(0, dot);
    }
    const int64_t n = p.tensor.numel() * (p.tensor.is_real() ? 1 : 2);
    if (groups.empty() || groups.back().first != key) groups.emplace_back(key, 0);
    groups.back().second += n;
    total += n;
  }
  std::ostringstream os;
  for (const auto& [k, n] : groups) os << k << " " << n << "\n";
  os << "total " << total << "\n";
  return os.str();
}

template std::string parameter_census(const Module<float>&);
template std::string parameter_census(const Module<double>&);

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(p.string() + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string file_digest(const fs::path& p) { return to_hex(sha256(read_bytes(p))); }

// Relative-path stem -> file, sorted.
std::map<std::string, fs::path> list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + ": not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".wav") continue;
    fs::path rel = fs::relative(e.path(), dir);
    rel.replace_extension();
    out.emplace(rel.generic_string(), e.path());
  }
  return out;
}

RunConfig resolve_config(const std::string& path, const std::vector<std::string>& sets) {
  if (path.empty()) return RunConfig::parse("", sets);
  return RunConfig::load(path, sets);
}

template <typename N>
struct RealOf;
template <typename R>
struct RealOf<CtftNet<R>> {
  using type = R;
};

template <typename F>
auto with_net(const RunConfig& cfg, F&& f) {
  if (cfg.precision == Precision::kF32) {
    CtftNet<float> net(cfg.model);
    return f(net);
  }
  CtftNet<double> net(cfg.model);
  return f(net);
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "TOML run config; built-in defaults when empty");
  cmd->add_option("--set", c.sets, "override a config key, e.g. --set model.attention=\"ftb_only\"");
}

// ---- degrade

struct DegradeArgs {
  std::string in, out;
  int lr_rate = 0;
  int target_rate = 0;
  Common common;
};

int cmd_degrade(const DegradeArgs& a, std::ostream& out) {
  RunConfig cfg = resolve_config(a.common.config, a.common.sets);
  PipelineParams params = cfg.pipeline();
  if (a.target_rate > 0) params.hr_rate = a.target_rate;
  if (a.lr_rate <= 0 || a.lr_rate > params.hr_rate || params.hr_rate % a.lr_rate != 0)
    throw DomainError("unsupported rate chain " + std::to_string(a.lr_rate) + " -> " +
                      std::to_string(params.hr_rate) + " Hz (the target rate must be an integer multiple)");
  const std::string pipeline = to_hex(params.digest());
  const auto sources = list_wavs(a.in);
  if (sources.empty()) throw IoError(a.in + ": no .wav files");

  const fs::path root(a.out), index_path = root / "pairs.jsonl";
  std::map<std::string, json> index;
  if (fs::exists(index_path)) {
    std::ifstream in(index_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        json j = json::parse(line);
        index[j.at("id").get<std::string>()] = j;
      } catch (const json::exception&) {
        throw IoError(index_path.string() + ": malformed index line");
      }
    }
  }

  int written = 0, unchanged = 0;
  std::map<std::string, json> next;
  for (const auto& [id, src] : sources) {
    const std::string src_digest = file_digest(src);
    const fs::path hr_path = root / "hr" / (id + ".wav"), lr_path = root / "lr" / (id + ".wav");
    auto it = index.find(id);
    if (it != index.end()) {
      const json& j = it->second;
      if (j.value("source_sha256", "") == src_digest && j.value("pipeline", "") == pipeline &&
          j.value("lr_rate", 0) == a.lr_rate && fs::exists(hr_path) && fs::exists(lr_path) &&
          j.value("hr_sha256", "") == file_digest(hr_path) && j.value("lr_sha256", "") == file_digest(lr_path)) {
        next[id] = j;
        ++unchanged;
        continue;
      }
    }
    Waveform hr = read_wav(src);
    if (hr.rate() != params.hr_rate) hr = resample(hr, params.hr_rate, params.sinc);
    const PairedExample ex = make_lr_hr_pair(hr, a.lr_rate, params);
    fs::create_directories(hr_path.parent_path());
    fs::create_directories(lr_path.parent_path());
    write_wav(hr_path, ex.hr);
    write_wav(lr_path, ex.lr_upsampled);
    json j;
    j["id"] = id;
    j["source"] = src.generic_string();
    j["source_sha256"] = src_digest;
    j["pipeline"] = pipeline;
    j["lr_rate"] = a.lr_rate;
    j["hr_rate"] = params.hr_rate;
    j["hr"] = fs::relative(hr_path, root).generic_string();
    j["lr"] = fs::relative(lr_path, root).generic_string();
    j["hr_sha256"] = file_digest(hr_path);
    j["lr_sha256"] = file_digest(lr_path);
    next[id] = j;
    ++written;
  }
  std::ostringstream text;
  for (const auto& [id, j] : next) text << j.dump() << "\n";
  if (!fs::exists(index_path) || read_bytes(index_path) != text.str()) {
    fs::create_directories(root);
    const fs::path tmp = index_path.string() + ".tmp";
    {
      std::ofstream o(tmp, std::ios::binary);
      o << text.str();
      if (!o) throw IoError(tmp.string() + ": write failed");
    }
    fs::rename(tmp, index_path);
  }
  out << "degrade: " << written << " written, " << unchanged << " unchanged (" << a.lr_rate << " -> "
      << params.hr_rate << " Hz)\n";
  return kExitOk;
}

// ---- train

struct TrainArgs {
  std::string data, resume, out = "runs/ctftnet", cache_dir;
  bool dry_run = false;
  Common common;
};

Manifest load_manifest(const std::string& path) {
  if (fs::is_directory(path)) return build_manifest(path);
  return Manifest::load(path);
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(a.common.config, a.common.sets);
  return with_net(cfg, [&](auto& net) -> int {
    using Real = typename RealOf<std::remove_reference_t<decltype(net)>>::type;
    out << "config digest " << to_hex(cfg.digest()) << "\n";
    out << "parameters (" << to_string(cfg.precision) << ")\n" << parameter_census(net);
    if (a.dry_run) return kExitOk;
    if (a.data.empty()) throw ConfigError("train needs --data (a manifest file or a corpus directory)");
    const Manifest manifest = load_manifest(a.data);
    BatchOptions bo;
    bo.lr_rate = cfg.lr_rate;
    bo.batch_size = cfg.train.batch;
    bo.seed = cfg.train.seed;
    bo.pipeline = cfg.pipeline();
    if (!a.cache_dir.empty()) bo.cache_dir = fs::path(a.cache_dir);
    const auto train_clips = manifest.split(Split::kTrain);
    if (train_clips.empty()) throw DomainError(a.data + ": no training clips");
    BatchIterator data(train_clips, bo);

    std::optional<BatchIterator> val;
    const auto val_clips = manifest.split(Split::kVal);
    if (!val_clips.empty()) {
      BatchOptions vo = bo;
      vo.mode = IterMode::kEval;
      val.emplace(val_clips, vo);
    }
    TrainIo io;
    io.out_dir = a.out;
    if (!a.resume.empty()) io.resume = fs::path(a.resume);
    io.config_digest = cfg.digest();
    if (val) io.validate = [&] { return validation_lsd(net, *val, cfg.enhance_options()); };
    if (io.resume) {
      const Digest d = Checkpoint::load(*io.resume).config_digest;
      if (d != io.config_digest)
        throw ConfigError(a.resume + ": config digest " + to_hex(d) + " conflicts with the run config (" +
                          to_hex(io.config_digest) + ")");
    }
    fs::create_directories(io.out_dir);
    {
      std::ofstream o(io.out_dir / "config.toml", std::ios::binary);
      o << cfg.to_toml();
    }
    net.recompute_encoders = cfg.recompute_encoders;
    NetObjective<Real> objective(net, cfg.train.loss);
    try {
      const TrainResult r = train(objective, data, cfg.train, io);
      out << "trained to step " << r.progress.step;
      if (!r.steps.empty()) out << "; last loss " << r.steps.back().loss.total;
      out << "\ncheckpoint " << r.last_checkpoint.generic_string() << "\n";
      if (r.best_checkpoint) out << "best " << r.best_checkpoint->generic_string() << "\n";
    } catch (const TrainingHalted& e) {
      err << "training halted: " << e.what() << "\n";
      err << "last good checkpoint: " << (e.last_good().empty() ? "none" : e.last_good().generic_string()) << "\n";
      return kExitNumeric;
    }
    return kExitOk;
  });
}

// ---- enhance

// The explicit config, else config.toml beside the checkpoint, else defaults.
RunConfig config_for_checkpoint(const Common& c, const fs::path& ckpt) {
  if (c.config.empty()) {
    const fs::path beside = ckpt.parent_path() / "config.toml";
    if (fs::exists(beside)) return RunConfig::load(beside, c.sets);
  }
  return resolve_config(c.config, c.sets);
}

template <typename Real>
void load_checked(CtftNet<Real>& net, const RunConfig& cfg, const fs::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.config_digest != cfg.digest())
    throw ConfigError(path.string() + ": config digest " + to_hex(ck.config_digest) +
                      " does not match the run config (" + to_hex(cfg.digest()) + ")");
  restore_parameters(net, ck);
}

struct EnhanceArgs {
  std::string ckpt, in, out;
  Common common;
};

int cmd_enhance(const EnhanceArgs& a, std::ostream& out) {
  const RunConfig cfg = config_for_checkpoint(a.common, a.ckpt);
  const WavRead input = read_wav_full(a.in);
  if (input.wave.rate() != cfg.model.sample_rate)
    throw DomainError(a.in + ": rate " + std::to_string(input.wave.rate()) + " Hz, the model expects " +
                      std::to_string(cfg.model.sample_rate) + " Hz (upsample with `ctftnet degrade` first)");
  return with_net(cfg, [&](auto& net) -> int {
    load_checked(net, cfg, a.ckpt);
    const Waveform y = enhance(net, input.wave, cfg.enhance_options());
    for (double v : y.samples())
      if (!std::isfinite(v)) throw NumericError("enhanced output is not finite");
    write_wav(a.out, y);
    if (!input.warning.empty()) out << "warning: " << input.warning << "\n";
    out << "enhance: " << y.size() << " samples at " << y.rate() << " Hz -> " << a.out << "\n";
    return kExitOk;
  });
}

// ---- evaluate

struct EvaluateArgs {
  std::string ref, est, ckpt, manifest, split = "test", out;
  Common common;
};

void emit(const std::string& path, const std::function<void(std::ostream&)>& write, std::ostream& out) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream o(path, std::ios::binary);
  if (!o) throw IoError(path + ": cannot write");
  write(o);
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (!a.ref.empty() || !a.est.empty()) {
    if (a.ref.empty() || a.est.empty() || !a.ckpt.empty())
      throw ConfigError("evaluate takes either --ref and --est, or --ckpt and --manifest");
    const auto refs = list_wavs(a.ref), ests = list_wavs(a.est);
    std::vector<std::string> missing;
    for (const auto& [id, _] : refs)
      if (!ests.count(id)) missing.push_back("missing estimate " + id);
    for (const auto& [id, _] : ests)
      if (!refs.count(id)) missing.push_back("no reference for " + id);
    if (!missing.empty()) {
      std::string msg = "clip ids differ:";
      for (size_t i = 0; i < missing.size() && i < 5; ++i) msg += " " + missing[i] + ";";
      throw DomainError(msg);
    }
    if (refs.empty()) throw DomainError(a.ref + ": no clips");
    MetricReport report;
    for (const auto& [id, path] : refs) report.add(id, read_wav(path), read_wav(ests.at(id)));
    emit(a.out, [&](std::ostream& os) { report.write_csv(os); }, out);
    return kExitOk;
  }
  if (a.ckpt.empty() || a.manifest.empty())
    throw ConfigError("evaluate takes either --ref and --est, or --ckpt and --manifest");
  const RunConfig cfg = config_for_checkpoint(a.common, a.ckpt);
  const Manifest manifest = load_manifest(a.manifest);
  const auto clips = manifest.split(parse_split(a.split));
  if (clips.empty()) throw DomainError(a.manifest + ": split " + a.split + " is empty");
  BatchOptions bo;
  bo.lr_rate = cfg.lr_rate;
  bo.batch_size = 1;
  bo.mode = IterMode::kEval;
  bo.pipeline = cfg.pipeline();
  const BatchIterator data(clips, bo);
  return with_net(cfg, [&](auto& net) -> int {
    load_checked(net, cfg, a.ckpt);
    const SplitReport r = evaluate_split(net, data, cfg.enhance_options());
    emit(a.out, [&](std::ostream& os) { r.write_csv(os); }, out);
    return kExitOk;
  });
}

// ---- gradcheck

int cmd_gradcheck(const Common& c, std::ostream& out) {
  const RunConfig cfg = resolve_config(c.config, c.sets);
  const GradcheckReport r = run_gradcheck_suite(cfg);
  r.print(out);
  return r.all_passed() ? kExitOk : kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ctftnet: complex-domain speech super-resolution toolkit", "ctftnet"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 2 usage or config, 3 numeric halt or failed check, 4 I/O.\n\nDefault config:\n\n" +
             RunConfig{}.to_toml());

  DegradeArgs dg;
  auto* degrade = app.add_subcommand("degrade", "simulate low-resolution input for every WAV under --in");
  degrade->add_option("--in", dg.in, "directory of source WAVs")->required();
  degrade->add_option("--out", dg.out, "output directory (hr/, lr/, pairs.jsonl)")->required();
  degrade->add_option("--lr-rate", dg.lr_rate, "simulated low sample rate in Hz")->required();
  degrade->add_option("--target-rate", dg.target_rate, "output rate in Hz; 0 uses model.sample_rate");
  add_common(degrade, dg.common);

  TrainArgs tr;
  auto* trn = app.add_subcommand("train", "train a model on the train split of a manifest");
  trn->add_option("--data", tr.data, "manifest (.jsonl) or corpus directory of <speaker>/<clip>.wav");
  trn->add_option("--resume", tr.resume, "checkpoint to continue from");
  trn->add_option("--out", tr.out, "run directory for checkpoints and train_log.jsonl");
  trn->add_option("--cache-dir", tr.cache_dir, "pair cache directory; empty synthesizes on the fly");
  trn->add_flag("--dry-run", tr.dry_run, "print the config digest and parameter census, then stop");
  add_common(trn, tr.common);

  EnhanceArgs en;
  auto* enh = app.add_subcommand("enhance", "enhance one WAV at the model rate");
  enh->add_option("--ckpt", en.ckpt, "checkpoint")->required();
  enh->add_option("--in", en.in, "input WAV, already at the model rate")->required();
  enh->add_option("--out", en.out, "output WAV (float32)")->required();
  add_common(enh, en.common);

  EvaluateArgs ev;
  auto* evl = app.add_subcommand("evaluate", "lsd, stoi and si_sdr per clip and on average, as CSV");
  evl->add_option("--ref", ev.ref, "directory of reference WAVs");
  evl->add_option("--est", ev.est, "directory of estimate WAVs with matching relative paths");
  evl->add_option("--ckpt", ev.ckpt, "checkpoint; reports unprocessed and enhanced columns");
  evl->add_option("--manifest", ev.manifest, "manifest or corpus directory used with --ckpt");
  evl->add_option("--split", ev.split, "manifest split: train, val or test");
  evl->add_option("--out", ev.out, "CSV path; empty writes to stdout");
  add_common(evl, ev.common);

  Common gc;
  auto* grad = app.add_subcommand("gradcheck", "64-bit finite-difference check of every block");
  add_common(grad, gc);

  std::vector<std::string> storage{"ctftnet"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*degrade) return cmd_degrade(dg, out);
    if (*trn) return cmd_train(tr, out, err);
    if (*enh) return cmd_enhance(en, out);
    if (*evl) return cmd_evaluate(ev, out);
    if (*grad) return cmd_gradcheck(gc, out);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace ctft
