// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/app/run_config.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace ctft {

namespace {

std::string num(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

template <typename T, size_t N>
std::string int_array(const std::array<T, N>& a) {
  std::string s = "[";
  for (size_t i = 0; i < N; ++i) s += (i ? ", " : "") + std::to_string(a[i]);
  return s + "]";
}

std::string pair(const Pair& p) { return "[" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + "]"; }

SpectralLoss parse_spectral(const std::string& s) {
  for (auto v : {SpectralLoss::kMrStftReal, SpectralLoss::kMrStftComplex, SpectralLoss::kSrStft})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown value '" + s + "' (expected one of: mr_stft_real, mr_stft_complex, sr_stft)");
}

Precision parse_precision(const std::string& s) {
  if (s == "f32") return Precision::kF32;
  if (s == "f64") return Precision::kF64;
  throw ConfigError("unknown precision '" + s + "' (expected f32 or f64)");
}

// Walks one table, recording which keys were read.
class Section {
 public:
  Section(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() || !t_) return;
    for (const auto& [k, _] : *t_)
      if (!used_.count(std::string(k.str())))
        throw ConfigError("unknown config key '" + path_ + std::string(k.str()) + "'");
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (n && !n->is_table()) throw ConfigError("config key '" + path_ + key + "' must be a table");
    return Section(n ? n->as_table() : nullptr, path_ + key + ".");
  }

  void get(const std::string& key, int64_t& out) { read(key, out); }
  void get(const std::string& key, int& out) {
    int64_t v = out;
    read(key, v);
    out = static_cast<int>(v);
  }
  void get(const std::string& key, uint64_t& out) {
    int64_t v = static_cast<int64_t>(out);
    read(key, v);
    if (v < 0) throw ConfigError("config key '" + path_ + key + "' must be non-negative");
    out = static_cast<uint64_t>(v);
  }
  void get(const std::string& key, double& out) {
    const toml::node* n = take(key);
    if (!n) return;
    if (auto d = n->value_exact<double>()) out = *d;
    else if (auto i = n->value_exact<int64_t>()) out = static_cast<double>(*i);
    else throw type_error(key, "a number");
  }
  void get(const std::string& key, bool& out) { read(key, out); }
  void get(const std::string& key, std::string& out) { read(key, out); }
  template <typename Enum, typename Parse>
  void get_enum(const std::string& key, Enum& out, Parse parse) {
    std::string s;
    if (!take(key)) return;
    read(key, s);
    out = parse(s);
  }
  void get(const std::string& key, Pair& out) {
    const auto v = ints(key, 2);
    if (!v.empty()) out = {v[0], v[1]};
  }
  template <size_t N>
  void get(const std::string& key, std::array<int64_t, N>& out) {
    const auto v = ints(key, N);
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  }
  // Array of fixed-length integer arrays.
  std::vector<std::vector<int64_t>> nested(const std::string& key, size_t inner) {
    const toml::node* n = take(key);
    if (!n) return {};
    const toml::array* a = n->as_array();
    if (!a) throw type_error(key, "an array of arrays");
    std::vector<std::vector<int64_t>> out;
    for (const auto& e : *a) {
      const toml::array* row = e.as_array();
      if (!row || row->size() != inner) throw type_error(key, "arrays of " + std::to_string(inner) + " integers");
      std::vector<int64_t> r;
      for (const auto& x : *row) {
        auto i = x.value_exact<int64_t>();
        if (!i) throw type_error(key, "integers");
        r.push_back(*i);
      }
      out.push_back(r);
    }
    return out;
  }

 private:
  const toml::node* take(const std::string& key) {
    used_.insert(key);
    return t_ ? t_->get(key) : nullptr;
  }
  template <typename T>
  void read(const std::string& key, T& out) {
    const toml::node* n = take(key);
    if (!n) return;
    auto v = n->value_exact<T>();
    if (!v) throw type_error(key, std::is_same_v<T, bool> ? "a boolean" : std::is_same_v<T, std::string> ? "a string" : "an integer");
    out = *v;
  }
  std::vector<int64_t> ints(const std::string& key, size_t n) {
    const toml::node* node = take(key);
    if (!node) return {};
    const toml::array* a = node->as_array();
    if (!a || a->size() != n) throw type_error(key, "an array of " + std::to_string(n) + " integers");
    std::vector<int64_t> out;
    for (const auto& x : *a) {
      auto i = x.value_exact<int64_t>();
      if (!i) throw type_error(key, "an array of integers");
      out.push_back(*i);
    }
    return out;
  }
  ConfigError type_error(const std::string& key, const std::string& what) const {
    return ConfigError("config key '" + path_ + key + "' must be " + what);
  }

  const toml::table* t_;
  std::string path_;
  std::set<std::string> used_;
};

void merge(toml::table& into, const toml::table& from) {
  for (const auto& [k, v] : from) {
    toml::node* existing = into.get(k);
    if (existing && existing->is_table() && v.is_table()) {
      merge(*existing->as_table(), *v.as_table());
    } else {
      into.insert_or_assign(k, v);
    }
  }
}

toml::table parse_toml(const std::string& text, const std::string& what) {
  try {
    return toml::parse(text, what);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << what << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
}

}  // namespace

std::string to_string(Precision p) { return p == Precision::kF32 ? "f32" : "f64"; }

PipelineParams RunConfig::pipeline() const {
  PipelineParams p;
  p.hr_rate = model.sample_rate;
  p.clip_seconds = model.clip_seconds;
  p.filter_order = filter_order;
  p.cutoff_ratio = cutoff_ratio;
  p.sinc = sinc;
  return p;
}

EnhanceOptions RunConfig::enhance_options() const {
  EnhanceOptions o;
  o.post_process = post_process;
  o.lr_rate = lr_rate;
  return o;
}

std::string RunConfig::canonical() const {
  const ModelConfig& m = model;
  const TrainConfig& t = train;
  std::ostringstream os;
  os << "[model]\n"
     << "sample_rate = " << m.sample_rate << "\n"
     << "clip_seconds = " << num(m.clip_seconds) << "\n"
     << "channels = " << int_array(m.channels) << "\n"
     << "kernel = " << pair(m.kernel) << "\n"
     << "padding = " << pair(m.padding) << "\n"
     << "strides = [";
  for (int l = 0; l < kLevels; ++l) os << (l ? ", " : "") << pair(m.strides[l]);
  os << "]\n"
     << "placement = " << quote(to_string(m.placement)) << "\n"
     << "attention = " << quote(to_string(m.attention)) << "\n"
     << "attention_kernel = " << m.attention_kernel << "\n"
     << "bottleneck = " << quote(to_string(m.bottleneck)) << "\n"
     << "activation = " << quote(to_string(m.activation)) << "\n"
     << "bn = " << quote(to_string(m.bn)) << "\n"
     << "flipped_sign = " << (m.flipped_sign ? "true" : "false") << "\n"
     << "seed = " << m.seed << "\n\n"
     << "[model.stft]\n"
     << "n_fft = " << m.stft.n_fft << "\n"
     << "hop = " << m.stft.hop << "\n"
     << "win_length = " << m.stft.win_length << "\n"
     << "window = " << quote(to_string(m.stft.window)) << "\n"
     << "center = " << (m.stft.center ? "true" : "false") << "\n\n"
     << "[model.conformer]\n"
     << "layers = " << m.conformer.layers << "\n"
     << "heads = " << m.conformer.heads << "\n"
     << "ff_expansion = " << m.conformer.ff_expansion << "\n"
     << "kernel = " << m.conformer.kernel << "\n"
     << "dropout = " << num(m.conformer.dropout) << "\n"
     << "score = " << quote(to_string(m.conformer.score)) << "\n\n"
     << "[train]\n"
     << "precision = " << quote(to_string(precision)) << "\n"
     << "batch = " << t.batch << "\n"
     << "clip_norm = " << num(t.clip_norm) << "\n"
     << "accumulation = " << t.accumulation << "\n"
     << "seed = " << t.seed << "\n\n"
     << "[train.adam]\n"
     << "beta1 = " << num(t.adam.beta1) << "\n"
     << "beta2 = " << num(t.adam.beta2) << "\n"
     << "eps = " << num(t.adam.eps) << "\n"
     << "weight_decay = " << num(t.adam.weight_decay) << "\n"
     << "decoupled_decay = " << (t.adam.decoupled_decay ? "true" : "false") << "\n\n"
     << "[train.scheduler]\n"
     << "base_lr = " << num(t.scheduler.base_lr) << "\n"
     << "t0 = " << num(t.scheduler.t0) << "\n"
     << "t_mult = " << num(t.scheduler.t_mult) << "\n"
     << "eta_min = " << num(t.scheduler.eta_min) << "\n\n"
     << "[loss]\n"
     << "spectral = " << quote(to_string(t.loss.spectral)) << "\n"
     << "resolutions = [";
  for (size_t i = 0; i < t.loss.resolutions.configs.size(); ++i) {
    const auto& r = t.loss.resolutions.configs[i];
    os << (i ? ", " : "") << "[" << r.n_fft << ", " << r.hop << ", " << r.win_length << "]";
  }
  os << "]\n"
     << "use_si_sdr = " << (t.loss.use_si_sdr ? "true" : "false") << "\n"
     << "si_sdr_weight = " << num(t.loss.si_sdr_weight) << "\n\n"
     << "[data]\n"
     << "lr_rate = " << lr_rate << "\n"
     << "filter_order = " << filter_order << "\n"
     << "cutoff_ratio = " << num(cutoff_ratio) << "\n"
     << "sinc_beta = " << num(sinc.beta) << "\n"
     << "sinc_zero_crossings = " << sinc.zero_crossings << "\n"
     << "sinc_cutoff = " << num(sinc.cutoff) << "\n\n"
     << "[eval]\n"
     << "post_process = " << (post_process ? "true" : "false") << "\n";
  return os.str();
}

std::string RunConfig::to_toml() const {
  std::ostringstream os;
  os << canonical() << "\n"
     << "[run]\n"
     << "epochs = " << train.epochs << "\n"
     << "max_steps = " << train.max_steps << "\n"
     << "checkpoint_every = " << train.checkpoint_every << "\n"
     << "eval_every = " << train.eval_every << "\n"
     << "spot_check = " << train.spot_check << "\n"
     << "recompute_encoders = " << (recompute_encoders ? "true" : "false") << "\n";
  return os.str();
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (lr_rate <= 0 || lr_rate > model.sample_rate || model.sample_rate % lr_rate != 0)
    throw ConfigError("data.lr_rate " + std::to_string(lr_rate) + " must divide model.sample_rate " +
                      std::to_string(model.sample_rate));
  if (filter_order < 1 || filter_order % 2 != 0) throw ConfigError("data.filter_order must be a positive even number");
  if (!(cutoff_ratio > 0 && cutoff_ratio < 1)) throw ConfigError("data.cutoff_ratio must be in (0, 1)");
  if (!(sinc.beta >= 0) || sinc.zero_crossings < 1 || !(sinc.cutoff > 0 && sinc.cutoff <= 1))
    throw ConfigError("data.sinc_* out of range");
}

RunConfig RunConfig::parse(const std::string& toml_text, const std::vector<std::string>& overrides) {
  toml::table doc = parse_toml(toml_text, "config");
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq), value = o.substr(eq + 1);
    toml::table t;
    try {
      t = toml::parse(key + " = " + value);
    } catch (const toml::parse_error&) {
      t = parse_toml(key + " = \"" + value + "\"", "override '" + o + "'");
    }
    merge(doc, t);
  }
  RunConfig c;
  {
    Section root(&doc, "");
    {
      Section m = root.sub("model");
      m.get("sample_rate", c.model.sample_rate);
      m.get("clip_seconds", c.model.clip_seconds);
      m.get("channels", c.model.channels);
      m.get("kernel", c.model.kernel);
      m.get("padding", c.model.padding);
      const auto strides = m.nested("strides", 2);
      if (!strides.empty()) {
        if (strides.size() != kLevels) throw ConfigError("model.strides needs " + std::to_string(kLevels) + " pairs");
        for (int l = 0; l < kLevels; ++l) c.model.strides[l] = {strides[l][0], strides[l][1]};
      }
      m.get_enum("placement", c.model.placement, parse_enum<CgabPlacement>);
      m.get_enum("attention", c.model.attention, parse_enum<AttentionVariant>);
      m.get("attention_kernel", c.model.attention_kernel);
      m.get_enum("bottleneck", c.model.bottleneck, parse_enum<BottleneckKind>);
      m.get_enum("activation", c.model.activation, parse_enum<Activation>);
      m.get_enum("bn", c.model.bn, parse_enum<BatchNormKind>);
      m.get("flipped_sign", c.model.flipped_sign);
      m.get("seed", c.model.seed);
      {
        Section s = m.sub("stft");
        s.get("n_fft", c.model.stft.n_fft);
        s.get("hop", c.model.stft.hop);
        s.get("win_length", c.model.stft.win_length);
        s.get_enum("window", c.model.stft.window, parse_enum<WindowKind>);
        s.get("center", c.model.stft.center);
      }
      {
        Section s = m.sub("conformer");
        s.get("layers", c.model.conformer.layers);
        s.get("heads", c.model.conformer.heads);
        s.get("ff_expansion", c.model.conformer.ff_expansion);
        s.get("kernel", c.model.conformer.kernel);
        s.get("dropout", c.model.conformer.dropout);
        s.get_enum("score", c.model.conformer.score, parse_enum<ScoreKind>);
      }
    }
    {
      Section t = root.sub("train");
      t.get_enum("precision", c.precision, parse_precision);
      t.get("batch", c.train.batch);
      t.get("clip_norm", c.train.clip_norm);
      t.get("accumulation", c.train.accumulation);
      t.get("seed", c.train.seed);
      {
        Section a = t.sub("adam");
        a.get("beta1", c.train.adam.beta1);
        a.get("beta2", c.train.adam.beta2);
        a.get("eps", c.train.adam.eps);
        a.get("weight_decay", c.train.adam.weight_decay);
        a.get("decoupled_decay", c.train.adam.decoupled_decay);
      }
      {
        Section s = t.sub("scheduler");
        s.get("base_lr", c.train.scheduler.base_lr);
        s.get("t0", c.train.scheduler.t0);
        s.get("t_mult", c.train.scheduler.t_mult);
        s.get("eta_min", c.train.scheduler.eta_min);
      }
    }
    {
      Section r = root.sub("run");
      r.get("epochs", c.train.epochs);
      r.get("max_steps", c.train.max_steps);
      r.get("checkpoint_every", c.train.checkpoint_every);
      r.get("eval_every", c.train.eval_every);
      r.get("spot_check", c.train.spot_check);
      r.get("recompute_encoders", c.recompute_encoders);
    }
    {
      Section l = root.sub("loss");
      l.get_enum("spectral", c.train.loss.spectral, parse_spectral);
      const auto res = l.nested("resolutions", 3);
      if (!res.empty()) {
        c.train.loss.resolutions.configs.clear();
        for (const auto& r : res)
          c.train.loss.resolutions.configs.push_back(
              {static_cast<int>(r[0]), static_cast<int>(r[1]), static_cast<int>(r[2]), WindowKind::kHann, true});
      }
      l.get("use_si_sdr", c.train.loss.use_si_sdr);
      l.get("si_sdr_weight", c.train.loss.si_sdr_weight);
    }
    {
      Section d = root.sub("data");
      d.get("lr_rate", c.lr_rate);
      d.get("filter_order", c.filter_order);
      d.get("cutoff_ratio", c.cutoff_ratio);
      d.get("sinc_beta", c.sinc.beta);
      d.get("sinc_zero_crossings", c.sinc.zero_crossings);
      d.get("sinc_cutoff", c.sinc.cutoff);
    }
    {
      Section e = root.sub("eval");
      e.get("post_process", c.post_process);
    }
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open config");
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return parse(os.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace ctft
