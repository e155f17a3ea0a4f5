// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#include "relc/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "relc/checkpoint.hpp"
#include "relc/error.hpp"

namespace relc {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int parse_int(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for " + key + ": '" + val + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const std::uint64_t x = std::stoull(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad unsigned for " + key + ": '" + val + "'");
  }
}

double parse_double(const std::string& key, const std::string& val) {
  try {
    size_t pos = 0;
    const double x = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad real for " + key + ": '" + val + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& val) {
  if (val == "true" || val == "1") return true;
  if (val == "false" || val == "0") return false;
  throw ConfigError("config: bad bool for " + key + ": '" + val + "'");
}

std::vector<int> parse_ints(const std::string& key, const std::string& val) {
  std::vector<int> out;
  std::stringstream ss(val);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

// One table drives parsing, serialization and therefore the hash.
struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define RELC_FIELD_INT(name) \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = parse_int(#name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.name); }}
#define RELC_FIELD_DBL(name) \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = parse_double(#name, v); }, \
        [](const RunConfig& c) { return fmt_double(c.name); }}
#define RELC_FIELD_BOOL(name) \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = parse_bool(#name, v); }, \
        [](const RunConfig& c) { return c.name ? std::string("true") : std::string("false"); }}
#define RELC_FIELD_STR(name) \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = v; }, \
        [](const RunConfig& c) { return c.name; }}
#define RELC_FIELD_INTS(name) \
  Field{#name, [](RunConfig& c, const std::string& v) { c.name = parse_ints(#name, v); }, \
        [](const RunConfig& c) { return fmt_ints(c.name); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      RELC_FIELD_STR(shape_family),
      RELC_FIELD_INT(n_gt_points),
      RELC_FIELD_INT(n_input),
      RELC_FIELD_DBL(keep_fraction),
      RELC_FIELD_INT(k),
      RELC_FIELD_INT(m_subset),
      RELC_FIELD_INT(dense_count),
      RELC_FIELD_INT(dense_dim),
      RELC_FIELD_INTS(stage_counts),
      RELC_FIELD_INTS(stage_dims),
      RELC_FIELD_INT(attn_heads),
      RELC_FIELD_BOOL(use_relation_weights),
      RELC_FIELD_INT(enc_blocks),
      RELC_FIELD_INT(dec_blocks),
      RELC_FIELD_INT(heads),
      RELC_FIELD_INT(ffn_mult),
      RELC_FIELD_INT(n_proxy),
      RELC_FIELD_BOOL(use_correction),
      RELC_FIELD_INT(corr_dense),
      RELC_FIELD_INT(corr_mid),
      RELC_FIELD_INT(corr_width_a),
      RELC_FIELD_INT(corr_width_b),
      RELC_FIELD_INT(corr_stage_a),
      RELC_FIELD_INT(corr_heads),
      RELC_FIELD_INT(corr_k),
      RELC_FIELD_INT(corr_m),
      RELC_FIELD_INT(upsample),
      RELC_FIELD_DBL(rho),
      RELC_FIELD_DBL(leaky_slope),
      RELC_FIELD_DBL(lambda),
      RELC_FIELD_DBL(sigma_noise),
      RELC_FIELD_INT(n_denoise),
      RELC_FIELD_INT(denoise_patch),
      RELC_FIELD_DBL(lr),
      RELC_FIELD_DBL(lr_decay_factor),
      RELC_FIELD_INT(lr_decay_every),
      RELC_FIELD_DBL(weight_decay),
      RELC_FIELD_INT(steps),
      RELC_FIELD_INT(batch),
      RELC_FIELD_INT(train_shapes),
      Field{"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      RELC_FIELD_INT(eval_shapes),
      RELC_FIELD_BOOL(include_input_in_output),
      RELC_FIELD_INT(checkpoint_every),
      RELC_FIELD_INT(log_every),
      RELC_FIELD_STR(out_dir),
  };
  return kFields;
}

#undef RELC_FIELD_INT
#undef RELC_FIELD_DBL
#undef RELC_FIELD_BOOL
#undef RELC_FIELD_STR
#undef RELC_FIELD_INTS

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key[f.key] = &f;

  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second->set(cfg, val);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += f.key + "=" + f.get(cfg) + "\n";
  return out;
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write config: " + path);
  f << serialize_config(cfg);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = serialize_config(cfg);
  const std::uint64_t h = fnv1a64(reinterpret_cast<const unsigned char*>(s.data()), s.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ModelConfig RunConfig::to_model_config() const {
  ModelConfig m;
  m.extractor.dense_count = dense_count;
  m.extractor.dense_dim = dense_dim;
  m.extractor.stage_counts = {stage_counts[0], stage_counts[1]};
  m.extractor.stage_dims = {stage_dims[0], stage_dims[1]};
  m.extractor.attn_heads = attn_heads;
  m.extractor.k = k;
  m.extractor.m_subset = m_subset;
  m.extractor.use_relation_weights = use_relation_weights;
  m.extractor.leaky_slope = leaky_slope;
  m.enc_blocks = enc_blocks;
  m.dec_blocks = dec_blocks;
  m.heads = heads;
  m.ffn_mult = ffn_mult;
  m.n_proxy = n_proxy;
  m.use_correction = use_correction;
  m.corr_dense = corr_dense;
  m.corr_mid = corr_mid;
  m.corr_widths = {corr_width_a, corr_width_b};
  m.corr_stage_a = corr_stage_a;
  m.corr_heads = corr_heads;
  m.corr_k = corr_k;
  m.corr_m = corr_m;
  m.upsample = upsample;
  m.rho = rho;
  m.leaky_slope = leaky_slope;
  return m;
}

PairConfig RunConfig::to_pair_config() const {
  PairConfig p;
  p.family = parse_family(shape_family);
  p.n_gt = n_gt_points;
  p.n_partial = n_input;
  p.keep_fraction = keep_fraction;
  return p;
}

void RunConfig::validate() const {
  try {
    (void)parse_family(shape_family);
    if (n_gt_points < 8) throw std::invalid_argument("n_gt_points >= 8");
    if (n_input < 1) throw std::invalid_argument("n_input >= 1");
    if (keep_fraction <= 0.0 || keep_fraction > 1.0)
      throw std::invalid_argument("keep_fraction in (0,1]");
    if (stage_counts.size() != 2 || stage_dims.size() != 2)
      throw std::invalid_argument("stage_counts/stage_dims need exactly 2 entries");
    if (dense_count > n_input) throw std::invalid_argument("dense_count <= n_input");
    if (use_correction && corr_dense > n_input)
      throw std::invalid_argument("corr_dense <= n_input");
    if (lambda < 0.0) throw std::invalid_argument("lambda >= 0");
    if (sigma_noise < 0.0) throw std::invalid_argument("sigma_noise >= 0");
    if (n_denoise < 0) throw std::invalid_argument("n_denoise >= 0");
    if (n_denoise > 0 && denoise_patch > n_gt_points)
      throw std::invalid_argument("denoise_patch <= n_gt_points");
    if (lr <= 0.0) throw std::invalid_argument("lr > 0");
    if (lr_decay_factor <= 0.0 || lr_decay_factor > 1.0)
      throw std::invalid_argument("lr_decay_factor in (0,1]");
    if (lr_decay_every < 1) throw std::invalid_argument("lr_decay_every >= 1");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay >= 0");
    if (steps < 0) throw std::invalid_argument("steps >= 0");
    if (batch < 1) throw std::invalid_argument("batch >= 1");
    if (train_shapes < 1) throw std::invalid_argument("train_shapes >= 1");
    if (eval_shapes < 1) throw std::invalid_argument("eval_shapes >= 1");
    if (checkpoint_every < 1) throw std::invalid_argument("checkpoint_every >= 1");
    if (log_every < 1) throw std::invalid_argument("log_every >= 1");
    to_model_config().validate();  // structural checks on the network itself
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace relc
