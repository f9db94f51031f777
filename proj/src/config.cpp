#include "nashae/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nashae/errors.hpp"

namespace nashae {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) bad(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) bad(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::size_t> as_counts(const json& v, const std::string& key) {
  if (!v.is_array()) bad(key, "expected an array of integers");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(as_count(e, key));
  return out;
}

using Setter = std::function<void(ExperimentSpec&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"schema_version",
       [](ExperimentSpec&, const json& v, const std::string& k) {
         if (!v.is_number_integer() || v.get<long long>() != kSpecSchemaVersion) {
           bad(k, "unsupported schema version (expected " + std::to_string(kSpecSchemaVersion) + ")");
         }
       }},
      {"beam.frequencies",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.frequencies = as_counts(v, k); }},
      {"beam.duty_cycle_count",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.duty_cycle_count = as_count(v, k); }},
      {"beam.duty_cycle_min",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.duty_cycle_min = as_real(v, k); }},
      {"beam.duty_cycle_max",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.duty_cycle_max = as_real(v, k); }},
      {"beam.waveform_len",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.waveform_len = as_count(v, k); }},
      {"beam.ramp_tau",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.ramp_tau = as_real(v, k); }},
      {"beam.noise_sigma",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.noise_sigma = as_real(v, k); }},
      {"beam.seed", [](ExperimentSpec& s, const json& v, const std::string& k) { s.beam.seed = as_u64(v, k); }},
      {"data.path",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         if (v.is_null()) {
           s.data_path.reset();
         } else {
           s.data_path = as_string(v, k);
         }
       }},
      {"model.hidden",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.model.hidden = as_counts(v, k); }},
      {"model.latent_dim",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.model.latent_dim = as_count(v, k); }},
      {"model.predictor_hidden",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         s.model.predictor_hidden = as_counts(v, k);
       }},
      {"model.hidden_activation",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         const auto act = activation_from_string(as_string(v, k));
         if (!act) bad(k, "expected identity, sigmoid, selu or relu");
         s.model.hidden_activation = *act;
       }},
      {"model.ae_lr",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         s.model.ae_adam.learning_rate = as_real(v, k);
       }},
      {"model.predictor_lr",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         s.model.pred_adam.learning_rate = as_real(v, k);
       }},
      {"model.adam_beta1",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         s.model.ae_adam.beta1 = s.model.pred_adam.beta1 = as_real(v, k);
       }},
      {"model.adam_beta2",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         s.model.ae_adam.beta2 = s.model.pred_adam.beta2 = as_real(v, k);
       }},
      {"model.adam_epsilon",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         s.model.ae_adam.epsilon = s.model.pred_adam.epsilon = as_real(v, k);
       }},
      {"train.batch_size",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.train.batch_size = as_count(v, k); }},
      {"train.epochs",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.train.epochs = as_count(v, k); }},
      {"train.lambda",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.train.lambda = as_real(v, k); }},
      {"train.k", [](ExperimentSpec& s, const json& v, const std::string& k) { s.train.k = as_count(v, k); }},
      {"train.shuffle",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.train.shuffle = as_bool(v, k); }},
      {"train.range_interval",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.train.range_interval = as_count(v, k); }},
      {"metrics",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         if (!v.is_array()) bad(k, "expected an array of metric names");
         s.metrics.clear();
         for (const auto& e : v) s.metrics.push_back(as_string(e, k));
       }},
      {"seeds",
       [](ExperimentSpec& s, const json& v, const std::string& k) {
         if (!v.is_array()) bad(k, "expected an array of seeds");
         s.seeds.clear();
         for (const auto& e : v) s.seeds.push_back(as_u64(e, k));
       }},
      {"output_dir",
       [](ExperimentSpec& s, const json& v, const std::string& k) { s.output_dir = as_string(v, k); }},
  };
  return table;
}

template <class F>
void rekey(const std::string& key, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    bad(key, e.what());
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  rekey("beam", [&] { beam.validate(); });
  if (model.latent_dim == 0) bad("model.latent_dim", "must be >= 1");
  if (model.hidden.empty()) bad("model.hidden", "need at least one hidden layer");
  for (auto h : model.hidden)
    if (h == 0) bad("model.hidden", "sizes must be >= 1");
  for (auto h : model.predictor_hidden)
    if (h == 0) bad("model.predictor_hidden", "sizes must be >= 1");
  rekey("model.ae_lr", [&] { model.ae_adam.validate(); });
  rekey("model.predictor_lr", [&] { model.pred_adam.validate(); });
  if (train.batch_size < 2) bad("train.batch_size", "must be >= 2");
  if (train.epochs < 1) bad("train.epochs", "must be >= 1");
  if (train.k < 1) bad("train.k", "must be >= 1");
  if (train.range_interval < 1) bad("train.range_interval", "must be >= 1");
  if (!(train.lambda >= 0.0 && train.lambda < 1.0)) bad("train.lambda", "must lie in [0, 1)");
  std::set<std::string> seen_metrics;
  for (const auto& m : metrics) {
    if (std::find(kKnownMetrics.begin(), kKnownMetrics.end(), m) == kKnownMetrics.end()) {
      bad("metrics", "unknown metric '" + m + "'");
    }
    if (!seen_metrics.insert(m).second) bad("metrics", "duplicate metric '" + m + "'");
  }
  if (seeds.empty()) bad("seeds", "need at least one seed");
  std::set<std::uint64_t> seen(seeds.begin(), seeds.end());
  if (seen.size() != seeds.size()) bad("seeds", "seeds must be distinct");
  if (output_dir.empty()) bad("output_dir", "must not be empty");
}

ModelConfig ExperimentSpec::model_config(std::size_t input_dim) const {
  ModelConfig cfg = model;
  cfg.input_dim = input_dim;
  cfg.lambda = train.lambda;
  cfg.k = train.k;
  return cfg;
}

TrainConfig ExperimentSpec::train_config(std::uint64_t seed) const {
  TrainConfig cfg = train;
  cfg.seed = seed;
  return cfg;
}

ExperimentSpec parse_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("schema_version")) bad("schema_version", "missing");
  ExperimentSpec spec;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) bad(key, "unknown key");
    it->second(spec, value, key);
  }
  spec.validate();
  return spec;
}

std::string serialize_spec(const ExperimentSpec& spec) {
  json doc = json::object();
  doc["schema_version"] = kSpecSchemaVersion;
  doc["beam.frequencies"] = spec.beam.frequencies;
  doc["beam.duty_cycle_count"] = spec.beam.duty_cycle_count;
  doc["beam.duty_cycle_min"] = spec.beam.duty_cycle_min;
  doc["beam.duty_cycle_max"] = spec.beam.duty_cycle_max;
  doc["beam.waveform_len"] = spec.beam.waveform_len;
  doc["beam.ramp_tau"] = spec.beam.ramp_tau;
  doc["beam.noise_sigma"] = spec.beam.noise_sigma;
  doc["beam.seed"] = spec.beam.seed;
  doc["data.path"] = spec.data_path ? json(spec.data_path->string()) : json(nullptr);
  doc["model.hidden"] = spec.model.hidden;
  doc["model.latent_dim"] = spec.model.latent_dim;
  doc["model.predictor_hidden"] = spec.model.predictor_hidden;
  doc["model.hidden_activation"] = std::string(to_string(spec.model.hidden_activation));
  doc["model.ae_lr"] = spec.model.ae_adam.learning_rate;
  doc["model.predictor_lr"] = spec.model.pred_adam.learning_rate;
  doc["model.adam_beta1"] = spec.model.ae_adam.beta1;
  doc["model.adam_beta2"] = spec.model.ae_adam.beta2;
  doc["model.adam_epsilon"] = spec.model.ae_adam.epsilon;
  doc["train.batch_size"] = spec.train.batch_size;
  doc["train.epochs"] = spec.train.epochs;
  doc["train.lambda"] = spec.train.lambda;
  doc["train.k"] = spec.train.k;
  doc["train.shuffle"] = spec.train.shuffle;
  doc["train.range_interval"] = spec.train.range_interval;
  doc["metrics"] = spec.metrics;
  doc["seeds"] = spec.seeds;
  doc["output_dir"] = spec.output_dir;
  return doc.dump(2) + "\n";
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

void save_spec(const std::filesystem::path& path, const ExperimentSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_spec(spec);
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<std::string> parse_metric_list(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? list.size() : comma;
    std::string name(list.substr(start, end - start));
    if (std::find(kKnownMetrics.begin(), kKnownMetrics.end(), name) == kKnownMetrics.end()) {
      throw ConfigError("unknown metric '" + name + "' (known: tad, bvae, r2, count)");
    }
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace nashae
