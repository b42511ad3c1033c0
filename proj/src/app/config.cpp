#include "mguard/app/config.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"
#include "mguard/nn/rng.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdio>
#include <sstream>

namespace mguard {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> table = {
      {"run.seed", "7"},

      {"synth.n_buildings", "50"},
      {"synth.hours_per_building", "500"},
      {"synth.anomaly_rate", "0.02"},
      {"synth.start_timestamp", "2016-01-01 00:00:00"},
      {"synth.noise_fraction", "0.03"},
      {"synth.spike", "1"},
      {"synth.drop", "1"},
      {"synth.shift", "1"},
      {"synth.oscillation", "1"},

      {"data.window_length", "60"},
      {"data.clip_c", "3.5"},
      {"data.holdout_fraction", "0.1"},
      {"data.test_building_fraction", "0.5"},
      {"data.train_stride", "1"},

      {"model.latent_dim", "100"},
      {"model.generator_hidden", "32,64,128"},
      {"model.discriminator_hidden", "100"},

      {"training.epochs", "20"},
      {"training.batch_size", "32"},
      {"training.alpha", "0.0002"},
      {"training.beta1", "0.5"},
      {"training.beta2", "0.999"},
      {"training.epsilon", "1e-08"},
      {"training.latent_std", "0.1"},
      {"training.checkpoint_every", "1"},
      {"training.max_steps_per_epoch", "0"},
      {"training.real_label", "0.9"},
      {"training.instance_noise", "0"},

      {"detection.lambda", "0.1"},
      {"detection.steps", "300"},
      {"detection.learning_rate", "0.01"},
      {"detection.restarts", "1"},
      {"detection.latent_std", "0.1"},
      {"detection.calibration_max_normal", "0"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = trim(value);
}

void RunConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected section.key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::merge_ini(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' is outside any [section]");
    for (const auto& [key, value] : body) set(section + "." + key, value.get_value<std::string>());
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  merge_ini(text);
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const auto& v = get(key);
  std::int64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const auto& v = get(key);
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
  return out;
}

double RunConfig::get_double(const std::string& key) const {
  const auto& v = get(key);
  double out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const auto& v = get(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    int v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
      throw ConfigError(key + ": expected a comma-separated integer list, got '" + get(key) + "'");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::to_ini() const {
  std::string out;
  std::string section;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const auto s = key.substr(0, dot);
    if (s != section) {
      out += (out.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::string RunConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_seed(to_ini(), 0)));
  return buf;
}

SynthConfig synth_config(const RunConfig& c) {
  SynthConfig s;
  s.n_buildings = static_cast<int>(c.get_int("synth.n_buildings"));
  s.hours_per_building = static_cast<int>(c.get_int("synth.hours_per_building"));
  s.anomaly_rate = c.get_double("synth.anomaly_rate");
  s.start_timestamp = c.get("synth.start_timestamp");
  s.noise_fraction = c.get_double("synth.noise_fraction");
  s.spike.enabled = c.get_bool("synth.spike");
  s.drop.enabled = c.get_bool("synth.drop");
  s.shift.enabled = c.get_bool("synth.shift");
  s.oscillation.enabled = c.get_bool("synth.oscillation");
  s.seed = c.seed();
  s.validate();
  return s;
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.latent_dim = static_cast<int>(c.get_int("model.latent_dim"));
  m.window_length = static_cast<int>(c.get_int("data.window_length"));
  m.generator_hidden = c.get_int_list("model.generator_hidden");
  m.discriminator_hidden = static_cast<int>(c.get_int("model.discriminator_hidden"));
  m.validate();
  return m;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.epochs = static_cast<int>(c.get_int("training.epochs"));
  t.batch_size = static_cast<int>(c.get_int("training.batch_size"));
  t.adam.alpha = c.get_double("training.alpha");
  t.adam.beta1 = c.get_double("training.beta1");
  t.adam.beta2 = c.get_double("training.beta2");
  t.adam.epsilon = c.get_double("training.epsilon");
  t.latent_std = c.get_double("training.latent_std");
  t.checkpoint_every = static_cast<int>(c.get_int("training.checkpoint_every"));
  t.max_steps_per_epoch = static_cast<std::size_t>(c.get_u64("training.max_steps_per_epoch"));
  t.step.real_label = c.get_double("training.real_label");
  t.step.instance_noise = c.get_double("training.instance_noise");
  t.clip_c = static_cast<float>(c.get_double("data.clip_c"));
  t.seed = mix_seed(c.seed(), 0x747261696e);  // "train"
  t.validate();
  return t;
}

InversionConfig inversion_config(const RunConfig& c) {
  InversionConfig i;
  i.lambda = c.get_double("detection.lambda");
  i.steps = static_cast<int>(c.get_int("detection.steps"));
  i.learning_rate = c.get_double("detection.learning_rate");
  i.beta1 = c.get_double("training.beta1");
  i.beta2 = c.get_double("training.beta2");
  i.restarts = static_cast<int>(c.get_int("detection.restarts"));
  i.latent_std = c.get_double("detection.latent_std");
  i.seed = mix_seed(c.seed(), 0x696e76657274);  // "invert"
  i.validate();
  return i;
}

}  // namespace mguard
