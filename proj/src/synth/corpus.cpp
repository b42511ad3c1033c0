#include "mguard/synth/corpus.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"
#include "mguard/nn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace mguard {

const char* to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::spike: return "spike";
    case AnomalyKind::drop: return "drop";
    case AnomalyKind::shift: return "shift";
    case AnomalyKind::oscillation: return "oscillation";
  }
  return "?";
}

namespace {

constexpr AnomalyKind kKinds[] = {AnomalyKind::spike, AnomalyKind::drop, AnomalyKind::shift,
                                  AnomalyKind::oscillation};

void check_range(const Range& r, const std::string& name, double min_lo) {
  if (!(r.lo >= min_lo && r.hi >= r.lo && std::isfinite(r.hi)))
    throw ConfigError("synth." + name + ": need " + std::to_string(min_lo) + " <= lo <= hi");
}

}  // namespace

const ArchetypeSpec& SynthConfig::spec(AnomalyKind kind) const {
  switch (kind) {
    case AnomalyKind::spike: return spike;
    case AnomalyKind::drop: return drop;
    case AnomalyKind::shift: return shift;
    case AnomalyKind::oscillation: return oscillation;
  }
  throw ConfigError("unknown anomaly kind");
}

void SynthConfig::validate() const {
  if (n_buildings < 1) throw ConfigError("synth.n_buildings must be >= 1");
  if (hours_per_building < 1) throw ConfigError("synth.hours_per_building must be >= 1");
  if (!(anomaly_rate >= 0.0 && anomaly_rate < 1.0)) throw ConfigError("synth.anomaly_rate must lie in [0, 1)");
  if (!parse_hour_timestamp(start_timestamp)) throw ConfigError("synth.start_timestamp is not an hour timestamp");
  check_range(level, "level", 1e-9);
  check_range(daily_amplitude, "daily_amplitude", 0.0);
  check_range(weekly_depth, "weekly_depth", 0.0);
  if (daily_amplitude.hi >= 1.0 || weekly_depth.hi >= 1.0)
    throw ConfigError("synth: daily_amplitude and weekly_depth must stay below 1 to keep load positive");
  if (!(noise_fraction > 0.0)) throw ConfigError("synth.noise_fraction must be > 0");
  if (!(min_deviation_noise_sd >= 0.0)) throw ConfigError("synth.min_deviation_noise_sd must be >= 0");
  bool any = false;
  for (auto kind : kKinds) {
    const auto& s = spec(kind);
    if (!s.enabled) continue;
    const std::string name = to_string(kind);
    check_range(s.duration, name + ".duration", 1.0);
    check_range(s.magnitude, name + ".magnitude", 0.0);
    if (!(s.weight >= 0.0)) throw ConfigError("synth." + name + ".weight must be >= 0");
    if (s.duration.hi > hours_per_building)
      throw ConfigError("synth." + name + ".duration (" + std::to_string(static_cast<long>(s.duration.hi)) +
                        " h) exceeds the series length (" + std::to_string(hours_per_building) + " h)");
    if (kind == AnomalyKind::oscillation) check_range(s.period, name + ".period", 1e-9);
    if (kind == AnomalyKind::drop && s.magnitude.hi > 1.0) throw ConfigError("synth.drop.magnitude must be <= 1");
    any = any || s.weight > 0.0;
  }
  if (anomaly_rate > 0.0 && !any) throw ConfigError("synth: anomaly_rate > 0 but every archetype is disabled");
}

double BuildingProfile::base(std::int64_t hour) const {
  const auto day = hour >= 0 ? hour / 24 : (hour - 23) / 24;
  const auto weekday = ((day + 4) % 7 + 7) % 7;  // 1970-01-01 was a Thursday; 0 = Sunday
  const bool weekend = weekday == 0 || weekday == 6;
  const double daily = 1.0 + daily_amplitude * std::sin(2.0 * std::numbers::pi * (static_cast<double>(hour % 24) + daily_phase) / 24.0);
  return level * daily * (weekend ? 1.0 - weekly_depth : 1.0);
}

double base_profile_std(const BuildingProfile& profile, std::int64_t start_hour, std::size_t hours) {
  double mean = 0.0;
  for (std::size_t h = 0; h < hours; ++h) mean += profile.base(start_hour + static_cast<std::int64_t>(h));
  mean /= static_cast<double>(hours);
  double sq = 0.0;
  for (std::size_t h = 0; h < hours; ++h) {
    const double d = profile.base(start_hour + static_cast<std::int64_t>(h)) - mean;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(hours));
}

std::vector<BuildingProfile> draw_profiles(const SynthConfig& config) {
  config.validate();
  Rng rng(mix_seed(config.seed, 0x70726f66696c65));  // "profile"
  std::vector<BuildingProfile> out;
  char id[32];
  for (int b = 0; b < config.n_buildings; ++b) {
    BuildingProfile p;
    std::snprintf(id, sizeof id, "bldg_%03d", b);
    p.building_id = id;
    p.level = rng.uniform(config.level.lo, config.level.hi);
    p.daily_amplitude = rng.uniform(config.daily_amplitude.lo, config.daily_amplitude.hi);
    p.daily_phase = rng.uniform(0.0, 24.0);
    p.weekly_depth = rng.uniform(config.weekly_depth.lo, config.weekly_depth.hi);
    p.noise_std = config.noise_fraction * p.level;
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::vector<AnomalyEvent> plan_events(const SynthConfig& config) {
  const auto hours = static_cast<std::size_t>(config.hours_per_building);
  const auto n = static_cast<std::size_t>(config.n_buildings);
  auto remaining = static_cast<std::size_t>(std::llround(config.anomaly_rate * static_cast<double>(n * hours)));
  Rng rng(mix_seed(config.seed, 0x6576656e7473));  // "events"
  // Occupied hours per building, including a one-hour margin around each
  // event so that neighbouring events never merge.
  std::vector<std::vector<bool>> busy(n, std::vector<bool>(hours, false));
  std::vector<AnomalyEvent> events;

  while (remaining > 0) {
    double total_weight = 0.0;
    std::vector<AnomalyKind> eligible;
    for (auto kind : kKinds) {
      const auto& s = config.spec(kind);
      if (s.enabled && s.weight > 0.0 && s.duration.lo <= static_cast<double>(remaining)) {
        eligible.push_back(kind);
        total_weight += s.weight;
      }
    }
    if (eligible.empty())
      throw ConfigError("synth: remaining anomaly budget of " + std::to_string(remaining) +
                        " h is shorter than every enabled archetype's minimum duration");
    double pick = rng.uniform() * total_weight;
    AnomalyKind kind = eligible.back();
    for (auto k : eligible) {
      if (pick < config.spec(k).weight) {
        kind = k;
        break;
      }
      pick -= config.spec(k).weight;
    }
    const auto& s = config.spec(kind);
    AnomalyEvent e;
    e.kind = kind;
    const auto dlo = static_cast<std::int64_t>(std::ceil(s.duration.lo));
    const auto dhi = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(s.duration.hi)),
                                            static_cast<std::int64_t>(remaining));
    e.duration = static_cast<std::size_t>(rng.between(dlo, std::max(dlo, dhi)));
    e.magnitude = rng.uniform(s.magnitude.lo, s.magnitude.hi);
    if (kind == AnomalyKind::oscillation) e.period = rng.uniform(s.period.lo, s.period.hi);

    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      e.building = static_cast<std::size_t>(rng.below(n));
      e.start = static_cast<std::size_t>(rng.below(hours - e.duration + 1));
      const auto& occ = busy[e.building];
      placed = std::none_of(occ.begin() + static_cast<long>(e.start), occ.begin() + static_cast<long>(e.start + e.duration),
                            [](bool b) { return b; });
    }
    if (!placed) throw ConfigError("synth: anomaly_rate too high to place non-overlapping events");
    auto& occ = busy[e.building];
    const auto lo = e.start == 0 ? 0 : e.start - 1;
    const auto hi = std::min(hours, e.start + e.duration + 1);
    std::fill(occ.begin() + static_cast<long>(lo), occ.begin() + static_cast<long>(hi), true);
    remaining -= e.duration;
    events.push_back(e);
  }
  std::sort(events.begin(), events.end(), [](const AnomalyEvent& a, const AnomalyEvent& b) {
    return a.building != b.building ? a.building < b.building : a.start < b.start;
  });
  return events;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

SynthCorpus render_corpus(const SynthConfig& config, std::vector<BuildingProfile> profiles,
                          std::vector<AnomalyEvent> events) {
  const auto hours = static_cast<std::size_t>(config.hours_per_building);
  SynthCorpus corpus;
  corpus.start_hour = *parse_hour_timestamp(config.start_timestamp);
  for (std::size_t b = 0; b < profiles.size(); ++b) {
    const auto& p = profiles[b];
    Rng noise_rng(mix_seed(config.seed, 0x6e6f697365 + b));  // "noise"
    std::vector<double> base(hours), noise(hours), deviation(hours, 0.0);
    for (std::size_t h = 0; h < hours; ++h) {
      base[h] = p.base(corpus.start_hour + static_cast<std::int64_t>(h));
      noise[h] = p.noise_std * noise_rng.normal();
    }
    const double sigma_base = base_profile_std(p, corpus.start_hour, hours);

    BuildingSeries s;
    s.building_id = p.building_id;
    s.start_hour = corpus.start_hour;
    s.labels = std::vector<std::uint8_t>(hours, 0);
    for (const auto& e : events) {
      if (e.building != b) continue;
      if (e.duration == 0 || e.start + e.duration > hours)
        throw ConfigError("synth: " + std::string(to_string(e.kind)) + " event of " + std::to_string(e.duration) +
                          " h at hour " + std::to_string(e.start) + " does not fit a " + std::to_string(hours) +
                          " h series");
      for (std::size_t k = 0; k < e.duration; ++k) {
        const auto h = e.start + k;
        double d = 0.0;
        switch (e.kind) {
          case AnomalyKind::spike:
          case AnomalyKind::shift: d = e.magnitude * sigma_base; break;
          case AnomalyKind::drop: d = -e.magnitude * base[h]; break;
          case AnomalyKind::oscillation:
            d = e.magnitude * sigma_base * std::sin(2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / e.period);
            break;
        }
        const double floor_dev = config.min_deviation_noise_sd * p.noise_std;
        if (std::abs(d) < floor_dev) d = d < 0.0 ? -floor_dev : floor_dev;
        deviation[h] = d;
        (*s.labels)[h] = 1;
      }
    }
    s.readings.resize(hours);
    for (std::size_t h = 0; h < hours; ++h) {
      const double eps = (*s.labels)[h] ? std::clamp(noise[h], -p.noise_std, p.noise_std) : noise[h];
      s.readings[h] = round4(base[h] + deviation[h] + eps);
    }
    corpus.buildings.push_back(std::move(s));
  }
  corpus.profiles = std::move(profiles);
  corpus.events = std::move(events);
  return corpus;
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  config.validate();
  auto profiles = draw_profiles(config);
  auto events = plan_events(config);
  return render_corpus(config, std::move(profiles), std::move(events));
}

std::string corpus_csv(const SynthCorpus& corpus) {
  std::string out = "building_id,timestamp,meter_reading,anomaly\n";
  char value[64];
  for (const auto& s : corpus.buildings) {
    for (std::size_t h = 0; h < s.readings.size(); ++h) {
      std::snprintf(value, sizeof value, "%.4f", s.readings[h]);
      out += s.building_id;
      out += ',';
      out += format_hour_timestamp(s.start_hour + static_cast<std::int64_t>(h));
      out += ',';
      out += value;
      out += ',';
      out += (s.labels && (*s.labels)[h]) ? '1' : '0';
      out += '\n';
    }
  }
  return out;
}

void write_corpus_csv(const std::filesystem::path& path, const SynthCorpus& corpus) {
  write_text_file(path, corpus_csv(corpus));
}

}  // namespace mguard
