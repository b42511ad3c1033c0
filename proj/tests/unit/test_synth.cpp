#include "mguard/data/series.hpp"
#include "mguard/error.hpp"
#include "mguard/synth/corpus.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mguard;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.n_buildings = 6;
  cfg.hours_per_building = 300;
  cfg.anomaly_rate = 0.03;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(Synth, DeskScaleCorpusIsByteIdenticalAcrossRuns) {
  SynthConfig cfg;  // 50 x 500, 2 %, seed 7
  const auto a = corpus_csv(generate_corpus(cfg));
  const auto b = corpus_csv(generate_corpus(cfg));
  EXPECT_EQ(a, b);
  cfg.seed = 8;
  EXPECT_NE(a, corpus_csv(generate_corpus(cfg)));
}

TEST(Synth, AnomalyFractionMatchesRate) {
  SynthConfig cfg;
  const auto corpus = generate_corpus(cfg);
  std::size_t anomalous = 0, total = 0;
  for (const auto& s : corpus.buildings) {
    for (auto l : *s.labels) anomalous += l;
    total += s.size();
  }
  EXPECT_EQ(total, 25000u);
  const double rate = static_cast<double>(anomalous) / static_cast<double>(total);
  EXPECT_NEAR(rate, 0.02, 0.002);
  // Every archetype shows up at desk scale.
  for (auto kind : {AnomalyKind::spike, AnomalyKind::drop, AnomalyKind::shift, AnomalyKind::oscillation}) {
    EXPECT_TRUE(std::any_of(corpus.events.begin(), corpus.events.end(), [&](const auto& e) { return e.kind == kind; }))
        << to_string(kind);
  }
}

TEST(Synth, ZeroRateHasNoAnomalies) {
  auto cfg = small_config();
  cfg.anomaly_rate = 0.0;
  const auto corpus = generate_corpus(cfg);
  EXPECT_TRUE(corpus.events.empty());
  for (const auto& s : corpus.buildings)
    for (auto l : *s.labels) ASSERT_EQ(l, 0);
}

TEST(Synth, SingleSpikeIsLabeledAtItsHour) {
  auto cfg = small_config();
  cfg.n_buildings = 1;
  const auto profiles = draw_profiles(cfg);
  AnomalyEvent spike{0, AnomalyKind::spike, 137, 1, 10.0, 0.0};
  const auto with = render_corpus(cfg, profiles, {spike});
  const auto without = render_corpus(cfg, profiles, {});
  const auto& labels = *with.buildings[0].labels;
  for (std::size_t h = 0; h < labels.size(); ++h) {
    EXPECT_EQ(labels[h], h == 137 ? 1 : 0) << h;
    if (h != 137) {
      EXPECT_EQ(with.buildings[0].readings[h], without.buildings[0].readings[h]);
    }
  }
  const double sigma = base_profile_std(profiles[0], with.start_hour, labels.size());
  EXPECT_GT(with.buildings[0].readings[137] - profiles[0].base(with.start_hour + 137), 9.0 * sigma);
}

TEST(Synth, AnomalousHoursDeviateByAtLeastThreeNoiseSd) {
  const auto cfg = small_config();
  const auto corpus = generate_corpus(cfg);
  std::size_t checked = 0;
  for (std::size_t b = 0; b < corpus.buildings.size(); ++b) {
    const auto& s = corpus.buildings[b];
    const auto& p = corpus.profiles[b];
    for (std::size_t h = 0; h < s.size(); ++h) {
      if (!(*s.labels)[h]) continue;
      const double dev = std::abs(s.readings[h] - p.base(s.start_hour + static_cast<std::int64_t>(h)));
      ASSERT_GE(dev, 3.0 * p.noise_std - 1e-4) << s.building_id << " hour " << h;
      ++checked;
    }
  }
  EXPECT_EQ(checked, static_cast<std::size_t>(std::llround(0.03 * 6 * 300)));
}

TEST(Synth, NormalHoursFollowBaseWithNoise) {
  const auto corpus = generate_corpus(small_config());
  for (std::size_t b = 0; b < corpus.buildings.size(); ++b) {
    const auto& s = corpus.buildings[b];
    const auto& p = corpus.profiles[b];
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (std::size_t h = 0; h < s.size(); ++h) {
      if ((*s.labels)[h]) continue;
      const double r = (s.readings[h] - p.base(s.start_hour + static_cast<std::int64_t>(h))) / p.noise_std;
      sum += r;
      sq += r * r;
      ++n;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 0.25);
    EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 1.0, 0.15);
  }
}

TEST(Synth, CsvRoundTripsThroughIngestion) {
  const auto corpus = generate_corpus(small_config());
  const auto parsed = parse_meter_csv(corpus_csv(corpus));
  ASSERT_EQ(parsed.size(), corpus.buildings.size());
  for (std::size_t b = 0; b < parsed.size(); ++b) {
    EXPECT_EQ(parsed[b].building_id, corpus.buildings[b].building_id);
    EXPECT_EQ(parsed[b].start_hour, corpus.buildings[b].start_hour);
    EXPECT_EQ(parsed[b].readings, corpus.buildings[b].readings);
    EXPECT_EQ(*parsed[b].labels, *corpus.buildings[b].labels);
  }
  EXPECT_EQ(format_hour_timestamp(corpus.start_hour), "2016-01-01 00:00:00");
}

TEST(Synth, DurationLongerThanSeriesIsAConfigError) {
  auto cfg = small_config();
  cfg.hours_per_building = 24;  // shifts need 48-120 h
  EXPECT_THROW(generate_corpus(cfg), ConfigError);
  cfg.shift.enabled = false;
  EXPECT_NO_THROW(generate_corpus(cfg));
  auto profiles = draw_profiles(cfg);
  EXPECT_THROW(render_corpus(cfg, profiles, {{0, AnomalyKind::drop, 20, 6, 0.5, 0.0}}), ConfigError);
}

TEST(Synth, ConfigValidation) {
  auto cfg = small_config();
  cfg.anomaly_rate = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.drop.magnitude = {0.5, 1.5};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.start_timestamp = "soon";
  EXPECT_THROW(cfg.validate(), ConfigError);
}
