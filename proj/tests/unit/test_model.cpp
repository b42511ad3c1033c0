#include "mguard/error.hpp"
#include "mguard/model/checkpoint.hpp"
#include "mguard/model/discriminator.hpp"
#include "mguard/model/generator.hpp"
#include "mguard/nn/grad_check.hpp"
#include "mguard/nn/losses.hpp"
#include "mguard/nn/rng.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

using namespace mguard;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.latent_dim = 4;
  c.window_length = 6;
  c.generator_hidden = {3, 4, 5};
  c.discriminator_hidden = 5;
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mguard_model_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Generator, ZeroParametersGiveZeroOutput) {
  const auto g = Generator<float>::zeros(ModelConfig{});
  Rng rng(1);
  const MatrixF z = sample_gaussian<float>(rng, 0.f, 0.1f, 100, 3);
  const MatrixF x = generate<float>(g, z);
  EXPECT_EQ(x.rows(), 60);
  EXPECT_EQ(x.cols(), 3);
  EXPECT_TRUE((x.array() == 0.f).all());
}

TEST(Generator, DeterministicAndBounded) {
  Rng rng(2);
  const auto g = Generator<float>::initialized(ModelConfig{}, rng);
  const MatrixF z = sample_gaussian<float>(rng, 0.f, 0.1f, 100, 1);
  const MatrixF a = generate<float>(g, z);
  const MatrixF b = generate<float>(g, z);
  EXPECT_TRUE((a.array() == b.array()).all());
  EXPECT_LT(a.cwiseAbs().maxCoeff(), 1.f);
}

TEST(Generator, FreshlyInitializedOutputIsNonDegenerate) {
  Rng rng(3);
  const auto g = Generator<float>::initialized(ModelConfig{}, rng);
  const MatrixF z = sample_gaussian<float>(rng, 0.f, 0.1f, 100, 100);
  const MatrixF x = generate<float>(g, z);
  const double mean = x.cast<double>().mean();
  const double sd = std::sqrt((x.cast<double>().array() - mean).square().mean());
  EXPECT_GT(sd, 0.0);
  // Different latent codes give different sequences.
  EXPECT_GT((x.col(0) - x.col(1)).cwiseAbs().maxCoeff(), 0.f);
}

TEST(Generator, LatentDimensionMismatch) {
  const auto g = Generator<float>::zeros(ModelConfig{});
  EXPECT_THROW(generate<float>(g, MatrixF::Zero(99, 1)), ShapeError);
}

TEST(Generator, BatchColumnsMatchSingleEvaluation) {
  Rng rng(4);
  const auto g = Generator<double>::initialized(tiny_config(), rng);
  const MatrixD z = sample_gaussian<double>(rng, 0.0, 0.1, 4, 3);
  const MatrixD batch = generate<double>(g, z);
  for (Index j = 0; j < 3; ++j) {
    const MatrixD single = generate<double>(g, z.col(j));
    EXPECT_TRUE(single.col(0).isApprox(batch.col(j), 1e-12));
  }
}

TEST(Discriminator, ZeroParametersScoreHalf) {
  const auto d = Discriminator<float>::zeros(ModelConfig{});
  Rng rng(5);
  const VectorF x = sample_gaussian<float>(rng, 0.f, 1.f, 60, 1);
  const auto r = discriminate_window<float>(d, x);
  EXPECT_EQ(r.score, 0.5f);
}

TEST(Discriminator, DefaultFeatureShape) {
  Rng rng(6);
  const auto d = Discriminator<float>::initialized(ModelConfig{}, rng);
  const VectorF x = sample_gaussian<float>(rng, 0.f, 0.3f, 60, 1);
  const auto r = discriminate_window<float>(d, x);
  EXPECT_EQ(r.features.rows(), 60);
  EXPECT_EQ(r.features.cols(), 100);
  EXPECT_GT(r.score, 0.f);
  EXPECT_LT(r.score, 1.f);
}

TEST(Discriminator, DifferentInputsGiveDifferentFeatures) {
  Rng rng(7);
  const auto d = Discriminator<float>::initialized(ModelConfig{}, rng);
  const VectorF a = sample_gaussian<float>(rng, 0.f, 0.3f, 60, 1);
  const VectorF b = sample_gaussian<float>(rng, 0.f, 0.3f, 60, 1);
  const auto fa = discriminate_window<float>(d, a).features;
  const auto fb = discriminate_window<float>(d, b).features;
  EXPECT_GT((fa - fb).cwiseAbs().maxCoeff(), 1e-4f);
  // Features vary along time too.
  EXPECT_GT((fa.row(0) - fa.row(59)).cwiseAbs().maxCoeff(), 1e-4f);
}

TEST(Model, DefaultParameterCounts) {
  // 4H(I+H+1) per LSTM layer: 4*32*133 + 4*64*97 + 4*128*193, plus the 128->1 head.
  constexpr Index kGenerator = 17024 + 24832 + 98816 + 129;
  // 4*100*(1+100+1) + 100->1 head.
  constexpr Index kDiscriminator = 40800 + 101;
  const ModelConfig reference;
  EXPECT_EQ(Generator<float>::zeros(reference).parameter_count(), kGenerator);
  EXPECT_EQ(Discriminator<float>::zeros(reference).parameter_count(), kDiscriminator);
  EXPECT_EQ(generator_parameter_count(reference), kGenerator);
  EXPECT_EQ(discriminator_parameter_count(reference), kDiscriminator);
  EXPECT_EQ(kGenerator, 140801);
  EXPECT_EQ(kDiscriminator, 40901);
}

TEST(Model, SequenceRowLayoutRoundTrip) {
  MatrixF seq(3, 2);
  seq << 1, 4, 2, 5, 3, 6;
  const MatrixF row = sequences_to_row<float>(seq);
  MatrixF expected(1, 6);
  expected << 1, 4, 2, 5, 3, 6;  // time-major: (t0,b0) (t0,b1) (t1,b0) ...
  EXPECT_EQ(row, expected);
  EXPECT_EQ(row_to_sequences<float>(row, 2), seq);
}

// BCE(D(G(z)), target) differentiated w.r.t. every G and D parameter.
TEST(Model, CompositeGradientMatchesFiniteDifferences) {
  Rng rng(31);
  const auto config = tiny_config();
  auto g = Generator<double>::initialized(config, rng);
  auto d = Discriminator<double>::initialized(config, rng);
  // Larger weights than the default init so every block carries signal.
  for (auto& p : g.parameters()) p.map() = sample_uniform<double>(rng, -0.8, 0.8, p.rows, p.cols);
  for (auto& p : d.parameters()) p.map() = sample_uniform<double>(rng, -0.8, 0.8, p.rows, p.cols);
  MatrixD z = sample_gaussian<double>(rng, 0.0, 0.5, config.latent_dim, 2);
  MatrixD targets(1, 2);
  targets << 1.0, 0.0;

  auto gf = g.cast<float>();
  auto df = d.cast<float>();
  GeneratorCache<float> gcache;
  const MatrixF x = generate<float>(gf, z.cast<float>(), &gcache);
  const auto dout = discriminate<float>(df, x, true);
  const MatrixF grad_logits = bce_logit_grad<float>(dout.scores, targets.cast<float>());
  auto dgrads = discriminator_backward<float>(df, dout, grad_logits, {});
  auto ggrads = generator_backward<float>(gf, gcache, dgrads.input);

  auto refs = g.parameters();
  for (auto& r : d.parameters()) refs.push_back(r);
  refs.push_back({"z", z.data(), z.rows(), z.cols()});
  auto grad_refs = ggrads.params.parameters();
  for (auto& r : dgrads.params.parameters()) grad_refs.push_back(r);
  grad_refs.push_back({"z", ggrads.latent.data(), ggrads.latent.rows(), ggrads.latent.cols()});

  const auto flat = mguard::testing::flatten(refs);
  const auto report = grad_check(
      [&](std::span<const double> v) {
        mguard::testing::unflatten(v, refs);
        const auto out = discriminate<double>(d, generate<double>(g, z));
        return bce_loss<double>(out.scores, targets).value;
      },
      flat.values, mguard::testing::flatten_values(grad_refs), flat.blocks);
  mguard::testing::unflatten(flat.values, refs);
  EXPECT_TRUE(report.passed()) << report.summary();
}

TEST(Model, FeatureLossGradientMatchesFiniteDifferences) {
  Rng rng(32);
  const auto config = tiny_config();
  auto g = Generator<double>::initialized(config, rng);
  auto d = Discriminator<double>::initialized(config, rng);
  for (auto& p : d.parameters()) p.map() = sample_uniform<double>(rng, -0.8, 0.8, p.rows, p.cols);
  MatrixD z = sample_gaussian<double>(rng, 0.0, 0.5, config.latent_dim, 1);
  const MatrixD weights = sample_gaussian<double>(rng, 0.0, 1.0, config.discriminator_hidden, config.window_length);

  auto gf = g.cast<float>();
  auto df = d.cast<float>();
  GeneratorCache<float> gcache;
  const MatrixF x = generate<float>(gf, z.cast<float>(), &gcache);
  const auto dout = discriminate<float>(df, x, true);
  auto dgrads = discriminator_backward<float>(df, dout, MatrixF::Zero(1, 1), weights.cast<float>(), false);
  auto ggrads = generator_backward<float>(gf, gcache, dgrads.input, false);
  EXPECT_EQ(ggrads.params.lstm.size(), 0u);

  std::vector<ParamRef<double>> refs{{"z", z.data(), z.rows(), z.cols()}};
  std::vector<ParamRef<float>> grad_refs{{"z", ggrads.latent.data(), ggrads.latent.rows(), 1}};
  const auto flat = mguard::testing::flatten(refs);
  const auto report = grad_check(
      [&](std::span<const double> v) {
        mguard::testing::unflatten(v, refs);
        return (discriminate<double>(d, generate<double>(g, z)).features.array() * weights.array()).sum();
      },
      flat.values, mguard::testing::flatten_values(grad_refs), flat.blocks);
  EXPECT_TRUE(report.passed()) << report.summary();
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(40);
  auto g = Generator<float>::initialized(tiny_config(), rng);
  auto d = Discriminator<float>::initialized(tiny_config(), rng);
  auto ckpt = make_checkpoint(g, d, {4, 6, 3.5f, 99});
  ckpt.put("meta.epoch", Tensor{{1}, {3.f}});
  const auto path = temp_path("roundtrip.glsm");
  save_checkpoint(path, ckpt);
  const auto loaded = load_checkpoint(path);
  ASSERT_EQ(loaded.tensors.size(), ckpt.tensors.size());
  EXPECT_EQ(loaded.config, ckpt.config);
  for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
    EXPECT_EQ(loaded.tensors[i].first, ckpt.tensors[i].first);
    EXPECT_EQ(loaded.tensors[i].second.dims, ckpt.tensors[i].second.dims);
    EXPECT_EQ(std::memcmp(loaded.tensors[i].second.data.data(), ckpt.tensors[i].second.data.data(),
                          ckpt.tensors[i].second.data.size() * sizeof(float)),
              0);
  }
  auto g2 = restore_generator(loaded);
  auto d2 = restore_discriminator(loaded);
  EXPECT_EQ(encode_checkpoint(make_checkpoint(g2, d2, loaded.config)), encode_checkpoint(make_checkpoint(g, d, ckpt.config)));
  const auto cfg = model_config_of(loaded);
  EXPECT_EQ(cfg.generator_hidden, (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(cfg.discriminator_hidden, 5);
}

TEST(Checkpoint, GateOrderIsPreservedInRowOrder) {
  auto g = Generator<float>::zeros(tiny_config());
  auto d = Discriminator<float>::zeros(tiny_config());
  // Mark the forget block of the discriminator bias.
  d.lstm.b.segment(5, 5).setConstant(1.f);
  const auto ckpt = make_checkpoint(g, d, {4, 6, 3.5f, 0});
  const auto& b = ckpt.at("discriminator.lstm.b");
  ASSERT_EQ(b.dims, (std::vector<std::uint32_t>{20}));
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(b.data[i], (i >= 5 && i < 10) ? 1.f : 0.f);
  const auto& w = ckpt.at("discriminator.lstm.U");
  EXPECT_EQ(w.dims, (std::vector<std::uint32_t>{20, 5}));
}

TEST(Checkpoint, CorruptMagicIsRejected) {
  Rng rng(41);
  auto g = Generator<float>::initialized(tiny_config(), rng);
  auto d = Discriminator<float>::initialized(tiny_config(), rng);
  auto bytes = encode_checkpoint(make_checkpoint(g, d, {4, 6, 3.5f, 0}));
  bytes[0] = 'X';
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(Checkpoint, VersionAndTruncationAreRejected) {
  Rng rng(42);
  auto g = Generator<float>::initialized(tiny_config(), rng);
  auto d = Discriminator<float>::initialized(tiny_config(), rng);
  auto bytes = encode_checkpoint(make_checkpoint(g, d, {4, 6, 3.5f, 0}));
  auto versioned = bytes;
  versioned[4] = 7;
  EXPECT_THROW(decode_checkpoint(versioned), FormatError);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(truncated), FormatError);
  EXPECT_THROW(decode_checkpoint(std::span<const std::uint8_t>(bytes.data(), 10)), FormatError);
}

TEST(Checkpoint, WindowLengthMismatchIsConfigError) {
  Rng rng(43);
  ModelConfig c = tiny_config();
  c.window_length = 60;
  auto g = Generator<float>::initialized(c, rng);
  auto d = Discriminator<float>::initialized(c, rng);
  const auto path = temp_path("w60.glsm");
  save_checkpoint(path, make_checkpoint(g, d, {4, 60, 3.5f, 0}));
  ModelConfig expecting = c;
  expecting.window_length = 48;
  EXPECT_THROW(load_checkpoint(path, expecting), ConfigError);
  EXPECT_NO_THROW(load_checkpoint(path, c));
}
