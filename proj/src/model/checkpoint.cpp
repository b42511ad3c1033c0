#include "mguard/model/checkpoint.hpp"

#include "mguard/binary_io.hpp"
#include "mguard/error.hpp"

#include <algorithm>
#include <limits>

namespace mguard {

const Tensor* ModelCheckpoint::find(const std::string& name) const {
  auto it = std::find_if(tensors.begin(), tensors.end(), [&](const auto& entry) { return entry.first == name; });
  return it == tensors.end() ? nullptr : &it->second;
}

const Tensor& ModelCheckpoint::at(const std::string& name) const {
  if (const Tensor* t = find(name)) return *t;
  throw FormatError("checkpoint has no tensor named '" + name + "'");
}

void ModelCheckpoint::put(const std::string& name, Tensor tensor) {
  auto it = std::find_if(tensors.begin(), tensors.end(), [&](const auto& entry) { return entry.first == name; });
  if (it != tensors.end()) {
    it->second = std::move(tensor);
  } else {
    tensors.emplace_back(name, std::move(tensor));
  }
}

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& checkpoint) {
  ByteWriter w;
  w.put_bytes(std::string_view(kCheckpointMagic, 4));
  w.put(kCheckpointVersion);
  w.put(checkpoint.config.latent_dim);
  w.put(checkpoint.config.window_length);
  w.put(checkpoint.config.clip_c);
  w.put(checkpoint.config.seed);
  w.put(static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& [name, tensor] : checkpoint.tensors) {
    tensor.validate();
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw FormatError("tensor name too long: " + name);
    if (tensor.rank() > std::numeric_limits<std::uint8_t>::max()) throw FormatError("tensor rank too large: " + name);
    w.put(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name);
    w.put(static_cast<std::uint8_t>(tensor.rank()));
    for (std::uint32_t d : tensor.dims) w.put(d);
    w.put_floats(tensor.data);
  }
  return std::move(w.bytes());
}

ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "checkpoint");
  const std::string magic = r.get_string(4);
  if (magic != std::string_view(kCheckpointMagic, 4)) {
    throw FormatError("checkpoint magic mismatch: expected 'GLSM', found '" + magic + "'");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  ModelCheckpoint ckpt;
  ckpt.config.latent_dim = r.get<std::uint32_t>();
  ckpt.config.window_length = r.get<std::uint32_t>();
  ckpt.config.clip_c = r.get<float>();
  ckpt.config.seed = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_length = r.get<std::uint16_t>();
    std::string name = r.get_string(name_length);
    Tensor tensor;
    const auto rank = r.get<std::uint8_t>();
    for (std::uint8_t k = 0; k < rank; ++k) tensor.dims.push_back(r.get<std::uint32_t>());
    const std::size_t n = tensor.element_count();
    if (n > (bytes.size() - r.position()) / sizeof(float)) {
      throw FormatError("checkpoint: truncated data for tensor '" + name + "'");
    }
    tensor.data.resize(n);
    r.get_floats(tensor.data);
    ckpt.tensors.emplace_back(std::move(name), std::move(tensor));
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes after last tensor");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint) {
  write_file_bytes(path, encode_checkpoint(checkpoint));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

void check_compatible(const CheckpointConfig& found, const ModelConfig& expected) {
  if (found.window_length != static_cast<std::uint32_t>(expected.window_length)) {
    throw ConfigError("checkpoint window_length " + std::to_string(found.window_length) +
                      " does not match configured window_length " + std::to_string(expected.window_length));
  }
  if (found.latent_dim != static_cast<std::uint32_t>(expected.latent_dim)) {
    throw ConfigError("checkpoint latent_dim " + std::to_string(found.latent_dim) +
                      " does not match configured latent_dim " + std::to_string(expected.latent_dim));
  }
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  auto ckpt = load_checkpoint(path);
  check_compatible(ckpt.config, expected);
  return ckpt;
}

ModelCheckpoint make_checkpoint(Generator<float>& generator, Discriminator<float>& discriminator,
                                const CheckpointConfig& config) {
  ModelCheckpoint ckpt;
  ckpt.config = config;
  auto add = [&](const std::vector<ParamRef<float>>& refs) {
    for (const auto& p : refs) ckpt.put(p.name, Tensor::from_matrix(p.map(), p.cols == 1 && p.name.ends_with(".b")));
  };
  add(generator.parameters());
  add(discriminator.parameters());
  return ckpt;
}

namespace {

MatrixF matrix_of(const ModelCheckpoint& ckpt, const std::string& name) { return ckpt.at(name).to_matrix(); }

LstmLayer<float> lstm_of(const ModelCheckpoint& ckpt, const std::string& prefix) {
  LstmLayer<float> layer{matrix_of(ckpt, prefix + ".W"), matrix_of(ckpt, prefix + ".U"),
                         matrix_of(ckpt, prefix + ".b")};
  layer.validate();
  return layer;
}

DenseLayer<float> dense_of(const ModelCheckpoint& ckpt, const std::string& prefix) {
  DenseLayer<float> layer{matrix_of(ckpt, prefix + ".W"), matrix_of(ckpt, prefix + ".b")};
  expect_dim((prefix + " bias rows").c_str(), layer.W.rows(), layer.b.rows());
  return layer;
}

}  // namespace

Generator<float> restore_generator(const ModelCheckpoint& checkpoint) {
  Generator<float> g;
  for (std::size_t k = 0; checkpoint.find("generator.lstm" + std::to_string(k) + ".W") != nullptr; ++k) {
    g.lstm.push_back(lstm_of(checkpoint, "generator.lstm" + std::to_string(k)));
    if (k > 0) expect_dim("generator layer input", g.lstm[k - 1].hidden_size(), g.lstm[k].input_size());
  }
  if (g.lstm.empty()) throw FormatError("checkpoint has no generator layers");
  expect_dim("generator latent_dim", checkpoint.config.latent_dim, g.lstm.front().input_size());
  g.out = dense_of(checkpoint, "generator.out");
  expect_dim("generator output input", g.lstm.back().hidden_size(), g.out.input_size());
  g.window_length = checkpoint.config.window_length;
  return g;
}

Discriminator<float> restore_discriminator(const ModelCheckpoint& checkpoint) {
  Discriminator<float> d{lstm_of(checkpoint, "discriminator.lstm"), dense_of(checkpoint, "discriminator.out")};
  expect_dim("discriminator input size", 1, d.lstm.input_size());
  expect_dim("discriminator output input", d.lstm.hidden_size(), d.out.input_size());
  return d;
}

ModelConfig model_config_of(const ModelCheckpoint& checkpoint) {
  const auto g = restore_generator(checkpoint);
  const auto d = restore_discriminator(checkpoint);
  ModelConfig config;
  config.latent_dim = static_cast<int>(checkpoint.config.latent_dim);
  config.window_length = static_cast<int>(checkpoint.config.window_length);
  config.generator_hidden.clear();
  for (const auto& layer : g.lstm) config.generator_hidden.push_back(static_cast<int>(layer.hidden_size()));
  config.discriminator_hidden = static_cast<int>(d.hidden_size());
  return config;
}

}  // namespace mguard
