#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "bcdlog/errors.hpp"
#include "bcdlog/model.hpp"
#include "json.hpp"

namespace bcdlog {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'B', 'C', 'D', 'L', 'O', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvBasis = 0xcbf29ce484222325ULL;

json config_to_json(const ModelConfig& c) {
  return json{{"embed_dim", c.embed_dim},       {"attn_heads", c.attn_heads},
              {"attn_layers", c.attn_layers},   {"mlp_hidden", c.mlp_hidden},
              {"conv_filters", c.conv_filters}, {"conv_kernel", c.conv_kernel},
              {"conv_stride", c.conv_stride},   {"lstm_hidden", c.lstm_hidden},
              {"num_classes", c.num_classes},   {"dropout", c.dropout},
              {"pos_dropout", c.pos_dropout},   {"max_seq_len", c.max_seq_len}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.attn_heads = j.at("attn_heads").get<std::size_t>();
  c.attn_layers = j.at("attn_layers").get<std::size_t>();
  c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
  c.conv_filters = j.at("conv_filters").get<std::size_t>();
  c.conv_kernel = j.at("conv_kernel").get<std::size_t>();
  c.conv_stride = j.at("conv_stride").get<std::size_t>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.pos_dropout = j.at("pos_dropout").get<double>();
  c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  return c;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error("checkpoint_corrupt", "corrupt checkpoint: " + what);
}

template <typename V>
void put(std::string& out, V value) {
  char buf[sizeof(V)];
  std::memcpy(buf, &value, sizeof(V));
  out.append(buf, sizeof(V));
}

template <typename V>
V take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(V) > in.size()) corrupt("truncated file");
  V value;
  std::memcpy(&value, in.data() + pos, sizeof(V));
  pos += sizeof(V);
  return value;
}

}  // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  json header;
  header["format"] = "bcdlog-checkpoint";
  header["dtype"] = "float32";
  header["config"] = config_to_json(model.config());
  json symbols = json::array();
  for (char32_t cp : model.vocab.symbols()) symbols.push_back(static_cast<std::uint32_t>(cp));
  header["vocabulary"] = symbols;
  json tensors = json::array();
  for (const auto& t : model.tagger.params().layout().tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  }
  header["tensors"] = tensors;
  const std::string header_text = header.dump();
  const auto values = model.tagger.params().values();

  std::string body;
  body.append(kMagic, sizeof(kMagic));
  put<std::uint32_t>(body, kVersion);
  put<std::uint64_t>(body, header_text.size());
  body += header_text;
  put<std::uint64_t>(body, values.size());
  body.append(reinterpret_cast<const char*>(values.data()), values.size_bytes());
  put<std::uint64_t>(body, fnv1a(kFnvBasis, body.data(), body.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io", "cannot open '" + path.string() + "' for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw Error("io", "failed writing '" + path.string() + "'");
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open checkpoint '" + path.string() + "'");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (data.size() < sizeof(kMagic) || std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    corrupt("bad magic");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = take<std::uint32_t>(data, pos);
  if (version != kVersion) {
    throw Error("checkpoint_version", "unsupported checkpoint version " + std::to_string(version) +
                                          " (expected " + std::to_string(kVersion) + ")");
  }
  if (data.size() < pos + sizeof(std::uint64_t) * 3) corrupt("truncated file");
  const std::size_t stored_sum_at = data.size() - sizeof(std::uint64_t);
  std::size_t sum_pos = stored_sum_at;
  const auto stored_sum = take<std::uint64_t>(data, sum_pos);
  if (fnv1a(kFnvBasis, data.data(), stored_sum_at) != stored_sum) corrupt("checksum mismatch");

  const auto header_len = take<std::uint64_t>(data, pos);
  if (pos + header_len > stored_sum_at) corrupt("header overruns file");
  json header;
  try {
    header = json::parse(data.substr(pos, header_len));
  } catch (const json::exception& e) {
    corrupt(std::string("header is not JSON: ") + e.what());
  }
  pos += header_len;

  ModelConfig config;
  std::vector<char32_t> symbols;
  try {
    if (header.at("dtype") != "float32") corrupt("unsupported dtype");
    config = config_from_json(header.at("config"));
    for (const auto& cp : header.at("vocabulary")) symbols.push_back(cp.get<std::uint32_t>());
  } catch (const json::exception& e) {
    corrupt(std::string("malformed header: ") + e.what());
  }
  config.validate();

  ParameterSet<float> params(config);
  const auto& tensors = header.at("tensors");
  const auto expected = params.layout().tensors();
  if (tensors.size() != expected.size()) corrupt("tensor table does not match config");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (tensors[i].at("name") != expected[i].name ||
        tensors[i].at("rows").get<std::size_t>() != expected[i].rows ||
        tensors[i].at("cols").get<std::size_t>() != expected[i].cols) {
      corrupt("tensor '" + std::string(expected[i].name) + "' has an unexpected shape");
    }
  }
  const auto count = take<std::uint64_t>(data, pos);
  if (count != params.size() || pos + count * sizeof(float) != stored_sum_at) {
    corrupt("parameter payload size mismatch");
  }
  std::memcpy(params.values().data(), data.data() + pos, count * sizeof(float));

  return Model{Vocabulary::from_symbols(std::move(symbols)), Tagger<float>(config, std::move(params))};
}

}  // namespace bcdlog
