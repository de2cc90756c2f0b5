#include "wfn/model.hpp"

#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "wfn/errors.hpp"

namespace wfn {

namespace {

constexpr char kMagic[4] = {'W', 'F', 'N', 'M'};
constexpr std::uint8_t kVersion = 1;

std::vector<std::size_t> layer_offsets(const Network& net) {
  std::vector<std::size_t> offsets;
  offsets.reserve(net.layers.size() + 1);
  std::size_t acc = 0;
  offsets.push_back(0);
  for (const auto& layer : net.layers) {
    acc += layer.weight_count();
    offsets.push_back(acc);
  }
  return offsets;
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::Norm: return "norm";
  }
  throw DataError("unknown layer kind");
}

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "dense") return LayerKind::Dense;
  if (s == "conv2d") return LayerKind::Conv2d;
  if (s == "norm") return LayerKind::Norm;
  throw FormatError("unknown layer kind '" + s + "'");
}

std::string to_string(LayerTag tag) {
  switch (tag) {
    case LayerTag::First: return "first";
    case LayerTag::Last: return "last";
    case LayerTag::Norm: return "norm";
  }
  throw DataError("unknown layer tag");
}

LayerTag layer_tag_from_string(const std::string& s) {
  if (s == "first") return LayerTag::First;
  if (s == "last") return LayerTag::Last;
  if (s == "norm") return LayerTag::Norm;
  throw FormatError("unknown layer tag '" + s + "'");
}

std::size_t Layer::weight_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::size_t Layer::expected_bias_count() const {
  switch (kind) {
    case LayerKind::Dense: return shape.at(0);
    case LayerKind::Conv2d: return shape.at(0);
    case LayerKind::Norm: return shape.at(0);
  }
  return 0;
}

std::size_t Network::total_weights() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight_count();
  return n;
}

void Network::validate() const {
  std::size_t first_tags = 0, last_tags = 0;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer& layer = layers[li];
    const std::size_t expected_dims =
        layer.kind == LayerKind::Dense ? 2 : layer.kind == LayerKind::Conv2d ? 4 : 1;
    if (layer.shape.size() != expected_dims)
      throw DataError("layer " + std::to_string(li) + ": bad shape rank");
    if (layer.weights.size() != layer.weight_count())
      throw DataError("layer " + std::to_string(li) +
                      ": weight count does not match shape");
    if (layer.has_bias() && layer.bias.size() != layer.expected_bias_count())
      throw DataError("layer " + std::to_string(li) + ": bad bias length");
    if (layer.tags.count(LayerTag::Norm) && layer.kind != LayerKind::Norm)
      throw DataError("layer " + std::to_string(li) +
                      ": norm tag on non-norm layer");
    if (layer.kind == LayerKind::Norm && !layer.tags.count(LayerTag::Norm))
      throw DataError("layer " + std::to_string(li) +
                      ": norm layer missing norm tag");
    first_tags += layer.tags.count(LayerTag::First);
    last_tags += layer.tags.count(LayerTag::Last);
  }
  if (!layers.empty() && (first_tags != 1 || last_tags != 1))
    throw DataError("exactly one layer must be tagged first and one last");
  const std::size_t n = total_weights();
  if (fix_mask.size() != n || fixed_value_index.size() != n)
    throw DataError("fix mask size does not match weight count");
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_index = fixed_value_index[i] >= 0;
    if (fix_mask[i] != has_index)
      throw DataError("fixed_value_index must be present exactly where fixed");
    if (has_index &&
        static_cast<std::size_t>(fixed_value_index[i]) >= codebook.size())
      throw DataError("fixed_value_index out of codebook range");
  }
}

std::pair<std::size_t, std::size_t> Network::locate(std::size_t weight_id) const {
  std::size_t acc = 0;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const std::size_t count = layers[li].weight_count();
    if (weight_id < acc + count) return {li, weight_id - acc};
    acc += count;
  }
  throw DataError("weight id out of range");
}

double& Network::weight_at(std::size_t weight_id) {
  auto [li, off] = locate(weight_id);
  return layers[li].weights[off];
}

double Network::weight_at(std::size_t weight_id) const {
  auto [li, off] = locate(weight_id);
  return layers[li].weights[off];
}

bool Network::layer_in_subset(std::size_t layer_index, Subset subset) const {
  const Layer& layer = layers.at(layer_index);
  switch (subset) {
    case Subset::Full:
      return true;
    case Subset::NoNorm:
      return layer.kind != LayerKind::Norm;
    case Subset::NoNormFirstLast:
      return layer.kind != LayerKind::Norm &&
             !layer.tags.count(LayerTag::First) &&
             !layer.tags.count(LayerTag::Last);
  }
  return true;
}

std::vector<std::vector<std::size_t>> activation_shapes(const Network& net) {
  auto dim_product = [](const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  };
  std::vector<std::vector<std::size_t>> shapes;
  std::vector<std::size_t> cur = net.input_shape;
  shapes.push_back(cur);
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& layer = net.layers[li];
    switch (layer.kind) {
      case LayerKind::Dense:
        if (dim_product(cur) != layer.shape[1])
          throw DataError("layer " + std::to_string(li) +
                          ": dense input width mismatch");
        cur = {layer.shape[0]};
        break;
      case LayerKind::Conv2d:
        if (cur.size() != 3 || cur[0] != layer.shape[1] ||
            cur[1] < layer.shape[2] || cur[2] < layer.shape[3])
          throw DataError("layer " + std::to_string(li) +
                          ": conv input shape mismatch");
        cur = {layer.shape[0], cur[1] - layer.shape[2] + 1,
               cur[2] - layer.shape[3] + 1};
        break;
      case LayerKind::Norm:
        if (cur.empty() || cur[0] != layer.shape[0])
          throw DataError("layer " + std::to_string(li) +
                          ": norm channel mismatch");
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

std::vector<WeightEntry> flatten_weights(const Network& net) {
  std::vector<WeightEntry> out;
  out.reserve(net.total_weights());
  std::size_t id = 0;
  for (const auto& layer : net.layers)
    for (double w : layer.weights) out.push_back({id++, w});
  return out;
}

namespace {

template <typename T>
void put_raw(std::vector<std::uint8_t>& buf, T value) {
  // Little-endian write, byte by byte.
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf.push_back(static_cast<std::uint8_t>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& buf, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  put_raw(buf, bits);
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw FormatError("truncated model file");
  }
  template <typename T>
  T get_raw() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(bits);
  }
  double get_f64() {
    const std::uint64_t bits = get_raw<std::uint64_t>();
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Network& net) {
  net.validate();
  nlohmann::json manifest;
  manifest["input_shape"] = net.input_shape;
  manifest["layers"] = nlohmann::json::array();
  for (const auto& layer : net.layers) {
    nlohmann::json jl;
    jl["kind"] = to_string(layer.kind);
    jl["shape"] = layer.shape;
    jl["has_bias"] = layer.has_bias();
    std::vector<std::string> tags;
    for (LayerTag t : layer.tags) tags.push_back(to_string(t));
    jl["tags"] = tags;
    manifest["layers"].push_back(jl);
  }
  const std::string mtext = manifest.dump();

  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  buf.push_back(kVersion);
  put_raw(buf, static_cast<std::uint32_t>(mtext.size()));
  buf.insert(buf.end(), mtext.begin(), mtext.end());
  for (const auto& layer : net.layers) {
    for (double w : layer.weights) put_f64(buf, w);
    for (double b : layer.bias) put_f64(buf, b);
  }
  for (bool fixed : net.fix_mask) buf.push_back(fixed ? 1 : 0);
  for (std::int32_t idx : net.fixed_value_index) put_raw(buf, static_cast<std::uint32_t>(idx));
  put_raw(buf, static_cast<std::uint32_t>(net.codebook.size()));
  for (double c : net.codebook) put_f64(buf, c);
  return buf;
}

Network deserialize_model(const std::vector<std::uint8_t>& bytes) {
  Reader r{bytes};
  r.need(5);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad magic bytes, not a model file");
  r.pos = 4;
  const auto version = r.get_raw<std::uint8_t>();
  if (version != kVersion)
    throw FormatError("unsupported model version " + std::to_string(version));
  const auto mlen = r.get_raw<std::uint32_t>();
  r.need(mlen);
  const std::string mtext(bytes.begin() + r.pos, bytes.begin() + r.pos + mlen);
  r.pos += mlen;

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mtext);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad manifest: ") + e.what());
  }

  Network net;
  try {
    net.input_shape = manifest.at("input_shape").get<std::vector<std::size_t>>();
    for (const auto& jl : manifest.at("layers")) {
      Layer layer;
      layer.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
      layer.shape = jl.at("shape").get<std::vector<std::size_t>>();
      for (const auto& t : jl.at("tags"))
        layer.tags.insert(layer_tag_from_string(t.get<std::string>()));
      layer.weights.resize(layer.weight_count());
      if (jl.at("has_bias").get<bool>())
        layer.bias.resize(layer.expected_bias_count());
      net.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad manifest: ") + e.what());
  }

  for (auto& layer : net.layers) {
    for (auto& w : layer.weights) w = r.get_f64();
    for (auto& b : layer.bias) b = r.get_f64();
  }
  const std::size_t n = net.total_weights();
  net.fix_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) net.fix_mask[i] = r.get_raw<std::uint8_t>() != 0;
  net.fixed_value_index.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    net.fixed_value_index[i] = static_cast<std::int32_t>(r.get_raw<std::uint32_t>());
  const auto k = r.get_raw<std::uint32_t>();
  net.codebook.resize(k);
  for (auto& c : net.codebook) c = r.get_f64();
  if (r.pos != bytes.size()) throw FormatError("trailing bytes after model data");
  net.validate();
  return net;
}

void save_model(const Network& net, const std::string& path) {
  const auto bytes = serialize_model(net);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

Network load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace wfn
