#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wfn {

enum class LayerKind { Dense, Conv2d, Norm };

enum class LayerTag { First, Last, Norm };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);
std::string to_string(LayerTag tag);
LayerTag layer_tag_from_string(const std::string& s);

// One layer of a network. Shapes:
//   dense:  {out, in}
//   conv2d: {out_ch, in_ch, kh, kw}   (stride 1, valid padding)
//   norm:   {channels}                (per-channel affine y = g*x + b)
// Weights are stored flat in row-major order of `shape`.
struct Layer {
  LayerKind kind = LayerKind::Dense;
  std::vector<std::size_t> shape;
  std::vector<double> weights;
  std::vector<double> bias;  // empty when the layer has no bias
  std::set<LayerTag> tags;

  std::size_t weight_count() const;
  bool has_bias() const { return !bias.empty(); }
  std::size_t expected_bias_count() const;
};

// Weight subsets used for per-subset metrics.
enum class Subset { Full, NoNorm, NoNormFirstLast };

// A whole network plus its fixing state. fix_mask/fixed_value_index are
// indexed by canonical weight id: layer order, then row-major within the
// layer. Biases are trainable but never fixed and carry no weight id.
struct Network {
  std::vector<Layer> layers;
  std::vector<std::size_t> input_shape;  // {features} or {ch, h, w}
  std::vector<bool> fix_mask;
  std::vector<std::int32_t> fixed_value_index;  // -1 where free
  std::vector<double> codebook;                 // centre values referenced above

  std::size_t total_weights() const;
  void validate() const;  // throws DataError on any invariant violation

  double& weight_at(std::size_t weight_id);
  double weight_at(std::size_t weight_id) const;
  // Maps a weight id back to (layer index, offset within layer).
  std::pair<std::size_t, std::size_t> locate(std::size_t weight_id) const;

  // True when the layer participates in the given subset.
  bool layer_in_subset(std::size_t layer_index, Subset subset) const;
};

struct WeightEntry {
  std::size_t weight_id;
  double value;
};

// Canonical flattening: layer order, then row-major. Deterministic.
std::vector<WeightEntry> flatten_weights(const Network& net);

// Activation shape before each layer plus the output shape (size L+1),
// starting from net.input_shape. Throws DataError on a shape mismatch.
std::vector<std::vector<std::size_t>> activation_shapes(const Network& net);

// Bit-exact serialization, format documented in README (.wfnm files).
void save_model(const Network& net, const std::string& path);
Network load_model(const std::string& path);

std::vector<std::uint8_t> serialize_model(const Network& net);
Network deserialize_model(const std::vector<std::uint8_t>& bytes);

}  // namespace wfn
