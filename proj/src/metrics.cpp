#include "wfn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <json.hpp>

#include "wfn/errors.hpp"

namespace wfn {

double weight_entropy(const std::vector<double>& values) {
  if (values.empty()) throw DataError("entropy of an empty multiset");
  std::map<double, std::size_t> freqs;
  for (double v : values) ++freqs[v];
  const double n = static_cast<double>(values.size());
  double h = 0.0;
  for (const auto& [value, count] : freqs) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::map<double, HuffmanCode> huffman_codebook(
    const std::map<double, std::size_t>& freqs) {
  if (freqs.empty()) throw DataError("huffman codebook needs at least one symbol");

  std::map<double, HuffmanCode> out;
  if (freqs.size() == 1) {
    out[freqs.begin()->first] = {0, 1};  // single symbol: one bit by convention
    return out;
  }

  // Standard Huffman tree; ties break on insertion order for determinism
  // (symbols enter in ascending value order).
  struct Node {
    std::size_t weight;
    std::size_t seq;
    int left = -1, right = -1;
    double symbol = 0.0;
    bool leaf = false;
  };
  std::vector<Node> nodes;
  using Entry = std::pair<std::pair<std::size_t, std::size_t>, int>;  // ((w, seq), idx)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::size_t seq = 0;
  for (const auto& [value, count] : freqs) {
    nodes.push_back({count, seq, -1, -1, value, true});
    heap.push({{count, seq}, static_cast<int>(nodes.size() - 1)});
    ++seq;
  }
  while (heap.size() > 1) {
    const auto a = heap.top();
    heap.pop();
    const auto b = heap.top();
    heap.pop();
    nodes.push_back({a.first.first + b.first.first, seq, a.second, b.second});
    heap.push({{nodes.back().weight, seq}, static_cast<int>(nodes.size() - 1)});
    ++seq;
  }

  // Depths via iterative walk.
  std::vector<std::pair<int, std::uint8_t>> stack{{heap.top().second, 0}};
  std::map<double, std::uint8_t> lengths;
  while (!stack.empty()) {
    auto [idx, depth] = stack.back();
    stack.pop_back();
    const Node& node = nodes[idx];
    if (node.leaf) {
      lengths[node.symbol] = depth;
    } else {
      stack.push_back({node.left, static_cast<std::uint8_t>(depth + 1)});
      stack.push_back({node.right, static_cast<std::uint8_t>(depth + 1)});
    }
  }

  // Canonical reassignment: codes in (length, value) order.
  std::vector<std::pair<double, std::uint8_t>> ordered(lengths.begin(),
                                                       lengths.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  std::uint32_t code = 0;
  std::uint8_t prev_len = ordered.front().second;
  for (const auto& [value, length] : ordered) {
    code <<= (length - prev_len);
    out[value] = {code, length};
    ++code;
    prev_len = length;
  }
  return out;
}

std::vector<std::size_t> usage_counts(const Network& net) {
  const auto shapes = activation_shapes(net);
  std::vector<std::size_t> counts;
  counts.reserve(net.total_weights());
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& layer = net.layers[li];
    std::size_t per_weight = 1;
    switch (layer.kind) {
      case LayerKind::Dense:
        per_weight = 1;
        break;
      case LayerKind::Conv2d:
        per_weight = shapes[li + 1][1] * shapes[li + 1][2];  // out_h * out_w
        break;
      case LayerKind::Norm: {
        const auto& in = shapes[li];
        per_weight = std::accumulate(in.begin() + 1, in.end(), std::size_t{1},
                                     std::multiplies<>());
        break;
      }
    }
    counts.insert(counts.end(), layer.weight_count(), per_weight);
  }
  return counts;
}

std::uint64_t rep_mixed(const Network& net,
                        const std::map<double, HuffmanCode>& codes) {
  const auto usage = usage_counts(net);
  const auto flat = flatten_weights(net);
  std::uint64_t total = 0;
  for (const auto& entry : flat) {
    const auto it = codes.find(entry.value);
    if (it == codes.end())
      throw DataError("weight value missing from the Huffman codebook");
    total += static_cast<std::uint64_t>(usage[entry.weight_id]) *
             it->second.length;
  }
  return total;
}

std::vector<std::uint8_t> lzw_compress(const std::vector<std::uint8_t>& data) {
  // Fixed 12-bit codes, MSB-first packing, dictionary reset when full.
  constexpr std::size_t kMaxCodes = 1 << 12;

  std::vector<std::uint16_t> codes;
  std::map<std::vector<std::uint8_t>, std::uint16_t> dict;
  auto reset_dict = [&] {
    dict.clear();
    for (std::size_t i = 0; i < 256; ++i)
      dict[{static_cast<std::uint8_t>(i)}] = static_cast<std::uint16_t>(i);
  };
  reset_dict();

  std::vector<std::uint8_t> current;
  for (std::uint8_t byte : data) {
    std::vector<std::uint8_t> extended = current;
    extended.push_back(byte);
    if (dict.count(extended)) {
      current = std::move(extended);
    } else {
      codes.push_back(dict.at(current));
      if (dict.size() >= kMaxCodes)
        reset_dict();
      else
        dict[extended] = static_cast<std::uint16_t>(dict.size());
      current = {byte};
    }
  }
  if (!current.empty()) codes.push_back(dict.at(current));

  std::vector<std::uint8_t> out;
  std::uint32_t bitbuf = 0;
  std::size_t bits = 0;
  for (std::uint16_t code : codes) {
    bitbuf = (bitbuf << 12) | code;
    bits += 12;
    while (bits >= 8) {
      out.push_back(static_cast<std::uint8_t>((bitbuf >> (bits - 8)) & 0xff));
      bits -= 8;
    }
  }
  if (bits > 0)
    out.push_back(static_cast<std::uint8_t>((bitbuf << (8 - bits)) & 0xff));
  return out;
}

ModelSizes model_sizes(const Network& net,
                       const std::map<double, HuffmanCode>& codes) {
  const std::size_t n = net.total_weights();
  ModelSizes sizes;
  sizes.raw_bytes = static_cast<std::uint64_t>(n) * 4;  // 32-bit baseline

  std::uint64_t payload_bits = 0;
  for (const auto& entry : flatten_weights(net)) {
    const auto it = codes.find(entry.value);
    if (it == codes.end())
      throw DataError("weight value missing from the Huffman codebook");
    payload_bits += it->second.length;
  }
  sizes.huffman_payload_bytes = (payload_bits + 7) / 8;
  // Codebook storage: 32-bit value plus one length byte per symbol.
  sizes.huffman_codebook_bytes = static_cast<std::uint64_t>(codes.size()) * 5;

  // LZW input: per-weight index into the sorted unique-value table, u16 LE.
  std::vector<double> unique;
  unique.reserve(codes.size());
  for (const auto& [value, code] : codes) unique.push_back(value);
  if (unique.size() > 65535) throw DataError("too many unique values for LZW index stream");
  std::vector<std::uint8_t> stream;
  stream.reserve(n * 2);
  for (const auto& entry : flatten_weights(net)) {
    const auto idx = static_cast<std::uint16_t>(
        std::lower_bound(unique.begin(), unique.end(), entry.value) -
        unique.begin());
    stream.push_back(static_cast<std::uint8_t>(idx & 0xff));
    stream.push_back(static_cast<std::uint8_t>(idx >> 8));
  }
  sizes.lzw_bytes = lzw_compress(stream).size();
  return sizes;
}

namespace {

const char* subset_name(Subset s) {
  switch (s) {
    case Subset::Full: return "full";
    case Subset::NoNorm: return "no_norm";
    case Subset::NoNormFirstLast: return "no_norm_first_last";
  }
  return "?";
}

std::vector<double> subset_values(const Network& net, Subset subset) {
  std::vector<double> values;
  for (std::size_t li = 0; li < net.layers.size(); ++li)
    if (net.layer_in_subset(li, subset))
      values.insert(values.end(), net.layers[li].weights.begin(),
                    net.layers[li].weights.end());
  return values;
}

std::size_t unique_count(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  return std::unique(sorted.begin(), sorted.end()) - sorted.begin();
}

}  // namespace

MetricsReport build_report(const Network& baseline, const Network& compressed,
                           const FixingState* state) {
  if (baseline.layers.size() != compressed.layers.size())
    throw DataError("baseline and compressed networks differ in topology");
  for (std::size_t li = 0; li < baseline.layers.size(); ++li) {
    if (baseline.layers[li].kind != compressed.layers[li].kind ||
        baseline.layers[li].shape != compressed.layers[li].shape)
      throw DataError("baseline and compressed networks differ in topology");
  }

  MetricsReport report;
  const std::vector<double> all = subset_values(compressed, Subset::Full);
  report.entropy_bits = weight_entropy(all);

  for (Subset s : {Subset::Full, Subset::NoNorm, Subset::NoNormFirstLast}) {
    const auto values = subset_values(compressed, s);
    report.unique_counts[subset_name(s)] = unique_count(values);
    report.entropy_by_subset[subset_name(s)] =
        values.empty() ? 0.0 : weight_entropy(values);
  }

  std::map<double, std::size_t> freqs;
  for (double v : all) ++freqs[v];
  report.huffman = huffman_codebook(freqs);
  report.rep_mixed_bits = rep_mixed(compressed, report.huffman);
  report.sizes = model_sizes(compressed, report.huffman);

  const std::uint64_t baseline_raw =
      static_cast<std::uint64_t>(baseline.total_weights()) * 4;
  const std::uint64_t compressed_bytes =
      report.sizes.huffman_payload_bytes + report.sizes.huffman_codebook_bytes;
  report.compression_ratio = compressed_bytes > 0
                                 ? static_cast<double>(baseline_raw) /
                                       static_cast<double>(compressed_bytes)
                                 : 0.0;

  std::uint64_t total_bits = 0;
  for (const auto& [value, count] : freqs)
    total_bits += static_cast<std::uint64_t>(count) *
                  report.huffman.at(value).length;
  report.avg_code_length =
      static_cast<double>(total_bits) / static_cast<double>(all.size());

  report.top_weights.assign(freqs.begin(), freqs.end());
  std::sort(report.top_weights.begin(), report.top_weights.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second > b.second
                                          : a.first < b.first;
            });

  if (state) {
    for (const auto& a : state->assignments)
      if (a) ++report.order_histogram[a->omega];
  }
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["schema"] = "wfn-report/1";
  j["entropy_bits"] = entropy_bits;
  j["unique_counts"] = unique_counts;
  j["entropy_by_subset"] = entropy_by_subset;
  j["rep_mixed_bits"] = rep_mixed_bits;
  j["compression_ratio"] = compression_ratio;
  j["avg_code_length"] = avg_code_length;
  j["model_size_bytes"] = {{"raw", sizes.raw_bytes},
                           {"huffman_payload", sizes.huffman_payload_bytes},
                           {"huffman_codebook", sizes.huffman_codebook_bytes},
                           {"lzw", sizes.lzw_bytes}};
  j["huffman"] = nlohmann::json::array();
  for (const auto& [value, code] : huffman)
    j["huffman"].push_back({{"value", value}, {"length", code.length}});
  j["top_weights"] = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(top_weights.size(), 15); ++i)
    j["top_weights"].push_back(
        {{"value", top_weights[i].first}, {"count", top_weights[i].second}});
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [omega, count] : order_histogram)
    hist[std::to_string(omega)] = count;
  j["order_histogram"] = hist;
  return j.dump(2);
}

}  // namespace wfn
