#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wfn/fixer.hpp"
#include "wfn/model.hpp"

namespace wfn {

// Shannon entropy in bits of the empirical value distribution.
double weight_entropy(const std::vector<double>& values);

// Canonical Huffman code: lengths from the Huffman tree, codes reassigned
// in (length, value) order. A single symbol gets length 1.
struct HuffmanCode {
  std::uint32_t bits = 0;
  std::uint8_t length = 0;
};

std::map<double, HuffmanCode> huffman_codebook(
    const std::map<double, std::size_t>& freqs);

// Per-weight inference usage counts: dense 1, conv2d out_h*out_w,
// norm channel-map size. Indexed by canonical weight id.
std::vector<std::size_t> usage_counts(const Network& net);

// Sum over weights of usage count * Huffman code length, in bits.
std::uint64_t rep_mixed(const Network& net,
                        const std::map<double, HuffmanCode>& codes);

struct ModelSizes {
  std::uint64_t raw_bytes = 0;      // 32 bits per weight
  std::uint64_t huffman_payload_bytes = 0;
  std::uint64_t huffman_codebook_bytes = 0;
  std::uint64_t lzw_bytes = 0;
};

ModelSizes model_sizes(const Network& net,
                       const std::map<double, HuffmanCode>& codes);

// Fixed 12-bit LZW over a byte stream, dictionary reset on overflow.
// Returns the packed code stream (documented byte-exactly in README).
std::vector<std::uint8_t> lzw_compress(const std::vector<std::uint8_t>& data);

struct MetricsReport {
  double entropy_bits = 0.0;
  std::map<std::string, std::size_t> unique_counts;    // full / no_norm / no_norm_first_last
  std::map<std::string, double> entropy_by_subset;
  std::map<double, HuffmanCode> huffman;
  std::uint64_t rep_mixed_bits = 0;
  double compression_ratio = 0.0;
  ModelSizes sizes;
  std::vector<std::pair<double, std::size_t>> top_weights;  // frequency sorted
  std::map<std::size_t, std::size_t> order_histogram;       // omega -> weights
  double avg_code_length = 0.0;

  std::string to_json() const;
};

MetricsReport build_report(const Network& baseline, const Network& compressed,
                           const FixingState* state = nullptr);

}  // namespace wfn
