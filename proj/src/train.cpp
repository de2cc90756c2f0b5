#include "wfn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "wfn/clusters.hpp"
#include "wfn/errors.hpp"

namespace wfn {

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
}

namespace {

std::size_t dim_product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

void layer_forward(const Layer& layer, const std::vector<std::size_t>& in_shape,
                   const double* in, double* out) {
  switch (layer.kind) {
    case LayerKind::Dense: {
      const std::size_t rows = layer.shape[0], cols = layer.shape[1];
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = layer.has_bias() ? layer.bias[r] : 0.0;
        const double* wrow = layer.weights.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wrow[c] * in[c];
        out[r] = acc;
      }
      break;
    }
    case LayerKind::Conv2d: {
      const std::size_t oc_n = layer.shape[0], ic_n = layer.shape[1];
      const std::size_t kh = layer.shape[2], kw = layer.shape[3];
      const std::size_t h = in_shape[1], w = in_shape[2];
      const std::size_t oh = h - kh + 1, ow = w - kw + 1;
      for (std::size_t oc = 0; oc < oc_n; ++oc)
        for (std::size_t oy = 0; oy < oh; ++oy)
          for (std::size_t ox = 0; ox < ow; ++ox) {
            double acc = layer.has_bias() ? layer.bias[oc] : 0.0;
            for (std::size_t ic = 0; ic < ic_n; ++ic)
              for (std::size_t ky = 0; ky < kh; ++ky)
                for (std::size_t kx = 0; kx < kw; ++kx)
                  acc += layer.weights[((oc * ic_n + ic) * kh + ky) * kw + kx] *
                         in[(ic * h + oy + ky) * w + ox + kx];
            out[(oc * oh + oy) * ow + ox] = acc;
          }
      break;
    }
    case LayerKind::Norm: {
      const std::size_t channels = layer.shape[0];
      const std::size_t map = dim_product(in_shape) / channels;
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t i = 0; i < map; ++i)
          out[c * map + i] = layer.weights[c] * in[c * map + i] +
                             (layer.has_bias() ? layer.bias[c] : 0.0);
      break;
    }
  }
}

// Accumulates weight/bias gradients and the input gradient for one sample.
void layer_backward(const Layer& layer, const std::vector<std::size_t>& in_shape,
                    const double* in, const double* dout, double* dw, double* db,
                    double* din) {
  switch (layer.kind) {
    case LayerKind::Dense: {
      const std::size_t rows = layer.shape[0], cols = layer.shape[1];
      for (std::size_t c = 0; c < cols; ++c) din[c] = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        const double g = dout[r];
        if (db) db[r] += g;
        const double* wrow = layer.weights.data() + r * cols;
        double* dwrow = dw + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          dwrow[c] += g * in[c];
          din[c] += wrow[c] * g;
        }
      }
      break;
    }
    case LayerKind::Conv2d: {
      const std::size_t oc_n = layer.shape[0], ic_n = layer.shape[1];
      const std::size_t kh = layer.shape[2], kw = layer.shape[3];
      const std::size_t h = in_shape[1], w = in_shape[2];
      const std::size_t oh = h - kh + 1, ow = w - kw + 1;
      std::fill(din, din + dim_product(in_shape), 0.0);
      for (std::size_t oc = 0; oc < oc_n; ++oc)
        for (std::size_t oy = 0; oy < oh; ++oy)
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const double g = dout[(oc * oh + oy) * ow + ox];
            if (db) db[oc] += g;
            for (std::size_t ic = 0; ic < ic_n; ++ic)
              for (std::size_t ky = 0; ky < kh; ++ky)
                for (std::size_t kx = 0; kx < kw; ++kx) {
                  const std::size_t wi = ((oc * ic_n + ic) * kh + ky) * kw + kx;
                  const std::size_t ii = (ic * h + oy + ky) * w + ox + kx;
                  dw[wi] += g * in[ii];
                  din[ii] += layer.weights[wi] * g;
                }
          }
      break;
    }
    case LayerKind::Norm: {
      const std::size_t channels = layer.shape[0];
      const std::size_t map = dim_product(in_shape) / channels;
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t i = 0; i < map; ++i) {
          const double g = dout[c * map + i];
          dw[c] += g * in[c * map + i];
          if (db) db[c] += g;
          din[c * map + i] = layer.weights[c] * g;
        }
      break;
    }
  }
}

void softmax_row(const double* logits, std::size_t k, double* probs) {
  const double m = *std::max_element(logits, logits + k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    probs[i] = std::exp(logits[i] - m);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < k; ++i) probs[i] /= sum;
}

}  // namespace

ForwardCache forward(const Network& net, const Batch& batch) {
  const auto shapes = activation_shapes(net);
  if (batch.features != dim_product(net.input_shape))
    throw DataError("batch feature width does not match network input");

  const std::size_t L = net.layers.size();
  ForwardCache cache;
  cache.pre.resize(L);
  cache.post.resize(L);
  for (std::size_t li = 0; li < L; ++li) {
    cache.pre[li].resize(batch.rows * dim_product(shapes[li + 1]));
    cache.post[li].resize(cache.pre[li].size());
  }

  for (std::size_t row = 0; row < batch.rows; ++row) {
    const double* cur = batch.x.data() + row * batch.features;
    for (std::size_t li = 0; li < L; ++li) {
      const std::size_t out_n = dim_product(shapes[li + 1]);
      double* pre = cache.pre[li].data() + row * out_n;
      layer_forward(net.layers[li], shapes[li], cur, pre);
      double* post = cache.post[li].data() + row * out_n;
      const bool last = li + 1 == L;
      for (std::size_t i = 0; i < out_n; ++i)
        post[i] = last ? pre[i] : std::max(0.0, pre[i]);
      cur = post;
    }
  }
  cache.logits = cache.post.empty() ? std::vector<double>{} : cache.post.back();
  return cache;
}

double loss_ce(const std::vector<double>& logits, const std::vector<int>& labels,
               std::size_t classes) {
  const std::size_t rows = labels.size();
  double total = 0.0;
  std::vector<double> probs(classes);
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= classes)
      throw DataError("label out of range");
    softmax_row(logits.data() + r * classes, classes, probs.data());
    total += -std::log(std::max(probs[label], 1e-300));
  }
  return total / static_cast<double>(rows);
}

double ce_loss_and_grads(const Network& net, const Batch& batch, Gradients& grads) {
  const auto shapes = activation_shapes(net);
  const std::size_t L = net.layers.size();
  const std::size_t classes = dim_product(shapes.back());

  grads.weights.assign(L, {});
  grads.bias.assign(L, {});
  for (std::size_t li = 0; li < L; ++li) {
    grads.weights[li].assign(net.layers[li].weights.size(), 0.0);
    grads.bias[li].assign(net.layers[li].bias.size(), 0.0);
  }

  const ForwardCache cache = forward(net, batch);
  const double loss = loss_ce(cache.logits, batch.y, classes);
  const double inv_rows = 1.0 / static_cast<double>(batch.rows);

  std::vector<double> probs(classes);
  std::vector<double> dcur, dprev;
  for (std::size_t row = 0; row < batch.rows; ++row) {
    softmax_row(cache.logits.data() + row * classes, classes, probs.data());
    dcur.assign(probs.begin(), probs.end());
    dcur[batch.y[row]] -= 1.0;
    for (double& g : dcur) g *= inv_rows;

    for (std::size_t li = L; li-- > 0;) {
      const std::size_t in_n = dim_product(shapes[li]);
      const double* in = li == 0
                             ? batch.x.data() + row * batch.features
                             : cache.post[li - 1].data() + row * in_n;
      dprev.assign(in_n, 0.0);
      layer_backward(net.layers[li], shapes[li], in, dcur.data(),
                     grads.weights[li].data(),
                     grads.bias[li].empty() ? nullptr : grads.bias[li].data(),
                     dprev.data());
      if (li > 0) {
        // ReLU gate on the previous layer's pre-activation.
        const double* pre = cache.pre[li - 1].data() + row * in_n;
        for (std::size_t i = 0; i < in_n; ++i)
          if (pre[i] <= 0.0) dprev[i] = 0.0;
      }
      dcur.swap(dprev);
    }
  }
  return loss;
}

namespace {

// d/dw of D+_rel(w, c) away from the kinks w = 0, w = c.
double rel_dist_grad(double w, double c) {
  const double aw = std::abs(w);
  const double diff = w - c;
  const double sdiff = diff > 0 ? 1.0 : diff < 0 ? -1.0 : 0.0;
  const double sw = w > 0 ? 1.0 : w < 0 ? -1.0 : 0.0;
  return sdiff / aw - std::abs(diff) * sw / (w * w);
}

constexpr double kSoftminCutoff = 30.0;  // exp(-30) ~ 1e-13, below tolerance

}  // namespace

double reg_loss(const Network& net, const RegContext& ctx) {
  std::vector<double> unused;
  Network copy = net;  // const path shares the gradient implementation
  return reg_loss_and_grads(copy, ctx, unused);
}

double reg_loss_and_grads(const Network& net, const RegContext& ctx,
                          std::vector<double>& grad_by_weight_id) {
  grad_by_weight_id.assign(net.total_weights(), 0.0);
  if (ctx.centres.empty()) return 0.0;

  double total = 0.0;
  std::vector<double> dists(ctx.centres.size());
  std::vector<double> dgrads(ctx.centres.size());
  for (std::size_t id : ctx.free_ids) {
    const double w = net.weight_at(id);
    if (std::abs(w) < ctx.delta0) continue;  // contributes zero

    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ctx.centres.size(); ++j) {
      dists[j] = relative_distance(w, ctx.centres[j], ctx.delta0);
      dgrads[j] = rel_dist_grad(w, ctx.centres[j]);
      dmin = std::min(dmin, dists[j]);
    }

    // Softmin posterior with max-shift; far centres are skipped.
    double zsum = 0.0;
    for (std::size_t j = 0; j < ctx.centres.size(); ++j) {
      const double shifted = dists[j] - dmin;
      zsum += shifted > kSoftminCutoff ? 0.0 : std::exp(-shifted);
    }

    double expected = 0.0, grad_expect = 0.0, mix = 0.0;
    for (std::size_t j = 0; j < ctx.centres.size(); ++j) {
      const double shifted = dists[j] - dmin;
      if (shifted > kSoftminCutoff) continue;
      const double p = std::exp(-shifted) / zsum;
      expected += p * dists[j];
      grad_expect += p * dgrads[j] * (1.0 - dists[j]);
      mix += p * dgrads[j];
    }
    total += expected;
    grad_by_weight_id[id] = grad_expect + expected * mix;
  }
  return total;
}

AdamState AdamState::init(const Network& net) {
  AdamState s;
  const std::size_t L = net.layers.size();
  s.m_w.resize(L);
  s.v_w.resize(L);
  s.m_b.resize(L);
  s.v_b.resize(L);
  for (std::size_t li = 0; li < L; ++li) {
    s.m_w[li].assign(net.layers[li].weights.size(), 0.0);
    s.v_w[li].assign(net.layers[li].weights.size(), 0.0);
    s.m_b[li].assign(net.layers[li].bias.size(), 0.0);
    s.v_b[li].assign(net.layers[li].bias.size(), 0.0);
  }
  return s;
}

void combined_step(Network& net, const Batch& batch, const RegContext& ctx,
                   const TrainConfig& cfg, AdamState& state, StepProbe* probe) {
  cfg.validate();

  Gradients ce_grads;
  const double l_ce = ce_loss_and_grads(net, batch, ce_grads);
  std::vector<double> reg_grad;
  const double l_reg = reg_loss_and_grads(net, ctx, reg_grad);
  const double gamma = l_reg > 0.0 ? cfg.alpha * l_ce / l_reg : 0.0;

  if (probe) {
    probe->gamma = gamma;
    probe->loss_ce = l_ce;
    probe->loss_reg = l_reg;
    probe->g_ce.clear();
    probe->g_reg.clear();
    probe->g_combined.clear();
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.adam.beta2, static_cast<double>(state.step));

  auto adam_update = [&](double& param, double& m, double& v, double g) {
    m = cfg.adam.beta1 * m + (1.0 - cfg.adam.beta1) * g;
    v = cfg.adam.beta2 * v + (1.0 - cfg.adam.beta2) * g * g;
    param -= cfg.eta * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam.eps);
  };

  std::size_t id = 0;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    Layer& layer = net.layers[li];
    for (std::size_t wi = 0; wi < layer.weights.size(); ++wi, ++id) {
      if (net.fix_mask[id]) continue;  // frozen, bit-identical
      const double g_ce = ce_grads.weights[li][wi];
      const double g_reg = reg_grad[id];
      const double g = g_ce + gamma * g_reg;
      if (probe && std::find(probe->probe_ids.begin(), probe->probe_ids.end(),
                             id) != probe->probe_ids.end()) {
        probe->g_ce.push_back(g_ce);
        probe->g_reg.push_back(g_reg);
        probe->g_combined.push_back(g);
      }
      adam_update(layer.weights[wi], state.m_w[li][wi], state.v_w[li][wi], g);
    }
    for (std::size_t bi = 0; bi < layer.bias.size(); ++bi)
      adam_update(layer.bias[bi], state.m_b[li][bi], state.v_b[li][bi],
                  ce_grads.bias[li][bi]);
  }
}

double evaluate_accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw DataError("empty dataset");
  const std::size_t chunk = 256;
  const std::size_t classes = data.classes;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    const std::size_t rows = std::min(chunk, data.size() - start);
    Batch b;
    b.rows = rows;
    b.features = data.features;
    b.x.assign(data.x.begin() + start * data.features,
               data.x.begin() + (start + rows) * data.features);
    b.y.assign(data.y.begin() + start, data.y.begin() + start + rows);
    const ForwardCache cache = forward(net, b);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = cache.logits.data() + r * classes;
      const std::size_t pred =
          std::max_element(row, row + classes) - row;
      if (static_cast<int>(pred) == b.y[r]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

void run_epochs(Network& net, const Dataset& data, const RegContext& ctx,
                const TrainConfig& cfg, AdamState& adam, std::size_t epochs,
                std::mt19937_64& rng, const StepObserver& observer) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, data.size() - start);
      Batch b;
      b.rows = rows;
      b.features = data.features;
      b.x.reserve(rows * data.features);
      b.y.reserve(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t idx = order[start + i];
        b.x.insert(b.x.end(), data.row(idx), data.row(idx) + data.features);
        b.y.push_back(data.y[idx]);
      }
      if (observer) {
        StepProbe probe;
        // Probe a few spread-out free weights for the detachment check.
        for (std::size_t id = 0; id < net.total_weights();
             id += std::max<std::size_t>(1, net.total_weights() / 8))
          if (!net.fix_mask[id]) probe.probe_ids.push_back(id);
        combined_step(net, b, ctx, cfg, adam, &probe);
        observer(net, probe);
      } else {
        combined_step(net, b, ctx, cfg, adam, nullptr);
      }
    }
  }
}

}  // namespace

void train_baseline(Network& net, const Dataset& data, const TrainConfig& cfg,
                    std::size_t epochs) {
  cfg.validate();
  TrainConfig plain = cfg;
  plain.alpha = 0.0;
  RegContext empty;
  AdamState adam = AdamState::init(net);
  std::mt19937_64 rng(cfg.seed);
  run_epochs(net, data, empty, plain, adam, epochs, rng, nullptr);
}

WfnRunResult run_wfn(Network& net, const Dataset& data,
                     const ProposalSet& proposals, const Schedule& schedule,
                     const TrainConfig& cfg, std::size_t omega_max,
                     const StepObserver& observer) {
  cfg.validate();
  WfnRunResult result;
  AdamState adam = AdamState::init(net);
  std::mt19937_64 rng(cfg.seed);

  // Regularise toward the order-1 codebook: pulling free weights onto
  // powers of two is what lets later clustering stages fix them cheaply.
  std::vector<double> reg_centres;
  for (const auto& a : approximate_set(proposals, 1, schedule.base_delta))
    reg_centres.push_back(a.value);

  TrainerHook hook = [&](Network& n, const FixingState&, std::size_t) {
    RegContext ctx;
    ctx.centres = reg_centres;
    ctx.delta0 = proposals.delta0;
    for (std::size_t id = 0; id < n.total_weights(); ++id)
      if (!n.fix_mask[id]) ctx.free_ids.push_back(id);
    run_epochs(n, data, ctx, cfg, adam, cfg.epochs_per_iteration, rng, observer);
    result.accuracy_history.push_back(evaluate_accuracy(n, data));
  };

  result.state = run_fixing_schedule(net, proposals, schedule, hook,
                                     cfg.fix_norm_params, omega_max);
  result.final_accuracy = evaluate_accuracy(net, data);
  return result;
}

Network make_mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ConfigError("mlp needs at least two layer sizes");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Network net;
  net.input_shape = {sizes.front()};
  for (std::size_t li = 0; li + 1 < sizes.size(); ++li) {
    Layer layer;
    layer.kind = LayerKind::Dense;
    layer.shape = {sizes[li + 1], sizes[li]};
    const double scale = std::sqrt(2.0 / static_cast<double>(sizes[li]));
    layer.weights.resize(layer.weight_count());
    for (auto& w : layer.weights) w = scale * gauss(rng);
    layer.bias.assign(sizes[li + 1], 0.0);
    if (li == 0) layer.tags.insert(LayerTag::First);
    if (li + 2 == sizes.size()) layer.tags.insert(LayerTag::Last);
    net.layers.push_back(std::move(layer));
  }
  const std::size_t n = net.total_weights();
  net.fix_mask.assign(n, false);
  net.fixed_value_index.assign(n, -1);
  net.validate();
  return net;
}

}  // namespace wfn
