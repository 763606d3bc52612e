#include "icondet/autoencoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "icondet/io_util.hpp"
#include "icondet/rng.hpp"
#include "nlohmann/json.hpp"

namespace icondet {

namespace {

enum class Act { Relu, Linear, Sigmoid };

int conv_out_size(int in_size, int stride) {
  return (in_size + 2 - 3) / stride + 1;  // k=3, pad=1
}

// out[oc][oy][ox] = bias + sum over (ic, ky, kx) of w * in (zero padded).
void conv_forward(const ConvLayer& layer, const double* in, int in_size, double* out) {
  const int out_size = conv_out_size(in_size, layer.stride);
  const int in_plane = in_size * in_size;
  const int out_plane = out_size * out_size;
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    const double* wk = layer.weights.data() + static_cast<std::size_t>(oc) * layer.in_channels * 9;
    double* out_p = out + static_cast<std::size_t>(oc) * out_plane;
    const double bias = layer.biases[oc];
    for (int oy = 0; oy < out_size; ++oy) {
      for (int ox = 0; ox < out_size; ++ox) {
        double acc = bias;
        const int iy0 = oy * layer.stride - 1;
        const int ix0 = ox * layer.stride - 1;
        for (int ic = 0; ic < layer.in_channels; ++ic) {
          const double* in_p = in + static_cast<std::size_t>(ic) * in_plane;
          const double* w = wk + ic * 9;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = iy0 + ky;
            if (iy < 0 || iy >= in_size) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ix0 + kx;
              if (ix < 0 || ix >= in_size) continue;
              acc += w[ky * 3 + kx] * in_p[iy * in_size + ix];
            }
          }
        }
        out_p[oy * out_size + ox] = acc;
      }
    }
  }
}

// Gradients w.r.t. weights, biases and (optionally) the layer input.
void conv_backward(const ConvLayer& layer, const double* in, int in_size,
                   const double* d_out, double* d_weights, double* d_biases,
                   double* d_in /* nullable */) {
  const int out_size = conv_out_size(in_size, layer.stride);
  const int in_plane = in_size * in_size;
  const int out_plane = out_size * out_size;
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    const double* d_out_p = d_out + static_cast<std::size_t>(oc) * out_plane;
    const double* wk = layer.weights.data() + static_cast<std::size_t>(oc) * layer.in_channels * 9;
    double* dwk = d_weights + static_cast<std::size_t>(oc) * layer.in_channels * 9;
    double db = 0.0;
    for (int oy = 0; oy < out_size; ++oy) {
      for (int ox = 0; ox < out_size; ++ox) {
        const double g = d_out_p[oy * out_size + ox];
        if (g == 0.0) continue;
        db += g;
        const int iy0 = oy * layer.stride - 1;
        const int ix0 = ox * layer.stride - 1;
        for (int ic = 0; ic < layer.in_channels; ++ic) {
          const double* in_p = in + static_cast<std::size_t>(ic) * in_plane;
          double* dw = dwk + ic * 9;
          const double* w = wk + ic * 9;
          double* d_in_p = d_in ? d_in + static_cast<std::size_t>(ic) * in_plane : nullptr;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = iy0 + ky;
            if (iy < 0 || iy >= in_size) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = ix0 + kx;
              if (ix < 0 || ix >= in_size) continue;
              dw[ky * 3 + kx] += g * in_p[iy * in_size + ix];
              if (d_in_p) d_in_p[iy * in_size + ix] += g * w[ky * 3 + kx];
            }
          }
        }
      }
    }
    d_biases[oc] += db;
  }
}

void apply_activation(Act act, std::vector<double>& v) {
  switch (act) {
    case Act::Relu:
      for (double& x : v) x = x > 0.0 ? x : 0.0;
      break;
    case Act::Sigmoid:
      for (double& x : v) x = 1.0 / (1.0 + std::exp(-x));
      break;
    case Act::Linear:
      break;
  }
}

// d_pre = d_post * act'(pre), using pre-activation values (relu) or the
// activated output (sigmoid).
void activation_backward(Act act, const std::vector<double>& pre,
                         const std::vector<double>& post, std::vector<double>& d) {
  switch (act) {
    case Act::Relu:
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (pre[i] <= 0.0) d[i] = 0.0;
      }
      break;
    case Act::Sigmoid:
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= post[i] * (1.0 - post[i]);
      break;
    case Act::Linear:
      break;
  }
}

void upsample2_forward(const double* in, int channels, int in_size, double* out) {
  const int out_size = in_size * 2;
  for (int c = 0; c < channels; ++c) {
    const double* in_p = in + static_cast<std::size_t>(c) * in_size * in_size;
    double* out_p = out + static_cast<std::size_t>(c) * out_size * out_size;
    for (int y = 0; y < out_size; ++y) {
      for (int x = 0; x < out_size; ++x) {
        out_p[y * out_size + x] = in_p[(y / 2) * in_size + x / 2];
      }
    }
  }
}

void upsample2_backward(const double* d_out, int channels, int in_size, double* d_in) {
  const int out_size = in_size * 2;
  for (int c = 0; c < channels; ++c) {
    const double* d_out_p = d_out + static_cast<std::size_t>(c) * out_size * out_size;
    double* d_in_p = d_in + static_cast<std::size_t>(c) * in_size * in_size;
    for (int y = 0; y < out_size; ++y) {
      for (int x = 0; x < out_size; ++x) {
        d_in_p[(y / 2) * in_size + x / 2] += d_out_p[y * out_size + x];
      }
    }
  }
}

ConvLayer make_layer(int in_ch, int out_ch, int stride, Rng& rng) {
  ConvLayer layer;
  layer.in_channels = in_ch;
  layer.out_channels = out_ch;
  layer.stride = stride;
  layer.weights.resize(static_cast<std::size_t>(out_ch) * in_ch * 9);
  layer.biases.assign(out_ch, 0.0);
  const double fan_in = in_ch * 9.0;
  const double fan_out = out_ch * 9.0;
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  return layer;
}

std::array<ConvLayer*, 6> layer_list(AeModel& m) {
  return {&m.enc1, &m.enc2, &m.enc3, &m.dec1, &m.dec2, &m.dec3};
}

std::array<const ConvLayer*, 6> layer_list(const AeModel& m) {
  return {&m.enc1, &m.enc2, &m.enc3, &m.dec1, &m.dec2, &m.dec3};
}

// All intermediate tensors of one sample's forward pass, kept for backprop.
struct Workspace {
  std::vector<double> e1_pre, e1;   // c1 @ S/2
  std::vector<double> e2_pre, e2;   // c2 @ S/4
  std::vector<double> latent;       // c3 @ S/4 (linear bottleneck)
  std::vector<double> d1_pre, d1;   // c2 @ S/4
  std::vector<double> u1;           // c2 @ S/2
  std::vector<double> d2_pre, d2;   // c1 @ S/2
  std::vector<double> u2;           // c1 @ S
  std::vector<double> out_pre, out; // in_ch @ S
};

void forward_sample(const AeModel& m, const std::vector<double>& x, Workspace& ws) {
  const int s = m.arch.input_size;
  const int h2 = s / 2, h4 = s / 4;

  ws.e1_pre.assign(static_cast<std::size_t>(m.arch.c1) * h2 * h2, 0.0);
  conv_forward(m.enc1, x.data(), s, ws.e1_pre.data());
  ws.e1 = ws.e1_pre;
  apply_activation(Act::Relu, ws.e1);

  ws.e2_pre.assign(static_cast<std::size_t>(m.arch.c2) * h4 * h4, 0.0);
  conv_forward(m.enc2, ws.e1.data(), h2, ws.e2_pre.data());
  ws.e2 = ws.e2_pre;
  apply_activation(Act::Relu, ws.e2);

  ws.latent.assign(static_cast<std::size_t>(m.arch.c3) * h4 * h4, 0.0);
  conv_forward(m.enc3, ws.e2.data(), h4, ws.latent.data());

  ws.d1_pre.assign(static_cast<std::size_t>(m.arch.c2) * h4 * h4, 0.0);
  conv_forward(m.dec1, ws.latent.data(), h4, ws.d1_pre.data());
  ws.d1 = ws.d1_pre;
  apply_activation(Act::Relu, ws.d1);

  ws.u1.assign(static_cast<std::size_t>(m.arch.c2) * h2 * h2, 0.0);
  upsample2_forward(ws.d1.data(), m.arch.c2, h4, ws.u1.data());

  ws.d2_pre.assign(static_cast<std::size_t>(m.arch.c1) * h2 * h2, 0.0);
  conv_forward(m.dec2, ws.u1.data(), h2, ws.d2_pre.data());
  ws.d2 = ws.d2_pre;
  apply_activation(Act::Relu, ws.d2);

  ws.u2.assign(static_cast<std::size_t>(m.arch.c1) * s * s, 0.0);
  upsample2_forward(ws.d2.data(), m.arch.c1, h2, ws.u2.data());

  ws.out_pre.assign(static_cast<std::size_t>(m.arch.in_channels) * s * s, 0.0);
  conv_forward(m.dec3, ws.u2.data(), s, ws.out_pre.data());
  ws.out = ws.out_pre;
  apply_activation(Act::Sigmoid, ws.out);
}

struct Grads {
  std::vector<std::vector<double>> weights;  // parallel to layer_list order
  std::vector<std::vector<double>> biases;

  explicit Grads(const AeModel& m) {
    for (const ConvLayer* layer : layer_list(m)) {
      weights.emplace_back(layer->weights.size(), 0.0);
      biases.emplace_back(layer->biases.size(), 0.0);
    }
  }
  void zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
  }
};

// Accumulates parameter gradients for one sample given d(loss)/d(out).
void backward_sample(const AeModel& m, const std::vector<double>& x, const Workspace& ws,
                     std::vector<double> d_out, Grads& grads) {
  const int s = m.arch.input_size;
  const int h2 = s / 2, h4 = s / 4;

  activation_backward(Act::Sigmoid, ws.out_pre, ws.out, d_out);
  std::vector<double> d_u2(ws.u2.size(), 0.0);
  conv_backward(m.dec3, ws.u2.data(), s, d_out.data(), grads.weights[5].data(),
                grads.biases[5].data(), d_u2.data());

  std::vector<double> d_d2(ws.d2.size(), 0.0);
  upsample2_backward(d_u2.data(), m.arch.c1, h2, d_d2.data());
  activation_backward(Act::Relu, ws.d2_pre, ws.d2, d_d2);
  std::vector<double> d_u1(ws.u1.size(), 0.0);
  conv_backward(m.dec2, ws.u1.data(), h2, d_d2.data(), grads.weights[4].data(),
                grads.biases[4].data(), d_u1.data());

  std::vector<double> d_d1(ws.d1.size(), 0.0);
  upsample2_backward(d_u1.data(), m.arch.c2, h4, d_d1.data());
  activation_backward(Act::Relu, ws.d1_pre, ws.d1, d_d1);
  std::vector<double> d_latent(ws.latent.size(), 0.0);
  conv_backward(m.dec1, ws.latent.data(), h4, d_d1.data(), grads.weights[3].data(),
                grads.biases[3].data(), d_latent.data());

  std::vector<double> d_e2(ws.e2.size(), 0.0);
  conv_backward(m.enc3, ws.e2.data(), h4, d_latent.data(), grads.weights[2].data(),
                grads.biases[2].data(), d_e2.data());
  activation_backward(Act::Relu, ws.e2_pre, ws.e2, d_e2);

  std::vector<double> d_e1(ws.e1.size(), 0.0);
  conv_backward(m.enc2, ws.e1.data(), h2, d_e2.data(), grads.weights[1].data(),
                grads.biases[1].data(), d_e1.data());
  activation_backward(Act::Relu, ws.e1_pre, ws.e1, d_e1);

  conv_backward(m.enc1, x.data(), s, d_e1.data(), grads.weights[0].data(),
                grads.biases[0].data(), nullptr);
}

struct AdamState {
  std::vector<std::vector<double>> mw, vw, mb, vb;
  long t = 0;

  explicit AdamState(const AeModel& m) {
    for (const ConvLayer* layer : layer_list(m)) {
      mw.emplace_back(layer->weights.size(), 0.0);
      vw.emplace_back(layer->weights.size(), 0.0);
      mb.emplace_back(layer->biases.size(), 0.0);
      vb.emplace_back(layer->biases.size(), 0.0);
    }
  }
};

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void adam_step(AeModel& m, const Grads& grads, AdamState& st, double lr) {
  ++st.t;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(st.t));
  auto layers = layer_list(m);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                      std::vector<double>& mm, std::vector<double>& vv) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        mm[i] = kAdamBeta1 * mm[i] + (1.0 - kAdamBeta1) * g[i];
        vv[i] = kAdamBeta2 * vv[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        const double mhat = mm[i] / bc1;
        const double vhat = vv[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
      }
    };
    update(layers[li]->weights, grads.weights[li], st.mw[li], st.vw[li]);
    update(layers[li]->biases, grads.biases[li], st.mb[li], st.vb[li]);
  }
}

void check_input_dim(const AeModel& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.arch.input_dim()) {
    throw AeError(AeErrorKind::ShapeMismatch,
                  "input tensor has " + std::to_string(x.size()) + " values, expected " +
                      std::to_string(m.arch.input_dim()));
  }
}

}  // namespace

AeModel ae_init(const AeConfig& config, const AeArch& arch) {
  if (arch.input_size % 4 != 0) {
    throw AeError(AeErrorKind::ShapeMismatch, "input size must be divisible by 4");
  }
  Rng rng(config.seed);
  AeModel m;
  m.arch = arch;
  m.enc1 = make_layer(arch.in_channels, arch.c1, 2, rng);
  m.enc2 = make_layer(arch.c1, arch.c2, 2, rng);
  m.enc3 = make_layer(arch.c2, arch.c3, 1, rng);
  m.dec1 = make_layer(arch.c3, arch.c2, 1, rng);
  m.dec2 = make_layer(arch.c2, arch.c1, 1, rng);
  m.dec3 = make_layer(arch.c1, arch.in_channels, 1, rng);
  return m;
}

AeForwardResult ae_forward(const AeModel& model, const std::vector<std::vector<double>>& batch) {
  AeForwardResult result;
  Workspace ws;
  for (const auto& x : batch) {
    check_input_dim(model, x);
    forward_sample(model, x, ws);
    result.latents.push_back(ws.latent);
    result.reconstructions.push_back(ws.out);
  }
  return result;
}

std::pair<AeModel, TrainingTrace> ae_train(AeModel model,
                                           const std::vector<std::vector<double>>& dataset,
                                           const AeConfig& config) {
  if (dataset.empty()) throw AeError(AeErrorKind::EmptyDataset, "training set is empty");
  for (const auto& x : dataset) check_input_dim(model, x);

  Rng rng(config.seed);
  AdamState adam(model);
  Grads grads(model);
  Workspace ws;
  TrainingTrace trace;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch_size = std::max(1, config.batch_size);
  const double inv_elems = 1.0 / static_cast<double>(model.arch.input_dim());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sq = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      grads.zero();
      for (std::size_t k = start; k < end; ++k) {
        const auto& x = dataset[order[k]];
        forward_sample(model, x, ws);
        std::vector<double> d_out(ws.out.size());
        double sq = 0.0;
        for (std::size_t i = 0; i < ws.out.size(); ++i) {
          const double diff = ws.out[i] - x[i];
          sq += diff * diff;
          d_out[i] = 2.0 * diff * inv_elems * inv_batch;
        }
        epoch_sq += sq * inv_elems;
        backward_sample(model, x, ws, std::move(d_out), grads);
      }
      adam_step(model, grads, adam, config.learning_rate);
    }
    const double epoch_mse = epoch_sq / static_cast<double>(dataset.size());
    if (!std::isfinite(epoch_mse)) {
      throw AeError(AeErrorKind::NonFiniteLoss,
                    "training diverged at epoch " + std::to_string(epoch));
    }
    trace.epoch_mse.push_back(epoch_mse);
  }
  return {std::move(model), std::move(trace)};
}

std::vector<double> image_to_tensor(const RgbImage& img) {
  std::vector<double> t;
  t.reserve(img.r.size() * 3);
  t.insert(t.end(), img.r.begin(), img.r.end());
  t.insert(t.end(), img.g.begin(), img.g.end());
  t.insert(t.end(), img.b.begin(), img.b.end());
  return t;
}

std::vector<double> ae_encode_tensor(const AeModel& model, const std::vector<double>& input) {
  check_input_dim(model, input);
  const int s = model.arch.input_size;
  const int h2 = s / 2, h4 = s / 4;
  std::vector<double> e1(static_cast<std::size_t>(model.arch.c1) * h2 * h2, 0.0);
  conv_forward(model.enc1, input.data(), s, e1.data());
  apply_activation(Act::Relu, e1);
  std::vector<double> e2(static_cast<std::size_t>(model.arch.c2) * h4 * h4, 0.0);
  conv_forward(model.enc2, e1.data(), h2, e2.data());
  apply_activation(Act::Relu, e2);
  std::vector<double> latent(static_cast<std::size_t>(model.arch.c3) * h4 * h4, 0.0);
  conv_forward(model.enc3, e2.data(), h4, latent.data());
  return latent;
}

std::vector<double> ae_encode(const AeModel& model, const RgbImage& img) {
  const int s = model.arch.input_size;
  return ae_encode_tensor(model, image_to_tensor(resize_bilinear(img, s, s)));
}

AeGradients ae_loss_gradients(const AeModel& model, const std::vector<double>& input) {
  check_input_dim(model, input);
  const double inv_elems = 1.0 / static_cast<double>(model.arch.input_dim());
  Workspace ws;
  forward_sample(model, input, ws);
  std::vector<double> d_out(ws.out.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < ws.out.size(); ++i) {
    const double diff = ws.out[i] - input[i];
    sq += diff * diff;
    d_out[i] = 2.0 * diff * inv_elems;
  }
  Grads grads(model);
  backward_sample(model, input, ws, std::move(d_out), grads);
  AeGradients out;
  out.weights = std::move(grads.weights);
  out.biases = std::move(grads.biases);
  out.loss = sq * inv_elems;
  return out;
}

double ae_gradient_check(std::uint64_t seed) {
  AeArch tiny;
  tiny.input_size = 4;
  tiny.in_channels = 2;
  tiny.c1 = 3;
  tiny.c2 = 4;
  tiny.c3 = 2;

  AeConfig cfg;
  cfg.seed = seed;
  AeModel model = ae_init(cfg, tiny);

  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<double> x(tiny.input_dim());
  for (double& v : x) v = rng.uniform();

  auto loss = [&](const AeModel& m) { return ae_loss_gradients(m, x).loss; };
  const AeGradients grads = ae_loss_gradients(model, x);

  const double h = 1e-5;
  double max_err = 0.0;
  auto layers = layer_list(model);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    auto check = [&](std::vector<double>& params, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double lp = loss(model);
        params[i] = saved - h;
        const double lm = loss(model);
        params[i] = saved;
        const double numeric = (lp - lm) / (2.0 * h);
        const double err = std::abs(analytic[i] - numeric) /
                           std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
        max_err = std::max(max_err, err);
      }
    };
    check(layers[li]->weights, grads.weights[li]);
    check(layers[li]->biases, grads.biases[li]);
  }
  return max_err;
}

namespace {

nlohmann::json layer_to_json(const ConvLayer& layer) {
  return {{"in_channels", layer.in_channels},
          {"out_channels", layer.out_channels},
          {"stride", layer.stride},
          {"weights", layer.weights},
          {"biases", layer.biases}};
}

ConvLayer layer_from_json(const nlohmann::json& j) {
  ConvLayer layer;
  layer.in_channels = j.at("in_channels").get<int>();
  layer.out_channels = j.at("out_channels").get<int>();
  layer.stride = j.at("stride").get<int>();
  layer.weights = j.at("weights").get<std::vector<double>>();
  layer.biases = j.at("biases").get<std::vector<double>>();
  const std::size_t expect = static_cast<std::size_t>(layer.out_channels) * layer.in_channels * 9;
  if (layer.weights.size() != expect ||
      layer.biases.size() != static_cast<std::size_t>(layer.out_channels)) {
    throw AeError(AeErrorKind::BadModelFile, "layer parameter counts do not match shapes");
  }
  return layer;
}

constexpr int kAeModelFormatVersion = 1;

}  // namespace

void save_ae_model(const AeModel& model, const std::filesystem::path& path) {
  nlohmann::json j = {
      {"format", "icondet-ae"},
      {"version", kAeModelFormatVersion},
      {"arch",
       {{"input_size", model.arch.input_size},
        {"in_channels", model.arch.in_channels},
        {"c1", model.arch.c1},
        {"c2", model.arch.c2},
        {"c3", model.arch.c3}}},
      {"corpus_hash", model.corpus_hash},
      {"layers",
       {{"enc1", layer_to_json(model.enc1)},
        {"enc2", layer_to_json(model.enc2)},
        {"enc3", layer_to_json(model.enc3)},
        {"dec1", layer_to_json(model.dec1)},
        {"dec2", layer_to_json(model.dec2)},
        {"dec3", layer_to_json(model.dec3)}}}};
  write_file_text(path, j.dump());
}

AeModel load_ae_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw AeError(AeErrorKind::BadModelFile, std::string("cannot parse model file: ") + e.what());
  }
  if (j.value("format", "") != "icondet-ae" || j.value("version", 0) != kAeModelFormatVersion) {
    throw AeError(AeErrorKind::BadModelFile, "not an icondet AE model file");
  }
  AeModel m;
  const auto& arch = j.at("arch");
  m.arch.input_size = arch.at("input_size").get<int>();
  m.arch.in_channels = arch.at("in_channels").get<int>();
  m.arch.c1 = arch.at("c1").get<int>();
  m.arch.c2 = arch.at("c2").get<int>();
  m.arch.c3 = arch.at("c3").get<int>();
  m.corpus_hash = j.value("corpus_hash", "");
  const auto& layers = j.at("layers");
  m.enc1 = layer_from_json(layers.at("enc1"));
  m.enc2 = layer_from_json(layers.at("enc2"));
  m.enc3 = layer_from_json(layers.at("enc3"));
  m.dec1 = layer_from_json(layers.at("dec1"));
  m.dec2 = layer_from_json(layers.at("dec2"));
  m.dec3 = layer_from_json(layers.at("dec3"));
  if (m.enc1.in_channels != m.arch.in_channels || m.enc3.out_channels != m.arch.c3) {
    throw AeError(AeErrorKind::BadModelFile, "architecture and layer shapes disagree");
  }
  return m;
}

}  // namespace icondet
