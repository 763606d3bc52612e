#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icondet/raster.hpp"

namespace icondet {

enum class AeErrorKind { ShapeMismatch, EmptyDataset, NonFiniteLoss, BadModelFile };

class AeError : public std::runtime_error {
 public:
  AeError(AeErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  AeErrorKind kind() const { return kind_; }

 private:
  AeErrorKind kind_;
};

struct AeConfig {
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  int batch_size = 16;
  int epochs = 100;
};

// 3x3 kernels, padding 1. Weights are [out][in][ky][kx] row-major.
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  std::vector<double> weights;
  std::vector<double> biases;
};

// Encoder: conv(in->c1, s2, relu) -> conv(c1->c2, s2, relu) -> conv(c2->c3, s1, linear).
// Decoder: conv(c3->c2, relu) -> up x2 -> conv(c2->c1, relu) -> up x2 ->
// conv(c1->in, sigmoid). The bottleneck is linear so latent signs survive.
// Default shape: 32x32x3 in, 8x8x8 = 512 latent.
struct AeArch {
  int input_size = 32;
  int in_channels = 3;
  int c1 = 8;
  int c2 = 16;
  int c3 = 8;

  int latent_dim() const { return (input_size / 4) * (input_size / 4) * c3; }
  int input_dim() const { return input_size * input_size * in_channels; }
};

struct AeModel {
  AeArch arch;
  ConvLayer enc1, enc2, enc3, dec1, dec2, dec3;
  std::string corpus_hash;  // sha256 over the sorted training keys, set by trainers
};

struct TrainingTrace {
  std::vector<double> epoch_mse;
};

// Glorot-uniform weights (fan counts include the 3x3 kernel), zero biases,
// drawn from the seeded stream in a fixed layer order.
AeModel ae_init(const AeConfig& config, const AeArch& arch = {});

struct AeForwardResult {
  std::vector<std::vector<double>> latents;
  std::vector<std::vector<double>> reconstructions;
};

// Inputs are planar (C, H, W) tensors of length arch.input_dim().
AeForwardResult ae_forward(const AeModel& model,
                           const std::vector<std::vector<double>>& batch);

// Mini-batch Adam (b1 0.9, b2 0.999, eps 1e-8) on mean squared
// reconstruction error; batch order reshuffled per epoch from config.seed.
// Bit-reproducible for a fixed (seed, dataset order).
std::pair<AeModel, TrainingTrace> ae_train(AeModel model,
                                           const std::vector<std::vector<double>>& dataset,
                                           const AeConfig& config);

// Canonicalizes to the model's input size (white background) and runs the
// encoder only.
std::vector<double> ae_encode(const AeModel& model, const RgbImage& img);
std::vector<double> ae_encode_tensor(const AeModel& model, const std::vector<double>& input);

// Planar tensor from an RgbImage already at the right size.
std::vector<double> image_to_tensor(const RgbImage& img);

// MSE and parameter gradients of the reconstruction loss for one input,
// layer order enc1..enc3, dec1..dec3.
struct AeGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  double loss = 0.0;
};
AeGradients ae_loss_gradients(const AeModel& model, const std::vector<double>& input);

// Analytic vs central-finite-difference gradients (h = 1e-5) on a tiny
// double-precision network; returns max_i |ga-gn| / max(1, |ga|, |gn|).
double ae_gradient_check(std::uint64_t seed);

void save_ae_model(const AeModel& model, const std::filesystem::path& path);
AeModel load_ae_model(const std::filesystem::path& path);

}  // namespace icondet
