#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "icondet/autoencoder.hpp"
#include "icondet/features.hpp"
#include "icondet/matrix.hpp"
#include "icondet/raster.hpp"

// Independent brute-force oracles. Everything here recomputes results from
// the written definitions with straight loops and different summation
// strategies than the production code; nothing calls back into it.
namespace icondet::testing {

std::array<double, 26> mc_oracle(const RgbImage& img);
std::array<double, 576> hog_oracle(const GrayImage& img);

// encoder-only forward pass with scatter-style convolution loops
std::vector<double> ae_encoder_oracle(const AeModel& model, const std::vector<double>& input);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// minimum spanning tree weight by exhaustive edge-subset search (n <= 8)
double exhaustive_mst_weight(const Matrix& distances);

// best 2-cluster inertia over every bipartition (small n)
double exhaustive_two_partition_inertia(const Matrix& X);

// the spec's KNN vote: k nearest by Euclidean distance (index breaks ties),
// majority label, vote ties to the nearest contending neighbor
int knn_vote_oracle(const Matrix& reference, const std::vector<int>& labels,
                    std::span<const double> x, int k);

// pair-counting AUC: P(s+ > s-) + 0.5 P(s+ == s-)
double auc_pair_oracle(const std::vector<double>& scores, const std::vector<int>& y);

// exact L2-logistic objective minimized by nested grid refinement over (w, b)
// for 1-D inputs
std::pair<double, double> logreg_1d_grid_oracle(const std::vector<double>& x,
                                                const std::vector<int>& y, double alpha);

}  // namespace icondet::testing
