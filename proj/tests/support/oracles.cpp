#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace icondet::testing {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

std::array<double, 26> mc_oracle(const RgbImage& img) {
  const int w = img.width, h = img.height;
  std::vector<double> all;
  std::vector<double> channel[3];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      for (int c = 0; c < 3; ++c) {
        const double v = c == 0 ? img.r[i] : (c == 1 ? img.g[i] : img.b[i]);
        all.push_back(v);
        channel[c].push_back(v);
      }
    }
  }

  std::array<double, 26> out{};
  std::size_t k = 0;
  out[k++] = mean_of(all);
  out[k++] = pop_std_of(all);
  for (int c = 0; c < 3; ++c) {
    out[k++] = mean_of(channel[c]);
    out[k++] = pop_std_of(channel[c]);
  }
  for (int ry = 0; ry < 3; ++ry) {
    for (int rx = 0; rx < 3; ++rx) {
      const int y0 = ry * h / 3, y1 = (ry + 1) * h / 3;
      const int x0 = rx * w / 3, x1 = (rx + 1) * w / 3;
      std::vector<double> region;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          region.push_back(img.r[i]);
          region.push_back(img.g[i]);
          region.push_back(img.b[i]);
        }
      }
      out[k++] = mean_of(region);
      out[k++] = pop_std_of(region);
    }
  }
  return out;
}

std::array<double, 576> hog_oracle(const GrayImage& img) {
  constexpr int n = 24;
  constexpr double pi = 3.141592653589793238462643383279502884;
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, n - 1);
    y = std::clamp(y, 0, n - 1);
    return img.values[static_cast<std::size_t>(y) * n + x];
  };

  // raw votes per cell, then normalize
  double cells[8][8][9] = {};
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double gx = at(x + 1, y) - at(x - 1, y);
      const double gy = at(x, y + 1) - at(x, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double deg = std::atan2(gy, gx) * 180.0 / pi;
      while (deg < 0.0) deg += 180.0;
      while (deg >= 180.0) deg -= 180.0;

      // the two nearest of centers 10, 30, ..., 170 (circular over 180)
      const double pos = (deg - 10.0) / 20.0;
      int lo = static_cast<int>(std::floor(pos));
      const double frac = pos - lo;
      lo = ((lo % 9) + 9) % 9;
      const int hi = (lo + 1) % 9;
      cells[y / 3][x / 3][lo] += mag * (1.0 - frac);
      cells[y / 3][x / 3][hi] += mag * frac;
    }
  }

  std::array<double, 576> out{};
  std::size_t k = 0;
  for (int cy = 0; cy < 8; ++cy) {
    for (int cx = 0; cx < 8; ++cx) {
      double norm = 0.0;
      for (int b = 0; b < 9; ++b) norm += cells[cy][cx][b] * cells[cy][cx][b];
      norm = std::sqrt(norm);
      for (int b = 0; b < 9; ++b) {
        out[k++] = norm > 1e-12 ? cells[cy][cx][b] / norm : cells[cy][cx][b];
      }
    }
  }
  return out;
}

namespace {

// scatter-style convolution: every input pixel distributes into the outputs
// it touches, the reverse loop order of the production gather implementation
std::vector<double> conv_scatter(const ConvLayer& layer, const std::vector<double>& in,
                                 int in_size) {
  const int out_size = (in_size + 2 - 3) / layer.stride + 1;
  std::vector<double> out(static_cast<std::size_t>(layer.out_channels) * out_size * out_size);
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    for (int i = 0; i < out_size * out_size; ++i) {
      out[static_cast<std::size_t>(oc) * out_size * out_size + i] = layer.biases[oc];
    }
  }
  for (int ic = 0; ic < layer.in_channels; ++ic) {
    for (int iy = 0; iy < in_size; ++iy) {
      for (int ix = 0; ix < in_size; ++ix) {
        const double v = in[(static_cast<std::size_t>(ic) * in_size + iy) * in_size + ix];
        for (int oc = 0; oc < layer.out_channels; ++oc) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int oy_num = iy + 1 - ky;
              const int ox_num = ix + 1 - kx;
              if (oy_num < 0 || ox_num < 0) continue;
              if (oy_num % layer.stride || ox_num % layer.stride) continue;
              const int oy = oy_num / layer.stride;
              const int ox = ox_num / layer.stride;
              if (oy >= out_size || ox >= out_size) continue;
              const double w =
                  layer.weights[((static_cast<std::size_t>(oc) * layer.in_channels + ic) * 3 +
                                 ky) * 3 + kx];
              out[(static_cast<std::size_t>(oc) * out_size + oy) * out_size + ox] += w * v;
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> ae_encoder_oracle(const AeModel& model, const std::vector<double>& input) {
  const int s = model.arch.input_size;
  auto relu = [](std::vector<double> v) {
    for (double& x : v) x = std::max(0.0, x);
    return v;
  };
  auto h1 = relu(conv_scatter(model.enc1, input, s));
  auto h2 = relu(conv_scatter(model.enc2, h1, s / 2));
  return conv_scatter(model.enc3, h2, s / 4);  // linear bottleneck
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, long> contingency;
  std::map<int, long> count_a, count_b;
  for (std::size_t i = 0; i < n; ++i) {
    ++contingency[{a[i], b[i]}];
    ++count_a[a[i]];
    ++count_b[b[i]];
  }
  auto choose2 = [](long m) { return static_cast<double>(m) * (m - 1) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : contingency) sum_ij += choose2(c);
  for (const auto& [key, c] : count_a) sum_a += choose2(c);
  for (const auto& [key, c] : count_b) sum_b += choose2(c);
  const double total = choose2(static_cast<long>(n));
  const double expected = sum_a * sum_b / total;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (sum_ij - expected) / (maximum - expected);
}

namespace {

struct EdgeRef {
  int a, b;
  double w;
};

bool spans(const std::vector<EdgeRef>& edges, const std::vector<int>& pick, int n) {
  std::vector<int> rep(n);
  std::iota(rep.begin(), rep.end(), 0);
  auto find = [&](int x) {
    while (rep[x] != x) x = rep[x] = rep[rep[x]];
    return x;
  };
  int merges = 0;
  for (int idx : pick) {
    const int ra = find(edges[idx].a), rb = find(edges[idx].b);
    if (ra == rb) return false;  // cycle
    rep[ra] = rb;
    ++merges;
  }
  return merges == n - 1;
}

void enumerate_subsets(const std::vector<EdgeRef>& edges, int n, std::size_t start,
                       std::vector<int>& pick, double weight, double& best) {
  if (static_cast<int>(pick.size()) == n - 1) {
    if (spans(edges, pick, n)) best = std::min(best, weight);
    return;
  }
  if (weight >= best) return;
  const int need = n - 1 - static_cast<int>(pick.size());
  for (std::size_t i = start; i + need <= edges.size(); ++i) {
    pick.push_back(static_cast<int>(i));
    enumerate_subsets(edges, n, i + 1, pick, weight + edges[i].w, best);
    pick.pop_back();
  }
}

}  // namespace

double exhaustive_mst_weight(const Matrix& distances) {
  const int n = static_cast<int>(distances.rows());
  std::vector<EdgeRef> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, distances.at(i, j)});
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick;
  enumerate_subsets(edges, n, 0, pick, 0.0, best);
  return best;
}

double exhaustive_two_partition_inertia(const Matrix& X) {
  const std::size_t n = X.rows();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
    double inertia = 0.0;
    for (int side = 0; side < 2; ++side) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == static_cast<std::uint32_t>(side)) members.push_back(i);
      }
      if (members.empty()) {
        inertia = std::numeric_limits<double>::infinity();
        break;
      }
      std::vector<double> centroid(X.cols(), 0.0);
      for (std::size_t i : members) {
        auto row = X.row(i);
        for (std::size_t c = 0; c < X.cols(); ++c) centroid[c] += row[c];
      }
      for (double& v : centroid) v /= static_cast<double>(members.size());
      for (std::size_t i : members) {
        inertia += squared_distance(X.row(i), centroid);
      }
    }
    best = std::min(best, inertia);
  }
  return best;
}

int knn_vote_oracle(const Matrix& reference, const std::vector<int>& labels,
                    std::span<const double> x, int k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < reference.rows(); ++i) {
    d.emplace_back(euclidean_distance(x, reference.row(i)), i);
  }
  std::sort(d.begin(), d.end());
  const std::size_t kk = std::min<std::size_t>(k, d.size());
  std::map<int, int> votes;
  for (std::size_t i = 0; i < kk; ++i) ++votes[labels[d[i].second]];
  int max_count = 0;
  for (const auto& [label, c] : votes) max_count = std::max(max_count, c);
  for (std::size_t i = 0; i < kk; ++i) {
    if (votes[labels[d[i].second]] == max_count) return labels[d[i].second];
  }
  return labels[d[0].second];
}

double auc_pair_oracle(const std::vector<double>& scores, const std::vector<int>& y) {
  double wins = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != -1) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

std::pair<double, double> logreg_1d_grid_oracle(const std::vector<double>& x,
                                                const std::vector<int>& y, double alpha) {
  auto objective = [&](double w, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double m = -static_cast<double>(y[i]) * (w * x[i] + b);
      loss += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    return loss / static_cast<double>(x.size()) + alpha * w * w;
  };

  double w_lo = -20.0, w_hi = 20.0, b_lo = -20.0, b_hi = 20.0;
  double best_w = 0.0, best_b = 0.0;
  for (int round = 0; round < 12; ++round) {
    double best = std::numeric_limits<double>::infinity();
    constexpr int steps = 60;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        const double w = w_lo + (w_hi - w_lo) * i / steps;
        const double b = b_lo + (b_hi - b_lo) * j / steps;
        const double obj = objective(w, b);
        if (obj < best) {
          best = obj;
          best_w = w;
          best_b = b;
        }
      }
    }
    const double w_span = (w_hi - w_lo) / steps * 3;
    const double b_span = (b_hi - b_lo) / steps * 3;
    w_lo = best_w - w_span;
    w_hi = best_w + w_span;
    b_lo = best_b - b_span;
    b_hi = best_b + b_span;
  }
  return {best_w, best_b};
}

}  // namespace icondet::testing
