#include "icondet/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "icondet/io_util.hpp"
#include "icondet/rng.hpp"
#include "nlohmann/json.hpp"

namespace icondet {

namespace {

constexpr double kStdFloor = 1e-12;
constexpr double kDistanceFloor = 1e-12;  // keeps lambda = 1/d finite

void require(bool ok, ClusterErrorKind kind, const char* msg) {
  if (!ok) throw ClusterError(kind, msg);
}

}  // namespace

void Scaler::transform_row(std::span<double> row) const {
  for (std::size_t c = 0; c < row.size(); ++c) {
    row[c] = (row[c] - mean[c]) / std[c];
  }
}

Matrix Scaler::transform(const Matrix& X) const {
  Matrix out = X;
  for (std::size_t r = 0; r < out.rows(); ++r) transform_row(out.row(r));
  return out;
}

std::pair<Scaler, Matrix> standardize_fit(const Matrix& X) {
  require(X.rows() >= 2, ClusterErrorKind::TooFewRows, "standardize_fit needs at least 2 rows");
  Scaler scaler;
  scaler.mean.assign(X.cols(), 0.0);
  scaler.std.assign(X.cols(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto row = X.row(r);
    for (std::size_t c = 0; c < X.cols(); ++c) scaler.mean[c] += row[c];
  }
  for (double& m : scaler.mean) m *= inv_n;
  for (std::size_t r = 0; r < X.rows(); ++r) {
    auto row = X.row(r);
    for (std::size_t c = 0; c < X.cols(); ++c) {
      const double d = row[c] - scaler.mean[c];
      scaler.std[c] += d * d;
    }
  }
  for (double& s : scaler.std) {
    s = std::sqrt(s * inv_n);
    if (s < kStdFloor) s = kStdFloor;
  }
  return {scaler, scaler.transform(X)};
}

std::vector<double> core_distances(const Matrix& X, int min_samples) {
  const std::size_t n = X.rows();
  require(min_samples >= 1, ClusterErrorKind::TooFewRows, "min_samples must be >= 1");
  require(n >= 2, ClusterErrorKind::TooFewRows, "core_distances needs at least 2 rows");
  const std::size_t k = std::min<std::size_t>(min_samples, n - 1);
  std::vector<double> core(n);
  std::vector<double> dists;
  dists.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dists.push_back(squared_distance(X.row(i), X.row(j)));
    }
    std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
    core[i] = std::sqrt(dists[k - 1]);
  }
  return core;
}

double mutual_reachability(const Matrix& X, const std::vector<double>& core, int a, int b) {
  const double d = euclidean_distance(X.row(a), X.row(b));
  return std::max({core[a], core[b], d});
}

std::vector<MstEdge> mutual_reachability_mst(const Matrix& X, const std::vector<double>& core) {
  const std::size_t n = X.rows();
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);

  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, 0);
  in_tree[0] = true;
  for (std::size_t j = 1; j < n; ++j) {
    best[j] = mutual_reachability(X, core, 0, static_cast<int>(j));
  }
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!in_tree[j] && (next == n || best[j] < best[next])) next = j;
    }
    edges.push_back({parent[next], static_cast<int>(next), best[next]});
    in_tree[next] = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = mutual_reachability(X, core, static_cast<int>(next), static_cast<int>(j));
      if (d < best[j]) {
        best[j] = d;
        parent[j] = static_cast<int>(next);
      }
    }
  }
  return edges;
}

namespace {

struct DendroNode {
  int left = -1;
  int right = -1;
  double distance = 0.0;
  int size = 1;
};

// Single-linkage dendrogram: leaves 0..n-1, internal nodes n..2n-2, built by
// merging MST edges in ascending weight order.
std::vector<DendroNode> build_dendrogram(std::vector<MstEdge> mst, std::size_t n) {
  std::sort(mst.begin(), mst.end(), [](const MstEdge& a, const MstEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.a != b.a) return a.a < b.a;
    return a.b < b.b;
  });
  std::vector<DendroNode> nodes(2 * n - 1);
  std::vector<int> rep(2 * n - 1);
  std::iota(rep.begin(), rep.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (rep[x] != x) {
      rep[x] = rep[rep[x]];
      x = rep[x];
    }
    return x;
  };
  int next = static_cast<int>(n);
  for (const auto& e : mst) {
    const int ra = find(e.a);
    const int rb = find(e.b);
    nodes[next].left = ra;
    nodes[next].right = rb;
    nodes[next].distance = e.weight;
    nodes[next].size = nodes[ra].size + nodes[rb].size;
    rep[ra] = next;
    rep[rb] = next;
    ++next;
  }
  return nodes;
}

void collect_leaves(const std::vector<DendroNode>& nodes, int root, std::vector<int>& out) {
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int cur = stack.back();
    stack.pop_back();
    if (nodes[cur].left < 0) {
      out.push_back(cur);
    } else {
      stack.push_back(nodes[cur].left);
      stack.push_back(nodes[cur].right);
    }
  }
}

CondensedTree condense(const std::vector<DendroNode>& nodes, std::size_t n,
                       int min_cluster_size) {
  CondensedTree tree;
  tree.num_points = static_cast<int>(n);
  const int root = static_cast<int>(2 * n - 2);

  std::vector<int> relabel(nodes.size(), -1);
  relabel[root] = static_cast<int>(n);
  tree.cluster_ids.push_back(static_cast<int>(n));
  int next_label = static_cast<int>(n) + 1;

  std::vector<int> queue{root};
  std::vector<int> points;
  while (!queue.empty()) {
    const int node = queue.front();
    queue.erase(queue.begin());
    if (nodes[node].left < 0) continue;  // leaf: emitted by its parent

    const int cluster = relabel[node];
    const int left = nodes[node].left;
    const int right = nodes[node].right;
    const double lambda = 1.0 / std::max(nodes[node].distance, kDistanceFloor);
    const bool left_big = nodes[left].size >= min_cluster_size;
    const bool right_big = nodes[right].size >= min_cluster_size;

    auto spill_points = [&](int child) {
      points.clear();
      collect_leaves(nodes, child, points);
      std::sort(points.begin(), points.end());
      for (int p : points) tree.edges.push_back({cluster, p, lambda, 1});
    };

    if (left_big && right_big) {
      // true split: two new clusters are born
      for (int child : {left, right}) {
        relabel[child] = next_label++;
        tree.cluster_ids.push_back(relabel[child]);
        tree.edges.push_back({cluster, relabel[child], lambda, nodes[child].size});
        queue.push_back(child);
      }
    } else if (!left_big && !right_big) {
      spill_points(left);
      spill_points(right);
    } else {
      // the cluster survives through the big child; the small side falls out
      const int big = left_big ? left : right;
      const int small = left_big ? right : left;
      relabel[big] = cluster;
      queue.push_back(big);
      spill_points(small);
    }
  }
  return tree;
}

void score_and_select(CondensedTree& tree) {
  std::map<int, double> birth;
  std::map<int, double> stability;
  birth[tree.num_points] = 0.0;  // the root exists from lambda = 0
  for (int c : tree.cluster_ids) stability[c] = 0.0;
  for (const auto& e : tree.edges) {
    if (e.child >= tree.num_points) birth[e.child] = e.lambda;
  }
  for (const auto& e : tree.edges) {
    stability[e.parent] += (e.lambda - birth[e.parent]) * e.size;
  }

  tree.stability.clear();
  for (int c : tree.cluster_ids) tree.stability.push_back(stability[c]);

  std::map<int, std::vector<int>> children;
  for (const auto& e : tree.edges) {
    if (e.child >= tree.num_points) children[e.parent].push_back(e.child);
  }

  // Excess of mass, leaves first (children always carry larger ids).
  std::map<int, double> effective;
  std::set<int> chosen;
  std::vector<int> order = tree.cluster_ids;
  std::sort(order.rbegin(), order.rend());
  for (int c : order) {
    double subtree = 0.0;
    for (int ch : children[c]) subtree += effective[ch];
    if (stability[c] > subtree) {
      chosen.insert(c);
      effective[c] = stability[c];
    } else {
      effective[c] = subtree;
    }
  }
  // a chosen cluster absorbs its whole subtree
  std::vector<int> stack;
  for (int c : tree.cluster_ids) {
    if (!chosen.count(c)) continue;
    stack.assign(children[c].begin(), children[c].end());
    while (!stack.empty()) {
      const int d = stack.back();
      stack.pop_back();
      chosen.erase(d);
      stack.insert(stack.end(), children[d].begin(), children[d].end());
    }
  }
  tree.selected.assign(chosen.begin(), chosen.end());
  std::sort(tree.selected.begin(), tree.selected.end());
}

}  // namespace

HdbscanResult hdbscan_fit(const Matrix& X, int min_cluster_size, int min_samples) {
  require(min_cluster_size >= 2, ClusterErrorKind::TooFewRows, "min_cluster_size must be >= 2");
  require(X.rows() >= static_cast<std::size_t>(min_cluster_size), ClusterErrorKind::TooFewRows,
          "fewer rows than min_cluster_size");
  const std::size_t n = X.rows();

  const auto core = core_distances(X, min_samples);
  const auto mst = mutual_reachability_mst(X, core);
  const auto dendro = build_dendrogram(mst, n);

  HdbscanResult result;
  result.tree = condense(dendro, n, min_cluster_size);
  score_and_select(result.tree);

  std::map<int, int> dense_id;
  for (int c : result.tree.selected) {
    const int id = static_cast<int>(dense_id.size());
    dense_id[c] = id;
  }
  result.num_clusters = static_cast<int>(dense_id.size());

  std::map<int, int> parent_of;       // cluster -> parent cluster
  std::map<int, int> attachment;      // point -> cluster it fell out of
  for (const auto& e : result.tree.edges) {
    if (e.child >= result.tree.num_points) {
      parent_of[e.child] = e.parent;
    } else {
      attachment[e.child] = e.parent;
    }
  }

  result.labels.assign(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    auto it = attachment.find(static_cast<int>(p));
    int cluster = it == attachment.end() ? -1 : it->second;
    while (cluster >= 0) {
      auto sel = dense_id.find(cluster);
      if (sel != dense_id.end()) {
        result.labels[p] = sel->second;
        break;
      }
      auto up = parent_of.find(cluster);
      cluster = up == parent_of.end() ? -1 : up->second;
    }
  }
  return result;
}

KmeansResult kmeans_fit(const Matrix& X, int k, std::uint64_t seed) {
  const std::size_t n = X.rows();
  require(k >= 1, ClusterErrorKind::KTooLarge, "k must be >= 1");
  require(static_cast<std::size_t>(k) <= n, ClusterErrorKind::KTooLarge, "k exceeds row count");

  Rng rng(seed);
  KmeansResult result;
  result.centroids = Matrix(static_cast<std::size_t>(k), X.cols());

  // k-means++ seeding
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  {
    const std::size_t first = rng.index(n);
    auto src = X.row(first);
    auto dst = result.centroids.row(0);
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t i = 0; i < n; ++i) min_sq[i] = squared_distance(X.row(i), src);
  }
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(min_sq.begin(), min_sq.end(), 0.0);
    std::size_t pick;
    if (total <= 0.0) {
      pick = rng.index(n);
    } else {
      const double threshold = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += min_sq[i];
        if (cum >= threshold) {
          pick = i;
          break;
        }
      }
    }
    auto src = X.row(pick);
    auto dst = result.centroids.row(static_cast<std::size_t>(c));
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], squared_distance(X.row(i), src));
    }
  }

  result.labels.assign(n, 0);
  constexpr int kMaxIterations = 300;
  constexpr double kShiftTol = 1e-4;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // assignment
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(X.row(i), result.centroids.row(c));
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      result.labels[i] = best_c;
      inertia += best;
    }
    result.inertia = inertia;
    result.inertia_per_iteration.push_back(inertia);

    // update
    Matrix next(static_cast<std::size_t>(k), X.cols());
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = X.row(i);
      auto acc = next.row(result.labels[i]);
      for (std::size_t c = 0; c < X.cols(); ++c) acc[c] += row[c];
      ++counts[result.labels[i]];
    }
    std::vector<bool> reseeded_point(n, false);
    for (int c = 0; c < k; ++c) {
      auto dst = next.row(c);
      if (counts[c] > 0) {
        for (double& v : dst) v /= counts[c];
      } else {
        // reseed to the point farthest from its assigned centroid
        double worst = -1.0;
        std::size_t worst_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (reseeded_point[i]) continue;
          const double d = squared_distance(X.row(i), result.centroids.row(result.labels[i]));
          if (d > worst) {
            worst = d;
            worst_i = i;
          }
        }
        reseeded_point[worst_i] = true;
        auto src = X.row(worst_i);
        std::copy(src.begin(), src.end(), dst.begin());
      }
    }

    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      max_shift = std::max(max_shift,
                           euclidean_distance(result.centroids.row(c), next.row(c)));
    }
    result.centroids = std::move(next);
    if (max_shift < kShiftTol) break;
  }

  // final assignment against the converged centroids
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (int c = 0; c < k; ++c) {
      const double d = squared_distance(X.row(i), result.centroids.row(c));
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    result.labels[i] = best_c;
    inertia += best;
  }
  result.inertia = inertia;
  result.inertia_per_iteration.push_back(inertia);
  return result;
}

double silhouette(const Matrix& X, const std::vector<int>& labels) {
  const std::size_t n = X.rows();
  std::map<int, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[labels[i]].push_back(i);
  require(clusters.size() >= 2, ClusterErrorKind::DegenerateLabels,
          "silhouette needs at least 2 clusters");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& own = clusters[labels[i]];
    if (own.size() == 1) continue;  // singleton scores 0
    double a = 0.0;
    for (std::size_t j : own) {
      if (j != i) a += euclidean_distance(X.row(i), X.row(j));
    }
    a /= static_cast<double>(own.size() - 1);

    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, members] : clusters) {
      if (label == labels[i]) continue;
      double mean = 0.0;
      for (std::size_t j : members) mean += euclidean_distance(X.row(i), X.row(j));
      mean /= static_cast<double>(members.size());
      b = std::min(b, mean);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

int select_outlier_k(const Matrix& X_outliers, const std::vector<int>& k_candidates,
                     std::uint64_t seed) {
  require(!k_candidates.empty(), ClusterErrorKind::KTooLarge, "no k candidates");
  std::vector<int> candidates = k_candidates;
  std::sort(candidates.begin(), candidates.end());

  int best_k = candidates.front();
  double best_score = -2.0;  // below any real silhouette
  for (int k : candidates) {
    const KmeansResult km = kmeans_fit(X_outliers, k, seed);
    double score = -2.0;
    if (k >= 2) score = silhouette(X_outliers, km.labels);
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

ClusterModel build_cluster_model(const Matrix& X, const ClusterParams& params) {
  const int min_samples = params.min_samples > 0 ? params.min_samples : params.min_cluster_size;
  require(X.rows() >= static_cast<std::size_t>(params.min_cluster_size) + 2,
          ClusterErrorKind::TooFewRows, "need at least min_cluster_size + 2 rows");

  ClusterModel model;
  auto [scaler, standardized] = standardize_fit(X);
  model.scaler = std::move(scaler);
  model.reference = std::move(standardized);
  model.knn_k = params.knn_k;

  const HdbscanResult h = hdbscan_fit(model.reference, params.min_cluster_size, min_samples);
  model.hdbscan_labels = h.labels;
  model.num_dense_clusters = h.num_clusters;

  std::vector<int> outlier_rows;
  for (std::size_t i = 0; i < h.labels.size(); ++i) {
    if (h.labels[i] == -1) outlier_rows.push_back(static_cast<int>(i));
  }

  std::vector<int> outlier_kmeans_labels;
  if (!outlier_rows.empty()) {
    const Matrix Xo = model.reference.select_rows(outlier_rows);
    const int n_out = static_cast<int>(outlier_rows.size());
    std::vector<int> candidates;
    for (int k = 2; k <= std::min(params.outlier_k_max, n_out - 1); ++k) candidates.push_back(k);
    const int k = candidates.empty() ? 1 : select_outlier_k(Xo, candidates, params.seed);
    KmeansResult km = kmeans_fit(Xo, k, params.seed);
    model.kmeans_centroids = std::move(km.centroids);
    model.num_outlier_clusters = k;
    outlier_kmeans_labels = std::move(km.labels);
  } else {
    model.kmeans_centroids = Matrix(0, X.cols());
    model.num_outlier_clusters = 0;
  }

  model.final_ids.assign(X.rows(), 0);
  model.final_outlier_flags.assign(X.rows(), 0);
  std::size_t out_pos = 0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    if (h.labels[i] >= 0) {
      model.final_ids[i] = h.labels[i];
    } else {
      model.final_ids[i] = model.num_dense_clusters + outlier_kmeans_labels[out_pos];
      model.final_outlier_flags[i] = 1;
      ++out_pos;
    }
  }
  return model;
}

Assignment assign(const ClusterModel& model, std::span<const double> x) {
  require(model.reference.rows() > 0, ClusterErrorKind::ModelEmpty, "model has no reference rows");
  if (x.size() != model.reference.cols()) {
    throw std::invalid_argument("assign: feature dimension mismatch");
  }

  std::vector<double> z(x.begin(), x.end());
  model.scaler.transform_row(z);

  const std::size_t n = model.reference.rows();
  const std::size_t k = std::min<std::size_t>(std::max(1, model.knn_k), n);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {squared_distance(z, model.reference.row(i)), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::map<int, int> votes;
  for (std::size_t i = 0; i < k; ++i) {
    ++votes[model.hdbscan_labels[dist[i].second]];
  }
  int max_votes = 0;
  for (const auto& [label, count] : votes) max_votes = std::max(max_votes, count);
  int winner = 0;
  bool winner_set = false;
  for (std::size_t i = 0; i < k && !winner_set; ++i) {
    const int label = model.hdbscan_labels[dist[i].second];
    if (votes[label] == max_votes) {
      winner = label;  // nearest neighbor among the tied labels decides
      winner_set = true;
    }
  }

  if (winner >= 0) return {winner, false};

  require(model.kmeans_centroids.rows() > 0, ClusterErrorKind::ModelEmpty,
          "outlier vote but model has no k-means centroids");
  double best = std::numeric_limits<double>::infinity();
  int best_c = 0;
  for (std::size_t c = 0; c < model.kmeans_centroids.rows(); ++c) {
    const double d = squared_distance(z, model.kmeans_centroids.row(c));
    if (d < best) {
      best = d;
      best_c = static_cast<int>(c);
    }
  }
  return {model.num_dense_clusters + best_c, true};
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data() = j.at("data").get<std::vector<double>>();
  if (m.data().size() != m.rows() * m.cols()) {
    throw ClusterError(ClusterErrorKind::ModelEmpty, "matrix payload size mismatch");
  }
  return m;
}

constexpr int kClusterModelFormatVersion = 1;

}  // namespace

void save_cluster_model(const ClusterModel& model, const std::filesystem::path& path) {
  nlohmann::json j = {{"format", "icondet-cluster"},
                      {"version", kClusterModelFormatVersion},
                      {"scaler", {{"mean", model.scaler.mean}, {"std", model.scaler.std}}},
                      {"reference", matrix_to_json(model.reference)},
                      {"hdbscan_labels", model.hdbscan_labels},
                      {"kmeans_centroids", matrix_to_json(model.kmeans_centroids)},
                      {"num_dense_clusters", model.num_dense_clusters},
                      {"num_outlier_clusters", model.num_outlier_clusters},
                      {"knn_k", model.knn_k},
                      {"final_ids", model.final_ids},
                      {"final_outlier_flags", model.final_outlier_flags},
                      {"corpus_hash", model.corpus_hash}};
  write_file_text(path, j.dump());
}

ClusterModel load_cluster_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw ClusterError(ClusterErrorKind::ModelEmpty,
                       std::string("cannot parse model file: ") + e.what());
  }
  if (j.value("format", "") != "icondet-cluster" ||
      j.value("version", 0) != kClusterModelFormatVersion) {
    throw ClusterError(ClusterErrorKind::ModelEmpty, "not an icondet cluster model file");
  }
  ClusterModel m;
  m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  m.scaler.std = j.at("scaler").at("std").get<std::vector<double>>();
  m.reference = matrix_from_json(j.at("reference"));
  m.hdbscan_labels = j.at("hdbscan_labels").get<std::vector<int>>();
  m.kmeans_centroids = matrix_from_json(j.at("kmeans_centroids"));
  m.num_dense_clusters = j.at("num_dense_clusters").get<int>();
  m.num_outlier_clusters = j.at("num_outlier_clusters").get<int>();
  m.knn_k = j.at("knn_k").get<int>();
  m.final_ids = j.at("final_ids").get<std::vector<int>>();
  m.final_outlier_flags = j.at("final_outlier_flags").get<std::vector<std::uint8_t>>();
  m.corpus_hash = j.value("corpus_hash", "");
  if (m.hdbscan_labels.size() != m.reference.rows() ||
      m.final_ids.size() != m.reference.rows()) {
    throw ClusterError(ClusterErrorKind::ModelEmpty, "model row counts disagree");
  }
  return m;
}

}  // namespace icondet
