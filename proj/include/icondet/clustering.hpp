#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icondet/matrix.hpp"

namespace icondet {

enum class ClusterErrorKind { TooFewRows, KTooLarge, DegenerateLabels, ModelEmpty };

class ClusterError : public std::runtime_error {
 public:
  ClusterError(ClusterErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ClusterErrorKind kind() const { return kind_; }

 private:
  ClusterErrorKind kind_;
};

// Per-column z-scoring with population std floored at 1e-12.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> std;

  void transform_row(std::span<double> row) const;
  Matrix transform(const Matrix& X) const;
};

std::pair<Scaler, Matrix> standardize_fit(const Matrix& X);  // needs n >= 2

// --- HDBSCAN ------------------------------------------------------------

// Distance to the min_samples-th nearest other point (self excluded);
// clamped to the farthest available neighbor when n - 1 < min_samples.
std::vector<double> core_distances(const Matrix& X, int min_samples);

// max(core(a), core(b), d(a, b))
double mutual_reachability(const Matrix& X, const std::vector<double>& core, int a, int b);

struct MstEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;
};

// Exact Prim MST over the complete mutual-reachability graph; O(n^2) time,
// O(n) memory.
std::vector<MstEdge> mutual_reachability_mst(const Matrix& X, const std::vector<double>& core);

// Condensed single-linkage hierarchy. Edges with child < num_points attach
// individual points; larger ids are clusters. lambda = 1/distance (distance
// floored at 1e-12), non-decreasing from root to leaves.
struct CondensedEdge {
  int parent = 0;
  int child = 0;
  double lambda = 0.0;
  int size = 1;
};

struct CondensedTree {
  int num_points = 0;
  std::vector<CondensedEdge> edges;
  std::vector<int> cluster_ids;        // condensed cluster node ids (root first)
  std::vector<double> stability;       // parallel to cluster_ids
  std::vector<int> selected;           // chosen cluster node ids (excess-of-mass)
};

struct HdbscanResult {
  std::vector<int> labels;  // -1 = outlier, else 0..num_clusters-1
  int num_clusters = 0;
  CondensedTree tree;
};

HdbscanResult hdbscan_fit(const Matrix& X, int min_cluster_size, int min_samples);

// --- k-means ------------------------------------------------------------

struct KmeansResult {
  Matrix centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> inertia_per_iteration;
};

// k-means++ seeding from the seeded PRNG, Lloyd iterations until the max
// centroid shift drops below 1e-4 (or 300 iterations). An emptied cluster is
// reseeded to the point farthest from its assigned centroid.
KmeansResult kmeans_fit(const Matrix& X, int k, std::uint64_t seed);

// Mean of (b - a) / max(a, b); singleton clusters score 0, as do points with
// a == b == 0. Requires >= 2 non-empty clusters.
double silhouette(const Matrix& X, const std::vector<int>& labels);

// argmax silhouette over the candidates; ties go to the smallest k. k = 1
// candidates only win when nothing else is available.
int select_outlier_k(const Matrix& X_outliers, const std::vector<int>& k_candidates,
                     std::uint64_t seed);

// --- frozen model + assignment -------------------------------------------

struct ClusterParams {
  int min_cluster_size = 15;
  int min_samples = 0;  // 0 = use min_cluster_size
  int knn_k = 5;
  int outlier_k_max = 50;
  std::uint64_t seed = 0;
};

struct ClusterModel {
  Scaler scaler;
  Matrix reference;                  // standardized training rows
  std::vector<int> hdbscan_labels;   // per row, -1 = outlier
  Matrix kmeans_centroids;           // trained on the -1 rows only (standardized space)
  int num_dense_clusters = 0;        // C
  int num_outlier_clusters = 0;      // K; final id space is [0, C+K)
  int knn_k = 5;
  std::vector<int> final_ids;        // per training row
  std::vector<std::uint8_t> final_outlier_flags;
  std::string corpus_hash;

  int num_ids() const { return num_dense_clusters + num_outlier_clusters; }
};

ClusterModel build_cluster_model(const Matrix& X, const ClusterParams& params);

struct Assignment {
  int cluster_id = 0;
  bool outlier = false;
};

// KNN majority vote over the reference rows (HDBSCAN labels, -1 included);
// vote ties go to the nearest contending neighbor. A -1 winner flags an
// outlier and falls through to the nearest k-means centroid, offset by C.
Assignment assign(const ClusterModel& model, std::span<const double> x);

void save_cluster_model(const ClusterModel& model, const std::filesystem::path& path);
ClusterModel load_cluster_model(const std::filesystem::path& path);

}  // namespace icondet
