#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icondet/clustering.hpp"
#include "icondet/matrix.hpp"

namespace icondet {

enum class ClassifierErrorKind {
  SingleClass,
  TooFewPerClass,
  KeyMismatch,
  NonFinite,
  ShapeMismatch,
  OutOfRange,
};

class ClassifierError : public std::runtime_error {
 public:
  ClassifierError(ClassifierErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ClassifierErrorKind kind() const { return kind_; }

 private:
  ClassifierErrorKind kind_;
};

enum class ModelKind { LogRegL1, LogRegL2, LinearSvm };
enum class Penalty { L1, L2 };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct ClassifierConfig {
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

struct LinearModel {
  ModelKind kind = ModelKind::LogRegL2;
  double alpha = 1.0;
  std::vector<double> weights;
  double bias = 0.0;
  bool converged = true;
};

// Labels are -1/+1 with +1 = malware throughout.
struct DesignMatrix {
  Matrix X;
  std::vector<std::string> column_names;
  std::vector<int> y;
};

std::vector<double> one_hot(int cluster_id, int num_ids);

// Z-scores the 9 continuous columns with a scaler fit on scaler_rows only,
// then appends the unscaled one-hot cluster block when use_icon is set.
// Rows without an assignment keep an all-zero block.
struct AssembledDesign {
  DesignMatrix design;
  Scaler pefile_scaler;
};
AssembledDesign assemble_design(const Matrix& pefile_rows, const std::vector<int>& y,
                                const std::vector<std::optional<Assignment>>& assignments,
                                bool use_icon, int num_cluster_ids,
                                std::span<const int> scaler_rows);

// Per-class shuffle, round(class_n * fraction) test rows per class.
std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& y,
                                                               double test_fraction,
                                                               std::uint64_t seed);

// Per-class round-robin deal after a seeded shuffle; fold sizes per class
// differ by at most one.
std::vector<std::vector<int>> stratified_kfold(const std::vector<int>& y, int k,
                                               std::uint64_t seed);

// min (1/n) sum log(1+exp(-y_i (w.x_i + b))) + alpha * P(w), bias unpenalized.
// Accelerated proximal gradient with backtracking; exact zeros via
// soft-thresholding for L1.
LinearModel fit_logreg(const Matrix& X, const std::vector<int>& y, Penalty penalty, double alpha,
                       const ClassifierConfig& config = {});

// min (1/n) sum max(0, 1 - y_i (w.x_i + b)) + alpha * ||w||^2, deterministic
// subgradient descent; the best averaged iterate by objective is returned, so
// the monitored objective never increases.
LinearModel fit_linear_svm(const Matrix& X, const std::vector<int>& y, double alpha,
                           const ClassifierConfig& config = {});

LinearModel fit_model(ModelKind kind, const Matrix& X, const std::vector<int>& y, double alpha,
                      const ClassifierConfig& config = {});

std::vector<double> predict_scores(const LinearModel& model, const Matrix& X);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (FPR, TPR), threshold high -> low
  double auc = 0.0;
};

// Threshold sweep over distinct scores (ties collapse into one step);
// trapezoid AUC equals the Mann-Whitney statistic with ties counted half.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& y);

struct CvPoint {
  double alpha = 0.0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double tpr_mean = 0.0, tpr_std = 0.0;
  double tnr_mean = 0.0, tnr_std = 0.0;
};

struct TuneResult {
  double best_alpha = 0.0;
  std::vector<CvPoint> curve;  // one row per grid point, grid order
};

// Stratified k-fold CV per grid point; best mean accuracy wins, ties go to
// the larger (more regularized) alpha.
TuneResult tune_alpha(ModelKind kind, const Matrix& X, const std::vector<int>& y,
                      const std::vector<double>& alpha_grid, int k, std::uint64_t seed,
                      const ClassifierConfig& config = {});

std::vector<double> default_alpha_grid();  // 31 log-spaced points over [1e-5, 1]

struct EvaluationReport {
  double accuracy = 0.0;
  double tpr = 0.0;  // malware recall
  double tnr = 0.0;  // benign recall
  double auc = 0.0;
  std::vector<std::pair<double, double>> roc_points;
};

EvaluationReport evaluate(const LinearModel& model, const Matrix& X_test,
                          const std::vector<int>& y_test);

}  // namespace icondet
