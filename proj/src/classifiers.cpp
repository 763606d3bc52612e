#include "icondet/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "icondet/pe.hpp"
#include "icondet/rng.hpp"

namespace icondet {

namespace {

void require(bool ok, ClassifierErrorKind kind, const std::string& msg) {
  if (!ok) throw ClassifierError(kind, msg);
}

void check_labels(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) {
    require(v == 1 || v == -1, ClassifierErrorKind::ShapeMismatch, "labels must be -1/+1");
    (v == 1 ? pos : neg) = true;
  }
  require(pos && neg, ClassifierErrorKind::SingleClass, "both classes must be present");
}

double log1pexp(double v) {
  // log(1 + exp(v)) without overflow
  if (v > 0.0) return v + std::log1p(std::exp(-v));
  return std::log1p(std::exp(v));
}

// mean logistic loss and its gradient at (w, b)
double logloss_grad(const Matrix& X, const std::vector<int>& y, const std::vector<double>& w,
                    double b, std::vector<double>& gw, double& gb) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  std::fill(gw.begin(), gw.end(), 0.0);
  gb = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = X.row(i);
    double margin = b;
    for (std::size_t j = 0; j < p; ++j) margin += w[j] * row[j];
    margin *= y[i];
    loss += log1pexp(-margin);
    const double sigma = 1.0 / (1.0 + std::exp(margin));  // d loss / d margin * (-1)
    const double coef = -sigma * y[i];
    for (std::size_t j = 0; j < p; ++j) gw[j] += coef * row[j];
    gb += coef;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& g : gw) g *= inv_n;
  gb *= inv_n;
  return loss * inv_n;
}

double logloss_only(const Matrix& X, const std::vector<int>& y, const std::vector<double>& w,
                    double b) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = X.row(i);
    double margin = b;
    for (std::size_t j = 0; j < p; ++j) margin += w[j] * row[j];
    loss += log1pexp(-y[i] * margin);
  }
  return loss / static_cast<double>(n);
}

double l1_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s;
}

double sq_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::LogRegL1: return "logreg_l1";
    case ModelKind::LogRegL2: return "logreg_l2";
    case ModelKind::LinearSvm: return "linear_svm";
  }
  return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "logreg_l1") return ModelKind::LogRegL1;
  if (name == "logreg_l2") return ModelKind::LogRegL2;
  if (name == "linear_svm") return ModelKind::LinearSvm;
  throw ClassifierError(ClassifierErrorKind::ShapeMismatch, "unknown model kind: " + name);
}

std::vector<double> one_hot(int cluster_id, int num_ids) {
  require(cluster_id >= 0 && cluster_id < num_ids, ClassifierErrorKind::OutOfRange,
          "cluster id " + std::to_string(cluster_id) + " outside [0, " +
              std::to_string(num_ids) + ")");
  std::vector<double> v(static_cast<std::size_t>(num_ids), 0.0);
  v[static_cast<std::size_t>(cluster_id)] = 1.0;
  return v;
}

AssembledDesign assemble_design(const Matrix& pefile_rows, const std::vector<int>& y,
                                const std::vector<std::optional<Assignment>>& assignments,
                                bool use_icon, int num_cluster_ids,
                                std::span<const int> scaler_rows) {
  const std::size_t n = pefile_rows.rows();
  require(y.size() == n && assignments.size() == n, ClassifierErrorKind::KeyMismatch,
          "row keys do not align across inputs");
  require(!scaler_rows.empty(), ClassifierErrorKind::KeyMismatch, "no rows to fit the scaler on");

  // scaler over the continuous block, training rows only
  Scaler scaler;
  const std::size_t pc = pefile_rows.cols();
  scaler.mean.assign(pc, 0.0);
  scaler.std.assign(pc, 0.0);
  for (int r : scaler_rows) {
    auto row = pefile_rows.row(static_cast<std::size_t>(r));
    for (std::size_t c = 0; c < pc; ++c) scaler.mean[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(scaler_rows.size());
  for (double& m : scaler.mean) m *= inv;
  for (int r : scaler_rows) {
    auto row = pefile_rows.row(static_cast<std::size_t>(r));
    for (std::size_t c = 0; c < pc; ++c) {
      const double d = row[c] - scaler.mean[c];
      scaler.std[c] += d * d;
    }
  }
  for (double& s : scaler.std) s = std::max(std::sqrt(s * inv), 1e-12);

  const std::size_t p = pc + (use_icon ? static_cast<std::size_t>(num_cluster_ids) : 0);
  AssembledDesign out;
  out.design.X = Matrix(n, p);
  out.design.y = y;
  out.pefile_scaler = scaler;
  for (std::size_t i = 0; i < n; ++i) {
    auto src = pefile_rows.row(i);
    auto dst = out.design.X.row(i);
    for (std::size_t c = 0; c < pc; ++c) dst[c] = (src[c] - scaler.mean[c]) / scaler.std[c];
    if (use_icon && assignments[i].has_value()) {
      const int id = assignments[i]->cluster_id;
      require(id >= 0 && id < num_cluster_ids, ClassifierErrorKind::OutOfRange,
              "assignment id outside the one-hot space");
      dst[pc + static_cast<std::size_t>(id)] = 1.0;
    }
  }
  for (auto* name : kPefileColumns) out.design.column_names.emplace_back(name);
  if (use_icon) {
    for (int c = 0; c < num_cluster_ids; ++c) {
      out.design.column_names.push_back("cluster_" + std::to_string(c));
    }
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& y,
                                                               double test_fraction,
                                                               std::uint64_t seed) {
  check_labels(y);
  Rng rng(seed);
  std::vector<int> train, test;
  for (int cls : {-1, 1}) {
    std::vector<int> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(static_cast<int>(i));
    }
    rng.shuffle(members);
    const auto test_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * test_fraction));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < test_count ? test : train).push_back(members[i]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

std::vector<std::vector<int>> stratified_kfold(const std::vector<int>& y, int k,
                                               std::uint64_t seed) {
  check_labels(y);
  require(k >= 2, ClassifierErrorKind::TooFewPerClass, "k must be >= 2");
  Rng rng(seed);
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(k));
  for (int cls : {-1, 1}) {
    std::vector<int> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(static_cast<int>(i));
    }
    require(members.size() >= static_cast<std::size_t>(k), ClassifierErrorKind::TooFewPerClass,
            "every class needs at least k members");
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

LinearModel fit_logreg(const Matrix& X, const std::vector<int>& y, Penalty penalty, double alpha,
                       const ClassifierConfig& config) {
  check_labels(y);
  require(X.rows() == y.size(), ClassifierErrorKind::ShapeMismatch, "X/y row mismatch");
  require(alpha > 0.0, ClassifierErrorKind::OutOfRange, "alpha must be positive");
  const std::size_t p = X.cols();

  // The smooth part is the logloss alone; both penalties live in the prox
  // (soft-threshold for L1, ridge shrinkage for L2). This keeps the step size
  // tied to the data curvature rather than to alpha, so the unpenalized bias
  // still moves freely when alpha is large.
  auto objective = [&](const std::vector<double>& w, double b) {
    return logloss_only(X, y, w, b) +
           alpha * (penalty == Penalty::L1 ? l1_norm(w) : sq_norm(w));
  };
  auto prox = [&](double u, double inv_l) {
    if (penalty == Penalty::L1) {
      const double thr = alpha * inv_l;
      return u > thr ? u - thr : (u < -thr ? u + thr : 0.0);
    }
    return u / (1.0 + 2.0 * alpha * inv_l);
  };

  std::vector<double> w(p, 0.0), z(p, 0.0), w_prev(p, 0.0);
  double b = 0.0, zb = 0.0, b_prev = 0.0;
  double t_momentum = 1.0;
  double step_l = 1.0;

  std::vector<double> gw(p, 0.0), cand(p, 0.0);
  double gb = 0.0;

  double best_obj = objective(w, b);
  std::vector<double> best_w = w;
  double best_b = b;
  double prev_obj = best_obj;
  bool converged = false;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const double fz = logloss_grad(X, y, z, zb, gw, gb);

    // backtracking on the smooth majorization
    double cb = 0.0;
    while (true) {
      const double inv_l = 1.0 / step_l;
      for (std::size_t j = 0; j < p; ++j) cand[j] = prox(z[j] - inv_l * gw[j], inv_l);
      cb = zb - inv_l * gb;

      double quad = 0.0, lin = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double d = cand[j] - z[j];
        quad += d * d;
        lin += gw[j] * d;
      }
      const double db = cb - zb;
      quad += db * db;
      lin += gb * db;
      if (logloss_only(X, y, cand, cb) <= fz + lin + 0.5 * step_l * quad + 1e-15) break;
      step_l *= 2.0;
      require(step_l < 1e18, ClassifierErrorKind::NonFinite, "line search diverged");
    }

    w_prev = w;
    b_prev = b;
    w = cand;
    b = cb;

    const double obj = objective(w, b);
    require(std::isfinite(obj), ClassifierErrorKind::NonFinite, "objective became non-finite");
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }

    if (obj > prev_obj) {
      // adaptive restart: drop momentum when the objective backslides
      t_momentum = 1.0;
      z = w;
      zb = b;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      const double beta = (t_momentum - 1.0) / t_next;
      for (std::size_t j = 0; j < p; ++j) z[j] = w[j] + beta * (w[j] - w_prev[j]);
      zb = b + beta * (b - b_prev);
      t_momentum = t_next;
    }

    if (std::abs(prev_obj - obj) <= config.tolerance * std::max(1.0, std::abs(obj))) {
      converged = true;
      break;
    }
    prev_obj = obj;
    step_l *= 0.9;  // let the step estimate relax between iterations
  }

  LinearModel model;
  model.kind = penalty == Penalty::L1 ? ModelKind::LogRegL1 : ModelKind::LogRegL2;
  model.alpha = alpha;
  model.weights = best_w;
  model.bias = best_b;
  model.converged = converged;
  return model;
}

LinearModel fit_linear_svm(const Matrix& X, const std::vector<int>& y, double alpha,
                           const ClassifierConfig& config) {
  check_labels(y);
  require(X.rows() == y.size(), ClassifierErrorKind::ShapeMismatch, "X/y row mismatch");
  require(alpha > 0.0, ClassifierErrorKind::OutOfRange, "alpha must be positive");
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&](const std::vector<double>& w, double b) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = X.row(i);
      double margin = b;
      for (std::size_t j = 0; j < p; ++j) margin += w[j] * row[j];
      hinge += std::max(0.0, 1.0 - y[i] * margin);
    }
    return hinge * inv_n + alpha * sq_norm(w);
  };

  std::vector<double> w(p, 0.0), avg_w(p, 0.0), gw(p, 0.0);
  double b = 0.0, avg_b = 0.0;

  std::vector<double> best_w = avg_w;
  double best_b = avg_b;
  double best_obj = objective(avg_w, avg_b);
  bool converged = false;
  int since_improvement = 0;
  constexpr int kPatience = 400;
  const double eta0 = 1.0 / (1.0 + 2.0 * alpha);

  // iterates are averaged over doubling windows so late (better) iterates are
  // not dragged down by the early ones; window restarts are part of the fixed
  // schedule and keep the run deterministic
  int window_start = 0;
  int next_restart = 2;

  for (int t = 0; t < config.max_iterations; ++t) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = X.row(i);
      double margin = b;
      for (std::size_t j = 0; j < p; ++j) margin += w[j] * row[j];
      if (y[i] * margin < 1.0) {
        for (std::size_t j = 0; j < p; ++j) gw[j] -= y[i] * row[j];
        gb -= y[i];
      }
    }
    for (std::size_t j = 0; j < p; ++j) gw[j] = gw[j] * inv_n + 2.0 * alpha * w[j];
    gb *= inv_n;

    const double eta = eta0 / std::sqrt(static_cast<double>(t) + 1.0);
    for (std::size_t j = 0; j < p; ++j) w[j] -= eta * gw[j];
    b -= eta * gb;

    if (t == next_restart) {
      next_restart *= 2;
      window_start = t;
      std::fill(avg_w.begin(), avg_w.end(), 0.0);
      avg_b = 0.0;
    }
    const double mix = 1.0 / static_cast<double>(t - window_start + 1);
    for (std::size_t j = 0; j < p; ++j) avg_w[j] += (w[j] - avg_w[j]) * mix;
    avg_b += (b - avg_b) * mix;

    const double obj = objective(avg_w, avg_b);
    require(std::isfinite(obj), ClassifierErrorKind::NonFinite, "objective became non-finite");
    if (obj < best_obj - config.tolerance * std::max(1.0, std::abs(best_obj))) {
      best_obj = obj;
      best_w = avg_w;
      best_b = avg_b;
      since_improvement = 0;
    } else {
      if (obj < best_obj) {
        best_obj = obj;
        best_w = avg_w;
        best_b = avg_b;
      }
      // a stall only counts once a whole averaging window passed unimproved
      if (++since_improvement >= std::max(kPatience, t / 2)) {
        converged = true;
        break;
      }
    }
  }

  LinearModel model;
  model.kind = ModelKind::LinearSvm;
  model.alpha = alpha;
  model.weights = best_w;
  model.bias = best_b;
  model.converged = converged;
  return model;
}

LinearModel fit_model(ModelKind kind, const Matrix& X, const std::vector<int>& y, double alpha,
                      const ClassifierConfig& config) {
  switch (kind) {
    case ModelKind::LogRegL1: return fit_logreg(X, y, Penalty::L1, alpha, config);
    case ModelKind::LogRegL2: return fit_logreg(X, y, Penalty::L2, alpha, config);
    case ModelKind::LinearSvm: return fit_linear_svm(X, y, alpha, config);
  }
  throw ClassifierError(ClassifierErrorKind::ShapeMismatch, "unknown model kind");
}

std::vector<double> predict_scores(const LinearModel& model, const Matrix& X) {
  require(X.cols() == model.weights.size(), ClassifierErrorKind::ShapeMismatch,
          "column count does not match the model");
  std::vector<double> scores(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto row = X.row(i);
    double s = model.bias;
    for (std::size_t j = 0; j < X.cols(); ++j) s += model.weights[j] * row[j];
    scores[i] = s;
  }
  return scores;
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& y) {
  check_labels(y);
  require(scores.size() == y.size(), ClassifierErrorKind::ShapeMismatch, "scores/y mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int v : y) (v == 1 ? n_pos : n_neg)++;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocCurve out;
  out.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  // the trapezoid area equals the Mann-Whitney pair count with ties at 1/2;
  // accumulating whole and half pairs keeps the value exact in doubles
  double won_pairs = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    // consume the whole tied-score group as a single threshold step
    const double s = scores[order[i]];
    std::size_t group_tp = 0, group_fp = 0;
    while (i < order.size() && scores[order[i]] == s) {
      (y[order[i]] == 1 ? group_tp : group_fp)++;
      ++i;
    }
    won_pairs += static_cast<double>(group_fp) * static_cast<double>(tp) +
                 0.5 * static_cast<double>(group_fp) * static_cast<double>(group_tp);
    tp += group_tp;
    fp += group_fp;
    out.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos));
  }
  out.auc = won_pairs / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return out;
}

EvaluationReport evaluate(const LinearModel& model, const Matrix& X_test,
                          const std::vector<int>& y_test) {
  check_labels(y_test);
  const auto scores = predict_scores(model, X_test);
  EvaluationReport report;
  std::size_t correct = 0, tp = 0, tn = 0, n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] >= 0.0 ? 1 : -1;
    if (y_test[i] == 1) {
      ++n_pos;
      if (predicted == 1) ++tp;
    } else {
      ++n_neg;
      if (predicted == -1) ++tn;
    }
    if (predicted == y_test[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  report.tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
  report.tnr = static_cast<double>(tn) / static_cast<double>(n_neg);
  const RocCurve roc = roc_auc(scores, y_test);
  report.auc = roc.auc;
  report.roc_points = roc.points;
  return report;
}

TuneResult tune_alpha(ModelKind kind, const Matrix& X, const std::vector<int>& y,
                      const std::vector<double>& alpha_grid, int k, std::uint64_t seed,
                      const ClassifierConfig& config) {
  require(!alpha_grid.empty(), ClassifierErrorKind::OutOfRange, "alpha grid is empty");
  const auto folds = stratified_kfold(y, k, seed);

  // materialize per-fold train/val matrices once
  struct FoldData {
    Matrix X_train, X_val;
    std::vector<int> y_train, y_val;
  };
  std::vector<FoldData> fold_data;
  for (const auto& val_idx : folds) {
    std::vector<char> in_val(y.size(), 0);
    for (int i : val_idx) in_val[static_cast<std::size_t>(i)] = 1;
    std::vector<int> train_idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!in_val[i]) train_idx.push_back(static_cast<int>(i));
    }
    FoldData fd;
    fd.X_train = X.select_rows(train_idx);
    fd.X_val = X.select_rows(val_idx);
    for (int i : train_idx) fd.y_train.push_back(y[static_cast<std::size_t>(i)]);
    for (int i : val_idx) fd.y_val.push_back(y[static_cast<std::size_t>(i)]);
    fold_data.push_back(std::move(fd));
  }

  TuneResult result;
  double best_acc = -1.0;
  for (double alpha : alpha_grid) {
    std::vector<double> accs, tprs, tnrs;
    for (const auto& fd : fold_data) {
      const LinearModel m = fit_model(kind, fd.X_train, fd.y_train, alpha, config);
      const EvaluationReport r = evaluate(m, fd.X_val, fd.y_val);
      accs.push_back(r.accuracy);
      tprs.push_back(r.tpr);
      tnrs.push_back(r.tnr);
    }
    auto mean_std = [](const std::vector<double>& v) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      return std::pair<double, double>(mean, std::sqrt(var / v.size()));
    };
    CvPoint pt;
    pt.alpha = alpha;
    std::tie(pt.accuracy_mean, pt.accuracy_std) = mean_std(accs);
    std::tie(pt.tpr_mean, pt.tpr_std) = mean_std(tprs);
    std::tie(pt.tnr_mean, pt.tnr_std) = mean_std(tnrs);
    result.curve.push_back(pt);

    if (pt.accuracy_mean > best_acc ||
        (pt.accuracy_mean == best_acc && alpha > result.best_alpha)) {
      best_acc = pt.accuracy_mean;
      result.best_alpha = alpha;
    }
  }
  return result;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) {
    grid.push_back(std::pow(10.0, -5.0 + 5.0 * static_cast<double>(i) / 30.0));
  }
  return grid;
}

}  // namespace icondet
