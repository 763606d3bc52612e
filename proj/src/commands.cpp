#include "icondet/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include "icondet/autoencoder.hpp"
#include "icondet/features.hpp"
#include "icondet/icons.hpp"
#include "icondet/io_util.hpp"
#include "icondet/pe.hpp"
#include "nlohmann/json.hpp"

namespace icondet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, count) across config.jobs threads. Work items land
// in caller-owned slots, so output order stays deterministic.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::string corpus_hash_of(const std::vector<std::string>& sorted_keys) {
  std::string joined;
  for (const auto& k : sorted_keys) {
    joined += k;
    joined += '\n';
  }
  return sha256_hex(joined);
}

struct StoredIcon {
  std::string key;
  IconRaster raster;
};

struct IconStore {
  std::vector<StoredIcon> icons;                          // sorted by key
  std::vector<std::pair<std::string, std::string>> bad;   // (key, reason)
};

IconStore load_icon_store(const fs::path& store_dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(store_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pam") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  IconStore store;
  for (const auto& f : files) {
    try {
      store.icons.push_back({f.stem().string(), decode_pam(read_file_bytes(f))});
    } catch (const std::exception& e) {
      store.bad.emplace_back(f.stem().string(), e.what());
    }
  }
  return store;
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  PipelineConfig cfg;
  json j;
  try {
    j = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("config: cannot parse " + path.string() + ": " + e.what());
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    cfg.seed_ae = s.value("ae", cfg.seed_ae);
    cfg.seed_clustering = s.value("clustering", cfg.seed_clustering);
    cfg.seed_split = s.value("split", cfg.seed_split);
    cfg.seed_cv = s.value("cv", cfg.seed_cv);
  }
  if (j.contains("ae")) {
    const auto& a = j.at("ae");
    cfg.ae_learning_rate = a.value("learning_rate", cfg.ae_learning_rate);
    cfg.ae_batch_size = a.value("batch_size", cfg.ae_batch_size);
    cfg.ae_epochs = a.value("epochs", cfg.ae_epochs);
  }
  if (j.contains("clustering")) {
    const auto& c = j.at("clustering");
    cfg.clustering.min_cluster_size = c.value("min_cluster_size", cfg.clustering.min_cluster_size);
    cfg.clustering.min_samples = c.value("min_samples", cfg.clustering.min_samples);
    cfg.clustering.knn_k = c.value("knn_k", cfg.clustering.knn_k);
    cfg.clustering.outlier_k_max = c.value("outlier_k_max", cfg.clustering.outlier_k_max);
  }
  if (j.contains("alpha_grid")) cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  cfg.k_folds = j.value("k_folds", cfg.k_folds);
  cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
  cfg.background = j.value("background", cfg.background);

  if (cfg.ae_learning_rate <= 0.0) throw std::runtime_error("config: learning_rate must be > 0");
  if (cfg.ae_batch_size < 1 || cfg.ae_epochs < 1) {
    throw std::runtime_error("config: batch_size and epochs must be >= 1");
  }
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0) {
    throw std::runtime_error("config: test_fraction must be in (0, 1)");
  }
  if (cfg.k_folds < 2) throw std::runtime_error("config: k_folds must be >= 2");
  if (cfg.alpha_grid.empty()) throw std::runtime_error("config: alpha_grid must be non-empty");
  for (double a : cfg.alpha_grid) {
    if (a <= 0.0) throw std::runtime_error("config: alpha values must be positive");
  }
  return cfg;
}

int cmd_extract(const fs::path& input_dir, const fs::path& out_dir,
                const PipelineConfig& config) {
  if (!fs::is_directory(input_dir)) {
    std::cerr << "extract: input is not a directory: " << input_dir << "\n";
    return kExitBadInput;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct FileResult {
    std::string filename;
    std::string key;
    std::string kind = "unknown";
    std::string error;
    int icons_found = 0;
    int decode_failures = 0;
    bool has_primary = false;
    std::optional<std::array<double, kPefileDim>> features;
    std::optional<IconRaster> primary;
  };
  std::vector<FileResult> results(files.size());

  parallel_for(files.size(), config.jobs, [&](std::size_t i) {
    FileResult& r = results[i];
    r.filename = files[i].filename().string();
    try {
      const auto bytes = read_file_bytes(files[i]);
      r.key = sha256_hex(bytes);
      if (bytes.size() >= 2 && bytes[0] == 'M' && bytes[1] == 'Z') {
        r.kind = "pe";
        const PeSummary pe = parse_pe(bytes);
        r.features = pefile_features(pe);
        IconExtraction ext = extract_icons(pe);
        r.icons_found = static_cast<int>(ext.icons.size());
        r.decode_failures = ext.decode_failures;
        if (!ext.icons.empty()) {
          r.primary = select_primary_icon(ext.icons);
          r.has_primary = true;
        }
      } else if (looks_like_ico(bytes)) {
        r.kind = "ico";
        IconExtraction ext = decode_ico_file(bytes);
        r.icons_found = static_cast<int>(ext.icons.size());
        r.decode_failures = ext.decode_failures;
        if (!ext.icons.empty()) {
          r.primary = select_primary_icon(ext.icons);
          r.has_primary = true;
        } else {
          r.error = "no decodable icon entries";
        }
      } else {
        r.error = "not a PE or ICO file";
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  fs::create_directories(out_dir / "icons");

  CsvTable table;
  table.header = {"sha256"};
  for (auto* c : kPefileColumns) table.header.emplace_back(c);

  std::map<std::string, std::vector<std::string>> rows_by_key;  // dedupes identical files
  std::size_t ok = 0;
  json manifest_files = json::array();
  for (const auto& r : results) {
    json entry = {{"file", r.filename},       {"key", r.key},
                  {"kind", r.kind},           {"icons_found", r.icons_found},
                  {"decode_failures", r.decode_failures}};
    if (r.error.empty() && (r.features || r.has_primary)) {
      entry["status"] = "ok";
      ++ok;
    } else {
      entry["status"] = "error";
      entry["error"] = r.error.empty() ? "nothing extractable" : r.error;
    }
    if (r.has_primary) entry["primary_icon"] = r.key + ".pam";
    manifest_files.push_back(entry);

    if (r.features) {
      std::vector<std::string> row{r.key};
      for (double v : *r.features) row.push_back(format_double(v));
      rows_by_key.emplace(r.key, std::move(row));
    }
    if (r.primary) {
      write_file_bytes(out_dir / "icons" / (r.key + ".pam"), encode_pam(*r.primary));
    }
  }
  for (auto& [key, row] : rows_by_key) table.rows.push_back(std::move(row));
  write_csv(out_dir / "pefile_features.csv", table);

  json manifest = {{"processed_ok", ok},
                   {"failed", results.size() - ok},
                   {"files", manifest_files}};
  write_file_text(out_dir / "extract_manifest.json", manifest.dump(2));

  if (ok == 0) {
    std::cerr << "extract: no file could be processed\n";
    return kExitBadInput;
  }
  return kExitOk;
}

int cmd_featurize(const fs::path& store_dir, const fs::path& ae_model_path,
                  const fs::path& out_dir, const PipelineConfig& config) {
  if (!fs::is_regular_file(ae_model_path)) {
    std::cerr << "featurize: AE model not found: " << ae_model_path << "\n";
    return kExitBadInput;
  }
  if (!fs::is_directory(store_dir)) {
    std::cerr << "featurize: icon store not found: " << store_dir << "\n";
    return kExitBadInput;
  }
  const AeModel model = load_ae_model(ae_model_path);
  const IconStore store = load_icon_store(store_dir);
  const auto& icons = store.icons;

  struct RowResult {
    std::string key;
    std::vector<double> values;
    std::string error;
  };
  std::vector<RowResult> rows(icons.size());
  parallel_for(icons.size(), config.jobs, [&](std::size_t i) {
    RowResult& r = rows[i];
    r.key = icons[i].key;
    try {
      const RgbImage rgb = composite_to_rgb(icons[i].raster, config.background);
      const auto mc = mc_features(rgb);
      const auto hog = hog_features(prepare_for_hog(rgb));
      const auto ae = ae_encode(model, rgb);
      r.values.reserve(kIconFeatureDim);
      r.values.insert(r.values.end(), mc.begin(), mc.end());
      r.values.insert(r.values.end(), hog.begin(), hog.end());
      r.values.insert(r.values.end(), ae.begin(), ae.end());
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  CsvTable table;
  table.header = {"key"};
  char name[16];
  for (int i = 0; i < kMcDim; ++i) {
    std::snprintf(name, sizeof(name), "mc_%02d", i);
    table.header.emplace_back(name);
  }
  for (int i = 0; i < kHogDim; ++i) {
    std::snprintf(name, sizeof(name), "hog_%03d", i);
    table.header.emplace_back(name);
  }
  for (int i = 0; i < kAeDim; ++i) {
    std::snprintf(name, sizeof(name), "ae_%03d", i);
    table.header.emplace_back(name);
  }

  json skipped = json::array();
  for (const auto& [key, reason] : store.bad) {
    skipped.push_back({{"key", key}, {"error", reason}});
  }
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      skipped.push_back({{"key", r.key}, {"error", r.error}});
      continue;
    }
    std::vector<std::string> row{r.key};
    for (double v : r.values) row.push_back(format_double(v));
    table.rows.push_back(std::move(row));
  }
  fs::create_directories(out_dir);
  write_csv(out_dir / "features.csv", table);
  json manifest = {{"rows", table.rows.size()}, {"skipped", skipped}};
  write_file_text(out_dir / "featurize_manifest.json", manifest.dump(2));
  return kExitOk;
}

int cmd_train_ae(const fs::path& store_dir, const fs::path& out_model_path,
                 const PipelineConfig& config) {
  if (!fs::is_directory(store_dir)) {
    std::cerr << "train-ae: icon store not found: " << store_dir << "\n";
    return kExitBadInput;
  }
  const IconStore store = load_icon_store(store_dir);
  const auto& icons = store.icons;
  if (icons.empty()) {
    std::cerr << "train-ae: icon store is empty\n";
    return kExitBadInput;
  }
  for (const auto& [key, reason] : store.bad) {
    std::cerr << "train-ae: skipping " << key << ": " << reason << "\n";
  }

  AeConfig ae_cfg;
  ae_cfg.seed = config.seed_ae;
  ae_cfg.learning_rate = config.ae_learning_rate;
  ae_cfg.batch_size = config.ae_batch_size;
  ae_cfg.epochs = config.ae_epochs;

  AeModel model = ae_init(ae_cfg);
  std::vector<std::vector<double>> dataset;
  std::vector<std::string> keys;
  for (const auto& icon : icons) {
    const RgbImage rgb = composite_to_rgb(icon.raster, config.background);
    dataset.push_back(image_to_tensor(resize_bilinear(rgb, model.arch.input_size,
                                                      model.arch.input_size)));
    keys.push_back(icon.key);
  }

  auto [trained, trace] = ae_train(std::move(model), dataset, ae_cfg);
  trained.corpus_hash = corpus_hash_of(keys);

  fs::create_directories(out_model_path.parent_path().empty() ? "."
                                                              : out_model_path.parent_path());
  save_ae_model(trained, out_model_path);

  CsvTable trace_csv;
  trace_csv.header = {"epoch", "mse"};
  for (std::size_t e = 0; e < trace.epoch_mse.size(); ++e) {
    trace_csv.rows.push_back({std::to_string(e), format_double(trace.epoch_mse[e])});
  }
  fs::path trace_path = out_model_path;
  trace_path.replace_extension(".trace.csv");
  write_csv(trace_path, trace_csv);
  return kExitOk;
}

int cmd_cluster(const fs::path& features_csv, const fs::path& out_model_path,
                const fs::path& out_assignments_csv, const PipelineConfig& config) {
  if (!fs::is_regular_file(features_csv)) {
    std::cerr << "cluster: features csv not found: " << features_csv << "\n";
    return kExitBadInput;
  }
  const CsvTable table = read_csv(features_csv);
  if (table.header.size() != 1 + kIconFeatureDim || table.header.empty() ||
      table.header[0] != "key") {
    std::cerr << "cluster: features csv must have a key column plus " << kIconFeatureDim
              << " feature columns\n";
    return kExitBadInput;
  }
  std::vector<std::string> keys;
  Matrix X(table.rows.size(), kIconFeatureDim);
  try {
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      keys.push_back(table.rows[i][0]);
      for (int c = 0; c < kIconFeatureDim; ++c) {
        X.at(i, static_cast<std::size_t>(c)) =
            std::stod(table.rows[i][static_cast<std::size_t>(c) + 1]);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "cluster: malformed features csv: " << e.what() << "\n";
    return kExitBadInput;
  }

  ClusterParams params = config.clustering;
  params.seed = config.seed_clustering;
  if (X.rows() < static_cast<std::size_t>(params.min_cluster_size) + 2) {
    std::cerr << "cluster: need at least min_cluster_size + 2 = "
              << params.min_cluster_size + 2 << " rows, got " << X.rows() << "\n";
    return kExitBadInput;
  }
  ClusterModel model = build_cluster_model(X, params);
  model.corpus_hash = corpus_hash_of(keys);
  save_cluster_model(model, out_model_path);

  CsvTable assignments;
  assignments.header = {"key", "cluster_id", "outlier_flag"};
  for (std::size_t i = 0; i < keys.size(); ++i) {
    assignments.rows.push_back({keys[i], std::to_string(model.final_ids[i]),
                                model.final_outlier_flags[i] ? "1" : "0"});
  }
  write_csv(out_assignments_csv, assignments);
  return kExitOk;
}

namespace {

struct JoinedData {
  std::vector<std::string> keys;
  Matrix pefile;
  std::vector<int> y;
  std::vector<std::optional<Assignment>> assignments;
  int num_cluster_ids = 0;
};

std::optional<JoinedData> join_experiment_inputs(const fs::path& pefile_csv,
                                                 const fs::path& assignments_csv,
                                                 const fs::path& labels_csv) try {
  const CsvTable pefile = read_csv(pefile_csv);
  if (pefile.header.size() != 1 + kPefileDim) {
    std::cerr << "experiment: pefile csv must have a key column plus " << kPefileDim
              << " feature columns\n";
    return std::nullopt;
  }
  const CsvTable labels = read_csv(labels_csv);
  std::map<std::string, int> label_by_key;
  for (const auto& row : labels.rows) {
    if (row.size() < 2) continue;
    label_by_key[row[0]] = row[1] == "1" ? 1 : -1;
  }
  const CsvTable assign_csv = read_csv(assignments_csv);
  std::map<std::string, Assignment> assign_by_key;
  int max_id = -1;
  for (const auto& row : assign_csv.rows) {
    if (row.size() < 3) continue;
    Assignment a;
    a.cluster_id = std::stoi(row[1]);
    a.outlier = row[2] == "1";
    assign_by_key[row[0]] = a;
    max_id = std::max(max_id, a.cluster_id);
  }

  JoinedData data;
  data.num_cluster_ids = max_id + 1;
  data.pefile = Matrix(pefile.rows.size(), kPefileDim);
  for (std::size_t i = 0; i < pefile.rows.size(); ++i) {
    const auto& row = pefile.rows[i];
    const auto label = label_by_key.find(row[0]);
    if (label == label_by_key.end()) {
      std::cerr << "experiment: no label for key " << row[0] << "\n";
      return std::nullopt;
    }
    data.keys.push_back(row[0]);
    data.y.push_back(label->second);
    for (int c = 0; c < kPefileDim; ++c) {
      data.pefile.at(i, static_cast<std::size_t>(c)) =
          std::stod(row[static_cast<std::size_t>(c) + 1]);
    }
    const auto a = assign_by_key.find(row[0]);
    data.assignments.push_back(a == assign_by_key.end()
                                   ? std::nullopt
                                   : std::optional<Assignment>(a->second));
  }
  return data;
} catch (const std::exception& e) {
  std::cerr << "experiment: malformed input: " << e.what() << "\n";
  return std::nullopt;
}

}  // namespace

int cmd_experiment(const fs::path& pefile_csv, const fs::path& assignments_csv,
                   const fs::path& labels_csv, const fs::path& out_dir,
                   const PipelineConfig& config) {
  for (const auto& p : {pefile_csv, assignments_csv, labels_csv}) {
    if (!fs::is_regular_file(p)) {
      std::cerr << "experiment: input not found: " << p << "\n";
      return kExitBadInput;
    }
  }
  const auto data = join_experiment_inputs(pefile_csv, assignments_csv, labels_csv);
  if (!data) return kExitBadInput;

  bool both = false, pos = false, neg = false;
  for (int v : data->y) (v == 1 ? pos : neg) = true;
  both = pos && neg;
  if (!both) {
    std::cerr << "experiment: labels contain a single class\n";
    return kExitBadInput;
  }

  const auto [train_idx, test_idx] =
      stratified_split(data->y, config.test_fraction, config.seed_split);
  std::vector<int> y_train, y_test;
  for (int i : train_idx) y_train.push_back(data->y[static_cast<std::size_t>(i)]);
  for (int i : test_idx) y_test.push_back(data->y[static_cast<std::size_t>(i)]);

  fs::create_directories(out_dir);
  CsvTable report;
  report.header = {"model",  "icon",   "alpha",
                   "cv_accuracy", "cv_accuracy_std", "cv_tpr", "cv_tpr_std",
                   "cv_tnr", "cv_tnr_std",
                   "test_accuracy", "test_tpr", "test_tnr", "test_auc"};

  const ModelKind kinds[3] = {ModelKind::LogRegL1, ModelKind::LogRegL2, ModelKind::LinearSvm};
  for (ModelKind kind : kinds) {
    for (bool use_icon : {false, true}) {
      const AssembledDesign assembled =
          assemble_design(data->pefile, data->y, data->assignments, use_icon,
                          data->num_cluster_ids, train_idx);
      const Matrix X_train = assembled.design.X.select_rows(train_idx);
      const Matrix X_test = assembled.design.X.select_rows(test_idx);

      const TuneResult tuned = tune_alpha(kind, X_train, y_train, config.alpha_grid,
                                          config.k_folds, config.seed_cv);
      const LinearModel model = fit_model(kind, X_train, y_train, tuned.best_alpha);
      const EvaluationReport eval = evaluate(model, X_test, y_test);

      const CvPoint* chosen = &tuned.curve.front();
      for (const auto& pt : tuned.curve) {
        if (pt.alpha == tuned.best_alpha) chosen = &pt;
      }

      const std::string icon_tag = use_icon ? "yes" : "no";
      report.rows.push_back(
          {model_kind_name(kind), icon_tag, format_double(tuned.best_alpha),
           format_double(chosen->accuracy_mean), format_double(chosen->accuracy_std),
           format_double(chosen->tpr_mean), format_double(chosen->tpr_std),
           format_double(chosen->tnr_mean), format_double(chosen->tnr_std),
           format_double(eval.accuracy), format_double(eval.tpr), format_double(eval.tnr),
           format_double(eval.auc)});

      const std::string suffix = model_kind_name(kind) + (use_icon ? "_icon" : "_noicon");
      CsvTable roc;
      roc.header = {"fpr", "tpr"};
      for (const auto& [fpr, tpr] : eval.roc_points) {
        roc.rows.push_back({format_double(fpr), format_double(tpr)});
      }
      write_csv(out_dir / ("roc_" + suffix + ".csv"), roc);

      CsvTable curve;
      curve.header = {"alpha",  "cv_accuracy", "cv_accuracy_std", "cv_tpr",
                      "cv_tpr_std", "cv_tnr", "cv_tnr_std"};
      for (const auto& pt : tuned.curve) {
        curve.rows.push_back({format_double(pt.alpha), format_double(pt.accuracy_mean),
                              format_double(pt.accuracy_std), format_double(pt.tpr_mean),
                              format_double(pt.tpr_std), format_double(pt.tnr_mean),
                              format_double(pt.tnr_std)});
      }
      write_csv(out_dir / ("cv_curve_" + suffix + ".csv"), curve);
    }
  }

  write_csv(out_dir / "report.csv", report);
  return kExitOk;
}

}  // namespace icondet
