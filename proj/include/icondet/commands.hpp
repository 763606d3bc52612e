#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "icondet/classifiers.hpp"
#include "icondet/clustering.hpp"

namespace icondet {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitBadInput = 2;

struct PipelineConfig {
  std::uint64_t seed_ae = 1;
  std::uint64_t seed_clustering = 2;
  std::uint64_t seed_split = 3;
  std::uint64_t seed_cv = 4;

  double ae_learning_rate = 1e-3;
  int ae_batch_size = 16;
  int ae_epochs = 100;

  ClusterParams clustering;

  std::vector<double> alpha_grid = default_alpha_grid();
  int k_folds = 4;
  double test_fraction = 0.2;
  double background = 1.0;  // alpha-composite background gray level
  int jobs = 1;
};

// Reads a JSON config; absent keys keep their defaults. Throws on invalid
// values or unparseable files.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// extract: PE/ICO files -> pefile_features.csv + icons/<key>.pam + manifest.
// Per-file failures become manifest entries; exits 2 only when nothing was
// processed successfully.
int cmd_extract(const std::filesystem::path& input_dir, const std::filesystem::path& out_dir,
                const PipelineConfig& config);

// featurize: icon store + AE model -> features.csv (key + 1114 columns).
int cmd_featurize(const std::filesystem::path& store_dir,
                  const std::filesystem::path& ae_model_path,
                  const std::filesystem::path& out_dir, const PipelineConfig& config);

// train-ae: icon store -> AE model JSON + per-epoch loss trace CSV.
int cmd_train_ae(const std::filesystem::path& store_dir,
                 const std::filesystem::path& out_model_path, const PipelineConfig& config);

// cluster: features.csv -> cluster model JSON + assignments.csv.
int cmd_cluster(const std::filesystem::path& features_csv,
                const std::filesystem::path& out_model_path,
                const std::filesystem::path& out_assignments_csv, const PipelineConfig& config);

// experiment: pefile/assignment/label CSVs -> report.csv + per-fit ROC and
// CV-curve CSVs, three model kinds x {with, without} the icon feature.
int cmd_experiment(const std::filesystem::path& pefile_csv,
                   const std::filesystem::path& assignments_csv,
                   const std::filesystem::path& labels_csv, const std::filesystem::path& out_dir,
                   const PipelineConfig& config);

}  // namespace icondet
