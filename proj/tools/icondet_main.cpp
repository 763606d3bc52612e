#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "icondet/commands.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  int jobs = 1;
  bool seed_ae_set = false, seed_clustering_set = false, seed_split_set = false,
       seed_cv_set = false;
  std::uint64_t seed_ae = 0, seed_clustering = 0, seed_split = 0, seed_cv = 0;

  icondet::PipelineConfig resolve() const {
    icondet::PipelineConfig cfg;
    if (!config_path.empty()) cfg = icondet::load_pipeline_config(config_path);
    if (seed_ae_set) cfg.seed_ae = seed_ae;
    if (seed_clustering_set) cfg.seed_clustering = seed_clustering;
    if (seed_split_set) cfg.seed_split = seed_split;
    if (seed_cv_set) cfg.seed_cv = seed_cv;
    cfg.jobs = jobs;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"icon-aware PE malware detection pipeline"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "pipeline config JSON")->expected(1);
  app.add_option("--jobs", global.jobs, "worker threads for extract/featurize")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed-ae", global.seed_ae, "override the AE training seed")
      ->each([&](const std::string&) { global.seed_ae_set = true; });
  app.add_option("--seed-clustering", global.seed_clustering, "override the clustering seed")
      ->each([&](const std::string&) { global.seed_clustering_set = true; });
  app.add_option("--seed-split", global.seed_split, "override the train/test split seed")
      ->each([&](const std::string&) { global.seed_split_set = true; });
  app.add_option("--seed-cv", global.seed_cv, "override the cross-validation seed")
      ->each([&](const std::string&) { global.seed_cv_set = true; });

  std::string input_dir, out_dir, store_dir, model_path, features_csv, assignments_csv,
      pefile_csv, labels_csv;

  auto* extract = app.add_subcommand("extract", "parse PE/ICO files into features and icons");
  extract->add_option("input", input_dir, "directory of PE/ICO files")->required();
  extract->add_option("--out", out_dir, "output directory")->required();

  auto* featurize = app.add_subcommand("featurize", "compute the 1114 icon features");
  featurize->add_option("store", store_dir, "icon store directory")->required();
  featurize->add_option("--ae-model", model_path, "trained AE model JSON")->required();
  featurize->add_option("--out", out_dir, "output directory")->required();

  auto* train_ae = app.add_subcommand("train-ae", "train the convolutional autoencoder");
  train_ae->add_option("store", store_dir, "icon store directory")->required();
  train_ae->add_option("--out", model_path, "output model JSON path")->required();

  auto* cluster = app.add_subcommand("cluster", "build the two-stage icon cluster model");
  cluster->add_option("features", features_csv, "features.csv from featurize")->required();
  cluster->add_option("--model-out", model_path, "output cluster model JSON")->required();
  cluster->add_option("--assignments-out", assignments_csv, "output assignment CSV")->required();

  auto* experiment = app.add_subcommand("experiment", "run the 3x2 classifier comparison");
  experiment->add_option("--pefile", pefile_csv, "pefile features CSV")->required();
  experiment->add_option("--assignments", assignments_csv, "cluster assignment CSV")->required();
  experiment->add_option("--labels", labels_csv, "labels CSV (key,label; 1 = malware)")
      ->required();
  experiment->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const icondet::PipelineConfig cfg = global.resolve();
    if (extract->parsed()) return icondet::cmd_extract(input_dir, out_dir, cfg);
    if (featurize->parsed()) return icondet::cmd_featurize(store_dir, model_path, out_dir, cfg);
    if (train_ae->parsed()) return icondet::cmd_train_ae(store_dir, model_path, cfg);
    if (cluster->parsed()) {
      return icondet::cmd_cluster(features_csv, model_path, assignments_csv, cfg);
    }
    if (experiment->parsed()) {
      return icondet::cmd_experiment(pefile_csv, assignments_csv, labels_csv, out_dir, cfg);
    }
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return icondet::kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return icondet::kExitInternal;
  }
  return icondet::kExitInternal;
}
