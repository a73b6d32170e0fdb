#pragma once

#include <filesystem>
#include <fstream>
#include <variant>

#include "tgn/models.hpp"

namespace tgn {

struct TrainConfig {
  ModelConfig model;
  std::filesystem::path train_dir;
  std::filesystem::path test_dir;  // empty = no held-out split
  int epochs = 50;
  int batch_size = 16;  // graphs per optimizer step
  real learning_rate = static_cast<real>(2e-4);
  std::uint64_t seed = 0;  // shuffling and encode-time draws
  std::filesystem::path checkpoint_path;  // empty = keep in memory only
  std::filesystem::path metrics_path;     // empty = no CSV log
};

struct MetricsRow {
  int epoch = 0;
  std::string split;
  real loss = 0;
  real accuracy = 0;
  double seconds = 0;
};

/// Self-describing training snapshot: carries the model description text
/// verbatim plus every parameter and the optimizer state, so reloading
/// reproduces evaluation bitwise on the same platform.
struct Checkpoint {
  int version = 1;
  ModelConfig model_config;
  int batch_size = 16;
  int epoch = 0;
  std::string spec_text;
  std::string rng_state;
  std::map<std::string, Tensor> params;
  nn::AdamState adam;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

using AnyDataset = std::variant<std::vector<CnfInstance>, std::vector<TspDecisionInstance>,
                                std::vector<CentralityInstance>, std::vector<ColoringInstance>>;

AnyDataset load_dataset(Task task, const std::filesystem::path& dir);
size_t dataset_size(const AnyDataset& dataset);

/// Rebuilds the model and overwrites its parameters from the checkpoint;
/// the parameter name sets must match exactly.
AnyModel model_from_checkpoint(const Checkpoint& checkpoint);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> log;
};

/// Seeded shuffle + batch_concat batches + BCE + Adam per epoch, then a
/// fresh forward pass over each split for the metrics rows. Writes the
/// checkpoint and flushes one CSV row per split after every epoch.
TrainResult train(const TrainConfig& config);

MetricsRow evaluate(const Checkpoint& checkpoint, const AnyDataset& dataset);
MetricsRow evaluate(const Checkpoint& checkpoint, const std::filesystem::path& data_dir);

/// Append-only CSV with header "epoch,split,loss,accuracy,seconds"; every
/// row is flushed so the file stays parseable after an abnormal stop.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void append(const MetricsRow& row);

 private:
  std::ofstream out_;
};

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// TGN_LOG environment variable: quiet, info (default) or debug.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };
LogLevel log_level();
void log_line(LogLevel level, const std::string& message);

/// Subcommands: generate, train, eval, validate-spec, trace.
int cli_main(int argc, char** argv);

}  // namespace tgn
