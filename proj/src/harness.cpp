#include "tgn/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace tgn {

namespace {

using nlohmann::json;

void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Evaluation must not depend on the training stream position, so encode-time
// draws (e.g. color embeddings) come from a stream derived from the model
// seed alone.
std::uint64_t eval_seed(const ModelConfig& config) {
  return config.seed ^ 0x9e3779b97f4a7c15ULL;
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("TGN_LOG");
    if (env == nullptr) return LogLevel::info;
    const std::string v(env);
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

void log_line(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) <= static_cast<int>(log_level())) {
    std::cerr << message << "\n";
  }
}

// -- datasets -----------------------------------------------------------------

AnyDataset load_dataset(Task task, const std::filesystem::path& dir) {
  switch (task) {
    case Task::sat: return load_sat_dataset(dir);
    case Task::tsp: return load_tsp_dataset(dir);
    case Task::centrality: return load_centrality_dataset(dir);
    case Task::kcolor: return load_kcolor_dataset(dir);
  }
  throw Error("load_dataset: unknown task");
}

size_t dataset_size(const AnyDataset& dataset) {
  return std::visit([](const auto& data) { return data.size(); }, dataset);
}

// -- metrics ------------------------------------------------------------------

MetricsWriter::MetricsWriter(const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, std::ios::app);
  if (!out_) throw Error("metrics: cannot open " + path.string());
  if (fresh) {
    out_ << "epoch,split,loss,accuracy,seconds\n";
    out_.flush();
  }
}

void MetricsWriter::append(const MetricsRow& row) {
  out_ << row.epoch << ',' << row.split << ',' << fmt_real(row.loss) << ','
       << fmt_real(row.accuracy) << ',' << fmt_real(row.seconds) << '\n';
  out_.flush();
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("metrics: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "epoch,split,loss,accuracy,seconds") {
    throw Error("metrics: bad header in " + path.string());
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow row;
    std::istringstream ls(line);
    std::string field;
    std::getline(ls, field, ',');
    row.epoch = std::stoi(field);
    std::getline(ls, row.split, ',');
    std::getline(ls, field, ',');
    row.loss = static_cast<real>(std::stod(field));
    std::getline(ls, field, ',');
    row.accuracy = static_cast<real>(std::stod(field));
    std::getline(ls, field, ',');
    row.seconds = std::stod(field);
    rows.push_back(std::move(row));
  }
  return rows;
}

// -- checkpoint serialization ---------------------------------------------------

namespace {

json tensor_to_json(const Tensor& t) {
  json j;
  j["rows"] = t.rows();
  j["cols"] = t.cols();
  j["data"] = t.data();
  return j;
}

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("rows").get<index>(), j.at("cols").get<index>(),
                j.at("data").get<std::vector<real>>());
}

json config_to_json(const ModelConfig& config) {
  json j;
  j["task"] = to_string(config.task);
  j["d_l"] = config.d_l;
  j["d_c"] = config.d_c;
  j["d_v"] = config.d_v;
  j["d_e"] = config.d_e;
  j["d"] = config.d;
  j["t_max"] = config.t_max;
  j["readout_hidden"] = config.readout_hidden;
  j["seed"] = config.seed;
  j["k"] = config.k;
  j["color_init"] = config.color_init == ColorInit::simplex ? "simplex" : "random";
  j["lstm_layer_norm"] = config.lstm_layer_norm;
  j["centrality_measures"] = config.centrality_measures;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig config;
  config.task = task_from_string(j.at("task").get<std::string>());
  config.d_l = j.at("d_l").get<index>();
  config.d_c = j.at("d_c").get<index>();
  config.d_v = j.at("d_v").get<index>();
  config.d_e = j.at("d_e").get<index>();
  config.d = j.at("d").get<index>();
  config.t_max = j.at("t_max").get<int>();
  config.readout_hidden = j.at("readout_hidden").get<std::vector<index>>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.k = j.at("k").get<int>();
  config.color_init =
      j.at("color_init").get<std::string>() == "simplex" ? ColorInit::simplex : ColorInit::random;
  config.lstm_layer_norm = j.at("lstm_layer_norm").get<bool>();
  config.centrality_measures = j.at("centrality_measures").get<std::vector<std::string>>();
  return config;
}

json tensor_map_to_json(const std::map<std::string, Tensor>& tensors) {
  json j = json::object();
  for (const auto& [name, t] : tensors) j[name] = tensor_to_json(t);
  return j;
}

std::map<std::string, Tensor> tensor_map_from_json(const json& j) {
  std::map<std::string, Tensor> out;
  for (const auto& [name, t] : j.items()) out[name] = tensor_from_json(t);
  return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  json j;
  j["version"] = checkpoint.version;
  j["model_config"] = config_to_json(checkpoint.model_config);
  j["batch_size"] = checkpoint.batch_size;
  j["epoch"] = checkpoint.epoch;
  j["spec"] = checkpoint.spec_text;
  j["rng"] = checkpoint.rng_state;
  j["params"] = tensor_map_to_json(checkpoint.params);
  json adam;
  adam["lr"] = checkpoint.adam.lr;
  adam["beta1"] = checkpoint.adam.beta1;
  adam["beta2"] = checkpoint.adam.beta2;
  adam["eps"] = checkpoint.adam.eps;
  adam["step"] = checkpoint.adam.step;
  adam["m"] = tensor_map_to_json(checkpoint.adam.m);
  adam["v"] = tensor_map_to_json(checkpoint.adam.v);
  j["optimizer"] = std::move(adam);

  std::ofstream out(path);
  if (!out) throw Error("checkpoint: cannot write " + path.string());
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("checkpoint: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("checkpoint: " + path.string() + ": " + e.what());
  }
  Checkpoint checkpoint;
  checkpoint.version = j.at("version").get<int>();
  require(checkpoint.version == 1, "checkpoint: unsupported version " +
                                       std::to_string(checkpoint.version));
  checkpoint.model_config = config_from_json(j.at("model_config"));
  checkpoint.batch_size = j.at("batch_size").get<int>();
  checkpoint.epoch = j.at("epoch").get<int>();
  checkpoint.spec_text = j.at("spec").get<std::string>();
  checkpoint.rng_state = j.at("rng").get<std::string>();
  checkpoint.params = tensor_map_from_json(j.at("params"));
  const json& adam = j.at("optimizer");
  checkpoint.adam.lr = adam.at("lr").get<real>();
  checkpoint.adam.beta1 = adam.at("beta1").get<real>();
  checkpoint.adam.beta2 = adam.at("beta2").get<real>();
  checkpoint.adam.eps = adam.at("eps").get<real>();
  checkpoint.adam.step = adam.at("step").get<std::int64_t>();
  checkpoint.adam.m = tensor_map_from_json(adam.at("m"));
  checkpoint.adam.v = tensor_map_from_json(adam.at("v"));
  return checkpoint;
}

// -- model plumbing --------------------------------------------------------------

namespace {

template <typename Model>
std::string model_spec_text(const Model& model) {
  return spec_to_json(model.spec());
}

template <typename Model>
void overwrite_params(Model& model, const std::map<std::string, Tensor>& values) {
  nn::ParamMap params = model.parameters();
  require(params.size() == values.size(),
          "checkpoint: parameter count mismatch (model has " + std::to_string(params.size()) +
              ", checkpoint has " + std::to_string(values.size()) + ")");
  for (auto& [name, tensor] : params) {
    auto it = values.find(name);
    require(it != values.end(), "checkpoint: missing parameter " + name);
    require(it->second.same_shape(*tensor),
            "checkpoint: parameter " + name + " is " + it->second.shape_str() + ", expected " +
                tensor->shape_str());
    *tensor = it->second;
  }
}

}  // namespace

AnyModel model_from_checkpoint(const Checkpoint& checkpoint) {
  AnyModel model = make_model(checkpoint.model_config);
  std::visit(
      [&](auto& m) {
        require(spec_from_json(checkpoint.spec_text) == m.spec(),
                "checkpoint: embedded description does not match the model config");
        overwrite_params(m, checkpoint.params);
      },
      model);
  return model;
}

// -- train / evaluate --------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Model>
struct SplitMetrics {
  real loss = 0;
  real accuracy = 0;
};

/// Forward-only pass over a split in file order with a fixed encode stream;
/// the same code path produces the train rows, the test rows and evaluate().
template <typename Model>
SplitMetrics<Model> evaluate_split(Model& model,
                                   const std::vector<typename Model::Instance>& data,
                                   int batch_size, std::uint64_t stream_seed) {
  require(!data.empty(), "evaluate: empty dataset");
  Rng rng(stream_seed);
  real loss_sum = 0;
  real correct = 0;
  index decisions = 0;
  for (size_t start = 0; start < data.size(); start += static_cast<size_t>(batch_size)) {
    const size_t stop = std::min(data.size(), start + static_cast<size_t>(batch_size));
    const std::span<const typename Model::Instance> chunk(data.data() + start, stop - start);
    const EncodedBatch batch = model.encode_batch(chunk, rng);
    const RunResult result = model.propagate(batch.graph);
    const Tensor logits = model.decision_logits(batch, result);
    const Tensor loss = bce_loss(logits, batch.targets);
    const std::vector<int> predicted = model.decisions(batch, result);
    const index n = static_cast<index>(batch.targets.size());
    loss_sum += loss.value() * static_cast<real>(n);
    for (index i = 0; i < n; ++i) {
      if (static_cast<real>(predicted[static_cast<size_t>(i)]) ==
          batch.targets[static_cast<size_t>(i)]) {
        correct += 1;
      }
    }
    decisions += n;
  }
  SplitMetrics<Model> metrics;
  metrics.loss = loss_sum / static_cast<real>(decisions);
  metrics.accuracy = correct / static_cast<real>(decisions);
  return metrics;
}

template <typename Model>
Checkpoint snapshot(Model& model, const TrainConfig& config, const nn::AdamState& adam,
                    const Rng& rng, int epoch) {
  Checkpoint checkpoint;
  checkpoint.model_config = config.model;
  checkpoint.batch_size = config.batch_size;
  checkpoint.epoch = epoch;
  checkpoint.spec_text = model_spec_text(model);
  checkpoint.rng_state = rng.state();
  for (const auto& [name, tensor] : model.parameters()) checkpoint.params[name] = *tensor;
  checkpoint.adam = adam;
  return checkpoint;
}

template <typename Model>
TrainResult train_impl(Model& model, const std::vector<typename Model::Instance>& train_data,
                       const std::vector<typename Model::Instance>* test_data,
                       const TrainConfig& config) {
  require(!train_data.empty(), "train: training dataset is empty");
  Rng rng(config.seed);
  nn::AdamState adam;
  adam.lr = config.learning_rate;

  std::optional<MetricsWriter> metrics;
  if (!config.metrics_path.empty()) metrics.emplace(config.metrics_path);

  TrainResult result;
  std::vector<size_t> order(train_data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    rng.shuffle(order);
    std::vector<typename Model::Instance> chunk;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      chunk.assign(stop - start, {});
      for (size_t i = start; i < stop; ++i) chunk[i - start] = train_data[order[i]];
      const size_t batch_id = start / static_cast<size_t>(config.batch_size);
      try {
        const EncodedBatch batch = model.encode_batch(chunk, rng);
        Tape tape;
        nn::ParamMap params = model.parameters();
        std::map<std::string, NodeId> ids;
        for (auto& [name, tensor] : params) ids[name] = tape.watch(*tensor);
        const RunResult out = model.propagate(batch.graph);
        const Tensor logits = model.decision_logits(batch, out);
        const Tensor loss = bce_loss(logits, batch.targets);
        const Gradients grads = tape.backward(loss);
        std::map<std::string, Tensor> by_name;
        for (const auto& [name, id] : ids) {
          if (grads.contains(id)) by_name[name] = grads.at(id);
        }
        nn::adam_step(adam, params, by_name);
      } catch (const Error& e) {
        throw Error("train: epoch " + std::to_string(epoch) + " batch " +
                    std::to_string(batch_id) + ": " + e.what());
      }
    }

    const auto train_metrics =
        evaluate_split(model, train_data, config.batch_size, eval_seed(config.model));
    MetricsRow train_row{epoch, "train", train_metrics.loss, train_metrics.accuracy,
                         seconds_since(epoch_start)};
    result.log.push_back(train_row);
    if (metrics) metrics->append(train_row);
    log_line(LogLevel::info,
             "epoch " + std::to_string(epoch) + " train loss " + std::to_string(train_row.loss) +
                 " acc " + std::to_string(train_row.accuracy));

    if (test_data != nullptr) {
      const auto t0 = Clock::now();
      const auto test_metrics =
          evaluate_split(model, *test_data, config.batch_size, eval_seed(config.model));
      MetricsRow test_row{epoch, "test", test_metrics.loss, test_metrics.accuracy,
                          seconds_since(t0)};
      result.log.push_back(test_row);
      if (metrics) metrics->append(test_row);
      log_line(LogLevel::info, "epoch " + std::to_string(epoch) + " test loss " +
                                   std::to_string(test_row.loss) + " acc " +
                                   std::to_string(test_row.accuracy));
    }

    result.checkpoint = snapshot(model, config, adam, rng, epoch);
    if (!config.checkpoint_path.empty()) {
      save_checkpoint(result.checkpoint, config.checkpoint_path);
    }
  }
  return result;
}

}  // namespace

TrainResult train(const TrainConfig& config) {
  require(config.epochs >= 1, "train: epochs must be >= 1");
  require(config.batch_size >= 1, "train: batch size must be >= 1");
  require(std::filesystem::is_directory(config.train_dir),
          "train: dataset path " + config.train_dir.string() + " is not a directory");
  if (!config.test_dir.empty()) {
    require(std::filesystem::is_directory(config.test_dir),
            "train: dataset path " + config.test_dir.string() + " is not a directory");
  }

  AnyDataset train_data = load_dataset(config.model.task, config.train_dir);
  require(dataset_size(train_data) > 0,
          "train: no instances found in " + config.train_dir.string());
  std::optional<AnyDataset> test_data;
  if (!config.test_dir.empty()) {
    test_data = load_dataset(config.model.task, config.test_dir);
    require(dataset_size(*test_data) > 0,
            "train: no instances found in " + config.test_dir.string());
  }

  AnyModel model = make_model(config.model);
  return std::visit(
      [&](auto& m) {
        using Instance = typename std::decay_t<decltype(m)>::Instance;
        const auto& data = std::get<std::vector<Instance>>(train_data);
        const std::vector<Instance>* test =
            test_data ? &std::get<std::vector<Instance>>(*test_data) : nullptr;
        return train_impl(m, data, test, config);
      },
      model);
}

MetricsRow evaluate(const Checkpoint& checkpoint, const AnyDataset& dataset) {
  AnyModel model = model_from_checkpoint(checkpoint);
  const auto start = Clock::now();
  return std::visit(
      [&](auto& m) {
        using Instance = typename std::decay_t<decltype(m)>::Instance;
        const auto* data = std::get_if<std::vector<Instance>>(&dataset);
        require(data != nullptr, "evaluate: dataset does not match the checkpoint task");
        const auto metrics =
            evaluate_split(m, *data, checkpoint.batch_size, eval_seed(checkpoint.model_config));
        return MetricsRow{checkpoint.epoch, "eval", metrics.loss, metrics.accuracy,
                          seconds_since(start)};
      },
      model);
}

MetricsRow evaluate(const Checkpoint& checkpoint, const std::filesystem::path& data_dir) {
  AnyDataset dataset = load_dataset(checkpoint.model_config.task, data_dir);
  require(dataset_size(dataset) > 0, "evaluate: no instances found in " + data_dir.string());
  return evaluate(checkpoint, dataset);
}

}  // namespace tgn
