#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tgn/harness.hpp"

namespace tgn {

namespace {

struct SizeRange {
  index lo = 0;
  index hi = 0;
};

SizeRange resolve_range(index n, index n_min, index n_max, index default_lo, index default_hi) {
  if (n > 0) return {n, n};
  SizeRange range{default_lo, default_hi};
  if (n_min > 0) range.lo = n_min;
  if (n_max > 0) range.hi = n_max;
  if (range.lo > range.hi) throw Error("generate: size range is empty");
  return range;
}

int run_generate(Task task, const std::string& out_dir, index count, std::uint64_t seed,
                 index n, index n_min, index n_max, int k) {
  if (count < 1) throw Error("generate: count must be >= 1");
  Rng rng(seed);
  size_t written = 0;
  switch (task) {
    case Task::sat: {
      const SizeRange range = resolve_range(n, n_min, n_max, 5, 10);
      std::vector<CnfInstance> data;
      for (index i = 0; i < count; ++i) {
        auto [sat, unsat] = gen_sat_pair(static_cast<int>(rng.uniform_int(range.lo, range.hi)), rng);
        data.push_back(std::move(sat));
        data.push_back(std::move(unsat));
      }
      save_sat_dataset(data, out_dir);
      written = data.size();
      break;
    }
    case Task::tsp: {
      const SizeRange range = resolve_range(n, n_min, n_max, 6, 12);
      std::vector<TspDecisionInstance> data;
      for (index i = 0; i < count; ++i) {
        auto [yes, no] = gen_tsp_pair(rng.uniform_int(range.lo, range.hi), rng);
        data.push_back(std::move(yes));
        data.push_back(std::move(no));
      }
      save_tsp_dataset(data, out_dir);
      written = data.size();
      break;
    }
    case Task::centrality: {
      const SizeRange range = resolve_range(n, n_min, n_max, 16, 32);
      std::vector<CentralityInstance> data;
      for (index i = 0; i < count; ++i) {
        data.push_back(gen_centrality_instance(rng.uniform_int(range.lo, range.hi), rng));
      }
      save_centrality_dataset(data, out_dir);
      written = data.size();
      break;
    }
    case Task::kcolor: {
      const SizeRange range = resolve_range(n, n_min, n_max, 8, 16);
      std::vector<ColoringInstance> data;
      for (index i = 0; i < count; ++i) {
        auto [yes, no] = gen_kcolor_pair(rng.uniform_int(range.lo, range.hi), k, rng);
        data.push_back(std::move(yes));
        data.push_back(std::move(no));
      }
      save_kcolor_dataset(data, out_dir);
      written = data.size();
      break;
    }
  }
  std::cout << "wrote " << written << " instances to " << out_dir << "\n";
  return 0;
}

int run_validate_spec(const std::string& path) {
  const TgnSpec spec = load_spec_file(path);
  const std::vector<SpecIssue> issues = validate(spec);
  if (!issues.empty()) {
    for (const SpecIssue& issue : issues) {
      std::cerr << "[" << to_string(issue.code) << "] " << issue.subject << ": " << issue.detail
                << "\n";
    }
    return 1;
  }
  const CompiledTgn plan = compile(spec);
  for (const std::string& type : plan.types) {
    const CompiledUpdate* update = plan.update_for(type);
    std::cout << "type " << type << ": size " << plan.size_of(type);
    if (update != nullptr) {
      std::cout << ", incoming terms " << update->terms.size() << ", D(" << type << ") = "
                << update->message_width << ", update input " << update->width << "+"
                << update->message_width;
    } else {
      std::cout << ", never updated";
    }
    std::cout << "\n";
  }
  for (const auto& [name, ends] : plan.messages) {
    std::cout << "message " << name << ": " << ends.first << " -> " << ends.second << " ("
              << plan.size_of(ends.first) << " -> " << plan.size_of(ends.second) << ")\n";
  }
  return 0;
}

AnyModel model_for_trace(Task task, const std::string& checkpoint_path, std::uint64_t seed,
                         int t_max) {
  if (!checkpoint_path.empty()) {
    Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    if (checkpoint.model_config.task != task) {
      throw Error("trace: checkpoint is for task " +
                  std::string(to_string(checkpoint.model_config.task)));
    }
    return model_from_checkpoint(checkpoint);
  }
  ModelConfig config = default_config(task);
  config.seed = seed;
  if (t_max > 0) config.t_max = t_max;
  return make_model(config);
}

int run_trace(Task task, const std::string& data_path, const std::string& checkpoint_path,
              std::uint64_t seed, int t_max, const std::string& out_path) {
  AnyModel model = model_for_trace(task, checkpoint_path, seed, t_max);

  std::ifstream in(data_path);
  if (!in) throw Error("trace: cannot open " + data_path);
  Rng rng(seed);

  GraphBatch batch;
  const CompiledTgn* plan = nullptr;
  const TgnParams* params = nullptr;
  int steps = 0;
  std::visit(
      [&](auto& m) {
        using Instance = typename std::decay_t<decltype(m)>::Instance;
        Instance instance;
        if constexpr (std::is_same_v<Instance, CnfInstance>) {
          instance = read_dimacs(in);
        } else if constexpr (std::is_same_v<Instance, TspDecisionInstance>) {
          instance = read_tsp(in);
        } else if constexpr (std::is_same_v<Instance, CentralityInstance>) {
          const Graph graph = read_graph(in);
          std::filesystem::path cent(data_path);
          cent.replace_extension(".cent");
          std::ifstream cin(cent);
          if (!cin) throw Error("trace: missing " + cent.string());
          instance = read_centrality_values(graph, cin);
        } else {
          instance = read_kcolor(in);
        }
        batch = m.encode(instance, rng);
        plan = &m.plan();
        params = &m.tgn_params();
        steps = t_max > 0 ? t_max : m.config().t_max;
      },
      model);

  const auto trace = embedding_trace(*plan, *params, batch, steps);
  std::ofstream out(out_path);
  if (!out) throw Error("trace: cannot write " + out_path);
  write_trace_csv(out, trace);
  std::cout << "wrote " << trace.size() << " snapshots to " << out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"typed graph network toolkit"};
  app.require_subcommand(1);

  std::string task_name = "sat";
  std::string out_dir, data_dir, spec_path, checkpoint_path, metrics_path, test_dir, out_path;
  index count = 10, n = 0, n_min = 0, n_max = 0, dim = 0;
  std::uint64_t seed = 0;
  int k = 3, epochs = 50, batch_size = 16, t_max = 0;
  double lr = 2e-4;

  CLI::App* generate = app.add_subcommand("generate", "generate an oracle-labeled dataset");
  generate->add_option("--task", task_name, "sat | tsp | centrality | kcolor")->required();
  generate->add_option("--out", out_dir, "output dataset directory")->required();
  generate->add_option("--count", count, "pairs (instances for centrality) to generate");
  generate->add_option("--seed", seed, "generator seed");
  generate->add_option("--n", n, "instance size (variables, cities or vertices)");
  generate->add_option("--n-min", n_min, "lower bound when sampling sizes");
  generate->add_option("--n-max", n_max, "upper bound when sampling sizes");
  generate->add_option("--k", k, "colors for kcolor");

  CLI::App* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  train_cmd->add_option("--task", task_name, "sat | tsp | centrality | kcolor")->required();
  train_cmd->add_option("--train", data_dir, "training dataset directory")->required();
  train_cmd->add_option("--test", test_dir, "held-out dataset directory");
  train_cmd->add_option("--epochs", epochs, "training epochs");
  train_cmd->add_option("--batch-size", batch_size, "graphs per optimizer step");
  train_cmd->add_option("--lr", lr, "Adam learning rate");
  train_cmd->add_option("--seed", seed, "model + shuffle seed");
  train_cmd->add_option("--t-max", t_max, "message-passing iterations");
  train_cmd->add_option("--dim", dim, "embedding size override");
  train_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file (written every epoch)");
  train_cmd->add_option("--metrics", metrics_path, "metrics CSV file");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--data", data_dir, "dataset directory")->required();

  CLI::App* validate_cmd =
      app.add_subcommand("validate-spec", "check a TGN description and print its plan");
  validate_cmd->add_option("spec", spec_path, "description file")->required();

  CLI::App* trace_cmd =
      app.add_subcommand("trace", "run one instance and export the embedding trajectory CSV");
  trace_cmd->add_option("--task", task_name, "sat | tsp | centrality | kcolor")->required();
  trace_cmd->add_option("--data", data_dir, "instance file")->required();
  trace_cmd->add_option("--checkpoint", checkpoint_path, "optional trained checkpoint");
  trace_cmd->add_option("--seed", seed, "seed for fresh parameters");
  trace_cmd->add_option("--t-max", t_max, "message-passing iterations");
  trace_cmd->add_option("--out", out_path, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (generate->parsed()) {
      return run_generate(task_from_string(task_name), out_dir, count, seed, n, n_min, n_max, k);
    }
    if (train_cmd->parsed()) {
      TrainConfig config;
      config.model = default_config(task_from_string(task_name));
      config.model.seed = seed;
      if (t_max > 0) config.model.t_max = t_max;
      if (dim > 0) {
        config.model.d_l = config.model.d_c = config.model.d_v = config.model.d_e =
            config.model.d = dim;
      }
      config.train_dir = data_dir;
      config.test_dir = test_dir;
      config.epochs = epochs;
      config.batch_size = batch_size;
      config.learning_rate = static_cast<real>(lr);
      config.seed = seed;
      config.checkpoint_path = checkpoint_path;
      config.metrics_path = metrics_path;
      const TrainResult result = train(config);
      const MetricsRow& last = result.log.back();
      std::cout << "final " << last.split << " loss " << last.loss << " accuracy "
                << last.accuracy << "\n";
      return 0;
    }
    if (eval_cmd->parsed()) {
      const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
      const MetricsRow row = evaluate(checkpoint, std::filesystem::path(data_dir));
      std::cout << "loss " << row.loss << " accuracy " << row.accuracy << "\n";
      return 0;
    }
    if (validate_cmd->parsed()) {
      return run_validate_spec(spec_path);
    }
    if (trace_cmd->parsed()) {
      return run_trace(task_from_string(task_name), data_dir, checkpoint_path, seed, t_max,
                       out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tgn
