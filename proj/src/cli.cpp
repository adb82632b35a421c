#include "sparseprox/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparseprox/checkpoint.hpp"
#include "sparseprox/data.hpp"
#include "sparseprox/metrics.hpp"
#include "sparseprox/penalties.hpp"
#include "sparseprox/prox_oracle.hpp"
#include "sparseprox/trainer.hpp"

namespace sparseprox {

namespace {

using nlohmann::json;

constexpr double kProxCheckTol = 1e-6;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const std::string& key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::Sgd;
  if (name == "adam") return Optimizer::Adam;
  throw ConfigError("unknown optimizer '" + name + "' (sgd, adam)");
}

RegularizerMode parse_mode(const std::string& name) {
  for (const RegularizerMode mode :
       {RegularizerMode::None, RegularizerMode::L2, RegularizerMode::L1,
        RegularizerMode::GroupOnly, RegularizerMode::TL1Only, RegularizerMode::SGL,
        RegularizerMode::IntegratedTL1}) {
    if (name == regularizer_mode_name(mode)) return mode;
  }
  throw ConfigError("unknown regularizer mode '" + name +
                    "' (none, l2, l1, group, tl1, sgl, integrated-tl1)");
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "softmax") return Activation::Softmax;
  throw ConfigError("unknown activation '" + name + "' (identity, relu, softmax)");
}

TrainConfig parse_train_section(const json& obj) {
  check_keys(obj,
             {"lambda", "s", "learning_rate", "batch_size", "max_iterations",
              "loss_delta_tol", "seed", "optimizer", "mode", "a"},
             "train");
  TrainConfig cfg;
  cfg.lambda = get_or(obj, "lambda", cfg.lambda);
  cfg.s = get_or(obj, "s", cfg.s);
  cfg.learning_rate = get_or(obj, "learning_rate", cfg.learning_rate);
  cfg.batch_size = get_or<std::size_t>(obj, "batch_size", cfg.batch_size);
  cfg.max_iterations = get_or<std::size_t>(obj, "max_iterations", cfg.max_iterations);
  cfg.loss_delta_tol = get_or(obj, "loss_delta_tol", cfg.loss_delta_tol);
  cfg.seed = get_or<std::uint64_t>(obj, "seed", cfg.seed);
  cfg.optimizer = parse_optimizer(get_or<std::string>(obj, "optimizer", "sgd"));
  cfg.mode = parse_mode(get_or<std::string>(obj, "mode", "none"));
  cfg.a = get_or(obj, "a", cfg.a);
  return cfg;
}

Dataset parse_dataset_section(const json& obj) {
  const std::string kind = get_or<std::string>(obj, "kind", "");
  if (kind == "synthetic") {
    check_keys(obj, {"kind", "samples", "informative", "noise", "classes", "seed"},
               "dataset");
    return synthetic_classification(get_or<std::size_t>(obj, "samples", 1000),
                                    get_or(obj, "informative", 10),
                                    get_or(obj, "noise", 10), get_or(obj, "classes", 10),
                                    get_or<std::uint64_t>(obj, "seed", 0));
  }
  if (kind == "csv") {
    check_keys(obj, {"kind", "path", "height", "width", "channels"}, "dataset");
    if (!obj.contains("path")) throw ConfigError("csv dataset needs a 'path'");
    Dataset data = load_csv(obj.at("path").get<std::string>());
    if (obj.contains("height") || obj.contains("width") || obj.contains("channels")) {
      const InputShape shape{get_or(obj, "height", 1), get_or(obj, "width", 1),
                             get_or(obj, "channels", 1)};
      if (shape.flat() != data.features.cols()) {
        throw ConfigError("dataset shape " + std::to_string(shape.height) + "x" +
                          std::to_string(shape.width) + "x" + std::to_string(shape.channels) +
                          " does not match " + std::to_string(data.features.cols()) +
                          " features");
      }
      data.shape = shape;
    }
    return data;
  }
  if (kind == "idx") {
    check_keys(obj, {"kind", "images", "labels"}, "dataset");
    if (!obj.contains("images") || !obj.contains("labels")) {
      throw ConfigError("idx dataset needs 'images' and 'labels' paths");
    }
    return load_idx(obj.at("images").get<std::string>(),
                    obj.at("labels").get<std::string>());
  }
  throw ConfigError("dataset kind must be one of synthetic, csv, idx");
}

std::vector<LayerConfig> parse_layers(const json& arr) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError("network.layers must be a non-empty array");
  }
  std::vector<LayerConfig> configs;
  for (std::size_t l = 0; l < arr.size(); ++l) {
    const json& entry = arr[l];
    const std::string where = "network.layers[" + std::to_string(l) + "]";
    const std::string kind = get_or<std::string>(entry, "kind", "");
    const Activation act = parse_activation(get_or<std::string>(entry, "activation", "relu"));
    if (kind == "dense") {
      check_keys(entry, {"kind", "activation", "units"}, where);
      configs.push_back(LayerConfig::dense(get_or(entry, "units", 0), act));
    } else if (kind == "conv2d") {
      check_keys(entry, {"kind", "activation", "filters", "kernel"}, where);
      configs.push_back(
          LayerConfig::conv2d(get_or(entry, "filters", 0), get_or(entry, "kernel", 0), act));
    } else {
      throw ConfigError(where + ": kind must be dense or conv2d");
    }
  }
  return configs;
}

json report_to_json(const SparsityReport& report) {
  return json{{"nonzero_fraction", report.nonzero_fraction},
              {"neurons_total", report.neurons_total},
              {"neurons_removed", report.neurons_removed},
              {"flop_ratio", report.flop_ratio},
              {"accuracy", report.accuracy}};
}

void apply_override(json& doc, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + spec + "' is not key=value");
  }
  const std::string key = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;  // unquoted strings pass through
  }

  std::vector<std::string> path;
  std::size_t start = 0;
  for (std::size_t dot = key.find('.'); dot != std::string::npos;
       start = dot + 1, dot = key.find('.', start)) {
    path.push_back(key.substr(start, dot - start));
  }
  path.push_back(key.substr(start));
  if (path.size() == 1) path.insert(path.begin(), "train");  // bare keys tune training

  json* node = &doc;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
  (*node)[path.back()] = value;
}

std::string override_suffix(const std::string& spec) {
  std::string safe = spec;
  for (char& c : safe) {
    if (c == '/' || c == '\\') c = '-';
  }
  return "__" + safe;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError(config_path + ": cannot open");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(config_path + ": " + e.what());
  }

  for (const std::string& spec : overrides) apply_override(doc, spec);
  if (const char* env = std::getenv("SPARSEPROX_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError(std::string("SPARSEPROX_SEED is not an integer: ") + env);
    }
    doc["train"]["seed"] = static_cast<std::uint64_t>(v);
  }

  check_keys(doc, {"dataset", "split", "network", "train", "output_dir"}, "config");
  if (!doc.contains("dataset") || !doc.contains("network") || !doc.contains("output_dir")) {
    throw ConfigError("config needs 'dataset', 'network', and 'output_dir'");
  }

  const TrainConfig cfg = parse_train_section(doc.value("train", json::object()));
  const Dataset full = parse_dataset_section(doc.at("dataset"));

  double train_fraction = 0.8;
  std::uint64_t split_seed = cfg.seed;
  if (doc.contains("split")) {
    check_keys(doc.at("split"), {"train_fraction", "seed"}, "split");
    train_fraction = get_or(doc.at("split"), "train_fraction", train_fraction);
    split_seed = get_or<std::uint64_t>(doc.at("split"), "seed", split_seed);
  }
  const auto [train_set, test_set] = split_train_test(full, train_fraction, split_seed);

  const json& net = doc.at("network");
  check_keys(net, {"init", "layers"}, "network");
  const std::string init_name = get_or<std::string>(net, "init", "xavier");
  InitScheme scheme;
  if (init_name == "xavier") {
    scheme = InitScheme::XavierNormal;
  } else if (init_name == "normal") {
    scheme = InitScheme::NormalRandom;
  } else {
    throw ConfigError("unknown init '" + init_name + "' (xavier, normal)");
  }
  if (!net.contains("layers")) throw ConfigError("network needs 'layers'");
  const std::vector<LayerConfig> layers = parse_layers(net.at("layers"));
  NetworkModel model = build_network(full.shape, layers, scheme, cfg.seed);

  std::string out_dir = doc.at("output_dir").get<std::string>();
  for (const std::string& spec : overrides) out_dir += override_suffix(spec);
  std::filesystem::create_directories(out_dir);

  TrainResult result = train(std::move(model), train_set, cfg);

  save_checkpoint(out_dir + "/checkpoint.json", result.model);
  write_trace_csv(out_dir + "/trace.csv", result.trace);
  const SparsityReport report = sparsity_report(result.model, test_set);
  {
    std::ofstream rep_out(out_dir + "/report.json");
    if (!rep_out) throw ConfigError(out_dir + "/report.json: cannot open for writing");
    rep_out << report_to_json(report).dump(2) << '\n';
  }

  std::printf("trained %s for %zu epochs: accuracy %.4f, nonzero %.4f, removed %zu (%s)\n",
              regularizer_mode_name(cfg.mode), result.trace.size(),
              report.accuracy, report.nonzero_fraction, report.neurons_removed,
              out_dir.c_str());
  return 0;
}

int cmd_prox_check(int samples, std::uint64_t seed) {
  const ProxCheckReport report = run_prox_check(samples, seed);
  std::printf("prox-check: samples=%d max_deviation=%.3e tolerance=%.0e\n", report.samples,
              report.max_deviation, kProxCheckTol);
  if (report.max_deviation <= kProxCheckTol) return 0;
  std::printf("worst case: w=%.17g beta=%.17g a=%.17g\n", report.worst_w, report.worst_beta,
              report.worst_a);
  return 1;
}

int cmd_contours(const std::string& kind, double a, double lambda, double gamma, double p,
                 double half_width, int resolution, const std::string& output) {
  PenaltySpec spec;
  bool found = false;
  for (const PenaltyKind k :
       {PenaltyKind::L0, PenaltyKind::L1, PenaltyKind::L2, PenaltyKind::Scad,
        PenaltyKind::Mcp, PenaltyKind::LogPenalty, PenaltyKind::CappedL1, PenaltyKind::Lp,
        PenaltyKind::L1MinusL2, PenaltyKind::Tl1}) {
    if (kind == penalty_kind_name(k)) {
      spec = PenaltySpec::make(k, a, lambda, gamma, p);
      found = true;
      break;
    }
  }
  if (!found) {
    throw ConfigError("unknown penalty '" + kind +
                      "' (l0, l1, l2, scad, mcp, log, capped-l1, lp, l1-l2, tl1)");
  }
  std::ofstream out(output);
  if (!out) throw ConfigError(output + ": cannot open for writing");
  write_contour_csv(spec, half_width, resolution, out);
  if (!out) throw ConfigError(output + ": write failed");
  std::printf("wrote %s: %s on a %dx%d grid over [%g, %g]\n", output.c_str(), kind.c_str(),
              resolution, resolution, -half_width, half_width);
  return 0;
}

int cmd_report(const std::string& checkpoint_path, const std::string& csv_path,
               const std::string& idx_images, const std::string& idx_labels) {
  const NetworkModel model = load_checkpoint(checkpoint_path);
  Dataset data;
  if (!csv_path.empty()) {
    data = load_csv(csv_path);
  } else if (!idx_images.empty() && !idx_labels.empty()) {
    data = load_idx(idx_images, idx_labels);
  } else {
    throw ConfigError("report needs --csv or both --idx-images and --idx-labels");
  }
  if (data.features.cols() != model.input.flat()) {
    throw ConfigError("dataset width " + std::to_string(data.features.cols()) +
                      " does not match model input " + std::to_string(model.input.flat()));
  }
  std::cout << report_to_json(sparsity_report(model, data)).dump(2) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Sparse network training with transformed-l1 and group penalties"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  CLI::App* train_cmd = app.add_subcommand("train", "Train from a JSON config");
  train_cmd->add_option("config", config_path, "JSON run configuration")->required();
  train_cmd->add_option("--override", overrides, "key=value config override (repeatable)");

  int samples = 1000;
  std::uint64_t seed = 1234;
  CLI::App* prox_cmd =
      app.add_subcommand("prox-check", "Compare the closed-form prox against brute force");
  prox_cmd->add_option("--samples", samples, "random (w, beta, a) triples")
      ->check(CLI::PositiveNumber);
  prox_cmd->add_option("--seed", seed, "sampling seed");

  std::string kind;
  double a = 1.0, lambda = 1.0, gamma = 3.7, p = 0.5, half_width = 2.0;
  int resolution = 201;
  std::string output = "contours.csv";
  CLI::App* contour_cmd =
      app.add_subcommand("contours", "Write a 2-D penalty value grid as CSV");
  contour_cmd->add_option("kind", kind, "penalty name (e.g. tl1, l1, scad)")->required();
  contour_cmd->add_option("--a", a, "tl1 shape or capped-l1 cap");
  contour_cmd->add_option("--lambda", lambda, "scad/mcp internal lambda");
  contour_cmd->add_option("--gamma", gamma, "scad/mcp/log shape");
  contour_cmd->add_option("--p", p, "lp exponent in (0, 1)");
  contour_cmd->add_option("--half-width", half_width, "grid extends over [-h, h]");
  contour_cmd->add_option("--resolution", resolution, "points per axis");
  contour_cmd->add_option("--output", output, "CSV path");

  std::string checkpoint_path, csv_path, idx_images, idx_labels;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Sparsity and accuracy report for a checkpoint");
  report_cmd->add_option("checkpoint", checkpoint_path, "checkpoint JSON")->required();
  report_cmd->add_option("--csv", csv_path, "labeled CSV dataset");
  report_cmd->add_option("--idx-images", idx_images, "IDX image file");
  report_cmd->add_option("--idx-labels", idx_labels, "IDX label file");

  int code = 0;
  train_cmd->callback([&] { code = cmd_train(config_path, overrides); });
  prox_cmd->callback([&] { code = cmd_prox_check(samples, seed); });
  contour_cmd->callback([&] {
    code = cmd_contours(kind, a, lambda, gamma, p, half_width, resolution, output);
  });
  report_cmd->callback(
      [&] { code = cmd_report(checkpoint_path, csv_path, idx_images, idx_labels); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int parse_code = app.exit(e);
    return parse_code == 0 ? 0 : 2;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return code;
}

}  // namespace sparseprox
