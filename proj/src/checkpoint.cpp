#include "sparseprox/checkpoint.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace sparseprox {

namespace {

using nlohmann::json;

json weights_to_json(const Matrix& w) {
  json rows = json::array();
  for (std::size_t i = 0; i < w.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < w.cols(); ++j) row.push_back(w(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Activation parse_activation(const std::string& name, const std::string& path) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "softmax") return Activation::Softmax;
  throw std::runtime_error(path + ": unknown activation '" + name + "'");
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkModel& model) {
  json doc;
  doc["input"] = {{"height", model.input.height},
                  {"width", model.input.width},
                  {"channels", model.input.channels}};
  json layers = json::array();
  for (const Layer& layer : model.layers) {
    json entry;
    entry["kind"] = layer_kind_name(layer.kind);
    entry["activation"] = activation_name(layer.activation);
    if (layer.kind == LayerKind::Dense) {
      entry["units"] = layer.output_len;
    } else {
      entry["filters"] = layer.conv.filters;
      entry["kernel"] = layer.conv.kernel;
    }
    entry["weights"] = weights_to_json(layer.w);
    entry["bias"] = layer.bias;
    layers.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

NetworkModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  try {
    const json& input = doc.at("input");
    const InputShape shape{input.at("height").get<int>(), input.at("width").get<int>(),
                           input.at("channels").get<int>()};

    std::vector<LayerConfig> configs;
    for (const json& entry : doc.at("layers")) {
      const std::string kind = entry.at("kind").get<std::string>();
      const Activation act =
          parse_activation(entry.at("activation").get<std::string>(), path);
      if (kind == "dense") {
        configs.push_back(LayerConfig::dense(entry.at("units").get<int>(), act));
      } else if (kind == "conv2d") {
        configs.push_back(LayerConfig::conv2d(entry.at("filters").get<int>(),
                                              entry.at("kernel").get<int>(), act));
      } else {
        throw std::runtime_error(path + ": unknown layer kind '" + kind + "'");
      }
    }

    NetworkModel model = build_network(shape, configs, InitScheme::XavierNormal, 0);
    const json& layers = doc.at("layers");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      Layer& layer = model.layers[l];
      const json& rows = layers[l].at("weights");
      if (rows.size() != layer.w.rows()) {
        throw std::runtime_error(path + ": layer " + std::to_string(l + 1) +
                                 " has the wrong weight row count");
      }
      for (std::size_t i = 0; i < layer.w.rows(); ++i) {
        const json& row = rows[i];
        if (row.size() != layer.w.cols()) {
          throw std::runtime_error(path + ": layer " + std::to_string(l + 1) +
                                   " has the wrong weight row length");
        }
        for (std::size_t j = 0; j < layer.w.cols(); ++j) layer.w(i, j) = row[j].get<double>();
      }
      const json& bias = layers[l].at("bias");
      if (bias.size() != layer.bias.size()) {
        throw std::runtime_error(path + ": layer " + std::to_string(l + 1) +
                                 " has the wrong bias length");
      }
      for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] = bias[i].get<double>();
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace sparseprox
