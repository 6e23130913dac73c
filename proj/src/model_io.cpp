#include "bugclass/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bugclass/error.hpp"

namespace bugclass {

namespace {

using nlohmann::ordered_json;

ordered_json logistic_to_json(const LogisticModel& model) {
  return ordered_json{{"schema_version", 1},
                      {"model_type", "logistic"},
                      {"lambda", model.lambda},
                      {"bias", model.bias},
                      {"weights", model.weights}};
}

ordered_json forest_to_json(const Forest& forest) {
  ordered_json trees = ordered_json::array();
  for (const auto& tree : forest.trees) {
    ordered_json nodes = ordered_json::array();
    for (const auto& nd : tree.nodes) {
      nodes.push_back(ordered_json::array(
          {nd.feature, nd.threshold, nd.left, nd.right, nd.counts[0], nd.counts[1]}));
    }
    trees.push_back(std::move(nodes));
  }
  return ordered_json{{"schema_version", 1},
                      {"model_type", "forest"},
                      {"num_features", forest.num_features},
                      {"mtry", forest.mtry},
                      {"seed", forest.seed},
                      {"trees", std::move(trees)}};
}

}  // namespace

std::string model_to_json(const AnyModel& model) {
  const ordered_json j = std::holds_alternative<LogisticModel>(model)
                             ? logistic_to_json(std::get<LogisticModel>(model))
                             : forest_to_json(std::get<Forest>(model));
  return j.dump(2) + "\n";
}

AnyModel model_from_json(const std::string& text, const std::string& name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    raise(ErrorCode::ParseError, name + ": " + e.what());
  }
  try {
    const std::string type = j.at("model_type").get<std::string>();
    if (type == "logistic") {
      LogisticModel model;
      model.lambda = j.at("lambda").get<double>();
      model.bias = j.at("bias").get<double>();
      model.weights = j.at("weights").get<std::vector<double>>();
      return model;
    }
    if (type == "forest") {
      Forest forest;
      forest.num_features = j.at("num_features").get<std::uint32_t>();
      forest.mtry = j.at("mtry").get<int>();
      forest.seed = j.at("seed").get<std::uint64_t>();
      for (const auto& tree_json : j.at("trees")) {
        DecisionTree tree;
        for (const auto& node_json : tree_json) {
          TreeNode nd;
          nd.feature = node_json.at(0).get<std::int32_t>();
          nd.threshold = node_json.at(1).get<double>();
          nd.left = node_json.at(2).get<std::int32_t>();
          nd.right = node_json.at(3).get<std::int32_t>();
          nd.counts[0] = node_json.at(4).get<std::uint32_t>();
          nd.counts[1] = node_json.at(5).get<std::uint32_t>();
          tree.nodes.push_back(nd);
        }
        forest.trees.push_back(std::move(tree));
      }
      return forest;
    }
    raise(ErrorCode::ParseError, name + ": unknown model_type '" + type + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(ErrorCode::ParseError, name + ": " + e.what());
  }
}

void save_model(const AnyModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << model_to_json(model);
  if (!out.flush()) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open model '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str(), path);
}

}  // namespace bugclass
