#include <fstream>

#include <json.hpp>

#include "toprank/net.hpp"

namespace toprank {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json branch_to_json(const BranchParams& p) {
  json j;
  j["activation"] =
      p.activation == Activation::ReluTop ? "relu_top" : "sigmoid_reject";
  j["w1"] = {{"rows", p.in_dim}, {"cols", p.hidden_dim}, {"data", p.w1}};
  j["b1"] = {{"rows", p.hidden_dim}, {"data", p.b1}};
  j["w2"] = {{"rows", p.hidden_dim}, {"cols", 1}, {"data", p.w2}};
  j["b2"] = p.b2;
  return j;
}

BranchParams branch_from_json(const json& j) {
  BranchParams p;
  const std::string act = j.at("activation").get<std::string>();
  if (act == "relu_top")
    p.activation = Activation::ReluTop;
  else if (act == "sigmoid_reject")
    p.activation = Activation::SigmoidReject;
  else
    throw DataError("model file: unknown activation '" + act + "'");
  p.in_dim = j.at("w1").at("rows").get<int>();
  p.hidden_dim = j.at("w1").at("cols").get<int>();
  p.w1 = j.at("w1").at("data").get<std::vector<double>>();
  p.b1 = j.at("b1").at("data").get<std::vector<double>>();
  p.w2 = j.at("w2").at("data").get<std::vector<double>>();
  p.b2 = j.at("b2").get<double>();
  if (p.in_dim < 1 || p.hidden_dim < 1 ||
      p.w1.size() != static_cast<size_t>(p.in_dim) * p.hidden_dim ||
      p.b1.size() != static_cast<size_t>(p.hidden_dim) ||
      p.w2.size() != static_cast<size_t>(p.hidden_dim))
    throw DataError("model file: layer shapes are inconsistent");
  return p;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["variant"] = variant_name(model.variant);
  j["input_dim"] = model.params.top.in_dim;
  j["hidden_dim"] = model.params.top.hidden_dim;
  j["top_branch"] = branch_to_json(model.params.top);
  if (model.params.reject)
    j["reject_branch"] = branch_to_json(*model.params.reject);
  if (model.scaler) {
    j["scaler"] = {{"mean", model.scaler->mean},
                   {"scale", model.scaler->scale}};
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing model file: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kFormatVersion)
      throw DataError("model file " + path + ": unsupported format version");
    Model model;
    model.variant = parse_variant(j.at("variant").get<std::string>());
    model.params.top = branch_from_json(j.at("top_branch"));
    if (j.contains("reject_branch"))
      model.params.reject = branch_from_json(j.at("reject_branch"));
    if (uses_rejection(model.variant) != model.params.reject.has_value())
      throw DataError("model file " + path +
                      ": variant and reject branch presence disagree");
    if (j.contains("scaler")) {
      InputScaler s;
      s.mean = j.at("scaler").at("mean").get<std::vector<double>>();
      s.scale = j.at("scaler").at("scale").get<std::vector<double>>();
      if (s.mean.size() != s.scale.size() ||
          s.mean.size() != static_cast<size_t>(model.params.top.in_dim))
        throw DataError("model file " + path + ": scaler shape mismatch");
      model.scaler = std::move(s);
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("model file " + path + ": " + e.what());
  }
}

}  // namespace toprank
