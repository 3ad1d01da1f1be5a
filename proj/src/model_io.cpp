#include "bdsym/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bdsym/format.hpp"

namespace bdsym {

using nlohmann::json;

std::string model_to_json(const RateModel& model) {
  json doc;
  doc["family"] = family_name(model.family);
  doc["preset"] = preset_name(model.preset);
  if (model.truncated()) {
    doc["N"] = model.N();
  } else {
    doc["window"] = json::array({model.lo, model.hi});
  }
  json params;
  if (model.preset != Preset::Custom) {
    params["lambda"] = model.params.lambda;
    params["mu"] = model.params.mu;
    params["alpha"] = model.params.alpha;
    params["c"] = model.params.c;
  }
  doc["params"] = params;
  doc["lambda"] = model.lambda;
  doc["mu"] = model.mu;
  doc["alpha"] = model.alpha;
  return doc.dump(2) + "\n";
}

RateModel model_from_json(const std::string& text) {
  json doc = json::parse(text);
  const Family family = family_from_name(doc.at("family").get<std::string>());
  const Preset preset = preset_from_name(doc.value("preset", std::string("custom")));

  long lo = 0, hi = 0;
  if (doc.contains("N")) {
    hi = doc.at("N").get<long>();
  } else if (doc.contains("window")) {
    lo = doc.at("window").at(0).get<long>();
    hi = doc.at("window").at(1).get<long>();
  } else {
    throw std::invalid_argument("model json: need either N or window");
  }

  if (preset != Preset::Custom) {
    PresetParams p;
    p.N = hi;
    p.window_lo = lo;
    p.window_hi = hi;
    const json& params = doc.at("params");
    p.lambda = params.value("lambda", 0.0);
    p.mu = params.value("mu", 0.0);
    p.alpha = params.value("alpha", 0.0);
    p.c = params.value("c", 0.0);
    return build_preset(preset, p);
  }

  std::vector<double> lambda = doc.at("lambda").get<std::vector<double>>();
  std::vector<double> mu = doc.at("mu").get<std::vector<double>>();
  std::vector<double> alpha;
  if (doc.contains("alpha") && !doc.at("alpha").empty()) {
    alpha = doc.at("alpha").get<std::vector<double>>();
  }
  return custom_model(family, lo, hi, std::move(lambda), std::move(mu), std::move(alpha));
}

RateModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

void save_model(const RateModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(model);
}

std::string crossing_to_json(const CrossingResult& result) {
  json doc;
  doc["xi"] = result.xi;
  doc["branch"] = result.geometric_branch ? "geometric" : "certain";
  doc["pi"] = result.pi;
  return doc.dump(2) + "\n";
}

}  // namespace bdsym
