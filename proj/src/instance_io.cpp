#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rasddp/json_util.hpp"
#include "rasddp/stage_model.hpp"

namespace rasddp {

using nlohmann::json;

json number_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ModelError("invalid numeric string '" + s + "'");
  }
  if (!j.is_number()) throw ModelError("expected a number, got " + j.dump());
  return j.get<double>();
}

json vector_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_to_json(x));
  return a;
}

std::vector<double> vector_from_json(const json& j) {
  if (!j.is_array()) throw ModelError("expected an array, got " + j.dump());
  std::vector<double> v;
  v.reserve(j.size());
  for (const json& x : j) v.push_back(number_from_json(x));
  return v;
}

namespace {

json matrix_to_json(const SparseMatrix& m) {
  json t = json::array();
  for (const Triplet& e : m.entries) t.push_back(json::array({e.row, e.col, e.value}));
  return {{"rows", m.rows}, {"cols", m.cols}, {"triplets", t}};
}

SparseMatrix matrix_from_json(const json& j, int rows, int cols) {
  SparseMatrix m(j.value("rows", rows), j.value("cols", cols));
  for (const json& e : j.at("triplets")) {
    if (!e.is_array() || e.size() != 3) throw ModelError("triplet must be [row, col, value]");
    m.add(e[0].get<int>(), e[1].get<int>(), number_from_json(e[2]));
  }
  return m;
}

json realization_to_json(const StageRealization& r, bool with_b_matrix) {
  json j;
  j["c"] = vector_to_json(r.c);
  if (with_b_matrix) j["B"] = matrix_to_json(r.B);
  j["A"] = matrix_to_json(r.A);
  j["b"] = vector_to_json(r.b);
  j["lb"] = vector_to_json(r.lb);
  j["ub"] = vector_to_json(r.ub);
  return j;
}

StageRealization realization_from_json(const json& j, int prev_dim) {
  StageRealization r;
  r.c = vector_from_json(j.at("c"));
  r.b = vector_from_json(j.at("b"));
  const int n = static_cast<int>(r.c.size());
  const int m = static_cast<int>(r.b.size());
  r.lb = j.contains("lb") ? vector_from_json(j["lb"]) : std::vector<double>(n, 0.0);
  r.ub = j.contains("ub") ? vector_from_json(j["ub"]) : std::vector<double>(n, kInf);
  r.A = matrix_from_json(j.at("A"), m, n);
  r.B = j.contains("B") ? matrix_from_json(j["B"], m, prev_dim) : SparseMatrix(m, prev_dim);
  return r;
}

}  // namespace

std::string instance_to_json_text(const Instance& instance) {
  json doc;
  doc["horizon"] = instance.horizon();
  doc["first_stage"] = realization_to_json(instance.first_stage, false);
  json stages = json::array();
  for (const StageData& s : instance.stages) {
    json js;
    json reals = json::array();
    for (const StageRealization& r : s.realizations) reals.push_back(realization_to_json(r, true));
    js["realizations"] = reals;
    js["weights"] = vector_to_json(s.effective_weights());
    if (s.cost_to_go_lower_bound != 0.0) js["lower_bound"] = s.cost_to_go_lower_bound;
    stages.push_back(js);
  }
  doc["stages"] = stages;
  if (!instance.variable_names.empty()) doc["variable_names"] = instance.variable_names;
  if (instance.reporting_horizon > 0) doc["reporting_horizon"] = instance.reporting_horizon;
  return doc.dump();
}

Instance instance_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("instance JSON parse error: ") + e.what());
  }
  try {
    Instance inst;
    inst.first_stage = realization_from_json(doc.at("first_stage"), 0);
    inst.first_stage.B = SparseMatrix(inst.first_stage.num_rows(), 0);
    int prev_dim = inst.first_stage.num_vars();
    for (const json& js : doc.at("stages")) {
      StageData s;
      for (const json& jr : js.at("realizations")) {
        s.realizations.push_back(realization_from_json(jr, prev_dim));
      }
      if (js.contains("weights")) s.weights = vector_from_json(js["weights"]);
      s.cost_to_go_lower_bound = js.value("lower_bound", 0.0);
      if (!s.realizations.empty()) prev_dim = s.realizations.front().num_vars();
      inst.stages.push_back(std::move(s));
    }
    if (doc.contains("horizon") && doc["horizon"].get<int>() != inst.horizon()) {
      throw ModelError("horizon field disagrees with the number of stages");
    }
    if (doc.contains("variable_names")) {
      inst.variable_names = doc["variable_names"].get<std::vector<std::string>>();
    }
    inst.reporting_horizon = doc.value("reporting_horizon", 0);
    return inst;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed instance: ") + e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open instance file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return instance_from_json_text(ss.str());
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write instance file " + path);
  out << instance_to_json_text(instance) << "\n";
}

}  // namespace rasddp
