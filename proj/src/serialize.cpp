#include <json.hpp>

#include <stdexcept>
#include <utility>

#include "isocal/calibrate.hpp"
#include "isocal/io_util.hpp"
#include "isocal/isotonic.hpp"

namespace isocal {
namespace {

void append_array(std::string& out, const std::vector<double>& v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
}

StepFunction step_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("step function json: not an object");
  }
  double base = j.at("base_level").get<double>();
  auto jumps = j.at("jump_points").get<std::vector<double>>();
  auto incs = j.at("increments").get<std::vector<double>>();
  return StepFunction(base, std::move(jumps), std::move(incs));
}

constexpr const char* kPaperRuleName = "floor_k_over_2_clamped";
constexpr const char* kStandardRuleName = "ceil_k_over_2";

void append_base(std::string& out, const BasePredictor& base) {
  out += "{\"kind\":\"";
  out += BasePredictor::kind_name(base.kind);
  out += "\",\"params\":";
  switch (base.kind) {
    case BasePredictor::Kind::tau_hat_column:
    case BasePredictor::Kind::oracle_tau0:
      out += "{}";
      break;
    case BasePredictor::Kind::constant:
      out += "{\"value\":";
      out += format_double(base.constant);
      out += '}';
      break;
    case BasePredictor::Kind::linear:
      out += "{\"coef\":";
      append_array(out, base.linear.coef);
      out += '}';
      break;
    case BasePredictor::Kind::boosted_stumps: {
      out += "{\"initial\":";
      out += format_double(base.stumps.initial);
      out += ",\"learning_rate\":";
      out += format_double(base.stumps.learning_rate);
      out += ",\"stumps\":[";
      for (std::size_t i = 0; i < base.stumps.stumps.size(); ++i) {
        const Stump& s = base.stumps.stumps[i];
        if (i) out += ',';
        out += "{\"feature\":";
        out += std::to_string(s.feature);
        out += ",\"threshold\":";
        out += format_double(s.threshold);
        out += ",\"left\":";
        out += format_double(s.left);
        out += ",\"right\":";
        out += format_double(s.right);
        out += '}';
      }
      out += "]}";
      break;
    }
  }
  out += '}';
}

BasePredictor base_from_json(const nlohmann::json& j) {
  BasePredictor base;
  base.kind = BasePredictor::kind_from_name(j.at("kind").get<std::string>());
  const nlohmann::json& params = j.at("params");
  switch (base.kind) {
    case BasePredictor::Kind::tau_hat_column:
    case BasePredictor::Kind::oracle_tau0:
      break;
    case BasePredictor::Kind::constant:
      base.constant = params.at("value").get<double>();
      break;
    case BasePredictor::Kind::linear:
      base.linear.coef = params.at("coef").get<std::vector<double>>();
      if (base.linear.coef.empty()) {
        throw std::invalid_argument("calibrator json: empty linear coef");
      }
      break;
    case BasePredictor::Kind::boosted_stumps: {
      base.stumps.initial = params.at("initial").get<double>();
      base.stumps.learning_rate = params.at("learning_rate").get<double>();
      for (const auto& js : params.at("stumps")) {
        Stump s;
        s.feature = js.at("feature").get<std::size_t>();
        s.threshold = js.at("threshold").get<double>();
        s.left = js.at("left").get<double>();
        s.right = js.at("right").get<double>();
        base.stumps.stumps.push_back(s);
      }
      break;
    }
  }
  return base;
}

}  // namespace

std::string step_function_to_json(const StepFunction& f) {
  std::string out = "{\"base_level\":";
  out += format_double(f.base_level());
  out += ",\"jump_points\":";
  append_array(out, f.jump_points());
  out += ",\"increments\":";
  append_array(out, f.increments());
  out += '}';
  return out;
}

StepFunction step_function_from_json(const std::string& text) {
  return step_from_json(nlohmann::json::parse(text));
}

std::string calibrator_to_json(const CalibratorModel& model) {
  if (model.predictor.members.empty()) {
    throw std::invalid_argument("calibrator json: no members");
  }
  std::string out = "{\"kind\":\"";
  out += CalibratorModel::kind_name(model.kind);
  out += "\",\"members\":[";
  for (std::size_t m = 0; m < model.predictor.members.size(); ++m) {
    const CalibratedPredictor& member = model.predictor.members[m];
    if (m) out += ',';
    out += "{\"theta\":";
    out += step_function_to_json(member.theta);
    out += ",\"base\":";
    append_base(out, member.base);
    out += '}';
  }
  out += "],\"median_index_rule\":\"";
  out += model.predictor.rule == MedianRule::paper ? kPaperRuleName
                                                   : kStandardRuleName;
  out += "\"}";
  return out;
}

CalibratorModel calibrator_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) {
    throw std::invalid_argument("calibrator json: not an object");
  }
  CalibratorModel model;
  model.kind = CalibratorModel::kind_from_name(j.at("kind").get<std::string>());
  const std::string rule = j.at("median_index_rule").get<std::string>();
  if (rule == kPaperRuleName) {
    model.predictor.rule = MedianRule::paper;
  } else if (rule == kStandardRuleName) {
    model.predictor.rule = MedianRule::standard;
  } else {
    throw std::invalid_argument("calibrator json: unknown median rule: " + rule);
  }
  const nlohmann::json& members = j.at("members");
  if (!members.is_array() || members.empty()) {
    throw std::invalid_argument("calibrator json: members must be nonempty");
  }
  for (const auto& jm : members) {
    CalibratedPredictor member;
    member.theta = step_from_json(jm.at("theta"));
    member.base = base_from_json(jm.at("base"));
    model.predictor.members.push_back(std::move(member));
  }
  return model;
}

}  // namespace isocal
