#include "hdlss/model_json.hpp"

#include <set>
#include <string>

namespace hdlss {

namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::InvalidModel, path + ": " + what);
}

void only_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) bad(path, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) bad(path + "." + key, "unknown key");
}

double number(const json& obj, const std::string& path, const char* key,
              std::optional<double> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    bad(path + "." + key, "missing required number");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) bad(path + "." + key, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) bad(path + "." + key, "missing required list");
  const auto& v = obj.at(key);
  if (!v.is_array()) bad(path + "." + key, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

PowerLawRule rule(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) bad(path + "." + key, "missing rho rule");
  const std::string p = path + "." + key;
  const auto& r = obj.at(key);
  only_keys(r, p, {"r", "gamma"});
  return PowerLawRule{number(r, p, "r"), number(r, p, "gamma", 0.0)};
}

json rule_json(const PowerLawRule& r) { return json{{"r", r.scale}, {"gamma", r.decay}}; }

Family family_from(const std::string& name, const json& params) {
  using namespace family;
  const std::string p = "params";
  if (name == "identity") {
    only_keys(params, p, {});
    return Identity{};
  }
  if (name == "single_spike") {
    only_keys(params, p, {"alpha", "c1", "base"});
    return SingleSpike{number(params, p, "alpha"), number(params, p, "c1", 1.0),
                       number(params, p, "base", 1.0)};
  }
  if (name == "multi_spike_groups") {
    only_keys(params, p, {"groups", "base"});
    if (!params.contains("groups") || !params.at("groups").is_array())
      bad(p + ".groups", "expected a list of groups");
    MultiSpikeGroups f;
    const auto& groups = params.at("groups");
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const std::string gp = p + ".groups[" + std::to_string(i) + "]";
      only_keys(groups[i], gp, {"alpha", "c"});
      f.groups.push_back(SpikeGroup{number(groups[i], gp, "alpha"), numbers(groups[i], gp, "c")});
    }
    f.base = number(params, p, "base", 1.0);
    return f;
  }
  if (name == "polynomial_decay") {
    only_keys(params, p, {"beta"});
    return PolynomialDecay{number(params, p, "beta")};
  }
  if (name == "exponential_decay") {
    only_keys(params, p, {"c"});
    return ExponentialDecay{number(params, p, "c")};
  }
  if (name == "growing_spikes") {
    only_keys(params, p, {"alpha", "beta", "c1", "c2"});
    return GrowingSpikes{number(params, p, "alpha"), number(params, p, "beta"),
                         number(params, p, "c1", 1.0), number(params, p, "c2", 1.0)};
  }
  if (name == "equicorrelation") {
    only_keys(params, p, {"rho"});
    return Equicorrelation{rule(params, p, "rho")};
  }
  if (name == "block_equicorrelation") {
    only_keys(params, p, {"rho1", "rho2"});
    return BlockEquicorrelation{rule(params, p, "rho1"), rule(params, p, "rho2")};
  }
  if (name == "explicit_diagonal") {
    only_keys(params, p, {"values"});
    return ExplicitDiagonal{numbers(params, p, "values")};
  }
  bad("family", "unknown family '" + name + "'");
}

}  // namespace

json model_to_json(const CovarianceModel& model) {
  using namespace family;
  json params = std::visit(
      overloaded{
          [](const Identity&) { return json::object(); },
          [](const SingleSpike& f) { return json{{"alpha", f.alpha}, {"c1", f.c1}, {"base", f.base}}; },
          [](const MultiSpikeGroups& f) {
            json groups = json::array();
            for (const auto& g : f.groups) groups.push_back(json{{"alpha", g.alpha}, {"c", g.scales}});
            return json{{"groups", groups}, {"base", f.base}};
          },
          [](const PolynomialDecay& f) { return json{{"beta", f.beta}}; },
          [](const ExponentialDecay& f) { return json{{"c", f.c}}; },
          [](const GrowingSpikes& f) {
            return json{{"alpha", f.alpha}, {"beta", f.beta}, {"c1", f.c1}, {"c2", f.c2}};
          },
          [](const Equicorrelation& f) { return json{{"rho", rule_json(f.rho)}}; },
          [](const BlockEquicorrelation& f) {
            return json{{"rho1", rule_json(f.rho1)}, {"rho2", rule_json(f.rho2)}};
          },
          [](const ExplicitDiagonal& f) { return json{{"values", f.values}}; },
      },
      model.family());
  return json{{"family", std::string(model.family_name())},
              {"params", params},
              {"mixing", std::string(to_string(model.mixing()))}};
}

CovarianceModel model_from_json(const json& doc) {
  only_keys(doc, "model", {"family", "params", "mixing"});
  if (!doc.contains("family") || !doc.at("family").is_string())
    bad("family", "expected a family name");
  const json params = doc.contains("params") ? doc.at("params") : json::object();
  Mixing mixing = Mixing::IndependentComponents;
  if (doc.contains("mixing")) {
    if (!doc.at("mixing").is_string()) bad("mixing", "expected a string");
    mixing = mixing_from_string(doc.at("mixing").get<std::string>());
  }
  return CovarianceModel(family_from(doc.at("family").get<std::string>(), params), mixing);
}

}  // namespace hdlss
