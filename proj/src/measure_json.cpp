#include "freeclt/measure_json.hpp"

namespace freeclt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Parse, std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(ErrorKind::Parse, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

nlohmann::json to_json(const Measure& mu) {
  return std::visit(overloaded{
                        [](const Atoms& a) {
                          nlohmann::json pts = nlohmann::json::array();
                          for (const auto& p : a.points) pts.push_back({p.position, p.weight});
                          return nlohmann::json{{"type", "atoms"}, {"points", pts}};
                        },
                        [](const Semicircle& s) {
                          return nlohmann::json{{"type", "semicircle"}, {"mean", s.mean}, {"variance", s.variance}};
                        },
                        [](const FreePoisson& p) {
                          return nlohmann::json{
                              {"type", "free_poisson"}, {"rate", p.rate}, {"shift", p.shift}, {"scale", p.scale}};
                        },
                        [](const GridDensity& g) {
                          std::vector<double> s(g.samples.begin(), g.samples.end());
                          return nlohmann::json{{"type", "grid"}, {"a", g.a}, {"b", g.b}, {"samples", s}};
                        },
                    },
                    mu.variant());
}

Measure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorKind::Parse, "measure JSON needs a string 'type'");
  }
  const auto type = j.at("type").get<std::string>();
  if (type == "atoms") {
    if (!j.contains("points") || !j.at("points").is_array()) throw Error(ErrorKind::Parse, "atoms need 'points'");
    std::vector<Atom> pts;
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw Error(ErrorKind::Parse, "each atom must be [position, weight]");
      }
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return Measure::atoms(std::move(pts));
  }
  if (type == "semicircle") return Measure::semicircle(number(j, "mean"), number(j, "variance"));
  if (type == "free_poisson") {
    const double scale = j.contains("scale") ? number(j, "scale") : 1.0;
    return Measure::free_poisson(number(j, "rate"), number(j, "shift"), scale);
  }
  if (type == "grid") {
    if (!j.contains("samples") || !j.at("samples").is_array()) throw Error(ErrorKind::Parse, "grid needs 'samples'");
    const auto& s = j.at("samples");
    Eigen::ArrayXd samples(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number()) throw Error(ErrorKind::Parse, "grid samples must be numbers");
      samples[static_cast<Eigen::Index>(i)] = s[i].get<double>();
    }
    return Measure::grid(number(j, "a"), number(j, "b"), std::move(samples));
  }
  throw Error(ErrorKind::Parse, "unknown measure type '" + type + "'");
}

Measure parse_measure(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  return measure_from_json(j);
}

}  // namespace freeclt
