#pragma once

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "cusp/domain.hpp"
#include "cusp/errors.hpp"

namespace cusp {

using json = nlohmann::ordered_json;

inline json scalar_json(const RealScalar& s) {
  return {{"value", to_decimal(s.value)}, {"err", to_decimal(s.err, 6)}};
}
inline json scalar_json(const Real& v, const Real& e) { return scalar_json(RealScalar(v, e)); }

inline json ext_json(const ExtendedReal& x) {
  if (x.is_inf()) return "inf";
  return to_decimal(x.value());
}

inline json matrix_json(const MoebiusMap& m) {
  return json::array({json::array({to_decimal(m.a), to_decimal(m.b)}),
                      json::array({to_decimal(m.c), to_decimal(m.d)})});
}

inline Real json_real(const json& j, const std::string& what) {
  try {
    if (j.is_string()) return Real(j.get<std::string>());
    if (j.is_number_integer()) return Real(j.get<long long>());
    if (j.is_number()) return Real(j.get<double>());
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "expected a decimal for " + what);
}

inline ExtendedReal json_ext(const json& j, const std::string& what) {
  if (j.is_string() && (j == "inf" || j == "infinity")) return ExtendedReal::infinity();
  return ExtendedReal(json_real(j, what));
}

inline MoebiusMap json_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() ||
      j[0].size() != 2 || j[1].size() != 2)
    throw Error(ErrorCode::ParseError, "matrix " + what + " must be [[a,b],[c,d]]");
  return MoebiusMap::make(json_real(j[0][0], what), json_real(j[0][1], what),
                          json_real(j[1][0], what), json_real(j[1][1], what));
}

/// DomainFile form. Side endpoints are included so a round trip is exact.
inline json serialize_domain(const IdealPolygonDomain& D) {
  json j;
  j["d"] = D.d;
  j["letters"] = json::array();
  for (int i = 0; i < D.size(); ++i)
    j["letters"].push_back({{"name", D.names[i]}, {"bar_of", D.names[i ^ 1]}});
  j["generators"] = json::object();
  for (int i = 0; i < D.size(); ++i) j["generators"][D.names[i]] = matrix_json(D.gens[i]);
  j["eta"] = D.name(D.eta);
  j["mu"] = to_decimal(D.mu.value);
  j["margulis"] = to_decimal(D.margulis.value);
  j["sides"] = json::object();
  for (int i = 0; i < D.size(); ++i)
    j["sides"][D.names[i]] = json::array({ext_json(D.arcs[i].xl), ext_json(D.arcs[i].xr)});
  return j;
}

/// Parses a DomainFile. Without "sides" the Ford-domain sides are derived
/// from the generators. The result must pass validate().
inline IdealPolygonDomain load_domain(const json& j, bool require_valid = true) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "domain file must be an object");
  for (const char* key : {"d", "letters", "generators", "mu"})
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field ") + key);
  if (!j.contains("eta") || j["eta"].is_null())
    throw Error(ErrorCode::InvalidDomain, "eta not designated");
  const int d = j["d"].get<int>();
  if (d < 2) throw Error(ErrorCode::InvalidDomain, "d must be at least 2");
  const json& letters = j["letters"];
  if (!letters.is_array() || (int)letters.size() != 2 * d)
    throw Error(ErrorCode::InvalidDomain, "letters must list 2d symbols");
  std::map<std::string, std::string> partner;
  for (const auto& l : letters) {
    if (!l.contains("name") || !l.contains("bar_of"))
      throw Error(ErrorCode::ParseError, "letter needs name and bar_of");
    std::string name = l["name"], bar = l["bar_of"];
    if (name == bar) throw Error(ErrorCode::InvalidDomain, "letter " + name + " is its own bar");
    if (!partner.emplace(name, bar).second)
      throw Error(ErrorCode::InvalidDomain, "duplicate letter " + name);
  }
  std::vector<std::string> names;
  std::map<std::string, int> id;
  for (const auto& l : letters) {
    std::string name = l["name"];
    if (id.count(name)) continue;
    auto it = partner.find(partner[name]);
    if (it == partner.end() || it->second != name)
      throw Error(ErrorCode::InvalidDomain, "bar table is not an involution at " + name);
    id[name] = (int)names.size();
    names.push_back(name);
    id[partner[name]] = (int)names.size();
    names.push_back(partner[name]);
  }
  std::vector<MoebiusMap> gens(2 * d);
  std::vector<bool> have(2 * d, false);
  for (auto it = j["generators"].begin(); it != j["generators"].end(); ++it) {
    if (!id.count(it.key())) throw Error(ErrorCode::InvalidDomain, "generator for unknown letter");
    int i = id[it.key()];
    gens[i] = json_matrix(it.value(), it.key());
    have[i] = true;
  }
  for (int i = 0; i < 2 * d; ++i) {
    if (have[i] && have[i ^ 1] &&
        !proj_equal(gens[i ^ 1], inverse(gens[i]), Real(1e-20) * (1 + gens[i].max_entry())))
      throw Error(ErrorCode::InvalidDomain, "generator of " + names[i ^ 1] + " is not the inverse");
    if (!have[i]) {
      if (!have[i ^ 1]) throw Error(ErrorCode::InvalidDomain, "missing generator for " + names[i]);
      gens[i] = inverse(gens[i ^ 1]);
    }
  }
  std::string eta = j["eta"];
  if (!id.count(eta)) throw Error(ErrorCode::InvalidDomain, "eta not designated");
  RealScalar mu(json_real(j["mu"], "mu"));
  RealScalar m(j.contains("margulis") ? json_real(j["margulis"], "margulis") : Real(1));
  IdealPolygonDomain D =
      domain_from_generators(d, names, gens, Letter::from_id(id[eta]), mu, m);
  if (j.contains("sides")) {
    for (auto it = j["sides"].begin(); it != j["sides"].end(); ++it) {
      if (!id.count(it.key())) throw Error(ErrorCode::InvalidDomain, "side for unknown letter");
      const json& s = it.value();
      if (!s.is_array() || s.size() != 2) throw Error(ErrorCode::ParseError, "side needs [l, r]");
      D.arcs[id[it.key()]] = Arc::from_x(json_ext(s[0], it.key()), json_ext(s[1], it.key()));
    }
    finalize(D);
  }
  if (j.contains("label")) D.label = j["label"];
  if (require_valid) {
    ValidationReport r = validate(D);
    if (!r.pass) {
      std::string why;
      for (const auto& c : r.conditions)
        if (!c.pass) why += (why.empty() ? "" : "; ") + c.name;
      throw Error(ErrorCode::InvalidDomain, "validation failed: " + why +
                                                " (domain surgery is not automated; adjust the sides)");
    }
  }
  return D;
}

inline IdealPolygonDomain load_domain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return load_domain(j);
}

inline json report_json(const ValidationReport& r) {
  json j;
  j["pass"] = r.pass;
  j["conditions"] = json::array();
  for (const auto& c : r.conditions)
    j["conditions"].push_back({{"name", c.name},
                               {"pass", c.pass},
                               {"residual", to_decimal(c.residual, 6)},
                               {"margin", to_decimal(c.margin, 12)},
                               {"note", c.note}});
  j["notes"] = r.notes;
  j["min_abs_c"] = to_decimal(r.min_abs_c, 12);
  return j;
}

}  // namespace cusp
