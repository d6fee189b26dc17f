// cusp-ray: command-line front end for the Hall-ray toolkit.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cusp/domain_io.hpp"
#include "cusp/perron.hpp"
#include "cusp/proper_height.hpp"

using namespace cusp;

namespace {

constexpr int kExitOk = 0, kExitPrecondition = 2, kExitVerdict = 3, kExitUsage = 64;
constexpr int kEffectiveBits = 113;  // float128 significand

struct RunConfig {
  std::string command;
  std::string domain = "builtin:t3sphere";
  int precision = 128;
  std::string tol = "1e-9";
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 1;
};

/// Tabular part of a result, written as aligned CSV.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Result {
  json body = json::object();
  std::optional<Table> table;
  bool verdict_fail = false;
};

/// Usage problems that CLI11 cannot see (bad combinations, unreadable files).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Real parse_real(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    (void)std::stold(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return Real(s);
  } catch (const std::exception&) {
    throw UsageError("expected a decimal for " + what + ", got '" + s + "'");
  }
}

IdealPolygonDomain load(const RunConfig& cfg) {
  const std::string& d = cfg.domain;
  if (d == "builtin:t3sphere" || d == "t3sphere") return builtin_thrice_punctured();
  if (d == "builtin:t3sphere-raw" || d == "t3sphere-raw") return builtin_thrice_punctured(true);
  if (d.rfind("builtin:", 0) == 0) throw UsageError("unknown builtin domain " + d);
  return load_domain_file(d);
}

json sj(const Real& v, const Real& e = 0) { return scalar_json(v, e); }
json sj(const RealScalar& s) { return scalar_json(s); }

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object() && v.contains("value")) return v["value"].get<std::string>();
  return v.dump();
}

void write_csv(std::ostream& os, const Table& t) {
  std::vector<size_t> width(t.header.size());
  for (size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
  for (auto& r : t.rows)
    for (size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  auto line = [&](const std::vector<std::string>& r) {
    for (size_t c = 0; c < r.size(); ++c) {
      os << std::setw((int)width[c]) << r[c];
      if (c + 1 < r.size()) os << ", ";
    }
    os << "\n";
  };
  line(t.header);
  for (auto& r : t.rows) line(r);
}

/// Flat key/value rows for results without a natural table.
Table flatten(const json& j) {
  Table t{{"key", "value"}, {}};
  std::function<void(const json&, const std::string&)> walk = [&](const json& v, const std::string& k) {
    if (v.is_object() && !(v.size() == 2 && v.contains("value") && v.contains("err"))) {
      for (auto it = v.begin(); it != v.end(); ++it) walk(it.value(), k.empty() ? it.key() : k + "." + it.key());
    } else if (v.is_array() && !v.empty() && (v[0].is_object() || v[0].is_array())) {
      for (size_t i = 0; i < v.size(); ++i) walk(v[i], k + "[" + std::to_string(i) + "]");
    } else if (v.is_object()) {
      t.rows.push_back({k, v["value"].get<std::string>()});
      t.rows.push_back({k + ".err", v["err"].get<std::string>()});
    } else {
      t.rows.push_back({k, csv_cell(v)});
    }
  };
  walk(j, "");
  return t;
}

json witness_json(const IdealPolygonDomain& D, const WitnessSpec& w) {
  auto stream = [&](const CantorStream& c) {
    return json{{"stream", stream_to_string(D, c.stream)}, {"point", sj(c.point, c.err)}};
  };
  json j{{"target_L", to_decimal(w.target_L)},
         {"realized_L", sj(w.realized_L, w.a.err + w.b.err)},
         {"N", w.N},
         {"s", w.s},
         {"x1", to_decimal(w.x1)},
         {"x2", to_decimal(w.x2)},
         {"a", stream(w.a)},
         {"b", stream(w.b)},
         {"window", word_to_string(D, w.window(D, w.r(0) - 8, w.r(0) + std::min<long>(w.s, 40) + 8))}};
  return j;
}

WitnessSpec witness_from_json(const IdealPolygonDomain& D, const json& j) {
  for (const char* k : {"N", "s", "x1", "x2", "target_L"})
    if (!j.contains(k)) throw UsageError(std::string("witness file lacks '") + k + "'");
  return assemble_witness(D, j["N"].get<int>(), j["s"].get<long>(), json_real(j["x1"], "x1"),
                          json_real(j["x2"], "x2"), json_real(j["target_L"], "target_L"));
}

json witness_report_json(const WitnessReport& R) {
  json sub = json::array();
  for (auto& v : R.subsequence_values) sub.push_back({{"k", v.k}, {"r", v.r}, {"value", sj(v.value)}});
  json cases = json::object();
  for (auto& kv : R.case_counts) cases[kv.first] = kv.second;
  return {{"pass", R.pass},
          {"windows", R.windows},
          {"final_deviation", sj(R.final_deviation)},
          {"stream_err", sj(R.stream_err)},
          {"off_subsequence_max", sj(R.off_subsequence_max)},
          {"off_argmax", R.off_argmax},
          {"central_spread", sj(R.central_spread)},
          {"case_counts", cases},
          {"bridges", R.bridges},
          {"fallback_bridges", R.fallback_bridges},
          {"failures", R.failures},
          {"subsequence", sub}};
}

HeightFunction height_from_config(const IdealPolygonDomain& D, const std::string& path,
                                  const std::optional<std::string>& delta,
                                  const std::optional<std::string>& l0) {
  BumpParams b;
  bool have_cutoff = false;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(e.what());
    }
    b.delta = json_real(j.at("delta"), "delta");
    b.l0 = json_real(j.at("l0"), "l0");
    if (j.contains("cutoff")) {
      const json& c = j["cutoff"];
      if (c.value("type", "smoothstep") != "smoothstep")
        throw UsageError("only the smoothstep cutoff is supported");
      b.lo = json_real(c.at("lo"), "cutoff.lo");
      b.hi = json_real(c.at("hi"), "cutoff.hi");
      have_cutoff = true;
    }
  }
  if (delta) b.delta = parse_real(*delta, "--delta");
  if (l0) b.l0 = parse_real(*l0, "--l0");
  if (!have_cutoff) b.lo = b.l0, b.hi = b.l0 + 1;
  if (b.delta == 0) return HeightFunction::im(D, b.l0);
  return HeightFunction::bump(D, b);
}

json height_json(const HeightFunction& h) {
  return {{"name", h.name},
          {"l0", to_decimal(h.l0)},
          {"sup_cert", to_decimal(h.sup_cert, 12)},
          {"lip_cert", to_decimal(h.lip_cert, 12)},
          {"certified_lip_norm", to_decimal(h.certified_lip_norm(), 12)}};
}

json blocks_json(const IdealPolygonDomain& D, const std::vector<CuspidalBlock>& blocks, long r0,
                 Table& t) {
  json arr = json::array();
  t.header = {"r", "start", "length", "kind", "word"};
  long r = r0;
  for (auto& b : blocks) {
    arr.push_back({{"r", r},
                   {"start", b.start},
                   {"length", b.word.size()},
                   {"kind", block_kind_name(b.kind)},
                   {"word", word_to_string(D, b.word)}});
    t.rows.push_back({std::to_string(r), std::to_string(b.start), std::to_string(b.word.size()),
                      block_kind_name(b.kind), word_to_string(D, b.word)});
    ++r;
  }
  return arr;
}

std::vector<long> parse_cf_period(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      long v = std::stol(item, &used);
      while (used < item.size() && isspace((unsigned char)item[used])) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("partial quotients must be integers: '" + item + "'");
    }
  }
  return out;
}

PeriodicBiWord periodic_word(const IdealPolygonDomain& D, const std::string& period,
                             const std::string& pre) {
  PeriodicBiWord w = PeriodicBiWord::purely(parse_word(D, period));
  if (!pre.empty()) w.pre = parse_word(D, pre);
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cusp-ray: Hall rays in Lagrange spectra of cusped hyperbolic surfaces"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  RunConfig cfg;
  app.add_option("--domain", cfg.domain, "domain file or builtin:t3sphere[-raw]");
  app.add_option("--precision", cfg.precision, "requested precision in bits (113 are used)");
  app.add_option("--tol", cfg.tol, "tolerance");
  app.add_option("--out", cfg.out, "output path (stdout when absent)");
  app.add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", cfg.seed, "seed for randomized sampling");

  std::function<Result()> action;
  auto on = [&](CLI::App* sub, std::string name, std::function<Result()> f) {
    sub->callback([&cfg, &action, name, f] {
      cfg.command = name;
      action = f;
    });
  };

  // ------------------------------------------------ domain
  auto* domain = app.add_subcommand("domain", "fundamental domain")->require_subcommand(1);
  std::string builtin;
  for (auto* s : {domain->add_subcommand("validate", "check the five domain conditions"),
                  domain->add_subcommand("show", "print the domain")})
    s->add_option("--builtin", builtin, "builtin domain name");
  on(domain->get_subcommand("validate"), "domain validate", [&] {
    if (!builtin.empty()) cfg.domain = "builtin:" + builtin;
    IdealPolygonDomain D = load(cfg);
    ValidationReport r = validate(D, std::min(parse_real(cfg.tol, "--tol"), Real(1e-10)));
    Result out;
    out.body = report_json(r);
    Table t{{"condition", "pass", "residual", "margin", "note"}, {}};
    for (auto& c : r.conditions)
      t.rows.push_back({c.name, c.pass ? "true" : "false", to_decimal(c.residual, 6), to_decimal(c.margin, 12), c.note});
    out.table = t;
    out.verdict_fail = !r.pass;
    return out;
  });
  on(domain->get_subcommand("show"), "domain show", [&] {
    if (!builtin.empty()) cfg.domain = "builtin:" + builtin;
    IdealPolygonDomain D = load(cfg);
    Result out;
    out.body["domain"] = serialize_domain(D);
    out.body["mu"] = sj(D.mu);
    out.body["margulis"] = sj(D.margulis);
    json par = json::array();
    for (auto& p : parabolic_words(D))
      par.push_back({{"word", word_to_string(D, p.word)},
                     {"side", p.side == Side::left ? "left" : "right"},
                     {"fixed_point", ext_json(p.fixed_x)},
                     {"element", matrix_json(p.element)}});
    out.body["parabolic_words"] = par;
    return out;
  });

  // ------------------------------------------------ code
  auto* code = app.add_subcommand("code", "boundary expansions")->require_subcommand(1);
  auto* expand_cmd = code->add_subcommand("expand", "point -> letters, or stream -> point");
  std::optional<std::string> x_opt, angle_opt, stream_opt;
  int depth = 40;
  expand_cmd->add_option("--x", x_opt, "boundary point in H coordinates");
  expand_cmd->add_option("--angle", angle_opt, "boundary point as a disc angle");
  expand_cmd->add_option("--stream", stream_opt, "letters 'pre | period' to locate");
  expand_cmd->add_option("--depth", depth, "number of letters");
  on(expand_cmd, "code expand", [&] {
    IdealPolygonDomain D = load(cfg);
    Result out;
    if (stream_opt) {
      if (x_opt || angle_opt) throw UsageError("give either --stream or a point");
      PointEstimate p = point_of_stream(D, parse_stream(D, *stream_opt), depth);
      ExtendedReal x = inv_cayley(p.point);
      out.body = {{"stream", *stream_opt}, {"depth", depth}, {"angle", sj(p.point.angle)},
                  {"x", x.is_inf() ? json("inf") : sj(x.value(), x.err())}};
      return out;
    }
    DiskPoint xi;
    if (x_opt && !angle_opt) xi = cayley(ExtendedReal(parse_real(*x_opt, "--x")));
    else if (angle_opt && !x_opt) xi = DiskPoint(parse_real(*angle_opt, "--angle"));
    else throw UsageError("give exactly one of --x, --angle or --stream");
    Word w = expand(D, xi, depth);
    out.body = {{"angle", sj(xi.angle)}, {"depth", depth}, {"letters", word_to_string(D, w)}};
    return out;
  });
  auto* cut_cmd = code->add_subcommand("cut", "cutting sequence of a geodesic");
  std::string gx, gy;
  long j_min = -10, j_max = 10;
  cut_cmd->add_option("--backward", gx, "backward endpoint x")->required();
  cut_cmd->add_option("--forward", gy, "forward endpoint y")->required();
  cut_cmd->add_option("--from", j_min, "first index");
  cut_cmd->add_option("--to", j_max, "last index");
  on(cut_cmd, "code cut", [&] {
    IdealPolygonDomain D = load(cfg);
    GeodesicH g{ExtendedReal(parse_real(gx, "--backward")), ExtendedReal(parse_real(gy, "--forward"))};
    Word w = cutting_sequence(D, g, j_min, j_max);
    Result out;
    out.body = {{"backward", gx}, {"forward", gy}, {"from", j_min}, {"to", j_max},
                {"letters", word_to_string(D, w)}};
    return out;
  });

  // ------------------------------------------------ cuspidal
  auto* cusp_cmd = app.add_subcommand("cuspidal", "cuspidal words")->require_subcommand(1);
  auto* dec_cmd = cusp_cmd->add_subcommand("decompose", "decomposition into cuspidal blocks");
  std::string word_text, period_text;
  long r_lo = -3, r_hi = 6;
  dec_cmd->add_option("--word", word_text, "finite word");
  dec_cmd->add_option("--period", period_text, "period of a bi-infinite periodic word");
  dec_cmd->add_option("--from", r_lo, "first block index (periodic words)");
  dec_cmd->add_option("--to", r_hi, "last block index (periodic words)");
  on(dec_cmd, "cuspidal decompose", [&] {
    IdealPolygonDomain D = load(cfg);
    if (word_text.empty() == period_text.empty()) throw UsageError("give exactly one of --word or --period");
    Result out;
    Table t;
    if (!word_text.empty()) {
      Word w = parse_word(D, word_text);
      if (!admissible(w)) throw Error(ErrorCode::InadmissibleWord, "word backtracks");
      out.body["blocks"] = blocks_json(D, cuspidal_decomposition(D, w), 0, t);
    } else {
      auto spec = PeriodicBiWord::purely(parse_word(D, period_text)).spec();
      out.body["blocks"] = blocks_json(D, cuspidal_decomposition(D, spec, r_lo, r_hi), r_lo, t);
    }
    out.table = t;
    return out;
  });

  // ------------------------------------------------ cantor
  auto* cantor = app.add_subcommand("cantor", "Cantor sets K_N")->require_subcommand(1);
  int N = -1, cdepth = 4;
  long budget = 2000;
  std::string eps_text = "0.1";
  auto* build_cmd = cantor->add_subcommand("build", "interval approximation");
  build_cmd->add_option("--N", N, "cuspidal length bound")->required();
  build_cmd->add_option("--depth", cdepth, "subdivision depth");
  on(build_cmd, "cantor build", [&] {
    IdealPolygonDomain D = load(cfg);
    CantorApproximation a = build_approximation(CantorSpec(D, N), cdepth);
    Result out;
    Table t{{"level", "lo", "hi", "err", "word"}, {}};
    json iv = json::array();
    for (auto& r : a.intervals) {
      iv.push_back({{"lo", sj(r.interval.lo, r.err)}, {"hi", sj(r.interval.hi, r.err)},
                    {"level", r.level}, {"word", r.word}});
      t.rows.push_back({std::to_string(r.level), to_decimal(r.interval.lo), to_decimal(r.interval.hi),
                        to_decimal(r.err, 6), r.word});
    }
    out.body = {{"N", N}, {"depth", cdepth}, {"hull", {sj(a.hull.lo), sj(a.hull.hi)}},
                {"defect", to_decimal(approximation_defect(a), 6)}, {"intervals", iv}};
    out.table = t;
    return out;
  });
  auto* check_cmd = cantor->add_subcommand("check", "stable gap, size and width conditions");
  check_cmd->add_option("--N", N, "cuspidal length bound (searched when absent)");
  check_cmd->add_option("--eps", eps_text, "stable gap parameter");
  check_cmd->add_option("--budget", budget, "monotone holes examined");
  on(check_cmd, "cantor check", [&] {
    IdealPolygonDomain D = load(cfg);
    Real eps = parse_real(eps_text, "--eps");
    auto entry_json = [&](const N0Entry& e) {
      return json{{"N", e.N},
                  {"pass", e.pass()},
                  {"stable_gap", {{"pass", e.gap.pass}, {"holes", e.gap.holes_examined},
                                  {"worst_ratio", sj(e.gap.worst_ratio)},
                                  {"violation_index", e.gap.violation_index}}},
                  {"size", {{"pass", e.size.pass}, {"margin", sj(e.size.margin)}}},
                  {"m_N", sj(e.ext.m)}, {"M_N", sj(e.ext.M)},
                  {"wider_than_half_mu", e.wide}};
    };
    Result out;
    Table t{{"N", "pass", "worst_ratio", "size_margin", "width"}, {}};
    auto row = [&](const N0Entry& e) {
      t.rows.push_back({std::to_string(e.N), e.pass() ? "true" : "false", to_decimal(e.gap.worst_ratio, 8),
                        to_decimal(e.size.margin, 8), to_decimal(e.ext.M.value - e.ext.m.value, 12)});
    };
    if (N >= 0) {
      N0Entry e = evaluate_n(D, N, eps, budget);
      out.body = entry_json(e);
      row(e);
      out.verdict_fail = !e.pass();
    } else {
      N0Result r = find_n0(D, eps, budget);
      json trail = json::array();
      for (auto& e : r.trail) trail.push_back(entry_json(e)), row(e);
      out.body = {{"N0", r.N0}, {"eps", eps_text}, {"budget", budget}, {"trail", trail}};
    }
    out.table = t;
    return out;
  });
  auto* ext_cmd = cantor->add_subcommand("extrema", "m_N and M_N");
  ext_cmd->add_option("--N", N, "cuspidal length bound")->required();
  on(ext_cmd, "cantor extrema", [&] {
    IdealPolygonDomain D = load(cfg);
    Extrema e = extrema(CantorSpec(D, N));
    Result out;
    out.body = {{"N", N}, {"m_N", sj(e.m)}, {"M_N", sj(e.M)},
                {"width", sj(e.M.value - e.m.value, e.M.err + e.m.err)}};
    return out;
  });

  // ------------------------------------------------ hall
  auto* hall = app.add_subcommand("hall", "Hall rays for the naive height")->require_subcommand(1);
  std::string L_text, from_text, to_text, witness_path;
  int blocks = 12, n0 = -1, count = 10;
  on(hall->add_subcommand("threshold", "(N0 + 1) mu"), "hall threshold", [&] {
    IdealPolygonDomain D = load(cfg);
    HallThreshold t = hall_threshold(D, parse_real(eps_text, "--eps"), budget);
    Result out;
    out.body = {{"N0", t.N0}, {"eps", eps_text}, {"threshold", sj(t.value)}};
    return out;
  });
  hall->get_subcommand("threshold")->add_option("--eps", eps_text, "stable gap parameter");
  hall->get_subcommand("threshold")->add_option("--budget", budget, "monotone holes examined");
  auto hall_opts = [&](const IdealPolygonDomain&) {
    WitnessOptions o;
    o.eps = parse_real(eps_text, "--eps");
    o.budget = budget;
    o.n0 = n0;
    return o;
  };
  auto* wit_cmd = hall->add_subcommand("witness", "witness word for a target L");
  wit_cmd->add_option("--L", L_text, "target Lagrange value")->required();
  wit_cmd->add_option("--blocks", blocks, "k_blocks for verification");
  wit_cmd->add_option("--n0", n0, "N0 (searched when absent)");
  wit_cmd->add_option("--eps", eps_text, "stable gap parameter");
  on(wit_cmd, "hall witness", [&] {
    IdealPolygonDomain D = load(cfg);
    WitnessSpec w = build_witness(D, parse_real(L_text, "--L"), hall_opts(D));
    WitnessReport R = verify_witness(D, w, blocks);
    Result out;
    out.body = {{"witness", witness_json(D, w)}, {"report", witness_report_json(R)}};
    out.verdict_fail = !R.pass;
    return out;
  });
  auto* scan_cmd = hall->add_subcommand("scan", "witnesses on a grid of targets");
  scan_cmd->add_option("--from", from_text, "first target")->required();
  scan_cmd->add_option("--to", to_text, "last target")->required();
  scan_cmd->add_option("--count", count, "number of targets");
  scan_cmd->add_option("--blocks", blocks, "k_blocks for verification");
  scan_cmd->add_option("--n0", n0, "N0 (searched when absent)");
  on(scan_cmd, "hall scan", [&] {
    IdealPolygonDomain D = load(cfg);
    if (count < 1) throw UsageError("--count must be positive");
    Real a = parse_real(from_text, "--from"), b = parse_real(to_text, "--to");
    WitnessOptions o = hall_opts(D);
    if (o.n0 < 0) o.n0 = find_n0(D, o.eps, o.budget).N0;
    Result out;
    Table t{{"L", "s", "pass", "final_deviation", "off_max"}, {}};
    json rows = json::array();
    for (int i = 0; i < count; ++i) {
      Real L = count == 1 ? a : a + (b - a) * i / (count - 1);
      WitnessSpec w = build_witness(D, L, o);
      WitnessReport R = verify_witness(D, w, blocks);
      rows.push_back({{"L", to_decimal(L)}, {"s", w.s}, {"pass", R.pass},
                      {"final_deviation", sj(R.final_deviation)},
                      {"off_subsequence_max", sj(R.off_subsequence_max)}});
      t.rows.push_back({to_decimal(L, 12), std::to_string(w.s), R.pass ? "true" : "false",
                        to_decimal(R.final_deviation, 6), to_decimal(R.off_subsequence_max.value, 12)});
      out.verdict_fail |= !R.pass;
    }
    out.body = {{"N0", o.n0}, {"targets", rows}};
    out.table = t;
    return out;
  });
  auto* ver_cmd = hall->add_subcommand("verify", "verify a witness file");
  ver_cmd->add_option("--witness", witness_path, "JSON from 'hall witness'")->required();
  ver_cmd->add_option("--blocks", blocks, "k_blocks");
  on(ver_cmd, "hall verify", [&] {
    IdealPolygonDomain D = load(cfg);
    std::ifstream in(witness_path);
    if (!in) throw UsageError("cannot open " + witness_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError(e.what());
    }
    const json& wj = j.contains("result") && j["result"].contains("witness") ? j["result"]["witness"]
                     : j.contains("witness")                                 ? j["witness"]
                                                                             : j;
    WitnessSpec w = witness_from_json(D, wj);
    WitnessReport R = verify_witness(D, w, blocks);
    Result out;
    out.body = {{"witness", witness_json(D, w)}, {"report", witness_report_json(R)}};
    out.verdict_fail = !R.pass;
    return out;
  });

  // ------------------------------------------------ perron
  auto* perron = app.add_subcommand("perron", "heights of periodic geodesics")->require_subcommand(1);
  std::string pre_text;
  int max_len = 14;
  std::string cmax_text = "200";
  auto* eval_cmd = perron->add_subcommand("eval", "essential height of a periodic word");
  eval_cmd->add_option("--period", period_text, "period letters")->required();
  eval_cmd->add_option("--pre", pre_text, "forward preperiod");
  on(eval_cmd, "perron eval", [&] {
    IdealPolygonDomain D = load(cfg);
    HeightEstimate h = essential_height(D, periodic_word(D, period_text, pre_text));
    Result out;
    out.body = {{"period", period_text}, {"height", sj(h.value)}, {"lagrange", sj(h.lagrange())},
                {"achieving_windows", h.achieving_windows}, {"below_margulis", h.below_margulis}};
    return out;
  });
  auto* cf_cmd = perron->add_subcommand("cf", "classical continued-fraction Lagrange value");
  cf_cmd->add_option("--period", period_text, "partial quotients, comma separated")->required();
  on(cf_cmd, "perron cf", [&] {
    RealScalar v = classical_cf_lagrange(parse_cf_period(period_text));
    Result out;
    out.body = {{"period", period_text}, {"lagrange", sj(v)}};
    return out;
  });
  auto* oracle_cmd = perron->add_subcommand("oracle", "Diophantine enumeration oracle");
  oracle_cmd->add_option("--period", period_text, "period letters")->required();
  oracle_cmd->add_option("--len", max_len, "maximal word length");
  oracle_cmd->add_option("--cmax", cmax_text, "bound on |c|");
  on(oracle_cmd, "perron oracle", [&] {
    IdealPolygonDomain D = load(cfg);
    auto w = PeriodicBiWord::purely(parse_word(D, period_text));
    HeightEstimate h = essential_height(D, w);
    auto g = normalized_geodesic(D, w.spec(), h.achieving_windows.front());
    auto pts = enumerate_cusp_points(D, max_len, parse_real(cmax_text, "--cmax"));
    OracleResult m = markoff_form_oracle(pts, g.geodesic.forward.value(), g.geodesic.backward.value());
    OracleResult d = diophantine_lambda_oracle(pts, g.geodesic.forward.value());
    Result out;
    out.body = {{"period", period_text},
                {"twice_height", sj(h.lagrange())},
                {"markoff_oracle", sj(m.value)},
                {"diophantine_oracle", sj(d.value)},
                {"candidates", m.candidates},
                {"best", {{"a", to_decimal(m.best.a)}, {"c", to_decimal(m.best.c)}}},
                {"gap", sj(2 * h.value.value - m.value, h.lagrange().err)}};
    out.verdict_fail = m.value > 2 * h.value.value + Real(1e-6);
    return out;
  });

  // ------------------------------------------------ proper
  auto* proper = app.add_subcommand("proper", "perturbed heights")->require_subcommand(1);
  std::string config_path, l_text = "1";
  std::optional<std::string> delta_opt, l0_opt;
  long samples = 10000;
  std::string above_text;
  auto hf_opts = [&](CLI::App* s) {
    s->add_option("--config", config_path, "perturbation JSON {delta, l0, cutoff}");
    s->add_option("--delta", delta_opt, "bump amplitude");
    s->add_option("--l0", l0_opt, "height where the certificate starts");
  };
  auto* norms_cmd = proper->add_subcommand("norms", "sampled norms of H - H0");
  hf_opts(norms_cmd);
  norms_cmd->add_option("--l", l_text, "truncation height l");
  norms_cmd->add_option("--samples", samples, "sampled pairs (at least 1000)");
  on(norms_cmd, "proper norms", [&] {
    IdealPolygonDomain D = load(cfg);
    HeightFunction h = height_from_config(D, config_path, delta_opt, l0_opt);
    NormsReport R = perturbation_norms(h, parse_real(l_text, "--l"), samples, cfg.seed);
    Result out;
    out.body = {{"height", height_json(h)},
                {"l", l_text},
                {"samples", R.samples},
                {"sup", {{"sampled", sj(R.sup_est)}, {"bound", sj(R.sup_bound)}}},
                {"lip", {{"sampled", sj(R.lip_est)}, {"bound", sj(R.lip_bound)}}},
                {"lip_11", {{"sampled", sj(R.lip_v_est)}, {"bound", sj(R.lip_v_bound)}}},
                {"lip_m11", {{"sampled", sj(R.lip_w_est)}, {"bound", sj(R.lip_w_bound)}}},
                {"slack", to_decimal(R.slack, 6)}};
    return out;
  });
  auto* pw_cmd = proper->add_subcommand("witness", "Hall-ray witness for a perturbed height");
  hf_opts(pw_cmd);
  pw_cmd->add_option("--L", L_text, "target value of limsup h");
  pw_cmd->add_option("--above", above_text, "target as an offset above the threshold");
  pw_cmd->add_option("--blocks", blocks, "k_blocks for verification");
  on(pw_cmd, "proper witness", [&] {
    IdealPolygonDomain D = load(cfg);
    HeightFunction h = height_from_config(D, config_path, delta_opt, l0_opt);
    if (L_text.empty() == above_text.empty()) throw UsageError("give exactly one of --L or --above");
    ProperOptions o;
    Real L;
    if (!above_text.empty()) L = proper_setup(D, h, o).threshold + parse_real(above_text, "--above");
    else L = parse_real(L_text, "--L");
    ProperWitness W = proper_witness(D, h, L, o);
    ProperReport R = verify_proper_witness(D, h, W, blocks);
    const ProperConstants& K = W.setup.K;
    json win = json::array();
    for (auto& pw : R.windows)
      win.push_back({{"k", pw.k}, {"r", pw.r}, {"formula", sj(pw.formula)}, {"windowed", sj(pw.windowed)}});
    Result out;
    out.body = {{"height", height_json(h)},
                {"L", to_decimal(L)},
                {"threshold", sj(W.setup.threshold)},
                {"constants", {{"N", K.N}, {"eps", to_decimal(K.eps, 4)}, {"s0", K.s0}, {"M0", K.M0},
                               {"eps_N", sj(K.eps_N)}, {"C1", sj(K.C1)}, {"C2", sj(K.C2)},
                               {"lip_H", sj(K.lip_H)}, {"overlap", sj(K.overlap)}}},
                {"witness", witness_json(D, W.spec)},
                {"report", {{"pass", R.pass}, {"final_deviation", sj(R.final_deviation)},
                            {"windowed_diff", sj(R.windowed_diff)}, {"off_max", sj(R.off_max)},
                            {"chords", R.chords}, {"failures", R.failures}, {"windows", win}}}};
    out.verdict_fail = !R.pass;
    return out;
  });
  auto* int_cmd = proper->add_subcommand("interval", "H(K_N x K_N^s)");
  hf_opts(int_cmd);
  long s_val = 1;
  int targets = 25;
  int_cmd->add_option("--N", N, "cuspidal length bound")->required();
  int_cmd->add_option("--s", s_val, "eta power");
  int_cmd->add_option("--eps", eps_text, "stable gap parameter");
  int_cmd->add_option("--targets", targets, "round-trip decompositions");
  on(int_cmd, "proper interval", [&] {
    IdealPolygonDomain D = load(cfg);
    HeightFunction h = height_from_config(D, config_path, delta_opt, l0_opt);
    HIntervalReport R = h_interval(h, CantorSpec(D, N), s_val, parse_real(eps_text, "--eps"), N,
                                   targets, cfg.seed);
    Result out;
    out.body = {{"height", height_json(h)},
                {"N", N},
                {"s", s_val},
                {"interval", {sj(R.range.lo), sj(R.range.hi)}},
                {"edge_scan", {sj(R.edge_lo), sj(R.edge_hi)}},
                {"next", {sj(R.next.lo), sj(R.next.hi)}},
                {"overlaps_next", R.overlaps_next},
                {"round_trips", R.round_trips},
                {"max_residual", sj(R.max_residual)}};
    return out;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Result res;
  int code_out = kExitOk;
  json doc;
  try {
    res = action();
    if (res.verdict_fail) code_out = kExitVerdict;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    res.body = {{"error", code_name(e.code())}, {"message", e.what()}};
    res.table.reset();
    code_out = e.code() == ErrorCode::ParseError ? kExitUsage
               : e.code() == ErrorCode::BoundViolated ? kExitVerdict
                                                       : kExitPrecondition;
  }
  doc["command"] = cfg.command;
  doc["domain"] = cfg.domain;
  doc["seed"] = cfg.seed;
  doc["precision"] = {{"requested_bits", cfg.precision}, {"effective_bits", kEffectiveBits}};
  doc["tol"] = cfg.tol;
  doc["result"] = res.body;

  std::ofstream file;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) {
      std::cerr << "usage: cannot write " << cfg.out << "\n";
      return kExitUsage;
    }
  }
  std::ostream& os = cfg.out.empty() ? std::cout : file;
  if (cfg.format == "csv") {
    os << "# command=" << cfg.command << " seed=" << cfg.seed << "\n";
    write_csv(os, res.table ? *res.table : flatten(res.body));
  } else {
    os << doc.dump(2) << "\n";
  }
  if (code_out == kExitPrecondition || code_out == kExitUsage)
    std::cerr << res.body.value("message", std::string()) << "\n";
  return code_out;
}
