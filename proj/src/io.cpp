#include "bmcal/io.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "bmcal/errors.hpp"

namespace bmcal {

using nlohmann::json;

namespace {

json component_to_json(const ComponentForecast& c) {
  json params;
  switch (c.family) {
    case Family::grid:
      params["x"] = c.grid_x;
      params["cdf"] = c.grid_cdf;
      break;
    case Family::student_t:
      params["location"] = c.location;
      params["scale"] = c.scale;
      params["dof"] = c.dof;
      break;
    case Family::skew_normal:
    case Family::gev:
      params["location"] = c.location;
      params["scale"] = c.scale;
      params["shape"] = c.shape;
      break;
    default:
      params["location"] = c.location;
      params["scale"] = c.scale;
  }
  return json{{"family", family_name(c.family)}, {"params", params}};
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw ParseError(where + ": missing or non-numeric field 'params." + key + "'");
  return obj[key].get<double>();
}

ComponentForecast component_from_json(const json& rec, const std::string& where) {
  if (!rec.contains("family") || !rec["family"].is_string())
    throw ParseError(where + ": missing or non-string field 'family'");
  if (!rec.contains("params") || !rec["params"].is_object())
    throw ParseError(where + ": missing field 'params'");
  const Family family = family_from_name(rec["family"].get<std::string>());
  const json& p = rec["params"];
  try {
    switch (family) {
      case Family::normal:
        return ComponentForecast::make_normal(require_number(p, "location", where),
                                              require_number(p, "scale", where));
      case Family::student_t:
        return ComponentForecast::make_student_t(
            require_number(p, "location", where),
            require_number(p, "scale", where), require_number(p, "dof", where));
      case Family::skew_normal:
        return ComponentForecast::make_skew_normal(
            require_number(p, "location", where),
            require_number(p, "scale", where), require_number(p, "shape", where));
      case Family::truncated_normal_at_zero:
        return ComponentForecast::make_truncated_normal(
            require_number(p, "location", where),
            require_number(p, "scale", where));
      case Family::gev:
        return ComponentForecast::make_gev(require_number(p, "location", where),
                                           require_number(p, "scale", where),
                                           require_number(p, "shape", where));
      case Family::grid: {
        if (!p.contains("x") || !p["x"].is_array() || !p.contains("cdf") ||
            !p["cdf"].is_array())
          throw ParseError(where + ": grid family needs array fields 'params.x' and 'params.cdf'");
        return ComponentForecast::make_grid(p["x"].get<std::vector<double>>(),
                                            p["cdf"].get<std::vector<double>>());
      }
    }
  } catch (const std::domain_error& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError(where + ": unhandled family");
}

json atom_arrays(const std::vector<CalibrationAtom>& atoms) {
  json mu = json::array(), nu = json::array(), omega = json::array();
  for (const CalibrationAtom& a : atoms) {
    mu.push_back(a.cal.mu);
    nu.push_back(a.cal.nu);
    omega.push_back(a.omega.omega);
  }
  return json{{"mu", mu}, {"nu", nu}, {"omega", omega}};
}

std::vector<CalibrationAtom> atoms_from_json(const json& rec,
                                             const std::string& where) {
  const auto mu = rec.at("mu").get<std::vector<double>>();
  const auto nu = rec.at("nu").get<std::vector<double>>();
  const auto omega = rec.at("omega").get<std::vector<std::vector<double>>>();
  if (mu.size() != nu.size() || mu.size() != omega.size())
    throw ParseError(where + ": mu/nu/omega lengths disagree");
  std::vector<CalibrationAtom> atoms;
  atoms.reserve(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k)
    atoms.emplace_back(BetaMeanPrecision(mu[k], nu[k]), PoolWeights(omega[k]));
  return atoms;
}

json hyper_to_json(const Hyperparams& h) {
  json psi;
  if (h.psi.fixed)
    psi = json{{"fixed", h.psi.value}};
  else
    psi = json{{"gamma_c", h.psi.c}, {"gamma_d", h.psi.d}};
  return json{{"xi_w", h.xi_w},
              {"xi_mu", h.xi_mu},
              {"xi_nu", h.xi_nu},
              {"xi_omega", h.xi_omega},
              {"psi", psi}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.xi_w = j.at("xi_w").get<double>();
  h.xi_mu = j.at("xi_mu").get<double>();
  h.xi_nu = j.at("xi_nu").get<double>();
  h.xi_omega = j.at("xi_omega").get<double>();
  const json& psi = j.at("psi");
  if (psi.contains("fixed"))
    h.psi = PsiPrior::fixed_at(psi["fixed"].get<double>());
  else
    h.psi = PsiPrior::gamma(psi.at("gamma_c").get<double>(),
                            psi.at("gamma_d").get<double>());
  return h;
}

json mcmc_to_json(const McmcConfig& c) {
  return json{{"iterations", c.iterations}, {"burn_in", c.burn_in},
              {"thin", c.thin},             {"seed", c.seed},
              {"rw_scale_mu_nu", c.rw_scale_mu_nu},
              {"rw_scales_k1", c.rw_scales_k1},
              {"max_sticks", c.max_sticks}};
}

McmcConfig mcmc_from_json(const json& j) {
  McmcConfig c;
  c.iterations = j.at("iterations").get<long>();
  c.burn_in = j.at("burn_in").get<long>();
  c.thin = j.at("thin").get<long>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.rw_scale_mu_nu = j.at("rw_scale_mu_nu").get<double>();
  const auto scales = j.at("rw_scales_k1").get<std::vector<double>>();
  for (std::size_t i = 0; i < 3 && i < scales.size(); ++i)
    c.rw_scales_k1[i] = scales[i];
  c.max_sticks = j.at("max_sticks").get<long>();
  return c;
}

std::vector<int> alloc_to_one_based(const std::vector<int>& alloc) {
  std::vector<int> out(alloc.size());
  for (std::size_t i = 0; i < alloc.size(); ++i) out[i] = alloc[i] + 1;
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

ForecastSeries load_forecast_jsonl(const std::string& path) {
  std::ifstream in = open_in(path);
  ForecastSeries series;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + " record " + std::to_string(lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": invalid JSON: " + e.what());
    }
    if (!rec.contains("y") || !rec["y"].is_number())
      throw ParseError(where + ": missing or non-numeric field 'y'");
    if (!rec.contains("components") || !rec["components"].is_array() ||
        rec["components"].empty())
      throw ParseError(where + ": missing or empty field 'components'");
    ForecastStep step;
    step.y = rec["y"].get<double>();
    for (const json& c : rec["components"])
      step.components.push_back(component_from_json(c, where));
    series.steps.push_back(std::move(step));
  }
  if (series.steps.empty()) throw ParseError(path + ": no forecast records");
  try {
    series.components_per_step();
  } catch (const std::invalid_argument& e) {
    throw ParseError(path + ": " + e.what());
  }
  return series;
}

void save_forecast_jsonl(const ForecastSeries& series, const std::string& path) {
  std::ofstream out = open_out(path);
  for (std::size_t t = 0; t < series.size(); ++t) {
    json rec;
    rec["t"] = t + 1;
    rec["y"] = series.steps[t].y;
    json comps = json::array();
    for (const ComponentForecast& c : series.steps[t].components)
      comps.push_back(component_to_json(c));
    rec["components"] = comps;
    out << rec.dump() << '\n';
  }
}

void save_trace_jsonl(const FiniteTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  json header{{"format", "bmcal-trace"},
              {"version", 1},
              {"model", trace.K == 1 ? "bm1" : "bmk"},
              {"K", trace.K},
              {"M", trace.M},
              {"hyper", hyper_to_json(trace.hyper)},
              {"mcmc", mcmc_to_json(trace.config)}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < trace.draws.size(); ++i) {
    const FiniteParams& d = trace.draws[i];
    json rec = atom_arrays(d.atoms);
    rec["w"] = d.w;
    if (i < trace.occupancy.size()) rec["occupancy"] = trace.occupancy[i];
    out << rec.dump() << '\n';
  }
  json footer{{"summary",
               json{{"acc_mu_nu", trace.acc_mu_nu},
                    {"acc_omega", trace.acc_omega},
                    {"acc_global", trace.acc_global},
                    {"numeric_warnings", trace.numeric_warnings}}}};
  out << footer.dump() << '\n';
}

void save_trace_jsonl(const DPTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  json header{{"format", "bmcal-trace"},
              {"version", 1},
              {"model", "bminf"},
              {"K", "dp"},
              {"M", trace.M},
              {"hyper", hyper_to_json(trace.hyper)},
              {"mcmc", mcmc_to_json(trace.config)}};
  out << header.dump() << '\n';
  for (const DPSnapshot& snap : trace.draws) {
    json rec = atom_arrays(snap.atoms);
    rec["weights"] = snap.weights;
    rec["alloc"] = alloc_to_one_based(snap.alloc);
    rec["psi"] = snap.psi;
    rec["n_occupied"] = snap.n_occupied;
    out << rec.dump() << '\n';
  }
  json footer{{"summary",
               json{{"acc_mu_nu", trace.acc_mu_nu},
                    {"acc_omega", trace.acc_omega},
                    {"cluster_counts", trace.cluster_counts},
                    {"numeric_warnings", trace.numeric_warnings}}}};
  out << footer.dump() << '\n';
}

LoadedTrace load_trace_jsonl(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(path + ": empty trace file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(path + " header: invalid JSON: " + e.what());
  }
  if (!header.contains("format") || header["format"] != "bmcal-trace")
    throw ParseError(path + ": not a bmcal trace file");
  std::string model;
  Hyperparams hyper;
  McmcConfig mcmc;
  try {
    model = header.at("model").get<std::string>();
    hyper = hyper_from_json(header.at("hyper"));
    mcmc = mcmc_from_json(header.at("mcmc"));
  } catch (const json::exception& e) {
    throw ParseError(path + " header: " + e.what());
  } catch (const std::domain_error& e) {
    throw ParseError(path + " header: " + e.what());
  }

  std::size_t lineno = 1;
  if (model == "bminf") {
    DPTrace trace;
    if (!header.contains("M") || !header["M"].is_number())
      throw ParseError(path + " header: missing numeric field 'M'");
    trace.M = header["M"].get<std::size_t>();
    trace.hyper = hyper;
    trace.config = mcmc;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string where = path + " record " + std::to_string(lineno);
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) throw ParseError(where + ": invalid JSON");
      if (rec.contains("summary")) {
        const json& s = rec["summary"];
        trace.acc_mu_nu = s.value("acc_mu_nu", 0.0);
        trace.acc_omega = s.value("acc_omega", 0.0);
        if (s.contains("cluster_counts"))
          trace.cluster_counts = s["cluster_counts"].get<std::vector<int>>();
        trace.numeric_warnings = s.value("numeric_warnings", 0L);
        continue;
      }
      try {
        DPSnapshot snap;
        snap.atoms = atoms_from_json(rec, where);
        snap.weights = rec.at("weights").get<std::vector<double>>();
        snap.alloc = rec.at("alloc").get<std::vector<int>>();
        for (int& d : snap.alloc) d -= 1;
        snap.psi = rec.at("psi").get<double>();
        snap.n_occupied = rec.at("n_occupied").get<int>();
        trace.draws.push_back(std::move(snap));
      } catch (const json::exception& e) {
        throw ParseError(where + ": " + e.what());
      } catch (const std::domain_error& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
    if (trace.draws.empty()) throw ParseError(path + ": trace has no draws");
    return trace;
  }

  FiniteTrace trace;
  if (!header.contains("K") || !header["K"].is_number() ||
      !header.contains("M") || !header["M"].is_number())
    throw ParseError(path + " header: missing numeric fields 'K' and 'M'");
  trace.K = header["K"].get<std::size_t>();
  trace.M = header["M"].get<std::size_t>();
  trace.hyper = hyper;
  trace.config = mcmc;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + " record " + std::to_string(lineno);
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) throw ParseError(where + ": invalid JSON");
    if (rec.contains("summary")) {
      const json& s = rec["summary"];
      trace.acc_mu_nu = s.value("acc_mu_nu", 0.0);
      trace.acc_omega = s.value("acc_omega", 0.0);
      trace.acc_global = s.value("acc_global", 0.0);
      trace.numeric_warnings = s.value("numeric_warnings", 0L);
      continue;
    }
    try {
      FiniteParams d;
      d.atoms = atoms_from_json(rec, where);
      d.w = rec.at("w").get<std::vector<double>>();
      d.validate();
      if (rec.contains("occupancy"))
        trace.occupancy.push_back(rec["occupancy"].get<std::vector<int>>());
      trace.draws.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (trace.draws.empty()) throw ParseError(path + ": trace has no draws");
  return trace;
}

void save_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out = open_out(path);
  const bool with_crps = !report.crps_values.empty();
  out << (with_crps ? "t,pit,log_score,crps\n" : "t,pit,log_score\n");
  out.precision(17);
  for (std::size_t t = 0; t < report.pits.size(); ++t) {
    out << (t + 1) << ',' << report.pits[t] << ',' << report.log_scores[t];
    if (with_crps) out << ',' << report.crps_values[t];
    out << '\n';
  }
}

void save_summary_json(const EvalReport& report, const std::string& path,
                       const std::string& model_name) {
  json j;
  j["model"] = model_name;
  j["n_steps"] = report.pits.size();
  j["avls"] = report.avls;
  if (!report.crps_values.empty()) j["avcrps"] = report.avcrps;
  j["ks_stat"] = report.ks.statistic;
  j["ks_critical"] = report.ks.critical;
  j["ks_pass"] = report.ks.pass;
  j["log_clamp_count"] = report.clamp_count;
  if (!report.band.grid.empty()) {
    j["band"] = json{{"grid", report.band.grid},
                     {"lo", report.band.lo},
                     {"hi", report.band.hi}};
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

void save_manifest(const std::string& path, const std::string& config_text,
                   std::uint64_t seed, const std::string& mode) {
  // FNV-1a over the normalized config text.
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char ch : config_text) {
    hash ^= ch;
    hash *= 1099511628211ULL;
  }
  std::ostringstream hex;
  hex << std::hex << hash;

  char stamp[64];
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

  json j{{"config_hash", hex.str()},
         {"seed", seed},
         {"mode", mode},
         {"version", "0.1.0"},
         {"timestamp", stamp}};
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace bmcal
