#pragma once

// Command-line front end: pvalue, table, curve and oracle subcommands.
// Exit codes: 0 success, 2 argument errors, 3 engine errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regionboot/errors.hpp"
#include "regionboot/io.hpp"
#include "regionboot/methods.hpp"
#include "regionboot/multiscale.hpp"
#include "regionboot/oracle.hpp"
#include "regionboot/regions.hpp"
#include "regionboot/rejection_lab.hpp"

namespace regionboot {

namespace cli_detail {

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError(std::string(what) + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ArgumentError(std::string(what) + ": empty list");
  return out;
}

inline std::string json_list(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::string s;
  for (const auto& x : v) {
    if (!s.empty()) s += ',';
    s += x.is_string() ? x.get<std::string>() : x.dump();
  }
  return s;
}

// Flags shared by the subcommands; config values fill flags left unset.
struct Settings {
  std::string region = "cone";
  std::string y;
  std::string methods = "all";
  std::string scales;
  std::uint64_t reps = 10000;
  std::uint64_t inner_reps = 10000;
  std::uint64_t seed = 0;
  std::string backend = "quad";
  std::string extrapolation;
  double alpha = 0.05;
  std::string out;
  std::string out_dir = ".";
  std::string config;
  std::string scheme = "quad";
  std::string u_list;
  double center_shift = 0.0;
  std::string kind = "bp";
};

inline void apply_config(CLI::App& sub, Settings& s) {
  if (s.config.empty()) return;
  std::ifstream in(s.config);
  if (!in) throw ArgumentError("--config: cannot open '" + s.config + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("--config: " + std::string(e.what()));
  }
  auto unset = [&](const char* flag) {
    const auto* o = sub.get_option_no_throw(flag);
    return !o || o->count() == 0;
  };
  try {
    if (j.contains("region") && unset("--region"))
      s.region = j["region"].is_string() ? j["region"].get<std::string>() : j["region"].dump();
    if (j.contains("y") && unset("--y")) s.y = json_list(j["y"]);
    if (j.contains("methods") && unset("--method")) s.methods = json_list(j["methods"]);
    if (j.contains("scales") && unset("--scales")) s.scales = json_list(j["scales"]);
    if (j.contains("reps") && unset("--reps")) s.reps = j["reps"].get<std::uint64_t>();
    if (j.contains("seed") && unset("--seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("backend") && unset("--backend")) s.backend = j["backend"].get<std::string>();
    if (j.contains("alpha") && unset("--alpha")) s.alpha = j["alpha"].get<double>();
    if (j.contains("out_dir") && unset("--out-dir")) s.out_dir = j["out_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("--config: " + std::string(e.what()));
  }
}

// Converts errors raised while interpreting user input into ArgumentError.
template <class F>
auto interpret(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw ArgumentError(e.what());
  }
}

inline std::vector<double> parse_grid(const std::string& s) {
  if (s.find(':') != std::string::npos) return parse_scale_grid(s);
  return parse_list(s, "--scales");
}

inline PValueOptions make_options(const Settings& s) {
  PValueOptions o;
  o.backend = parse_backend(s.backend);
  o.extrapolation = s.extrapolation.empty()
                        ? (o.backend == Backend::quad ? Extrapolation::taylor : Extrapolation::fit)
                        : parse_extrapolation(s.extrapolation);
  if (!s.scales.empty()) o.grid = parse_grid(s.scales);
  if (s.reps == 0 || s.inner_reps == 0) throw ArgumentError("--reps must be positive");
  o.replicates = s.reps;
  o.inner_replicates = s.inner_reps;
  o.seed = s.seed;
  o.center_shift = s.center_shift;
  return o;
}

inline Point parse_y(const std::string& text, const Region& r) {
  if (text.empty()) throw ArgumentError("--y is required");
  Point y = parse_list(text, "--y");
  if (static_cast<int>(y.size()) != r.q() + 1)
    throw ArgumentError("--y: expected " + std::to_string(r.q() + 1) + " coordinates");
  return y;
}

inline void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

inline nlohmann::json provenance(const std::string& command, nlohmann::json config) {
  return {{"command", command}, {"git_revision", kGitRevision}, {"config", std::move(config)}};
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_pvalue(const Settings& s, std::ostream& out) {
  const auto [region, y, methods, opt] = interpret([&] {
    Region r = Region::parse(s.region);
    Point y = parse_y(s.y, r);
    return std::tuple{r, y, parse_methods(s.methods), make_options(s)};
  });
  const PValueReport rep = compute_pvalues(region, y, methods, opt);
  out << format_report(rep);
  if (!s.out.empty()) {
    nlohmann::json j = provenance("pvalue", {{"region", region.to_json()},
                                             {"y", y},
                                             {"methods", s.methods},
                                             {"alpha", s.alpha},
                                             {"options", options_json(opt)}});
    j["report"] = to_json(rep);
    nlohmann::json rej = nlohmann::json::object();
    for (const auto& r : rep.results)
      if (r.available) rej[to_string(r.method)] = r.p < s.alpha;
    j["reject"] = rej;
    write_file(s.out, j.dump(2) + "\n");
  }
  return 0;
}

inline int cmd_table(int which, const Settings& s, std::ostream& out) {
  const std::filesystem::path dir(s.out_dir);
  if (which == 1) {
    const auto [methods, opt] = interpret([&] { return std::pair{parse_methods(s.methods), make_options(s)}; });
    const auto cases = table1_cases();
    const auto reps = table1(cases, methods, opt);
    for (const auto& r : reps) out << format_report(r);
    nlohmann::json rj = nlohmann::json::array();
    for (const auto& r : reps) rj.push_back(to_json(r));
    nlohmann::json cj = nlohmann::json::array();
    for (const auto& c : cases) cj.push_back({{"y", c.y}, {"h0", c.h0}});
    nlohmann::json side = provenance("table 1", {{"cases", cj}, {"methods", s.methods}, {"options", options_json(opt)}});
    side["reports"] = rj;
    write_file((dir / "table1.csv").string(), table1_csv(reps, cases));
    write_file((dir / "table1.json").string(), side.dump(2) + "\n");
    return 0;
  }
  const auto [region, methods, scheme, us, opt] = interpret([&] {
    const std::string list = s.methods == "all" ? std::string("bp,au2,au3,dbp,dau,mcb") : s.methods;
    std::vector<double> u = s.u_list.empty() ? default_u_list() : parse_list(s.u_list, "--u");
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw ArgumentError("--alpha must lie in (0, 1)");
    return std::tuple{Region::parse(s.region), parse_methods(list), parse_scheme(s.scheme), u, make_options(s)};
  });
  const auto rows = table2(region, us, s.alpha, methods, scheme, opt);
  out << format_table2(rows);
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) rj.push_back(to_json(r));
  nlohmann::json side = provenance("table 2", {{"region", region.to_json()},
                                               {"u", us},
                                               {"alpha", s.alpha},
                                               {"methods", s.methods},
                                               {"scheme", s.scheme},
                                               {"options", options_json(opt)},
                                               {"budget_cheap", RejectionBudget{}.to_json()},
                                               {"budget_curve_methods", expensive_budget().to_json()}});
  side["rows"] = rj;
  write_file((dir / "table2.csv").string(), table2_percent_csv(rows));
  write_file((dir / "table2.json").string(), side.dump(2) + "\n");
  return 0;
}

inline int cmd_curve(const Settings& s, std::ostream& out) {
  const auto [region, y, opt, kind] = interpret([&] {
    Region r = Region::parse(s.region);
    Point y = parse_y(s.y, r);
    if (s.kind != "bp" && s.kind != "dbp") throw ArgumentError("--kind must be bp or dbp");
    PValueOptions o = make_options(s);
    if (s.scales.empty()) o.grid = default_mc_grid();
    return std::tuple{r, y, o, s.kind == "bp" ? CurveKind::bp : CurveKind::dbp};
  });
  ScalingCurve c;
  if (kind == CurveKind::bp) {
    c = bp_curve(region, y, opt.grid, BpRequest{opt.backend, opt.replicates, opt.seed, 0, opt.quad});
  } else {
    DbpRequest req;
    req.backend = opt.backend;
    req.outer_replicates = opt.replicates;
    req.inner_replicates = opt.inner_replicates;
    req.seed = opt.seed;
    req.quad = opt.quad;
    req.center = detail::dbp_center(region, region.project(y), opt.center_shift);
    c = dbp_curve(region, y, opt.grid, req);
  }
  const std::string csv = curve_csv(c);
  nlohmann::json fits = nlohmann::json::object();
  const int max_degree = kind == CurveKind::bp ? 3 : 2;
  for (int d = 1; d <= max_degree; ++d) {
    try {
      const FitResult f = fit_poly(c, d);
      nlohmann::json fj = fit_json(f);
      fj["z_at_minus1"] = f.eval(-1.0);
      fj["se_at_minus1"] = f.eval_se(-1.0);
      fj["z_at_1"] = f.eval(1.0);
      fits["degree" + std::to_string(d)] = fj;
    } catch (const Error& e) {
      fits["degree" + std::to_string(d)] = {{"error", e.what()}};
    }
  }
  nlohmann::json ex = nlohmann::json::object();
  for (Extrapolation mode : {Extrapolation::fit, Extrapolation::taylor}) {
    try {
      nlohmann::json m;
      if (kind == CurveKind::bp) {
        for (int k : {2, 3}) {
          const auto e = au_k(c, k, mode);
          m["au" + std::to_string(k)] = {{"z", e.z}, {"se", e.se}, {"p", e.p}};
        }
      } else {
        const auto e = dau(c, mode);
        m["dau"] = {{"z", e.z}, {"se", e.se}, {"p", e.p}};
      }
      ex[to_string(mode)] = m;
    } catch (const Error& e) {
      ex[to_string(mode)] = {{"error", e.what()}};
    }
  }
  nlohmann::json side = provenance("curve", {{"region", region.to_json()},
                                             {"y", y},
                                             {"kind", s.kind},
                                             {"options", options_json(opt)}});
  side["fits"] = fits;
  side["extrapolations"] = ex;
  if (s.out.empty()) {
    out << csv;
  } else {
    write_file(s.out, csv);
    write_file(s.out + ".fit.json", side.dump(2) + "\n");
    out << csv;
  }
  return 0;
}

struct OracleArgs {
  std::string beta, gamma;
  double lambda = 0.0;
  double sigma2 = 1.0;
  double tau2 = 1.0;
  double kappa = 0.0;
};

inline int cmd_oracle(const Settings& s, const OracleArgs& a, CLI::App& sub, std::ostream& out) {
  std::optional<Curvatures> curv;
  GeometricSummary g;
  nlohmann::json source;
  interpret([&] {
    if (!a.beta.empty()) {
      const auto b = parse_list(a.beta, "--beta");
      if (b.size() != 4) throw ArgumentError("--beta needs four values");
      g.beta0 = b[0];
      g.beta1 = b[1];
      g.beta2 = b[2];
      g.beta3 = b[3];
      source = {{"beta", b}};
    } else if (!a.gamma.empty()) {
      const auto v = parse_list(a.gamma, "--gamma");
      if (v.size() != 4) throw ArgumentError("--gamma needs four values");
      curv = Curvatures{v[0], v[1], v[2], v[3]};
      g = beta_summary(*curv, a.lambda);
      source = {{"gamma", v}, {"lambda", a.lambda}};
    } else {
      if (sub.get_option("--y")->count() == 0) throw ArgumentError("oracle needs --beta, --gamma or --y");
      return 0;
    }
    return 0;
  });
  if (a.beta.empty() && a.gamma.empty()) {
    const auto [region, y] = interpret([&] {
      Region r = Region::parse(s.region);
      return std::pair{r, parse_y(s.y, r)};
    });
    const ProjectionResult pr = region.project(y);
    const SurfaceJet jet = region.jet_at(pr.u_hat);
    const std::vector<double> origin(region.q(), 0.0);
    curv = curvatures_at(jet, origin);
    g = beta_summary(*curv, pr.lambda_hat);
    source = {{"region", region.to_json()}, {"y", y}, {"mu_hat", pr.mu_hat}, {"lambda_hat", pr.lambda_hat}};
  }
  nlohmann::json j = provenance("oracle", {{"source", source},
                                           {"sigma2", a.sigma2},
                                           {"tau2", a.tau2},
                                           {"kappa_theta", a.kappa},
                                           {"alpha", s.alpha}});
  j["summary"] = to_json(g);
  nlohmann::json e{{"pv", pv_expansion(g)},
                   {"au", au_expansion(g)},
                   {"nbp_z", nbp_z_expansion(g, a.sigma2)},
                   {"dbp", dbp_expansion(g, a.tau2, a.sigma2, a.kappa)},
                   {"dau", dbp_expansion(g, a.tau2, -1.0, a.kappa)},
                   {"signed_lr", normal_sf(g.beta0)}};
  try {
    e["bp"] = bp_expansion(g, a.sigma2);
  } catch (const InvalidScale&) {
    e["bp"] = nullptr;
  }
  j["expansions"] = e;
  nlohmann::json rej{{"dbp", reject_dbp(g.beta3, s.alpha, 1.0)}, {"dau", reject_dbp(g.beta3, s.alpha, -1.0)}};
  if (curv) {
    rej["bp"] = reject_nbp(*curv, s.alpha, 1.0);
    rej["au"] = reject_nbp(*curv, s.alpha, -1.0);
    rej["nbp_sigma2"] = reject_nbp(*curv, s.alpha, a.sigma2);
  }
  j["rejection"] = rej;
  const std::string text = j.dump(2) + "\n";
  if (!s.out.empty()) write_file(s.out, text);
  out << text;
  return 0;
}

}  // namespace cli_detail

/// Runs the command line given without the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Approximately unbiased p-values for regions of a normal mean"};
  app.require_subcommand(1);
  Settings s;
  OracleArgs oa;
  int which = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--region", s.region, "region name (cone, flat, efron, sphere) or JSON descriptor");
    sub->add_option("--y", s.y, "observation, comma separated");
    sub->add_option("--scales", s.scales, "sigma^2 grid, a:b:n or comma list");
    sub->add_option("--reps", s.reps, "bootstrap replicates (mc backend)");
    sub->add_option("--inner-reps", s.inner_reps, "inner replicates for double bootstrap (mc backend)");
    sub->add_option("--seed", s.seed, "random seed");
    sub->add_option("--backend", s.backend, "mc or quad");
    sub->add_option("--extrapolation", s.extrapolation, "fit or taylor");
    sub->add_option("--alpha", s.alpha, "significance level");
    sub->add_option("--config", s.config, "JSON config; flags override");
    sub->add_option("--center-shift", s.center_shift, "move the double bootstrap center along the boundary");
  };

  auto* pv = app.add_subcommand("pvalue", "p-values of one observation");
  common(pv);
  pv->add_option("--method", s.methods, "method name, comma list or all");
  pv->add_option("--out", s.out, "JSON report path");

  auto* tb = app.add_subcommand("table", "reproduce table 1 or 2");
  common(tb);
  tb->add_option("which", which, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  tb->add_option("--method", s.methods, "method list");
  tb->add_option("--out-dir", s.out_dir, "output directory");
  tb->add_option("--scheme", s.scheme, "quad or mc (table 2)");
  tb->add_option("--u", s.u_list, "boundary parameters, comma list (table 2)");

  auto* cv = app.add_subcommand("curve", "scaling curve and fits");
  common(cv);
  cv->add_option("--kind", s.kind, "bp or dbp");
  cv->add_option("--out", s.out, "CSV path; fits go to <out>.fit.json");

  auto* orc = app.add_subcommand("oracle", "asymptotic expansions");
  common(orc);
  orc->add_option("--beta", oa.beta, "beta0,beta1,beta2,beta3");
  orc->add_option("--gamma", oa.gamma, "gamma1,gamma2,gamma3,gamma4 (with --lambda)");
  orc->add_option("--lambda", oa.lambda, "signed distance for --gamma");
  orc->add_option("--sigma2", oa.sigma2, "bootstrap scale");
  orc->add_option("--tau2", oa.tau2, "outer scale of the double bootstrap");
  orc->add_option("--kappa", oa.kappa, "center-deviation term");
  orc->add_option("--out", s.out, "JSON path");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    apply_config(*sub, s);
    if (sub == pv) return cmd_pvalue(s, out);
    if (sub == tb) return cmd_table(which, s, out);
    if (sub == cv) return cmd_curve(s, out);
    return cmd_oracle(s, oa, *orc, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error in " << e.operation() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace regionboot
