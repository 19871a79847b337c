#pragma once

// JSON and text renderings of reports, rows and curves.

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "regionboot/methods.hpp"
#include "regionboot/multiscale.hpp"
#include "regionboot/rejection_lab.hpp"

#ifndef REGIONBOOT_GIT_REVISION
#define REGIONBOOT_GIT_REVISION "unknown"
#endif

namespace regionboot {

inline constexpr const char* kGitRevision = REGIONBOOT_GIT_REVISION;

/// Fixed-point text with four significant digits ("13.39", "5.027", "0.7188").
inline std::string sig4(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  int decimals = 3;
  if (x != 0.0) decimals = std::max(0, 3 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  // rounding can carry into a new digit (9.9996 -> 10.000)
  if (x != 0.0 && std::abs(std::strtod(buf, nullptr)) >= std::pow(10.0, 4 - decimals) && decimals > 0)
    std::snprintf(buf, sizeof buf, "%.*f", decimals - 1, x);
  return buf;
}

inline nlohmann::json options_json(const PValueOptions& o) {
  auto rule = [](const QuadratureOptions& q) {
    return nlohmann::json{{"truncation", q.truncation}, {"panel_width", q.panel_width}, {"order", q.order},
                          {"max_refine", q.max_refine}};
  };
  return {{"backend", to_string(o.backend)},
          {"extrapolation", to_string(o.extrapolation)},
          {"scales", o.effective_grid()},
          {"reps", o.replicates},
          {"inner_reps", o.inner_replicates},
          {"seed", o.seed},
          {"center_shift", o.center_shift},
          {"quad", {{"inner", rule(o.quad.inner)}, {"outer", rule(o.quad.outer)}, {"root_xtol", o.quad.root_xtol}}}};
}

inline nlohmann::json to_json(const MethodResult& r) {
  nlohmann::json j{{"method", to_string(r.method)}, {"available", r.available}};
  if (r.available) {
    j["p"] = r.p;
    j["z"] = r.z;
    j["se"] = r.se;
  } else {
    j["note"] = r.note;
  }
  return j;
}

inline nlohmann::json to_json(const PValueReport& rep) {
  nlohmann::json res = nlohmann::json::array();
  for (const auto& r : rep.results) res.push_back(to_json(r));
  return {{"y", rep.y}, {"region", rep.region}, {"lambda_hat", rep.lambda_hat}, {"mu_hat", rep.mu_hat},
          {"results", res}};
}

inline nlohmann::json to_json(const RejectionRow& r) {
  return {{"method", to_string(r.method)}, {"u", r.u},           {"alpha", r.alpha},
          {"prob", r.prob},                {"scheme", to_string(r.scheme)}, {"detail", r.detail}};
}

inline nlohmann::json to_json(const GeometricSummary& g) {
  return {{"gamma1", g.gamma1}, {"gamma2", g.gamma2}, {"gamma3", g.gamma3}, {"gamma4", g.gamma4},
          {"beta0", g.beta0},   {"beta1", g.beta1},   {"beta2", g.beta2},   {"beta3", g.beta3}};
}

/// Human-readable p-value table in percent.
inline std::string format_report(const PValueReport& rep) {
  std::ostringstream os;
  os << "y = (";
  for (std::size_t i = 0; i < rep.y.size(); ++i) os << (i ? ", " : "") << rep.y[i];
  os << ")  region = " << rep.region.dump() << "  lambda_hat = " << sig4(rep.lambda_hat) << '\n';
  os << std::left << std::setw(11) << "method" << std::setw(10) << "p(%)" << "z\n";
  for (const auto& r : rep.results) {
    os << std::setw(11) << to_string(r.method);
    if (r.available) os << std::setw(10) << sig4(100.0 * r.p) << sig4(r.z) << '\n';
    else os << std::setw(10) << "-" << r.note << '\n';
  }
  return os.str();
}

/// Percent CSV of table1 reports: method,y_u,y_v,h0,p
inline std::string table1_csv(const std::vector<PValueReport>& reps, const std::vector<Table1Case>& cases) {
  std::ostringstream os;
  os << "method,y_u,y_v,h0,p\n";
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (const auto& r : reps[i].results)
      os << to_string(r.method) << ',' << sig4(reps[i].y[0]) << ',' << sig4(reps[i].y[1]) << ',' << cases[i].h0 << ','
         << (r.available ? sig4(100.0 * r.p) : std::string("NA")) << '\n';
  return os.str();
}

/// Percent CSV of rejection rows: method,u,alpha,prob,scheme
inline std::string table2_percent_csv(const std::vector<RejectionRow>& rows) {
  std::ostringstream os;
  os << "method,u,alpha,prob,scheme\n";
  for (const auto& r : rows)
    os << to_string(r.method) << ',' << r.u << ',' << r.alpha << ',' << sig4(100.0 * r.prob) << ','
       << to_string(r.scheme) << '\n';
  return os.str();
}

/// Rows laid out like the published table: one line per method, one column per u.
inline std::string format_table2(const std::vector<RejectionRow>& rows) {
  std::vector<double> us;
  std::vector<Method> ms;
  for (const auto& r : rows) {
    if (std::find(us.begin(), us.end(), r.u) == us.end()) us.push_back(r.u);
    if (std::find(ms.begin(), ms.end(), r.method) == ms.end()) ms.push_back(r.method);
  }
  std::ostringstream os;
  os << std::left << std::setw(10) << "u";
  for (double u : us) os << std::setw(8) << u;
  os << '\n';
  for (Method m : ms) {
    os << std::setw(10) << to_string(m);
    for (double u : us)
      for (const auto& r : rows)
        if (r.method == m && r.u == u) os << std::setw(8) << sig4(100.0 * r.prob);
    os << '\n';
  }
  return os.str();
}

}  // namespace regionboot
