#include "ortholip/report.hpp"

#include <cmath>
#include <stdexcept>

#include "ortholip/field_io.hpp"

namespace ortholip {

double implied_constant(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  if (rhs == 0.0) return std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

namespace {

double lookup(const std::vector<NamedValue>& v, const std::string& n) {
  for (const auto& t : v)
    if (t.name == n) return t.value;
  throw std::out_of_range("report has no entry '" + n + "'");
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

double InequalityReport::term(const std::string& n) const { return lookup(terms, n); }
double InequalityReport::factor(const std::string& n) const { return lookup(factors, n); }

InequalityReport& InequalityReport::finalize(double budget_value) {
  rhs = 0.0;
  for (const auto& t : terms) rhs += t.value;
  implied_constant = ortholip::implied_constant(lhs, rhs);
  budget = budget_value;
  pass = std::isfinite(implied_constant) && implied_constant <= budget;
  return *this;
}

nlohmann::json InequalityReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["lhs"] = number(lhs);
  auto t = nlohmann::json::object();
  for (const auto& x : terms) t[x.name] = number(x.value);
  j["rhs_terms"] = t;
  auto f = nlohmann::json::object();
  for (const auto& x : factors) f[x.name] = number(x.value);
  j["factors"] = f;
  j["rhs"] = number(rhs);
  j["implied_constant"] = number(implied_constant);
  j["budget"] = number(budget);
  j["pass"] = pass;
  j["params"] = params;
  return j;
}

std::string InequalityReport::csv_header() {
  return "tag,name,spacing,lhs,rhs,implied_constant,budget,pass";
}

std::string InequalityReport::csv_row(const std::string& tag) const {
  const double spacing = params.contains("spacing") && params["spacing"].is_number()
                             ? params["spacing"].get<double>()
                             : 0.0;
  return tag + "," + name + "," + format_double(spacing) + "," + format_double(lhs) + "," +
         format_double(rhs) + "," + format_double(implied_constant) + "," + format_double(budget) +
         "," + (pass ? "1" : "0");
}

}  // namespace ortholip
