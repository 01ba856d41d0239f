#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace ortholip {

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// One numerical instance of an inequality LHS <= C * sum(RHS terms).
/// implied_constant = LHS / sum(RHS): 0 when LHS is 0, +inf when only the RHS
/// vanishes. `factors` holds auxiliary quantities that enter the RHS terms
/// non-additively and is not summed.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  std::vector<NamedValue> terms;
  std::vector<NamedValue> factors;
  double rhs = 0.0;
  double implied_constant = 0.0;
  double budget = std::numeric_limits<double>::infinity();
  bool pass = true;
  nlohmann::json params = nlohmann::json::object();

  void add_term(std::string n, double v) { terms.push_back({std::move(n), v}); }
  void add_factor(std::string n, double v) { factors.push_back({std::move(n), v}); }
  double term(const std::string& n) const;
  double factor(const std::string& n) const;
  /// Sums the terms, computes the implied constant and the pass flag.
  InequalityReport& finalize(double budget_value = std::numeric_limits<double>::infinity());

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row(const std::string& tag = "") const;
};

double implied_constant(double lhs, double rhs);

}  // namespace ortholip
