#pragma once

// Moser exponent ladders in exact rational arithmetic.
//
// Homogeneous regime:  gamma_j = p + 2^{j+2} - 2, companion (2*/2) gamma_j,
//   tau_j = (2*/2 - 1) / ((2*/2) gamma_j / gamma_{j-1} - 1) for j >= 1,
//   tau_bar = (1/2)(2* - 2)/(2* - 1), beta = (1 - tau_bar)/tau_bar.
// Non-homogeneous regime (h' = h/(h-1)):
//   gamma_j = 2^{j+2} h' - (2*/2) p,  gamma_hat_j = 2* (2^{j+1} - 1),
//   tau_j = zeta(gamma_hat_j/gamma_j, gamma_j/gamma_{j-1}) for j >= j0 + 1,
//   zeta(x, y) = (x - 1)/(x y - 1), tau_bar = (2* - 2h')/(4 * 2* - 2h'),
//   beta = (1 - tau_bar) h' / tau_bar.
//   j0 is the smallest j >= 1 for which q = 2^j - 1 satisfies
//   q >= max{(p - 2h')/(2(h' - 1)), 2* p/(2h') - 1}, so that every
//   q = 2^{j+1} - 1 with j >= j0 - 1 does.
//   j1 = min{j >= j0 : 2^{j+1} >= 1 + gamma_{j0}/2*}, q1 = 2^{j1+1} - 1.
// For N = 2 the Sobolev exponent is replaced by the surrogate 2* = 4.

#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

namespace ortholip {

using Rational = boost::multiprecision::cpp_rational;

enum class Regime { homogeneous, nonhomogeneous };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// Parses "2", "2.5", "-0.125", "7/3" exactly.
Rational parse_rational(const std::string& s);
std::string rational_to_string(const Rational& r);
double to_double(const Rational& r);

/// 2N/(N-2) for N >= 3, 4 for N = 2.
Rational sobolev_exponent_exact(int N);

struct LadderRow {
  int j = 0;
  Rational gamma;
  /// gamma_hat_j (non-homogeneous) or (2*/2) gamma_j (homogeneous)
  Rational gamma_hat;
  /// gamma_j / gamma_{j-1}, for j >= 1 when gamma_{j-1} != 0
  std::optional<Rational> ratio;
  /// defined for j >= 1 (homogeneous) or j >= j0 + 1 (non-homogeneous)
  std::optional<Rational> tau;
  /// j >= j0: the row belongs to the ladder actually used
  bool in_range = true;
};

struct LadderTable {
  Regime regime = Regime::homogeneous;
  Rational p;
  int N = 3;
  Rational h;
  Rational h_prime;
  Rational two_star;
  bool two_star_surrogate = false;
  std::vector<LadderRow> rows;
  Rational tau_bar;
  Rational beta;
  int j0 = 0;
  std::optional<int> j1;
  std::optional<Rational> q1;

  const LadderRow& row(int j) const { return rows.at(static_cast<std::size_t>(j)); }
  nlohmann::json to_json() const;
  /// Fixed-width text table for terminals.
  std::string to_text() const;
};

/// Throws std::invalid_argument for p < 2, N < 2, j_max < 1 or
/// h <= 2*/(2* - 2) (that is h <= N/2 for N >= 3).
LadderTable ladder(Regime regime, const Rational& p, int N, const Rational& h, int j_max);

Rational zeta(const Rational& x, const Rational& y);

struct TauCheck {
  bool tau_in_unit_interval = true;
  bool tau_above_bar = true;
  /// homogeneous only; vacuous otherwise
  bool tau_decreasing = true;
  /// non-homogeneous only, j >= j0 + 1
  bool gamma_ratio_in_2_4 = true;
  bool ok() const { return tau_in_unit_interval && tau_above_bar && tau_decreasing && gamma_ratio_in_2_4; }
};

/// Recomputes ratios and tau from the stored gamma columns.
TauCheck tau_check(const LadderTable& table);
bool tau_monotonicity_check(const LadderTable& table);

}  // namespace ortholip
