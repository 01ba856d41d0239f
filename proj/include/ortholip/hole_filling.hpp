#pragma once

// Absorption ("hole filling") lemma. If for r <= t < s <= R
//   Z(t) <= A/(s-t)^alpha + B/(s-t)^beta + C + theta Z(s)
// then
//   Z(r) <= coeff [A/(R-r)^alpha + B/(R-r)^beta + C],
//   coeff = lambda^alpha / ((1-lambda)^alpha (lambda^alpha - theta)),
// for any theta^{1/alpha} < lambda < 1.

#include <functional>

#include "json.hpp"

namespace ortholip {

struct HoleFillingInstance {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double alpha = 1.0;
  double beta = 1.0;
  double theta = 0.0;
  double lambda = 0.5;
  double r = 0.0;
  double R = 1.0;

  /// Throws std::invalid_argument outside the lemma's parameter ranges.
  void validate() const;
  nlohmann::json to_json() const;
};

double hole_filling_coefficient(const HoleFillingInstance& inst);

struct HoleFillingResult {
  double coefficient = 0.0;
  bool hypothesis = true;
  bool conclusion = true;
  /// max over sampled pairs of Z(t) / hypothesis RHS
  double hypothesis_ratio = 0.0;
  /// max over mesh radii of Z(rho) / conclusion RHS
  double conclusion_ratio = 0.0;
};

/// Samples Z on rho_k = r + k (R - r)/mesh, k = 0..mesh. The hypothesis is
/// tested on every pair rho_a < rho_b, the conclusion at every rho_k < R
/// (the lemma applied on [rho_k, R]). Both use relative tolerance `rtol`.
HoleFillingResult hole_filling_check(const std::function<double(double)>& Z, const HoleFillingInstance& inst,
                                     int mesh = 100, double rtol = 1e-12);

}  // namespace ortholip
