#include "ortholip/hole_filling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ortholip {

void HoleFillingInstance::validate() const {
  if (!(A >= 0.0 && B >= 0.0 && C >= 0.0)) throw std::invalid_argument("hole filling: A, B, C must be >= 0");
  if (!(beta > 0.0 && alpha >= beta)) throw std::invalid_argument("hole filling: need alpha >= beta > 0");
  if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("hole filling: theta must lie in [0, 1)");
  if (!(lambda > std::pow(theta, 1.0 / alpha) && lambda < 1.0))
    throw std::invalid_argument("hole filling: lambda must lie in (theta^(1/alpha), 1)");
  if (!(r >= 0.0 && r < R)) throw std::invalid_argument("hole filling: need 0 <= r < R");
}

nlohmann::json HoleFillingInstance::to_json() const {
  return {{"A", A}, {"B", B}, {"C", C}, {"alpha", alpha}, {"beta", beta},
          {"theta", theta}, {"lambda", lambda}, {"r", r}, {"R", R}};
}

double hole_filling_coefficient(const HoleFillingInstance& inst) {
  inst.validate();
  const double la = std::pow(inst.lambda, inst.alpha);
  return la / (std::pow(1.0 - inst.lambda, inst.alpha) * (la - inst.theta));
}

HoleFillingResult hole_filling_check(const std::function<double(double)>& Z, const HoleFillingInstance& inst,
                                     int mesh, double rtol) {
  if (mesh < 1) throw std::invalid_argument("hole filling: mesh must be >= 1");
  HoleFillingResult res;
  res.coefficient = hole_filling_coefficient(inst);
  std::vector<double> rho(static_cast<std::size_t>(mesh) + 1), z(rho.size());
  for (int k = 0; k <= mesh; ++k) {
    rho[k] = k == mesh ? inst.R : inst.r + (inst.R - inst.r) * k / mesh;
    z[k] = Z(rho[k]);
    if (!(z[k] >= 0.0) || !std::isfinite(z[k])) throw std::invalid_argument("hole filling: Z must be finite and >= 0");
  }
  auto data = [&](double gap) {
    return inst.A / std::pow(gap, inst.alpha) + inst.B / std::pow(gap, inst.beta) + inst.C;
  };
  for (std::size_t a = 0; a < rho.size(); ++a)
    for (std::size_t b = a + 1; b < rho.size(); ++b) {
      const double rhs = data(rho[b] - rho[a]) + inst.theta * z[b];
      if (z[a] > rhs * (1.0 + rtol)) res.hypothesis = false;
      if (rhs > 0.0) res.hypothesis_ratio = std::max(res.hypothesis_ratio, z[a] / rhs);
    }
  for (std::size_t a = 0; a + 1 < rho.size(); ++a) {
    const double rhs = res.coefficient * data(inst.R - rho[a]);
    if (z[a] > rhs * (1.0 + rtol)) res.conclusion = false;
    if (rhs > 0.0) res.conclusion_ratio = std::max(res.conclusion_ratio, z[a] / rhs);
  }
  return res;
}

}  // namespace ortholip
