#include "ortholip/ladder.hpp"

#include <cctype>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace ortholip {

std::string to_string(Regime r) { return r == Regime::homogeneous ? "homogeneous" : "nonhomogeneous"; }

Regime regime_from_string(const std::string& s) {
  if (s == "homogeneous") return Regime::homogeneous;
  if (s == "nonhomogeneous" || s == "non-homogeneous") return Regime::nonhomogeneous;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

namespace {

boost::multiprecision::cpp_int parse_integer(const std::string& s, const std::string& whole) {
  if (s.empty()) throw std::invalid_argument("not a rational number: '" + whole + "'");
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("not a rational number: '" + whole + "'");
  return boost::multiprecision::cpp_int(s);
}

Rational pow2(int e) { return Rational(boost::multiprecision::cpp_int(1) << e); }

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  Rational out;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const auto num = parse_integer(s.substr(0, slash), text);
    const auto den = parse_integer(s.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    out = Rational(num, den);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    const std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw std::invalid_argument("not a rational number: '" + text + "'");
    const auto i = ip.empty() ? boost::multiprecision::cpp_int(0) : parse_integer(ip, text);
    const auto f = fp.empty() ? boost::multiprecision::cpp_int(0) : parse_integer(fp, text);
    boost::multiprecision::cpp_int scale = 1;
    for (std::size_t k = 0; k < fp.size(); ++k) scale *= 10;
    out = Rational(i) + Rational(f, scale);
  } else {
    out = Rational(parse_integer(s, text));
  }
  return negative ? Rational(-out) : out;
}

std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational sobolev_exponent_exact(int N) {
  if (N < 2) throw std::invalid_argument("ladder: N must be >= 2");
  if (N == 2) return Rational(4);
  return Rational(2 * N, N - 2);
}

Rational zeta(const Rational& x, const Rational& y) { return (x - 1) / (x * y - 1); }

LadderTable ladder(Regime regime, const Rational& p, int N, const Rational& h, int j_max) {
  if (p < 2) throw std::invalid_argument("ladder: p must be >= 2");
  if (j_max < 1 || j_max > 60) throw std::invalid_argument("ladder: j_max must lie in [1, 60]");
  LadderTable t;
  t.regime = regime;
  t.p = p;
  t.N = N;
  t.h = h;
  t.two_star = sobolev_exponent_exact(N);
  t.two_star_surrogate = N == 2;
  const Rational h_min = t.two_star / (t.two_star - 2);
  if (h <= h_min)
    throw std::invalid_argument("ladder: h must exceed " + rational_to_string(h_min) + " (N/2 for N >= 3)");
  t.h_prime = h / (h - 1);
  const Rational half_star = t.two_star / 2;
  const Rational& hp = t.h_prime;

  if (regime == Regime::homogeneous) {
    t.j0 = 0;
    for (int j = 0; j <= j_max; ++j) {
      LadderRow r;
      r.j = j;
      r.gamma = p + pow2(j + 2) - 2;
      r.gamma_hat = half_star * r.gamma;
      if (j >= 1) {
        r.ratio = r.gamma / t.rows.back().gamma;
        r.tau = (half_star - 1) / (half_star * *r.ratio - 1);
      }
      t.rows.push_back(r);
    }
    t.tau_bar = Rational(1, 2) * (t.two_star - 2) / (t.two_star - 1);
    t.beta = (1 - t.tau_bar) / t.tau_bar;
    return t;
  }

  const Rational q_lo_a = (p - 2 * hp) / (2 * (hp - 1));
  const Rational q_lo_b = t.two_star * p / (2 * hp) - 1;
  const Rational q_lo = q_lo_a > q_lo_b ? q_lo_a : q_lo_b;
  int j0 = 1;
  while (pow2(j0) - 1 < q_lo) ++j0;
  t.j0 = j0;
  if (j0 + 1 > j_max) throw std::invalid_argument("ladder: j_max must be at least j0 + 1 = " + std::to_string(j0 + 1));

  for (int j = 0; j <= j_max; ++j) {
    LadderRow r;
    r.j = j;
    r.gamma = pow2(j + 2) * hp - half_star * p;
    r.gamma_hat = t.two_star * (pow2(j + 1) - 1);
    r.in_range = j >= j0;
    if (j >= 1 && t.rows.back().gamma != 0) r.ratio = r.gamma / t.rows.back().gamma;
    if (j >= j0 + 1) r.tau = zeta(r.gamma_hat / r.gamma, *r.ratio);
    t.rows.push_back(r);
  }
  t.tau_bar = (t.two_star - 2 * hp) / (4 * t.two_star - 2 * hp);
  t.beta = (1 - t.tau_bar) * hp / t.tau_bar;

  const Rational target = 1 + t.rows[j0].gamma / t.two_star;
  int j1 = j0;
  while (pow2(j1 + 1) < target) ++j1;
  t.j1 = j1;
  t.q1 = pow2(j1 + 1) - 1;
  return t;
}

TauCheck tau_check(const LadderTable& t) {
  TauCheck c;
  const bool hom = t.regime == Regime::homogeneous;
  const int first = hom ? 1 : t.j0 + 1;
  const Rational half_star = t.two_star / 2;
  std::optional<Rational> prev;
  for (const LadderRow& r : t.rows) {
    if (r.j < first) continue;
    const Rational& g_prev = t.rows[static_cast<std::size_t>(r.j - 1)].gamma;
    if (g_prev <= 0 || r.gamma <= 0) {
      c.tau_in_unit_interval = false;
      continue;
    }
    const Rational ratio = r.gamma / g_prev;
    const Rational tau = hom ? (half_star - 1) / (half_star * ratio - 1) : zeta(r.gamma_hat / r.gamma, ratio);
    if (!(tau > 0 && tau < 1)) c.tau_in_unit_interval = false;
    if (tau < t.tau_bar) c.tau_above_bar = false;
    if (hom && prev && tau > *prev) c.tau_decreasing = false;
    if (!hom && (ratio < 2 || ratio > 4)) c.gamma_ratio_in_2_4 = false;
    prev = tau;
  }
  return c;
}

bool tau_monotonicity_check(const LadderTable& table) { return tau_check(table).ok(); }

namespace {

nlohmann::json rational_json(const Rational& r) {
  return {{"exact", rational_to_string(r)}, {"value", to_double(r)}};
}

}  // namespace

nlohmann::json LadderTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const LadderRow& r : rows) {
    nlohmann::json row = {{"j", r.j}, {"gamma", rational_json(r.gamma)}, {"in_range", r.in_range}};
    row[regime == Regime::homogeneous ? "star_gamma" : "gamma_hat"] = rational_json(r.gamma_hat);
    row["ratio"] = r.ratio ? rational_json(*r.ratio) : nlohmann::json(nullptr);
    row["tau"] = r.tau ? rational_json(*r.tau) : nlohmann::json(nullptr);
    rows_json.push_back(row);
  }
  nlohmann::json out = {{"regime", to_string(regime)},
                        {"p", rational_json(p)},
                        {"N", N},
                        {"h", rational_json(h)},
                        {"h_prime", rational_json(h_prime)},
                        {"two_star", rational_json(two_star)},
                        {"two_star_surrogate", two_star_surrogate},
                        {"tau_bar", rational_json(tau_bar)},
                        {"beta", rational_json(beta)},
                        {"j0", j0},
                        {"rows", rows_json}};
  out["j1"] = j1 ? nlohmann::json(*j1) : nlohmann::json(nullptr);
  out["q1"] = q1 ? rational_json(*q1) : nlohmann::json(nullptr);
  return out;
}

std::string LadderTable::to_text() const {
  std::ostringstream os;
  os << "regime " << to_string(regime) << "  p=" << rational_to_string(p) << "  N=" << N
     << "  h=" << rational_to_string(h) << "  2*=" << rational_to_string(two_star)
     << (two_star_surrogate ? " (surrogate)" : "") << "\n";
  os << std::setw(4) << "j" << std::setw(22) << "gamma" << std::setw(22)
     << (regime == Regime::homogeneous ? "2*gamma/2" : "gamma_hat") << std::setw(22) << "tau" << "\n";
  os << std::setprecision(12);
  for (const LadderRow& r : rows) {
    os << std::setw(4) << r.j << std::setw(22) << to_double(r.gamma) << std::setw(22) << to_double(r.gamma_hat)
       << std::setw(22);
    if (r.tau)
      os << to_double(*r.tau);
    else
      os << "-";
    os << (r.in_range ? "" : "  (below j0)") << "\n";
  }
  os << "tau_bar = " << rational_to_string(tau_bar) << "  beta = " << rational_to_string(beta) << "  j0 = " << j0;
  if (j1) os << "  j1 = " << *j1 << "  q1 = " << rational_to_string(*q1);
  os << "\n";
  return os.str();
}

}  // namespace ortholip
