#include "kdvlab/field.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <nlohmann/json.hpp>

namespace kdvlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
const double kInvSqrtPi = 1.0 / std::sqrt(kPi);

// Trig tables for a given (S, n): cs[(j-1)*n + i] = cos(j x_i), likewise sn.
struct TrigTable {
  int S = 0, n = 0;
  std::vector<double> cs, sn;
};

const TrigTable& table_for(int S, int n) {
  thread_local std::map<std::pair<int, int>, TrigTable> cache;
  auto& t = cache[{S, n}];
  if (t.n == n && t.S == S && !t.cs.empty()) return t;
  t.S = S;
  t.n = n;
  t.cs.assign(static_cast<size_t>(S) * n, 0.0);
  t.sn.assign(static_cast<size_t>(S) * n, 0.0);
  for (int j = 1; j <= S; ++j)
    for (int i = 0; i < n; ++i) {
      const double x = 2.0 * kPi * i / n;
      t.cs[static_cast<size_t>(j - 1) * n + i] = std::cos(j * x);
      t.sn[static_cast<size_t>(j - 1) * n + i] = std::sin(j * x);
    }
  return t;
}

}  // namespace

double FourierField::coeff(int s) const {
  if (s == 0 || s > S || s < -S) throw DomainError("FourierField::coeff: mode out of range");
  return s > 0 ? plus(s) : minus(-s);
}

void FourierField::set_coeff(int s, double v) {
  if (s == 0 || s > S || s < -S) throw DomainError("FourierField::set_coeff: mode out of range");
  if (s > 0)
    plus(s) = v;
  else
    minus(-s) = v;
}

std::vector<double> to_grid(const FourierField& u, int n) {
  if (n < 2 * u.S + 2)
    throw DomainError("to_grid: grid of " + std::to_string(n) + " points cannot resolve S=" +
                      std::to_string(u.S) + " (need n >= 2S+2)");
  const TrigTable& t = table_for(u.S, n);
  std::vector<double> g(n, 0.0);
  for (int j = 1; j <= u.S; ++j) {
    // u_{+j} e_j + u_{-j} e_{-j} = pi^{-1/2} (u_{+j} cos(jx) - u_{-j} sin(jx)),
    // because e_{-j}(x) = pi^{-1/2} sin(-jx) = -pi^{-1/2} sin(jx).
    const double a = u.plus(j) * kInvSqrtPi;
    const double b = -u.minus(j) * kInvSqrtPi;
    const double* cs = &t.cs[static_cast<size_t>(j - 1) * n];
    const double* sn = &t.sn[static_cast<size_t>(j - 1) * n];
    for (int i = 0; i < n; ++i) g[i] += a * cs[i] + b * sn[i];
  }
  return g;
}

FourierField from_grid(const std::vector<double>& values, int S) {
  const int n = static_cast<int>(values.size());
  if (n < 2 * S + 2)
    throw DomainError("from_grid: grid of " + std::to_string(n) +
                      " points cannot resolve S=" + std::to_string(S) + " (need n >= 2S+2)");
  const TrigTable& t = table_for(S, n);
  FourierField u(S);
  const double w = 2.0 * kPi / n * kInvSqrtPi;  // quadrature weight times basis scale
  for (int j = 1; j <= S; ++j) {
    const double* cs = &t.cs[static_cast<size_t>(j - 1) * n];
    const double* sn = &t.sn[static_cast<size_t>(j - 1) * n];
    double sc = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      sc += values[i] * cs[i];
      ss += values[i] * sn[i];
    }
    u.plus(j) = w * sc;
    u.minus(j) = -w * ss;  // <f, e_{-j}> = -pi^{-1/2} int f sin(jx)
  }
  return u;
}

FourierField kdv_nonlinearity(const FourierField& u) {
  int n = 3 * u.S + 2;
  if (n % 2) ++n;
  const std::vector<double> g = to_grid(u, n);
  std::vector<double> sq(g.size());
  for (size_t i = 0; i < g.size(); ++i) sq[i] = g[i] * g[i];
  const FourierField w = from_grid(sq, u.S);
  FourierField out(u.S);
  for (int j = 1; j <= u.S; ++j) {
    // 3 d/dx w with (w_x)_s = -s w_{-s}
    out.plus(j) = -3.0 * j * w.minus(j);
    out.minus(j) = 3.0 * j * w.plus(j);
  }
  return out;
}

double sobolev_norm(const FourierField& u, double m) {
  double acc = 0.0;
  for (int j = 1; j <= u.S; ++j) {
    const double w = std::pow(static_cast<double>(j), 2.0 * m);
    acc += w * (u.plus(j) * u.plus(j) + u.minus(j) * u.minus(j));
  }
  return std::sqrt(acc);
}

FourierField derivative(const FourierField& u) {
  FourierField d(u.S);
  for (int j = 1; j <= u.S; ++j) {
    d.plus(j) = -static_cast<double>(j) * u.minus(j);
    d.minus(j) = static_cast<double>(j) * u.plus(j);
  }
  return d;
}

std::string field_to_json(const FourierField& u) {
  nlohmann::json j;
  j["S"] = u.S;
  auto& coeffs = j["coeffs"] = nlohmann::json::array();
  for (int m = 1; m <= u.S; ++m) {
    coeffs.push_back({m, u.plus(m)});
    coeffs.push_back({-m, u.minus(m)});
  }
  return j.dump();
}

FourierField field_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("field_from_json: ") + e.what());
  }
  if (!j.contains("S") || !j.contains("coeffs"))
    throw DomainError("field_from_json: missing S or coeffs");
  FourierField u(j.at("S").get<int>());
  for (const auto& entry : j.at("coeffs")) {
    if (!entry.is_array() || entry.size() != 2)
      throw DomainError("field_from_json: coeff entries must be [s, value]");
    u.set_coeff(entry[0].get<int>(), entry[1].get<double>());
  }
  return u;
}

}  // namespace kdvlab
