#include "kdvlab/hill.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kdvlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Eigenvalues of -y'' + q y on [0, 2pi] in a real trigonometric basis with
// frequencies `freq` (integers for the periodic problem, half-integers for
// the antiperiodic one). Basis functions: cos(f x)/sqrt(pi), sin(f x)/sqrt(pi)
// per frequency f > 0, plus 1/sqrt(2pi) when f = 0 is included.
std::vector<double> hill_eigenvalues(const FourierField& q, const std::vector<double>& freq,
                                     bool include_constant) {
  const int nb = static_cast<int>(freq.size()) * 2 + (include_constant ? 1 : 0);
  // Quadrature grid: products of two basis functions and the potential are
  // trig polynomials of integer degree <= 2*max_freq + S (frequencies are
  // either both integer or both half-integer, so sums are integers).
  const double fmax = freq.empty() ? 0.0 : freq.back();
  int n = static_cast<int>(2 * fmax) + q.S + 8;
  if (n % 2) ++n;

  const std::vector<double> qg = to_grid(q, std::max(n, 2 * q.S + 2));
  const int ng = static_cast<int>(qg.size());

  // Basis values on the grid.
  Eigen::MatrixXd phi(nb, ng);
  std::vector<double> diag(nb, 0.0);
  int row = 0;
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  if (include_constant) {
    const double c0 = 1.0 / std::sqrt(2.0 * kPi);
    for (int i = 0; i < ng; ++i) phi(row, i) = c0;
    diag[row] = 0.0;
    ++row;
  }
  for (double f : freq) {
    for (int i = 0; i < ng; ++i) {
      const double x = 2.0 * kPi * i / ng;
      phi(row, i) = inv_sqrt_pi * std::cos(f * x);
      phi(row + 1, i) = inv_sqrt_pi * std::sin(f * x);
    }
    diag[row] = f * f;
    diag[row + 1] = f * f;
    row += 2;
  }

  // V_ab = int q phi_a phi_b dx, exact by the trapezoid rule on this grid.
  Eigen::VectorXd w(ng);
  const double h = 2.0 * kPi / ng;
  for (int i = 0; i < ng; ++i) w(i) = qg[i] * h;
  Eigen::MatrixXd V = phi * w.asDiagonal() * phi.transpose();
  for (int a = 0; a < nb; ++a) V(a, a) += diag[a];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(V, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw SpectralResolutionError("hill: eigensolver failed to converge");
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + nb);
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace

HillBackend::HillBackend(int n_gaps, int modes_factor)
    : n_gaps_(n_gaps), modes_factor_(modes_factor) {
  if (n_gaps < 1) throw ConfigError("hill: n_gaps must be >= 1");
  if (modes_factor < 2) throw ConfigError("hill: modes_factor must be >= 2");
}

std::vector<double> HillBackend::combined_spectrum(const FourierField& u, int count) const {
  const int K = modes_factor_ * u.S;
  if (count > 2 * K)
    throw SpectralResolutionError("hill: requested spectrum exceeds the truncated basis");

  std::vector<double> per_freq, anti_freq;
  for (int m = 1; m <= K; ++m) per_freq.push_back(static_cast<double>(m));
  for (int m = 0; m < K; ++m) anti_freq.push_back(static_cast<double>(m) + 0.5);

  std::vector<double> per = hill_eigenvalues(u, per_freq, true);
  std::vector<double> anti = hill_eigenvalues(u, anti_freq, false);

  // Tag the parity class to check the alternation per, anti, anti, per, per...
  // (a theorem for the exact spectrum; a violation here means the truncation
  // cannot resolve the requested gaps).
  std::vector<std::pair<double, int>> all;
  for (double v : per) all.emplace_back(v, 0);
  for (double v : anti) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end());

  std::vector<double> out;
  for (int i = 0; i < count && i < static_cast<int>(all.size()); ++i) {
    const int expected = ((i + 1) / 2) % 2;  // 0: periodic class, 1: antiperiodic
    if (all[static_cast<size_t>(i)].second != expected)
      throw SpectralResolutionError(
          "hill: spectrum alternation broken at index " + std::to_string(i) +
          "; increase modes_factor or lower n_gaps");
    out.push_back(all[static_cast<size_t>(i)].first);
  }
  if (static_cast<int>(out.size()) < count)
    throw SpectralResolutionError("hill: spectrum shorter than requested");
  return out;
}

std::vector<double> HillBackend::gap_lengths(const FourierField& u) const {
  if (n_gaps_ > 2 * u.S)
    throw ConfigError("hill: n_gaps exceeds the resolvable range for this truncation");
  const std::vector<double> ev = combined_spectrum(u, 2 * n_gaps_ + 1);
  std::vector<double> gaps(static_cast<size_t>(n_gaps_));
  for (int j = 1; j <= n_gaps_; ++j)
    gaps[j - 1] = ev[static_cast<size_t>(2 * j)] - ev[static_cast<size_t>(2 * j - 1)];
  return gaps;
}

ActionVector HillBackend::actions_of_field(const FourierField& u) const {
  const std::vector<double> gaps = gap_lengths(u);
  ActionVector I(gaps.size());
  for (size_t j = 0; j < gaps.size(); ++j)
    I[j] = kPi * gaps[j] * gaps[j] / (2.0 * static_cast<double>(j + 1));
  return I;
}

}  // namespace kdvlab
