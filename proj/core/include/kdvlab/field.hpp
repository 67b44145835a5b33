#pragma once

#include <string>
#include <vector>

#include "kdvlab/errors.hpp"

namespace kdvlab {

// Zero-mean field on the circle R/2piZ in the orthonormal trigonometric basis
//
//   e_s(x) = pi^{-1/2} cos(sx)   (s > 0)
//   e_s(x) = pi^{-1/2} sin(sx)   (s < 0)
//
// There is no s = 0 slot, so the zero-mean constraint is structural.
// Under this convention d/dx e_s = s * e_{-s}, hence for u = sum u_s e_s:
//   (u_x)_s  = -s u_{-s},   (u_xx)_s = -s^2 u_s,   (u_xxx)_s = s^3 u_{-s}.
struct FourierField {
  int S = 0;               // modes |s| = 1..S are retained
  std::vector<double> c;   // c[2(j-1)] = u_{+j}, c[2(j-1)+1] = u_{-j}

  FourierField() = default;
  explicit FourierField(int trunc) : S(trunc), c(2 * static_cast<size_t>(trunc), 0.0) {
    if (trunc < 1) throw DomainError("FourierField: truncation must be >= 1");
  }

  double& plus(int j) { return c[2 * static_cast<size_t>(j - 1)]; }
  double& minus(int j) { return c[2 * static_cast<size_t>(j - 1) + 1]; }
  double plus(int j) const { return c[2 * static_cast<size_t>(j - 1)]; }
  double minus(int j) const { return c[2 * static_cast<size_t>(j - 1) + 1]; }

  // signed-mode access, s in [-S, -1] u [1, S]
  double coeff(int s) const;
  void set_coeff(int s, double v);
};

// Collocation values on the uniform grid x_i = 2 pi i / n, i = 0..n-1.
// Requires n >= 2S+2 so that the grid resolves every retained mode.
std::vector<double> to_grid(const FourierField& u, int n);

// Coefficients of the trigonometric interpolant (exact inverse of to_grid on
// the retained modes when n >= 2S+2).
FourierField from_grid(const std::vector<double>& values, int S);

// 6 u u_x = 3 d/dx (u^2), evaluated pseudospectrally with 2/3-rule dealiasing
// (zero padding to an even grid with n >= 3S+2 removes quadratic aliasing on
// the retained modes exactly). Truncation S is preserved.
FourierField kdv_nonlinearity(const FourierField& u);

// ||u||_m = ( sum_s s^{2m} u_s^2 )^{1/2}  (Parseval form of the Sobolev norm)
double sobolev_norm(const FourierField& u, double m);

// (du/dx)_s = -s u_{-s}
FourierField derivative(const FourierField& u);

// JSON object {"S": int, "coeffs": [[s, u_s], ...]} in deterministic order
// s = 1, -1, 2, -2, ... Round trips bit-exactly.
std::string field_to_json(const FourierField& u);
FourierField field_from_json(const std::string& json_text);

}  // namespace kdvlab
