#include "kdvlab/birkhoff.hpp"

#include <cmath>
#include <string>

namespace kdvlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Field from the first N pairs of u (used when a backend is handed a field
// with a larger truncation than it retains).
FourierField head_of(const FourierField& u, int n) {
  if (u.S == n) return u;
  if (u.S < n) throw DomainError("backend: field truncation smaller than backend n_pairs");
  FourierField h(n);
  for (int j = 1; j <= n; ++j) {
    h.plus(j) = u.plus(j);
    h.minus(j) = u.minus(j);
  }
  return h;
}
}  // namespace

std::vector<double> BirkhoffVector::flat() const {
  std::vector<double> z(2 * p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    z[2 * i] = p[i].x;
    z[2 * i + 1] = p[i].y;
  }
  return z;
}

BirkhoffVector BirkhoffVector::from_flat(const std::vector<double>& z) {
  if (z.size() % 2 != 0)
    throw DomainError("from_flat: flat pair vector must have even length");
  BirkhoffVector v(static_cast<int>(z.size() / 2));
  for (size_t i = 0; i < v.p.size(); ++i) {
    v.p[i].x = z[2 * i];
    v.p[i].y = z[2 * i + 1];
  }
  return v;
}

ActionVector actions(const BirkhoffVector& v) {
  ActionVector I(v.p.size());
  for (size_t i = 0; i < v.p.size(); ++i) I[i] = 0.5 * v.p[i].norm_sq();
  return I;
}

AngleVector angles(const BirkhoffVector& v) {
  AngleVector phi(v.p.size());
  for (size_t i = 0; i < v.p.size(); ++i) {
    if (v.p[i].x == 0.0 && v.p[i].y == 0.0) {
      phi[i] = 0.0;
    } else {
      double a = std::atan2(v.p[i].y, v.p[i].x);
      if (a < 0) a += kTwoPi;
      phi[i] = a;
    }
  }
  return phi;
}

BirkhoffVector rotate(const BirkhoffVector& v, const AngleVector& theta) {
  if (theta.size() != v.p.size()) throw DomainError("rotate: angle dimension mismatch");
  BirkhoffVector w(v.n_pairs());
  for (size_t i = 0; i < v.p.size(); ++i) {
    const double c = std::cos(theta[i]), s = std::sin(theta[i]);
    w.p[i].x = c * v.p[i].x - s * v.p[i].y;
    w.p[i].y = s * v.p[i].x + c * v.p[i].y;
  }
  return w;
}

BirkhoffVector rotate(const BirkhoffVector& v, double theta) {
  return rotate(v, AngleVector(v.p.size(), theta));
}

BirkhoffVector reconstruct(const ActionVector& I, const AngleVector& phi) {
  if (I.size() != phi.size()) throw DomainError("reconstruct: dimension mismatch");
  BirkhoffVector v(static_cast<int>(I.size()));
  for (size_t i = 0; i < I.size(); ++i) {
    if (I[i] < 0) throw DomainError("reconstruct: negative action I_" + std::to_string(i + 1));
    const double r = std::sqrt(2.0 * I[i]);
    v.p[i].x = r * std::cos(phi[i]);
    v.p[i].y = r * std::sin(phi[i]);
  }
  return v;
}

double weighted_norm(const BirkhoffVector& v, double r) {
  double acc = 0;
  for (size_t i = 0; i < v.p.size(); ++i)
    acc += std::pow(static_cast<double>(i + 1), 1.0 + 2.0 * r) * v.p[i].norm_sq();
  return std::sqrt(acc);
}

double action_norm(const ActionVector& I, double p) {
  double acc = 0;
  for (size_t i = 0; i < I.size(); ++i)
    acc += std::pow(static_cast<double>(i + 1), 1.0 + 2.0 * p) * std::abs(I[i]);
  return 2.0 * acc;
}

BirkhoffVector BirkhoffBackend::forward(const FourierField&) const {
  throw CapabilityError(std::string(name()) + " backend does not provide forward()");
}
FourierField BirkhoffBackend::inverse(const BirkhoffVector&) const {
  throw CapabilityError(std::string(name()) + " backend does not provide inverse()");
}
JacobianBlocks BirkhoffBackend::jacobian(const FourierField&, int) const {
  throw CapabilityError(std::string(name()) + " backend does not provide jacobian()");
}
HessianPairDirs BirkhoffBackend::hessian_pair_dirs(const FourierField&, int) const {
  throw CapabilityError(std::string(name()) + " backend does not provide hessian()");
}
std::vector<double> BirkhoffBackend::frequencies() const {
  throw CapabilityError(std::string(name()) + " backend does not provide frequencies()");
}
ActionVector BirkhoffBackend::actions_of_field(const FourierField& u) const {
  return actions(forward(u));
}

BirkhoffVector LinearBackend::forward(const FourierField& u) const {
  const FourierField h = head_of(u, n_);
  BirkhoffVector v(n_);
  for (int j = 1; j <= n_; ++j) {
    const double s = 1.0 / std::sqrt(static_cast<double>(j));
    v[j].x = s * h.plus(j);
    v[j].y = s * h.minus(j);
  }
  return v;
}

FourierField LinearBackend::inverse(const BirkhoffVector& v) const {
  if (v.n_pairs() != n_) throw DomainError("linear inverse: pair count mismatch");
  FourierField u(n_);
  for (int j = 1; j <= n_; ++j) {
    const double s = std::sqrt(static_cast<double>(j));
    u.plus(j) = s * v[j].x;
    u.minus(j) = s * v[j].y;
  }
  return u;
}

JacobianBlocks LinearBackend::jacobian(const FourierField&, int l_max) const {
  JacobianBlocks J(static_cast<size_t>(n_), std::vector<Mat2>(static_cast<size_t>(l_max)));
  for (int k = 1; k <= n_; ++k)
    for (int l = 1; l <= l_max; ++l)
      if (k == l) {
        const double s = 1.0 / std::sqrt(static_cast<double>(k));
        J[k - 1][l - 1] = {s, 0, 0, s};
      }
  return J;
}

HessianPairDirs LinearBackend::hessian_pair_dirs(const FourierField&, int) const {
  HessianPairDirs h;
  h.cos_dir.assign(2 * static_cast<size_t>(n_), 0.0);
  h.sin_dir.assign(2 * static_cast<size_t>(n_), 0.0);
  return h;
}

std::vector<double> LinearBackend::frequencies() const {
  std::vector<double> w(static_cast<size_t>(n_));
  for (int j = 1; j <= n_; ++j) w[j - 1] = static_cast<double>(j) * j * j;
  return w;
}

// ---------------------------------------------------------------------------
// synthetic backend

namespace {
inline size_t wrap(size_t i, size_t m) { return i % m; }
}  // namespace

std::vector<double> SyntheticBackend::quad_map(const std::vector<double>& z) const {
  const size_t m = z.size();
  std::vector<double> w(z);
  for (size_t i = 0; i < m; ++i) {
    const double q =
        z[wrap(i + 1, m)] * z[wrap(i + 2, m)] + 0.5 * z[wrap(i + 3, m)] * z[wrap(i + 3, m)];
    w[i] += eps_ * q;
  }
  return w;
}

std::vector<double> SyntheticBackend::quad_map_inverse(const std::vector<double>& w) const {
  const size_t m = w.size();
  double wmax = 0;
  for (double c : w) wmax = std::max(wmax, std::abs(c));
  // |dQ| <= 3 |z|_inf locally; demand a safe contraction factor.
  if (3.0 * std::abs(eps_) * (wmax + 1e-12) > 0.45)
    throw DomainError("synthetic inverse: input outside the contraction ball");
  std::vector<double> z(w), next(m);
  for (int it = 0; it < 200; ++it) {
    double delta = 0;
    for (size_t i = 0; i < m; ++i) {
      const double q =
          z[wrap(i + 1, m)] * z[wrap(i + 2, m)] + 0.5 * z[wrap(i + 3, m)] * z[wrap(i + 3, m)];
      next[i] = w[i] - eps_ * q;
    }
    for (size_t i = 0; i < m; ++i) delta = std::max(delta, std::abs(next[i] - z[i]));
    z.swap(next);
    if (delta < 1e-16) break;
  }
  return z;
}

BirkhoffVector SyntheticBackend::forward(const FourierField& u) const {
  const BirkhoffVector lin = LinearBackend(n_).forward(head_of(u, n_));
  return BirkhoffVector::from_flat(quad_map(lin.flat()));
}

FourierField SyntheticBackend::inverse(const BirkhoffVector& v) const {
  if (v.n_pairs() != n_) throw DomainError("synthetic inverse: pair count mismatch");
  const std::vector<double> z = quad_map_inverse(v.flat());
  return LinearBackend(n_).inverse(BirkhoffVector::from_flat(z));
}

JacobianBlocks SyntheticBackend::jacobian(const FourierField& u, int l_max) const {
  if (l_max > n_) throw DomainError("synthetic jacobian: l_max exceeds n_pairs");
  const std::vector<double> z = LinearBackend(n_).forward(head_of(u, n_)).flat();
  const size_t m = z.size();
  // dPsi(u) = (Id + eps dQ(z)) * D with D = diag(|s|^{-1/2}).
  JacobianBlocks J(static_cast<size_t>(n_), std::vector<Mat2>(static_cast<size_t>(l_max)));
  for (size_t i = 0; i < m; ++i) {
    for (size_t col = 0; col < m; ++col) {
      double d = (i == col) ? 1.0 : 0.0;
      if (col == wrap(i + 1, m)) d += eps_ * z[wrap(i + 2, m)];
      if (col == wrap(i + 2, m)) d += eps_ * z[wrap(i + 1, m)];
      if (col == wrap(i + 3, m)) d += eps_ * z[wrap(i + 3, m)];
      if (d == 0.0) continue;
      const int l = static_cast<int>(col / 2) + 1;
      if (l > l_max) continue;
      const double scale = 1.0 / std::sqrt(static_cast<double>(l));
      Mat2& blk = J[i / 2][static_cast<size_t>(l - 1)];
      double* entry = (i % 2 == 0) ? (col % 2 == 0 ? &blk.a00 : &blk.a01)
                                   : (col % 2 == 0 ? &blk.a10 : &blk.a11);
      *entry = d * scale;
    }
  }
  return J;
}

HessianPairDirs SyntheticBackend::hessian_pair_dirs(const FourierField&, int j) const {
  if (j < 1 || j > n_) throw DomainError("synthetic hessian: pair index out of range");
  const size_t m = 2 * static_cast<size_t>(n_);
  // d2 Psi(u)(xi, xi) = eps d2Q(D xi, D xi); D e_{+j} is the unit vector at
  // flat index 2(j-1) scaled by j^{-1/2}, D e_{-j} likewise at 2(j-1)+1.
  // d2Q_i(a, a) = 2 a_{s(i)} a_{r(i)} + a_{t(i)}^2.
  HessianPairDirs out;
  out.cos_dir.assign(m, 0.0);
  out.sin_dir.assign(m, 0.0);
  // The cross term 2 a_{s(i)} a_{r(i)} vanishes for single-component a since
  // s(i) != r(i); only the square term z_{t(i)}^2 / 2 contributes.
  const double inv_j = 1.0 / static_cast<double>(j);
  auto fill = [&](size_t unit, std::vector<double>& dst) {
    for (size_t i = 0; i < m; ++i)
      dst[i] = (wrap(i + 3, m) == unit) ? eps_ * inv_j : 0.0;
  };
  fill(2 * static_cast<size_t>(j - 1), out.cos_dir);
  fill(2 * static_cast<size_t>(j - 1) + 1, out.sin_dir);
  return out;
}

// ---------------------------------------------------------------------------
// numeric derivatives

JacobianBlocks numeric_jacobian(const BirkhoffBackend& backend, const FourierField& u,
                                int l_max, double h) {
  const int n = backend.n_pairs();
  JacobianBlocks J(static_cast<size_t>(n), std::vector<Mat2>(static_cast<size_t>(l_max)));
  for (int l = 1; l <= l_max; ++l) {
    for (int comp = 0; comp < 2; ++comp) {
      FourierField up = u, um = u;
      const int s = comp == 0 ? l : -l;
      up.set_coeff(s, u.coeff(s) + h);
      um.set_coeff(s, u.coeff(s) - h);
      const std::vector<double> fp = backend.forward(up).flat();
      const std::vector<double> fm = backend.forward(um).flat();
      for (int k = 1; k <= n; ++k) {
        Mat2& blk = J[k - 1][l - 1];
        const double dx = (fp[2 * (k - 1)] - fm[2 * (k - 1)]) / (2 * h);
        const double dy = (fp[2 * (k - 1) + 1] - fm[2 * (k - 1) + 1]) / (2 * h);
        if (comp == 0) {
          blk.a00 = dx;
          blk.a10 = dy;
        } else {
          blk.a01 = dx;
          blk.a11 = dy;
        }
      }
    }
  }
  return J;
}

HessianPairDirs numeric_hessian_pair_dirs(const BirkhoffBackend& backend, const FourierField& u,
                                          int j, double h) {
  const std::vector<double> f0 = backend.forward(u).flat();
  HessianPairDirs out;
  auto second = [&](int s) {
    FourierField up = u, um = u;
    up.set_coeff(s, u.coeff(s) + h);
    um.set_coeff(s, u.coeff(s) - h);
    const std::vector<double> fp = backend.forward(up).flat();
    const std::vector<double> fm = backend.forward(um).flat();
    std::vector<double> d(f0.size());
    for (size_t i = 0; i < f0.size(); ++i) d[i] = (fp[i] - 2 * f0[i] + fm[i]) / (h * h);
    return d;
  };
  out.cos_dir = second(j);
  out.sin_dir = second(-j);
  return out;
}

}  // namespace kdvlab
