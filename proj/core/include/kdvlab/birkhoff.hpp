#pragma once

#include <memory>
#include <vector>

#include "kdvlab/errors.hpp"
#include "kdvlab/field.hpp"
#include "kdvlab/linalg.hpp"

namespace kdvlab {

// One conjugate pair b_j = (v_j, v_{-j}). Component x pairs with the cosine
// mode, y with the sine mode; the angle is measured from the x axis so that
// phi_j = atan2(y, x) and the Airy flow advances phi_j at rate j^3.
struct Pair {
  double x = 0, y = 0;
  double norm_sq() const { return x * x + y * y; }
};

struct BirkhoffVector {
  std::vector<Pair> p;  // pairs j = 1..N

  BirkhoffVector() = default;
  explicit BirkhoffVector(int n) : p(static_cast<size_t>(n)) {}
  int n_pairs() const { return static_cast<int>(p.size()); }
  Pair& operator[](int j) { return p[static_cast<size_t>(j - 1)]; }  // 1-based
  const Pair& operator[](int j) const { return p[static_cast<size_t>(j - 1)]; }

  // flattened view (x1, y1, x2, y2, ...)
  std::vector<double> flat() const;
  static BirkhoffVector from_flat(const std::vector<double>& z);
};

using ActionVector = std::vector<double>;  // I_j, j = 1..N
using AngleVector = std::vector<double>;   // phi_j in [0, 2pi)

// I_j = |b_j|^2 / 2
ActionVector actions(const BirkhoffVector& v);

// phi_j = Arg b_j in [0, 2pi); phi_j = 0 when b_j = 0.
AngleVector angles(const BirkhoffVector& v);

// Phi_theta: rotate pair j by theta_j (vector) or by a common angle (scalar).
BirkhoffVector rotate(const BirkhoffVector& v, const AngleVector& theta);
BirkhoffVector rotate(const BirkhoffVector& v, double theta);

// V_phi(I): b_j = (sqrt(2 I_j) cos phi_j, sqrt(2 I_j) sin phi_j).
// Right inverse of actions(): actions(reconstruct(I, phi)) == I.
BirkhoffVector reconstruct(const ActionVector& I, const AngleVector& phi);

// | v |_r = ( sum_j j^{1+2r} |b_j|^2 )^{1/2}
double weighted_norm(const BirkhoffVector& v, double r);

// | I |_p = 2 sum_j j^{1+2p} |I_j|
double action_norm(const ActionVector& I, double p);

// Jacobian blocks J[k-1][l-1] = 2x2 block d(pair_k out)/d(pair_l in).
using JacobianBlocks = std::vector<std::vector<Mat2>>;

// d2 Psi(u)(e_j, e_j) and d2 Psi(u)(e_{-j}, e_{-j}) as pair-space vectors.
struct HessianPairDirs {
  std::vector<double> cos_dir;  // flattened R^{2N}
  std::vector<double> sin_dir;
};

// Coordinate change between field space and the truncated pair space.
// Backends advertise capabilities; calling an absent one throws
// CapabilityError. Backends act on the first n_pairs() pairs of a field and
// all satisfy forward(0) = 0 where forward exists.
class BirkhoffBackend {
 public:
  virtual ~BirkhoffBackend() = default;
  virtual const char* name() const = 0;
  virtual int n_pairs() const = 0;

  virtual bool has_forward() const { return false; }
  virtual bool has_inverse() const { return false; }
  virtual bool has_jacobian() const { return false; }
  virtual bool has_hessian() const { return false; }
  virtual bool has_frequencies() const { return false; }
  virtual bool has_angles() const { return has_forward(); }

  virtual BirkhoffVector forward(const FourierField& u) const;
  virtual FourierField inverse(const BirkhoffVector& v) const;
  virtual JacobianBlocks jacobian(const FourierField& u, int l_max) const;
  virtual HessianPairDirs hessian_pair_dirs(const FourierField& u, int j) const;
  virtual std::vector<double> frequencies() const;  // W_j, j = 1..n_pairs

  // Every backend can read actions off a field.
  virtual ActionVector actions_of_field(const FourierField& u) const;
};

// v_s = |s|^{-1/2} u_s, the linearization of the nonlinear Fourier transform
// at u = 0. Frequencies W_j = j^3 (rotation rate of pair j under the Airy
// flow u_t = -u_xxx).
class LinearBackend : public BirkhoffBackend {
 public:
  explicit LinearBackend(int n) : n_(n) {}
  const char* name() const override { return "linear"; }
  int n_pairs() const override { return n_; }
  bool has_forward() const override { return true; }
  bool has_inverse() const override { return true; }
  bool has_jacobian() const override { return true; }
  bool has_hessian() const override { return true; }
  bool has_frequencies() const override { return true; }
  BirkhoffVector forward(const FourierField& u) const override;
  FourierField inverse(const BirkhoffVector& v) const override;
  JacobianBlocks jacobian(const FourierField& u, int l_max) const override;
  HessianPairDirs hessian_pair_dirs(const FourierField& u, int j) const override;
  std::vector<double> frequencies() const override;

 private:
  int n_;
};

// Analytic test diffeomorphism: the linear map composed with the
// near-identity quadratic map  z -> z + eps Q(z)  on flattened pair space,
//   Q_i(z) = z_{s(i)} z_{r(i)} + z_{t(i)}^2 / 2,
//   s(i) = i+1, r(i) = i+2, t(i) = i+3  (mod 2N).
// Exact Jacobian and Hessian; inverse by fixed-point iteration inside the
// contraction ball (DomainError outside it). Deliberately not equivariant
// under pair rotations.
class SyntheticBackend : public BirkhoffBackend {
 public:
  SyntheticBackend(int n, double eps) : n_(n), eps_(eps) {
    if (n < 2) throw DomainError("SyntheticBackend: need at least 2 pairs");
  }
  const char* name() const override { return "synthetic"; }
  int n_pairs() const override { return n_; }
  bool has_forward() const override { return true; }
  bool has_inverse() const override { return true; }
  bool has_jacobian() const override { return true; }
  bool has_hessian() const override { return true; }
  BirkhoffVector forward(const FourierField& u) const override;
  FourierField inverse(const BirkhoffVector& v) const override;
  JacobianBlocks jacobian(const FourierField& u, int l_max) const override;
  HessianPairDirs hessian_pair_dirs(const FourierField& u, int j) const override;

  double eps_map() const { return eps_; }
  // The quadratic layer and its exact inverse on flattened pair space.
  std::vector<double> quad_map(const std::vector<double>& z) const;
  std::vector<double> quad_map_inverse(const std::vector<double>& w) const;

 private:
  int n_;
  double eps_;
};

// Central finite differences against backend.forward. Steps follow the
// documented defaults (1e-5 for first, 1e-3 for second derivatives).
JacobianBlocks numeric_jacobian(const BirkhoffBackend& backend, const FourierField& u,
                                int l_max, double h = 1e-5);
HessianPairDirs numeric_hessian_pair_dirs(const BirkhoffBackend& backend, const FourierField& u,
                                          int j, double h = 1e-3);

}  // namespace kdvlab
