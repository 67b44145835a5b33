#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kdvlab/birkhoff.hpp"
#include "kdvlab/dynamics.hpp"
#include "kdvlab/linalg.hpp"

namespace kdvlab {

// Quadrature over the angle torus T^N. Weights sum to 1; node order is part
// of the contract (reductions are fixed-order pairwise tree sums, so results
// are reproducible under any scheduling of the node evaluations).
struct TorusQuadrature {
  int N = 0;
  std::vector<AngleVector> nodes;  // Q nodes, each an N-vector in [0, 2pi)
  std::vector<double> weights;     // Q weights, sum 1
  std::string kind;                // "tensor" | "lattice" | "mc"
  int tensor_m = 0;                // nodes per angle for the tensor rule

  int size() const { return static_cast<int>(nodes.size()); }

  // Tensor-product trapezoid rule, m uniform nodes per angle (q = m^N nodes,
  // row-major with the first angle slowest). Integrates trig polynomials of
  // per-angle degree < m exactly; node set is invariant under shifts by
  // multiples of 2pi/m in any coordinate.
  static TorusQuadrature tensor(int N, int m);
  // Randomly shifted rank-1 Korobov lattice with q points.
  static TorusQuadrature lattice(int N, int q, std::uint64_t seed);
  // Plain Monte-Carlo nodes, weights 1/q.
  static TorusQuadrature monte_carlo(int N, int q, std::uint64_t seed);
  // Documented default: tensor with 16 nodes per angle for N <= 3, randomly
  // shifted lattice with 2^13 points otherwise.
  static TorusQuadrature auto_default(int N, std::uint64_t seed);

  // | (1/Q) sum_q e^{i k . theta_q} | for a frequency vector k; diagnostic
  // used by the exactness tests.
  double trig_residual(const std::vector<int>& k) const;
};

// Drift-type map on the truncated pair space, v -> R^{2N} flattened.
struct DriftField {
  std::function<std::vector<double>(const BirkhoffVector&)> eval;
};

// Dispersion blocks B_{kl}(v), k = 1..N (output pair), l = 1..L (noise pair).
struct DispersionField {
  int L = 0;
  std::function<std::vector<std::vector<Mat2>>(const BirkhoffVector&)> eval;
};

// The perturbation part of the v-equations for a coordinate backend:
//   P1(v) = dPsi(u) u_xx  with u = Psi^{-1}(v),
//   P2_k(v) = 1/2 sum_j b_j^2 [ d2Psi_kj(u)((1,0),(1,0)) + d2Psi_kj(u)((0,1),(0,1)) ],
//   B_kj(u) = b_j (dPsi(u))_kj.
// Analytic Jacobians/Hessians are used when the backend advertises them,
// otherwise central differences with the documented steps.
struct PerturbationFields {
  int N = 0, L = 0;
  DriftField p1, p2;
  DriftField p_total;  // p1 + p2 in one evaluation
  DispersionField b;
};

PerturbationFields build_perturbation_fields(std::shared_ptr<const BirkhoffBackend> backend,
                                             const NoiseSpec& noise,
                                             bool force_numeric_derivatives = false);

// sum_q w_q f(Phi_{theta_q} v)
double torus_average(const std::function<double(const BirkhoffVector&)>& f,
                     const BirkhoffVector& v, const TorusQuadrature& quad);
std::vector<double> torus_average_vec(
    const std::function<std::vector<double>(const BirkhoffVector&)>& f, const BirkhoffVector& v,
    const TorusQuadrature& quad);

// <P>(v) = sum_q w_q Phi_{-theta_q} P(Phi_{theta_q} v)
std::vector<double> effective_drift(const DriftField& P, const BirkhoffVector& v,
                                    const TorusQuadrature& quad);

// <B B^t>(v) = sum_q w_q Phi_{-theta} (B B^t)(Phi_theta v) Phi_theta,
// accumulated as C C^t with C = Phi_{-theta} B(Phi_theta v) so positive
// semidefiniteness is structural. The result is defensively symmetrized; the
// pre-symmetrization residual is reported.
struct AveragedDiffusion {
  DenseMat mat;           // 2N x 2N
  double asym_residual;   // max |M - M^t| before symmetrization
};
AveragedDiffusion averaged_diffusion(const DispersionField& B, const BirkhoffVector& v,
                                     const TorusQuadrature& quad);

// Schwartz kernel of the effective dispersion operator:
//   R(k; l, theta)(v) = Rot(-theta_k) B_{kl}(Phi_theta v),
// as a callable over (k, l, theta).
using DispersionKernel = std::function<Mat2(int k, int l, const AngleVector& theta)>;
DispersionKernel dispersion_kernel(const DispersionField& B, const BirkhoffVector& v);

// Quadrature discretization of the kernel as noise columns: column block
// (q, l) holds sqrt(w_q) R(.; l, theta_q)(v), laid out 2N x (2 L Q) with
// column index ((q * L + (l-1)) * 2 + comp). Its Gram matrix reproduces
// averaged_diffusion with the same quadrature by construction.
DenseMat dispersion_columns(const DispersionField& B, const BirkhoffVector& v,
                            const TorusQuadrature& quad);

// Averaged action drift
//   F_k(I) = < v_k . P1_k + v_k . P2_k >(I) + 1/2 < sum_l ||B_kl||_HS^2 >(I),
// evaluated on the orbit of reconstruct(I, theta0); a function of I alone.
std::vector<double> averaged_action_drift(const PerturbationFields& fields, const ActionVector& I,
                                          const TorusQuadrature& quad,
                                          const AngleVector* theta0 = nullptr);

}  // namespace kdvlab
