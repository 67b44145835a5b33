#include "kdvlab/averaging.hpp"

#include <cmath>

#include "kdvlab/errors.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TorusQuadrature TorusQuadrature::tensor(int N, int m) {
  if (N < 1 || m < 1) throw ConfigError("tensor quadrature: N and m must be >= 1");
  TorusQuadrature q;
  q.N = N;
  q.kind = "tensor";
  q.tensor_m = m;
  const int total = static_cast<int>(std::llround(std::pow(static_cast<double>(m), N)));
  q.nodes.reserve(static_cast<size_t>(total));
  q.weights.assign(static_cast<size_t>(total), 1.0 / total);
  AngleVector theta(static_cast<size_t>(N), 0.0);
  std::vector<int> idx(static_cast<size_t>(N), 0);
  for (int t = 0; t < total; ++t) {
    for (int d = 0; d < N; ++d) theta[static_cast<size_t>(d)] = kTwoPi * idx[static_cast<size_t>(d)] / m;
    q.nodes.push_back(theta);
    for (int d = N - 1; d >= 0; --d) {  // first angle slowest
      if (++idx[static_cast<size_t>(d)] < m) break;
      idx[static_cast<size_t>(d)] = 0;
    }
  }
  return q;
}

TorusQuadrature TorusQuadrature::lattice(int N, int count, std::uint64_t seed) {
  if (N < 1 || count < 1) throw ConfigError("lattice quadrature: N and count must be >= 1");
  TorusQuadrature q;
  q.N = N;
  q.kind = "lattice";
  q.weights.assign(static_cast<size_t>(count), 1.0 / count);
  // Korobov generating vector z = (1, a, a^2, ...) mod count, plus a random
  // shift so the rule is unbiased for any integrand.
  constexpr std::uint64_t a = 1487;
  std::vector<std::uint64_t> z(static_cast<size_t>(N));
  z[0] = 1;
  for (int d = 1; d < N; ++d) z[static_cast<size_t>(d)] = (z[static_cast<size_t>(d - 1)] * a) % static_cast<std::uint64_t>(count);
  AngleVector shift(static_cast<size_t>(N));
  for (int d = 0; d < N; ++d)
    shift[static_cast<size_t>(d)] =
        uniform01(seed, stream_id(StreamPurpose::quadrature, 0, static_cast<std::uint64_t>(d)), 0);
  q.nodes.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    AngleVector theta(static_cast<size_t>(N));
    for (int d = 0; d < N; ++d) {
      double frac = std::fmod(static_cast<double>(i) * z[static_cast<size_t>(d)] / count +
                                  shift[static_cast<size_t>(d)],
                              1.0);
      theta[static_cast<size_t>(d)] = kTwoPi * frac;
    }
    q.nodes.push_back(std::move(theta));
  }
  return q;
}

TorusQuadrature TorusQuadrature::monte_carlo(int N, int count, std::uint64_t seed) {
  if (N < 1 || count < 1) throw ConfigError("mc quadrature: N and count must be >= 1");
  TorusQuadrature q;
  q.N = N;
  q.kind = "mc";
  q.weights.assign(static_cast<size_t>(count), 1.0 / count);
  q.nodes.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    AngleVector theta(static_cast<size_t>(N));
    for (int d = 0; d < N; ++d)
      theta[static_cast<size_t>(d)] =
          kTwoPi * uniform01(seed, stream_id(StreamPurpose::quadrature, 1, static_cast<std::uint64_t>(d)),
                             static_cast<std::uint64_t>(i));
    q.nodes.push_back(std::move(theta));
  }
  return q;
}

TorusQuadrature TorusQuadrature::auto_default(int N, std::uint64_t seed) {
  return N <= 3 ? tensor(N, 16) : lattice(N, 1 << 13, seed);
}

double TorusQuadrature::trig_residual(const std::vector<int>& k) const {
  if (static_cast<int>(k.size()) != N) throw DomainError("trig_residual: frequency dimension");
  double re = 0, im = 0;
  for (int q = 0; q < size(); ++q) {
    double phase = 0;
    for (int d = 0; d < N; ++d) phase += k[static_cast<size_t>(d)] * nodes[static_cast<size_t>(q)][static_cast<size_t>(d)];
    re += weights[static_cast<size_t>(q)] * std::cos(phase);
    im += weights[static_cast<size_t>(q)] * std::sin(phase);
  }
  return std::hypot(re, im);
}

// ---------------------------------------------------------------------------

PerturbationFields build_perturbation_fields(std::shared_ptr<const BirkhoffBackend> backend,
                                             const NoiseSpec& noise,
                                             bool force_numeric_derivatives) {
  if (!backend) throw ConfigError("build_perturbation_fields: null backend");
  const int N = backend->n_pairs();
  if (!backend->has_inverse())
    throw CapabilityError(std::string(backend->name()) +
                          " backend has no inverse(); cannot build perturbation fields");
  if (noise.modes() < N)
    throw ConfigError("build_perturbation_fields: noise spec shorter than n_pairs");

  const bool use_jac = backend->has_jacobian() && !force_numeric_derivatives;
  const bool use_hess = backend->has_hessian() && !force_numeric_derivatives;

  auto jac_at = [backend, use_jac, N](const FourierField& u) {
    return use_jac ? backend->jacobian(u, N) : numeric_jacobian(*backend, u, N);
  };

  PerturbationFields f;
  f.N = N;
  f.L = N;

  auto eval_p1 = [backend, jac_at, N](const BirkhoffVector& v) {
    const FourierField u = backend->inverse(v);
    const JacobianBlocks J = jac_at(u);
    std::vector<double> out(2 * static_cast<size_t>(N), 0.0);
    for (int k = 1; k <= N; ++k) {
      double x = 0, y = 0;
      for (int l = 1; l <= N; ++l) {
        const Mat2& b = J[static_cast<size_t>(k - 1)][static_cast<size_t>(l - 1)];
        const double ux = -static_cast<double>(l) * l * u.plus(l);   // (u_xx)_{+l}
        const double uy = -static_cast<double>(l) * l * u.minus(l);  // (u_xx)_{-l}
        x += b.a00 * ux + b.a01 * uy;
        y += b.a10 * ux + b.a11 * uy;
      }
      out[2 * static_cast<size_t>(k - 1)] = x;
      out[2 * static_cast<size_t>(k - 1) + 1] = y;
    }
    return out;
  };

  auto eval_p2 = [backend, use_hess, noise, N](const BirkhoffVector& v) {
    const FourierField u = backend->inverse(v);
    std::vector<double> out(2 * static_cast<size_t>(N), 0.0);
    for (int j = 1; j <= N; ++j) {
      const HessianPairDirs h = use_hess ? backend->hessian_pair_dirs(u, j)
                                         : numeric_hessian_pair_dirs(*backend, u, j);
      const double w = 0.5 * noise(j) * noise(j);
      for (size_t i = 0; i < out.size(); ++i) out[i] += w * (h.cos_dir[i] + h.sin_dir[i]);
    }
    return out;
  };

  f.p1.eval = eval_p1;
  f.p2.eval = eval_p2;
  f.p_total.eval = [eval_p1, eval_p2](const BirkhoffVector& v) {
    std::vector<double> a = eval_p1(v);
    const std::vector<double> b = eval_p2(v);
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
  };

  f.b.L = N;
  f.b.eval = [backend, jac_at, noise, N](const BirkhoffVector& v) {
    const FourierField u = backend->inverse(v);
    JacobianBlocks J = jac_at(u);
    for (int k = 1; k <= N; ++k)
      for (int l = 1; l <= N; ++l)
        J[static_cast<size_t>(k - 1)][static_cast<size_t>(l - 1)] =
            noise(l) * J[static_cast<size_t>(k - 1)][static_cast<size_t>(l - 1)];
    return J;
  };
  return f;
}

// ---------------------------------------------------------------------------

double torus_average(const std::function<double(const BirkhoffVector&)>& f,
                     const BirkhoffVector& v, const TorusQuadrature& quad) {
  if (quad.N != v.n_pairs()) throw DomainError("torus_average: dimension mismatch");
  std::vector<double> terms(static_cast<size_t>(quad.size()));
  for (int q = 0; q < quad.size(); ++q)
    terms[static_cast<size_t>(q)] =
        quad.weights[static_cast<size_t>(q)] * f(rotate(v, quad.nodes[static_cast<size_t>(q)]));
  return pairwise_sum(std::move(terms));
}

std::vector<double> torus_average_vec(
    const std::function<std::vector<double>(const BirkhoffVector&)>& f, const BirkhoffVector& v,
    const TorusQuadrature& quad) {
  if (quad.N != v.n_pairs()) throw DomainError("torus_average_vec: dimension mismatch");
  const int Q = quad.size();
  std::vector<double> buf;
  size_t dim = 0;
  for (int q = 0; q < Q; ++q) {
    std::vector<double> val = f(rotate(v, quad.nodes[static_cast<size_t>(q)]));
    if (q == 0) {
      dim = val.size();
      buf.assign(static_cast<size_t>(Q) * dim, 0.0);
    }
    for (size_t i = 0; i < dim; ++i)
      buf[static_cast<size_t>(q) * dim + i] = quad.weights[static_cast<size_t>(q)] * val[i];
  }
  return pairwise_sum_rows(std::move(buf), static_cast<size_t>(Q), dim);
}

std::vector<double> effective_drift(const DriftField& P, const BirkhoffVector& v,
                                    const TorusQuadrature& quad) {
  if (quad.N != v.n_pairs()) throw DomainError("effective_drift: dimension mismatch");
  const int N = v.n_pairs();
  const int Q = quad.size();
  const size_t dim = 2 * static_cast<size_t>(N);
  std::vector<double> buf(static_cast<size_t>(Q) * dim, 0.0);
  for (int q = 0; q < Q; ++q) {
    const AngleVector& th = quad.nodes[static_cast<size_t>(q)];
    const std::vector<double> p = P.eval(rotate(v, th));
    if (p.size() != dim) throw DomainError("effective_drift: field dimension mismatch");
    const double w = quad.weights[static_cast<size_t>(q)];
    for (int k = 0; k < N; ++k) {  // rotate back by -theta_k
      const double c = std::cos(th[static_cast<size_t>(k)]), s = std::sin(th[static_cast<size_t>(k)]);
      const double x = p[2 * static_cast<size_t>(k)], y = p[2 * static_cast<size_t>(k) + 1];
      buf[static_cast<size_t>(q) * dim + 2 * static_cast<size_t>(k)] = w * (c * x + s * y);
      buf[static_cast<size_t>(q) * dim + 2 * static_cast<size_t>(k) + 1] = w * (-s * x + c * y);
    }
  }
  return pairwise_sum_rows(std::move(buf), static_cast<size_t>(Q), dim);
}

namespace {

// Row-rotated dispersion blocks C_{kl} = Rot(-theta_k) B_{kl}(Phi_theta v).
std::vector<std::vector<Mat2>> rotated_blocks(const DispersionField& B, const BirkhoffVector& v,
                                              const AngleVector& theta) {
  std::vector<std::vector<Mat2>> blocks = B.eval(rotate(v, theta));
  for (size_t k = 0; k < blocks.size(); ++k) {
    const Mat2 rk = Mat2::rotation(-theta[k]);
    for (auto& blk : blocks[k]) blk = rk * blk;
  }
  return blocks;
}

}  // namespace

AveragedDiffusion averaged_diffusion(const DispersionField& B, const BirkhoffVector& v,
                                     const TorusQuadrature& quad) {
  if (quad.N != v.n_pairs()) throw DomainError("averaged_diffusion: dimension mismatch");
  const int N = v.n_pairs();
  const int Q = quad.size();
  const size_t dim = 2 * static_cast<size_t>(N);
  std::vector<double> buf(static_cast<size_t>(Q) * dim * dim, 0.0);
  for (int q = 0; q < Q; ++q) {
    const auto C = rotated_blocks(B, v, quad.nodes[static_cast<size_t>(q)]);
    const double w = quad.weights[static_cast<size_t>(q)];
    double* out = &buf[static_cast<size_t>(q) * dim * dim];
    const int L = static_cast<int>(C[0].size());
    for (int k = 0; k < N; ++k)
      for (int m = 0; m < N; ++m) {
        Mat2 acc;
        for (int l = 0; l < L; ++l)
          acc = acc + C[static_cast<size_t>(k)][static_cast<size_t>(l)] *
                          C[static_cast<size_t>(m)][static_cast<size_t>(l)].transpose();
        out[(2 * k) * dim + 2 * m] = w * acc.a00;
        out[(2 * k) * dim + 2 * m + 1] = w * acc.a01;
        out[(2 * k + 1) * dim + 2 * m] = w * acc.a10;
        out[(2 * k + 1) * dim + 2 * m + 1] = w * acc.a11;
      }
  }
  const std::vector<double> flat = pairwise_sum_rows(std::move(buf), static_cast<size_t>(Q), dim * dim);
  AveragedDiffusion res;
  res.mat = DenseMat(static_cast<int>(dim), static_cast<int>(dim));
  res.mat.a = flat;
  res.asym_residual = res.mat.asymmetry();
  res.mat.symmetrize();
  return res;
}

DispersionKernel dispersion_kernel(const DispersionField& B, const BirkhoffVector& v) {
  return [B, v](int k, int l, const AngleVector& theta) -> Mat2 {
    if (k < 1 || k > v.n_pairs() || l < 1 || l > B.L)
      throw DomainError("dispersion_kernel: index out of range");
    const auto blocks = B.eval(rotate(v, theta));
    return Mat2::rotation(-theta[static_cast<size_t>(k - 1)]) *
           blocks[static_cast<size_t>(k - 1)][static_cast<size_t>(l - 1)];
  };
}

DenseMat dispersion_columns(const DispersionField& B, const BirkhoffVector& v,
                            const TorusQuadrature& quad) {
  if (quad.N != v.n_pairs()) throw DomainError("dispersion_columns: dimension mismatch");
  const int N = v.n_pairs();
  const int Q = quad.size();
  const int L = B.L;
  DenseMat cols(2 * N, 2 * L * Q);
  for (int q = 0; q < Q; ++q) {
    const auto C = rotated_blocks(B, v, quad.nodes[static_cast<size_t>(q)]);
    const double sw = std::sqrt(quad.weights[static_cast<size_t>(q)]);
    for (int l = 0; l < L; ++l) {
      const int col0 = (q * L + l) * 2;
      for (int k = 0; k < N; ++k) {
        const Mat2& blk = C[static_cast<size_t>(k)][static_cast<size_t>(l)];
        cols(2 * k, col0) = sw * blk.a00;
        cols(2 * k, col0 + 1) = sw * blk.a01;
        cols(2 * k + 1, col0) = sw * blk.a10;
        cols(2 * k + 1, col0 + 1) = sw * blk.a11;
      }
    }
  }
  return cols;
}

std::vector<double> averaged_action_drift(const PerturbationFields& fields, const ActionVector& I,
                                          const TorusQuadrature& quad,
                                          const AngleVector* theta0) {
  const int N = fields.N;
  if (static_cast<int>(I.size()) != N) throw DomainError("averaged_action_drift: dimension");
  AngleVector phi0(static_cast<size_t>(N), 0.0);
  if (theta0) phi0 = *theta0;
  const BirkhoffVector v0 = reconstruct(I, phi0);

  auto integrand = [&](const BirkhoffVector& w) {
    const std::vector<double> p = fields.p_total.eval(w);
    const auto blocks = fields.b.eval(w);
    std::vector<double> out(static_cast<size_t>(N));
    for (int k = 1; k <= N; ++k) {
      double val = w[k].x * p[2 * static_cast<size_t>(k - 1)] +
                   w[k].y * p[2 * static_cast<size_t>(k - 1) + 1];
      double hs = 0;
      for (int l = 1; l <= fields.L; ++l)
        hs += blocks[static_cast<size_t>(k - 1)][static_cast<size_t>(l - 1)].frobenius_sq();
      out[static_cast<size_t>(k - 1)] = val + 0.5 * hs;
    }
    return out;
  };
  return torus_average_vec(integrand, v0, quad);
}

}  // namespace kdvlab
