#pragma once

#include "kdvlab/birkhoff.hpp"

namespace kdvlab {

// Action extraction through the Hill operator L = -d^2/dx^2 + u on [0, 2pi].
// The periodic and antiperiodic spectra are merged into one ordered sequence
// lambda_0 <= lambda_1 <= ...; gap j is [lambda_{2j-1}, lambda_{2j}] and its
// length gamma_j feeds the small-amplitude-calibrated action formula
//
//   I_j = pi gamma_j^2 / (2 j).
//
// The calibration constant pi/2 is fixed by first-order perturbation theory:
// gap j opens by 2 |q_j| with q_j = (u_{+j} + i u_{-j}) / (2 sqrt(pi)) under
// this basis normalization, so I_j -> (u_{+j}^2 + u_{-j}^2) / (2j) as the
// amplitude goes to zero. The formula is approximate at finite amplitude;
// its operative guarantees are conservation under the KdV flow (the spectrum
// is invariant) and the small-amplitude asymptotic. Angles are not provided.
class HillBackend : public BirkhoffBackend {
 public:
  // modes_factor M: the eigenproblems are truncated at M * S Fourier modes
  // for a field with truncation S.
  explicit HillBackend(int n_gaps, int modes_factor = 4);

  const char* name() const override { return "hill"; }
  int n_pairs() const override { return n_gaps_; }
  bool has_angles() const override { return false; }
  ActionVector actions_of_field(const FourierField& u) const override;

  // Combined ordered periodic+antiperiodic spectrum (first `count` values).
  std::vector<double> combined_spectrum(const FourierField& u, int count) const;
  // Gap lengths gamma_j, j = 1..n_gaps.
  std::vector<double> gap_lengths(const FourierField& u) const;

 private:
  int n_gaps_;
  int modes_factor_;
};

}  // namespace kdvlab
