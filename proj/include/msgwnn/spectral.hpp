#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msgwnn/graph.hpp"

namespace msgwnn {

/// Eigendecomposition L = U diag(eigenvalues) U^T with eigenvalues ascending
/// and orthonormal columns in U.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralDecomposition eigendecompose(const LaplacianMatrix& l);

/// Spectral-domain convolution U diag(theta) U^T x. This is the slow exact
/// form; it serves as the oracle the wavelet path is checked against.
Vector fourier_conv(const SpectralDecomposition& sd, const Vector& theta,
                    const Vector& x);

/// Materialized wavelet operator pair at scale s:
///   forward = U diag(exp(-s*lambda)) U^T   (the wavelet basis, decaying)
///   inverse = U diag(exp(+s*lambda)) U^T
/// Both are symmetric and forward * inverse = I.
struct WaveletOperatorPair {
  double scale = 0.0;
  Matrix forward;
  Matrix inverse;
};

WaveletOperatorPair wavelet_basis_exact(const SpectralDecomposition& sd, double s);

/// Wavelet transform x_hat = inverse * x (the analysis direction); the
/// synthesis direction is forward * x_hat.
Vector wavelet_transform(const WaveletOperatorPair& pair, const Vector& x);

/// Per column: forward * diag(f_diag) * inverse * x.
Matrix wavelet_conv(const WaveletOperatorPair& pair, const Vector& f_diag,
                    const Matrix& x);

/// Scale-selection heuristic from the spectrum: bounds from the geometric
/// mean of the second-smallest and largest eigenvalues,
///   s_max = -log(eta)   / sqrt(lambda_2 * lambda_N)
///   s_min = -log(gamma) / sqrt(lambda_2 * lambda_N)
/// Returns (s_min, s_max). Throws DegenerateSpectrum when lambda_2 <= 1e-9
/// (disconnected or single-node graphs).
std::pair<double, double> scale_range_heuristic(const SpectralDecomposition& sd,
                                                double eta = 0.85,
                                                double gamma = 0.95);

/// Nodes j with |forward(j, center)| > threshold.
std::vector<int> receptive_field(const WaveletOperatorPair& pair, int center,
                                 double threshold);

enum class FilterSign {
  forward,  // exp(-s*lambda), decaying
  inverse,  // exp(+s*lambda), growing
};

/// Truncated Chebyshev expansion of exp(-+ s*lambda) on [0, spectrum_bound],
/// under the c0/2 + sum_{j>=1} c_j T_j convention.
struct ChebyshevFilter {
  int order = 0;
  std::vector<double> coefficients;  // size order + 1
  double spectrum_bound = 2.0;
  FilterSign sign = FilterSign::forward;
  double scale = 0.0;

  /// Series value at a spectral point (grid-oracle checks).
  double evaluate(double lambda) const;
};

/// Coefficients by cosine quadrature at max(64, 4*(k+1)) points.
ChebyshevFilter chebyshev_fit(double s, FilterSign sign, int k, double lambda_max);

/// filter applied to each column of x via the three-term recurrence
///   T_{j+1}(Lt) x = 2 Lt T_j(Lt) x - T_{j-1}(Lt) x,  Lt = (2/bound) L - I,
/// using exactly `order` sparse products per column (never materializing
/// T_j as a matrix). The optional counter observes the sparse product count.
Matrix chebyshev_apply(const ChebyshevFilter& filter, const SparseLaplacian& l,
                       const Matrix& x, std::int64_t* matvec_counter = nullptr);

/// Operator mode shared by networks and models.
struct OperatorMode {
  enum class Kind { exact, chebyshev };
  Kind kind = Kind::chebyshev;
  int k = 2;

  static OperatorMode exact() { return {Kind::exact, 0}; }
  static OperatorMode chebyshev(int k) { return {Kind::chebyshev, k}; }
};

/// Uniform handle over the two wavelet application paths. Both directions
/// are symmetric operators, so transpose application equals application;
/// the layer backward pass relies on that.
class WaveletOperator {
 public:
  static WaveletOperator exact(const SpectralDecomposition& sd, double s);
  static WaveletOperator chebyshev(SparseLaplacian l, double s, int k,
                                   double lambda_max = 2.0);

  Matrix apply_forward(const Matrix& x) const;  // Psi_s x
  Matrix apply_inverse(const Matrix& x) const;  // Psi_s^{-1} x

  double scale() const { return scale_; }
  int size() const { return n_; }

 private:
  WaveletOperator() = default;

  double scale_ = 0.0;
  int n_ = 0;
  bool is_exact_ = true;
  WaveletOperatorPair pair_;        // exact mode
  SparseLaplacian laplacian_;       // chebyshev mode
  ChebyshevFilter filter_forward_;  // chebyshev mode
  ChebyshevFilter filter_inverse_;  // chebyshev mode
};

}  // namespace msgwnn
