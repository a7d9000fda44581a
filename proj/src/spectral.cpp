#include "msgwnn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msgwnn {

namespace {
constexpr double kPi = 3.14159265358979323846;
// log(DBL_MAX) ~ 709.78; past this exp() overflows.
constexpr double kMaxExpArg = 700.0;
}  // namespace

SpectralDecomposition eigendecompose(const LaplacianMatrix& l) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(l.matrix);
  if (solver.info() != Eigen::Success) {
    // Residual of whatever the solver produced, for the error report.
    const Matrix recon = solver.eigenvectors() *
                         solver.eigenvalues().asDiagonal() *
                         solver.eigenvectors().transpose();
    const double res = (recon - l.matrix).cwiseAbs().maxCoeff();
    throw ConvergenceFailure("eigendecomposition did not converge", res);
  }
  // Eigen returns eigenvalues in ascending order already.
  return SpectralDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

Vector fourier_conv(const SpectralDecomposition& sd, const Vector& theta,
                    const Vector& x) {
  const int n = sd.size();
  if (theta.size() != n || x.size() != n)
    throw DimensionMismatch("fourier_conv: theta/x must have length " +
                            std::to_string(n));
  return sd.eigenvectors *
         (theta.asDiagonal() * (sd.eigenvectors.transpose() * x));
}

WaveletOperatorPair wavelet_basis_exact(const SpectralDecomposition& sd, double s) {
  if (s < 0.0) throw ArgumentError("wavelet scale must be >= 0");
  const double lambda_max = sd.eigenvalues(sd.size() - 1);
  if (s * lambda_max > kMaxExpArg)
    throw ScaleOverflow("exp(s*lambda_max) overflows at s=" + std::to_string(s));
  const Vector decay = (-s * sd.eigenvalues.array()).exp();
  const Vector growth = (s * sd.eigenvalues.array()).exp();
  const Matrix& u = sd.eigenvectors;
  WaveletOperatorPair pair;
  pair.scale = s;
  pair.forward = u * decay.asDiagonal() * u.transpose();
  pair.inverse = u * growth.asDiagonal() * u.transpose();
  return pair;
}

Vector wavelet_transform(const WaveletOperatorPair& pair, const Vector& x) {
  if (x.size() != pair.inverse.rows())
    throw DimensionMismatch("wavelet_transform: signal length mismatch");
  return pair.inverse * x;
}

Matrix wavelet_conv(const WaveletOperatorPair& pair, const Vector& f_diag,
                    const Matrix& x) {
  if (f_diag.size() != pair.forward.rows() || x.rows() != pair.forward.rows())
    throw DimensionMismatch("wavelet_conv: dimension mismatch");
  return pair.forward * (f_diag.asDiagonal() * (pair.inverse * x));
}

std::pair<double, double> scale_range_heuristic(const SpectralDecomposition& sd,
                                                double eta, double gamma) {
  if (sd.size() < 2)
    throw DegenerateSpectrum("scale heuristic needs at least two eigenvalues");
  const double lambda2 = sd.eigenvalues(1);
  const double lambda_n = sd.eigenvalues(sd.size() - 1);
  if (lambda2 <= 1e-9)
    throw DegenerateSpectrum("second-smallest eigenvalue below 1e-9; graph disconnected");
  const double denom = std::sqrt(lambda2 * lambda_n);
  return {-std::log(gamma) / denom, -std::log(eta) / denom};
}

std::vector<int> receptive_field(const WaveletOperatorPair& pair, int center,
                                 double threshold) {
  const int n = static_cast<int>(pair.forward.rows());
  if (center < 0 || center >= n)
    throw ArgumentError("receptive_field: center out of range");
  std::vector<int> nodes;
  for (int j = 0; j < n; ++j) {
    if (std::abs(pair.forward(j, center)) > threshold) nodes.push_back(j);
  }
  return nodes;
}

double ChebyshevFilter::evaluate(double lambda) const {
  const double t = 2.0 * lambda / spectrum_bound - 1.0;
  // Clenshaw would be marginally cheaper; direct recurrence reads clearer.
  double tjm1 = 1.0;
  double tj = t;
  double acc = 0.5 * coefficients[0];
  for (int j = 1; j <= order; ++j) {
    acc += coefficients[j] * tj;
    const double tnext = 2.0 * t * tj - tjm1;
    tjm1 = tj;
    tj = tnext;
  }
  return acc;
}

ChebyshevFilter chebyshev_fit(double s, FilterSign sign, int k, double lambda_max) {
  if (k < 1) throw ArgumentError("chebyshev order must be >= 1");
  if (lambda_max <= 0.0) throw ArgumentError("lambda_max must be positive");
  const double sgn = (sign == FilterSign::forward) ? -1.0 : 1.0;
  const int quad_points = std::max(64, 4 * (k + 1));
  ChebyshevFilter f;
  f.order = k;
  f.spectrum_bound = lambda_max;
  f.sign = sign;
  f.scale = s;
  f.coefficients.assign(k + 1, 0.0);
  for (int j = 0; j <= k; ++j) {
    double acc = 0.0;
    for (int m = 0; m < quad_points; ++m) {
      const double angle = kPi * (m + 0.5) / quad_points;
      const double t = std::cos(angle);
      const double lambda = 0.5 * lambda_max * (t + 1.0);
      acc += std::exp(sgn * s * lambda) * std::cos(j * angle);
    }
    f.coefficients[j] = 2.0 * acc / quad_points;
  }
  return f;
}

Matrix chebyshev_apply(const ChebyshevFilter& filter, const SparseLaplacian& l,
                       const Matrix& x, std::int64_t* matvec_counter) {
  if (x.rows() != l.n)
    throw DimensionMismatch("chebyshev_apply: signal rows must equal n");
  // Cheap lower-bound check: for symmetric L, lambda_max >= max_i L_ii.
  double diag_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < l.n; ++i) {
    for (int p = l.row_ptr[i]; p < l.row_ptr[i + 1]; ++p) {
      if (l.col[p] == i) diag_max = std::max(diag_max, l.val[p]);
    }
  }
  if (l.n > 0 && diag_max > filter.spectrum_bound)
    throw SpectrumBoundViolation(
        "filter spectrum bound " + std::to_string(filter.spectrum_bound) +
        " below Laplacian diagonal maximum " + std::to_string(diag_max));

  const double a = 2.0 / filter.spectrum_bound;
  // Lt x = a*L*x - x
  auto apply_lt = [&](const Matrix& v) {
    return (a * l.multiply(v, matvec_counter) - v).eval();
  };

  Matrix tjm1 = x;                 // T_0 x
  Matrix tj = apply_lt(x);         // T_1 x
  Matrix acc = 0.5 * filter.coefficients[0] * tjm1;
  if (filter.order >= 1) acc += filter.coefficients[1] * tj;
  for (int j = 2; j <= filter.order; ++j) {
    Matrix tnext = 2.0 * apply_lt(tj) - tjm1;
    acc += filter.coefficients[j] * tnext;
    tjm1 = std::move(tj);
    tj = std::move(tnext);
  }
  return acc;
}

WaveletOperator WaveletOperator::exact(const SpectralDecomposition& sd, double s) {
  WaveletOperator op;
  op.scale_ = s;
  op.n_ = sd.size();
  op.is_exact_ = true;
  op.pair_ = wavelet_basis_exact(sd, s);
  return op;
}

WaveletOperator WaveletOperator::chebyshev(SparseLaplacian l, double s, int k,
                                           double lambda_max) {
  WaveletOperator op;
  op.scale_ = s;
  op.n_ = l.n;
  op.is_exact_ = false;
  op.filter_forward_ = chebyshev_fit(s, FilterSign::forward, k, lambda_max);
  op.filter_inverse_ = chebyshev_fit(s, FilterSign::inverse, k, lambda_max);
  op.laplacian_ = std::move(l);
  return op;
}

Matrix WaveletOperator::apply_forward(const Matrix& x) const {
  if (is_exact_) return pair_.forward * x;
  return chebyshev_apply(filter_forward_, laplacian_, x);
}

Matrix WaveletOperator::apply_inverse(const Matrix& x) const {
  if (is_exact_) return pair_.inverse * x;
  return chebyshev_apply(filter_inverse_, laplacian_, x);
}

}  // namespace msgwnn
