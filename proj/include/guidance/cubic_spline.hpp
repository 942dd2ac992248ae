#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <vector>

namespace guidance {

/// Piecewise cubic y(t) = a u^3 + b u^2 + c u + d with u = t - t_i on
/// [t_i, t_{i+1}]. Outside the knot range the first/last piece is evaluated.
template <typename Scalar>
class CubicSpline {
 public:
  using Coefficients = Eigen::Matrix<Scalar, 4, 1>;  // (a, b, c, d)

  struct Sample {
    Scalar value;
    Scalar first;
    Scalar second;
  };

  CubicSpline() = default;
  CubicSpline(std::vector<Scalar> knots, std::vector<Coefficients> pieces)
      : knots_(std::move(knots)), pieces_(std::move(pieces)) {
    if (knots_.size() < 2 || pieces_.size() + 1 != knots_.size()) {
      throw std::invalid_argument("CubicSpline: need n knots and n - 1 pieces");
    }
  }

  /// C2 interpolant with a prescribed slope at the first knot and zero
  /// curvature at the last knot.
  static CubicSpline clamped_start(const std::vector<Scalar>& knots, const std::vector<Scalar>& values,
                                   Scalar start_slope) {
    return fit(knots, values, true, start_slope);
  }

  /// C2 interpolant with zero curvature at both ends.
  static CubicSpline natural(const std::vector<Scalar>& knots, const std::vector<Scalar>& values) {
    return fit(knots, values, false, Scalar(0));
  }

  Sample evaluate(Scalar t) const {
    const std::size_t i = piece_index(t);
    const Coefficients& p = pieces_[i];
    const Scalar u = t - knots_[i];
    return {((p[0] * u + p[1]) * u + p[2]) * u + p[3], (Scalar(3) * p[0] * u + Scalar(2) * p[1]) * u + p[2],
            Scalar(6) * p[0] * u + Scalar(2) * p[1]};
  }

  Scalar operator()(Scalar t) const { return evaluate(t).value; }

  const std::vector<Scalar>& knots() const { return knots_; }
  const std::vector<Coefficients>& pieces() const { return pieces_; }
  Scalar front() const { return knots_.front(); }
  Scalar back() const { return knots_.back(); }

 private:
  std::size_t piece_index(Scalar t) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::ptrdiff_t i = (it - knots_.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(pieces_.size()) - 1));
  }

  // Solves the tridiagonal system for the knot curvatures m_i (Thomas
  // algorithm) and converts them to per-piece coefficients.
  static CubicSpline fit(const std::vector<Scalar>& t, const std::vector<Scalar>& y, bool clamp_start,
                         Scalar start_slope) {
    const std::size_t n = t.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("CubicSpline: need >= 2 matching samples");
    std::vector<Scalar> h(n - 1), slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = t[i + 1] - t[i];
      if (!(h[i] > Scalar(0))) throw std::invalid_argument("CubicSpline: knots must be increasing");
      slope[i] = (y[i + 1] - y[i]) / h[i];
    }

    // Rows 0..n-1; last row is m_{n-1} = 0, first row is either the clamped
    // condition or m_0 = 0.
    std::vector<Scalar> lower(n, Scalar(0)), diag(n, Scalar(1)), upper(n, Scalar(0)), rhs(n, Scalar(0));
    if (clamp_start) {
      diag[0] = Scalar(2) * h[0];
      upper[0] = h[0];
      rhs[0] = Scalar(6) * (slope[0] - start_slope);
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      lower[i] = h[i - 1];
      diag[i] = Scalar(2) * (h[i - 1] + h[i]);
      upper[i] = h[i];
      rhs[i] = Scalar(6) * (slope[i] - slope[i - 1]);
    }
    for (std::size_t i = 1; i < n; ++i) {
      const Scalar w = lower[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    std::vector<Scalar> m(n);
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];

    std::vector<Coefficients> pieces(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      pieces[i] << (m[i + 1] - m[i]) / (Scalar(6) * h[i]), m[i] / Scalar(2),
          slope[i] - h[i] * (Scalar(2) * m[i] + m[i + 1]) / Scalar(6), y[i];
    }
    return CubicSpline(t, std::move(pieces));
  }

  std::vector<Scalar> knots_;
  std::vector<Coefficients> pieces_;
};

}  // namespace guidance
