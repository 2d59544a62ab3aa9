#pragma once

#include "deepoly/geometry.hpp"
#include "deepoly/spotter/jet.hpp"

namespace deepoly {

/// Tensor-product monomials on normalized segment coordinates, degrees d_i per axis.
struct PolySpec {
  std::vector<int> degrees;

  Index dim() const { return static_cast<Index>(degrees.size()); }
  Index size() const {
    Index m = 1;
    for (int d : degrees) m *= d + 1;
    return m;
  }
  void validate() const {
    if (degrees.empty()) throw InvalidArgument("poly spec: at least one axis required");
    for (int d : degrees) {
      if (d < 0) throw InvalidArgument("poly spec: degrees must be non-negative");
    }
  }
  /// Exponent tuple of the m-th basis function; lexicographic, first axis most significant.
  std::vector<int> exponents(Index m) const {
    std::vector<int> e(degrees.size());
    for (std::size_t i = degrees.size(); i-- > 0;) {
      const int radix = degrees[i] + 1;
      e[i] = static_cast<int>(m % radix);
      m /= radix;
    }
    return e;
  }
};

namespace detail {

/// table(p, j) = d^k/dt^k t^j at t = local(p), for j = 0..degree.
template <typename Scalar, typename Derived>
Matrix<Scalar> monomial_derivatives(const Eigen::MatrixBase<Derived>& local, int degree, int k) {
  const Index P = local.size();
  Matrix<Scalar> table = Matrix<Scalar>::Zero(P, degree + 1);
  for (int j = k; j <= degree; ++j) {
    Scalar falling = 1;
    for (int q = 0; q < k; ++q) falling *= Scalar(j - q);
    for (Index p = 0; p < P; ++p) table(p, j) = falling * std::pow(local[p], j - k);
  }
  return table;
}

}  // namespace detail

/// Rows (one per point) of the polynomial block at normalized coordinates `local` (dim x P),
/// differentiated by `deriv` with respect to global coordinates: each axis contributes a
/// chain-rule factor (1 / length_i)^{k_i}.
template <typename Scalar, typename DerivedX, typename DerivedL>
Matrix<Scalar> poly_rows(const PolySpec& spec, const Eigen::MatrixBase<DerivedX>& local,
                         const Eigen::MatrixBase<DerivedL>& lengths, const MultiIndex& deriv) {
  const Index dim = spec.dim();
  if (local.rows() != dim || lengths.size() != dim || static_cast<Index>(deriv.size()) != dim) {
    throw InvalidArgument("poly_row: dimension mismatch");
  }
  if (total_order(deriv) > 3 || std::any_of(deriv.begin(), deriv.end(), [](int k) { return k < 0; })) {
    throw InvalidArgument("poly_row: derivative order beyond support");
  }
  const Index P = local.cols();
  for (Index p = 0; p < P; ++p)
    for (Index i = 0; i < dim; ++i) {
      const Scalar t = local(i, p);
      if (!(t >= -kContainmentTol<Scalar> && t <= Scalar(1) + kContainmentTol<Scalar>)) {
        throw OutOfSegment("poly_row: normalized coordinate outside [0, 1]");
      }
    }

  std::vector<Matrix<Scalar>> tables;
  Scalar chain = 1;
  for (Index i = 0; i < dim; ++i) {
    const int k = deriv[static_cast<std::size_t>(i)];
    tables.push_back(detail::monomial_derivatives<Scalar>(local.row(i), spec.degrees[static_cast<std::size_t>(i)], k));
    chain *= std::pow(Scalar(1) / lengths[i], k);
  }
  const Index M = spec.size();
  Matrix<Scalar> rows(P, M);
  for (Index m = 0; m < M; ++m) {
    const auto e = spec.exponents(m);
    auto col = rows.col(m);
    col.setConstant(chain);
    for (Index i = 0; i < dim; ++i) col.array() *= tables[static_cast<std::size_t>(i)].col(e[static_cast<std::size_t>(i)]).array();
  }
  return rows;
}

template <typename Scalar, typename DerivedX, typename DerivedL>
RowVector<Scalar> poly_row(const PolySpec& spec, const Eigen::MatrixBase<DerivedX>& local,
                           const Eigen::MatrixBase<DerivedL>& lengths, const MultiIndex& deriv) {
  return poly_rows<Scalar>(spec, local, lengths, deriv).row(0);
}

/// Per-segment column space V = features + polynomials. Column blocks are segment-major;
/// within a block the N feature columns come first, then the M polynomial columns.
class CombinedSpace {
 public:
  CombinedSpace(Partition<double> partition, Index feature_count, PolySpec poly)
      : partition_(std::move(partition)), features_(feature_count), poly_(std::move(poly)) {
    poly_.validate();
    if (poly_.dim() != partition_.dim()) throw InvalidArgument("combined space: polynomial/partition dimension mismatch");
    if (features_ < 0) throw InvalidArgument("combined space: negative feature count");
  }

  const Partition<double>& partition() const { return partition_; }
  const PolySpec& poly() const { return poly_; }
  Index dim() const { return partition_.dim(); }
  Index feature_count() const { return features_; }
  Index poly_count() const { return poly_.size(); }
  Index block_width() const { return features_ + poly_.size(); }
  Index column_count() const { return partition_.size() * block_width(); }
  Index block_offset(Index segment) const { return segment * block_width(); }

 private:
  Partition<double> partition_;
  Index features_;
  PolySpec poly_;
};

/// Nonzero block of a combined row: columns [block_offset(segment), +block_width).
struct SegmentRow {
  Index segment = 0;
  Eigen::RowVectorXd block;
};

/// Block rows (P x K) for points `x` (dim x P), each expressed in its given segment.
/// With a null model the feature columns are zero (polynomial-only space).
Eigen::MatrixXd segment_rows(const CombinedSpace& space, const spotter::MlpModel* model, const Eigen::MatrixXd& x,
                             const std::vector<Index>& segments, const MultiIndex& deriv);

/// Owning segment of each column of `x`.
std::vector<Index> locate_all(const CombinedSpace& space, const Eigen::MatrixXd& x);

SegmentRow combined_row(const CombinedSpace& space, const spotter::MlpModel& model, const Eigen::VectorXd& x,
                        const MultiIndex& deriv);

/// Values of sum_n gamma_n v_n (or its derivative) at the columns of `points`.
Eigen::VectorXd evaluate(const CombinedSpace& space, const Eigen::VectorXd& coeffs, const spotter::MlpModel& model,
                         const Eigen::MatrixXd& points, const MultiIndex& deriv);

/// Coefficients reproducing the network output: the output weights on every segment's
/// feature columns and the output bias on every constant polynomial column.
Eigen::VectorXd embed_network(const CombinedSpace& space, const spotter::MlpModel& model);

}  // namespace deepoly
