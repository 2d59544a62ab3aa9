#include "deepoly/basis.hpp"

namespace deepoly {

Eigen::MatrixXd segment_rows(const CombinedSpace& space, const spotter::MlpModel* model, const Eigen::MatrixXd& x,
                             const std::vector<Index>& segments, const MultiIndex& deriv) {
  const Index P = x.cols();
  const Index dim = space.dim();
  if (x.rows() != dim || static_cast<Index>(segments.size()) != P) {
    throw InvalidArgument("segment_rows: point/segment count mismatch");
  }
  const Index N = space.feature_count();
  Eigen::MatrixXd rows(P, space.block_width());

  if (N > 0) {
    if (model == nullptr || model->feature_count() != N || model->input_dim() != dim) {
      throw InvalidArgument("segment_rows: model does not match the feature block");
    }
    rows.leftCols(N) = spotter::feature_derivatives(*model, {deriv}, x).front().transpose();
  }

  // Group points by segment so the polynomial block is built per segment.
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(space.partition().size()));
  for (Index p = 0; p < P; ++p) members.at(static_cast<std::size_t>(segments[static_cast<std::size_t>(p)])).push_back(p);
  for (std::size_t s = 0; s < members.size(); ++s) {
    const auto& idx = members[s];
    if (idx.empty()) continue;
    const auto& seg = space.partition().segment(static_cast<Index>(s));
    Eigen::MatrixXd local(dim, static_cast<Index>(idx.size()));
    for (std::size_t q = 0; q < idx.size(); ++q) local.col(static_cast<Index>(q)) = normalize_point(x.col(idx[q]), seg);
    const Eigen::MatrixXd prow = poly_rows<double>(space.poly(), local, seg.lengths(), deriv);
    for (std::size_t q = 0; q < idx.size(); ++q) rows.row(idx[q]).tail(prow.cols()) = prow.row(static_cast<Index>(q));
  }
  return rows;
}

std::vector<Index> locate_all(const CombinedSpace& space, const Eigen::MatrixXd& x) {
  std::vector<Index> owners(static_cast<std::size_t>(x.cols()));
  for (Index p = 0; p < x.cols(); ++p) owners[static_cast<std::size_t>(p)] = locate_segment(x.col(p), space.partition());
  return owners;
}

SegmentRow combined_row(const CombinedSpace& space, const spotter::MlpModel& model, const Eigen::VectorXd& x,
                        const MultiIndex& deriv) {
  const Index owner = locate_segment(x, space.partition());
  const Eigen::MatrixXd rows = segment_rows(space, &model, x, {owner}, deriv);
  return {owner, rows.row(0)};
}

Eigen::VectorXd evaluate(const CombinedSpace& space, const Eigen::VectorXd& coeffs, const spotter::MlpModel& model,
                         const Eigen::MatrixXd& points, const MultiIndex& deriv) {
  if (coeffs.size() != space.column_count()) throw InvalidArgument("evaluate: coefficient vector length mismatch");
  const auto owners = locate_all(space, points);
  const Eigen::MatrixXd rows = segment_rows(space, space.feature_count() > 0 ? &model : nullptr, points, owners, deriv);
  Eigen::VectorXd values(points.cols());
  const Index K = space.block_width();
  for (Index p = 0; p < points.cols(); ++p) {
    values[p] = rows.row(p).dot(coeffs.segment(space.block_offset(owners[static_cast<std::size_t>(p)]), K));
  }
  return values;
}

Eigen::VectorXd embed_network(const CombinedSpace& space, const spotter::MlpModel& model) {
  if (model.feature_count() != space.feature_count() || model.output_dim() != 1) {
    throw InvalidArgument("embed_network: model does not match the feature block");
  }
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(space.column_count());
  for (Index s = 0; s < space.partition().size(); ++s) {
    const Index off = space.block_offset(s);
    coeffs.segment(off, space.feature_count()) = model.output_weight().row(0).transpose();
    coeffs[off + space.feature_count()] = model.output_bias()[0];
  }
  return coeffs;
}

}  // namespace deepoly
