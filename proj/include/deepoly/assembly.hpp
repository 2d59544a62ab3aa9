#pragma once

#include "deepoly/basis.hpp"
#include "deepoly/pde.hpp"

#include <filesystem>
#include <string>

namespace deepoly {

enum class RowTag { interior_residual, boundary, interface_continuity, data_fit };

std::string to_string(RowTag tag);

struct RowKind {
  RowTag tag = RowTag::data_fit;
  double weight = 1.0;
};

/// Weighted least-squares rows over the combined space. Every row touches at most two
/// segment blocks: `primary` always, `secondary` only for interface rows (secondary
/// segment >= 0). A plain dense system is the single-segment case.
class LinearSystem {
 public:
  LinearSystem() = default;
  LinearSystem(Index segments, Index block_width) : segments_(segments), block_width_(block_width) {
    primary_.resize(0, block_width);
    secondary_.resize(0, block_width);
  }

  static LinearSystem dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, RowKind kind = {});

  Index rows() const { return rhs_.size(); }
  Index cols() const { return segments_ * block_width_; }
  Index segments() const { return segments_; }
  Index block_width() const { return block_width_; }

  const Eigen::MatrixXd& primary() const { return primary_; }
  const Eigen::MatrixXd& secondary() const { return secondary_; }
  const std::vector<Index>& primary_segment() const { return primary_segment_; }
  const std::vector<Index>& secondary_segment() const { return secondary_segment_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  const std::vector<RowKind>& kinds() const { return kinds_; }

  /// Appends rows whose only nonzeros are `blocks` (R x K) in the given segments.
  void add_rows(const Eigen::MatrixXd& blocks, const std::vector<Index>& segments, const Eigen::VectorXd& rhs,
                RowKind kind);
  /// Appends interface rows `lower_blocks` in `lower` minus `upper_blocks` in `upper`.
  void add_difference_rows(const Eigen::MatrixXd& lower_blocks, const std::vector<Index>& lower,
                           const Eigen::MatrixXd& upper_blocks, const std::vector<Index>& upper, RowKind kind);
  void append(const LinearSystem& other);

  /// Scales every row of the given tag (and its right-hand side) by `factor`.
  void scale_rows(RowTag tag, double factor);
  /// Replaces the weight of every row with the given tag.
  void set_weight(RowTag tag, double weight);

  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd weights() const;
  /// Unweighted product A * coeffs.
  Eigen::VectorXd apply(const Eigen::VectorXd& coeffs) const;
  std::size_t count(RowTag tag) const;

 private:
  void reserve_more(Index extra);

  Index segments_ = 1;
  Index block_width_ = 0;
  Eigen::MatrixXd primary_;
  Eigen::MatrixXd secondary_;
  std::vector<Index> primary_segment_;
  std::vector<Index> secondary_segment_;
  Eigen::VectorXd rhs_;
  std::vector<RowKind> kinds_;
};

LinearSystem assemble_fit(const CombinedSpace& space, const spotter::MlpModel& model, const Eigen::MatrixXd& points,
                          const Eigen::VectorXd& targets);

LinearSystem assemble_pde(const CombinedSpace& space, const spotter::MlpModel& model, const PdeDescriptor& pde,
                          const Eigen::MatrixXd& interior, const Eigen::MatrixXd& boundary, double boundary_weight);

/// Collocation points placed on the interior face between two segments.
Eigen::MatrixXd face_points(const Partition<double>& partition, const Face& face, int count);

/// Multi-indices of total order <= order supported by the feature jets, graded order.
std::vector<MultiIndex> continuity_indices(Index dim, int order);

LinearSystem assemble_continuity(const CombinedSpace& space, const spotter::MlpModel& model, int continuity_order,
                                 int points_per_face, double weight);

struct LsSolution {
  Eigen::VectorXd coeffs;
  double residual_norm = 0;      // || W (A x - b) ||
  double relative_residual = 0;  // residual_norm / || W b ||
  Index effective_rank = 0;
  double sigma_max = 0;
  double sigma_min_kept = 0;
  Eigen::VectorXd column_scale;
};

/// Minimum-norm weighted least squares. Rows and right-hand side are multiplied by their
/// weights, columns are scaled to unit Euclidean norm (zero columns keep scale 1), singular
/// values below rcond * sigma_max are discarded, and the coefficients are unscaled on return.
LsSolution solve_ls(const LinearSystem& system, double rcond = 1e-12);

/// Writes A row-major as little-endian float64 to `<prefix>.bin` and a JSON sidecar
/// `<prefix>.json` with the shape, right-hand side and per-row kinds.
void dump_system(const LinearSystem& system, const std::filesystem::path& prefix);

}  // namespace deepoly
