#include "deepoly/assembly.hpp"

#include <lapacke.h>
#include "json.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <fstream>

namespace deepoly {

std::string to_string(RowTag tag) {
  switch (tag) {
    case RowTag::interior_residual: return "interior-residual";
    case RowTag::boundary: return "boundary";
    case RowTag::interface_continuity: return "interface-continuity";
    case RowTag::data_fit: return "data-fit";
  }
  return "unknown";
}

LinearSystem LinearSystem::dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, RowKind kind) {
  if (a.rows() != b.size()) throw InvalidArgument("linear system: row/rhs count mismatch");
  LinearSystem sys(1, a.cols());
  sys.add_rows(a, std::vector<Index>(static_cast<std::size_t>(a.rows()), 0), b, kind);
  return sys;
}

void LinearSystem::reserve_more(Index extra) {
  const Index r = rows();
  primary_.conservativeResize(r + extra, block_width_);
  secondary_.conservativeResize(r + extra, block_width_);
  rhs_.conservativeResize(r + extra);
}

void LinearSystem::add_rows(const Eigen::MatrixXd& blocks, const std::vector<Index>& segments,
                            const Eigen::VectorXd& rhs, RowKind kind) {
  if (blocks.cols() != block_width_ || blocks.rows() != rhs.size() ||
      static_cast<Index>(segments.size()) != rhs.size()) {
    throw InvalidArgument("linear system: block shape mismatch");
  }
  if (!(kind.weight > 0)) throw InvalidArgument("linear system: row weight must be positive");
  const Index r = rows();
  const Index n = rhs.size();
  reserve_more(n);
  primary_.middleRows(r, n) = blocks;
  secondary_.middleRows(r, n).setZero();
  rhs_.segment(r, n) = rhs;
  for (Index s : segments) {
    if (s < 0 || s >= segments_) throw InvalidArgument("linear system: segment index out of range");
    primary_segment_.push_back(s);
    secondary_segment_.push_back(-1);
    kinds_.push_back(kind);
  }
}

void LinearSystem::add_difference_rows(const Eigen::MatrixXd& lower_blocks, const std::vector<Index>& lower,
                                       const Eigen::MatrixXd& upper_blocks, const std::vector<Index>& upper,
                                       RowKind kind) {
  const Index n = lower_blocks.rows();
  if (upper_blocks.rows() != n || static_cast<Index>(lower.size()) != n || static_cast<Index>(upper.size()) != n ||
      lower_blocks.cols() != block_width_ || upper_blocks.cols() != block_width_) {
    throw InvalidArgument("linear system: interface block shape mismatch");
  }
  if (!(kind.weight > 0)) throw InvalidArgument("linear system: row weight must be positive");
  const Index r = rows();
  reserve_more(n);
  primary_.middleRows(r, n) = lower_blocks;
  secondary_.middleRows(r, n) = -upper_blocks;
  rhs_.segment(r, n).setZero();
  for (Index i = 0; i < n; ++i) {
    primary_segment_.push_back(lower[static_cast<std::size_t>(i)]);
    secondary_segment_.push_back(upper[static_cast<std::size_t>(i)]);
    kinds_.push_back(kind);
  }
}

void LinearSystem::append(const LinearSystem& other) {
  if (other.rows() == 0) return;
  if (other.block_width_ != block_width_ || other.segments_ != segments_) {
    throw InvalidArgument("linear system: appending a system with a different layout");
  }
  const Index r = rows();
  const Index n = other.rows();
  reserve_more(n);
  primary_.middleRows(r, n) = other.primary_;
  secondary_.middleRows(r, n) = other.secondary_;
  rhs_.segment(r, n) = other.rhs_;
  primary_segment_.insert(primary_segment_.end(), other.primary_segment_.begin(), other.primary_segment_.end());
  secondary_segment_.insert(secondary_segment_.end(), other.secondary_segment_.begin(), other.secondary_segment_.end());
  kinds_.insert(kinds_.end(), other.kinds_.begin(), other.kinds_.end());
}

void LinearSystem::scale_rows(RowTag tag, double factor) {
  for (Index r = 0; r < rows(); ++r) {
    if (kinds_[static_cast<std::size_t>(r)].tag != tag) continue;
    primary_.row(r) *= factor;
    secondary_.row(r) *= factor;
    rhs_[r] *= factor;
  }
}

void LinearSystem::set_weight(RowTag tag, double weight) {
  if (!(weight > 0)) throw InvalidArgument("linear system: row weight must be positive");
  for (auto& k : kinds_) {
    if (k.tag == tag) k.weight = weight;
  }
}

Eigen::MatrixXd LinearSystem::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows(), cols());
  for (Index r = 0; r < rows(); ++r) {
    const auto ps = primary_segment_[static_cast<std::size_t>(r)];
    a.row(r).segment(ps * block_width_, block_width_) += primary_.row(r);
    const auto ss = secondary_segment_[static_cast<std::size_t>(r)];
    if (ss >= 0) a.row(r).segment(ss * block_width_, block_width_) += secondary_.row(r);
  }
  return a;
}

Eigen::VectorXd LinearSystem::weights() const {
  Eigen::VectorXd w(rows());
  for (Index r = 0; r < rows(); ++r) w[r] = kinds_[static_cast<std::size_t>(r)].weight;
  return w;
}

Eigen::VectorXd LinearSystem::apply(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != cols()) throw InvalidArgument("linear system: coefficient length mismatch");
  Eigen::VectorXd out(rows());
  for (Index r = 0; r < rows(); ++r) {
    const auto ps = primary_segment_[static_cast<std::size_t>(r)];
    double v = primary_.row(r).dot(coeffs.segment(ps * block_width_, block_width_));
    const auto ss = secondary_segment_[static_cast<std::size_t>(r)];
    if (ss >= 0) v += secondary_.row(r).dot(coeffs.segment(ss * block_width_, block_width_));
    out[r] = v;
  }
  return out;
}

std::size_t LinearSystem::count(RowTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(kinds_.begin(), kinds_.end(), [tag](const RowKind& k) { return k.tag == tag; }));
}

namespace {

const spotter::MlpModel* feature_model(const CombinedSpace& space, const spotter::MlpModel& model) {
  return space.feature_count() > 0 ? &model : nullptr;
}

}  // namespace

LinearSystem assemble_fit(const CombinedSpace& space, const spotter::MlpModel& model, const Eigen::MatrixXd& points,
                          const Eigen::VectorXd& targets) {
  if (points.cols() == 0) throw InvalidArgument("assemble_fit: no samples");
  if (points.cols() != targets.size()) throw InvalidArgument("assemble_fit: sample/target count mismatch");
  const auto owners = locate_all(space, points);
  LinearSystem sys(space.partition().size(), space.block_width());
  sys.add_rows(segment_rows(space, feature_model(space, model), points, owners, zero_index(space.dim())), owners,
               targets, {RowTag::data_fit, 1.0});
  return sys;
}

LinearSystem assemble_pde(const CombinedSpace& space, const spotter::MlpModel& model, const PdeDescriptor& pde,
                          const Eigen::MatrixXd& interior, const Eigen::MatrixXd& boundary, double boundary_weight) {
  pde.validate();
  if (pde.dim != space.dim()) throw InvalidArgument("assemble_pde: descriptor/space dimension mismatch");
  if (interior.cols() == 0) throw InvalidArgument("assemble_pde: no interior points");
  for (const auto& t : pde.terms) {
    if (!spotter::jet_supports(t.deriv)) throw InvalidArgument("assemble_pde: derivative order beyond jet support");
    if (t.state_power > 0 && !pde.frozen_state) {
      throw InvalidArgument("assemble_pde: nonlinear term without a frozen state to linearize around");
    }
  }

  const Index P = interior.cols();
  const auto owners = locate_all(space, interior);
  Eigen::VectorXd state(P);
  Eigen::VectorXd source(P);
  for (Index p = 0; p < P; ++p) {
    const Eigen::VectorXd x = interior.col(p);
    state[p] = pde.frozen_state ? pde.frozen_state(x) : 0.0;
    source[p] = pde.source_at(x);
  }

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(P, space.block_width());
  std::vector<MultiIndex> seen;
  for (const auto& term : pde.terms) {
    Eigen::VectorXd factor(P);
    for (Index p = 0; p < P; ++p) {
      factor[p] = term.coefficient_at(interior.col(p));
      if (term.state_power > 0) factor[p] *= std::pow(state[p], term.state_power);
    }
    const Eigen::MatrixXd block = segment_rows(space, feature_model(space, model), interior, owners, term.deriv);
    rows += factor.asDiagonal() * block;
  }

  LinearSystem sys(space.partition().size(), space.block_width());
  sys.add_rows(rows, owners, source, {RowTag::interior_residual, 1.0});
  if (boundary.cols() > 0) {
    const auto bowners = locate_all(space, boundary);
    Eigen::VectorXd g(boundary.cols());
    for (Index p = 0; p < boundary.cols(); ++p) g[p] = pde.boundary_at(boundary.col(p));
    sys.add_rows(segment_rows(space, feature_model(space, model), boundary, bowners, zero_index(space.dim())), bowners,
                 g, {RowTag::boundary, boundary_weight});
  }
  return sys;
}

namespace {

double radical_inverse(std::uint64_t n, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

Eigen::MatrixXd face_points(const Partition<double>& partition, const Face& face, int count) {
  const Index dim = partition.dim();
  const auto& lower = partition.segment(face.lower);
  const Index face_dim = dim - 1;
  if (face_dim == 0) count = 1;
  Eigen::MatrixXd pts(dim, count);
  constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  for (int q = 0; q < count; ++q) {
    Index t = 0;
    for (Index i = 0; i < dim; ++i) {
      if (i == face.axis) {
        pts(i, q) = lower.hi[i];
        continue;
      }
      double u = 0.5;
      if (face_dim == 1) {
        u = (q + 0.5) / count;
      } else {
        u = radical_inverse(static_cast<std::uint64_t>(q) + 1, primes[t % 8]);
      }
      pts(i, q) = lower.lo[i] + u * (lower.hi[i] - lower.lo[i]);
      ++t;
    }
  }
  return pts;
}

std::vector<MultiIndex> continuity_indices(Index dim, int order) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= order; ++total) {
    // Enumerate compositions of `total` into `dim` parts in lexicographic order (descending first axis).
    MultiIndex alpha = zero_index(dim);
    std::function<void(Index, int)> rec = [&](Index axis, int left) {
      if (axis == dim - 1) {
        alpha[static_cast<std::size_t>(axis)] = left;
        if (spotter::jet_supports(alpha)) out.push_back(alpha);
        return;
      }
      for (int k = left; k >= 0; --k) {
        alpha[static_cast<std::size_t>(axis)] = k;
        rec(axis + 1, left - k);
      }
    };
    rec(0, total);
  }
  return out;
}

LinearSystem assemble_continuity(const CombinedSpace& space, const spotter::MlpModel& model, int continuity_order,
                                 int points_per_face, double weight) {
  if (continuity_order < 0 || continuity_order > 2) {
    throw InvalidArgument("assemble_continuity: continuity order must be in 0..2");
  }
  if (points_per_face < 1) throw InvalidArgument("assemble_continuity: need at least one point per face");
  const auto& partition = space.partition();
  LinearSystem sys(partition.size(), space.block_width());
  const auto faces = partition.interior_faces();
  if (faces.empty()) return sys;
  const auto indices = continuity_indices(space.dim(), continuity_order);

  // Gather all face points first so each derivative needs a single batched jet evaluation.
  std::vector<Eigen::MatrixXd> per_face;
  Index total = 0;
  for (const auto& f : faces) {
    per_face.push_back(face_points(partition, f, points_per_face));
    total += per_face.back().cols();
  }
  Eigen::MatrixXd pts(space.dim(), total);
  std::vector<Index> lower, upper;
  Index at = 0;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    pts.middleCols(at, per_face[i].cols()) = per_face[i];
    at += per_face[i].cols();
    lower.insert(lower.end(), static_cast<std::size_t>(per_face[i].cols()), faces[i].lower);
    upper.insert(upper.end(), static_cast<std::size_t>(per_face[i].cols()), faces[i].upper);
  }

  std::vector<Eigen::MatrixXd> lower_rows, upper_rows;
  for (const auto& alpha : indices) {
    lower_rows.push_back(segment_rows(space, feature_model(space, model), pts, lower, alpha));
    upper_rows.push_back(segment_rows(space, feature_model(space, model), pts, upper, alpha));
  }
  // Row order: face point, then derivative index.
  const auto nidx = static_cast<Index>(indices.size());
  Eigen::MatrixXd lo(total * nidx, space.block_width()), up(total * nidx, space.block_width());
  std::vector<Index> lseg, useg;
  for (Index p = 0; p < total; ++p) {
    for (Index k = 0; k < nidx; ++k) {
      lo.row(p * nidx + k) = lower_rows[static_cast<std::size_t>(k)].row(p);
      up.row(p * nidx + k) = upper_rows[static_cast<std::size_t>(k)].row(p);
      lseg.push_back(lower[static_cast<std::size_t>(p)]);
      useg.push_back(upper[static_cast<std::size_t>(p)]);
    }
  }
  sys.add_difference_rows(lo, lseg, up, useg, {RowTag::interface_continuity, weight});
  return sys;
}

LsSolution solve_ls(const LinearSystem& system, double rcond) {
  const Index R = system.rows();
  const Index C = system.cols();
  if (R == 0 || C == 0) throw InvalidArgument("solve_ls: empty system");
  if (!system.primary().allFinite() || !system.secondary().allFinite() || !system.rhs().allFinite()) {
    throw InvalidArgument("solve_ls: non-finite entries");
  }
  const Eigen::VectorXd w = system.weights();
  const Index K = system.block_width();

  // Column norms of the weighted matrix.
  Eigen::VectorXd norm2 = Eigen::VectorXd::Zero(C);
  for (Index r = 0; r < R; ++r) {
    const double w2 = w[r] * w[r];
    const auto ps = system.primary_segment()[static_cast<std::size_t>(r)];
    norm2.segment(ps * K, K) += w2 * system.primary().row(r).transpose().cwiseAbs2();
    const auto ss = system.secondary_segment()[static_cast<std::size_t>(r)];
    if (ss >= 0) norm2.segment(ss * K, K) += w2 * system.secondary().row(r).transpose().cwiseAbs2();
  }
  Eigen::VectorXd scale(C);
  for (Index c = 0; c < C; ++c) scale[c] = norm2[c] > 0 ? 1.0 / std::sqrt(norm2[c]) : 1.0;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(R, C);
  for (Index r = 0; r < R; ++r) {
    const auto ps = system.primary_segment()[static_cast<std::size_t>(r)];
    a.row(r).segment(ps * K, K) += w[r] * system.primary().row(r).cwiseProduct(scale.segment(ps * K, K).transpose());
    const auto ss = system.secondary_segment()[static_cast<std::size_t>(r)];
    if (ss >= 0) {
      a.row(r).segment(ss * K, K) += w[r] * system.secondary().row(r).cwiseProduct(scale.segment(ss * K, K).transpose());
    }
  }
  const Eigen::VectorXd wb = w.cwiseProduct(system.rhs());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(std::max(R, C));
  b.head(R) = wb;

  Eigen::VectorXd sigma(std::min(R, C));
  lapack_int rank = 0;
  const lapack_int info = LAPACKE_dgelsd(LAPACK_COL_MAJOR, static_cast<lapack_int>(R), static_cast<lapack_int>(C), 1,
                                         a.data(), static_cast<lapack_int>(R), b.data(),
                                         static_cast<lapack_int>(b.size()), sigma.data(), rcond, &rank);
  if (info != 0) throw std::runtime_error("solve_ls: LAPACK dgelsd failed with info " + std::to_string(info));
  a.resize(0, 0);

  LsSolution sol;
  sol.coeffs = b.head(C).cwiseProduct(scale);
  sol.column_scale = scale;
  sol.effective_rank = rank;
  sol.sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;
  sol.sigma_min_kept = rank > 0 ? sigma[rank - 1] : 0.0;
  const Eigen::VectorXd resid = w.cwiseProduct(system.apply(sol.coeffs) - system.rhs());
  sol.residual_norm = resid.norm();
  const double bn = wb.norm();
  sol.relative_residual = bn > 0 ? sol.residual_norm / bn : sol.residual_norm;
  return sol;
}

void dump_system(const LinearSystem& system, const std::filesystem::path& prefix) {
  static_assert(std::endian::native == std::endian::little, "dump_system writes native little-endian doubles");
  const Eigen::MatrixXd a = system.to_dense();
  std::filesystem::path bin = prefix;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("dump_system: cannot open " + bin.string());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = a;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));

  nlohmann::json side;
  side["rows"] = system.rows();
  side["cols"] = system.cols();
  side["dtype"] = "float64";
  side["byte_order"] = "little";
  side["layout"] = "row-major";
  side["matrix_file"] = bin.filename().string();
  side["rhs"] = std::vector<double>(system.rhs().data(), system.rhs().data() + system.rhs().size());
  nlohmann::json kinds = nlohmann::json::array();
  for (const auto& k : system.kinds()) kinds.push_back({{"tag", to_string(k.tag)}, {"weight", k.weight}});
  side["kinds"] = std::move(kinds);
  std::filesystem::path json = prefix;
  json += ".json";
  std::ofstream js(json);
  js << side.dump(2) << "\n";
}

}  // namespace deepoly
