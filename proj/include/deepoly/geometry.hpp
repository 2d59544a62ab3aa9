#pragma once

#include "deepoly/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace deepoly {

/// Axis-aligned box [lo_i, hi_i] in problem units.
template <typename Scalar = double>
class Domain {
 public:
  using Point = Vector<Scalar>;

  Domain() = default;
  Domain(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() == 0 || lo_.size() != hi_.size()) {
      throw InvalidArgument("domain: bounds must be nonempty and of equal length");
    }
    for (Index i = 0; i < lo_.size(); ++i) {
      if (!(lo_[i] < hi_[i])) {
        throw InvalidArgument("domain: lower bound must be below upper bound on every axis");
      }
    }
  }

  static Domain box(std::initializer_list<std::pair<Scalar, Scalar>> bounds) {
    return box(std::vector<std::pair<Scalar, Scalar>>(bounds));
  }

  static Domain box(const std::vector<std::pair<Scalar, Scalar>>& bounds) {
    Point lo(static_cast<Index>(bounds.size())), hi(static_cast<Index>(bounds.size()));
    Index i = 0;
    for (const auto& [a, b] : bounds) {
      lo[i] = a;
      hi[i] = b;
      ++i;
    }
    return Domain(std::move(lo), std::move(hi));
  }

  Index dim() const { return lo_.size(); }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  Point lengths() const { return hi_ - lo_; }
  Scalar volume() const { return lengths().prod(); }

 private:
  Point lo_;
  Point hi_;
};

template <typename Scalar = double>
struct Segment {
  using Point = Vector<Scalar>;

  Eigen::VectorXi index;  // per-axis integer coordinates
  Index linear = 0;       // position in the partition's lexicographic order
  Point lo;
  Point hi;

  Point lengths() const { return hi - lo; }
  Scalar volume() const { return lengths().prod(); }
};

/// Interior face shared by two neighbouring segments: `lower` sits below `upper` along `axis`.
struct Face {
  Index lower = 0;
  Index upper = 0;
  Index axis = 0;
};

template <typename Scalar = double>
inline constexpr Scalar kContainmentTol = Scalar(1e-12);

/// Uniform axis-aligned tiling of a domain. Segments are ordered lexicographically by
/// their index tuple, first axis most significant.
template <typename Scalar = double>
class Partition {
 public:
  using Point = Vector<Scalar>;

  Partition() = default;

  Partition(Domain<Scalar> domain, std::vector<int> sections)
      : domain_(std::move(domain)), sections_(std::move(sections)) {
    const Index dim = domain_.dim();
    if (static_cast<Index>(sections_.size()) != dim) {
      throw InvalidArgument("partition: one section count per dimension required");
    }
    for (int s : sections_) {
      if (s < 1) throw InvalidArgument("partition: section counts must be >= 1");
    }
    breaks_.resize(static_cast<std::size_t>(dim));
    for (Index i = 0; i < dim; ++i) {
      const int s = sections_[static_cast<std::size_t>(i)];
      auto& b = breaks_[static_cast<std::size_t>(i)];
      b.resize(static_cast<std::size_t>(s) + 1);
      for (int k = 0; k <= s; ++k) {
        b[static_cast<std::size_t>(k)] = domain_.lo()[i] + (domain_.hi()[i] - domain_.lo()[i]) * Scalar(k) / Scalar(s);
      }
      b.front() = domain_.lo()[i];
      b.back() = domain_.hi()[i];
    }

    const Index count = std::accumulate(sections_.begin(), sections_.end(), Index{1},
                                        [](Index a, int s) { return a * s; });
    segments_.reserve(static_cast<std::size_t>(count));
    for (Index lin = 0; lin < count; ++lin) {
      Segment<Scalar> seg;
      seg.linear = lin;
      seg.index = unravel(lin);
      seg.lo.resize(dim);
      seg.hi.resize(dim);
      for (Index i = 0; i < dim; ++i) {
        const auto& b = breaks_[static_cast<std::size_t>(i)];
        seg.lo[i] = b[static_cast<std::size_t>(seg.index[i])];
        seg.hi[i] = b[static_cast<std::size_t>(seg.index[i]) + 1];
      }
      segments_.push_back(std::move(seg));
    }
  }

  const Domain<Scalar>& domain() const { return domain_; }
  const std::vector<int>& sections() const { return sections_; }
  Index dim() const { return domain_.dim(); }
  Index size() const { return static_cast<Index>(segments_.size()); }
  const Segment<Scalar>& segment(Index i) const { return segments_.at(static_cast<std::size_t>(i)); }
  const std::vector<Segment<Scalar>>& segments() const { return segments_; }
  const std::vector<Scalar>& breaks(Index axis) const { return breaks_.at(static_cast<std::size_t>(axis)); }

  Eigen::VectorXi unravel(Index linear) const {
    Eigen::VectorXi idx(dim());
    for (Index i = dim() - 1; i >= 0; --i) {
      const int s = sections_[static_cast<std::size_t>(i)];
      idx[i] = static_cast<int>(linear % s);
      linear /= s;
    }
    return idx;
  }

  Index ravel(const Eigen::VectorXi& idx) const {
    Index linear = 0;
    for (Index i = 0; i < dim(); ++i) linear = linear * sections_[static_cast<std::size_t>(i)] + idx[i];
    return linear;
  }

  /// Every interior face, ordered by lower segment then axis.
  std::vector<Face> interior_faces() const {
    std::vector<Face> faces;
    for (const auto& seg : segments_) {
      for (Index axis = 0; axis < dim(); ++axis) {
        if (seg.index[axis] + 1 < sections_[static_cast<std::size_t>(axis)]) {
          Eigen::VectorXi up = seg.index;
          up[axis] += 1;
          faces.push_back({seg.linear, ravel(up), axis});
        }
      }
    }
    return faces;
  }

 private:
  Domain<Scalar> domain_;
  std::vector<int> sections_;
  std::vector<std::vector<Scalar>> breaks_;
  std::vector<Segment<Scalar>> segments_;
};

template <typename Scalar>
Partition<Scalar> partition_domain(const Domain<Scalar>& domain, const std::vector<int>& sections) {
  return Partition<Scalar>(domain, sections);
}

/// Local coordinate of x in the segment, (x - inf) / length per axis, in [0, 1].
template <typename Scalar, typename Derived>
Vector<Scalar> normalize_point(const Eigen::MatrixBase<Derived>& x, const Segment<Scalar>& segment) {
  if (x.size() != segment.lo.size()) throw InvalidArgument("normalize_point: dimension mismatch");
  Vector<Scalar> local(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar len = segment.hi[i] - segment.lo[i];
    Scalar t = (x[i] - segment.lo[i]) / len;
    const Scalar slack = kContainmentTol<Scalar>;
    if (!(t >= -slack && t <= Scalar(1) + slack)) {
      std::ostringstream msg;
      msg << "normalize_point: coordinate " << i << " = " << x[i] << " outside segment [" << segment.lo[i]
          << ", " << segment.hi[i] << "]";
      throw OutOfSegment(msg.str());
    }
    local[i] = std::clamp(t, Scalar(0), Scalar(1));
  }
  return local;
}

template <typename Scalar, typename Derived>
Vector<Scalar> denormalize_point(const Eigen::MatrixBase<Derived>& local, const Segment<Scalar>& segment) {
  return segment.lo + local.cwiseProduct(segment.hi - segment.lo);
}

/// Owning segment of x. Points on an interior face belong to the upper neighbour; the
/// domain's upper boundary belongs to the last segment along that axis.
template <typename Scalar, typename Derived>
Index locate_segment(const Eigen::MatrixBase<Derived>& x, const Partition<Scalar>& partition) {
  const Index dim = partition.dim();
  if (x.size() != dim) throw InvalidArgument("locate_segment: dimension mismatch");
  Eigen::VectorXi idx(dim);
  for (Index i = 0; i < dim; ++i) {
    const auto& b = partition.breaks(i);
    const int s = partition.sections()[static_cast<std::size_t>(i)];
    const Scalar slack = kContainmentTol<Scalar> * (b[1] - b[0]);
    if (!(x[i] >= b.front() - slack && x[i] <= b.back() + slack)) {
      std::ostringstream msg;
      msg << "locate_segment: coordinate " << i << " = " << x[i] << " outside domain";
      throw OutOfDomain(msg.str());
    }
    auto it = std::upper_bound(b.begin(), b.end(), x[i]);
    int k = static_cast<int>(it - b.begin()) - 1;
    idx[i] = std::clamp(k, 0, s - 1);
  }
  return partition.ravel(idx);
}

}  // namespace deepoly
