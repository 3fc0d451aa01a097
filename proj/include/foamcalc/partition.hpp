#pragma once

#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace foamcalc {

/// Young diagram: weakly decreasing list of positive parts.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
    for (size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] <= 0)
        throw std::invalid_argument("Partition: parts must be positive");
      if (i && parts_[i] > parts_[i - 1])
        throw std::invalid_argument("Partition: parts must weakly decrease");
    }
  }
  Partition(std::initializer_list<int> parts)
      : Partition(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const { return parts_; }
  int rows() const { return static_cast<int>(parts_.size()); }
  int part(int i) const { return i < rows() ? parts_[i] : 0; }
  int size() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
  bool empty() const { return parts_.empty(); }

  bool fits_in(int a, int b) const {
    return rows() <= a && (parts_.empty() || parts_[0] <= b);
  }

  Partition transpose() const {
    std::vector<int> t;
    if (parts_.empty()) return Partition();
    t.assign(parts_[0], 0);
    for (int p : parts_)
      for (int j = 0; j < p; ++j) ++t[j];
    return Partition(std::move(t));
  }

  bool operator==(const Partition& o) const { return parts_ == o.parts_; }
  bool operator!=(const Partition& o) const { return parts_ != o.parts_; }
  bool operator<(const Partition& o) const { return parts_ < o.parts_; }

  std::string str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < parts_.size(); ++i)
      os << (i ? "," : "") << parts_[i];
    os << ")";
    return os.str();
  }

 private:
  std::vector<int> parts_;
};

/// Dual of lambda in the a x b rectangle: transpose of the complement.
/// |lambda| + |dual| = ab and rect_dual(rect_dual(l,a,b),b,a) = l.
inline Partition rect_dual(const Partition& lambda, int a, int b) {
  if (!lambda.fits_in(a, b))
    throw std::invalid_argument("rect_dual: partition does not fit rectangle");
  std::vector<int> comp;
  for (int i = a - 1; i >= 0; --i) {
    int c = b - lambda.part(i);
    if (c > 0) comp.push_back(c);
  }
  return Partition(std::move(comp)).transpose();
}

/// All partitions fitting the a x b rectangle (including the empty one).
inline std::vector<Partition> partitions_in_rectangle(int a, int b) {
  std::vector<Partition> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int row, int maxpart) -> void {
    out.emplace_back(Partition(cur));
    if (row >= a) return;
    for (int p = maxpart; p >= 1; --p) {
      cur.push_back(p);
      self(self, row + 1, p);
      cur.pop_back();
    }
  };
  rec(rec, 0, b);
  return out;
}

/// All partitions of n (used by test oracles and migration bases).
inline std::vector<Partition> partitions_of(int n, int max_rows = -1) {
  std::vector<Partition> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int rest, int maxpart) -> void {
    if (rest == 0) {
      out.emplace_back(Partition(cur));
      return;
    }
    if (max_rows >= 0 && static_cast<int>(cur.size()) >= max_rows) return;
    for (int p = std::min(rest, maxpart); p >= 1; --p) {
      cur.push_back(p);
      self(self, rest - p, p);
      cur.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

}  // namespace foamcalc
