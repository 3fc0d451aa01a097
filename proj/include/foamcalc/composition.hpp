#pragma once

#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace foamcalc {

/// A composition of k: ordered list of positive integers summing to k.
class Composition {
 public:
  Composition() = default;
  explicit Composition(std::vector<int> parts) : parts_(std::move(parts)) {
    for (int p : parts_)
      if (p <= 0) throw std::invalid_argument("Composition: parts must be >= 1");
  }
  Composition(std::initializer_list<int> parts)
      : Composition(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const { return parts_; }
  int length() const { return static_cast<int>(parts_.size()); }
  int level() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
  int operator[](int i) const { return parts_[i]; }

  bool operator==(const Composition& o) const { return parts_ == o.parts_; }
  bool operator!=(const Composition& o) const { return parts_ != o.parts_; }
  bool operator<(const Composition& o) const { return parts_ < o.parts_; }

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

/// shift(c) = sum_{i<j} k_i k_j, stored doubled (it is an integer, but web
/// shifts live on the half-integer grid, so everything uses the same unit).
/// Returns the plain integer value.
inline long shift_composition(const Composition& c) {
  long s = 0;
  const auto& p = c.parts();
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j) s += long(p[i]) * p[j];
  return s;
}

struct DecompositionCheck {
  bool is_decomposition = false;
  bool is_elementary = false;
};

/// Whether c_fine refines c_coarse blockwise, preserving order.
inline DecompositionCheck is_decomposition(const Composition& fine,
                                           const Composition& coarse) {
  if (fine.level() != coarse.level())
    throw std::invalid_argument("is_decomposition: level mismatch");
  DecompositionCheck res;
  size_t i = 0;
  for (int block : coarse.parts()) {
    int acc = 0;
    while (acc < block) {
      if (i >= fine.parts().size()) return res;
      acc += fine.parts()[i++];
    }
    if (acc != block) return res;
  }
  if (i != fine.parts().size()) return res;
  res.is_decomposition = true;
  res.is_elementary = fine.length() == coarse.length() + 1;
  return res;
}

/// All compositions of k (2^{k-1} of them).
inline std::vector<Composition> all_compositions(int k) {
  std::vector<Composition> out;
  if (k == 0) {
    out.emplace_back(std::vector<int>{});
    return out;
  }
  std::vector<int> cur;
  auto rec = [&](auto&& self, int rest) -> void {
    if (rest == 0) {
      out.emplace_back(cur);
      return;
    }
    for (int p = 1; p <= rest; ++p) {
      cur.push_back(p);
      self(self, rest - p);
      cur.pop_back();
    }
  };
  rec(rec, k);
  return out;
}

}  // namespace foamcalc
