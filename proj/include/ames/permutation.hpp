#pragma once

#include <numeric>
#include <span>
#include <vector>

#include "ames/sparse_matrix.hpp"

namespace ames {

/// Symmetric reordering. `forward()[new] = old`, `inverse()[old] = new`.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<Index> forward) : forward_(std::move(forward)) {
    constexpr Index unset = static_cast<Index>(-1);
    inverse_.assign(forward_.size(), unset);
    for (Index i = 0; i < forward_.size(); ++i) {
      if (forward_[i] >= forward_.size() || inverse_[forward_[i]] != unset) {
        throw DimensionError("permutation is not a bijection");
      }
      inverse_[forward_[i]] = i;
    }
  }

  static Permutation identity(Index n) {
    std::vector<Index> f(n);
    std::iota(f.begin(), f.end(), Index{0});
    return Permutation(std::move(f));
  }

  Index size() const noexcept { return forward_.size(); }
  std::span<const Index> forward() const noexcept { return forward_; }
  std::span<const Index> inverse() const noexcept { return inverse_; }
  Index old_of(Index new_index) const { return forward_[new_index]; }
  Index new_of(Index old_index) const { return inverse_[old_index]; }

  bool is_identity() const {
    for (Index i = 0; i < forward_.size(); ++i) {
      if (forward_[i] != i) return false;
    }
    return true;
  }

  /// First apply `inner`, then this one: result.forward = inner.forward ∘ this.forward.
  Permutation after(const Permutation& inner) const {
    if (inner.size() != size()) throw DimensionError("permutation size mismatch");
    std::vector<Index> f(size());
    for (Index i = 0; i < size(); ++i) f[i] = inner.forward_[forward_[i]];
    return Permutation(std::move(f));
  }

  /// Old ordering to new ordering: out[i] = x[forward[i]].
  Vector to_new(std::span<const double> x) const {
    check(x.size());
    Vector out(x.size());
    for (Index i = 0; i < out.size(); ++i) out[i] = x[forward_[i]];
    return out;
  }

  /// New ordering back to old ordering: out[forward[i]] = x[i].
  Vector to_old(std::span<const double> x) const {
    check(x.size());
    Vector out(x.size());
    for (Index i = 0; i < out.size(); ++i) out[forward_[i]] = x[i];
    return out;
  }

 private:
  void check(Index n) const {
    if (n != size()) throw DimensionError("vector length does not match permutation");
  }

  std::vector<Index> forward_;
  std::vector<Index> inverse_;
};

/// P^T A P in the convention (P^T A P)(i, j) = A(forward[i], forward[j]).
inline SparseMatrix permute(const SparseMatrix& a, const Permutation& p) {
  if (!a.square() || a.rows() != p.size()) throw DimensionError("permute: size mismatch");
  std::vector<Triplet> t = a.triplets();
  for (auto& e : t) {
    e.row = p.new_of(e.row);
    e.col = p.new_of(e.col);
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t), a.layout());
}

}  // namespace ames
