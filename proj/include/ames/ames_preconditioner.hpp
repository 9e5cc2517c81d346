#pragma once

#include <cstdint>
#include <cstdlib>
#include <future>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ames/dissection_tree.hpp"
#include "ames/local_factor.hpp"
#include "ames/schur.hpp"

namespace ames {

struct FactorizeConfig {
  LocalKind local_kind = LocalKind::IluThreshold;
  DropRule droptol_blocks;   // leaf and Schur-leaf factorizations
  DropRule droptol_schur;    // sparsification of assembled Schur complements
  TreeConfig schur_tree{2, 0, 16, 1.2};  // levels = reordering depth of each Schur complement
  int fsai_power = 1;
  unsigned threads = 1;      // concurrent child factorizations at one node
  std::uint64_t seed = 0;

  LocalOptions local_options() const { return {local_kind, droptol_blocks, fsai_power}; }
};

/// Threads allowed by AMES_THREADS (unset or invalid: 1).
inline unsigned threads_from_env() {
  const char* v = std::getenv("AMES_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  return (end != v && n >= 1) ? static_cast<unsigned>(n) : 1u;
}

/// Recursive multilevel preconditioner mirroring a dissection tree.
///
/// A leaf holds one LocalFactor. A split node holds its children, the coupling
/// blocks E_i, F_i, and the preconditioner of its Schur complement, which may
/// itself live in a reordered basis (`schur_permutation`). Immutable once
/// built; `apply` is reentrant.
class AmesPreconditioner {
 public:
  static AmesPreconditioner leaf(LocalFactor f) {
    AmesPreconditioner m;
    m.size_ = f.size();
    m.leaf_.emplace(std::move(f));
    return m;
  }

  Index size() const noexcept { return size_; }
  bool is_leaf() const noexcept { return leaf_.has_value(); }
  const LocalFactor& leaf_factor() const { return *leaf_; }
  const std::vector<AmesPreconditioner>& children() const noexcept { return children_; }
  std::span<const Index> child_offsets() const noexcept { return child_offsets_; }
  const std::vector<SparseMatrix>& e_blocks() const noexcept { return e_; }
  const std::vector<SparseMatrix>& f_blocks() const noexcept { return f_; }
  /// Null when the separator is empty.
  const AmesPreconditioner* schur() const noexcept { return schur_.get(); }
  /// Basis of the Schur preconditioner: forward[new] = old separator index.
  const Permutation& schur_permutation() const noexcept { return schur_perm_; }
  /// Assembled (sparsified) Schur complement in the separator's own ordering.
  const SparseMatrix& schur_matrix() const noexcept { return schur_matrix_; }
  const SchurStats& schur_stats() const noexcept { return schur_stats_; }
  Index interior_size() const noexcept { return size_ - separator_size(); }
  Index separator_size() const noexcept { return schur_matrix_.rows(); }

  /// nnz of everything touched by apply: local factors, E/F blocks, Schur factors.
  Index stored_nnz() const {
    if (is_leaf()) return leaf_->nnz_factors();
    Index total = schur_ ? schur_->stored_nnz() : 0;
    for (Index i = 0; i < children_.size(); ++i) {
      total += children_[i].stored_nnz() + e_[i].nnz() + f_[i].nnz();
    }
    return total;
  }

  /// y = M^{-1} x in the fused form y2 = S^{-1}(x2 - E B^{-1} x1),
  /// y1 = B^{-1} x1 - B^{-1} F y2. Same linear map as apply_stepwise.
  void apply(std::span<const double> x, std::span<double> y) const {
    check(x, y);
    if (is_leaf()) {
      leaf_->apply(x, y);
      return;
    }
    const Index nb = interior_size(), ns = separator_size();
    solve_interior(x.first(nb), y.first(nb));
    if (ns == 0) return;
    Vector t(x.begin() + nb, x.end());
    subtract_e(y.first(nb), t);
    solve_schur(t, y.subspan(nb));
    Vector fy(nb), q(nb);
    apply_f(y.subspan(nb), fy);
    solve_interior(fy, q);
    for (Index k = 0; k < nb; ++k) y[k] -= q[k];
  }

  Vector apply(std::span<const double> x) const {
    Vector y(size_);
    apply(x, y);
    return y;
  }

  /// The preconditioning operation written step by step:
  /// p1 = B^{-1} x1; [p2, p3] = S^{-1}[E p1, x2]; [p4, p5] = B^{-1}[F p2, F p3];
  /// y1 = p1 + p4 - p5; y2 = p3 - p2. Recursion uses the same literal form.
  void apply_stepwise(std::span<const double> x, std::span<double> y) const {
    check(x, y);
    if (is_leaf()) {
      leaf_->apply(x, y);
      return;
    }
    const Index nb = interior_size(), ns = separator_size();
    Vector p1(nb);
    solve_interior(x.first(nb), p1, true);
    std::copy(p1.begin(), p1.end(), y.begin());
    if (ns == 0) return;
    Vector ep1(ns, 0.0);
    subtract_e(p1, ep1);
    for (double& v : ep1) v = -v;
    Vector p2(ns), p3(ns);
    solve_schur(ep1, p2, true);
    solve_schur(x.subspan(nb), p3, true);
    Vector fp2(nb), fp3(nb), p4(nb), p5(nb);
    apply_f(p2, fp2);
    apply_f(p3, fp3);
    solve_interior(fp2, p4, true);
    solve_interior(fp3, p5, true);
    for (Index k = 0; k < nb; ++k) y[k] = p1[k] + p4[k] - p5[k];
    for (Index k = 0; k < ns; ++k) y[nb + k] = p3[k] - p2[k];
  }

  /// One line per node, indented by depth.
  void dump(std::ostream& os, int depth = 0, const std::string& name = "root") const {
    os << std::string(2 * depth, ' ') << name << ' ';
    if (is_leaf()) {
      os << "leaf kind=" << to_string(leaf_->kind()) << " size=" << size_
         << " nnz=" << leaf_->nnz_factors() << '\n';
      return;
    }
    Index ef = 0;
    for (Index i = 0; i < e_.size(); ++i) ef += e_[i].nnz() + f_[i].nnz();
    os << "split size=" << size_ << " children=" << children_.size()
       << " separator=" << separator_size() << " nnz_EF=" << ef
       << " nnz_S=" << schur_matrix_.nnz() << " schur_solves=" << schur_stats_.block_solves << '\n';
    for (Index i = 0; i < children_.size(); ++i) {
      children_[i].dump(os, depth + 1, "child[" + std::to_string(i) + "]");
    }
    if (schur_) schur_->dump(os, depth + 1, "schur");
  }

  std::string dump() const {
    std::ostringstream os;
    dump(os);
    return os.str();
  }

 private:
  friend AmesPreconditioner factorize_node(const DissectionNode&, const FactorizeConfig&,
                                           const std::string&);
  friend AmesPreconditioner factorize_schur(const SparseMatrix&, const FactorizeConfig&,
                                            const std::string&, Permutation&);

  void check(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size_ || y.size() != size_) {
      throw DimensionError("preconditioner apply: expected length " + std::to_string(size_));
    }
  }

  void solve_interior(std::span<const double> x, std::span<double> y, bool literal = false) const {
    for (Index i = 0; i < children_.size(); ++i) {
      const Index off = child_offsets_[i], len = children_[i].size();
      if (literal) {
        children_[i].apply_stepwise(x.subspan(off, len), y.subspan(off, len));
      } else {
        children_[i].apply(x.subspan(off, len), y.subspan(off, len));
      }
    }
  }

  // t -= E y1
  void subtract_e(std::span<const double> y1, std::span<double> t) const {
    Vector tmp(t.size());
    for (Index i = 0; i < children_.size(); ++i) {
      spmv(e_[i], y1.subspan(child_offsets_[i], children_[i].size()), tmp);
      for (Index k = 0; k < t.size(); ++k) t[k] -= tmp[k];
    }
  }

  // out = F y2, stacked by child
  void apply_f(std::span<const double> y2, std::span<double> out) const {
    for (Index i = 0; i < children_.size(); ++i) {
      spmv(f_[i], y2, out.subspan(child_offsets_[i], children_[i].size()));
    }
  }

  void solve_schur(std::span<const double> x, std::span<double> y, bool literal = false) const {
    if (schur_perm_.is_identity()) {
      literal ? schur_->apply_stepwise(x, y) : schur_->apply(x, y);
      return;
    }
    const Vector xp = schur_perm_.to_new(x);
    Vector yp(xp.size());
    literal ? schur_->apply_stepwise(xp, yp) : schur_->apply(xp, yp);
    const Vector back = schur_perm_.to_old(yp);
    std::copy(back.begin(), back.end(), y.begin());
  }

  Index size_ = 0;
  std::optional<LocalFactor> leaf_;
  std::vector<AmesPreconditioner> children_;
  std::vector<Index> child_offsets_;
  std::vector<SparseMatrix> e_, f_;
  std::unique_ptr<AmesPreconditioner> schur_;
  Permutation schur_perm_;
  SparseMatrix schur_matrix_;
  SchurStats schur_stats_;
};

AmesPreconditioner factorize_node(const DissectionNode& node, const FactorizeConfig& cfg,
                                  const std::string& path);

namespace detail {

// Prefixes errors with the tree path; errors already tagged by a deeper call
// pass through untouched.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("root")) throw;
    if (const auto* b = dynamic_cast<const BreakdownError*>(&e)) {
      throw BreakdownError(path + ": " + e.what(), b->step());
    }
    throw FactorizationError(path + ": " + e.what());
  }
}

}  // namespace detail

/// Factorizes the Schur complement `s`, reordering it first when
/// cfg.schur_tree.levels > 0. `perm` receives the reordering.
inline AmesPreconditioner factorize_schur(const SparseMatrix& s, const FactorizeConfig& cfg,
                                          const std::string& path, Permutation& perm) {
  if (cfg.schur_tree.levels == 0 || s.rows() <= cfg.schur_tree.min_block_size) {
    perm = Permutation::identity(s.rows());
    return detail::with_path(path, [&] {
      return AmesPreconditioner::leaf(factorize_local(s, cfg.local_options()));
    });
  }
  const DissectionTree tree = build_tree(s, cfg.schur_tree, cfg.seed);
  perm = tree.permutation;
  FactorizeConfig inner = cfg;
  inner.schur_tree.levels = 0;  // nested Schur complements are factorized monolithically
  inner.threads = 1;
  return factorize_node(tree.root, inner, path);
}

/// Factorization phase over a dissection tree.
///
/// Children are factorized first; each split node then assembles its Schur
/// complement using the children as block solvers. Errors carry the tree path
/// of the failing block, e.g. "root/child[1]/schur".
inline AmesPreconditioner factorize_node(const DissectionNode& node, const FactorizeConfig& cfg,
                                         const std::string& path) {
  if (node.is_leaf()) {
    return detail::with_path(path, [&] {
      return AmesPreconditioner::leaf(factorize_local(*node.leaf_block, cfg.local_options()));
    });
  }
  AmesPreconditioner m;
  m.size_ = node.size;
  m.child_offsets_ = node.child_offsets;
  m.e_ = node.e_blocks;
  m.f_ = node.f_blocks;

  const Index nc = node.children.size();
  auto child_path = [&](Index i) { return path + "/child[" + std::to_string(i) + "]"; };
  FactorizeConfig child_cfg = cfg;
  child_cfg.threads = 1;
  if (cfg.threads > 1 && nc > 1) {
    std::vector<std::optional<AmesPreconditioner>> slots(nc);
    for (Index start = 0; start < nc; start += cfg.threads) {
      const Index stop = std::min<Index>(nc, start + cfg.threads);
      std::vector<std::future<AmesPreconditioner>> jobs;
      for (Index i = start; i < stop; ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] {
          return factorize_node(node.children[i], child_cfg, child_path(i));
        }));
      }
      for (Index i = start; i < stop; ++i) slots[i].emplace(jobs[i - start].get());
    }
    for (auto& s : slots) m.children_.push_back(std::move(*s));
  } else {
    for (Index i = 0; i < nc; ++i) {
      m.children_.push_back(factorize_node(node.children[i], child_cfg, child_path(i)));
    }
  }

  const std::string schur_path = path + "/schur";
  m.schur_matrix_ = detail::with_path(schur_path, [&] {
    return compute_schur(
        node.c_block, m.e_, m.f_,
        [&](Index i, std::span<const double> in, std::span<double> out) {
          m.children_[i].apply(in, out);
        },
        cfg.droptol_schur.droptol, &m.schur_stats_);
  });
  if (m.schur_matrix_.rows() > 0) {
    FactorizeConfig schur_cfg = cfg;
    schur_cfg.seed = detail::mix_seed(cfg.seed, node.level, 0x5c);
    m.schur_ = std::make_unique<AmesPreconditioner>(
        factorize_schur(m.schur_matrix_, schur_cfg, schur_path, m.schur_perm_));
  } else {
    m.schur_perm_ = Permutation::identity(0);
  }
  return m;
}

inline AmesPreconditioner factorize(const DissectionNode& root, const FactorizeConfig& cfg) {
  return factorize_node(root, cfg, "root");
}

/// stored_nnz(M) / nnz(A)
inline double density_ratio(const AmesPreconditioner& m, const SparseMatrix& a) {
  if (a.nnz() == 0) throw DimensionError("density ratio of an empty matrix");
  return static_cast<double>(m.stored_nnz()) / static_cast<double>(a.nnz());
}

}  // namespace ames
