#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "ames/ainv.hpp"
#include "ames/fsai.hpp"
#include "ames/ilu.hpp"
#include "ames/sparse_lu.hpp"

namespace ames {

enum class LocalKind { IluThreshold, Fsai, Ainv, ExactLu };

inline std::string_view to_string(LocalKind k) {
  switch (k) {
    case LocalKind::IluThreshold: return "ilu";
    case LocalKind::Fsai: return "fsai";
    case LocalKind::Ainv: return "ainv";
    case LocalKind::ExactLu: return "exact";
  }
  return "?";
}

inline LocalKind parse_local_kind(std::string_view s) {
  if (s == "ilu") return LocalKind::IluThreshold;
  if (s == "fsai") return LocalKind::Fsai;
  if (s == "ainv") return LocalKind::Ainv;
  if (s == "exact") return LocalKind::ExactLu;
  throw Error("unknown local solver '" + std::string(s) + "'");
}

struct LocalOptions {
  LocalKind kind = LocalKind::IluThreshold;
  DropRule rule;         // ilu and ainv
  int fsai_power = 1;    // fsai only
};

/// Type-erased approximate inverse of one diagonal block or Schur complement.
class LocalFactor {
 public:
  using Storage = std::variant<IluFactors, FsaiFactors, AinvFactors, SparseLu>;

  LocalFactor(LocalKind kind, Storage s) : kind_(kind), storage_(std::move(s)) {}

  LocalKind kind() const noexcept { return kind_; }
  const Storage& storage() const noexcept { return storage_; }

  Index size() const {
    return std::visit([](const auto& f) { return f.size(); }, storage_);
  }
  Index nnz_factors() const {
    return std::visit([](const auto& f) { return f.nnz(); }, storage_);
  }

  /// y ≈ B^{-1} x
  void apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != size() || y.size() != size()) {
      throw DimensionError("local apply: length mismatch");
    }
    std::visit([&](const auto& f) { f.apply(x, y); }, storage_);
  }

  Vector apply(std::span<const double> x) const {
    Vector y(size());
    apply(x, y);
    return y;
  }

 private:
  LocalKind kind_;
  Storage storage_;
};

inline LocalFactor factorize_local(const SparseMatrix& b, const LocalOptions& opt) {
  switch (opt.kind) {
    case LocalKind::IluThreshold: return {opt.kind, ilu_factorize(b, opt.rule)};
    case LocalKind::Fsai: return {opt.kind, fsai_factorize(b, opt.fsai_power)};
    case LocalKind::Ainv: return {opt.kind, ainv_factorize(b, opt.rule)};
    case LocalKind::ExactLu: return {opt.kind, SparseLu(b)};
  }
  throw Error("unknown local solver kind");
}

}  // namespace ames
