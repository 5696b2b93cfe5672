#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "afmm/interaction_lists.hpp"
#include "afmm/tree.hpp"

namespace afmm {

enum class Op { p2m = 0, m2m, m2l, p2l, l2l, m2p, p2p, l2p };
inline constexpr std::array<Op, 8> kAllOps{Op::p2m, Op::m2m, Op::m2l, Op::p2l,
                                           Op::l2l, Op::m2p, Op::p2p, Op::l2p};
std::string_view to_string(Op op);

/// `applications` is the number of operator calls; `units` the work they
/// carried: particles for P2M/L2P, particle-node pairs for M2P/P2L, kernel
/// evaluations for P2P, and one per call for M2M/M2L/L2L.
struct OpTally {
  std::uint64_t applications = 0;
  std::uint64_t units = 0;
  OpTally& operator+=(const OpTally& o) {
    applications += o.applications;
    units += o.units;
    return *this;
  }
  bool operator==(const OpTally&) const = default;
};

struct OperationCounts {
  std::array<OpTally, 8> ops{};
  OpTally& operator[](Op op) { return ops[static_cast<int>(op)]; }
  const OpTally& operator[](Op op) const { return ops[static_cast<int>(op)]; }
  OperationCounts& operator+=(const OperationCounts& o) {
    for (int i = 0; i < 8; ++i) ops[i] += o.ops[i];
    return *this;
  }
  bool operator==(const OperationCounts&) const = default;
};

/// Cycle constants for one application of each operator.
///
/// Row i of the table is (C_{2i+1}, C_{2i+2}) in operator order
/// P2M, M2M, M2L, P2L, L2L, L2P, M2P, P2P; an application costs
/// C_odd + C_even * g per unit, with g = r^(d+1) (P2M, L2P), r^(2d) (M2M,
/// M2L, L2L), k r^d (P2L, M2P) and k (P2P).
struct CostTable {
  std::array<double, 16> c{};
  double k = 19.0;  // cycles per kernel evaluation

  static CostTable defaults();
  static CostTable from_json(std::string_view text);
  static CostTable load(const std::filesystem::path& path);
  /// $FMM_COST_TABLE if set, otherwise the built-in defaults.
  static CostTable from_environment();
  std::string to_json() const;
  void validate() const;

  /// (per-application constant, per-unit constant) for `op`.
  std::pair<double, double> constants(Op op) const;
};

struct CostReport {
  OperationCounts counts;
  std::array<double, 8> cycles{};
  double total = 0.0;
  int order = 0;
  int dim = 3;

  double operator[](Op op) const { return cycles[static_cast<int>(op)]; }
};

/// Closed-form counts from the stored lists.
OperationCounts count_operations(const Tree& tree, const InteractionLists& lists, bool modified = true);
/// Same counts without materialising the lists.
OperationCounts count_operations(const Tree& tree, bool modified = true);

/// Kernel evaluations P2P performs between leaves a and b (coincident pairs skipped).
std::uint64_t p2p_evaluations(const Tree& tree, NodeId target, NodeId source);

/// Per-unit work multiplier g for `op` (see CostTable).
double unit_weight(Op op, const CostTable& table, int order, int dim);

CostReport estimate_cycles(const OperationCounts& counts, const CostTable& table, int order, int dim = 3);

struct BoundCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double limit = 0.0;
  NodeId offending = kNoNode;
};

struct BoundsReport {
  std::vector<BoundCheck> checks;
  bool all_passed() const;
  const BoundCheck& operator[](std::string_view name) const;
};

/// Largest per-divided-node M2L charge allowed in dimension d:
/// (6^d - 3^d) + 2^d (6^d - 1).
std::uint64_t m2l_charge_limit(int dim);

/// Checks the structural bounds: the branching identity on the extended tree,
/// divided count <= N_l - 1, M2M pairs < 2 N_l, the per-divided-node M2L
/// charge, leaf out-degree <= 3^d - 1 and P2M = L2P = N.
BoundsReport verify_complexity_bounds(const Tree& tree, const InteractionLists& lists,
                                      const OperationCounts& counts);

std::string to_csv(const CostReport& report);
std::string to_json(const CostReport& report);

}  // namespace afmm
