#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mg/digraph.hpp"
#include "mg/types.hpp"

namespace mg {

/// SCC decomposition of an image source. SCC labels are assigned in order
/// of completion, so every DAG edge goes from a larger label to a smaller
/// one and label 0 is a sink.
struct CondensationGraph {
  Vertex vertex_count = 0;
  std::vector<std::uint32_t> scc_of_vertex;
  std::uint32_t scc_count = 0;
  std::vector<unsigned char> nontrivial;
  std::vector<std::uint32_t> scc_size;
  std::vector<std::uint64_t> dag_offsets;  // scc_count + 1 entries
  std::vector<std::uint32_t> dag_targets;  // sorted per SCC, no duplicates
  std::optional<std::uint32_t> star_scc;
  std::optional<Vertex> star_vertex;
  /// successors() calls made while building; one per non-escape vertex.
  std::uint64_t image_evaluations = 0;

  std::span<const std::uint32_t> successors(std::uint32_t scc) const {
    return {dag_targets.data() + dag_offsets[scc], dag_targets.data() + dag_offsets[scc + 1]};
  }
  /// Sources first.
  std::vector<std::uint32_t> topo_order() const;
};

/// Iterative Tarjan. The escape vertex, if any, is treated as a sink and
/// always flagged non-trivial; its successors are never requested.
CondensationGraph compute_scc(const ImageSource& graph);

struct MorseNode {
  std::uint32_t scc = 0;
  std::vector<Vertex> cubes;  // empty for the escape node
  bool is_star = false;
};

/// Poset of the non-trivial SCCs ordered by reachability. Node indices form
/// a linear extension: q < p implies index q < index p.
struct MorseGraph {
  std::vector<MorseNode> nodes;
  /// Covering pairs (p, q) with q < p, sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> hasse_edges;
  std::optional<std::uint32_t> star_node;
  std::vector<std::int32_t> node_of_scc;  // -1 for trivial SCCs

  std::size_t size() const { return nodes.size(); }
  /// q <= p: some path leads from M(p) to M(q).
  bool leq(std::uint32_t q, std::uint32_t p) const {
    return (below_[p * words_ + q / 64] >> (q % 64)) & 1u;
  }
  /// Bitset row of nodes <= p.
  std::span<const std::uint64_t> below(std::uint32_t p) const {
    return {below_.data() + p * words_, words_};
  }
  std::size_t words() const { return words_; }

  std::size_t words_ = 0;
  std::vector<std::uint64_t> below_;
};

MorseGraph morse_graph(const CondensationGraph& cg);

std::vector<std::uint32_t> minimal_nodes(const MorseGraph& mg);

/// Per-SCC antichain of reachable Morse nodes (reflexive reachability):
/// the maximal ones, or the minimal ones when `minimal` is set. A Morse SCC
/// always maps to its own node alone.
struct SccNodeSets {
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint32_t> nodes;
  std::span<const std::uint32_t> of(std::uint32_t scc) const {
    return {nodes.data() + offsets[scc], nodes.data() + offsets[scc + 1]};
  }
};
SccNodeSets reachable_extremes(const CondensationGraph& cg, const MorseGraph& mg, bool minimal);

/// DOT digraph: one node per Morse set labeled "p: <cube count>", the
/// escape node labeled "escape", Hasse edges from larger to smaller.
void write_dot(std::ostream& os, const MorseGraph& mg);

}  // namespace mg
