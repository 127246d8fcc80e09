#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace mg {

using Vertex = std::uint32_t;

/// A directed graph known only through its successor function. Every
/// vertex's successors are requested on demand; implementations may compute
/// them lazily.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  virtual Vertex vertex_count() const = 0;
  /// Appends the successors of `v` to `out`.
  virtual void successors(Vertex v, std::vector<Vertex>& out) const = 0;
  /// The synthetic escape vertex, when the graph has one.
  virtual std::optional<Vertex> star_vertex() const { return std::nullopt; }
};

/// Explicit adjacency-list graph, for hand-built maps and tests.
class AdjacencyGraph final : public ImageSource {
 public:
  explicit AdjacencyGraph(Vertex n = 0) : adj_(n) {}
  AdjacencyGraph(Vertex n, const std::vector<std::pair<Vertex, Vertex>>& edges) : adj_(n) {
    for (auto [a, b] : edges) add_edge(a, b);
  }

  void add_edge(Vertex from, Vertex to) { adj_.at(from).push_back(to); }
  void set_star(Vertex v) { star_ = v; }
  const std::vector<Vertex>& out(Vertex v) const { return adj_[v]; }

  Vertex vertex_count() const override { return static_cast<Vertex>(adj_.size()); }
  void successors(Vertex v, std::vector<Vertex>& out) const override {
    ++evaluations_;
    out.insert(out.end(), adj_[v].begin(), adj_[v].end());
  }
  std::optional<Vertex> star_vertex() const override { return star_; }
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  std::vector<std::vector<Vertex>> adj_;
  std::optional<Vertex> star_;
  mutable std::uint64_t evaluations_ = 0;
};

}  // namespace mg
