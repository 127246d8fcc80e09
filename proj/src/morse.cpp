#include "mg/morse.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace mg {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

bool test_bit(const std::uint64_t* row, std::uint32_t i) { return (row[i / 64] >> (i % 64)) & 1u; }
void set_bit(std::uint64_t* row, std::uint32_t i) { row[i / 64] |= std::uint64_t{1} << (i % 64); }

struct Frame {
  Vertex v;
  std::size_t begin;
  std::size_t next;
  std::size_t end;
  std::size_t pending_mark;
};

// Reduces `set` (sorted, unique) to its maximal or minimal elements under
// the order given by the row-major `below` matrix.
void reduce_antichain(std::vector<std::uint32_t>& set, const std::vector<std::uint64_t>& below,
                      std::size_t words, bool minimal) {
  if (set.size() < 2) return;
  std::vector<std::uint32_t> kept;
  kept.reserve(set.size());
  for (std::uint32_t x : set) {
    bool dominated = false;
    for (std::uint32_t y : set) {
      if (y == x) continue;
      // maximal: drop x if x < y; minimal: drop x if y < x
      const bool hit = minimal ? test_bit(&below[x * words], y) : test_bit(&below[y * words], x);
      if (hit) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(x);
  }
  set.swap(kept);
}

// Sweeps SCCs sinks-first. With `build` set, fills the below matrix from the
// DAG (node ids given by node_of_scc); otherwise reads it.
SccNodeSets sweep(const CondensationGraph& cg, const std::vector<std::int32_t>& node_of_scc,
                  std::vector<std::uint64_t>& below, std::size_t words, bool build, bool minimal) {
  const std::size_t k = below.size() / words;
  std::vector<std::vector<std::uint32_t>> min_below;
  if (minimal) {
    min_below.resize(k);
    for (std::uint32_t p = 0; p < k; ++p) {
      std::vector<std::uint32_t> all;
      for (std::uint32_t q = 0; q < k; ++q) {
        if (test_bit(&below[p * words], q)) all.push_back(q);
      }
      reduce_antichain(all, below, words, true);
      min_below[p] = std::move(all);
    }
  }
  SccNodeSets out;
  out.offsets.reserve(cg.scc_count + 1);
  out.offsets.push_back(0);
  std::vector<std::uint32_t> u;
  for (std::uint32_t s = 0; s < cg.scc_count; ++s) {
    u.clear();
    for (std::uint32_t t : cg.successors(s)) {
      const std::int32_t q = node_of_scc[t];
      if (q >= 0 && minimal) {
        u.insert(u.end(), min_below[q].begin(), min_below[q].end());
      } else if (q >= 0) {
        u.push_back(static_cast<std::uint32_t>(q));
      } else {
        const auto set = out.of(t);
        u.insert(u.end(), set.begin(), set.end());
      }
    }
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    const std::int32_t p = node_of_scc[s];
    if (p >= 0) {
      if (build) {
        std::uint64_t* row = &below[static_cast<std::size_t>(p) * words];
        set_bit(row, static_cast<std::uint32_t>(p));
        for (std::uint32_t q : u) {
          const std::uint64_t* src = &below[q * words];
          for (std::size_t w = 0; w < words; ++w) row[w] |= src[w];
        }
      }
      out.nodes.push_back(static_cast<std::uint32_t>(p));
    } else {
      reduce_antichain(u, below, words, minimal);
      out.nodes.insert(out.nodes.end(), u.begin(), u.end());
    }
    out.offsets.push_back(out.nodes.size());
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> CondensationGraph::topo_order() const {
  std::vector<std::uint32_t> order(scc_count);
  for (std::uint32_t i = 0; i < scc_count; ++i) order[i] = scc_count - 1 - i;
  return order;
}

CondensationGraph compute_scc(const ImageSource& graph) {
  const Vertex n = graph.vertex_count();
  const std::optional<Vertex> star = graph.star_vertex();
  CondensationGraph cg;
  cg.vertex_count = n;
  cg.star_vertex = star;
  cg.scc_of_vertex.assign(n, kNone);
  cg.dag_offsets.push_back(0);

  std::vector<std::uint32_t> index(n, kNone), low(n, 0);
  std::vector<unsigned char> on_stack(n, 0), self_loop(n, 0);
  std::vector<Vertex> stack, buffer;
  std::vector<std::uint32_t> pending;
  std::vector<Frame> frames;
  std::uint32_t counter = 0;

  auto open = [&](Vertex v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    const std::size_t b = buffer.size();
    if (!star || v != *star) {
      graph.successors(v, buffer);
      ++cg.image_evaluations;
    }
    frames.push_back({v, b, b, buffer.size(), pending.size()});
  };

  for (Vertex root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    open(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      const Vertex v = f.v;
      if (f.next < f.end) {
        const Vertex w = buffer[f.next++];
        if (w >= n) throw InvalidArgument("compute_scc: successor out of range");
        if (w == v) {
          self_loop[v] = 1;
        } else if (index[w] == kNone) {
          open(w);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        } else {
          pending.push_back(cg.scc_of_vertex[w]);
        }
        continue;
      }
      buffer.resize(f.begin);
      const std::size_t mark = f.pending_mark;
      frames.pop_back();
      if (low[v] == index[v]) {
        const std::uint32_t label = cg.scc_count++;
        std::uint32_t size = 0;
        bool recurrent = false;
        Vertex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          cg.scc_of_vertex[w] = label;
          recurrent = recurrent || self_loop[w];
          ++size;
        } while (w != v);
        const bool is_star = star && v == *star;
        if (is_star) cg.star_scc = label;
        cg.scc_size.push_back(size);
        cg.nontrivial.push_back(size >= 2 || recurrent || is_star ? 1 : 0);
        std::sort(pending.begin() + static_cast<std::ptrdiff_t>(mark), pending.end());
        auto last = std::unique(pending.begin() + static_cast<std::ptrdiff_t>(mark), pending.end());
        cg.dag_targets.insert(cg.dag_targets.end(), pending.begin() + static_cast<std::ptrdiff_t>(mark),
                              last);
        cg.dag_offsets.push_back(cg.dag_targets.size());
        pending.resize(mark);
      }
      if (!frames.empty()) {
        const Vertex parent = frames.back().v;
        if (cg.scc_of_vertex[v] != kNone) {
          pending.push_back(cg.scc_of_vertex[v]);
        } else {
          low[parent] = std::min(low[parent], low[v]);
        }
      }
    }
  }
  return cg;
}

MorseGraph morse_graph(const CondensationGraph& cg) {
  MorseGraph mg;
  // Provisional ids in label order.
  std::vector<std::int32_t> provisional(cg.scc_count, -1);
  std::vector<std::uint32_t> scc_of_prov;
  for (std::uint32_t s = 0; s < cg.scc_count; ++s) {
    if (cg.nontrivial[s]) {
      provisional[s] = static_cast<std::int32_t>(scc_of_prov.size());
      scc_of_prov.push_back(s);
    }
  }
  const std::size_t k = scc_of_prov.size();
  const std::size_t words = std::max<std::size_t>(1, (k + 63) / 64);
  std::vector<std::uint64_t> below(k * words, 0);
  sweep(cg, provisional, below, words, true, false);

  // Member cubes, in increasing order.
  std::vector<std::vector<Vertex>> members(k);
  for (Vertex v = 0; v < cg.vertex_count; ++v) {
    if (cg.star_vertex && v == *cg.star_vertex) continue;
    const std::int32_t p = provisional[cg.scc_of_vertex[v]];
    if (p >= 0) members[p].push_back(v);
  }
  auto key = [&](std::size_t p) -> std::uint64_t {
    if (cg.star_scc && scc_of_prov[p] == *cg.star_scc) return cg.vertex_count - 1;
    return members[p].empty() ? std::numeric_limits<std::uint64_t>::max() : members[p].front();
  };

  // Linear extension: repeatedly take the smallest-key node whose strict
  // lower set is already numbered.
  std::vector<std::uint32_t> final_of(k, kNone), prov_of_final;
  std::vector<std::uint32_t> remaining_below(k, 0);
  for (std::uint32_t p = 0; p < k; ++p) {
    for (std::uint32_t q = 0; q < k; ++q) {
      if (q != p && test_bit(&below[p * words], q)) ++remaining_below[p];
    }
  }
  for (std::size_t step = 0; step < k; ++step) {
    std::uint32_t best = kNone;
    for (std::uint32_t p = 0; p < k; ++p) {
      if (final_of[p] != kNone || remaining_below[p] != 0) continue;
      if (best == kNone || key(p) < key(best)) best = p;
    }
    final_of[best] = static_cast<std::uint32_t>(prov_of_final.size());
    prov_of_final.push_back(best);
    for (std::uint32_t p = 0; p < k; ++p) {
      if (p != best && test_bit(&below[p * words], best)) --remaining_below[p];
    }
  }

  mg.words_ = words;
  mg.below_.assign(k * words, 0);
  mg.node_of_scc.assign(cg.scc_count, -1);
  mg.nodes.resize(k);
  for (std::uint32_t fp = 0; fp < k; ++fp) {
    const std::uint32_t pp = prov_of_final[fp];
    MorseNode& node = mg.nodes[fp];
    node.scc = scc_of_prov[pp];
    node.cubes = std::move(members[pp]);
    node.is_star = cg.star_scc && node.scc == *cg.star_scc;
    if (node.is_star) mg.star_node = fp;
    mg.node_of_scc[node.scc] = static_cast<std::int32_t>(fp);
    for (std::uint32_t q = 0; q < k; ++q) {
      if (test_bit(&below[pp * words], q)) set_bit(&mg.below_[fp * words], final_of[q]);
    }
  }

  // Transitive reduction: q is covered by p iff q < p and no r with q < r < p.
  for (std::uint32_t p = 0; p < k; ++p) {
    for (std::uint32_t q = 0; q < k; ++q) {
      if (q == p || !mg.leq(q, p)) continue;
      bool cover = true;
      for (std::uint32_t r = 0; r < k && cover; ++r) {
        if (r != p && r != q && mg.leq(r, p) && mg.leq(q, r)) cover = false;
      }
      if (cover) mg.hasse_edges.emplace_back(p, q);
    }
  }
  std::sort(mg.hasse_edges.begin(), mg.hasse_edges.end());
  return mg;
}

std::vector<std::uint32_t> minimal_nodes(const MorseGraph& mg) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t p = 0; p < mg.size(); ++p) {
    bool minimal = true;
    for (std::uint32_t q = 0; q < mg.size() && minimal; ++q) {
      if (q != p && mg.leq(q, p)) minimal = false;
    }
    if (minimal) out.push_back(p);
  }
  return out;
}

SccNodeSets reachable_extremes(const CondensationGraph& cg, const MorseGraph& mg, bool minimal) {
  std::vector<std::uint64_t> below = mg.below_;
  return sweep(cg, mg.node_of_scc, below, mg.words(), false, minimal);
}

void write_dot(std::ostream& os, const MorseGraph& mg) {
  os << "digraph MorseGraph {\n";
  for (std::uint32_t p = 0; p < mg.size(); ++p) {
    os << "  " << p << " [label=\"";
    if (mg.nodes[p].is_star) {
      os << "escape";
    } else {
      os << p << ": " << mg.nodes[p].cubes.size();
    }
    os << "\"];\n";
  }
  for (auto [p, q] : mg.hasse_edges) os << "  " << p << " -> " << q << ";\n";
  os << "}\n";
}

}  // namespace mg
