#pragma once

// Internal graph helpers: strongly connected components (iterative Tarjan),
// closed-class detection for unichain validation, and the period of a
// strongly connected graph.

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace mcsched::detail {

// adjacency[s] lists the positive-probability successors of s.
using Adjacency = std::vector<std::vector<std::uint32_t>>;

struct SccResult {
  std::vector<int> component;  // per node, 0-based component id
  int count = 0;
};

inline SccResult strongly_connected_components(const Adjacency& adj) {
  const std::size_t n = adj.size();
  SccResult res;
  res.component.assign(n, -1);
  std::vector<int> index(n, -1), lowlink(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  int next_index = 0;

  struct Frame {
    std::uint32_t node;
    std::size_t child;
  };
  std::vector<Frame> call;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.child < adj[f.node].size()) {
        const std::uint32_t w = adj[f.node][f.child++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[f.node] = std::min(lowlink[f.node], index[w]);
        }
      } else {
        if (lowlink[f.node] == index[f.node]) {
          while (true) {
            const std::uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            res.component[w] = res.count;
            if (w == f.node) break;
          }
          ++res.count;
        }
        const std::uint32_t done = f.node;
        call.pop_back();
        if (!call.empty()) {
          lowlink[call.back().node] = std::min(lowlink[call.back().node], lowlink[done]);
        }
      }
    }
  }
  return res;
}

// Component ids of the closed (recurrent) classes: SCCs with no edge leaving
// them. Also reports one representative node per closed class.
struct ClosedClasses {
  std::vector<int> class_ids;
  std::vector<std::uint32_t> representatives;
};

// Closed-class detection over transition rows directly (flat CSR adjacency,
// iterative Tarjan with one workspace); equivalent to closed_classes on the
// same graph but without per-node containers.
template <typename Rows>
ClosedClasses closed_classes_of_rows(const Rows& rows) {
  const std::size_t n = rows.size();
  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s) offsets[s + 1] = offsets[s] + rows[s].size();
  std::vector<std::uint32_t> edges(offsets[n]);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t at = offsets[s];
    for (const auto& t : rows[s]) edges[at++] = t.next;
  }

  std::vector<int> component(n, -1), index(n, -1), lowlink(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  struct Frame {
    std::uint32_t node;
    std::size_t child;
  };
  std::vector<Frame> call;
  int next_index = 0, count = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, offsets[root]});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.child < offsets[f.node + 1]) {
        const std::uint32_t w = edges[f.child++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, offsets[w]});
        } else if (on_stack[w]) {
          lowlink[f.node] = std::min(lowlink[f.node], index[w]);
        }
      } else {
        if (lowlink[f.node] == index[f.node]) {
          while (true) {
            const std::uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            component[w] = count;
            if (w == f.node) break;
          }
          ++count;
        }
        const std::uint32_t done = f.node;
        call.pop_back();
        if (!call.empty()) {
          lowlink[call.back().node] = std::min(lowlink[call.back().node], lowlink[done]);
        }
      }
    }
  }

  std::vector<char> closed(static_cast<std::size_t>(count), 1);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) {
      if (component[s] != component[edges[e]]) closed[static_cast<std::size_t>(component[s])] = 0;
    }
  }
  ClosedClasses out;
  std::vector<std::uint32_t> rep(static_cast<std::size_t>(count), 0);
  std::vector<char> seen(static_cast<std::size_t>(count), 0);
  for (std::uint32_t s = 0; s < n; ++s) {
    const std::size_t c = static_cast<std::size_t>(component[s]);
    if (!seen[c]) {
      seen[c] = 1;
      rep[c] = s;
    }
  }
  for (int c = 0; c < count; ++c) {
    if (closed[static_cast<std::size_t>(c)]) {
      out.class_ids.push_back(c);
      out.representatives.push_back(rep[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

// Period of a strongly connected graph: gcd over all edges (u,v) of
// level[u] + 1 - level[v] with BFS levels from any root.
inline int graph_period(const Adjacency& adj) {
  const std::size_t n = adj.size();
  std::vector<long> level(n, -1);
  std::vector<std::uint32_t> queue;
  queue.push_back(0);
  level[0] = 0;
  long g = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t u = queue[head];
    for (std::uint32_t v : adj[u]) {
      if (level[v] == -1) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      } else {
        g = std::gcd(g, level[u] + 1 - level[v]);
      }
    }
  }
  return static_cast<int>(g < 0 ? -g : g);
}

}  // namespace mcsched::detail
