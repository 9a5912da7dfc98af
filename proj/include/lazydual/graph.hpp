#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lazydual {

// Undirected, connected, simple graph. Adjacency lists exclude the node
// itself; neighbor_with_self() follows the N(i) convention that includes i.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // i < j
  std::vector<std::vector<int>> adj;

  int degree(int i) const { return static_cast<int>(adj[i].size()); }

  std::vector<int> neighbors_with_self(int i) const {
    std::vector<int> nb = adj[i];
    nb.push_back(i);
    std::sort(nb.begin(), nb.end());
    return nb;
  }
};

namespace detail {

inline bool is_connected(int n, const std::vector<std::vector<int>>& adj) {
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

inline Graph from_edge_set(int n, const std::set<std::pair<int, int>>& es) {
  Graph g;
  g.n = n;
  g.adj.assign(n, {});
  for (auto [i, j] : es) {
    g.edges.emplace_back(i, j);
    g.adj[i].push_back(j);
    g.adj[j].push_back(i);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

}  // namespace detail

inline Graph make_path(int n) {
  if (n < 2) throw std::invalid_argument("path graph needs n >= 2");
  std::set<std::pair<int, int>> es;
  for (int i = 0; i + 1 < n; ++i) es.insert({i, i + 1});
  return detail::from_edge_set(n, es);
}

inline Graph make_complete(int n) {
  if (n < 2) throw std::invalid_argument("complete graph needs n >= 2");
  std::set<std::pair<int, int>> es;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) es.insert({i, j});
  return detail::from_edge_set(n, es);
}

// Nodes indexed row-major: (r, c) -> r*cols + c.
inline Graph make_grid2d(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw std::invalid_argument("grid2d needs at least 2 nodes");
  std::set<std::pair<int, int>> es;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) es.insert({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) es.insert({id(r, c), id(r + 1, c)});
    }
  Graph g = detail::from_edge_set(rows * cols, es);
  if (!detail::is_connected(g.n, g.adj))
    throw std::runtime_error("grid2d produced a disconnected graph");
  return g;
}

// Retries with incremented seed until connected; deterministic given seed.
inline Graph make_erdos_renyi(int n, double p, std::uint64_t seed,
                              int max_attempts = 100) {
  if (n < 2) throw std::invalid_argument("erdos_renyi needs n >= 2");
  if (p <= 0.0 || p > 1.0)
    throw std::invalid_argument("erdos_renyi needs p in (0, 1]");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::set<std::pair<int, int>> es;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (unif(rng) < p) es.insert({i, j});
    Graph g = detail::from_edge_set(n, es);
    if (detail::is_connected(g.n, g.adj)) return g;
  }
  throw std::runtime_error(
      "erdos_renyi: no connected sample within attempt cap; increase p");
}

// One "i j" pair per line, 0-indexed. Blank lines and '#' comments allowed.
inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  std::set<std::pair<int, int>> es;
  int max_node = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i >> j) || i < 0 || j < 0 || i == j)
      throw std::runtime_error("bad edge list line " + std::to_string(lineno));
    es.insert({std::min(i, j), std::max(i, j)});
    max_node = std::max({max_node, i, j});
  }
  Graph g = detail::from_edge_set(max_node + 1, es);
  if (!detail::is_connected(g.n, g.adj))
    throw std::runtime_error("edge list graph is disconnected");
  return g;
}

}  // namespace lazydual
