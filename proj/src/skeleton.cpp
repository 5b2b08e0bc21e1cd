#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "densepoly/polygonize.hpp"

namespace densepoly::poly {

std::vector<std::vector<int>> SkeletonGraph::adjacency() const {
  std::vector<std::vector<int>> adj(nodes.size());
  for (const auto& [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

std::vector<int> SkeletonGraph::degrees() const {
  std::vector<int> deg(nodes.size(), 0);
  for (const auto& [a, b] : edges) {
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  return deg;
}

void SkeletonGraph::validate(int height, int width) const {
  const int n = static_cast<int>(nodes.size());
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [a, b] = edges[e];
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw DomainError("skeleton graph: edge " + std::to_string(e) + " references a missing node");
    }
    if (a == b) throw DomainError("skeleton graph: edge " + std::to_string(e) + " is a self loop");
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) {
      throw DomainError("skeleton graph: edge " + std::to_string(e) + " is repeated");
    }
  }
  for (int i = 0; i < n; ++i) {
    const Point p = nodes[static_cast<std::size_t>(i)];
    if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height)) {
      throw DomainError("skeleton graph: node " + std::to_string(i) + " lies outside the raster");
    }
  }
  std::vector<int> order(nodes.size());
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return nodes[static_cast<std::size_t>(a)].x < nodes[static_cast<std::size_t>(b)].x;
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Point p = nodes[static_cast<std::size_t>(order[i])];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point q = nodes[static_cast<std::size_t>(order[j])];
      if (q.x - p.x > 1e-6) break;
      if (distance(p, q) <= 1e-6) {
        throw DomainError("skeleton graph: nodes " + std::to_string(order[i]) + " and " +
                          std::to_string(order[j]) + " coincide");
      }
    }
  }
}

namespace {

// 8-neighborhood given clockwise from north. Simple when the foreground neighbors form
// one 8-connected set and the background 4-neighbors one 4-connected set.
bool is_simple(const std::array<int, 8>& p) {
  auto components = [&](int value, bool eight) {
    std::array<bool, 8> seen{};
    int count = 0;
    for (std::size_t s = 0; s < 8; ++s) {
      if (p[s] != value || seen[s]) continue;
      if (!eight && s % 2 == 1) continue;  // background is seeded from 4-neighbors only
      ++count;
      std::vector<std::size_t> stack = {s};
      seen[s] = true;
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        // Ring neighbors; for 8-connectivity two 4-neighbors also touch across a corner.
        std::vector<std::size_t> next = {(u + 1) % 8, (u + 7) % 8};
        if (eight && u % 2 == 0) {
          next.push_back((u + 2) % 8);
          next.push_back((u + 6) % 8);
        }
        for (std::size_t v : next) {
          if (p[v] == value && !seen[v]) {
            seen[v] = true;
            stack.push_back(v);
          }
        }
      }
    }
    return count;
  };
  return components(1, true) == 1 && components(0, false) == 1;
}

}  // namespace

BinaryRaster thin(const BinaryRaster& mask) {
  const int h = mask.height(), w = mask.width();
  BinaryRaster img(h, w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(y, x) = mask(y, x) ? 1 : 0;
  auto at = [&](int y, int x) -> int { return img.in_bounds(y, x) ? img(y, x) : 0; };

  std::vector<std::pair<int, int>> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      doomed.clear();
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (!img(y, x)) continue;
          // P2..P9 clockwise from north.
          const std::array<int, 8> p = {at(y - 1, x),     at(y - 1, x + 1), at(y, x + 1),
                                        at(y + 1, x + 1), at(y + 1, x),     at(y + 1, x - 1),
                                        at(y, x - 1),     at(y - 1, x - 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[static_cast<std::size_t>(k)];
            if (p[static_cast<std::size_t>(k)] == 0 && p[static_cast<std::size_t>((k + 1) % 8)] == 1) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          const int n = p[0], e = p[2], s = p[4], wv = p[6];
          if (pass == 0 ? (n * e * s == 0 && e * s * wv == 0) : (n * e * wv == 0 && n * s * wv == 0)) {
            doomed.emplace_back(y, x);
          }
        }
      }
      for (const auto& [y, x] : doomed) img(y, x) = 0;
      if (!doomed.empty()) changed = true;
    }
  }
  // Staircase corners: thinning leaves the elbow of a turn one pixel inside the crossing of
  // the two lines. Move it to the opposite pixel of its 2x2 block when that pixel was in
  // the mask and the swap keeps the local topology.
  auto ring = [&](int y, int x) {
    return std::array<int, 8>{at(y - 1, x),     at(y - 1, x + 1), at(y, x + 1), at(y + 1, x + 1),
                              at(y + 1, x),     at(y + 1, x - 1), at(y, x - 1), at(y - 1, x - 1)};
  };
  constexpr std::array<std::array<int, 2>, 8> kOffset = {
      {{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img(y, x)) continue;
      const std::array<int, 8> p = ring(y, x);
      for (std::size_t k = 0; k < 8; k += 2) {
        if (!p[k] || !p[(k + 2) % 8] || p[k + 1]) continue;
        const auto& da = kOffset[k];
        const auto& db = kOffset[(k + 2) % 8];
        const int qy = y + da[0] + db[0], qx = x + da[1] + db[1];
        if (!mask.in_bounds(qy, qx) || !mask(qy, qx) || !is_simple(p)) continue;
        // Only when both arms run straight through q and not through the current elbow.
        const bool here = at(y + 2 * da[0], x + 2 * da[1]) && at(y + 2 * db[0], x + 2 * db[1]);
        const bool there = at(y + da[0] - db[0], x + da[1] - db[1]) && at(y + db[0] - da[0], x + db[1] - da[1]);
        if (here || !there) continue;
        img(y, x) = 0;
        if (is_simple(ring(qy, qx))) {
          img(qy, qx) = 1;
          break;
        }
        img(y, x) = 1;
      }
    }
  }
  // Corners cut by a diagonal link: fill in the missing pixel when the line arriving at one
  // end and the line leaving the other both run straight into it.
  auto near_line = [&](int y, int x, int dy, int dx) {
    // Any pixel one step beyond (y, x) in direction (dy, dx), allowing a one-pixel drift.
    if (dy == 0) return at(y - 1, x + dx) || at(y, x + dx) || at(y + 1, x + dx);
    return at(y + dy, x - 1) || at(y + dy, x) || at(y + dy, x + 1);
  };
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!img(y, x)) continue;
      for (int dx : {-1, 1}) {
        const int by = y + 1, bx = x + dx;
        if (!img.in_bounds(by, bx) || !img(by, bx) || img(y, bx) || img(by, x)) continue;
        // c1 continues the row of (y, x) and the column of (by, bx); c2 the other way round.
        const bool c1 = mask(y, bx) && near_line(y, x, 0, -dx) && near_line(by, bx, 1, 0);
        const bool c2 = mask(by, x) && near_line(y, x, -1, 0) && near_line(by, bx, 0, dx);
        if (c1 == c2) continue;
        const int cy = c1 ? y : by, cx = c1 ? bx : x;
        img(cy, cx) = 1;
        if (!is_simple(ring(cy, cx))) img(cy, cx) = 0;
      }
    }
  }
  return img;
}

namespace {

// Pixel links: 4-neighbors always, diagonals only without a shared 4-neighbor.
std::vector<std::pair<int, int>> pixel_links(const BinaryRaster& s, int y, int x) {
  std::vector<std::pair<int, int>> out;
  auto on = [&](int yy, int xx) { return s.in_bounds(yy, xx) && s(yy, xx) != 0; };
  constexpr std::array<std::array<int, 2>, 4> kFour = {{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
  for (const auto& d : kFour) {
    if (on(y + d[0], x + d[1])) out.emplace_back(y + d[0], x + d[1]);
  }
  constexpr std::array<std::array<int, 2>, 4> kDiag = {{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};
  for (const auto& d : kDiag) {
    if (on(y + d[0], x + d[1]) && !on(y + d[0], x) && !on(y, x + d[1])) {
      out.emplace_back(y + d[0], x + d[1]);
    }
  }
  return out;
}

}  // namespace

SkeletonGraph skeletonize(const BinaryRaster& edge_binary) {
  const BinaryRaster s = thin(edge_binary);
  const int h = s.height(), w = s.width();
  Raster<int> degree(h, w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (s(y, x)) degree(y, x) = static_cast<int>(pixel_links(s, y, x).size());

  // Assign node ids in raster order; junction clusters share the id of their first pixel.
  Raster<int> node_of(h, w, -1);
  SkeletonGraph g;
  std::vector<std::array<double, 3>> accum;  // sum x, sum y, count
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!s(y, x) || node_of(y, x) >= 0) continue;
      const int id = static_cast<int>(accum.size());
      if (degree(y, x) < 3) {
        node_of(y, x) = id;
        accum.push_back({x + 0.5, y + 0.5, 1.0});
        continue;
      }
      std::array<double, 3> sum = {0.0, 0.0, 0.0};
      std::vector<std::pair<int, int>> stack = {{y, x}};
      node_of(y, x) = id;
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        sum[0] += cx + 0.5;
        sum[1] += cy + 0.5;
        sum[2] += 1.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = cy + dy, nx = cx + dx;
            if (!s.in_bounds(ny, nx) || !s(ny, nx) || node_of(ny, nx) >= 0 || degree(ny, nx) < 3) continue;
            node_of(ny, nx) = id;
            stack.emplace_back(ny, nx);
          }
        }
      }
      accum.push_back(sum);
    }
  }
  g.nodes.reserve(accum.size());
  for (const auto& a : accum) g.nodes.push_back({a[0] / a[2], a[1] / a[2]});

  std::set<std::pair<int, int>> edges;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!s(y, x)) continue;
      for (const auto& [ny, nx] : pixel_links(s, y, x)) {
        int a = node_of(y, x), b = node_of(ny, nx);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        edges.insert({a, b});
      }
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

namespace {

// Marks bridges with an iterative low-link DFS.
std::vector<bool> find_bridges(std::size_t n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[static_cast<std::size_t>(edges[e].first)].emplace_back(edges[e].second, static_cast<int>(e));
    adj[static_cast<std::size_t>(edges[e].second)].emplace_back(edges[e].first, static_cast<int>(e));
  }
  std::vector<int> tin(n, -1), low(n, 0);
  std::vector<bool> bridge(edges.size(), false);
  int timer = 0;
  struct Frame {
    int node;
    int parent_edge;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (tin[root] >= 0) continue;
    std::vector<Frame> stack = {{static_cast<int>(root), -1, 0}};
    tin[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto u = static_cast<std::size_t>(f.node);
      if (f.next < adj[u].size()) {
        const auto [v, e] = adj[u][f.next++];
        if (e == f.parent_edge) continue;
        const auto vi = static_cast<std::size_t>(v);
        if (tin[vi] >= 0) {
          low[u] = std::min(low[u], tin[vi]);
        } else {
          tin[vi] = low[vi] = timer++;
          stack.push_back({v, e, 0});
        }
      } else {
        const int pe = f.parent_edge;
        stack.pop_back();
        if (!stack.empty()) {
          const auto p = static_cast<std::size_t>(stack.back().node);
          low[p] = std::min(low[p], low[u]);
          if (low[u] > tin[p]) bridge[static_cast<std::size_t>(pe)] = true;
        }
      }
    }
  }
  return bridge;
}

}  // namespace

SkeletonGraph prune_to_cycles(const SkeletonGraph& g) {
  std::vector<std::pair<int, int>> edges = g.edges;
  const std::size_t n = g.nodes.size();
  bool changed = true;
  while (changed) {
    changed = false;
    // Peel dangling trees.
    std::vector<int> deg(n, 0);
    std::vector<std::vector<int>> incident(n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      ++deg[static_cast<std::size_t>(edges[e].first)];
      ++deg[static_cast<std::size_t>(edges[e].second)];
      incident[static_cast<std::size_t>(edges[e].first)].push_back(static_cast<int>(e));
      incident[static_cast<std::size_t>(edges[e].second)].push_back(static_cast<int>(e));
    }
    std::vector<bool> dead(edges.size(), false);
    std::vector<int> queue;
    for (std::size_t i = 0; i < n; ++i)
      if (deg[i] == 1) queue.push_back(static_cast<int>(i));
    while (!queue.empty()) {
      const int u = queue.back();
      queue.pop_back();
      for (int e : incident[static_cast<std::size_t>(u)]) {
        if (dead[static_cast<std::size_t>(e)]) continue;
        dead[static_cast<std::size_t>(e)] = true;
        const int v = edges[static_cast<std::size_t>(e)].first == u ? edges[static_cast<std::size_t>(e)].second
                                                                   : edges[static_cast<std::size_t>(e)].first;
        --deg[static_cast<std::size_t>(u)];
        if (--deg[static_cast<std::size_t>(v)] == 1) queue.push_back(v);
      }
    }
    std::vector<std::pair<int, int>> kept;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (!dead[e]) kept.push_back(edges[e]);
    const std::vector<bool> bridge = find_bridges(n, kept);
    edges.clear();
    for (std::size_t e = 0; e < kept.size(); ++e) {
      if (bridge[e]) {
        changed = true;
      } else {
        edges.push_back(kept[e]);
      }
    }
  }
  std::vector<int> remap(n, -1);
  for (const auto& [a, b] : edges) {
    remap[static_cast<std::size_t>(a)] = 0;
    remap[static_cast<std::size_t>(b)] = 0;
  }
  SkeletonGraph out;
  for (std::size_t i = 0; i < n; ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(g.nodes[i]);
  }
  for (const auto& [a, b] : edges) {
    out.edges.emplace_back(remap[static_cast<std::size_t>(a)], remap[static_cast<std::size_t>(b)]);
  }
  return out;
}

}  // namespace densepoly::poly
