#include <algorithm>
#include <cmath>
#include <set>

#include "densepoly/polygonize.hpp"

namespace densepoly::poly {

void PolygonizeConfig::validate() const {
  if (!(edge_thresh > 0.0 && edge_thresh <= 1.0)) throw DomainError("polygonize: edge_thresh must lie in (0, 1]");
  if (!(min_prob >= 0.0 && min_prob <= 1.0)) throw DomainError("polygonize: min_prob must lie in [0, 1]");
  if (!(min_area >= 0.0)) throw DomainError("polygonize: min_area must be non-negative");
  if (!(corner_angle_thresh > 0.0 && corner_angle_thresh <= kPi / 2.0)) {
    throw DomainError("polygonize: corner_angle_thresh must lie in (0, pi/2]");
  }
  if (!(rdp_tol >= 0.0) || !std::isfinite(rdp_tol)) throw DomainError("polygonize: rdp_tol must be non-negative");
  if (!(eps_degenerate > 0.0)) throw DomainError("polygonize: eps_degenerate must be positive");
  acm.validate();
}

namespace {

constexpr double kSamePoint = 1e-9;
constexpr double kJunctionMerge = 0.75;  // interior nodes this close to a key node are absorbed

struct Chain {
  int head = -1;  // key node ids in the input graph; -1 for a free cycle
  int tail = -1;
  std::vector<Point> raw;         // open form; closed chains repeat the first point
  std::vector<Point> simplified;  // same convention
};

std::size_t farthest_from(const std::vector<Point>& pts, Point p) {
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = distance(pts[i], p);
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<Point> join(const std::vector<std::vector<Point>>& pieces) {
  std::vector<Point> out;
  for (const auto& piece : pieces) {
    for (std::size_t i = out.empty() ? 0 : 1; i < piece.size(); ++i) out.push_back(piece[i]);
  }
  return out;
}

// Simplifies a cycle given without its closing repeat. `pinned` forces index 0.
std::vector<Point> simplify_cycle(const std::vector<Point>& cycle, bool pinned,
                                  const ff::FrameField& field, const PolygonizeConfig& cfg) {
  const std::size_t n = cycle.size();
  std::set<std::size_t> corners =
      detect_corners(cycle, field, cfg.corner_angle_thresh, true, cfg.eps_degenerate);
  if (pinned) corners.insert(0);
  if (corners.empty()) corners.insert(0);
  if (corners.size() == 1) {
    const std::size_t c = *corners.begin();
    corners.insert(farthest_from(cycle, cycle[c]));
  }
  const std::size_t shift = *corners.begin();
  std::vector<Point> open(n + 1);
  for (std::size_t i = 0; i < n; ++i) open[i] = cycle[(i + shift) % n];
  open[n] = open[0];
  std::set<std::size_t> shifted;
  for (std::size_t c : corners) shifted.insert((c + n - shift) % n);
  return join(split_and_simplify(open, shifted, cfg.rdp_tol));
}

std::vector<Chain> collect_chains(const SkeletonGraph& g, const ff::FrameField& field,
                                  const PolygonizeConfig& cfg) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, edge id)
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    adj[static_cast<std::size_t>(g.edges[e].first)].emplace_back(g.edges[e].second, static_cast<int>(e));
    adj[static_cast<std::size_t>(g.edges[e].second)].emplace_back(g.edges[e].first, static_cast<int>(e));
  }
  std::vector<bool> used(g.edges.size(), false);
  std::vector<Chain> chains;

  auto walk = [&](int start, int first_edge, int first_next, std::vector<int>& ids) {
    ids = {start};
    int prev_edge = first_edge, cur = first_next;
    used[static_cast<std::size_t>(first_edge)] = true;
    while (adj[static_cast<std::size_t>(cur)].size() == 2 && cur != start) {
      ids.push_back(cur);
      const auto& nb = adj[static_cast<std::size_t>(cur)];
      const auto& step = nb[0].second == prev_edge ? nb[1] : nb[0];
      used[static_cast<std::size_t>(step.second)] = true;
      prev_edge = step.second;
      cur = step.first;
    }
    ids.push_back(cur);
  };

  std::vector<int> ids;
  for (std::size_t k = 0; k < n; ++k) {
    if (adj[k].size() == 2 || adj[k].empty()) continue;
    for (const auto& [v, e] : adj[k]) {
      if (used[static_cast<std::size_t>(e)]) continue;
      walk(static_cast<int>(k), e, v, ids);
      Chain c;
      c.head = ids.front();
      c.tail = ids.back();
      const Point hp = g.nodes[static_cast<std::size_t>(ids.front())];
      const Point tp = g.nodes[static_cast<std::size_t>(ids.back())];
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const Point q = g.nodes[static_cast<std::size_t>(ids[i])];
        const bool interior = i > 0 && i + 1 < ids.size();
        if (interior && (distance(q, hp) < kJunctionMerge || distance(q, tp) < kJunctionMerge)) continue;
        c.raw.push_back(q);
      }
      if (c.head == c.tail) {
        const std::vector<Point> cycle(c.raw.begin(), c.raw.end() - 1);
        c.simplified = simplify_cycle(cycle, true, field, cfg);
      } else {
        const auto corners = detect_corners(c.raw, field, cfg.corner_angle_thresh, false, cfg.eps_degenerate);
        c.simplified = join(split_and_simplify(c.raw, corners, cfg.rdp_tol));
      }
      chains.push_back(std::move(c));
    }
  }
  // Cycles made only of degree-2 nodes.
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (used[e]) continue;
    walk(g.edges[e].first, static_cast<int>(e), g.edges[e].second, ids);
    Chain c;
    for (int id : ids) c.raw.push_back(g.nodes[static_cast<std::size_t>(id)]);
    const std::vector<Point> cycle(c.raw.begin(), c.raw.end() - 1);
    c.simplified = simplify_cycle(cycle, false, field, cfg);
    chains.push_back(std::move(c));
  }
  return chains;
}

struct Assembly {
  SkeletonGraph graph;
  std::vector<std::size_t> edge_chain;
};

Assembly assemble(const std::vector<Chain>& chains, const std::vector<int>& mode, std::size_t n_nodes) {
  // mode: 0 simplified, 1 raw, 2 dropped
  Assembly out;
  std::vector<int> key_id(n_nodes, -1);
  std::set<std::pair<int, int>> present;
  auto key_node = [&](int old, Point p) {
    auto& id = key_id[static_cast<std::size_t>(old)];
    if (id < 0) {
      id = static_cast<int>(out.graph.nodes.size());
      out.graph.nodes.push_back(p);
    }
    return id;
  };
  auto add_edge = [&](int a, int b, std::size_t chain) {
    if (a == b) return;
    if (!present.insert({std::min(a, b), std::max(a, b)}).second) return;
    out.graph.edges.emplace_back(a, b);
    out.edge_chain.push_back(chain);
  };
  for (std::size_t ci = 0; ci < chains.size(); ++ci) {
    if (mode[ci] == 2) continue;
    const Chain& c = chains[ci];
    std::vector<Point> line = mode[ci] == 1 ? c.raw : c.simplified;
    const bool closed = c.head < 0 || c.head == c.tail;

    // Parallel edges and collapsed loops need an interior vertex.
    const std::size_t distinct = closed ? line.size() - 1 : line.size();
    if (closed && distinct < 3) {
      line = c.raw;
    } else if (!closed && line.size() == 2) {
      const int a = key_id[static_cast<std::size_t>(c.head)];
      const int b = key_id[static_cast<std::size_t>(c.tail)];
      if (a >= 0 && b >= 0 && present.count({std::min(a, b), std::max(a, b)}) && c.raw.size() > 2) {
        std::size_t best = 1;
        double best_d = -1.0;
        for (std::size_t i = 1; i + 1 < c.raw.size(); ++i) {
          const double d = point_segment_distance(c.raw[i], c.raw.front(), c.raw.back());
          if (d > best_d) {
            best_d = d;
            best = i;
          }
        }
        line = {c.raw.front(), c.raw[best], c.raw.back()};
      }
    }

    std::vector<int> ids;
    const int first = c.head >= 0 ? key_node(c.head, line.front())
                                  : static_cast<int>(out.graph.nodes.size());
    if (c.head < 0) out.graph.nodes.push_back(line.front());
    ids.push_back(first);
    for (std::size_t i = 1; i + 1 < line.size(); ++i) {
      if (distance(line[i], out.graph.nodes[static_cast<std::size_t>(ids.back())]) <= kSamePoint) continue;
      ids.push_back(static_cast<int>(out.graph.nodes.size()));
      out.graph.nodes.push_back(line[i]);
    }
    const int last = closed ? first : key_node(c.tail, line.back());
    ids.push_back(last);
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) add_edge(ids[i], ids[i + 1], ci);
  }
  return out;
}

}  // namespace

SkeletonGraph simplify_graph(const SkeletonGraph& g, const ff::FrameField& field,
                             const PolygonizeConfig& cfg) {
  const std::vector<Chain> chains = collect_chains(g, field, cfg);
  std::vector<int> mode(chains.size(), 0);
  for (std::size_t guard = 0; guard <= 2 * chains.size(); ++guard) {
    Assembly a = assemble(chains, mode, g.nodes.size());
    const auto bad = find_crossing(a.graph);
    if (!bad) return std::move(a.graph);
    // Fall back to the unsimplified chain; drop it if even that crosses.
    for (std::size_t e : {bad->first, bad->second}) {
      const std::size_t c = a.edge_chain[e];
      mode[c] = std::min(mode[c] + 1, 2);
    }
  }
  return assemble(chains, mode, g.nodes.size()).graph;
}

std::vector<ScoredPolygon> polygonize(const ProbRaster& f_int, const ProbRaster& f_edge,
                                      const ff::FrameField& field, const PolygonizeConfig& cfg,
                                      PolygonizeTrace* trace) {
  cfg.validate();
  require_same_shape(f_int, f_edge, "polygonize");
  require_same_shape(f_edge, field.k0, "polygonize");
  field.validate();
  for (const ProbRaster* r : {&f_int, &f_edge}) {
    for (double v : r->values()) {
      if (!std::isfinite(v)) throw DomainError("polygonize: probability maps must be finite");
    }
  }

  BinaryRaster binary(f_edge.height(), f_edge.width(), 0);
  for (int y = 0; y < f_edge.height(); ++y)
    for (int x = 0; x < f_edge.width(); ++x) binary(y, x) = f_edge(y, x) >= cfg.edge_thresh ? 1 : 0;

  SkeletonGraph skeleton = skeletonize(binary);
  const SkeletonGraph core = prune_to_cycles(skeleton);
  AcmTrace acm_trace;
  const SkeletonGraph refined = acm_refine(core, f_int, f_edge, field, cfg.acm, &acm_trace);
  SkeletonGraph simplified = simplify_graph(refined, field, cfg);

  std::vector<ScoredPolygon> faces = extract_polygons(simplified, f_int);
  std::vector<ScoredPolygon> clean;
  for (ScoredPolygon& f : faces) {
    f.ring = remove_duplicate_vertices(std::move(f.ring), kSamePoint);
    if (is_valid_simple_ring(f.ring)) clean.push_back(std::move(f));
  }
  if (trace) {
    trace->skeleton = std::move(skeleton);
    trace->refined = refined;
    trace->simplified = std::move(simplified);
    trace->acm = std::move(acm_trace);
  }
  return filter_polygons(clean, cfg.min_prob, cfg.min_area);
}

}  // namespace densepoly::poly
