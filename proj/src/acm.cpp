#include <algorithm>
#include <deque>
#include <cmath>
#include <string>

#include "densepoly/parallel.hpp"
#include "densepoly/polygonize.hpp"

namespace densepoly::poly {

void AcmParams::validate() const {
  if (!(lambda_data >= 0.0 && lambda_ff >= 0.0 && lambda_internal >= 0.0)) {
    throw DomainError("acm: weights must be non-negative");
  }
  if (lambda_data == 0.0 && lambda_ff == 0.0 && lambda_internal == 0.0) {
    throw DomainError("acm: at least one weight must be positive");
  }
  if (!(step0 > 0.0)) throw DomainError("acm: step0 must be positive");
  if (max_iters < 0) throw DomainError("acm: max_iters must be non-negative");
  if (!(tol > 0.0)) throw DomainError("acm: tol must be positive");
  if (max_halvings < 0) throw DomainError("acm: max_halvings must be non-negative");
}

namespace {

constexpr double kMinSegment = 1e-12;

double data_term(Point v, const ProbRaster& f_edge) { return 1.0 - sample_bilinear(f_edge, v.x, v.y); }

double field_term(Point a, Point b, const ff::FrameField& field) {
  const Point d = b - a;
  const double len = norm(d);
  if (len < kMinSegment) return 0.0;
  const Point mid = (a + b) * 0.5;
  const ff::FrameCoeffs c = field.sample(mid);
  const Complex t(d.x / len, d.y / len);
  const Complex u = t * t;  // e^{2 i theta}
  return std::norm(u * u + c.k1 * u + c.k0) * len;
}

}  // namespace

double acm_energy(const SkeletonGraph& g, const ProbRaster& f_edge, const ff::FrameField& field,
                  const AcmParams& p) {
  double e = 0.0;
  if (p.lambda_data != 0.0) {
    for (const Point& v : g.nodes) e += p.lambda_data * data_term(v, f_edge);
  }
  for (const auto& [ia, ib] : g.edges) {
    const Point a = g.nodes[static_cast<std::size_t>(ia)];
    const Point b = g.nodes[static_cast<std::size_t>(ib)];
    if (p.lambda_ff != 0.0) e += p.lambda_ff * field_term(a, b, field);
    const Point d = b - a;
    e += p.lambda_internal * dot(d, d);
  }
  return e;
}

namespace {

// Adds the gradient of one edge's field and internal terms to both ends.
void edge_gradient(Point a, Point b, const ff::FrameField& field, const AcmParams& p, Point& ga,
                   Point& gb) {
  const Point d = b - a;
  gb = gb + d * (2.0 * p.lambda_internal);
  ga = ga - d * (2.0 * p.lambda_internal);
  const double len = norm(d);
  if (p.lambda_ff == 0.0 || len < kMinSegment) return;
  const Point mid = (a + b) * 0.5;
  const auto k0 = sample_bilinear_with_gradient(field.k0, mid.x, mid.y);
  const auto k1 = sample_bilinear_with_gradient(field.k1, mid.x, mid.y);
  const Complex t(d.x / len, d.y / len);
  const Complex u = t * t;
  const Complex poly = u * u + k1.value * u + k0.value;
  const double energy = std::norm(poly);
  const Complex dpoly_dtheta = (2.0 * u + k1.value) * Complex(0.0, 2.0) * u;
  const double de_dtheta = 2.0 * std::real(std::conj(poly) * dpoly_dtheta);
  const double de_dmx = 2.0 * std::real(std::conj(poly) * (k1.ddx * u + k0.ddx));
  const double de_dmy = 2.0 * std::real(std::conj(poly) * (k1.ddy * u + k0.ddy));
  // d theta / d b = (-dy, dx) / len^2; d len / d b = d / len.
  const Point rot = Point{-d.y, d.x} * (de_dtheta / len);
  const Point stretch = d * (energy / len);
  const Point shift = Point{de_dmx, de_dmy} * (0.5 * len);
  gb = gb + (rot + stretch + shift) * p.lambda_ff;
  ga = ga + (shift - rot - stretch) * p.lambda_ff;
}

Point data_gradient(Point v, const ProbRaster& f_edge, const AcmParams& p) {
  if (p.lambda_data == 0.0) return {};
  const auto s = sample_bilinear_with_gradient(f_edge, v.x, v.y);
  return Point{-s.ddx, -s.ddy} * p.lambda_data;
}


}  // namespace

std::vector<Point> acm_gradient(const SkeletonGraph& g, const ProbRaster& f_edge,
                                const ff::FrameField& field, const AcmParams& p) {
  std::vector<Point> grad(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) grad[i] = data_gradient(g.nodes[i], f_edge, p);
  for (const auto& [ia, ib] : g.edges) {
    const auto a = static_cast<std::size_t>(ia), b = static_cast<std::size_t>(ib);
    edge_gradient(g.nodes[a], g.nodes[b], field, p, grad[a], grad[b]);
  }
  return grad;
}

namespace {

[[noreturn]] void report_nan(const SkeletonGraph& g, const std::vector<int>& global_ids,
                             const ProbRaster& f_edge, const ff::FrameField& field,
                             const AcmParams& p) {
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Point v = g.nodes[i];
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(data_term(v, f_edge))) {
      throw DomainError("acm: energy is NaN at node " + std::to_string(global_ids[i]));
    }
  }
  for (const auto& [a, b] : g.edges) {
    const double t = field_term(g.nodes[static_cast<std::size_t>(a)], g.nodes[static_cast<std::size_t>(b)], field);
    if (!std::isfinite(t * p.lambda_ff)) {
      throw DomainError("acm: energy is NaN at node " + std::to_string(global_ids[static_cast<std::size_t>(a)]));
    }
  }
  throw DomainError("acm: energy is NaN at node " + std::to_string(global_ids.empty() ? -1 : global_ids[0]));
}

struct Component {
  std::vector<int> ids;  // global node ids, ascending
  SkeletonGraph graph;
};

std::vector<Component> split_components(const SkeletonGraph& g) {
  const auto adj = g.adjacency();
  std::vector<int> comp(g.nodes.size(), -1);
  std::vector<Component> out;
  for (std::size_t s = 0; s < g.nodes.size(); ++s) {
    if (comp[s] >= 0) continue;
    const int c = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack = {static_cast<int>(s)};
    comp[s] = c;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      out.back().ids.push_back(u);
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = c;
          stack.push_back(v);
        }
      }
    }
  }
  std::vector<int> local(g.nodes.size(), -1);
  for (Component& c : out) {
    std::sort(c.ids.begin(), c.ids.end());
    for (std::size_t i = 0; i < c.ids.size(); ++i) {
      local[static_cast<std::size_t>(c.ids[i])] = static_cast<int>(i);
      c.graph.nodes.push_back(g.nodes[static_cast<std::size_t>(c.ids[i])]);
    }
  }
  for (const auto& [a, b] : g.edges) {
    out[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])].graph.edges.emplace_back(
        local[static_cast<std::size_t>(a)], local[static_cast<std::size_t>(b)]);
  }
  return out;
}

// Limited-memory quasi-Newton descent on one component. Each trial step is halved until
// the energy decreases; no node moves farther than step0 in one iteration.
std::vector<double> descend(SkeletonGraph& g, const std::vector<int>& ids, const ProbRaster& f_edge,
                            const ff::FrameField& field, const AcmParams& p, int& iterations) {
  constexpr std::size_t kMemory = 8;
  const double max_x = f_edge.width(), max_y = f_edge.height();
  const std::size_t n = g.nodes.size();

  auto dotv = [](const std::vector<Point>& u, const std::vector<Point>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += dot(u[i], v[i]);
    return s;
  };

  double energy = acm_energy(g, f_edge, field, p);
  if (!std::isfinite(energy)) report_nan(g, ids, f_edge, field, p);
  std::vector<double> history = {energy};
  std::vector<Point> grad = acm_gradient(g, f_edge, field, p);
  std::deque<std::vector<Point>> s_hist, y_hist;
  std::deque<double> rho_hist;
  iterations = 0;

  SkeletonGraph trial = g;
  for (int it = 0; it < p.max_iters; ++it) {
    // Two-loop recursion for the search direction.
    std::vector<Point> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = grad[i] * -1.0;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dotv(s_hist[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] = d[i] - y_hist[k][i] * alpha[k];
    }
    if (!s_hist.empty()) {
      const double gamma = dotv(s_hist.back(), y_hist.back()) / dotv(y_hist.back(), y_hist.back());
      for (Point& v : d) v = v * gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dotv(y_hist[k], d);
      for (std::size_t i = 0; i < n; ++i) d[i] = d[i] + s_hist[k][i] * (alpha[k] - beta);
    }
    if (!(dotv(d, grad) < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = grad[i] * -1.0;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    double longest = 0.0;
    for (const Point& v : d) longest = std::max(longest, norm(v));
    if (longest == 0.0) break;
    double t = (s_hist.empty() ? p.step0 : std::min(1.0 * longest, p.step0)) / longest;

    bool accepted = false;
    double e1 = energy;
    for (int halving = 0; halving <= p.max_halvings; ++halving, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) {
        const Point q = g.nodes[i] + d[i] * t;
        trial.nodes[i] = {std::clamp(q.x, 0.0, max_x), std::clamp(q.y, 0.0, max_y)};
      }
      e1 = acm_energy(trial, f_edge, field, p);
      if (std::isnan(e1)) report_nan(trial, ids, f_edge, field, p);
      if (e1 < energy) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    double moved = 0.0;
    std::vector<Point> step(n);
    for (std::size_t i = 0; i < n; ++i) {
      step[i] = trial.nodes[i] - g.nodes[i];
      moved = std::max(moved, norm(step[i]));
    }
    std::swap(g.nodes, trial.nodes);
    std::vector<Point> next_grad = acm_gradient(g, f_edge, field, p);
    std::vector<Point> dg(n);
    for (std::size_t i = 0; i < n; ++i) dg[i] = next_grad[i] - grad[i];
    const double sy = dotv(step, dg);
    if (sy > 1e-12 * std::sqrt(dotv(step, step) * dotv(dg, dg))) {
      s_hist.push_back(std::move(step));
      y_hist.push_back(std::move(dg));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    grad = std::move(next_grad);
    energy = e1;
    ++iterations;
    history.push_back(energy);
    if (moved < p.tol) break;
  }
  return history;
}

}  // namespace

SkeletonGraph acm_refine(const SkeletonGraph& g, const ProbRaster& f_int, const ProbRaster& f_edge,
                         const ff::FrameField& field, const AcmParams& p, AcmTrace* trace) {
  p.validate();
  require_same_shape(f_int, f_edge, "acm_refine");
  require_same_shape(f_edge, field.k0, "acm_refine");
  require_same_shape(field.k0, field.k1, "acm_refine");
  for (const Point& v : g.nodes) {
    if (!(v.x >= 0.0 && v.y >= 0.0 && v.x <= f_edge.width() && v.y <= f_edge.height())) {
      throw DomainError("acm_refine: graph node outside the raster");
    }
  }
  SkeletonGraph out = g;
  if (trace) *trace = {};
  if (p.max_iters == 0 || g.nodes.empty()) {
    if (trace && !g.nodes.empty()) trace->energies.push_back({acm_energy(g, f_edge, field, p)});
    return out;
  }

  std::vector<Component> comps = split_components(g);
  std::vector<std::vector<double>> histories(comps.size());
  std::vector<int> iterations(comps.size(), 0);
  parallel_for(comps.size(), [&](std::size_t c) {
    histories[c] = descend(comps[c].graph, comps[c].ids, f_edge, field, p, iterations[c]);
  });
  for (const Component& c : comps) {
    for (std::size_t i = 0; i < c.ids.size(); ++i) {
      out.nodes[static_cast<std::size_t>(c.ids[i])] = c.graph.nodes[i];
    }
  }
  if (trace) {
    trace->energies = std::move(histories);
    trace->iterations = iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
  }
  return out;
}

}  // namespace densepoly::poly
