#include "densepoly/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "densepoly/parallel.hpp"

namespace densepoly::metrics {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, false>;  // counter-clockwise, open
using BgMulti = bg::model::multi_polygon<BgPolygon>;

const std::array<double, 10>& iou_thresholds() {
  static const std::array<double, 10> kTaus = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                0.75, 0.80, 0.85, 0.90, 0.95};
  return kTaus;
}

namespace {

BgPolygon to_bg(const Ring& ring, const char* which) {
  if (!is_valid_simple_ring(ring)) {
    throw DomainError(std::string("polygon_iou: ") + which + " polygon is degenerate or self-intersecting");
  }
  BgPolygon p;
  for (const Point& v : oriented_ccw(ring)) bg::append(p.outer(), BgPoint(v.x, v.y));
  return p;
}

double iou_bg(const BgPolygon& a, double area_a, const BgPolygon& b, double area_b) {
  BgMulti inter;
  bg::intersection(a, b, inter);
  const double i = bg::area(inter);
  const double u = area_a + area_b - i;
  if (!(u > 0.0)) return 0.0;
  return std::clamp(i / u, 0.0, 1.0);
}

std::vector<std::size_t> score_order(const std::vector<ScoredPolygon>& preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  return order;
}

double interpolated_ap(const std::vector<bool>& tp_in_order, std::size_t n_gts) {
  if (n_gts == 0) return tp_in_order.empty() ? 1.0 : 0.0;
  const std::size_t n = tp_in_order.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (tp_in_order[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gts);
  }
  // Precision envelope from the right.
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double sum = 0.0;
  std::size_t k = 0;
  for (int level = 0; level <= 100; ++level) {
    const double r = level / 100.0;
    while (k < n && recall[k] < r - 1e-12) ++k;
    if (k < n) sum += precision[k];
  }
  return sum / 101.0;
}

}  // namespace

double polygon_iou(const Ring& a, const Ring& b) {
  const BgPolygon pa = to_bg(a, "first");
  const BgPolygon pb = to_bg(b, "second");
  return iou_bg(pa, bg::area(pa), pb, bg::area(pb));
}

IouTable iou_table(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts) {
  std::vector<BgPolygon> gp;
  std::vector<double> ga;
  std::vector<BBox> gb;
  for (const Ring& g : gts) {
    gp.push_back(to_bg(g, "ground-truth"));
    ga.push_back(bg::area(gp.back()));
    gb.push_back(bbox(g));
  }
  IouTable table(preds.size());
  parallel_for(preds.size(), [&](std::size_t i) {
    const BgPolygon p = to_bg(preds[i].ring, "predicted");
    const double pa = bg::area(p);
    const BBox pbox = bbox(preds[i].ring);
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (!pbox.overlaps(gb[j])) continue;
      const double v = iou_bg(p, pa, gp[j], ga[j]);
      if (v > 0.0) table[i].emplace_back(j, v);
    }
  });
  return table;
}

MatchSet match_with_table(const std::vector<ScoredPolygon>& preds, std::size_t n_gts,
                          const IouTable& table, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError("match_instances: threshold must lie in (0, 1]");
  MatchSet ms;
  ms.threshold = tau;
  std::vector<bool> gt_used(n_gts, false);
  for (std::size_t i : score_order(preds)) {
    std::size_t best = n_gts;
    double best_iou = -1.0;
    for (const auto& [j, v] : table[i]) {
      if (gt_used[j] || v < tau) continue;
      if (v > best_iou || (v == best_iou && j < best)) {
        best_iou = v;
        best = j;
      }
    }
    if (best < n_gts) {
      gt_used[best] = true;
      ms.pairs.push_back({i, best, best_iou});
    } else {
      ms.unmatched_preds.push_back(i);
    }
  }
  std::sort(ms.unmatched_preds.begin(), ms.unmatched_preds.end());
  for (std::size_t j = 0; j < n_gts; ++j)
    if (!gt_used[j]) ms.unmatched_gts.push_back(j);
  return ms;
}

MatchSet match_instances(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts,
                         double tau) {
  return match_with_table(preds, gts.size(), iou_table(preds, gts), tau);
}

PrF1 pr_f1_at(const MatchSet& ms, std::size_t n_preds, std::size_t n_gts) {
  const std::size_t tp = ms.pairs.size();
  if (n_gts == 0 && tp > 0) throw ValidationError("pr_f1_at: matches reported without ground truth");
  if (tp > n_preds || tp > n_gts) throw ValidationError("pr_f1_at: more matches than instances");
  PrF1 r;
  r.precision = n_preds == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_preds);
  r.recall = n_gts == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(n_gts);
  const double s = r.precision + r.recall;
  r.f1 = s == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / s;
  return r;
}

double ap_at(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts, double tau) {
  const MatchSet ms = match_instances(preds, gts, tau);
  std::vector<bool> tp(preds.size(), false);
  for (const MatchPair& p : ms.pairs) tp[p.pred] = true;
  std::vector<bool> ordered;
  for (std::size_t i : score_order(preds)) ordered.push_back(tp[i]);
  return interpolated_ap(ordered, gts.size());
}

void MetricsReport::validate() const {
  const double named[] = {f1_50, f1_75, ap_50, ap_75, ar_50, ar_75, map, mar};
  for (double v : named) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("metrics report: value outside [0, 1]");
  }
  for (const ThresholdRow& r : per_threshold) {
    for (double v : {r.precision, r.recall, r.f1, r.ap}) {
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("metrics report: value outside [0, 1]");
    }
  }
}

MetricsReport evaluate_dataset(const std::vector<ImageInstances>& images) {
  std::vector<IouTable> tables;
  std::size_t n_preds = 0, n_gts = 0;
  // (score, image, pred) in pooled descending-score order.
  std::vector<std::tuple<double, std::size_t, std::size_t>> pooled;
  for (std::size_t im = 0; im < images.size(); ++im) {
    tables.push_back(iou_table(images[im].preds, images[im].gts));
    n_preds += images[im].preds.size();
    n_gts += images[im].gts.size();
    for (std::size_t i = 0; i < images[im].preds.size(); ++i) {
      pooled.emplace_back(images[im].preds[i].score, im, i);
    }
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });

  MetricsReport rep;
  for (double tau : iou_thresholds()) {
    std::vector<std::vector<bool>> tp(images.size());
    MatchSet total;
    total.threshold = tau;
    for (std::size_t im = 0; im < images.size(); ++im) {
      const MatchSet ms = match_with_table(images[im].preds, images[im].gts.size(), tables[im], tau);
      tp[im].assign(images[im].preds.size(), false);
      for (const MatchPair& p : ms.pairs) tp[im][p.pred] = true;
      total.pairs.insert(total.pairs.end(), ms.pairs.begin(), ms.pairs.end());
    }
    std::vector<bool> ordered;
    ordered.reserve(pooled.size());
    for (const auto& [s, im, i] : pooled) ordered.push_back(tp[im][i]);
    const PrF1 prf = pr_f1_at(total, n_preds, n_gts);
    rep.per_threshold.push_back({tau, prf.precision, prf.recall, prf.f1, interpolated_ap(ordered, n_gts)});
  }
  const auto& rows = rep.per_threshold;
  rep.f1_50 = rows[0].f1;
  rep.f1_75 = rows[5].f1;
  rep.ap_50 = rows[0].ap;
  rep.ap_75 = rows[5].ap;
  rep.ar_50 = rows[0].recall;
  rep.ar_75 = rows[5].recall;
  for (const ThresholdRow& r : rows) {
    rep.map += r.ap;
    rep.mar += r.recall;
  }
  rep.map /= static_cast<double>(rows.size());
  rep.mar /= static_cast<double>(rows.size());
  rep.validate();
  return rep;
}

MetricsReport evaluate(const std::vector<ScoredPolygon>& preds, const std::vector<Ring>& gts) {
  return evaluate_dataset({{preds, gts}});
}

}  // namespace densepoly::metrics
