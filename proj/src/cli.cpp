#include "densepoly/cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "densepoly/config.hpp"
#include "densepoly/io.hpp"
#include "densepoly/losses.hpp"
#include "densepoly/metrics.hpp"
#include "densepoly/parallel.hpp"
#include "densepoly/polygonize.hpp"
#include "densepoly/synth.hpp"

namespace densepoly::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void emit_json(const Json& doc, const std::string& path, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    io::write_file_atomic(path, text);
  }
}

// ---------------------------------------------------------------------------

struct GenSynthFlags {
  std::string out_dir;
};

void gen_synth(const PipelineConfig& cfg, const GenSynthFlags& flags) {
  const synth::SceneConfig& sc = cfg.synth;
  const std::vector<Ring> polygons = synth::generate_scene(sc);
  const synth::GroundTruth gt = synth::rasterize(polygons, sc);

  const fs::path dir(flags.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  std::vector<io::Feature> features;
  for (const Ring& r : polygons) features.push_back({r, std::nullopt});
  io::write_geojson(dir / "gt.geojson", features);
  io::write_raster(dir / "y_int.pmap", gt.y_int);
  io::write_raster(dir / "y_edge.pmap", gt.y_edge);
  io::write_raster(dir / "ff.ffld", gt.ff_gt);

  if (sc.noise_sigma > 0.0 || sc.blur_radius > 0.0) {
    const synth::Degraded d = synth::corrupt(gt, sc);
    io::write_raster(dir / "f_int.pmap", d.f_int);
    io::write_raster(dir / "f_edge.pmap", d.f_edge);
    io::write_raster(dir / "f_ff.ffld", d.ff);
  }
}

// ---------------------------------------------------------------------------

struct PolygonizeFlags {
  std::string interior, edge, framefield, out;
};

void run_polygonize(const PipelineConfig& cfg, const PolygonizeFlags& flags) {
  const ProbRaster f_int = io::read_prob_raster(flags.interior);
  const ProbRaster f_edge = io::read_prob_raster(flags.edge);
  const ff::FrameField field = io::read_frame_field(flags.framefield);
  if (!f_int.same_shape(f_edge) || !f_edge.same_shape(field.k0)) {
    throw ValidationError("polygonize: interior, edge and frame-field rasters differ in size");
  }
  const std::vector<poly::ScoredPolygon> polys = poly::polygonize(f_int, f_edge, field, cfg.polygonize);
  std::vector<io::Feature> features;
  for (const poly::ScoredPolygon& p : polys) features.push_back({p.ring, p.score});
  io::write_geojson(flags.out, features);
}

// ---------------------------------------------------------------------------

struct EvaluateFlags {
  std::string pred, gt, report;
};

Json report_json(const metrics::MetricsReport& r) {
  Json doc = {{"f1_50", r.f1_50}, {"f1_75", r.f1_75}, {"ap_50", r.ap_50}, {"ap_75", r.ap_75},
              {"ar_50", r.ar_50}, {"ar_75", r.ar_75}, {"map", r.map},     {"mar", r.mar}};
  Json rows = Json::array();
  for (const metrics::ThresholdRow& row : r.per_threshold) {
    rows.push_back({{"threshold", row.threshold},
                    {"precision", row.precision},
                    {"recall", row.recall},
                    {"f1", row.f1},
                    {"ap", row.ap}});
  }
  doc["per_threshold"] = rows;
  return doc;
}

void run_evaluate(const EvaluateFlags& flags, std::ostream& out) {
  std::vector<poly::ScoredPolygon> preds;
  for (io::Feature& f : io::read_geojson(flags.pred)) preds.push_back({std::move(f.ring), f.score.value_or(1.0)});
  std::vector<Ring> gts;
  for (io::Feature& f : io::read_geojson(flags.gt)) gts.push_back(std::move(f.ring));
  emit_json(report_json(metrics::evaluate(preds, gts)), flags.report, out);
}

// ---------------------------------------------------------------------------

struct LossesFlags {
  std::string pred_int, pred_edge, pred_ff, gt_dir, report;
  double sigma = 0.0;
  bool optimal = false;
  bool check_grad = false;
};

Json run_grad_checks(const PipelineConfig& cfg, const ProbRaster& f_int, const ProbRaster& f_edge,
                     const ff::FrameField& field, const ProbRaster& y_int, const ProbRaster& y_edge,
                     const Raster<double>& tang, const ProbRaster& weight) {
  const losses::LossParams& lp = cfg.losses.params;
  const int h = f_int.height(), w = f_int.width();
  // Central differences need room on both sides of a probability.
  const double margin = 2.0 * cfg.gradcheck.step;
  auto interior_point = [margin](const ProbRaster& r) {
    std::vector<double> v(r.values().begin(), r.values().end());
    for (double& x : v) x = std::clamp(x, margin, 1.0 - margin);
    return v;
  };
  const std::vector<double> p_int = interior_point(f_int);
  const std::vector<double> p_edge = interior_point(f_edge);
  const std::vector<double> p_field = losses::flatten_field(field);
  std::vector<double> p_both = p_int;
  p_both.insert(p_both.end(), p_edge.begin(), p_edge.end());

  const std::vector<std::tuple<std::string, losses::DifferentiableLoss, const std::vector<double>*>> cases = {
      {"l_int.bce", losses::bce_target(y_int, &weight, lp.clamp_eps), &p_int},
      {"l_int.dice", losses::dice_target(y_int, lp.smooth_eps), &p_int},
      {"l_edge", losses::combined_seg_target(y_edge, lp.seg_mix), &p_edge},
      {"l_align", losses::align_target(tang, y_edge), &p_field},
      {"l_align90", losses::align90_target(tang, y_edge), &p_field},
      {"l_smooth", losses::smooth_target(h, w), &p_field},
      {"l_int_align.field", losses::mask_align_field_target(f_int, lp.grad_eps), &p_field},
      {"l_int_align.mask", losses::mask_align_mask_target(field, lp.grad_eps), &p_int},
      {"l_edge_align.field", losses::mask_align_field_target(f_edge, lp.grad_eps), &p_field},
      {"l_edge_align.mask", losses::mask_align_mask_target(field, lp.grad_eps), &p_edge},
      {"l_int_edge", losses::int_edge_target(h, w), &p_both},
  };
  Json rows = Json::array();
  for (const auto& [name, loss, point] : cases) {
    const losses::GradCheckReport r = losses::finite_diff_grad_check(
        loss, *point, cfg.gradcheck.step, cfg.gradcheck.seed, static_cast<std::size_t>(cfg.gradcheck.probes));
    rows.push_back({{"loss", name},
                    {"max_rel_error", r.max_rel_error},
                    {"checked", r.checked},
                    {"skipped", r.skipped}});
  }
  return rows;
}

void run_losses(const PipelineConfig& cfg, const LossesFlags& flags, std::ostream& out) {
  const ProbRaster f_int = io::read_prob_raster(flags.pred_int);
  const ProbRaster f_edge = io::read_prob_raster(flags.pred_edge);
  const ff::FrameField field = io::read_frame_field(flags.pred_ff);
  const fs::path dir(flags.gt_dir);
  const ProbRaster y_int = io::read_prob_raster(dir / "y_int.pmap");
  const ProbRaster y_edge = io::read_prob_raster(dir / "y_edge.pmap");
  std::vector<Ring> polygons;
  for (io::Feature& f : io::read_geojson(dir / "gt.geojson")) polygons.push_back(std::move(f.ring));

  for (const ProbRaster* r : {&f_edge, &y_int, &y_edge}) {
    if (!r->same_shape(f_int)) throw ValidationError("losses: prediction and ground-truth rasters differ in size");
  }
  if (!field.k0.same_shape(f_int)) throw ValidationError("losses: frame field and rasters differ in size");
  const int h = f_int.height(), w = f_int.width();

  // Tangent angles are not stored on disk; rebuild them from the polygons.
  synth::SceneConfig sc = cfg.synth;
  sc.height = h;
  sc.width = w;
  const Raster<double> tang = synth::rasterize(polygons, sc).tang;
  const ProbRaster weight =
      losses::distance_weight_map(polygons, h, w, cfg.losses.weight_w0, cfg.losses.weight_sigma);

  const losses::LossInputs in{f_int, f_edge, field, y_int, y_edge, tang, &weight};
  const losses::LossComponents lc = losses::compute_components(in, cfg.losses.params);
  const double sigma = flags.optimal ? losses::optimal_sigma(lc) : flags.sigma;

  Json doc = {{"components",
               {{"l_int", lc.l_int},
                {"l_edge", lc.l_edge},
                {"l_align", lc.l_align},
                {"l_align90", lc.l_align90},
                {"l_smooth", lc.l_smooth},
                {"l_int_align", lc.l_int_align},
                {"l_edge_align", lc.l_edge_align},
                {"l_int_edge", lc.l_int_edge}}},
              {"sigma", sigma},
              {"sigma_source", flags.optimal ? "optimal" : "given"},
              {"total", losses::total_loss(lc, sigma)}};
  if (flags.check_grad) {
    doc["grad_check"] = run_grad_checks(cfg, f_int, f_edge, field, y_int, y_edge, tang, weight);
  }
  emit_json(doc, flags.report, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polygonal building extraction from interior, edge and frame-field rasters.", "densepoly"};
  app.require_subcommand(1);
  app.fallthrough();

  unsigned threads = 0;
  std::string config_path;
  app.add_option("--threads", threads, "Worker threads; 0 uses every hardware thread");
  app.add_option("--config", config_path, "key = value file of pipeline settings");

  // gen-synth
  CLI::App* gen = app.add_subcommand("gen-synth", "Generate a synthetic dense scene and its rasters");
  GenSynthFlags gen_flags;
  std::uint64_t seed = 0;
  int width = 0, height = 0;
  double density = 0.0, noise = 0.0, blur = 0.0;
  auto* o_seed = gen->add_option("--seed", seed);
  auto* o_width = gen->add_option("--width", width);
  auto* o_height = gen->add_option("--height", height);
  auto* o_density = gen->add_option("--density", density);
  auto* o_noise = gen->add_option("--noise-sigma", noise);
  auto* o_blur = gen->add_option("--blur", blur, "Gaussian blur sigma in pixels");
  gen->add_option("--out-dir", gen_flags.out_dir)->required();

  // polygonize
  CLI::App* pol = app.add_subcommand("polygonize", "Extract polygons from a prediction triple");
  PolygonizeFlags pol_flags;
  double min_prob = 0.0, tol = 0.0;
  pol->add_option("--interior", pol_flags.interior)->required();
  pol->add_option("--edge", pol_flags.edge)->required();
  pol->add_option("--framefield", pol_flags.framefield)->required();
  auto* o_min_prob = pol->add_option("--min-prob", min_prob);
  auto* o_tol = pol->add_option("--tol", tol, "Simplification tolerance in pixels");
  pol->add_option("--out", pol_flags.out)->required();

  // evaluate
  CLI::App* ev = app.add_subcommand("evaluate", "Score predicted polygons against ground truth");
  EvaluateFlags ev_flags;
  ev->add_option("--pred", ev_flags.pred)->required();
  ev->add_option("--gt", ev_flags.gt)->required();
  ev->add_option("--report", ev_flags.report, "Output JSON path; standard output when omitted");

  // losses
  CLI::App* lo = app.add_subcommand("losses", "Evaluate the training losses on a prediction triple");
  LossesFlags lo_flags;
  lo->add_option("--pred-int", lo_flags.pred_int)->required();
  lo->add_option("--pred-edge", lo_flags.pred_edge)->required();
  lo->add_option("--pred-ff", lo_flags.pred_ff)->required();
  lo->add_option("--gt-dir", lo_flags.gt_dir, "Directory written by gen-synth")->required();
  auto* o_sigma = lo->add_option("--sigma", lo_flags.sigma);
  auto* o_opt = lo->add_flag("--optimal-sigma", lo_flags.optimal, "Use the closed-form optimal sigma (default)");
  o_sigma->excludes(o_opt);
  lo->add_flag("--check-grad", lo_flags.check_grad, "Run finite-difference gradient checks");
  lo->add_option("--report", lo_flags.report, "Output JSON path; standard output when omitted");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    set_thread_count(threads);
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (o_seed->count()) cfg.synth.seed = seed;
    if (o_width->count()) cfg.synth.width = width;
    if (o_height->count()) cfg.synth.height = height;
    if (o_density->count()) cfg.synth.target_density = density;
    if (o_noise->count()) cfg.synth.noise_sigma = noise;
    if (o_blur->count()) cfg.synth.blur_radius = blur;
    if (o_min_prob->count()) cfg.polygonize.min_prob = min_prob;
    if (o_tol->count()) cfg.polygonize.rdp_tol = tol;
    cfg.validate();

    if (gen->parsed()) {
      gen_synth(cfg, gen_flags);
    } else if (pol->parsed()) {
      run_polygonize(cfg, pol_flags);
    } else if (ev->parsed()) {
      run_evaluate(ev_flags, out);
    } else if (lo->parsed()) {
      if (!lo_flags.optimal && !o_sigma->count()) lo_flags.optimal = true;
      if (!lo_flags.optimal && !(lo_flags.sigma > 0.0 && std::isfinite(lo_flags.sigma))) {
        throw ValidationError("losses: --sigma must be positive");
      }
      run_losses(cfg, lo_flags, out);
    }
  } catch (const IoError& e) {
    err << "densepoly: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "densepoly: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    err << "densepoly: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitOk;
}

}  // namespace densepoly::cli
