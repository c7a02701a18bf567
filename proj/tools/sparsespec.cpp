#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "report.hpp"
#include "sparsespec/band_eval.hpp"
#include "sparsespec/binarize.hpp"
#include "sparsespec/ink.hpp"
#include "sparsespec/io.hpp"
#include "sparsespec/model_search.hpp"
#include "sparsespec/parallel.hpp"
#include "sparsespec/synth.hpp"
#include "sparsespec/version.hpp"

namespace fs = std::filesystem;
using namespace sparsespec;
using sparsespec::cli::Json;
using sparsespec::cli::Manifest;
using sparsespec::cli::UsageError;
using sparsespec::cli::to_json;

namespace {

struct Global {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

// ---------------------------------------------------------------------------
// Shared option groups

struct MatrixInput {
  std::string data;
  std::string cube;
  Index patch = 0;
  Index group_size = 1;
  std::vector<Index> group_sizes;

  void add(CLI::App* app) {
    auto* d = app->add_option("--data", data, "CSV observation matrix (rows = samples)");
    auto* c = app->add_option("--cube", cube, "Cube file sampled into patches");
    app->add_option("--patch", patch, "Patch side for --cube")->check(CLI::PositiveNumber);
    app->add_option("--group-size", group_size, "Columns per group for --data")
        ->check(CLI::PositiveNumber);
    app->add_option("--group-sizes", group_sizes, "Explicit contiguous group sizes for --data")
        ->delimiter(',');
    d->excludes(c);
  }

  bool given() const { return !data.empty() || !cube.empty(); }

  void record(Json& params) const {
    if (!data.empty()) {
      params["data"] = data;
      if (group_sizes.empty()) params["group_size"] = group_size;
      else params["group_sizes"] = to_json(group_sizes);
    } else {
      params["cube"] = cube;
      params["patch"] = patch;
    }
  }

  // Raw (uncentered) rows and their group structure.
  std::pair<Eigen::MatrixXd, GroupStructure> load(Manifest& m, const std::string& role) const {
    if (!cube.empty()) {
      if (patch <= 0) throw UsageError("--cube needs --patch");
      m.input(role, cube);
      const HyperspectralCube c = io::load_cube(cube);
      return {patch_matrix(c, patch), GroupStructure::uniform(c.bands(), patch * patch)};
    }
    if (data.empty()) throw UsageError("one of --data or --cube is required");
    m.input(role, data);
    Eigen::MatrixXd raw = io::load_matrix_csv(data);
    GroupStructure groups;
    if (!group_sizes.empty()) {
      groups = GroupStructure::contiguous(group_sizes);
    } else {
      if (raw.cols() % group_size != 0) {
        throw DataError("column count is not a multiple of --group-size");
      }
      groups = GroupStructure::uniform(raw.cols() / group_size, group_size);
    }
    groups.validate(raw.cols());
    return {std::move(raw), std::move(groups)};
  }
};

struct FitOptions {
  std::string algorithm = "jgspca";
  Index k = 0;
  int outer_max = 100;
  double epsilon = 1e-6;
  int inner_max_iters = 500;
  double inner_tol = 1e-7;
  bool spca_l0 = false;

  void add(CLI::App* app) {
    app->add_option("--algorithm", algorithm, "spca | gspca | jspca | jgspca")
        ->check(CLI::IsMember({"spca", "gspca", "jspca", "jgspca"}, CLI::ignore_case));
    app->add_option("--k", k, "Basis width (0 = p)")->check(CLI::NonNegativeNumber);
    app->add_option("--outer-max", outer_max, "Alternation steps")->check(CLI::PositiveNumber);
    app->add_option("--epsilon", epsilon, "Alternation stop on ||B - B_prev||_F");
    app->add_option("--inner-max-iters", inner_max_iters, "Proximal gradient iterations")
        ->check(CLI::PositiveNumber);
    app->add_option("--inner-tol", inner_tol, "Proximal gradient relative tolerance");
    app->add_flag("--spca-l0", spca_l0, "Exact l0 penalty for spca");
  }

  AlternationConfig config() const {
    AlternationConfig c;
    c.k = k;
    c.outer_max = outer_max;
    c.epsilon = epsilon;
    c.inner.max_iters = inner_max_iters;
    c.inner.rel_tol = inner_tol;
    c.spca_l0 = spca_l0;
    return c;
  }

  void record(Json& params) const {
    params["algorithm"] = std::string(to_string(parse_algorithm(algorithm)));
    params["k"] = k;
    params["outer_max"] = outer_max;
    params["epsilon"] = epsilon;
    params["inner_max_iters"] = inner_max_iters;
    params["inner_tol"] = inner_tol;
    params["spca_l0"] = spca_l0;
  }
};

struct BinarizeOptions {
  std::string method = "sauvola";
  std::string form = "standard";
  int window = 32;
  double kappa = 0.15;
  double r_scale = 128.0;
  std::optional<Index> mask_band;
  double blank_std = 2.0;

  void add(CLI::App* app) {
    app->add_option("--method", method, "sauvola | otsu")->check(CLI::IsMember({"sauvola", "otsu"}));
    app->add_option("--sauvola-form", form, "standard | literal")
        ->check(CLI::IsMember({"standard", "literal"}));
    app->add_option("--window", window, "Sauvola window side (even values round up)");
    app->add_option("--kappa", kappa, "Sauvola kappa");
    app->add_option("--r-scale", r_scale, "Sauvola dynamic range R");
    app->add_option("--mask-band", mask_band, "Band to threshold (default: automatic)");
    app->add_option("--blank-std", blank_std, "Pages below this global std are blank");
  }

  BinarizationParams params() const {
    BinarizationParams p;
    p.method = parse_threshold_method(method);
    p.form = parse_sauvola_form(form);
    p.window = window;
    p.kappa = kappa;
    p.r_scale = r_scale;
    p.mask_band = mask_band;
    p.blank_std = blank_std;
    p.validate();
    return p;
  }

  void record(Json& params) const {
    params["method"] = method;
    params["sauvola_form"] = form;
    params["window"] = window;
    params["kappa"] = kappa;
    params["r_scale"] = r_scale;
    params["mask_band"] = mask_band ? Json(*mask_band) : Json(nullptr);
    params["blank_std"] = blank_std;
  }
};

Json basis_summary(const SparseBasis& b, double zero_tol) {
  Json j;
  j["algorithm"] = std::string(to_string(b.algorithm));
  j["lambda"] = b.lambda;
  j["p"] = b.p();
  j["k"] = b.k();
  j["num_groups"] = b.groups.num_groups();
  j["cardinality"] = group_cardinality(b.B, b.groups, zero_tol);
  j["active_groups"] = to_json(active_groups(b.B, b.groups, zero_tol));
  j["nonzeros"] = static_cast<Index>((b.B.array().abs() > zero_tol * (1.0 + b.B.norm())).count());
  j["converged"] = b.converged;
  j["iterations"] = b.iterations_used;
  j["objective"] = b.objective_history.empty() ? 0.0 : b.objective_history.back();
  j["orthonormality_error"] = orthonormality_error(b.A);
  return j;
}

// ---------------------------------------------------------------------------
// synth

struct SynthCmd {
  std::string kind = "group-lowrank";
  Index n = 60;
  Index groups = 8;
  Index group_size = 3;
  std::vector<Index> active{0, 1};
  double sigma = 0.01;
  Index latent_rank = 2;
  bool independent_latents = false;
  Index n_per_ink = 100;
  Index bands = 16;
  Index separable_band = 6;
  double gap = 0.5;
  Index width = 160;
  Index height = 160;
  int strokes = 24;
  int inks = 2;
  std::string data_out, labels_out, cube_out, truth_out;

  void add(CLI::App* app) {
    app->add_option("--kind", kind, "group-lowrank | ink-scene | ink-page | scene-cube")
        ->check(CLI::IsMember({"group-lowrank", "ink-scene", "ink-page", "scene-cube"}));
    app->add_option("--n", n, "Rows (group-lowrank)")->check(CLI::PositiveNumber);
    app->add_option("--groups", groups, "Groups (group-lowrank)")->check(CLI::PositiveNumber);
    app->add_option("--group-size", group_size, "Columns per group")->check(CLI::PositiveNumber);
    app->add_option("--active", active, "Active groups or bands, 0-based")->delimiter(',');
    app->add_option("--sigma", sigma, "Noise standard deviation");
    app->add_option("--latent-rank", latent_rank, "Latent rank (group-lowrank)");
    app->add_flag("--independent-latents", independent_latents,
                  "Separate latent factors per active group");
    app->add_option("--n-per-ink", n_per_ink, "Spectra per ink (ink-scene)");
    app->add_option("--bands", bands, "Spectral bands")->check(CLI::PositiveNumber);
    app->add_option("--separable-band", separable_band, "Band where the inks differ");
    app->add_option("--gap", gap, "Ink contrast at the separable band");
    app->add_option("--width", width, "Image width")->check(CLI::PositiveNumber);
    app->add_option("--height", height, "Image height")->check(CLI::PositiveNumber);
    app->add_option("--strokes", strokes, "Pen strokes (ink-page)");
    app->add_option("--inks", inks, "Number of inks (ink-page)");
    app->add_option("--data-out", data_out, "CSV matrix or spectra output");
    app->add_option("--labels-out", labels_out, "CSV labels output (ink-scene)");
    app->add_option("--cube-out", cube_out, "Cube output (ink-page, scene-cube)");
    app->add_option("--truth-out", truth_out, "PGM ground truth output (ink-page)");
  }

  Json run(Manifest& m, const Global& g) const {
    Json& p = m.params();
    p["kind"] = kind;
    Json r;
    r["kind"] = kind;
    if (kind == "group-lowrank") {
      if (data_out.empty()) throw UsageError("group-lowrank needs --data-out");
      GroupLowRankOptions o;
      o.latent_rank = latent_rank;
      o.independent_latents = independent_latents;
      const GroupStructure gs = GroupStructure::uniform(groups, group_size);
      const DataMatrix X = synth_group_lowrank(n, gs, active, sigma, g.seed, o);
      io::save_matrix_csv(data_out, X.values);
      p.update({{"n", n}, {"groups", groups}, {"group_size", group_size}, {"active", to_json(active)},
                {"sigma", sigma}, {"latent_rank", latent_rank},
                {"independent_latents", independent_latents}, {"data_out", data_out}});
      m.output("data", data_out);
      r["rows"] = X.rows();
      r["cols"] = X.cols();
      std::vector<Index> sorted = active;
      std::sort(sorted.begin(), sorted.end());
      r["active_groups"] = to_json(sorted);
    } else if (kind == "ink-scene") {
      if (data_out.empty() || labels_out.empty()) {
        throw UsageError("ink-scene needs --data-out and --labels-out");
      }
      const LabeledSpectra s = synth_ink_scene(n_per_ink, bands, separable_band, gap, sigma, g.seed);
      io::save_matrix_csv(data_out, s.spectra);
      io::save_labels_csv(labels_out, s.labels);
      p.update({{"n_per_ink", n_per_ink}, {"bands", bands}, {"separable_band", separable_band},
                {"gap", gap}, {"sigma", sigma}, {"data_out", data_out}, {"labels_out", labels_out}});
      m.output("data", data_out);
      m.output("labels", labels_out);
      r["rows"] = s.spectra.rows();
      r["bands"] = bands;
    } else if (kind == "ink-page") {
      if (cube_out.empty() || truth_out.empty()) {
        throw UsageError("ink-page needs --cube-out and --truth-out");
      }
      PageOptions o;
      o.width = width;
      o.height = height;
      o.bands = bands;
      o.strokes = strokes;
      o.num_inks = inks;
      o.separable_band = separable_band;
      o.gap = gap;
      o.seed = g.seed;
      const InkPage page = synth_ink_page(o);
      io::save_cube(cube_out, page.cube);
      io::save_pgm(truth_out, page.truth);
      p.update({{"width", width}, {"height", height}, {"bands", bands}, {"strokes", strokes},
                {"inks", inks}, {"separable_band", separable_band}, {"gap", gap},
                {"cube_out", cube_out}, {"truth_out", truth_out}});
      m.output("cube", cube_out);
      m.output("truth", truth_out);
      r["mask_band"] = page.mask_band;
      r["ink_pixels"] = static_cast<Index>((page.truth.array() > 0).count());
    } else {
      if (cube_out.empty()) throw UsageError("scene-cube needs --cube-out");
      const HyperspectralCube c = synth_scene_cube(width, height, bands, active, sigma, g.seed);
      io::save_cube(cube_out, c);
      p.update({{"width", width}, {"height", height}, {"bands", bands}, {"active", to_json(active)},
                {"sigma", sigma}, {"cube_out", cube_out}});
      m.output("cube", cube_out);
      r["width"] = width;
      r["height"] = height;
      r["bands"] = bands;
    }
    return r;
  }
};

// ---------------------------------------------------------------------------
// fit

struct FitCmd {
  MatrixInput input;
  FitOptions fit;
  std::optional<double> lambda;
  std::optional<double> lambda_frac;
  double zero_tol = 1e-9;
  std::string basis_out;

  void add(CLI::App* app) {
    input.add(app);
    fit.add(app);
    auto* l = app->add_option("--lambda", lambda, "Regularization weight");
    auto* f = app->add_option("--lambda-frac", lambda_frac, "Lambda as a fraction of lambda_max");
    l->excludes(f);
    app->add_option("--zero-tol", zero_tol, "Relative threshold for a vanished group");
    app->add_option("--basis-out", basis_out, "Write the basis (.sbm)");
  }

  Json run(Manifest& m, const Global&) const {
    if (!lambda && !lambda_frac) throw UsageError("fit needs --lambda or --lambda-frac");
    auto [raw, groups] = input.load(m, "data");
    const DataMatrix X = DataMatrix::centered(raw, groups);
    const Algorithm alg = parse_algorithm(fit.algorithm);
    const AlternationConfig cfg = fit.config();
    const PcaDecomposition dec = pca(X);
    const double lmax = lambda_max(X, dec, alg, cfg);
    const double lam = lambda ? *lambda : *lambda_frac * lmax;
    if (!(lam >= 0.0)) throw UsageError("lambda must be non-negative");
    const SparseBasis basis = sparsespec::fit(X, dec, alg, lam, cfg);

    Json& p = m.params();
    input.record(p);
    fit.record(p);
    p["lambda"] = lambda ? Json(*lambda) : Json(nullptr);
    p["lambda_frac"] = lambda_frac ? Json(*lambda_frac) : Json(nullptr);
    p["zero_tol"] = zero_tol;
    if (!basis_out.empty()) {
      io::save_basis(basis_out, basis);
      p["basis_out"] = basis_out;
      m.output("basis", basis_out);
    }
    Json r = basis_summary(basis, zero_tol);
    r["lambda_max"] = lmax;
    r["rows"] = X.rows();
    return r;
  }
};

// ---------------------------------------------------------------------------
// tree-search

struct TreeCmd {
  MatrixInput input;
  FitOptions fit;
  int depth = 5;
  int roots = 4;
  std::optional<double> lambda_min, lambda_max_opt, lambda_min_frac;
  std::string spacing = "log";
  double zero_tol = 1e-9;
  std::string models_dir;

  void add(CLI::App* app) {
    input.add(app);
    fit.add(app);
    app->add_option("--depth", depth, "Maximum tree depth")->check(CLI::PositiveNumber);
    app->add_option("--roots", roots, "Level-1 nodes")->check(CLI::Range(2, 1 << 20));
    auto* lmin = app->add_option("--lambda-min", lambda_min, "Smallest lambda");
    auto* frac = app->add_option("--lambda-min-frac", lambda_min_frac,
                                 "Smallest lambda as a fraction of the largest");
    lmin->excludes(frac);
    app->add_option("--lambda-max", lambda_max_opt, "Largest lambda");
    app->add_option("--spacing", spacing, "log | linear")->check(CLI::IsMember({"log", "linear"}));
    app->add_option("--zero-tol", zero_tol, "Relative threshold for a vanished group");
    app->add_option("--models-dir", models_dir, "Write every recorded model as r<r>.sbm");
  }

  Json run(Manifest& m, const Global&) const {
    auto [raw, groups] = input.load(m, "data");
    const DataMatrix X = DataMatrix::centered(raw, groups);
    const Algorithm alg = parse_algorithm(fit.algorithm);
    TreeConfig cfg;
    cfg.depth = depth;
    cfg.roots = roots;
    cfg.spacing = parse_spacing(spacing);
    cfg.fit = fit.config();
    cfg.zero_tol = zero_tol;
    cfg.lambda_max = lambda_max_opt;
    cfg.lambda_min = lambda_min;
    if (lambda_min_frac) {
      const double top = lambda_max_opt ? *lambda_max_opt : sparsespec::lambda_max(X, alg, cfg.fit);
      cfg.lambda_min = *lambda_min_frac * top;
    }
    const TreeSearchResult res = tree_search(X, alg, cfg);

    Json& p = m.params();
    input.record(p);
    fit.record(p);
    p.update({{"depth", depth}, {"roots", roots}, {"spacing", spacing}, {"zero_tol", zero_tol}});
    p["lambda_min"] = lambda_min ? Json(*lambda_min) : Json(nullptr);
    p["lambda_min_frac"] = lambda_min_frac ? Json(*lambda_min_frac) : Json(nullptr);
    p["lambda_max"] = lambda_max_opt ? Json(*lambda_max_opt) : Json(nullptr);

    Json r;
    r["algorithm"] = std::string(to_string(alg));
    r["num_groups"] = res.num_groups;
    r["lambda_min"] = res.lambda_min;
    r["lambda_max"] = res.lambda_max;
    r["levels_explored"] = res.levels_explored;
    r["fitted_nodes"] = res.fitted_nodes;
    Json levels = Json::array();
    for (const TreeNode& n : res.nodes) {
      if (levels.empty() || levels.back()["level"] != n.level) {
        levels.push_back({{"level", n.level}, {"nodes", Json::array()}});
      }
      levels.back()["nodes"].push_back({{"index", n.index},
                                        {"lambda", n.lambda},
                                        {"status", std::string(to_string(n.status))},
                                        {"r", n.cardinality}});
    }
    r["levels"] = std::move(levels);
    Json models = Json::array();
    if (!models_dir.empty()) {
      fs::create_directories(models_dir);
      p["models_dir"] = models_dir;
    }
    for (const auto& [card, rec] : res.models) {
      Json entry = {{"r", card}, {"lambda", rec.lambda}, {"level", rec.level}, {"index", rec.index},
                    {"active_groups", to_json(active_groups(rec.basis.B, rec.basis.groups, zero_tol))}};
      if (!models_dir.empty()) {
        const fs::path path = fs::path(models_dir) / ("r" + std::to_string(card) + ".sbm");
        io::save_basis(path, rec.basis);
        m.output("r" + std::to_string(card), path);
        entry["basis"] = path.string();
      }
      models.push_back(std::move(entry));
    }
    r["models"] = std::move(models);
    r["missing"] = to_json(res.missing);
    return r;
  }
};

// ---------------------------------------------------------------------------
// select-bands

struct SelectCmd {
  std::string spectra, labels, cube, truth;
  std::string method = "sfbs";
  int g = 2;
  int restarts = 10;
  std::optional<double> lambda;
  double lambda_frac = 0.1;
  Index max_reduced = 16;

  void add(CLI::App* app) {
    auto* s = app->add_option("--spectra", spectra, "CSV spectra, one row per pixel");
    app->add_option("--labels", labels, "CSV ground-truth labels for --spectra");
    auto* c = app->add_option("--cube", cube, "Cube; ink pixels are taken from --truth");
    app->add_option("--truth", truth, "PGM ground-truth ink labels for --cube");
    s->excludes(c);
    app->add_option("--method", method, "sfbs | jsbs")->check(CLI::IsMember({"sfbs", "jsbs"}));
    app->add_option("--g", g, "Number of inks")->check(CLI::Range(1, kMaxMismatchInks));
    app->add_option("--restarts", restarts, "k-means restarts")->check(CLI::PositiveNumber);
    auto* l = app->add_option("--lambda", lambda, "JSPCA lambda for jsbs");
    auto* f = app->add_option("--lambda-frac", lambda_frac, "JSPCA lambda as a fraction of lambda_max");
    l->excludes(f);
    app->add_option("--max-reduced", max_reduced, "Largest reduced set jsbs enumerates");
  }

  LabeledSpectra load(Manifest& m) const {
    if (!spectra.empty()) {
      if (labels.empty()) throw UsageError("--spectra needs --labels");
      m.input("spectra", spectra);
      m.input("labels", labels);
      LabeledSpectra out;
      const NormalizedRows rows = normalize_spectra(io::load_matrix_csv(spectra));
      out.spectra = rows.rows;
      out.degenerate_rows = rows.degenerate;
      out.labels = io::load_labels_csv(labels);
      if (static_cast<Index>(out.labels.size()) != out.spectra.rows()) {
        throw DataError("label count does not match spectra rows");
      }
      out.num_inks = out.labels.empty() ? 0 : *std::max_element(out.labels.begin(), out.labels.end());
      return out;
    }
    if (cube.empty() || truth.empty()) throw UsageError("need --spectra/--labels or --cube/--truth");
    m.input("cube", cube);
    m.input("truth", truth);
    const HyperspectralCube c = io::load_cube(cube);
    const Eigen::MatrixXi t = io::load_pgm(truth);
    if (t.rows() != c.height() || t.cols() != c.width()) {
      throw DataError("truth image dimensions do not match the cube");
    }
    const Mask mask = (t.array() > 0).cast<std::uint8_t>();
    return extract_ink_spectra(c, mask, &t);
  }

  Json run(Manifest& m, const Global& gl) const {
    const LabeledSpectra s = load(m);
    for (int l : s.labels)
      if (l < 0 || l > g) throw DataError("label outside 0..g");
    ClusteringAccuracy score;
    score.g = g;
    score.kmeans.restarts = restarts;
    score.kmeans.seed = gl.seed;
    const SubsetScorer scorer = score;

    Json& p = m.params();
    if (!spectra.empty()) p.update({{"spectra", spectra}, {"labels", labels}});
    else p.update({{"cube", cube}, {"truth", truth}});
    p.update({{"method", method}, {"g", g}, {"restarts", restarts}});

    std::vector<Index> all(static_cast<std::size_t>(s.spectra.cols()));
    std::iota(all.begin(), all.end(), Index{0});
    Json r;
    r["method"] = method;
    r["pixels"] = s.spectra.rows();
    r["bands_available"] = s.spectra.cols();
    r["full_band_accuracy"] = scorer(s, all);
    if (method == "sfbs") {
      const SfbsResult res = sfbs(s, scorer);
      r["bands"] = to_json(res.bands.indices);
      r["accuracy"] = res.bands.accuracy;
      Json trace = Json::array();
      for (const SfbsStep& step : res.trace) trace.push_back({{"band", step.band}, {"accuracy", step.accuracy}});
      r["trace"] = std::move(trace);
      r["rejected_accuracy"] = res.rejected_accuracy ? Json(*res.rejected_accuracy) : Json(nullptr);
    } else {
      JsbsConfig cfg;
      cfg.max_reduced = max_reduced;
      const DataMatrix X = DataMatrix::centered(s.spectra, GroupStructure::singletons(s.spectra.cols()));
      const double lmax = sparsespec::lambda_max(X, Algorithm::kJspca, cfg.fit);
      const double lam = lambda ? *lambda : lambda_frac * lmax;
      p["lambda"] = lambda ? Json(*lambda) : Json(nullptr);
      p["lambda_frac"] = lambda ? Json(nullptr) : Json(lambda_frac);
      p["max_reduced"] = max_reduced;
      const JsbsResult res = jsbs(s, lam, scorer, cfg);
      r["lambda"] = lam;
      r["lambda_max"] = lmax;
      r["reduced"] = to_json(res.reduced);
      r["subsets_evaluated"] = res.subsets_evaluated;
      r["bands"] = to_json(res.bands.indices);
      r["accuracy"] = res.bands.accuracy;
    }
    return r;
  }
};

// ---------------------------------------------------------------------------
// reconstruct

struct ReconstructCmd {
  std::string cube, basis, cube_out;
  Index patch = 0;
  double zero_tol = 1e-9;

  void add(CLI::App* app) {
    app->add_option("--cube", cube, "Test cube")->required();
    app->add_option("--basis", basis, "Basis file (.sbm)")->required();
    app->add_option("--patch", patch, "Patch side used at training")->required()->check(CLI::PositiveNumber);
    app->add_option("--cube-out", cube_out, "Reconstructed cube output");
    app->add_option("--zero-tol", zero_tol, "Relative threshold for a vanished group");
  }

  Json run(Manifest& m, const Global&) const {
    m.input("cube", cube);
    m.input("basis", basis);
    const HyperspectralCube c = io::load_cube(cube);
    const SparseBasis b = io::load_basis(basis);
    const HyperspectralCube rec = reconstruct_cube(c, b, patch, zero_tol);
    Json& p = m.params();
    p.update({{"cube", cube}, {"basis", basis}, {"patch", patch}, {"zero_tol", zero_tol}});
    if (!cube_out.empty()) {
      io::save_cube(cube_out, rec);
      p["cube_out"] = cube_out;
      m.output("cube", cube_out);
    }
    // Errors over the pixels covered by whole patches.
    const Index w = (c.width() / patch) * patch;
    const Index h = (c.height() / patch) * patch;
    Json per_band = Json::array();
    double total = 0.0, max_abs = 0.0;
    for (Index band = 0; band < c.bands(); ++band) {
      double sq = 0.0;
      for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
          const double d = rec.at(x, y, band) - c.at(x, y, band);
          sq += d * d;
          max_abs = std::max(max_abs, std::abs(d));
        }
      total += sq;
      per_band.push_back(w * h > 0 ? std::sqrt(sq / static_cast<double>(w * h)) : 0.0);
    }
    Json r;
    r["sensed_bands"] = to_json(active_groups(b.B, b.groups, zero_tol));
    r["bands"] = c.bands();
    r["covered_pixels"] = w * h;
    r["rmse"] = w * h > 0 ? std::sqrt(total / static_cast<double>(w * h * c.bands())) : 0.0;
    r["max_abs_error"] = max_abs;
    r["band_rmse"] = std::move(per_band);
    return r;
  }
};

// ---------------------------------------------------------------------------
// eval-recon

struct EvalCmd {
  std::vector<std::string> bases;
  MatrixInput test;
  std::string gallery, gallery_labels, probes, probe_labels, curve_csv;
  double zero_tol = 1e-9;

  void add(CLI::App* app) {
    app->add_option("--basis", bases, "Basis files (.sbm), repeatable")->required();
    app->add_option("--data", test.data, "CSV test matrix (raw, uncentered)");
    app->add_option("--cube", test.cube, "Test cube sampled into patches");
    app->add_option("--patch", test.patch, "Patch side for --cube");
    app->add_option("--gallery", gallery, "CSV gallery rows for recognition");
    app->add_option("--gallery-labels", gallery_labels, "CSV gallery labels");
    app->add_option("--probes", probes, "CSV probe rows");
    app->add_option("--probe-labels", probe_labels, "CSV probe labels");
    app->add_option("--curve-csv", curve_csv, "Write r, lambda, e_r[, a_r] rows");
    app->add_option("--zero-tol", zero_tol, "Relative threshold for a vanished group");
  }

  Json run(Manifest& m, const Global&) const {
    const bool recog = !gallery.empty() || !probes.empty();
    if (recog && (gallery.empty() || gallery_labels.empty() || probes.empty() || probe_labels.empty())) {
      throw UsageError("recognition needs --gallery, --gallery-labels, --probes and --probe-labels");
    }
    if (!test.given() && !recog) throw UsageError("nothing to evaluate: give --data/--cube or a gallery");
    Json& p = m.params();
    p["basis"] = bases;
    std::optional<Eigen::MatrixXd> X_test;
    if (test.given()) {
      if (!test.cube.empty()) {
        if (test.patch <= 0) throw UsageError("--cube needs --patch");
        m.input("test", test.cube);
        X_test = patch_matrix(io::load_cube(test.cube), test.patch);
        p.update({{"cube", test.cube}, {"patch", test.patch}});
      } else {
        m.input("test", test.data);
        X_test = io::load_matrix_csv(test.data);
        p["data"] = test.data;
      }
    }
    Eigen::MatrixXd G, P;
    std::vector<int> gl, pl;
    if (recog) {
      m.input("gallery", gallery);
      m.input("gallery_labels", gallery_labels);
      m.input("probes", probes);
      m.input("probe_labels", probe_labels);
      G = io::load_matrix_csv(gallery);
      gl = io::load_labels_csv(gallery_labels);
      P = io::load_matrix_csv(probes);
      pl = io::load_labels_csv(probe_labels);
      p.update({{"gallery", gallery}, {"gallery_labels", gallery_labels}, {"probes", probes},
                {"probe_labels", probe_labels}});
    }
    p["zero_tol"] = zero_tol;

    struct Point {
      Index r;
      double lambda;
      std::size_t order;
      Json json;
      std::vector<double> row;
    };
    std::vector<Point> points;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      m.input("basis" + std::to_string(i), bases[i]);
      const SparseBasis b = io::load_basis(bases[i]);
      Point pt{group_cardinality(b.B, b.groups, zero_tol), b.lambda, i, Json(), {}};
      pt.json = {{"basis", bases[i]}, {"algorithm", std::string(to_string(b.algorithm))},
                 {"r", pt.r}, {"lambda", b.lambda}};
      pt.row = {static_cast<double>(pt.r), b.lambda};
      if (X_test) {
        const double e = reconstruction_error(center_with(*X_test, b.column_mean), b);
        pt.json["e_r"] = e;
        pt.row.push_back(e);
      }
      if (recog) {
        const double a = knn_recognition(G, gl, P, pl, b);
        pt.json["a_r"] = a;
        pt.row.push_back(a);
      }
      points.push_back(std::move(pt));
    }
    std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
      return std::tie(a.r, a.lambda, a.order) < std::tie(b.r, b.lambda, b.order);
    });
    Json r;
    Json curve = Json::array();
    std::vector<std::vector<double>> rows;
    for (auto& pt : points) {
      curve.push_back(pt.json);
      rows.push_back(pt.row);
    }
    r["points"] = std::move(curve);
    if (!curve_csv.empty()) {
      std::vector<std::string> header{"r", "lambda"};
      if (X_test) header.push_back("e_r");
      if (recog) header.push_back("a_r");
      cli::write_curve_csv(curve_csv, header, rows);
      p["curve_csv"] = curve_csv;
      m.output("curve", curve_csv);
    }
    return r;
  }
};

// ---------------------------------------------------------------------------
// ink-detect and segment

Json binarization_json(const Binarization& bin, Index mask_band) {
  Json r;
  r["mask_band"] = mask_band;
  r["blank"] = bin.blank;
  r["threshold"] = bin.global_threshold ? Json(*bin.global_threshold) : Json(nullptr);
  r["ink_pixels"] = static_cast<Index>(bin.ink.cast<Index>().sum());
  return r;
}

struct InkDetectCmd {
  std::string cube, truth, labels_out;
  BinarizeOptions bin;
  int g = 2;
  std::vector<Index> bands;
  int restarts = 10;

  void add(CLI::App* app) {
    app->add_option("--cube", cube, "Page cube")->required();
    app->add_option("--truth", truth, "PGM ground-truth ink labels");
    app->add_option("--labels-out", labels_out, "PGM of predicted labels (0 = paper)");
    app->add_option("--g", g, "Number of inks")->check(CLI::Range(1, kMaxMismatchInks));
    app->add_option("--bands", bands, "Bands used for clustering, 0-based")->delimiter(',');
    app->add_option("--restarts", restarts, "k-means restarts")->check(CLI::PositiveNumber);
    bin.add(app);
  }

  Json run(Manifest& m, const Global& gl) const {
    m.input("cube", cube);
    const HyperspectralCube c = io::load_cube(cube);
    std::optional<Eigen::MatrixXi> t;
    if (!truth.empty()) {
      m.input("truth", truth);
      t = io::load_pgm(truth);
    }
    DetectOptions o;
    o.binarization = bin.params();
    o.g = g;
    o.bands = bands;
    std::sort(o.bands.begin(), o.bands.end());
    o.bands.erase(std::unique(o.bands.begin(), o.bands.end()), o.bands.end());
    o.kmeans.restarts = restarts;
    o.kmeans.seed = gl.seed;
    const DetectReport rep = detect(c, o, t ? &*t : nullptr);

    Json& p = m.params();
    p.update({{"cube", cube}, {"g", g}, {"bands", to_json(o.bands)}, {"restarts", restarts}});
    if (!truth.empty()) p["truth"] = truth;
    bin.record(p);
    if (!labels_out.empty()) {
      io::save_pgm(labels_out, rep.labels);
      p["labels_out"] = labels_out;
      m.output("labels", labels_out);
    }
    Json r;
    r["mask_band"] = rep.mask_band;
    r["blank"] = rep.blank;
    r["ink_pixels"] = rep.ink_pixels;
    r["degenerate_pixels"] = rep.degenerate_pixels;
    r["bands"] = to_json(rep.bands);
    r["g"] = g;
    if (rep.clusters) {
      std::vector<Index> sizes(static_cast<std::size_t>(g), 0);
      for (int l : rep.clusters->labels) ++sizes[static_cast<std::size_t>(l - 1)];
      r["cluster_sizes"] = to_json(sizes);
      r["inertia"] = rep.clusters->inertia;
      r["restart"] = rep.clusters->restart;
    } else {
      r["cluster_sizes"] = Json::array();
      r["inertia"] = nullptr;
      r["restart"] = nullptr;
    }
    r["accuracy"] = rep.accuracy ? Json(*rep.accuracy) : Json(nullptr);
    r["scored_pixels"] = rep.scored_pixels;
    return r;
  }
};

struct SegmentCmd {
  std::string cube, truth, mask_out;
  BinarizeOptions bin;

  void add(CLI::App* app) {
    app->add_option("--cube", cube, "Page cube")->required();
    app->add_option("--truth", truth, "PGM ground truth (nonzero = ink) for agreement");
    app->add_option("--mask-out", mask_out, "PGM ink mask (255 = ink)");
    bin.add(app);
  }

  Json run(Manifest& m, const Global&) const {
    m.input("cube", cube);
    const HyperspectralCube c = io::load_cube(cube);
    const BinarizationParams params = bin.params();
    const Index band = params.mask_band ? *params.mask_band : select_mask_band(c);
    if (band < 0 || band >= c.bands()) throw DataError("mask band out of range");
    const Binarization b = binarize(band_intensity(c, band), params);

    Json& p = m.params();
    p["cube"] = cube;
    bin.record(p);
    Json r = binarization_json(b, band);
    r["effective_window"] = params.effective_window();
    if (!truth.empty()) {
      m.input("truth", truth);
      const Eigen::MatrixXi t = io::load_pgm(truth);
      if (t.rows() != b.ink.rows() || t.cols() != b.ink.cols()) {
        throw DataError("truth image dimensions do not match the cube");
      }
      Index agree = 0;
      for (Index y = 0; y < t.rows(); ++y)
        for (Index x = 0; x < t.cols(); ++x) agree += (t(y, x) > 0) == (b.ink(y, x) != 0);
      r["agreement"] = static_cast<double>(agree) / static_cast<double>(t.size());
      p["truth"] = truth;
    } else {
      r["agreement"] = nullptr;
    }
    if (!mask_out.empty()) {
      io::save_pgm(mask_out, (b.ink.cast<int>() * 255).eval());
      p["mask_out"] = mask_out;
      m.output("mask", mask_out);
    }
    return r;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint group-sparse PCA for hyperspectral band selection and ink analysis",
               "sparsespec"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();
  Global global;
  app.add_option("--seed", global.seed, "Seed for every stochastic step");
  app.add_option("--threads", global.threads, "Thread cap (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", global.out, "Write the JSON report here instead of stdout");

  SynthCmd synth;
  FitCmd fit;
  TreeCmd tree;
  SelectCmd select;
  ReconstructCmd recon;
  EvalCmd eval;
  InkDetectCmd ink;
  SegmentCmd segment;

  std::function<Json(Manifest&, const Global&)> run;
  auto bind = [&](CLI::App* sub, auto& cmd) {
    cmd.add(sub);
    sub->callback([&run, &cmd] { run = [&cmd](Manifest& m, const Global& g) { return cmd.run(m, g); }; });
  };
  bind(app.add_subcommand("synth", "Generate synthetic datasets"), synth);
  bind(app.add_subcommand("fit", "Fit one sparse PCA basis"), fit);
  bind(app.add_subcommand("tree-search", "Search lambda for models of every cardinality"), tree);
  bind(app.add_subcommand("select-bands", "SFBS or JSBS band selection"), select);
  bind(app.add_subcommand("reconstruct", "Reconstruct a cube from the sensed bands"), recon);
  bind(app.add_subcommand("eval-recon", "Reconstruction error and recognition accuracy"), eval);
  bind(app.add_subcommand("ink-detect", "Binarize, cluster ink spectra, score"), ink);
  bind(app.add_subcommand("segment", "Binarize a page"), segment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ScopedThreads threads(global.threads);
    Manifest manifest(name);
    Json result = run(manifest, global);
    const std::string text = manifest.finish(std::move(result), global.seed).dump(2) + "\n";
    if (global.out.empty()) std::cout << text;
    else io::write_file(global.out, text);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "sparsespec " << name << ": " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sparsespec " << name << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sparsespec " << name << ": " << e.what() << "\n";
    return 1;
  }
}
