// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oracles.hpp"
#include "sparsespec/band_eval.hpp"
#include "sparsespec/binarize.hpp"
#include "sparsespec/ink.hpp"
#include "sparsespec/model_search.hpp"
#include "sparsespec/pca.hpp"
#include "sparsespec/prox.hpp"
#include "sparsespec/sparse_pca.hpp"
#include "sparsespec/synth.hpp"

using namespace sparsespec;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kGridTol = 1e-3;
constexpr double kAnalyticTol = 1e-10;
constexpr double kProcrustesSlack = 1e-9;
constexpr double kOrthoTol = 1e-6;
constexpr double kMonotoneRel = 1e-6;
constexpr double kPcaErrTol = 1e-6;
constexpr double kCurveSlack = 1e-8;
constexpr double kC1Seconds = 10.0;
constexpr double kC2Seconds = 30.0;
constexpr double kC5Seconds = 120.0;
constexpr double kC9Seconds = 30.0;
constexpr int kC5JointNeeded = 95;
constexpr int kC5SpanNeeded = 80;
constexpr double kChanceLo = 0.28;
constexpr double kChanceHi = 0.38;
constexpr double kSauvolaAgreement = 0.99;
constexpr int kSauvolaWinsNeeded = 24;
constexpr double kNonSeparableCeiling = 0.45;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1: prox oracles -------------------------------------------------------

/// Independent closed forms of the proximal maps.
Eigen::MatrixXd analytic_prox(const Eigen::MatrixXd& Z, double tau, const Penalty& pen) {
  Eigen::MatrixXd B = Z;
  switch (pen.kind) {
    case PenaltyKind::kL1:
      for (Index i = 0; i < Z.rows(); ++i)
        for (Index j = 0; j < Z.cols(); ++j) {
          const double t = tau * pen.row_weight(i), z = Z(i, j);
          B(i, j) = z > t ? z - t : (z < -t ? z + t : 0.0);
        }
      break;
    case PenaltyKind::kL0:
      for (Index i = 0; i < Z.rows(); ++i)
        for (Index j = 0; j < Z.cols(); ++j)
          B(i, j) = 0.5 * Z(i, j) * Z(i, j) > tau * pen.row_weight(i) ? Z(i, j) : 0.0;
      break;
    case PenaltyKind::kRowL21:
      for (Index i = 0; i < Z.rows(); ++i) {
        const double n = std::sqrt(Z.row(i).squaredNorm()), t = tau * pen.row_weight(i);
        B.row(i) = n > t ? Eigen::RowVectorXd((1.0 - t / n) * Z.row(i)) : Eigen::RowVectorXd::Zero(Z.cols());
      }
      break;
    case PenaltyKind::kGroupF1:
      for (Index g = 0; g < pen.groups.num_groups(); ++g) {
        double sq = 0.0;
        for (Index r : pen.groups.group(g)) sq += Z.row(r).squaredNorm();
        const double n = std::sqrt(sq), t = tau * pen.groups.weight(g);
        for (Index r : pen.groups.group(g)) B.row(r) = n > t ? Eigen::RowVectorXd((1.0 - t / n) * Z.row(r)) : Eigen::RowVectorXd::Zero(Z.cols());
      }
      break;
  }
  return B;
}

/// Grid minimizer of 1/2 ||z - b||^2 + t * penalty(b) over one block.
Eigen::VectorXd block_grid(const Eigen::VectorXd& z, double t, PenaltyKind kind) {
  auto f = [&](const Eigen::VectorXd& b) {
    double pen = 0.0;
    if (kind == PenaltyKind::kL1) pen = b.cwiseAbs().sum();
    else if (kind == PenaltyKind::kL0) pen = static_cast<double>((b.array() != 0.0).count());
    else pen = std::sqrt(b.squaredNorm());
    return 0.5 * (z - b).squaredNorm() + t * pen;
  };
  // The minimizer lies in the box spanned by 0 and z.
  const Eigen::VectorXd center = 0.5 * z;
  const double radius = 0.5 * z.cwiseAbs().maxCoeff() + 0.5;
  if (z.size() == 1) return oracle::grid_minimize(f, center, radius, 8001, 12);
  return oracle::grid_minimize(f, center, radius, 21, 18);
}

Outcome criterion_prox() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 3);
  std::uniform_real_distribution<double> tau_d(0.05, 1.5), w_d(0.5, 2.0);
  double worst_grid = 0.0, worst_analytic = 0.0;
  int grid_blocks = 0, instances = 0;
  for (PenaltyKind kind : {PenaltyKind::kL1, PenaltyKind::kL0, PenaltyKind::kRowL21, PenaltyKind::kGroupF1}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Index p = dim(rng), k = dim(rng);
      const Eigen::MatrixXd Z = oracle::gaussian(p, k, rng, 1.5);
      const double tau = tau_d(rng);
      Penalty pen;
      std::vector<double> weights;
      if (trial % 2)
        for (Index i = 0; i < p; ++i) weights.push_back(w_d(rng));
      if (kind == PenaltyKind::kL1) pen = Penalty::l1();
      if (kind == PenaltyKind::kL0) pen = Penalty::l0();
      if (kind == PenaltyKind::kRowL21) pen = Penalty::row_l21(weights);
      if (kind == PenaltyKind::kGroupF1) {
        std::vector<Index> sizes;
        for (Index left = p; left > 0;) {
          const Index s = std::min<Index>(left, dim(rng));
          sizes.push_back(s);
          left -= s;
        }
        pen = Penalty::group_f1(GroupStructure::contiguous(sizes));
      } else {
        pen.row_weights = weights;
      }
      const Eigen::MatrixXd B = prox(Z, tau, pen);
      worst_analytic = std::max(worst_analytic, (B - analytic_prox(Z, tau, pen)).cwiseAbs().maxCoeff());
      ++instances;
      // Grid route over every block of at most three coordinates.
      auto check_block = [&](const std::vector<std::pair<Index, Index>>& cells, double t) {
        if (cells.size() > 3) return;
        Eigen::VectorXd z(static_cast<Index>(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) z(static_cast<Index>(c)) = Z(cells[c].first, cells[c].second);
        const PenaltyKind block_kind = kind == PenaltyKind::kGroupF1 ? PenaltyKind::kRowL21 : kind;
        const Eigen::VectorXd g = block_grid(z, t, block_kind);
        for (std::size_t c = 0; c < cells.size(); ++c)
          worst_grid = std::max(worst_grid, std::abs(B(cells[c].first, cells[c].second) - g(static_cast<Index>(c))));
        ++grid_blocks;
      };
      if (kind == PenaltyKind::kL1 || kind == PenaltyKind::kL0) {
        for (Index i = 0; i < p; ++i)
          for (Index j = 0; j < k; ++j) check_block({{i, j}}, tau * pen.row_weight(i));
      } else if (kind == PenaltyKind::kRowL21) {
        for (Index i = 0; i < p; ++i) {
          std::vector<std::pair<Index, Index>> cells;
          for (Index j = 0; j < k; ++j) cells.emplace_back(i, j);
          check_block(cells, tau * pen.row_weight(i));
        }
      } else {
        for (Index g = 0; g < pen.groups.num_groups(); ++g) {
          std::vector<std::pair<Index, Index>> cells;
          for (Index r : pen.groups.group(g))
            for (Index j = 0; j < k; ++j) cells.emplace_back(r, j);
          check_block(cells, tau * pen.groups.weight(g));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst_grid <= kGridTol && worst_analytic <= kAnalyticTol && secs < kC1Seconds,
          fmt("%d instances, max |diff| analytic %.2e (tol %.0e), grid %.2e over %d blocks (tol %.0e), %.2f s (limit %.0f s)",
              instances, worst_analytic, kAnalyticTol, worst_grid, grid_blocks, kGridTol, secs, kC1Seconds)};
}

// ---- 2: procrustes --------------------------------------------------------

Outcome criterion_procrustes() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> rows(1, 6), cols(1, 3);
  double worst = -1e300;
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Index p = rows(rng), k = cols(rng);
    if (k > p) std::swap(p, k);
    const Eigen::MatrixXd M = oracle::gaussian(p, k, rng);
    const Eigen::MatrixXd A = procrustes(M);
    const double best = (M.transpose() * A).trace();
    for (int q = 0; q < 10000; ++q) {
      const double other = (M.transpose() * oracle::random_orthonormal(p, k, rng)).trace();
      worst = std::max(worst, other - best);
      violations += other > best + kProcrustesSlack;
    }
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < kC2Seconds,
          fmt("100 matrices x 10000 random Q, violations %d, max Tr(M^T Q) - Tr(M^T A) = %.2e (slack %.0e), %.2f s (limit %.0f s)",
              violations, worst, kProcrustesSlack, secs, kC2Seconds)};
}

// ---- 3: alternation invariants --------------------------------------------

Outcome criterion_alternation() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> n_d(20, 60), g_d(2, 8), s_d(1, 3);
  std::uniform_real_distribution<double> frac_d(0.02, 0.6);
  int runs = 0, bad = 0;
  double worst_ortho = 0.0, worst_rise = 0.0;
  for (int ds = 0; ds < 50; ++ds) {
    const Index g = g_d(rng);
    std::vector<Index> sizes;
    for (Index i = 0; i < g; ++i) sizes.push_back(s_d(rng));
    const GroupStructure groups = GroupStructure::contiguous(sizes);
    std::vector<Index> active;
    for (Index i = 0; i < g; ++i)
      if (rng() % 2) active.push_back(i);
    if (active.empty()) active.push_back(0);
    const DataMatrix X = synth_group_lowrank(n_d(rng), groups, active, 0.05, 3000 + static_cast<std::uint64_t>(ds));
    const PcaDecomposition dec = pca(X);
    for (Algorithm alg : {Algorithm::kSpca, Algorithm::kGspca, Algorithm::kJspca, Algorithm::kJgspca}) {
      const double lambda = frac_d(rng) * lambda_max(X, dec, alg);
      const SparseBasis b = fit(X, dec, alg, lambda);
      bool ok = orthonormality_error(b.A) < kOrthoTol;
      for (double o : b.orthonormality_history) {
        worst_ortho = std::max(worst_ortho, o);
        ok = ok && o < kOrthoTol;
      }
      const auto& J = b.objective_history;
      for (std::size_t s = 1; s < J.size(); ++s) {
        const double rise = J[s] - J[s - 1];
        worst_rise = std::max(worst_rise, rise / (1.0 + std::abs(J[s - 1])));
        ok = ok && rise <= kMonotoneRel * (1.0 + std::abs(J[s - 1]));
      }
      ++runs;
      bad += !ok;
    }
  }
  return {bad == 0, fmt("%d fits on 50 datasets, %d violating; max ||A^T A - I||_F %.2e (tol %.0e), max relative J rise %.2e (tol %.0e)",
                        runs, bad, worst_ortho, kOrthoTol, worst_rise, kMonotoneRel)};
}

// ---- 4: PCA reduction -----------------------------------------------------

Outcome criterion_pca_reduction() {
  double worst = 0.0;
  int fits = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GroupStructure groups = GroupStructure::uniform(4 + static_cast<Index>(seed), 3);
    const DataMatrix X = synth_group_lowrank(40, groups, {0, 2}, 0.1, 400 + seed);
    for (Algorithm alg : {Algorithm::kSpca, Algorithm::kGspca, Algorithm::kJspca, Algorithm::kJgspca}) {
      const SparseBasis b = fit(X, alg, 0.0);
      worst = std::max(worst, reconstruction_error(X.values, b));
      ++fits;
    }
  }
  return {worst < kPcaErrTol, fmt("%d fits (4 algorithms x 5 datasets, lambda = 0, k = p), max e_r %.2e (tol %.0e)", fits, worst, kPcaErrTol)};
}

// ---- 5: joint support recovery --------------------------------------------

double nnz_per_column(const Eigen::MatrixXd& B) {
  const double tol = 1e-9 * (1.0 + B.norm());
  return static_cast<double>((B.array().abs() > tol).count()) / static_cast<double>(B.cols());
}

/// SPCA fit whose nonzeros per column best match `target`: bisect the single
/// B-step at the PCA start for a bracket, then bisect full fits inside it.
SparseBasis spca_matched(const DataMatrix& X, const PcaDecomposition& dec, double target) {
  const double top = lambda_max(X, dec, Algorithm::kSpca);
  double lo = std::log(top * 1e-10), hi = std::log(top);
  for (int b = 0; b < 30; ++b) {
    const double mid = 0.5 * (lo + hi);
    const SolveResult s = solve_B(X.values, dec.V, std::exp(mid), Penalty::l1());
    (nnz_per_column(s.B) > target ? lo : hi) = mid;
  }
  double flo = hi - std::log(30.0), fhi = hi, gap = 1e300;
  SparseBasis best;
  for (int b = 0; b < 6; ++b) {
    const double mid = 0.5 * (flo + fhi);
    SparseBasis s = fit(X, dec, Algorithm::kSpca, std::exp(mid));
    const double nz = nnz_per_column(s.B);
    if (std::abs(nz - target) < gap) {
      gap = std::abs(nz - target);
      best = std::move(s);
    }
    (nz > target ? flo : fhi) = mid;
  }
  return best;
}

Outcome criterion_support_recovery() {
  const auto t0 = Clock::now();
  const GroupStructure groups = GroupStructure::uniform(8, 2);
  int joint_exact = 0, spca_spans = 0, no_model = 0;
  for (int t = 0; t < 100; ++t) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(t));
    std::vector<Index> order{0, 1, 2, 3, 4, 5, 6, 7};
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<Index> active{std::min(order[0], order[1]), std::max(order[0], order[1])};
    GroupLowRankOptions o;
    o.independent_latents = true;
    const DataMatrix X = synth_group_lowrank(60, groups, active, 0.01, static_cast<std::uint64_t>(t), o);
    const PcaDecomposition dec = pca(X);
    TreeConfig cfg;
    cfg.lambda_min = 1e-8 * lambda_max(X, dec, Algorithm::kJgspca);
    const TreeSearchResult res = tree_search(X, Algorithm::kJgspca, cfg);
    const auto it = res.models.find(2);
    if (it == res.models.end()) {
      ++no_model;
      continue;
    }
    joint_exact += active_groups(it->second.basis.B, groups) == active;
    const SparseBasis s = spca_matched(X, dec, nnz_per_column(it->second.basis.B));
    spca_spans += active_groups(s.B, groups).size() > 2;
  }
  const double secs = seconds_since(t0);
  return {joint_exact >= kC5JointNeeded && spca_spans >= kC5SpanNeeded && secs < kC5Seconds,
          fmt("JGSPCA exact support %d/100 (need %d), SPCA spans > 2 groups %d/100 (need %d), no r = 2 model %d, %.1f s (limit %.0f s)",
              joint_exact, kC5JointNeeded, spca_spans, kC5SpanNeeded, no_model, secs, kC5Seconds)};
}

// ---- 6: e_r monotonicity --------------------------------------------------

Outcome criterion_curve_monotone() {
  struct Case {
    std::string name;
    DataMatrix X;
    Algorithm alg;
  };
  std::vector<Case> suite;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const GroupStructure g = GroupStructure::uniform(6, 2);
    suite.push_back({fmt("lowrank-%d", static_cast<int>(seed)), synth_group_lowrank(40, g, {1, 3, 4}, 0.05, 600 + seed), Algorithm::kJgspca});
  }
  suite.push_back({"scene-patches", extract_patches(synth_scene_cube(16, 16, 6, {0, 3}, 0.02, 61), 2), Algorithm::kJgspca});
  suite.push_back({"lowrank-gspca", synth_group_lowrank(40, GroupStructure::uniform(5, 2), {0, 2}, 0.05, 62), Algorithm::kGspca});
  suite.push_back({"lowrank-jspca", synth_group_lowrank(40, GroupStructure::uniform(5, 2), {0, 2}, 0.05, 63), Algorithm::kJspca});
  int bad = 0, points = 0;
  double worst = -1e300;
  for (const Case& c : suite) {
    TreeConfig cfg;
    cfg.lambda_min = 1e-6 * lambda_max(c.X, c.alg);
    const TreeSearchResult res = tree_search(c.X, c.alg, cfg);
    const std::vector<CurvePoint> curve = error_curve(res.models, c.X.uncentered());
    points += static_cast<int>(curve.size());
    for (std::size_t i = 1; i < curve.size(); ++i) {
      worst = std::max(worst, curve[i].value - curve[i - 1].value);
      if (curve[i].value > curve[i - 1].value + kCurveSlack) {
        ++bad;
        std::cerr << "  " << c.name << ": e_r(" << curve[i].r << ") = " << curve[i].value << " > e_r("
                  << curve[i - 1].r << ") = " << curve[i - 1].value << "\n";
      }
    }
  }
  return {bad == 0, fmt("%zu datasets, %d curve points, %d rises; max step e_r(r+) - e_r(r) = %.2e (slack %.0e)",
                        suite.size(), points, bad, worst, kCurveSlack)};
}

// ---- 7: tree-search efficiency and fidelity -------------------------------

Outcome criterion_tree_efficiency() {
  const Index g = 6;
  GroupLowRankOptions o;
  o.independent_latents = true;
  for (Index i = 0; i < g; ++i) o.group_scales.push_back(std::pow(1.8, static_cast<double>(g - i)));
  const DataMatrix X = synth_group_lowrank(50, GroupStructure::uniform(g, 2), {0, 1, 2, 3, 4, 5}, 0.01, 707, o);
  TreeConfig cfg;
  cfg.depth = 8;
  const TreeSearchResult res = tree_search(X, Algorithm::kJgspca, cfg);
  const bool all_found = res.missing.empty() && static_cast<Index>(res.models.size()) == g;

  // Every recorded (lambda, r) refit from scratch.
  int refit_bad = 0;
  for (const auto& [r, rec] : res.models)
    refit_bad += group_cardinality(fit(X, Algorithm::kJgspca, rec.lambda, cfg.fit).B, X.groups, cfg.zero_tol) != r;

  // Smallest uniform grid over the same endpoints that covers the same cardinalities.
  std::set<Index> wanted;
  for (const auto& [r, rec] : res.models) wanted.insert(r);
  std::map<double, Index> cache;
  auto card = [&](double lambda) {
    auto [it, fresh] = cache.try_emplace(lambda, 0);
    if (fresh) it->second = group_cardinality(fit(X, Algorithm::kJgspca, lambda, cfg.fit).B, X.groups, cfg.zero_tol);
    return it->second;
  };
  int dense = 0;
  const int cap = 4 * res.fitted_nodes;
  for (int n = 2; n <= cap && dense == 0; ++n) {
    std::set<Index> seen;
    for (double lambda : root_lambdas(res.lambda_min, res.lambda_max, n, cfg.spacing)) seen.insert(card(lambda));
    if (std::includes(seen.begin(), seen.end(), wanted.begin(), wanted.end())) dense = n;
  }
  const std::string dense_text = dense ? std::to_string(dense) : "> " + std::to_string(cap);
  return {all_found && refit_bad == 0 && (dense == 0 || res.fitted_nodes < dense),
          fmt("g = %d, cardinalities found %zu/%d, fitted nodes %d vs smallest covering uniform grid %s, refit mismatches %d",
              static_cast<int>(g), res.models.size(), static_cast<int>(g), res.fitted_nodes, dense_text.c_str(), refit_bad)};
}

// ---- 8: JSBS equals exhaustive argmax -------------------------------------

Outcome criterion_jsbs_oracle() {
  int equal = 0, too_big = 0;
  for (int f = 0; f < 20; ++f) {
    std::mt19937_64 rng(800 + static_cast<std::uint64_t>(f));
    const Index sep = static_cast<Index>(rng() % 8);
    const double gap = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
    const LabeledSpectra s = synth_ink_scene(40, 8, sep, gap, 0.02, 810 + static_cast<std::uint64_t>(f));
    const DataMatrix X = DataMatrix::centered(s.spectra, GroupStructure::singletons(8));
    const double lambda = 0.1 * lambda_max(X, Algorithm::kJspca);
    ClusteringAccuracy acc;
    acc.kmeans.restarts = 5;
    const JsbsResult r = jsbs(s, lambda, acc);
    too_big += r.reduced.size() > 8;
    double best = 0.0;
    const std::vector<Index> expect =
        oracle::best_subset(r.reduced, [&](const std::vector<Index>& t) { return acc(s, t); }, &best);
    equal += expect == r.bands.indices && best == r.bands.accuracy;
  }
  return {equal == 20 && too_big == 0, fmt("%d/20 fixtures equal the enumeration oracle (need 20), reduced sets over 8 bands %d", equal, too_big)};
}

// ---- 9: mismatch accuracy -------------------------------------------------

Outcome criterion_mismatch_metric() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(909);
  int perm_bad = 0, self_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int g = 2 + static_cast<int>(rng() % 4);
    std::vector<int> truth(200), pred(200);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = 1 + static_cast<int>(rng() % static_cast<unsigned>(g));
      pred[i] = 1 + static_cast<int>(rng() % static_cast<unsigned>(g));
    }
    std::vector<int> perm(static_cast<std::size_t>(g));
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> relabeled(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) relabeled[i] = perm[static_cast<std::size_t>(pred[i] - 1)];
    perm_bad += mismatch_accuracy(truth, pred, g) != mismatch_accuracy(truth, relabeled, g);
    self_bad += mismatch_accuracy(truth, truth, g) != 1.0;
  }
  double sum = 0.0;
  std::vector<int> truth(10000), pred(10000);
  for (int t = 0; t < 1000; ++t) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      truth[i] = 1 + static_cast<int>(i % 2);
      pred[i] = 1 + static_cast<int>(rng() % 2);
    }
    sum += mismatch_accuracy(truth, pred, 2);
  }
  const double mean = sum / 1000.0, secs = seconds_since(t0);
  return {perm_bad == 0 && self_bad == 0 && mean >= kChanceLo && mean <= kChanceHi && secs < kC9Seconds,
          fmt("permutation mismatches %d/1000, accuracy(y, y) != 1 %d/1000, random 2-class mean %.4f (range [%.2f, %.2f]), %.2f s (limit %.0f s)",
              perm_bad, self_bad, mean, kChanceLo, kChanceHi, secs, kC9Seconds)};
}

// ---- 10: segmentation ordering --------------------------------------------

double agreement(const Eigen::MatrixXi& truth, const Mask& ink) {
  Index same = 0;
  for (Index y = 0; y < truth.rows(); ++y)
    for (Index x = 0; x < truth.cols(); ++x) same += (truth(y, x) > 0) == (ink(y, x) != 0);
  return static_cast<double>(same) / static_cast<double>(truth.size());
}

Outcome criterion_segmentation() {
  int good = 0, wins = 0;
  double worst = 1.0;
  for (int s = 0; s < 25; ++s) {
    PageOptions o;
    o.width = 256;
    o.height = 256;
    o.strokes = 6;
    o.seed = 1000 + static_cast<std::uint64_t>(s);
    const InkPage page = synth_ink_page(o);
    const Eigen::MatrixXd img = band_intensity(page.cube, page.mask_band);
    BinarizationParams sauvola, otsu;
    otsu.method = ThresholdMethod::kOtsu;
    const double a_s = agreement(page.truth, binarize(img, sauvola).ink);
    const double a_o = agreement(page.truth, binarize(img, otsu).ink);
    worst = std::min(worst, a_s);
    good += a_s >= kSauvolaAgreement;
    wins += a_s > a_o;
  }
  return {good == 25 && wins >= kSauvolaWinsNeeded,
          fmt("Sauvola agreement >= %.2f on %d/25 pages (min %.4f), Sauvola > Otsu on %d/25 (need %d)", kSauvolaAgreement,
              good, worst, wins, kSauvolaWinsNeeded)};
}

// ---- 11: end-to-end ink pipeline ------------------------------------------

Outcome criterion_ink_pipeline() {
  PageOptions o;
  o.seed = 11;
  const InkPage page = synth_ink_page(o);
  const double full = detect(page.cube, {}, &page.truth).accuracy.value_or(-1.0);

  const Mask mask = (page.truth.array() > 0).cast<std::uint8_t>();
  const LabeledSpectra spectra = extract_ink_spectra(page.cube, mask, &page.truth);
  const DataMatrix X = DataMatrix::centered(spectra.spectra, GroupStructure::singletons(spectra.spectra.cols()));
  const JsbsResult sel = jsbs(spectra, 0.1 * lambda_max(X, Algorithm::kJspca), ClusteringAccuracy{});
  DetectOptions with_jsbs;
  with_jsbs.bands = sel.bands.indices;
  const double reduced = detect(page.cube, with_jsbs, &page.truth).accuracy.value_or(-1.0);

  DetectOptions non_sep;
  non_sep.bands = {0};
  const double band0 = detect(page.cube, non_sep, &page.truth).accuracy.value_or(-1.0);

  std::string bands;
  for (Index b : sel.bands.indices) bands += (bands.empty() ? "" : ",") + std::to_string(b);
  return {full == 1.0 && reduced == 1.0 && band0 < kNonSeparableCeiling,
          fmt("full bands %.4f, JSBS bands {%s} %.4f (need 1.0 each), band 0 only %.4f (ceiling %.2f)", full, bands.c_str(),
              reduced, band0, kNonSeparableCeiling)};
}

// ---- 12: CLI determinism --------------------------------------------------

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_duration(const std::string& json) {
  static const std::regex duration(R"re("duration_s"\s*:\s*[-+0-9.eE]+)re");
  return std::regex_replace(json, duration, "\"duration_s\":0");
}

Outcome criterion_cli_determinism(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "sparsespec_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir / "models");
  const std::string d = dir.string() + "/";
  struct Command {
    std::string name, args;
  };
  const std::vector<Command> commands{
      {"synth group-lowrank", "synth --kind group-lowrank --n 40 --groups 6 --group-size 2 --active 1 4 --sigma 0.01 --data-out " + d + "x.csv"},
      {"synth ink-scene", "synth --kind ink-scene --n-per-ink 30 --bands 8 --separable-band 5 --data-out " + d + "s.csv --labels-out " + d + "l.csv"},
      {"synth ink-page", "synth --kind ink-page --width 96 --height 96 --strokes 10 --cube-out " + d + "page.hsc --truth-out " + d + "truth.pgm"},
      {"synth scene-cube", "synth --kind scene-cube --width 12 --height 12 --bands 4 --active 0 2 --cube-out " + d + "scene.hsc"},
      {"fit", "fit --data " + d + "x.csv --group-size 2 --algorithm jgspca --lambda-frac 0.2 --basis-out " + d + "b.sbm"},
      {"fit cube", "fit --cube " + d + "scene.hsc --patch 2 --algorithm jgspca --lambda-frac 0.3 --basis-out " + d + "cb.sbm"},
      {"tree-search", "tree-search --data " + d + "x.csv --group-size 2 --depth 4 --models-dir " + d + "models"},
      {"select-bands sfbs", "select-bands --spectra " + d + "s.csv --labels " + d + "l.csv --method sfbs"},
      {"select-bands jsbs", "select-bands --spectra " + d + "s.csv --labels " + d + "l.csv --method jsbs --lambda-frac 0.1"},
      {"reconstruct", "reconstruct --cube " + d + "scene.hsc --basis " + d + "cb.sbm --patch 2 --cube-out " + d + "rec.hsc"},
      {"eval-recon", "eval-recon --basis " + d + "b.sbm --data " + d + "x.csv --curve-csv " + d + "curve.csv"},
      {"ink-detect", "ink-detect --cube " + d + "page.hsc --truth " + d + "truth.pgm --labels-out " + d + "pred.pgm"},
      {"segment", "segment --cube " + d + "page.hsc --truth " + d + "truth.pgm --mask-out " + d + "mask.pgm"},
  };
  int identical = 0;
  std::vector<std::string> failed;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> reports;
    for (int threads : {1, 1, 4}) {
      const fs::path out = dir / ("report_" + std::to_string(c) + "_" + std::to_string(reports.size()) + ".json");
      const std::string line = "\"" + cli + "\" --seed 7 --threads " + std::to_string(threads) + " --out \"" +
                               out.string() + "\" " + commands[c].args + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) {
        reports.push_back("<exit failure>");
        continue;
      }
      reports.push_back(strip_duration(read_text(out)));
    }
    const bool same = reports[0] != "<exit failure>" && reports[0] == reports[1] && reports[0] == reports[2];
    identical += same;
    if (!same) failed.push_back(commands[c].name);
  }
  std::string failed_text;
  for (const std::string& f : failed) failed_text += (failed_text.empty() ? " failing: " : ", ") + f;
  const int total = static_cast<int>(commands.size());
  return {identical == total,
          fmt("%d/%d invocations byte-identical (duration_s masked) across two runs at --threads 1 and one at --threads 4%s",
              identical, total, failed_text.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli = SPARSESPEC_CLI_PATH;
  std::vector<int> only;
  app.add_option("--cli", cli, "sparsespec executable");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"prox oracle equivalence", criterion_prox},
      {"procrustes optimality", criterion_procrustes},
      {"alternation invariants", criterion_alternation},
      {"PCA reduction at lambda = 0", criterion_pca_reduction},
      {"joint support recovery", criterion_support_recovery},
      {"e_r monotone in r", criterion_curve_monotone},
      {"tree-search efficiency and fidelity", criterion_tree_efficiency},
      {"JSBS equals exhaustive argmax", criterion_jsbs_oracle},
      {"mismatch accuracy metric", criterion_mismatch_metric},
      {"Sauvola beats Otsu under falloff", criterion_segmentation},
      {"end-to-end ink pipeline", criterion_ink_pipeline},
      {"CLI determinism", [&] { return criterion_cli_determinism(cli); }},
  };
  int failures = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    failures += !o.pass;
    std::printf("[%s] C%-2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
