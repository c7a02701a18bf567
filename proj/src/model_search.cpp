#include "sparsespec/model_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sparsespec/parallel.hpp"

namespace sparsespec {

std::string_view to_string(Spacing spacing) {
  return spacing == Spacing::kLog ? "log" : "linear";
}

Spacing parse_spacing(std::string_view name) {
  if (name == "log") return Spacing::kLog;
  if (name == "linear") return Spacing::kLinear;
  throw std::invalid_argument("unknown spacing '" + std::string(name) + "'");
}

std::string_view to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::kFitted: return "fitted";
    case NodeStatus::kReplicated: return "replicated";
    case NodeStatus::kSkipped: return "skipped";
    case NodeStatus::kDeactivated: return "deactivated";
  }
  return "unknown";
}

void TreeConfig::validate() const {
  if (depth < 1) throw std::invalid_argument("tree depth must be >= 1");
  if (roots < 2) throw std::invalid_argument("tree needs at least 2 root nodes");
  if (!(zero_tol >= 0.0)) throw std::invalid_argument("zero_tol must be non-negative");
  if (lambda_min && lambda_max && !(*lambda_min < *lambda_max)) {
    throw std::invalid_argument("lambda_min must be smaller than lambda_max");
  }
}

std::vector<double> root_lambdas(double lambda_min, double lambda_max, int roots, Spacing spacing) {
  if (roots < 2) throw std::invalid_argument("tree needs at least 2 root nodes");
  if (!(lambda_min < lambda_max)) throw std::invalid_argument("lambda_min must be smaller than lambda_max");
  if (spacing == Spacing::kLog && !(lambda_min > 0.0)) {
    throw std::invalid_argument("log spacing needs lambda_min > 0");
  }
  if (lambda_min < 0.0) throw std::invalid_argument("lambda must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(roots));
  for (int i = 0; i < roots; ++i) {
    const double t = static_cast<double>(i) / (roots - 1);
    if (spacing == Spacing::kLog) {
      out[static_cast<std::size_t>(i)] =
          std::exp(std::log(lambda_max) + t * (std::log(lambda_min) - std::log(lambda_max)));
    } else {
      out[static_cast<std::size_t>(i)] = lambda_max + t * (lambda_min - lambda_max);
    }
  }
  out.front() = lambda_max;
  out.back() = lambda_min;
  return out;
}

double child_lambda(double a, double b, Spacing spacing) {
  if (spacing == Spacing::kLog) return std::sqrt(a) * std::sqrt(b);
  return 0.5 * (a + b);
}

namespace {

struct Search {
  const DataMatrix& X;
  Algorithm algorithm;
  const TreeConfig& config;
  PcaDecomposition decomposition;
  TreeSearchResult result;

  Search(const DataMatrix& data, Algorithm alg, const TreeConfig& cfg)
      : X(data), algorithm(alg), config(cfg) {
    config.validate();
    X.groups.validate(X.cols());
    config.fit.validate(X.cols());
    decomposition = pca(X.values);
    result.num_groups = X.groups.num_groups();
    result.lambda_max = config.lambda_max ? *config.lambda_max
                                          : lambda_max(X, decomposition, algorithm, config.fit);
    result.lambda_min = config.lambda_min ? *config.lambda_min : 1e-4 * result.lambda_max;
    if (!(result.lambda_min < result.lambda_max)) {
      throw std::invalid_argument("lambda_min must be smaller than lambda_max");
    }
  }

  ModelRecord fit_node(double lambda) const {
    ModelRecord rec;
    rec.basis = fit(X, decomposition, algorithm, lambda, config.fit);
    rec.cardinality = group_cardinality(rec.basis.B, X.groups, config.zero_tol);
    rec.lambda = lambda;
    return rec;
  }

  void record(ModelRecord&& rec) {
    if (rec.cardinality <= 0) return;
    auto it = result.models.find(rec.cardinality);
    if (it == result.models.end()) {
      result.models.emplace(rec.cardinality, std::move(rec));
    } else if (rec.lambda < it->second.lambda) {
      it->second = std::move(rec);
    }
  }

  // Candidate nodes of level j+1 built from level j.
  std::vector<TreeNode> next_level(const std::vector<TreeNode>& parents, int level) const {
    std::vector<TreeNode> out;
    out.reserve(parents.size() * 2);
    for (std::size_t k = 0; k < parents.size(); ++k) {
      TreeNode keep = parents[k];
      keep.level = level;
      keep.status = NodeStatus::kReplicated;
      out.push_back(keep);
      if (k + 1 == parents.size()) break;
      TreeNode child;
      child.level = level;
      child.lambda = child_lambda(parents[k].lambda, parents[k + 1].lambda, config.spacing);
      const Index gap = parents[k + 1].cardinality - parents[k].cardinality;
      if (gap > 1 || gap < -1) {
        child.status = NodeStatus::kFitted;  // pending
      } else {
        child.status = NodeStatus::kSkipped;
        child.cardinality = parents[k].cardinality;
      }
      out.push_back(child);
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
    return out;
  }

  std::vector<TreeNode> first_level() const {
    std::vector<TreeNode> out;
    const auto lambdas =
        root_lambdas(result.lambda_min, result.lambda_max, config.roots, config.spacing);
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      TreeNode n;
      n.level = 1;
      n.index = static_cast<int>(i);
      n.lambda = lambdas[i];
      n.status = NodeStatus::kFitted;
      out.push_back(n);
    }
    return out;
  }

  // Walks one level in order. `fitter(i)` produces the model of pending node i.
  template <typename Fitter>
  void settle_level(std::vector<TreeNode>& level, Fitter&& fitter) {
    const Index g = result.num_groups;
    bool full = false;
    for (std::size_t i = 0; i < level.size(); ++i) {
      TreeNode& node = level[i];
      if (node.status == NodeStatus::kFitted) {
        if (full) {
          node.status = NodeStatus::kDeactivated;
          node.cardinality = g;
        } else {
          ModelRecord rec = fitter(i);
          rec.level = node.level;
          rec.index = node.index;
          node.cardinality = rec.cardinality;
          ++result.fitted_nodes;
          record(std::move(rec));
        }
      }
      if (node.cardinality == g) full = true;
    }
  }

  void finish_level(const std::vector<TreeNode>& level) {
    result.nodes.insert(result.nodes.end(), level.begin(), level.end());
    ++result.levels_explored;
  }

  bool complete() const {
    return static_cast<Index>(result.models.size()) == result.num_groups;
  }

  template <typename LevelRunner>
  TreeSearchResult run(LevelRunner&& run_level) {
    std::vector<TreeNode> level = first_level();
    for (int j = 1;; ++j) {
      run_level(level);
      finish_level(level);
      if (complete() || j == config.depth) break;
      level = next_level(level, j + 1);
    }
    for (Index r = 1; r <= result.num_groups; ++r)
      if (!result.models.count(r)) result.missing.push_back(r);
    return std::move(result);
  }
};

}  // namespace

TreeSearchResult tree_search_serial(const DataMatrix& X, Algorithm algorithm,
                                    const TreeConfig& config) {
  Search search(X, algorithm, config);
  return search.run([&](std::vector<TreeNode>& level) {
    search.settle_level(level, [&](std::size_t i) { return search.fit_node(level[i].lambda); });
  });
}

TreeSearchResult tree_search(const DataMatrix& X, Algorithm algorithm, const TreeConfig& config) {
  Search search(X, algorithm, config);
  return search.run([&](std::vector<TreeNode>& level) {
    // Pending nodes after a carried-down r = g node are known to be deactivated.
    std::vector<std::size_t> todo;
    bool full = false;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (level[i].status == NodeStatus::kFitted && !full) todo.push_back(i);
      if (level[i].status != NodeStatus::kFitted && level[i].cardinality == search.result.num_groups)
        full = true;
    }
    std::vector<ModelRecord> fitted(level.size());
    parallel_for(static_cast<std::ptrdiff_t>(todo.size()), true, [&](std::ptrdiff_t t) {
      const std::size_t i = todo[static_cast<std::size_t>(t)];
      fitted[i] = search.fit_node(level[i].lambda);
    });
    search.settle_level(level, [&](std::size_t i) { return std::move(fitted[i]); });
  });
}

ModelLookup model_for(const std::map<Index, ModelRecord>& models, Index r) {
  if (models.empty()) throw DataError("no models available");
  if (auto it = models.find(r); it != models.end()) return {&it->second, true};
  const ModelRecord* best = nullptr;
  Index best_gap = 0;
  for (const auto& [card, rec] : models) {
    const Index gap = card > r ? card - r : r - card;
    if (!best || gap < best_gap) {
      best = &rec;
      best_gap = gap;
    }
  }
  return {best, false};
}

}  // namespace sparsespec
