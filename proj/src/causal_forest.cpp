#include "reachdiff/causal_forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "reachdiff/errors.hpp"

namespace reachdiff {

void ForestParams::validate() const {
  if (n_trees < 1) throw ValidationError("forest params: n_trees must be >= 1");
  if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
    throw ValidationError("forest params: subsample_fraction must lie in (0, 1]");
  }
  tree.validate();
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

CausalForest::CausalForest(ForestParams params, std::vector<CausalTree> trees)
    : params_(std::move(params)), trees_(std::move(trees)) {
  if (trees_.empty()) throw ValidationError("causal forest: no trees");
  for (const auto& t : trees_) {
    if (t.dimension() != trees_.front().dimension()) {
      throw ValidationError("causal forest: trees disagree on dimension");
    }
  }
  params_.n_trees = trees_.size();
}

double CausalForest::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

std::vector<double> CausalForest::predict_trees(std::span<const double> x) const {
  std::vector<double> out;
  out.reserve(trees_.size());
  for (const auto& t : trees_) out.push_back(t.predict(x));
  return out;
}

double CausalForest::mean_leaf_count() const {
  double sum = 0.0;
  for (const auto& t : trees_) sum += static_cast<double>(t.leaf_count());
  return sum / static_cast<double>(trees_.size());
}

CausalForest fit_forest(const TrainingSet& data, const ForestParams& params) {
  params.validate();
  data.validate();

  std::vector<std::size_t> treated;
  std::vector<std::size_t> control;
  for (std::size_t i = 0; i < data.size(); ++i) (data.treated[i] ? treated : control).push_back(i);
  const auto take = [&](std::size_t n) {
    return static_cast<std::size_t>(std::ceil(params.subsample_fraction * static_cast<double>(n)));
  };
  const std::size_t n_treated = take(treated.size());
  const std::size_t n_control = take(control.size());
  const std::size_t need = 2 * params.tree.min_samples;
  if (n_treated < need || n_control < need) {
    throw FitError("causal forest: subsample holds " + std::to_string(n_treated) +
                   " treated and " + std::to_string(n_control) + " control rows; need " +
                   std::to_string(need) + " per arm");
  }

  std::vector<CausalTree> trees(params.n_trees);
  parallel_for(params.n_trees, params.n_threads, [&](std::size_t b) {
    Rng rng(hash64(params.seed, b));
    std::vector<std::size_t> t = treated;
    std::vector<std::size_t> c = control;
    rng.shuffle(std::span(t));
    rng.shuffle(std::span(c));
    std::vector<std::size_t> rows(t.begin(), t.begin() + n_treated);
    rows.insert(rows.end(), c.begin(), c.begin() + n_control);
    std::sort(rows.begin(), rows.end());
    trees[b] = fit_tree(data, rows, params.tree, rng);
  });
  return CausalForest(params, std::move(trees));
}

}  // namespace reachdiff
