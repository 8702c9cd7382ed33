#include "svsp/eval/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svsp/core/error.hpp"

namespace svsp {
namespace {

constexpr std::size_t kChunk = 2048;

struct Partial {
  double total = 0.0;
  std::vector<double> node_sum;
  std::vector<std::size_t> node_rows;
};

void check(const DistilledPolicy& policy, const TransitionDataset& dataset) {
  if (dataset.size() == 0) throw InputError("fidelity: empty dataset");
  if (dataset.state_dim() != policy.state_dim || dataset.action_dim() != policy.action_dim)
    throw InputError("fidelity: dataset dimensions do not match the policy");
}

void accumulate(const DistilledPolicy& policy, const TransitionDataset& dataset, std::size_t begin,
                std::size_t end, Partial& p) {
  for (std::size_t r = begin; r < end; ++r) {
    const Routed routed = route(policy, dataset.states.row(r));
    const double err = squared_distance(routed.action, dataset.actions.row(r));
    p.total += err;
    p.node_sum[routed.node] += err;
    ++p.node_rows[routed.node];
  }
}

FidelityReport finish(const Partial& p, std::size_t rows) {
  FidelityReport out;
  out.global_mse = p.total / static_cast<double>(rows);
  out.node_rows = p.node_rows;
  out.node_mse.resize(p.node_sum.size());
  for (std::size_t k = 0; k < p.node_sum.size(); ++k)
    out.node_mse[k] = p.node_rows[k] ? p.node_sum[k] / static_cast<double>(p.node_rows[k])
                                     : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Partial empty_partial(std::size_t nodes) { return {0.0, std::vector<double>(nodes, 0.0), std::vector<std::size_t>(nodes, 0)}; }

}  // namespace

FidelityReport fidelity(const DistilledPolicy& policy, const TransitionDataset& dataset) {
  check(policy, dataset);
  const std::size_t n = dataset.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Partial> parts(chunks, empty_partial(policy.node_count()));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    accumulate(policy, dataset, begin, std::min(n, begin + kChunk), parts[c]);
  }
  Partial total = empty_partial(policy.node_count());
  for (const auto& p : parts) {
    total.total += p.total;
    for (std::size_t k = 0; k < p.node_sum.size(); ++k) {
      total.node_sum[k] += p.node_sum[k];
      total.node_rows[k] += p.node_rows[k];
    }
  }
  return finish(total, n);
}

namespace serial {

FidelityReport fidelity(const DistilledPolicy& policy, const TransitionDataset& dataset) {
  check(policy, dataset);
  Partial p = empty_partial(policy.node_count());
  accumulate(policy, dataset, 0, dataset.size(), p);
  return finish(p, dataset.size());
}

}  // namespace serial
}  // namespace svsp
