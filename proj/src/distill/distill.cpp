#include "svsp/distill/distill.hpp"

#include <numeric>
#include <stdexcept>

#include "svsp/core/error.hpp"
#include "svsp/core/random.hpp"

namespace svsp {

DistilledPolicy distill_with_trace(const TransitionDataset& dataset, const nn::CriticOracle& critic,
                                   const DistillConfig& config, DistillTrace& trace) {
  if (dataset.size() == 0) throw InputError("distill: dataset is empty");
  config.validate(dataset.state_dim());
  critic.check_dims(dataset.state_dim(), dataset.action_dim());
  trace = {};

  DistilledPolicy policy;
  policy.state_dim = dataset.state_dim();
  policy.action_dim = dataset.action_dim();
  policy.action_low = dataset.action_low;
  policy.action_high = dataset.action_high;
  policy.config = config;

  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), 0);

  for (int it = 0; it < config.n_iteration; ++it) {
    const Matrix states = gather_rows(dataset.states, rows);
    const Matrix actions = gather_rows(dataset.actions, rows);

    PartitionNode node;
    node.index = static_cast<std::size_t>(it);
    node.subpolicy = fit_subpolicy(states, actions, config.ridge_lambda, dataset.action_low, dataset.action_high);
    const Matrix predicted = predict_actions(node.subpolicy, states);
    LabelOutcome outcome = label_region(critic, states, predicted, actions, config.value_threshold);
    const RegionLabels& labels = outcome.labels;
    node.train_size = rows.size();
    node.positive_fraction = static_cast<double>(labels.positive_count()) / static_cast<double>(rows.size());
    trace.non_finite += outcome.non_finite;
    trace.region_rows.push_back(rows);
    trace.labels.push_back(labels);

    const bool terminal = it + 1 == config.n_iteration || labels.negative_count() == 0 ||
                          labels.positive_count() == 0 || labels.negative_count() < config.min_region_size;
    if (terminal) {
      policy.nodes.push_back(std::move(node));
      break;
    }

    SvmOptions svm;
    svm.c = config.svm_c;
    svm.epochs = config.svm_epochs;
    svm.seed = derive_seed(config.seed, static_cast<std::uint64_t>(it));
    svm.solver = config.svm_solver;
    node.gate = fit_svm(states, labels, svm);
    policy.nodes.push_back(std::move(node));

    std::vector<std::size_t> next;
    next.reserve(labels.negative_count());
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!labels[i]) next.push_back(rows[i]);
    if (next.size() >= rows.size() || next.size() != labels.negative_count())
      throw std::logic_error("distill: child region is not a strict zero-labeled subset");
    rows = std::move(next);
  }
  return policy;
}

DistilledPolicy distill(const TransitionDataset& dataset, const nn::CriticOracle& critic,
                        const DistillConfig& config) {
  DistillTrace trace;
  return distill_with_trace(dataset, critic, config, trace);
}

}  // namespace svsp
