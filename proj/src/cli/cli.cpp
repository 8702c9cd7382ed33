#include "svsp/cli/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "core/json_util.hpp"
#include "svsp/core/dataset.hpp"
#include "svsp/core/error.hpp"
#include "svsp/core/parallel.hpp"
#include "svsp/distill/distill.hpp"
#include "svsp/distill/inspect.hpp"
#include "svsp/envs/piecewise.hpp"
#include "svsp/eval/boundary.hpp"
#include "svsp/eval/fidelity.hpp"
#include "svsp/eval/rollout.hpp"

namespace svsp::cli {
namespace {

namespace fs = std::filesystem;

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " not found: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Splices `key = value` pairs from a subcommand's --config file into the
// argument list right after the subcommand name, skipping keys also given
// on the command line so explicit flags win. CLI11 only reads config files
// attached to the root app, hence the manual pass.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_pos = 0;
  const CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size() && !sub; ++i) {
    for (const CLI::App* candidate : app.get_subcommands([](const CLI::App*) { return true; }))
      if (candidate->get_name() == args[i]) {
        sub = candidate;
        sub_pos = i;
      }
  }
  if (!sub) return args;

  std::string config_path;
  auto given = [&](const std::string& flag) {
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i)
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  require_file(config_path, "config file");

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(config_path);
  } catch (const CLI::Error& e) {
    throw InputError(config_path + ": " + e.what());
  }
  std::vector<std::string> spliced;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) continue;
    const std::string flag = "--" + item.name;
    if (item.name == "config" || given(flag)) continue;
    if (sub->get_option_no_throw(flag) == nullptr)
      throw InputError(config_path + ": unknown option '" + item.name + "' for " + sub->get_name());
    spliced.push_back(flag);
    spliced.insert(spliced.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), spliced.begin(), spliced.end());
  return args;
}

// Distill options shared by `distill` and `replicate`.
struct DistillFlags {
  std::string critic_mode = "q1_only";
  std::string svm_solver = "subgradient";
};

void add_distill_flags(CLI::App* cmd, RunConfig& rc, DistillFlags& flags) {
  cmd->add_option("--data", rc.data, "Dataset CSV (header s0..,a0..)")->required();
  cmd->add_option("--manifest", rc.manifest, "Dataset manifest JSON")->required();
  cmd->add_option("--critic", rc.critic, "Critic Q1 weight file, or a piecewise descriptor for the analytic critic")
      ->required();
  cmd->add_option("--critic2", rc.critic2, "Twin critic Q2 weight file (needed for --critic-mode min_twin)");
  cmd->add_option("--actor", rc.actor, "Teacher actor weight file; V(s) = Q(s, actor(s)) when given");
  cmd->add_option("--critic-mode", flags.critic_mode, "q1_only or min_twin")->capture_default_str();
  cmd->add_option("--tau", rc.distill.value_threshold, "Value threshold for region labels")->capture_default_str();
  cmd->add_option("--iterations", rc.distill.n_iteration, "Maximum number of chain nodes")->capture_default_str();
  cmd->add_option("--min-region", rc.distill.min_region_size,
                  "Stop when fewer zero-labeled rows remain (>= state_dim + 1)")
      ->capture_default_str();
  cmd->add_option("--ridge-lambda", rc.distill.ridge_lambda, "Ridge penalty for subpolicies")->capture_default_str();
  cmd->add_option("--svm-c", rc.distill.svm_c, "SVM soft-margin weight")->capture_default_str();
  cmd->add_option("--svm-epochs", rc.distill.svm_epochs, "SVM passes over the region")->capture_default_str();
  cmd->add_option("--svm-solver", flags.svm_solver, "subgradient (primal) or dcd (dual coordinate descent)")
      ->capture_default_str();
  cmd->add_option("--seed", rc.distill.seed, "Seed for the SVM epoch shuffles")->capture_default_str();
}

void finish_distill_flags(RunConfig& rc, const DistillFlags& flags) {
  rc.distill.critic_mode = nn::parse_critic_mode(flags.critic_mode);
  rc.distill.svm_solver = parse_svm_solver(flags.svm_solver);
}

TransitionDataset read_dataset(const RunConfig& rc) {
  require_file(rc.data, "dataset");
  require_file(rc.manifest, "manifest");
  return load_dataset(rc.data, rc.manifest);
}

void print_policy_summary(std::ostream& out, const DistilledPolicy& policy) {
  out << "nodes: " << policy.node_count() << '\n';
  for (const auto& node : policy.nodes)
    out << "  node " << node.index << ": train_size " << node.train_size << ", positive_fraction "
        << fixed(node.positive_fraction) << (node.gate ? "" : ", terminal") << '\n';
}

void print_report(std::ostream& out, const EvalReport& report) {
  out << "episodes: " << report.episode_returns.size() << "/" << report.episodes << ", mean return "
      << fixed(report.mean) << " +- " << fixed(report.std) << ", subpolicies " << report.subpolicy_count << '\n';
  out << "node usage:";
  for (std::size_t k = 0; k < report.node_usage.size(); ++k) out << ' ' << k << ':' << report.node_usage[k];
  out << '\n';
}

void write_eval(const EvalReport& report, const fs::path& dir) {
  save_report(report, dir / "report.json");
  save_episode_table(report, dir / "episodes.csv");
}

int cmd_synth(std::ostream& out, std::size_t regions, std::size_t dims, std::size_t episodes, std::size_t steps,
              std::uint64_t seed, const fs::path& dir) {
  ensure_dir(dir);
  const PiecewiseTeacher teacher = make_piecewise_teacher(regions, dims, seed);
  const TransitionDataset data = synth_dataset(teacher, episodes, seed, steps);
  save_dataset(data, dir / "dataset.csv");
  DatasetManifest manifest = manifest_for(data, episodes);
  save_manifest(manifest, dir / "manifest.json");
  save_piecewise(teacher, dir / "critic.json");
  out << "wrote " << data.size() << " rows (" << episodes << " episodes, " << regions << " regions, " << dims
      << " dims) to " << dir.string() << '\n';
  out << "dataset.csv manifest.json critic.json (analytic critic; env selector builtin:piecewise:"
      << (dir / "critic.json").string() << ")\n";
  return kOk;
}

int cmd_distill(std::ostream& out, const RunConfig& rc) {
  const TransitionDataset data = read_dataset(rc);
  const auto critic = load_critic(rc);
  const DistilledPolicy policy = distill(data, *critic, rc.distill);
  if (rc.out.has_parent_path()) ensure_dir(rc.out.parent_path());
  save_policy(policy, rc.out);
  print_policy_summary(out, policy);
  out << "training fidelity mse: " << format_double(fidelity(policy, data).global_mse) << '\n';
  out << "policy written to " << rc.out.string() << '\n';
  return kOk;
}

int cmd_eval(std::ostream& out, std::ostream& err, const RunConfig& rc) {
  require_file(rc.policy, "policy");
  const DistilledPolicy policy = load_policy(rc.policy);
  const EnvFactory factory = parse_env_selector(rc.env);
  ensure_dir(rc.out);
  const EvalReport report = rollout(factory, policy, rc.episodes, rc.base_seed, rc.jobs);
  write_eval(report, rc.out);
  print_report(out, report);
  if (!report.valid) {
    err << "error: evaluation aborted: " << report.error << '\n';
    return kInputError;
  }
  return kOk;
}

int cmd_inspect(std::ostream& out, const fs::path& policy_path, const fs::path& manifest_path) {
  require_file(policy_path, "policy");
  const DistilledPolicy policy = load_policy(policy_path);
  DatasetManifest manifest;
  if (!manifest_path.empty()) {
    require_file(manifest_path, "manifest");
    manifest = load_manifest(manifest_path);
  }
  out << inspect(policy, manifest.feature_names, manifest.action_names);
  return kOk;
}

int cmd_boundary(std::ostream& out, const fs::path& policy_path, const std::vector<std::size_t>& dims,
                 const std::vector<double>& xr, const std::vector<double>& yr, std::size_t resolution, double fill,
                 const fs::path& out_path) {
  require_file(policy_path, "policy");
  const DistilledPolicy policy = load_policy(policy_path);
  const BoundaryGrid grid =
      boundary_grid(policy, {dims[0], xr[0], xr[1]}, {dims[1], yr[0], yr[1]}, resolution, fill);
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  save_grid(grid, out_path);
  out << "wrote " << grid.node.size() << " cells to " << out_path.string() << '\n';
  return kOk;
}

int cmd_replicate(std::ostream& out, std::ostream& err, const RunConfig& rc) {
  if (rc.replicates == 0) throw InputError("--replicates must be >= 1");
  const TransitionDataset data = read_dataset(rc);
  const auto critic = load_critic(rc);
  const EnvFactory factory = parse_env_selector(rc.env);
  ensure_dir(rc.out);

  detail::ordered_json summary;
  std::vector<std::uint64_t> seeds;
  std::vector<double> means;
  std::vector<std::size_t> node_counts;
  bool all_valid = true;
  for (std::size_t r = 0; r < rc.replicates; ++r) {
    DistillConfig cfg = rc.distill;
    cfg.seed = rc.distill.seed + r;
    const std::uint64_t eval_seed = rc.base_seed + r * rc.episodes;
    const fs::path dir = rc.out / ("seed_" + std::to_string(cfg.seed));
    ensure_dir(dir);
    const DistilledPolicy policy = distill(data, *critic, cfg);
    save_policy(policy, dir / "policy.json");
    const EvalReport report = rollout(factory, policy, rc.episodes, eval_seed, rc.jobs);
    write_eval(report, dir);
    out << "seed " << cfg.seed << ": " << policy.node_count() << " nodes, mean return " << fixed(report.mean)
        << " +- " << fixed(report.std) << '\n';
    if (!report.valid) {
      err << "error: replicate seed " << cfg.seed << ": " << report.error << '\n';
      all_valid = false;
    }
    seeds.push_back(cfg.seed);
    means.push_back(report.mean);
    node_counts.push_back(policy.node_count());
  }
  EvalReport across;
  across.episode_returns = means;
  summarize(across);
  summary["replicates"] = rc.replicates;
  summary["episodes_per_replicate"] = rc.episodes;
  summary["valid"] = all_valid;
  summary["seeds"] = seeds;
  summary["mean_returns"] = means;
  summary["node_counts"] = node_counts;
  summary["mean_of_means"] = across.mean;
  summary["std_of_means"] = across.std;
  detail::write_text(rc.out / "summary.json", summary.dump(2) + "\n", "summary");
  out << "across replicates: " << fixed(across.mean) << " +- " << fixed(across.std) << '\n';
  return all_valid ? kOk : kInputError;
}

}  // namespace

std::shared_ptr<const nn::CriticOracle> load_critic(const RunConfig& rc) {
  require_file(rc.critic, "critic");
  if (is_piecewise_descriptor(rc.critic))
    return std::make_shared<const AnalyticCritic>(std::make_shared<const PiecewiseTeacher>(load_piecewise(rc.critic)));
  nn::MlpNetwork q1 = nn::load_network(rc.critic);
  std::optional<nn::MlpNetwork> q2, actor;
  if (!rc.critic2.empty()) {
    require_file(rc.critic2, "second critic");
    q2 = nn::load_network(rc.critic2);
  }
  if (!rc.actor.empty()) {
    require_file(rc.actor, "actor");
    actor = nn::load_network(rc.actor);
  }
  return std::make_shared<const nn::NetworkCritic>(std::move(q1), std::move(q2), std::move(actor),
                                                   rc.distill.critic_mode);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distill a continuous-control policy into a chain of SVM-gated linear subpolicies."};
  app.name("svsp");
  app.require_subcommand(1);
  app.fallthrough(false);

  RunConfig rc;
  DistillFlags flags;
  auto add_jobs = [&](CLI::App* cmd) {
    cmd->add_option("--jobs", rc.jobs, "Threads for parallel kernels and episodes (0 = runtime default)")
        ->capture_default_str();
  };
  auto add_config = [](CLI::App* cmd) {
    cmd->add_option("--config", "Optional TOML/INI file of option = value pairs; flags override it");
  };

  // synth
  std::size_t regions = 2, dims = 2, synth_episodes = 100, steps = 200;
  std::uint64_t synth_seed = 0;
  fs::path synth_dir;
  auto* synth = app.add_subcommand("synth", "Write a piecewise-linear synthetic dataset, manifest and critic");
  synth->add_option("--regions", regions, "Number of teacher regions K")->capture_default_str();
  synth->add_option("--dims", dims, "State (and action) dimension")->capture_default_str();
  synth->add_option("--episodes", synth_episodes, "Recorded episodes")->capture_default_str();
  synth->add_option("--steps", steps, "Steps per episode")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed for the teacher and the recording")->capture_default_str();
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  add_config(synth);

  auto* distill_cmd = app.add_subcommand("distill", "Distill a dataset into a policy file");
  add_distill_flags(distill_cmd, rc, flags);
  distill_cmd->add_option("--out", rc.out, "Policy file to write")->required();
  add_jobs(distill_cmd);
  add_config(distill_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Roll out a policy and write report.json and episodes.csv");
  eval_cmd->add_option("--policy", rc.policy, "Policy file")->required();
  eval_cmd->add_option("--env", rc.env,
                       "builtin:pointmass[:d], builtin:piecewise:<descriptor>, or bridge:<command>")
      ->required();
  eval_cmd->add_option("--episodes", rc.episodes, "Episodes to run")->capture_default_str();
  eval_cmd->add_option("--base-seed", rc.base_seed, "Episode e resets with base-seed + e")->capture_default_str();
  eval_cmd->add_option("--out-dir", rc.out, "Report directory")->required();
  add_jobs(eval_cmd);
  add_config(eval_cmd);

  fs::path inspect_policy, inspect_manifest;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print gate and subpolicy coefficients");
  inspect_cmd->add_option("policy", inspect_policy, "Policy file")->required();
  inspect_cmd->add_option("--manifest", inspect_manifest, "Manifest supplying feature and action names");

  std::vector<std::size_t> grid_dims;
  std::vector<double> x_range{-1.0, 1.0}, y_range{-1.0, 1.0};
  std::size_t resolution = 200;
  double fill = 0.0;
  auto* boundary_cmd = app.add_subcommand("boundary", "Write the serving-node map on a 2-D state slice");
  boundary_cmd->add_option("--policy", rc.policy, "Policy file")->required();
  boundary_cmd->add_option("--dims", grid_dims, "Two state dimensions (x y)")->required()->expected(2);
  boundary_cmd->add_option("--x-range", x_range, "low high for the x dimension")->expected(2)->capture_default_str();
  boundary_cmd->add_option("--y-range", y_range, "low high for the y dimension")->expected(2)->capture_default_str();
  boundary_cmd->add_option("--resolution", resolution, "Cells per axis")->capture_default_str();
  boundary_cmd->add_option("--fill", fill, "Value of every other state component")->capture_default_str();
  boundary_cmd->add_option("--out", rc.out, "Grid CSV to write")->required();
  add_jobs(boundary_cmd);
  add_config(boundary_cmd);

  auto* replicate_cmd =
      app.add_subcommand("replicate", "Repeat distill + eval with seeds seed..seed+R-1, one directory per seed");
  add_distill_flags(replicate_cmd, rc, flags);
  replicate_cmd->add_option("--env", rc.env, "Environment selector (as for eval)")->required();
  replicate_cmd->add_option("--episodes", rc.episodes, "Episodes per replicate")->capture_default_str();
  replicate_cmd->add_option("--base-seed", rc.base_seed, "Replicate r evaluates from base-seed + r * episodes")
      ->capture_default_str();
  replicate_cmd->add_option("--replicates", rc.replicates, "Number of replicates")->capture_default_str();
  replicate_cmd->add_option("--out-dir", rc.out, "Output directory")->required();
  add_jobs(replicate_cmd);
  add_config(replicate_cmd);

  try {
    try {
      std::vector<std::string> args = expand_config(app, std::vector<std::string>(argv, argv + argc));
      std::vector<const char*> c_args;
      for (const auto& a : args) c_args.push_back(a.c_str());
      app.parse(static_cast<int>(c_args.size()), c_args.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kInputError;
    }
    ScopedThreads threads(rc.jobs);
    if (*synth) return cmd_synth(out, regions, dims, synth_episodes, steps, synth_seed, synth_dir);
    if (*distill_cmd) {
      finish_distill_flags(rc, flags);
      return cmd_distill(out, rc);
    }
    if (*eval_cmd) return cmd_eval(out, err, rc);
    if (*inspect_cmd) return cmd_inspect(out, inspect_policy, inspect_manifest);
    if (*boundary_cmd) return cmd_boundary(out, rc.policy, grid_dims, x_range, y_range, resolution, fill, rc.out);
    if (*replicate_cmd) {
      finish_distill_flags(rc, flags);
      return cmd_replicate(out, err, rc);
    }
    return kInputError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace svsp::cli
