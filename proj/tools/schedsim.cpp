// Experiment runner for the delay-sensitive downlink scheduling simulator:
// trains the learned schedulers, evaluates all policies and emits the
// packet-size sweep tables as CSV.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "schedsim/csv.hpp"
#include "schedsim/env.hpp"

namespace fs = std::filesystem;
using namespace schedsim;

namespace {

std::string tag(Policy policy, long long g, std::uint64_t seed) {
  return policy_name(policy) + "_G" + std::to_string(g) + "_seed" +
         std::to_string(seed);
}

std::string checkpoint_path(const std::string& out_dir, Policy policy,
                            long long g, std::uint64_t seed) {
  return out_dir + "/checkpoint_" + tag(policy, g, seed) + ".json";
}

std::vector<std::string> metrics_header(int users) {
  std::vector<std::string> h = {"policy",
                                "packet_size_bits",
                                "seed",
                                "episodes",
                                "mean_jitter_slots",
                                "mean_violation_ratio_pct",
                                "pooled_violation_ratio_pct",
                                "mean_delay_slots",
                                "served_packets"};
  for (int u = 0; u < users; ++u)
    h.push_back("violation_ratio_user" + std::to_string(u) + "_pct");
  return h;
}

std::vector<std::string> metrics_row(Policy policy, long long g,
                                     std::uint64_t seed,
                                     const EvalSummary& s) {
  std::vector<std::string> row = {
      policy_name(policy),
      CsvWriter::num(g),
      CsvWriter::num((long long)seed),
      CsvWriter::num(s.episodes),
      CsvWriter::num(s.mean_jitter_slots),
      CsvWriter::num(100.0 * s.mean_violation_ratio),
      CsvWriter::num(100.0 * s.pooled_violation_ratio),
      CsvWriter::num(s.mean_delay_slots),
      CsvWriter::num(s.served_packets)};
  for (double r : s.per_user_violation_ratio)
    row.push_back(CsvWriter::num(100.0 * r));
  return row;
}

void dump_episode_logs(const std::string& out_dir, Policy policy, long long g,
                       std::uint64_t seed, const ExperimentConfig& cfg,
                       const std::vector<EpisodeResult>& episodes) {
  if (cfg.run.dump_event_log) {
    CsvWriter events(out_dir + "/events_" + tag(policy, g, seed) + ".csv",
                     {"episode", "user", "arrival_slot", "completion_slot",
                      "delay_slots"});
    for (std::size_t e = 0; e < episodes.size(); ++e)
      for (const auto& ev : episodes[e].events)
        events.write_row({CsvWriter::num((long long)e),
                          CsvWriter::num(ev.user),
                          CsvWriter::num(ev.arrival_slot),
                          ev.completion_slot < 0
                              ? "EXPIRED"
                              : CsvWriter::num(ev.completion_slot),
                          ev.completion_slot < 0
                              ? ""
                              : CsvWriter::num(ev.delay_slots)});
  }
  if (cfg.run.dump_slot_trace) {
    CsvWriter traces(out_dir + "/slot_trace_" + tag(policy, g, seed) + ".csv",
                     {"episode", "slot", "drift", "running_jitter_slots",
                      "reward"});
    for (std::size_t e = 0; e < episodes.size(); ++e)
      for (const auto& tr : episodes[e].traces)
        traces.write_row({CsvWriter::num((long long)e),
                          CsvWriter::num(tr.slot), CsvWriter::num(tr.drift),
                          CsvWriter::num(tr.running_jitter),
                          CsvWriter::num(tr.reward)});
  }
  if (cfg.run.dump_allocations) {
    CsvWriter allocs(out_dir + "/allocations_" + tag(policy, g, seed) + ".csv",
                     {"episode", "slot", "user", "subcarriers", "planned_bits",
                      "realized_bits"});
    for (std::size_t e = 0; e < episodes.size(); ++e)
      for (const auto& tr : episodes[e].traces)
        for (std::size_t u = 0; u < tr.granted_subcarriers.size(); ++u) {
          if (tr.granted_subcarriers[u].empty()) continue;
          std::string list;
          for (std::size_t i = 0; i < tr.granted_subcarriers[u].size(); ++i) {
            if (i) list += ' ';
            list += std::to_string(tr.granted_subcarriers[u][i]);
          }
          allocs.write_row({CsvWriter::num((long long)e),
                            CsvWriter::num(tr.slot),
                            CsvWriter::num((long long)u), list,
                            CsvWriter::num(tr.planned_bits[u]),
                            CsvWriter::num(tr.rate_bits[u])});
        }
  }
}

/// Trains one policy at the config's packet size; writes the checkpoint and
/// the per-episode curve. Returns the checkpoint path.
std::string train_policy(const ExperimentConfig& cfg, Policy policy,
                         std::uint64_t seed, const std::string& out_dir) {
  const long long g = cfg.traffic.packet_size_bits;
  const int obs_dim = 3 + cfg.topology.num_subcarriers;
  QmixLearner learner(obs_dim, cfg.scheduler.action_count(),
                      cfg.topology.num_ues(), cfg.trainer,
                      derive_seed(seed, 50));

  CsvWriter curve(out_dir + "/train_curve_" + tag(policy, g, seed) + ".csv",
                  {"episode", "epsilon", "mean_reward", "loss_mean",
                   "updates", "jitter_slots", "violations"});
  QmixModel last_good = learner.online;
  long long last_good_steps = 0;
  try {
    for (int ep = 1; ep <= cfg.trainer.episodes; ++ep) {
      const double eps_at_start = learner.epsilon();
      const EpisodeResult r =
          run_episode(cfg, policy, derive_seed(seed, 10000 + ep),
                      &learner.online, &learner);
      const double loss_mean =
          r.losses.empty()
              ? 0.0
              : std::accumulate(r.losses.begin(), r.losses.end(), 0.0) /
                    double(r.losses.size());
      const long long violations = std::accumulate(
          r.metrics.violations.begin(), r.metrics.violations.end(), 0LL);
      curve.write_row({CsvWriter::num(ep), CsvWriter::num(eps_at_start),
                       CsvWriter::num(r.metrics.mean_reward),
                       CsvWriter::num(loss_mean),
                       CsvWriter::num((long long)r.losses.size()),
                       CsvWriter::num(r.metrics.jitter_slots),
                       CsvWriter::num(violations)});
      last_good = learner.online;
      last_good_steps = learner.train_steps;
    }
  } catch (const std::runtime_error& e) {
    const std::string path = checkpoint_path(out_dir, policy, g, seed);
    save_checkpoint(path, last_good, last_good_steps);
    std::cerr << "training aborted: " << e.what()
              << " (last good checkpoint at " << path << ")\n";
    throw;
  }
  const std::string path = checkpoint_path(out_dir, policy, g, seed);
  save_checkpoint(path, learner.online, learner.train_steps);
  return path;
}

EvalSummary eval_policy_seed(const ExperimentConfig& cfg, Policy policy,
                             const std::string& checkpoint,
                             std::uint64_t seed, const std::string& out_dir) {
  const long long g = cfg.traffic.packet_size_bits;
  QmixModel model;
  const bool learned = policy_is_learned(policy);
  if (learned) {
    if (!fs::exists(checkpoint))
      throw std::invalid_argument("missing checkpoint: " + checkpoint);
    model = load_checkpoint(checkpoint);
  }
  const bool want_logs = cfg.run.dump_event_log || cfg.run.dump_slot_trace ||
                         cfg.run.dump_allocations;
  std::vector<EpisodeResult> full;
  const EvalSummary s = evaluate_policy(
      cfg, policy, learned ? &model : nullptr, derive_seed(seed, 777),
      cfg.run.eval_episodes, default_exec(), want_logs ? &full : nullptr);
  if (want_logs) dump_episode_logs(out_dir, policy, g, seed, cfg, full);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delay-sensitive multi-cell downlink scheduling simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string policy_str = "lgqp";
  std::string checkpoint;
  std::vector<std::uint64_t> seeds;
  int threads = 0;
  std::string exec_mode = "parallel";

  auto add_common = [&](CLI::App* cmd, bool with_policy) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seeds, "seed(s); repeat for multiple")
        ->expected(-1);
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--threads", threads, "OpenMP thread count (0 = default)");
    cmd->add_option("--exec", exec_mode, "kernel mode: serial|parallel")
        ->check(CLI::IsMember({"serial", "parallel"}));
    if (with_policy)
      cmd->add_option("--policy", policy_str, "lgqp|qpips|rr_edf")
          ->check(CLI::IsMember({"lgqp", "qpips", "rr_edf"}));
  };

  CLI::App* train = app.add_subcommand("train", "train a learned scheduler");
  add_common(train, true);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a frozen policy");
  add_common(eval, true);
  eval->add_option("--checkpoint", checkpoint,
                   "checkpoint file (default: the path train writes)");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "packet-size sweep over all three policies");
  add_common(sweep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) {
#ifdef _OPENMP
      omp_set_num_threads(threads);
#endif
    }
    set_default_exec(exec_mode == "serial" ? Exec::serial : Exec::parallel);
    if (seeds.empty()) seeds.push_back(1);

    ExperimentConfig cfg = config_path.empty()
                               ? parse_config_text("")
                               : parse_config(config_path);
    fs::create_directories(out_dir);

    if (train->parsed()) {
      const Policy policy = policy_from_string(policy_str);
      if (!policy_is_learned(policy))
        throw std::invalid_argument("policy rr_edf has nothing to train");
      for (std::uint64_t seed : seeds) {
        const std::string path = train_policy(cfg, policy, seed, out_dir);
        std::cout << "checkpoint: " << path << "\n";
      }
    } else if (eval->parsed()) {
      const Policy policy = policy_from_string(policy_str);
      const long long g = cfg.traffic.packet_size_bits;
      CsvWriter metrics(
          out_dir + "/metrics_" + policy_name(policy) + "_G" +
              std::to_string(g) + ".csv",
          metrics_header(cfg.topology.num_ues()));
      for (std::uint64_t seed : seeds) {
        const std::string path =
            !checkpoint.empty() ? checkpoint
                                : checkpoint_path(out_dir, policy, g, seed);
        const EvalSummary s = eval_policy_seed(cfg, policy, path, seed, out_dir);
        metrics.write_row(metrics_row(policy, g, seed, s));
      }
    } else if (sweep->parsed()) {
      CsvWriter table(out_dir + "/sweep.csv",
                      metrics_header(cfg.topology.num_ues()));
      for (Policy policy :
           {Policy::lgqp, Policy::qpips, Policy::rr_edf}) {  // sorted by name
        for (long long g : cfg.traffic.packet_size_sweep_bits) {
          ExperimentConfig point = cfg;
          point.traffic.packet_size_bits = g;
          for (std::uint64_t seed : seeds) {
            std::string path;
            if (policy_is_learned(policy)) {
              path = checkpoint_path(out_dir, policy, g, seed);
              if (!fs::exists(path)) {
                const std::string written =
                    train_policy(point, policy, seed, out_dir);
                if (written != path)
                  throw std::runtime_error("unexpected checkpoint path");
              }
            }
            const EvalSummary s =
                eval_policy_seed(point, policy, path, seed, out_dir);
            table.write_row(metrics_row(policy, g, seed, s));
          }
        }
      }
      std::cout << "sweep table: " << out_dir << "/sweep.csv\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime abort: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
