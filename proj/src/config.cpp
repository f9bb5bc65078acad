#include "schedsim/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace schedsim {

using nlohmann::json;

void TrafficConfig::validate(int num_ues) const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("traffic: " + what);
  };
  if (packet_size_bits < 1) fail("packet_size_bits must be >= 1");
  if (packet_size_sweep_bits.empty()) fail("packet_size_sweep_bits is empty");
  for (long long g : packet_size_sweep_bits)
    if (g < 1) fail("sweep packet sizes must be >= 1");
  if (arrival_rate < 0.0) fail("arrival_rate must be >= 0");
  if (int(deadlines_slots.size()) != num_ues)
    fail("deadlines_slots must have one entry per UE");
  for (long long d : deadlines_slots)
    if (d < 1) fail("deadlines must be >= 1 slot");
  if (!(violation_bound > 0.0 && violation_bound < 1.0))
    fail("violation_bound: probability out of range");
}

void RunConfig::validate() const {
  if (eval_episodes < 1)
    throw std::invalid_argument("run: eval_episodes must be >= 1");
}

void ExperimentConfig::validate() const {
  topology.validate();
  traffic.validate(topology.num_ues());
  reward.validate();
  trainer.validate();
  scheduler.validate();
  run.validate();
}

namespace {

json to_json(const ExperimentConfig& c) {
  json j;
  j["topology"] = {
      {"num_bs", c.topology.num_bs},
      {"ues_per_bs", c.topology.ues_per_bs},
      {"num_subcarriers", c.topology.num_subcarriers},
      {"num_antennas", c.topology.num_antennas},
      {"cell_radius_m", c.topology.cell_radius_m},
      {"ref_distance_m", c.topology.ref_distance_m},
      {"path_loss_exponent", c.topology.path_loss_exponent},
      {"noise_power_w", c.topology.noise_power_w},
      {"max_power_w", c.topology.max_power_w},
      {"block_error_rate", c.topology.block_error_rate},
      {"inter_site_distance_m", c.topology.inter_site_distance_m},
      {"bs_ue_distance_m", c.topology.bs_ue_distance_m},
  };
  j["traffic"] = {
      {"packet_size_bits", c.traffic.packet_size_bits},
      {"packet_size_sweep_bits", c.traffic.packet_size_sweep_bits},
      {"arrival_rate", c.traffic.arrival_rate},
      {"deadlines_slots", c.traffic.deadlines_slots},
      {"violation_bound", c.traffic.violation_bound},
      {"drop_on_expiry", c.traffic.drop_on_expiry},
  };
  j["reward"] = {
      {"penalty_mu", c.reward.penalty_mu},
      {"scale_omega", c.reward.scale_omega},
      {"bias", c.reward.bias},
      {"qpips_delta", c.reward.qpips_delta},
      {"drift_const", c.reward.drift_const},
  };
  j["trainer"] = {
      {"learning_rate", c.trainer.learning_rate},
      {"discount", c.trainer.discount},
      {"batch_size", c.trainer.batch_size},
      {"buffer_capacity", c.trainer.buffer_capacity},
      {"target_sync_period", c.trainer.target_sync_period},
      {"epsilon_start", c.trainer.epsilon_start},
      {"epsilon_end", c.trainer.epsilon_end},
      {"epsilon_decay_steps", c.trainer.epsilon_decay_steps},
      {"episodes", c.trainer.episodes},
      {"slots_per_episode", c.trainer.slots_per_episode},
      {"train_interval_slots", c.trainer.train_interval_slots},
      {"warmup_transitions", c.trainer.warmup_transitions},
      {"optimizer", c.trainer.optimizer},
      {"grad_clip_norm", c.trainer.grad_clip_norm},
      {"shared_parameters", c.trainer.shared_parameters},
      {"hidden_units", c.trainer.hidden_units},
      {"mixing_width", c.trainer.mixing_width},
      {"mixing_head_hidden", c.trainer.mixing_head_hidden},
  };
  j["scheduler"] = {
      {"priority_levels", c.scheduler.priority_levels},
      {"max_request_packets", c.scheduler.max_request_packets},
      {"shared_subcarrier_pool", c.scheduler.shared_subcarrier_pool},
  };
  j["run"] = {
      {"eval_episodes", c.run.eval_episodes},
      {"dump_event_log", c.run.dump_event_log},
      {"dump_slot_trace", c.run.dump_slot_trace},
      {"dump_allocations", c.run.dump_allocations},
  };
  return j;
}

template <typename T>
void read_field(const json& section, const std::string& section_name,
                const char* key, T& dest) {
  auto it = section.find(key);
  if (it == section.end()) return;
  try {
    dest = it->get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config: bad value for " + section_name +
                                "." + key);
  }
}

void apply_section(const json& j, const std::string& name,
                   const std::vector<std::string>& known,
                   const std::function<void(const json&)>& reader) {
  auto it = j.find(name);
  if (it == j.end()) return;
  if (!it->is_object())
    throw std::invalid_argument("config: section " + name +
                                " must be an object");
  for (auto entry = it->begin(); entry != it->end(); ++entry) {
    bool ok = false;
    for (const auto& k : known)
      if (k == entry.key()) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config: unknown key " + name + "." +
                                  entry.key());
  }
  reader(*it);
}

ExperimentConfig from_json(const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be an object");
  static const std::vector<std::string> sections = {
      "topology", "traffic", "reward", "trainer", "scheduler", "run"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& s : sections)
      if (s == it.key()) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config: unknown key " + it.key());
  }

  ExperimentConfig c;
  apply_section(j, "topology",
                {"num_bs", "ues_per_bs", "num_subcarriers", "num_antennas",
                 "cell_radius_m", "ref_distance_m", "path_loss_exponent",
                 "noise_power_w", "max_power_w", "block_error_rate",
                 "inter_site_distance_m", "bs_ue_distance_m"},
                [&](const json& s) {
                  read_field(s, "topology", "num_bs", c.topology.num_bs);
                  read_field(s, "topology", "ues_per_bs",
                             c.topology.ues_per_bs);
                  read_field(s, "topology", "num_subcarriers",
                             c.topology.num_subcarriers);
                  read_field(s, "topology", "num_antennas",
                             c.topology.num_antennas);
                  read_field(s, "topology", "cell_radius_m",
                             c.topology.cell_radius_m);
                  read_field(s, "topology", "ref_distance_m",
                             c.topology.ref_distance_m);
                  read_field(s, "topology", "path_loss_exponent",
                             c.topology.path_loss_exponent);
                  read_field(s, "topology", "noise_power_w",
                             c.topology.noise_power_w);
                  read_field(s, "topology", "max_power_w",
                             c.topology.max_power_w);
                  read_field(s, "topology", "block_error_rate",
                             c.topology.block_error_rate);
                  read_field(s, "topology", "inter_site_distance_m",
                             c.topology.inter_site_distance_m);
                  read_field(s, "topology", "bs_ue_distance_m",
                             c.topology.bs_ue_distance_m);
                });
  apply_section(j, "traffic",
                {"packet_size_bits", "packet_size_sweep_bits", "arrival_rate",
                 "deadlines_slots", "violation_bound", "drop_on_expiry"},
                [&](const json& s) {
                  read_field(s, "traffic", "packet_size_bits",
                             c.traffic.packet_size_bits);
                  read_field(s, "traffic", "packet_size_sweep_bits",
                             c.traffic.packet_size_sweep_bits);
                  read_field(s, "traffic", "arrival_rate",
                             c.traffic.arrival_rate);
                  read_field(s, "traffic", "deadlines_slots",
                             c.traffic.deadlines_slots);
                  read_field(s, "traffic", "violation_bound",
                             c.traffic.violation_bound);
                  read_field(s, "traffic", "drop_on_expiry",
                             c.traffic.drop_on_expiry);
                });
  apply_section(j, "reward",
                {"penalty_mu", "scale_omega", "bias", "qpips_delta",
                 "drift_const"},
                [&](const json& s) {
                  read_field(s, "reward", "penalty_mu", c.reward.penalty_mu);
                  read_field(s, "reward", "scale_omega",
                             c.reward.scale_omega);
                  read_field(s, "reward", "bias", c.reward.bias);
                  read_field(s, "reward", "qpips_delta",
                             c.reward.qpips_delta);
                  read_field(s, "reward", "drift_const",
                             c.reward.drift_const);
                });
  apply_section(
      j, "trainer",
      {"learning_rate", "discount", "batch_size", "buffer_capacity",
       "target_sync_period", "epsilon_start", "epsilon_end",
       "epsilon_decay_steps", "episodes", "slots_per_episode",
       "train_interval_slots", "warmup_transitions", "optimizer",
       "grad_clip_norm", "shared_parameters", "hidden_units", "mixing_width",
       "mixing_head_hidden"},
      [&](const json& s) {
        read_field(s, "trainer", "learning_rate", c.trainer.learning_rate);
        read_field(s, "trainer", "discount", c.trainer.discount);
        read_field(s, "trainer", "batch_size", c.trainer.batch_size);
        read_field(s, "trainer", "buffer_capacity",
                   c.trainer.buffer_capacity);
        read_field(s, "trainer", "target_sync_period",
                   c.trainer.target_sync_period);
        read_field(s, "trainer", "epsilon_start", c.trainer.epsilon_start);
        read_field(s, "trainer", "epsilon_end", c.trainer.epsilon_end);
        read_field(s, "trainer", "epsilon_decay_steps",
                   c.trainer.epsilon_decay_steps);
        read_field(s, "trainer", "episodes", c.trainer.episodes);
        read_field(s, "trainer", "slots_per_episode",
                   c.trainer.slots_per_episode);
        read_field(s, "trainer", "train_interval_slots",
                   c.trainer.train_interval_slots);
        read_field(s, "trainer", "warmup_transitions",
                   c.trainer.warmup_transitions);
        read_field(s, "trainer", "optimizer", c.trainer.optimizer);
        read_field(s, "trainer", "grad_clip_norm", c.trainer.grad_clip_norm);
        read_field(s, "trainer", "shared_parameters",
                   c.trainer.shared_parameters);
        read_field(s, "trainer", "hidden_units", c.trainer.hidden_units);
        read_field(s, "trainer", "mixing_width", c.trainer.mixing_width);
        read_field(s, "trainer", "mixing_head_hidden",
                   c.trainer.mixing_head_hidden);
      });
  apply_section(j, "scheduler",
                {"priority_levels", "max_request_packets",
                 "shared_subcarrier_pool"},
                [&](const json& s) {
                  read_field(s, "scheduler", "priority_levels",
                             c.scheduler.priority_levels);
                  read_field(s, "scheduler", "max_request_packets",
                             c.scheduler.max_request_packets);
                  read_field(s, "scheduler", "shared_subcarrier_pool",
                             c.scheduler.shared_subcarrier_pool);
                });
  apply_section(j, "run",
                {"eval_episodes", "dump_event_log", "dump_slot_trace",
                 "dump_allocations"},
                [&](const json& s) {
                  read_field(s, "run", "eval_episodes", c.run.eval_episodes);
                  read_field(s, "run", "dump_event_log",
                             c.run.dump_event_log);
                  read_field(s, "run", "dump_slot_trace",
                             c.run.dump_slot_trace);
                  read_field(s, "run", "dump_allocations",
                             c.run.dump_allocations);
                });
  return c;
}

void collect_paths(const json& j, const std::string& prefix,
                   std::vector<std::string>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string path =
        prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      collect_paths(*it, path, out);
    else
      out.push_back(path);
  }
}

/// SCHEDSIM_<SECTION>__<KEY> environment variables override file values.
void apply_env_overrides(json& j) {
  std::vector<std::string> paths;
  collect_paths(j, "", paths);
  for (const auto& path : paths) {
    std::string name = "SCHEDSIM_";
    for (char ch : path)
      name += ch == '.' ? std::string("__")
                        : std::string(1, char(std::toupper(ch)));
    const char* value = std::getenv(name.c_str());
    if (!value) continue;
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = std::string(value);  // bare strings allowed
    }
    json* node = &j;
    std::string rest = path;
    std::size_t dot;
    while ((dot = rest.find('.')) != std::string::npos) {
      node = &(*node)[rest.substr(0, dot)];
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = parsed;
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  bool blank = true;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      blank = false;
      break;
    }

  json j;
  if (blank) {
    j = to_json(ExperimentConfig{});
  } else {
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("config: malformed JSON: ") +
                                  e.what());
    }
    // fill defaults so env overrides can target any key
    json defaults = to_json(from_json(j));
    j = defaults;
  }
  apply_env_overrides(j);
  ExperimentConfig cfg = from_json(j);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  return to_json(cfg).dump(2);
}

}  // namespace schedsim
