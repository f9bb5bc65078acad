#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "schedsim/config.hpp"

using namespace schedsim;

TEST_CASE("an empty file yields the reference defaults") {
  const ExperimentConfig cfg = parse_config_text("  \n\t ");
  CHECK(cfg.topology.num_bs == 3);
  CHECK(cfg.topology.ues_per_bs == 2);
  CHECK(cfg.topology.num_subcarriers == 32);
  CHECK(cfg.topology.num_antennas == 16);
  CHECK(cfg.topology.cell_radius_m == doctest::Approx(40.0));
  CHECK(cfg.topology.ref_distance_m == doctest::Approx(1.0));
  CHECK(cfg.topology.path_loss_exponent == doctest::Approx(2.0));
  CHECK(cfg.topology.noise_power_w ==
        doctest::Approx(1.2589254117941663e-16).epsilon(1e-12));
  CHECK(cfg.topology.max_power_w == doctest::Approx(10.0));
  CHECK(cfg.topology.block_error_rate == doctest::Approx(1e-9));
  CHECK(cfg.traffic.packet_size_bits == 28);
  CHECK(cfg.traffic.packet_size_sweep_bits ==
        std::vector<long long>{28, 40, 52, 64, 76});
  CHECK(cfg.traffic.arrival_rate == doctest::Approx(3.0));
  CHECK(cfg.traffic.deadlines_slots == std::vector<long long>{5, 2, 5, 3, 2, 2});
  CHECK(cfg.traffic.violation_bound == doctest::Approx(0.01));
  CHECK(cfg.reward.penalty_mu == doctest::Approx(50.0));
  CHECK(cfg.reward.scale_omega == doctest::Approx(500.0));
  CHECK(cfg.reward.bias == doctest::Approx(1.0));
  CHECK(cfg.trainer.learning_rate == doctest::Approx(5e-4));
  CHECK(cfg.trainer.discount == doctest::Approx(0.85));
  CHECK(cfg.trainer.batch_size == 4096);
  CHECK(cfg.trainer.buffer_capacity == 50000);
  CHECK(cfg.trainer.episodes == 2000);
  CHECK(cfg.trainer.slots_per_episode == 50);
  CHECK(cfg.trainer.hidden_units == 64);
  CHECK(cfg.scheduler.priority_levels == 4);
  CHECK(cfg.scheduler.max_request_packets == 5);
  CHECK(cfg.scheduler.action_count() == 24);
}

TEST_CASE("out-of-range probabilities are rejected with the key path") {
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"traffic": {"violation_bound": 1.5}})"),
      "traffic: violation_bound: probability out of range",
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_config_text(R"({"topology": {"block_error_rate": 0.7}})"),
      std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text(R"({"trainer": {"discount": 1.2}})"),
                  std::invalid_argument);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"nonsense": 1})"),
                       "config: unknown key nonsense", std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"traffic": {"foo": 1}})"),
                       "config: unknown key traffic.foo",
                       std::invalid_argument);
}

TEST_CASE("malformed JSON reports a config error") {
  CHECK_THROWS_AS(parse_config_text("{ not json"), std::invalid_argument);
}

TEST_CASE("emitting defaults and re-parsing is the identity") {
  const ExperimentConfig defaults = parse_config_text("");
  const std::string emitted = config_to_json(defaults);
  const ExperimentConfig reparsed = parse_config_text(emitted);
  CHECK(config_to_json(reparsed) == emitted);
}

TEST_CASE("partial files keep every other default") {
  const ExperimentConfig cfg =
      parse_config_text(R"({"traffic": {"packet_size_bits": 52}})");
  CHECK(cfg.traffic.packet_size_bits == 52);
  CHECK(cfg.topology.num_subcarriers == 32);
  CHECK(cfg.trainer.batch_size == 4096);
}

TEST_CASE("environment variables override file values") {
  setenv("SCHEDSIM_TRAINER__BATCH_SIZE", "128", 1);
  setenv("SCHEDSIM_TRAFFIC__PACKET_SIZE_BITS", "40", 1);
  const ExperimentConfig cfg = parse_config_text("");
  unsetenv("SCHEDSIM_TRAINER__BATCH_SIZE");
  unsetenv("SCHEDSIM_TRAFFIC__PACKET_SIZE_BITS");
  CHECK(cfg.trainer.batch_size == 128);
  CHECK(cfg.traffic.packet_size_bits == 40);
}

TEST_CASE("deadline vector must cover every user") {
  CHECK_THROWS_AS(
      parse_config_text(R"({"traffic": {"deadlines_slots": [5, 2]}})"),
      std::invalid_argument);
  const ExperimentConfig ok = parse_config_text(
      R"({"topology": {"num_bs": 1, "ues_per_bs": 2},
          "traffic": {"deadlines_slots": [5, 2]}})");
  CHECK(ok.topology.num_ues() == 2);
}
