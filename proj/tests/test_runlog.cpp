#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "mdpkit/bellman.hpp"
#include "mdpkit/classical_pi.hpp"
#include "mdpkit/model.hpp"
#include "mdpkit/online_pi.hpp"
#include "mdpkit/runlog.hpp"
#include "mdpkit/version.hpp"

using namespace mdpkit;

namespace {

OnlineRunLog sample_run(OnlineMode mode, std::uint64_t seed) {
  const MdpInstance m = build_counterexample();
  OnlineConfig config;
  config.mode = mode;
  config.max_steps = 200;
  config.seed = seed;
  return run_online_pi(m, 1, counterexample_mubar(), config);
}

}  // namespace

TEST_CASE("online logs round-trip through jsonl") {
  const MdpInstance m = build_counterexample();
  const OnlineRunLog log = sample_run(OnlineMode::exploration, 3);
  REQUIRE(log.policy_changes >= 1);  // the interesting fields must be exercised

  const std::string text = online_log_to_jsonl(m, log);
  const OnlineRunLog back = online_log_from_jsonl(m, text);

  CHECK(back.config.mode == log.config.mode);
  CHECK(back.config.improvement_rule == log.config.improvement_rule);
  CHECK(back.config.epsilon_improve == log.config.epsilon_improve);
  CHECK(back.config.max_steps == log.config.max_steps);
  CHECK(back.config.stable_window == log.config.stable_window);
  CHECK(back.config.seed == log.config.seed);
  CHECK(back.x0 == log.x0);
  CHECK(back.initial_policy == log.initial_policy);
  REQUIRE(back.steps.size() == log.steps.size());
  for (size_t i = 0; i < log.steps.size(); ++i) {
    CHECK(back.steps[i].k == log.steps[i].k);
    CHECK(back.steps[i].state == log.steps[i].state);
    CHECK(back.steps[i].q_values == log.steps[i].q_values);
    CHECK(back.steps[i].chosen_action == log.steps[i].chosen_action);
    CHECK(back.steps[i].changed == log.steps[i].changed);
    CHECK(back.steps[i].changed_states == log.steps[i].changed_states);
    CHECK(back.steps[i].explore_state == log.steps[i].explore_state);
    CHECK(back.steps[i].explore_action == log.steps[i].explore_action);
    CHECK(back.steps[i].cost_snapshot == log.steps[i].cost_snapshot);
    CHECK(back.steps[i].next_state == log.steps[i].next_state);
  }
  CHECK(back.final_policy == log.final_policy);
  CHECK(back.final_cost == log.final_cost);
  CHECK(back.final_state == log.final_state);
  CHECK(back.policy_changes == log.policy_changes);
  CHECK(back.reason == log.reason);
  CHECK(back.visit_counts == log.visit_counts);
  CHECK(back.recurrent_set == log.recurrent_set);

  // Serializing the parsed log gives back the same bytes.
  CHECK(online_log_to_jsonl(m, back) == text);
}

TEST_CASE("a parsed log replays to the identical byte stream") {
  const MdpInstance m = build_counterexample();
  const OnlineRunLog log = sample_run(OnlineMode::exploration, 11);
  const std::string text = online_log_to_jsonl(m, log);

  const OnlineRunLog parsed = online_log_from_jsonl(m, text);
  const OnlineRunLog replayed = run_online_pi(m, parsed.x0, parsed.initial_policy, parsed.config);
  CHECK(online_log_to_jsonl(m, replayed) == text);
}

TEST_CASE("the header pins tool, algorithm and instance digest") {
  const MdpInstance m = build_counterexample();
  const std::string text = online_log_to_jsonl(m, sample_run(OnlineMode::plain, 1));
  const LogHeaderInfo info = peek_log_header(text);
  CHECK(info.algorithm == "online");
  CHECK(info.digest == instance_digest(m));
  CHECK(info.tool == kToolVersion);
}

TEST_CASE("malformed online logs fail with the offending line") {
  const MdpInstance m = build_counterexample();
  const std::string text = online_log_to_jsonl(m, sample_run(OnlineMode::plain, 1));

  SUBCASE("empty input") {
    CHECK_THROWS_AS((void)online_log_from_jsonl(m, ""), ParseError);
  }
  SUBCASE("missing footer") {
    const std::string truncated = text.substr(0, text.rfind("{\"type\":\"footer\""));
    CHECK_THROWS_WITH_AS((void)online_log_from_jsonl(m, truncated), doctest::Contains("footer"),
                         ParseError);
  }
  SUBCASE("garbage line") {
    std::string broken = text;
    const auto pos = broken.find('\n');
    broken.insert(pos + 1, "not json\n");
    CHECK_THROWS_WITH_AS((void)online_log_from_jsonl(m, broken), doctest::Contains("line 2"),
                         ParseError);
  }
  SUBCASE("unknown action label") {
    std::string broken = text;
    const auto pos = broken.find("\"u\":\"to2\"");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 9, "\"u\":\"zzz\"");
    CHECK_THROWS_WITH_AS((void)online_log_from_jsonl(m, broken), doctest::Contains("zzz"),
                         ParseError);
  }
  SUBCASE("wrong header format") {
    std::string broken = text;
    const auto pos = broken.find("mdpkit-runlog");
    broken.replace(pos, 13, "something-odd");
    CHECK_THROWS_AS((void)online_log_from_jsonl(m, broken), ParseError);
  }
}

TEST_CASE("a corrupted cost snapshot is caught by verification, not parsing") {
  const MdpInstance m = build_counterexample();
  const OnlineRunLog log = sample_run(OnlineMode::exploration, 3);
  const std::string text = online_log_to_jsonl(m, log);

  OnlineRunLog tampered = online_log_from_jsonl(m, text);
  REQUIRE(verify_run(m, tampered).all_ok());
  bool flipped = false;
  for (OnlineStep& step : tampered.steps) {
    if (step.cost_snapshot) {
      // Claim the edited state already had a much lower cost than it did.
      (*step.cost_snapshot)[static_cast<size_t>(step.changed_states.front() - 1)] = -1000.0;
      flipped = true;
      break;
    }
  }
  REQUIRE(flipped);
  CHECK_FALSE(verify_run(m, tampered).all_ok());
}

TEST_CASE("pi traces round-trip through jsonl") {
  const MdpInstance m = build_counterexample();
  const PiTrace trace = run_classical_pi(m, counterexample_mubar(), 50);
  const std::string text = pi_log_to_jsonl(m, trace, 50);

  const PiLogData data = pi_log_from_jsonl(m, text);
  CHECK(data.max_iters == 50);
  CHECK(data.trace.converged == trace.converged);
  CHECK(data.trace.iterations == trace.iterations);
  REQUIRE(data.trace.iterates.size() == trace.iterates.size());
  for (size_t k = 0; k < trace.iterates.size(); ++k) {
    CHECK(data.trace.iterates[k].policy == trace.iterates[k].policy);
    CHECK(data.trace.iterates[k].cost == trace.iterates[k].cost);
  }
  CHECK(pi_log_to_jsonl(m, data.trace, data.max_iters) == text);
  CHECK(peek_log_header(text).algorithm == "pi");
}

TEST_CASE("vi runs round-trip through jsonl") {
  const MdpInstance m = build_counterexample();
  ViLogData data;
  data.j0 = CostVector(3, 50.0);
  data.tol = 1e-9;
  data.max_iters = 1000;
  data.result = value_iteration(m, data.j0, data.tol, data.max_iters);
  data.greedy = greedy_policy(m, data.result.cost);

  const std::string text = vi_log_to_jsonl(m, data);
  const ViLogData back = vi_log_from_jsonl(m, text);
  CHECK(back.j0 == data.j0);
  CHECK(back.tol == data.tol);
  CHECK(back.max_iters == data.max_iters);
  CHECK(back.result.cost == data.result.cost);
  CHECK(back.result.iterations == data.result.iterations);
  CHECK(back.result.converged == data.result.converged);
  CHECK(back.result.step_sup_norms == data.result.step_sup_norms);
  CHECK(back.greedy == data.greedy);
  CHECK(vi_log_to_jsonl(m, back) == text);
  CHECK(peek_log_header(text).algorithm == "vi");
}

TEST_CASE("logs from one algorithm refuse to parse as another") {
  const MdpInstance m = build_counterexample();
  const std::string online_text = online_log_to_jsonl(m, sample_run(OnlineMode::plain, 1));
  CHECK_THROWS_AS((void)pi_log_from_jsonl(m, online_text), ParseError);
  CHECK_THROWS_AS((void)vi_log_from_jsonl(m, online_text), ParseError);

  const PiTrace trace = run_classical_pi(m, counterexample_mubar(), 50);
  const std::string pi_text = pi_log_to_jsonl(m, trace, 50);
  CHECK_THROWS_AS((void)online_log_from_jsonl(m, pi_text), ParseError);
}

TEST_CASE("text files round-trip bytes exactly") {
  const std::string path = "runlog_roundtrip_test.tmp";
  const std::string payload = "line one\nline two\n";
  write_text_file(path, payload);
  CHECK(read_text_file(path) == payload);
  CHECK_THROWS_AS((void)read_text_file("definitely/not/a/real/path.jsonl"), ParseError);
  std::remove(path.c_str());
}
