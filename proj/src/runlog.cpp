#include "mdpkit/runlog.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mdpkit/version.hpp"

namespace mdpkit {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormatName = "mdpkit-runlog";
constexpr int kFormatVersion = 1;

ordered_json header_json(const MdpInstance& instance, const char* algorithm,
                         ordered_json config) {
  ordered_json h;
  h["type"] = "header";
  h["format"] = kFormatName;
  h["version"] = kFormatVersion;
  h["tool"] = kToolVersion;
  h["algorithm"] = algorithm;
  h["instance_digest"] = instance_digest(instance);
  h["config"] = std::move(config);
  return h;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

ordered_json parse_line(const std::string& line, int number) {
  try {
    ordered_json j = ordered_json::parse(line);
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
      throw ParseError("run log line " + std::to_string(number) + ": missing 'type'");
    }
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("run log line " + std::to_string(number) + ": " + e.what());
  }
}

ordered_json expect_header(const std::vector<std::string>& lines) {
  if (lines.empty()) throw ParseError("run log is empty");
  ordered_json h = parse_line(lines.front(), 1);
  if (h.at("type") != "header" || !h.contains("format") || h.at("format") != kFormatName ||
      !h.contains("version") || h.at("version") != kFormatVersion) {
    throw ParseError("run log line 1: not a " + std::string(kFormatName) + " v" +
                     std::to_string(kFormatVersion) + " header");
  }
  if (!h.contains("algorithm") || !h.contains("instance_digest") || !h.contains("config")) {
    throw ParseError("run log line 1: header is missing required fields");
  }
  return h;
}

template <typename T>
T field(const ordered_json& j, const char* key, int line) {
  if (!j.contains(key)) {
    throw ParseError("run log line " + std::to_string(line) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError("run log line " + std::to_string(line) + ": field '" + key +
                     "' has the wrong type");
  }
}

StationaryPolicy policy_from_json(const MdpInstance& instance, const ordered_json& j,
                                  const char* key, int line) {
  const auto labels = field<std::vector<std::string>>(j, key, line);
  try {
    return policy_from_labels(instance, labels);
  } catch (const std::invalid_argument& e) {
    throw ParseError("run log line " + std::to_string(line) + ": " + e.what());
  }
}

int expect_action_index(const MdpInstance& instance, int x, const std::string& label, int line) {
  const int a = instance.action_index(x, label);
  if (a < 0) {
    throw ParseError("run log line " + std::to_string(line) + ": state " + std::to_string(x) +
                     " has no action labelled '" + label + "'");
  }
  return a;
}

}  // namespace

LogHeaderInfo peek_log_header(const std::string& text) {
  const auto lines = split_lines(text);
  const ordered_json h = expect_header(lines);
  LogHeaderInfo info;
  info.algorithm = field<std::string>(h, "algorithm", 1);
  info.digest = field<std::string>(h, "instance_digest", 1);
  info.tool = field<std::string>(h, "tool", 1);
  return info;
}

std::string online_log_to_jsonl(const MdpInstance& instance, const OnlineRunLog& log) {
  std::ostringstream out;
  ordered_json config;
  config["mode"] = to_string(log.config.mode);
  config["rule"] = to_string(log.config.improvement_rule);
  config["eps"] = log.config.epsilon_improve;
  config["max_steps"] = log.config.max_steps;
  config["stable_window"] = log.config.stable_window;
  config["seed"] = log.config.seed;
  config["x0"] = log.x0;
  config["initial"] = policy_labels(instance, log.initial_policy);
  out << header_json(instance, "online", std::move(config)).dump() << "\n";

  for (const OnlineStep& step : log.steps) {
    ordered_json s;
    s["type"] = "step";
    s["k"] = step.k;
    s["x"] = step.state;
    s["q"] = step.q_values;
    s["u"] = instance.action(step.state, step.chosen_action).label;
    s["changed"] = step.changed;
    if (step.explore_state) {
      s["xbar"] = *step.explore_state;
      s["ubar"] = instance.action(*step.explore_state, *step.explore_action).label;
    }
    if (step.changed) {
      s["edits"] = step.changed_states;
      s["J"] = *step.cost_snapshot;
    }
    s["next"] = step.next_state;
    out << s.dump() << "\n";
  }

  ordered_json f;
  f["type"] = "footer";
  f["final_policy"] = policy_labels(instance, log.final_policy);
  f["final_cost"] = log.final_cost;
  f["final_state"] = log.final_state;
  f["steps"] = log.steps.size();
  f["policy_changes"] = log.policy_changes;
  f["reason"] = to_string(log.reason);
  f["visit_counts"] = log.visit_counts;
  f["recurrent_set"] = log.recurrent_set;
  out << f.dump() << "\n";
  return out.str();
}

OnlineRunLog online_log_from_jsonl(const MdpInstance& instance, const std::string& text) {
  const auto lines = split_lines(text);
  const ordered_json h = expect_header(lines);
  if (h.at("algorithm") != "online") {
    throw ParseError("run log line 1: expected an online run log");
  }
  const ordered_json& config = h.at("config");

  OnlineRunLog log;
  const auto mode = parse_online_mode(field<std::string>(config, "mode", 1));
  if (!mode) throw ParseError("run log line 1: unknown mode");
  log.config.mode = *mode;
  const auto rule = parse_improvement_rule(field<std::string>(config, "rule", 1));
  if (!rule) throw ParseError("run log line 1: unknown improvement rule");
  log.config.improvement_rule = *rule;
  log.config.epsilon_improve = field<double>(config, "eps", 1);
  log.config.max_steps = field<int>(config, "max_steps", 1);
  log.config.stable_window = field<int>(config, "stable_window", 1);
  log.config.seed = field<std::uint64_t>(config, "seed", 1);
  log.x0 = field<int>(config, "x0", 1);
  if (log.x0 < 1 || log.x0 > instance.n) throw ParseError("run log line 1: x0 outside 1..n");
  log.initial_policy = policy_from_json(instance, config, "initial", 1);

  if (lines.size() < 2) throw ParseError("run log has no footer");
  bool saw_footer = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_number = static_cast<int>(i) + 1;
    const ordered_json j = parse_line(lines[i], line_number);
    const std::string type = j.at("type").get<std::string>();
    if (type == "step") {
      if (saw_footer) throw ParseError("run log line " + std::to_string(line_number) +
                                       ": step after footer");
      OnlineStep step;
      step.k = field<int>(j, "k", line_number);
      step.state = field<int>(j, "x", line_number);
      if (step.state < 1 || step.state > instance.n) {
        throw ParseError("run log line " + std::to_string(line_number) + ": state outside 1..n");
      }
      step.q_values = field<std::vector<double>>(j, "q", line_number);
      step.chosen_action = expect_action_index(
          instance, step.state, field<std::string>(j, "u", line_number), line_number);
      step.changed = field<bool>(j, "changed", line_number);
      if (j.contains("xbar")) {
        step.explore_state = field<int>(j, "xbar", line_number);
        if (*step.explore_state < 1 || *step.explore_state > instance.n) {
          throw ParseError("run log line " + std::to_string(line_number) + ": xbar outside 1..n");
        }
        step.explore_action = expect_action_index(
            instance, *step.explore_state, field<std::string>(j, "ubar", line_number),
            line_number);
      }
      if (step.changed) {
        step.changed_states = field<std::vector<int>>(j, "edits", line_number);
        step.cost_snapshot = field<CostVector>(j, "J", line_number);
        if (step.cost_snapshot->size() != static_cast<size_t>(instance.n)) {
          throw ParseError("run log line " + std::to_string(line_number) +
                           ": cost snapshot has the wrong length");
        }
      }
      step.next_state = field<int>(j, "next", line_number);
      log.steps.push_back(std::move(step));
    } else if (type == "footer") {
      if (saw_footer) throw ParseError("run log line " + std::to_string(line_number) +
                                       ": duplicate footer");
      saw_footer = true;
      log.final_policy = policy_from_json(instance, j, "final_policy", line_number);
      log.final_cost = field<CostVector>(j, "final_cost", line_number);
      log.final_state = field<int>(j, "final_state", line_number);
      log.policy_changes = field<int>(j, "policy_changes", line_number);
      const std::string reason = field<std::string>(j, "reason", line_number);
      if (reason == "stable") {
        log.reason = StopReason::stable;
      } else if (reason == "max-steps") {
        log.reason = StopReason::max_steps;
      } else {
        throw ParseError("run log line " + std::to_string(line_number) + ": unknown reason");
      }
      log.visit_counts = field<std::vector<int>>(j, "visit_counts", line_number);
      log.recurrent_set = field<std::vector<int>>(j, "recurrent_set", line_number);
    } else {
      throw ParseError("run log line " + std::to_string(line_number) + ": unknown type '" +
                       type + "'");
    }
  }
  if (!saw_footer) throw ParseError("run log has no footer");
  return log;
}

std::string pi_log_to_jsonl(const MdpInstance& instance, const PiTrace& trace, int max_iters) {
  std::ostringstream out;
  ordered_json config;
  config["initial"] = policy_labels(instance, trace.iterates.front().policy);
  config["max_iters"] = max_iters;
  out << header_json(instance, "pi", std::move(config)).dump() << "\n";
  for (size_t k = 0; k < trace.iterates.size(); ++k) {
    ordered_json s;
    s["type"] = "iter";
    s["k"] = k;
    s["policy"] = policy_labels(instance, trace.iterates[k].policy);
    s["J"] = trace.iterates[k].cost;
    out << s.dump() << "\n";
  }
  ordered_json f;
  f["type"] = "footer";
  f["final_policy"] = policy_labels(instance, trace.iterates.back().policy);
  f["final_cost"] = trace.iterates.back().cost;
  f["iterations"] = trace.iterations;
  f["converged"] = trace.converged;
  out << f.dump() << "\n";
  return out.str();
}

PiLogData pi_log_from_jsonl(const MdpInstance& instance, const std::string& text) {
  const auto lines = split_lines(text);
  const ordered_json h = expect_header(lines);
  if (h.at("algorithm") != "pi") throw ParseError("run log line 1: expected a pi run log");
  PiLogData data;
  data.max_iters = field<int>(h.at("config"), "max_iters", 1);
  bool saw_footer = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_number = static_cast<int>(i) + 1;
    const ordered_json j = parse_line(lines[i], line_number);
    const std::string type = j.at("type").get<std::string>();
    if (type == "iter") {
      PiIterate iterate;
      iterate.policy = policy_from_json(instance, j, "policy", line_number);
      iterate.cost = field<CostVector>(j, "J", line_number);
      data.trace.iterates.push_back(std::move(iterate));
    } else if (type == "footer") {
      saw_footer = true;
      data.trace.iterations = field<int>(j, "iterations", line_number);
      data.trace.converged = field<bool>(j, "converged", line_number);
    } else {
      throw ParseError("run log line " + std::to_string(line_number) + ": unknown type '" +
                       type + "'");
    }
  }
  if (!saw_footer || data.trace.iterates.empty()) {
    throw ParseError("pi run log needs at least one iterate and a footer");
  }
  return data;
}

std::string vi_log_to_jsonl(const MdpInstance& instance, const ViLogData& data) {
  std::ostringstream out;
  ordered_json config;
  config["j0"] = data.j0;
  config["tol"] = data.tol;
  config["max_iters"] = data.max_iters;
  out << header_json(instance, "vi", std::move(config)).dump() << "\n";
  for (size_t k = 0; k < data.result.step_sup_norms.size(); ++k) {
    ordered_json s;
    s["type"] = "iter";
    s["k"] = k + 1;
    s["step"] = data.result.step_sup_norms[k];
    out << s.dump() << "\n";
  }
  ordered_json f;
  f["type"] = "footer";
  f["final_cost"] = data.result.cost;
  f["greedy_policy"] = policy_labels(instance, data.greedy);
  f["iterations"] = data.result.iterations;
  f["converged"] = data.result.converged;
  out << f.dump() << "\n";
  return out.str();
}

ViLogData vi_log_from_jsonl(const MdpInstance& instance, const std::string& text) {
  const auto lines = split_lines(text);
  const ordered_json h = expect_header(lines);
  if (h.at("algorithm") != "vi") throw ParseError("run log line 1: expected a vi run log");
  ViLogData data;
  const ordered_json& config = h.at("config");
  data.j0 = field<CostVector>(config, "j0", 1);
  data.tol = field<double>(config, "tol", 1);
  data.max_iters = field<int>(config, "max_iters", 1);
  bool saw_footer = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_number = static_cast<int>(i) + 1;
    const ordered_json j = parse_line(lines[i], line_number);
    const std::string type = j.at("type").get<std::string>();
    if (type == "iter") {
      data.result.step_sup_norms.push_back(field<double>(j, "step", line_number));
    } else if (type == "footer") {
      saw_footer = true;
      data.result.cost = field<CostVector>(j, "final_cost", line_number);
      data.greedy = policy_from_json(instance, j, "greedy_policy", line_number);
      data.result.iterations = field<int>(j, "iterations", line_number);
      data.result.converged = field<bool>(j, "converged", line_number);
    } else {
      throw ParseError("run log line " + std::to_string(line_number) + ": unknown type '" +
                       type + "'");
    }
  }
  if (!saw_footer) throw ParseError("vi run log has no footer");
  return data;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

}  // namespace mdpkit
