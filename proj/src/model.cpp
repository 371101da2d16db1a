#include "mdpkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mdpkit/rng.hpp"

namespace mdpkit {

using ordered_json = nlohmann::ordered_json;

int MdpInstance::action_index(int x, std::string_view label) const {
  const auto& acts = state(x).actions;
  for (size_t a = 0; a < acts.size(); ++a) {
    if (acts[a].label == label) return static_cast<int>(a);
  }
  return -1;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations) out << v.where << ": " << v.message << "\n";
  return out.str();
}

namespace {

std::string state_where(int id) { return "state " + std::to_string(id); }

std::string action_where(int id, const std::string& label) {
  return "state " + std::to_string(id) + ", action '" + label + "'";
}

}  // namespace

ValidationReport validate(const MdpInstance& instance) {
  ValidationReport report;
  auto flag = [&report](std::string where, std::string message) {
    report.violations.push_back({std::move(where), std::move(message)});
  };

  if (instance.n < 1) {
    flag("field n", "n must be a positive integer, got " + std::to_string(instance.n));
    return report;
  }
  if (!(instance.discount > 0.0) || !(instance.discount < 1.0) ||
      !std::isfinite(instance.discount)) {
    flag("field discount", "discount must lie strictly inside (0, 1)");
  }
  if (static_cast<int>(instance.states.size()) != instance.n) {
    flag("field states", "expected " + std::to_string(instance.n) + " states, got " +
                             std::to_string(instance.states.size()));
    return report;
  }

  for (int x = 1; x <= instance.n; ++x) {
    const MdpState& st = instance.state(x);
    if (st.id != x) {
      flag(state_where(x), "state id " + std::to_string(st.id) + " out of place");
      continue;
    }
    if (st.actions.empty()) {
      flag(state_where(x), "no actions declared; every state needs at least one");
      continue;
    }
    std::set<std::string> labels;
    for (const MdpAction& act : st.actions) {
      if (!labels.insert(act.label).second) {
        flag(action_where(x, act.label), "duplicate action label");
      }
      const std::string where = action_where(x, act.label);
      if (act.successors.empty()) {
        flag(where, "no transitions declared");
        continue;
      }
      if (act.probs.size() != act.successors.size() ||
          act.costs.size() != act.successors.size()) {
        flag(where, "every transition entry needs exactly one cost entry");
        continue;
      }
      std::set<int> seen;
      double row_sum = 0.0;
      for (size_t i = 0; i < act.successors.size(); ++i) {
        const int to = act.successors[i];
        if (to < 1 || to > instance.n) {
          flag(where, "successor " + std::to_string(to) + " outside 1.." +
                          std::to_string(instance.n));
        } else if (!seen.insert(to).second) {
          flag(where, "successor " + std::to_string(to) + " listed twice");
        }
        const double p = act.probs[i];
        if (!std::isfinite(p) || p < 0.0) {
          flag(where, "probability to " + std::to_string(to) + " must be finite and >= 0");
        }
        if (!std::isfinite(act.costs[i])) {
          flag(where, "cost to " + std::to_string(to) + " must be finite");
        }
        row_sum += p;
      }
      if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12g", row_sum);
        flag(where, std::string("probabilities sum to ") + buf + ", expected 1 within 1e-9");
      }
    }
  }
  return report;
}

namespace {

[[noreturn]] void parse_fail(const std::string& context, const std::string& what) {
  throw ParseError(context.empty() ? what : context + ": " + what);
}

void require_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                  const std::string& context) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) parse_fail(context, "unknown field '" + item.key() + "'");
  }
}

int get_int(const ordered_json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) parse_fail(context, std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) parse_fail(context, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

double get_number(const ordered_json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) parse_fail(context, std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) parse_fail(context, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const ordered_json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key)) parse_fail(context, std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_string()) parse_fail(context, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

const ordered_json& get_array(const ordered_json& obj, const char* key,
                              const std::string& context) {
  if (!obj.contains(key)) parse_fail(context, std::string("missing field '") + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_array()) parse_fail(context, std::string("field '") + key + "' must be an array");
  return v;
}

MdpAction parse_action(const ordered_json& node, const std::string& context) {
  if (!node.is_object()) parse_fail(context, "action entries must be objects");
  require_keys(node, {"label", "transitions", "costs"}, context);
  MdpAction act;
  act.label = get_string(node, "label", context);
  const std::string where = context + ", action '" + act.label + "'";

  for (const auto& t : get_array(node, "transitions", where)) {
    if (!t.is_object()) parse_fail(where, "transition entries must be objects");
    require_keys(t, {"to", "p"}, where);
    act.successors.push_back(get_int(t, "to", where));
    act.probs.push_back(get_number(t, "p", where));
  }

  // Costs are keyed by successor in the file; pair them up with the
  // transition list so the in-memory arrays stay aligned.
  std::vector<std::pair<int, double>> costs;
  for (const auto& c : get_array(node, "costs", where)) {
    if (!c.is_object()) parse_fail(where, "cost entries must be objects");
    require_keys(c, {"to", "g"}, where);
    costs.emplace_back(get_int(c, "to", where), get_number(c, "g", where));
  }
  act.costs.resize(act.successors.size());
  std::vector<bool> matched(act.successors.size(), false);
  for (const auto& [to, g] : costs) {
    bool found = false;
    for (size_t i = 0; i < act.successors.size(); ++i) {
      if (act.successors[i] == to && !matched[i]) {
        act.costs[i] = g;
        matched[i] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      parse_fail(where, "cost entry for successor " + std::to_string(to) +
                            " has no matching transition");
    }
  }
  for (size_t i = 0; i < matched.size(); ++i) {
    if (!matched[i]) {
      parse_fail(where, "transition to " + std::to_string(act.successors[i]) +
                            " has no cost entry");
    }
  }
  return act;
}

}  // namespace

MdpInstance load_instance(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) parse_fail("", "top level must be an object");
  require_keys(root, {"n", "discount", "states"}, "top level");

  MdpInstance instance;
  instance.n = get_int(root, "n", "top level");
  instance.discount = get_number(root, "discount", "top level");

  int expected_id = 1;
  for (const auto& s : get_array(root, "states", "top level")) {
    if (!s.is_object()) parse_fail("field states", "state entries must be objects");
    require_keys(s, {"id", "actions"}, "field states");
    MdpState st;
    st.id = get_int(s, "id", "field states");
    if (st.id != expected_id) {
      parse_fail("field states", "expected state id " + std::to_string(expected_id) +
                                     ", got " + std::to_string(st.id) +
                                     " (ids must run 1..n in order)");
    }
    ++expected_id;
    const std::string context = state_where(st.id);
    for (const auto& a : get_array(s, "actions", context)) {
      st.actions.push_back(parse_action(a, context));
    }
    instance.states.push_back(std::move(st));
  }

  ValidationReport report = validate(instance);
  if (!report.ok()) {
    throw ValidationError("instance failed validation:\n" + report.to_string(),
                          std::move(report));
  }
  return instance;
}

MdpInstance load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_instance(buf.str());
}

std::string save_instance(const MdpInstance& instance) {
  ordered_json root;
  root["n"] = instance.n;
  root["discount"] = instance.discount;
  root["states"] = ordered_json::array();
  for (const MdpState& st : instance.states) {
    ordered_json s;
    s["id"] = st.id;
    s["actions"] = ordered_json::array();
    for (const MdpAction& act : st.actions) {
      ordered_json a;
      a["label"] = act.label;
      a["transitions"] = ordered_json::array();
      a["costs"] = ordered_json::array();
      for (size_t i = 0; i < act.successors.size(); ++i) {
        a["transitions"].push_back({{"to", act.successors[i]}, {"p", act.probs[i]}});
        a["costs"].push_back({{"to", act.successors[i]}, {"g", act.costs[i]}});
      }
      s["actions"].push_back(std::move(a));
    }
    root["states"].push_back(std::move(s));
  }
  return root.dump(2) + "\n";
}

void save_instance_file(const MdpInstance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write instance file: " + path);
  out << save_instance(instance);
}

namespace {

MdpAction deterministic_action(std::string label, int to, double cost) {
  MdpAction act;
  act.label = std::move(label);
  act.successors = {to};
  act.probs = {1.0};
  act.costs = {cost};
  return act;
}

}  // namespace

MdpInstance build_counterexample() {
  MdpInstance m;
  m.n = 3;
  m.discount = 0.9;
  m.states.resize(3);
  m.states[0].id = 1;
  m.states[0].actions = {deterministic_action("to2", 2, 1.0),
                         deterministic_action("to3", 3, 0.0)};
  m.states[1].id = 2;
  m.states[1].actions = {deterministic_action("to1", 1, 0.0),
                         deterministic_action("to3", 3, 0.0)};
  m.states[2].id = 3;
  m.states[2].actions = {deterministic_action("to2", 2, 0.0),
                         deterministic_action("stay", 3, 10.0)};
  return m;
}

StationaryPolicy counterexample_mubar() { return StationaryPolicy{{0, 0, 1}}; }

StationaryPolicy counterexample_mustar() { return StationaryPolicy{{1, 1, 0}}; }

MdpInstance generate_random(int n, int max_actions, int branching, double cost_min,
                            double cost_max, double discount, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_random: n must be >= 1");
  if (max_actions < 1) throw std::invalid_argument("generate_random: max_actions must be >= 1");
  if (branching < 1 || branching > n) {
    throw std::invalid_argument("generate_random: branching must lie in 1..n");
  }
  if (!(cost_min <= cost_max)) {
    throw std::invalid_argument("generate_random: cost range is empty");
  }
  if (!(discount > 0.0) || !(discount < 1.0)) {
    throw std::invalid_argument("generate_random: discount must lie strictly inside (0, 1)");
  }

  Rng rng(seed);
  MdpInstance m;
  m.n = n;
  m.discount = discount;
  m.states.resize(static_cast<size_t>(n));

  std::vector<int> pool(static_cast<size_t>(n));
  for (int x = 1; x <= n; ++x) {
    MdpState& st = m.states[static_cast<size_t>(x - 1)];
    st.id = x;
    const int num_actions = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_actions)));
    for (int a = 0; a < num_actions; ++a) {
      MdpAction act;
      act.label = "a" + std::to_string(a + 1);

      // Partial Fisher-Yates over the state ids gives `branching` distinct
      // successors in draw order.
      std::iota(pool.begin(), pool.end(), 1);
      for (int i = 0; i < branching; ++i) {
        const int j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
        act.successors.push_back(pool[static_cast<size_t>(i)]);
      }

      double total = 0.0;
      for (int i = 0; i < branching; ++i) {
        const double w = 1.0 - rng.uniform01();  // in (0, 1], so no zero-weight successors
        act.probs.push_back(w);
        total += w;
      }
      for (double& p : act.probs) p /= total;

      for (int i = 0; i < branching; ++i) {
        act.costs.push_back(cost_min + rng.uniform01() * (cost_max - cost_min));
      }
      st.actions.push_back(std::move(act));
    }
  }

  ValidationReport report = validate(m);
  if (!report.ok()) {
    throw ValidationError("generate_random produced an invalid instance:\n" + report.to_string(),
                          std::move(report));
  }
  return m;
}

StationaryPolicy first_action_policy(const MdpInstance& instance) {
  StationaryPolicy p;
  p.choice.assign(static_cast<size_t>(instance.n), 0);
  return p;
}

StationaryPolicy policy_from_labels(const MdpInstance& instance,
                                    const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != instance.n) {
    throw std::invalid_argument("policy_from_labels: expected " + std::to_string(instance.n) +
                                " labels, got " + std::to_string(labels.size()));
  }
  StationaryPolicy p;
  for (int x = 1; x <= instance.n; ++x) {
    const int a = instance.action_index(x, labels[static_cast<size_t>(x - 1)]);
    if (a < 0) {
      throw std::invalid_argument("policy_from_labels: state " + std::to_string(x) +
                                  " has no action labelled '" + labels[static_cast<size_t>(x - 1)] + "'");
    }
    p.choice.push_back(a);
  }
  return p;
}

std::vector<std::string> policy_labels(const MdpInstance& instance,
                                       const StationaryPolicy& policy) {
  std::vector<std::string> labels;
  for (int x = 1; x <= instance.n; ++x) {
    labels.push_back(instance.action(x, policy.choice[static_cast<size_t>(x - 1)]).label);
  }
  return labels;
}

bool policy_valid(const MdpInstance& instance, const StationaryPolicy& policy) {
  if (static_cast<int>(policy.choice.size()) != instance.n) return false;
  for (int x = 1; x <= instance.n; ++x) {
    const int a = policy.choice[static_cast<size_t>(x - 1)];
    if (a < 0 || a >= instance.num_actions(x)) return false;
  }
  return true;
}

std::string instance_digest(const MdpInstance& instance) {
  const std::string bytes = save_instance(instance);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace mdpkit
