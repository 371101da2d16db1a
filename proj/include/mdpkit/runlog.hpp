#pragma once

#include <string>
#include <vector>

#include "mdpkit/bellman.hpp"
#include "mdpkit/classical_pi.hpp"
#include "mdpkit/model.hpp"
#include "mdpkit/online_pi.hpp"

namespace mdpkit {

// Run logs are JSON Lines: one header object, one object per step or
// iteration, one footer object. The header pins the tool version, the
// instance digest and the full effective configuration, which is enough to
// re-run the algorithm and reproduce the body byte for byte.

struct LogHeaderInfo {
  std::string algorithm;  // online | pi | vi
  std::string digest;
  std::string tool;
};

/// Parses just the header line. Throws ParseError on anything malformed.
LogHeaderInfo peek_log_header(const std::string& text);

std::string online_log_to_jsonl(const MdpInstance& instance, const OnlineRunLog& log);
OnlineRunLog online_log_from_jsonl(const MdpInstance& instance, const std::string& text);

struct PiLogData {
  PiTrace trace;
  int max_iters = 0;
};

std::string pi_log_to_jsonl(const MdpInstance& instance, const PiTrace& trace, int max_iters);
PiLogData pi_log_from_jsonl(const MdpInstance& instance, const std::string& text);

struct ViLogData {
  CostVector j0;
  double tol = 0.0;
  int max_iters = 0;
  ValueIterationResult result;
  StationaryPolicy greedy;  // one-step lookahead at the final cost
};

std::string vi_log_to_jsonl(const MdpInstance& instance, const ViLogData& data);
ViLogData vi_log_from_jsonl(const MdpInstance& instance, const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mdpkit
