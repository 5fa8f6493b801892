#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasewalk/algorithms.hpp"
#include "phasewalk/network.hpp"

namespace phasewalk::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2 };

struct ExperimentConfig {
  std::string family = "tree";  // tree | generalized | multilevel | flat-baseline
  std::uint64_t seed = 0;
  int d = 2;
  int L = 2;
  int L_from = 1;
  int R = 2;
  int groups = 1;
  std::size_t layers = 3;
  std::size_t width = 16;
  std::size_t valid = 4;
  std::string marked = "random-valid";  // or a node id
  bool allow_invalid_marked = false;
  IterationRule rule = IterationRule::theorem;
  std::optional<std::size_t> t;
  std::optional<std::string> out;
  std::optional<std::string> csv;
  std::optional<std::size_t> dense_cap;
  bool no_timestamp = false;
};

/// Reads a config document. Unknown keys and mistyped values throw
/// ParseError naming the key.
ExperimentConfig parse_config(const nlohmann::json& doc, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& c);

PhaseNetwork build_network(const ExperimentConfig& c);

/// "random-valid" draws from the valid bottom nodes with the config seed.
std::size_t resolve_marked(const ExperimentConfig& c, const PhaseNetwork& net);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace phasewalk::cli
