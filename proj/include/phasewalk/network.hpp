#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasewalk/types.hpp"

namespace phasewalk {

inline constexpr int kNoLayer = -1;

using PortList = std::vector<std::size_t>;

struct NetworkMeta {
  std::string family;
  nlohmann::json spec = nlohmann::json::object();
  std::uint64_t seed = 0;

  friend bool operator==(const NetworkMeta&, const NetworkMeta&) = default;
};

// Layered network whose edges carry phases π·k/p (k = phase class).
//
// Coin layout: the first coin_dim/2 ports are the active directions; port
// c + coin_dim/2 is the inactive twin of c and always a loop. A port whose
// endpoint is the node itself is a loop (phase class 0, return port = itself).
//
// Roles used by the spreading walk:
//   down_ports[x]  - directions the preparation coin spreads over
//   groups[x]      - selection groups of down ports (pairs in the base case)
//   reset_ports[x] - ports the arriving amplitude occupies; the reset coin
//                    folds their uniform superposition back to |0,0>
//
// Built networks are treated as immutable values; builders below return them.
struct PhaseNetwork {
  std::size_t node_count = 0;
  std::size_t coin_dim = 0;
  std::size_t memory_dim = 0;

  std::vector<PortList> ports;
  std::vector<PortList> return_ports;
  std::vector<std::vector<int>> phase_class;

  std::vector<int> layer_of;
  std::vector<std::vector<std::size_t>> layers;
  std::size_t root = 0;

  std::vector<std::vector<PortList>> groups;
  std::vector<PortList> down_ports;
  std::vector<PortList> reset_ports;

  // Multilevel networks: the first layer transition is a position rotation
  // from the auxiliary root onto the uniform superposition of the top layer.
  bool prepare_top_layer = false;

  NetworkMeta meta;

  std::size_t active_ports() const { return coin_dim / 2; }
  std::size_t twin(std::size_t c) const {
    const auto k = active_ports();
    return c < k ? c + k : c - k;
  }
  bool is_loop(std::size_t x, std::size_t c) const { return ports[x][c] == x; }
  double phase(std::size_t x, std::size_t c) const {
    return kPi * static_cast<double>(phase_class[x][c]) /
           static_cast<double>(memory_dim);
  }
  Dims dims() const { return {node_count, coin_dim, memory_dim}; }
  const std::vector<std::size_t>& bottom() const { return layers.back(); }
  std::size_t layer_steps() const {
    return layers.empty() ? 0 : layers.size() - 1;
  }

  friend bool operator==(const PhaseNetwork&, const PhaseNetwork&) = default;
};

struct TreeSpec {
  int d = 2;  // pairs per node, 2d children
  int L = 2;  // depth
  int valid_class = 0;
  int invalid_class = 1;
  int memory_dim = 2;
  std::uint64_t seed = 0;
  std::optional<std::size_t> marked_leaf;
  // Lay positions out as (L+1) blocks of N = (2d)^L slots instead of the
  // compact per-layer indexing. Unused slots are isolated loop nodes.
  bool padded = false;
};

struct GeneralizedTreeSpec {
  int R = 2;  // groups of 2^R children
  int groups_per_node = 1;
  int L = 2;
  std::uint64_t seed = 0;
};

struct MultilevelSpec {
  std::size_t layer_width = 16;  // N
  std::size_t depth = 3;         // D
  std::size_t bottom_valid = 4;  // n
  std::uint64_t seed = 0;
  int max_attempts = 1000;
};

PhaseNetwork build_perfect_tree(const TreeSpec& spec);
PhaseNetwork build_generalized_tree(const GeneralizedTreeSpec& spec);
PhaseNetwork build_multilevel(const MultilevelSpec& spec);

/// Prefix width of a selection group with 2^R ports: the valid ports of a
/// group share their top `q` address bits and the network needs 2^q phase
/// classes. q = max(1, R - 1), so R = 1 is the one-of-two pair case.
int selection_prefix_bits(int R);

struct ValidSets {
  std::vector<std::vector<std::size_t>> per_layer;
  std::size_t valid_leaves = 0;
};

/// Breadth-first search from the root (or the whole top layer of a multilevel
/// network) following only downward phase-class-0 ports.
ValidSets enumerate_valid(const PhaseNetwork& net);

struct Violation {
  std::string kind;
  std::size_t node = 0;
  std::size_t port = 0;
  std::string message;
};

std::vector<Violation> validate(const PhaseNetwork& net);

nlohmann::json serialize(const PhaseNetwork& net);
PhaseNetwork deserialize(const nlohmann::json& doc);

}  // namespace phasewalk
