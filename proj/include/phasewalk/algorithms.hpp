#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasewalk/network.hpp"
#include "phasewalk/operators.hpp"
#include "phasewalk/state.hpp"

namespace phasewalk {

/// Pair coin when every group is a pair over a binary label, otherwise the
/// general selection coin.
WalkOperator selection_coin(const PhaseNetwork& net);

/// One layer transition W = A·S·C·E·P (P applied first).
WalkOperator spreading_step(const PhaseNetwork& net);

/// U = W^L, or W^{L-1}·U_top when the network prepares its top layer directly.
/// Networks with a single layer get the identity.
WalkOperator spreading(const PhaseNetwork& net);

/// |root, 0, 0>.
WalkState initial_state(const PhaseNetwork& net);

/// Raised when the spread state is not uniform over the valid nodes of some
/// layer.
class PropagationError : public std::runtime_error {
 public:
  PropagationError(std::size_t layer, std::size_t node, double deviation);
  std::size_t layer() const { return layer_; }
  std::size_t node() const { return node_; }
  double deviation() const { return deviation_; }

 private:
  std::size_t layer_;
  std::size_t node_;
  double deviation_;
};

struct LayerSpread {
  std::size_t layer = 0;
  std::size_t valid = 0;
  double max_deviation = 0.0;
  std::size_t worst_node = 0;
};

struct SpreadResult {
  std::vector<double> marginal;      // after U
  std::vector<LayerSpread> layers;   // after each partial product
  std::optional<std::size_t> first_bad_layer;
  double max_deviation = 0.0;
};

/// Applies the spreading layer by layer, comparing every intermediate marginal
/// with the uniform distribution over the valid nodes of that layer.
SpreadResult spread(const PhaseNetwork& net, double tol = 1e-9);

/// spread(), throwing PropagationError at the first non-uniform layer.
std::vector<double> spread_checked(const PhaseNetwork& net, double tol = 1e-9);

enum class IterationRule { theorem, paper };

std::string to_string(IterationRule rule);
IterationRule parse_rule(const std::string& s);

/// theorem: floor(pi / (4 asin(sqrt(a)))); paper: ceil((pi/4) sqrt(1/a)).
/// Throws std::invalid_argument unless 0 < a <= 1.
std::size_t iteration_count(double a, IterationRule rule = IterationRule::theorem);

/// max(1 - a, a): lower bound on the final success probability.
double success_bound(double a);

struct SearchPlan {
  const PhaseNetwork* network = nullptr;
  std::size_t marked = 0;
  std::optional<std::size_t> iterations;  // defaults to the rule's count
  IterationRule rule = IterationRule::theorem;
  bool allow_invalid_marked = false;
};

struct RunReport {
  std::string family;
  std::size_t N = 0;  // bottom nodes (or flat items)
  std::size_t n = 0;  // valid bottom nodes
  std::size_t marked = 0;
  double a = 0.0;
  IterationRule rule = IterationRule::theorem;
  std::size_t t = 0;
  std::size_t queries = 0;
  std::vector<double> p_marked;  // index i: after i iterations
  double final_p_marked = 0.0;
  double bound = 0.0;
  std::size_t spreading_layers = 0;
  std::size_t spreading_applications = 0;
  double wall_time_s = 0.0;
  nlohmann::json spec = nlohmann::json::object();
};

/// state = (U R0 U† O_m)^t U |root,0,0>, recording P(m) after every iteration.
RunReport search(const SearchPlan& plan);

/// Amplitude amplification over N flat items prepared uniformly.
RunReport naive_grover(std::size_t N, std::size_t marked,
                       IterationRule rule = IterationRule::theorem,
                       std::optional<std::size_t> iterations = std::nullopt);

/// P(m) for t = 0..t_max.
std::vector<double> success_curve(const PhaseNetwork& net, std::size_t marked,
                                  std::size_t t_max);

struct ScalingRow {
  int L = 0;
  std::size_t N = 0;
  std::size_t n = 0;
  std::size_t t = 0;
  std::size_t t_naive = 0;
  double p_marked = 0.0;
  double p_naive = 0.0;
};

/// Perfect trees of arity 2d for each L, marking the first valid leaf.
std::vector<ScalingRow> scaling_experiment(int d, int L_from, int L_to,
                                           std::uint64_t seed = 0,
                                           IterationRule rule = IterationRule::theorem,
                                           bool simulate = true);

/// Least-squares slope of log(y) against log(x).
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::json to_json(const RunReport& r, bool include_timing = true);

}  // namespace phasewalk
