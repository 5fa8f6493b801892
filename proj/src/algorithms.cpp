#include "phasewalk/algorithms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace phasewalk {

namespace {

bool pair_groups_only(const PhaseNetwork& net) {
  if (net.memory_dim != 2) return false;
  for (const auto& gs : net.groups)
    for (const auto& g : gs)
      if (g.size() != 2) return false;
  return true;
}

std::vector<double> target_marginal(const PhaseNetwork& net,
                                    const std::vector<std::size_t>& valid) {
  std::vector<double> t(net.node_count, 0.0);
  for (auto x : valid) t[x] = 1.0 / static_cast<double>(valid.size());
  return t;
}

}  // namespace

WalkOperator selection_coin(const PhaseNetwork& net) {
  return pair_groups_only(net) ? coin_select_pairs(net) : coin_select_general(net);
}

WalkOperator spreading_step(const PhaseNetwork& net) {
  return compose({coin_prepare(net), phase_estimate_direct(net), selection_coin(net), shift(net),
                  coin_reset(net)},
                 "W");
}

WalkOperator spreading(const PhaseNetwork& net) {
  const auto steps = net.layer_steps();
  if (steps == 0) return identity(net.dims());
  const auto W = spreading_step(net);
  if (!net.prepare_top_layer) return compose({power(W, steps)}, "U");
  std::vector<WalkOperator> f{top_layer_preparation(net)};
  if (steps > 1) f.push_back(power(W, steps - 1));
  return compose(std::move(f), "U");
}

WalkState initial_state(const PhaseNetwork& net) {
  return basis_state(net.dims(), net.root, 0, 0);
}

PropagationError::PropagationError(std::size_t layer, std::size_t node,
                                   double deviation)
    : std::runtime_error("spreading is not uniform at layer " + std::to_string(layer) +
                         " (node " + std::to_string(node) + ", deviation " +
                         std::to_string(deviation) + ")"),
      layer_(layer),
      node_(node),
      deviation_(deviation) {}

SpreadResult spread(const PhaseNetwork& net, double tol) {
  const auto valid = enumerate_valid(net);
  SpreadResult r;
  auto state = initial_state(net);
  const auto steps = net.layer_steps();
  std::optional<WalkOperator> W;
  if (steps > 0) W = spreading_step(net);
  for (std::size_t l = 0; l <= steps; ++l) {
    if (l > 0) {
      if (l == 1 && net.prepare_top_layer)
        state = top_layer_preparation(net).apply(state);
      else
        state = W->apply(state);
    }
    const auto p = position_marginal(state);
    const auto target = target_marginal(net, valid.per_layer[l]);
    LayerSpread ls{l, valid.per_layer[l].size(), 0.0, 0};
    for (std::size_t x = 0; x < p.size(); ++x) {
      const double dev = std::abs(p[x] - target[x]);
      if (dev > ls.max_deviation) {
        ls.max_deviation = dev;
        ls.worst_node = x;
      }
    }
    if (ls.max_deviation > tol && !r.first_bad_layer) r.first_bad_layer = l;
    r.max_deviation = std::max(r.max_deviation, ls.max_deviation);
    r.layers.push_back(ls);
    if (l == steps) r.marginal = p;
  }
  return r;
}

std::vector<double> spread_checked(const PhaseNetwork& net, double tol) {
  auto r = spread(net, tol);
  if (r.first_bad_layer) {
    const auto& ls = r.layers[*r.first_bad_layer];
    throw PropagationError(ls.layer, ls.worst_node, ls.max_deviation);
  }
  return r.marginal;
}

std::string to_string(IterationRule rule) {
  return rule == IterationRule::theorem ? "theorem" : "paper";
}

IterationRule parse_rule(const std::string& s) {
  if (s == "theorem") return IterationRule::theorem;
  if (s == "paper") return IterationRule::paper;
  throw std::invalid_argument("unknown iteration rule '" + s + "'");
}

std::size_t iteration_count(double a, IterationRule rule) {
  if (!(a > 0.0) || a > 1.0 + 1e-12)
    throw std::invalid_argument("success probability must lie in (0, 1]");
  a = std::min(a, 1.0);
  // The slack keeps exact integer boundaries (a = 1/2, n = 4, ...) on the
  // mathematically correct side of floor/ceil.
  constexpr double slack = 1e-9;
  if (rule == IterationRule::theorem) {
    const double theta = std::asin(std::sqrt(a));
    return static_cast<std::size_t>(std::floor(kPi / (4.0 * theta) + slack));
  }
  const double x = kPi / 4.0 * std::sqrt(1.0 / a);
  return static_cast<std::size_t>(std::ceil(x - slack));
}

double success_bound(double a) { return std::max(1.0 - a, a); }

namespace {

using Clock = std::chrono::steady_clock;

struct Amplifier {
  WalkOperator prep;
  WalkOperator reflect;
  WalkOperator mark;
  WalkState start;

  std::vector<double> run(std::size_t t, std::size_t marked) const {
    const auto prep_dag = prep.adjoint();
    auto s = prep.apply(start);
    std::vector<double> p{position_marginal(s)[marked]};
    for (std::size_t i = 0; i < t; ++i) {
      s = prep.apply(reflect.apply(prep_dag.apply(mark.apply(s))));
      p.push_back(position_marginal(s)[marked]);
    }
    return p;
  }
};

}  // namespace

RunReport search(const SearchPlan& plan) {
  if (!plan.network) throw std::invalid_argument("search plan has no network");
  const auto& net = *plan.network;
  const auto t0 = Clock::now();
  const auto valid = enumerate_valid(net);
  const auto& good = valid.per_layer.back();
  const bool is_bottom =
      std::find(net.bottom().begin(), net.bottom().end(), plan.marked) != net.bottom().end();
  if (!is_bottom) throw std::invalid_argument("marked node is not a bottom-layer node");
  const bool is_valid = std::find(good.begin(), good.end(), plan.marked) != good.end();
  if (!is_valid && !plan.allow_invalid_marked)
    throw std::invalid_argument("marked node " + std::to_string(plan.marked) +
                                " is not a valid bottom node");
  if (good.empty()) throw std::invalid_argument("network has no valid bottom nodes");

  RunReport r;
  r.family = net.meta.family;
  r.spec = net.meta.spec;
  r.spec["seed"] = net.meta.seed;
  r.N = net.bottom().size();
  r.n = good.size();
  r.marked = plan.marked;
  r.a = 1.0 / static_cast<double>(r.n);
  r.rule = plan.rule;
  r.t = plan.iterations ? *plan.iterations : iteration_count(r.a, plan.rule);
  r.queries = r.t;
  r.bound = success_bound(r.a);

  const auto start = initial_state(net);
  const Amplifier amp{spreading(net), reflect_initial(start), oracle(net.dims(), plan.marked),
                      start};
  r.spreading_layers = net.layer_steps();
  r.spreading_applications = amp.prep.applications();
  r.p_marked = amp.run(r.t, plan.marked);
  r.final_p_marked = r.p_marked.back();
  r.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

RunReport naive_grover(std::size_t N, std::size_t marked, IterationRule rule,
                       std::optional<std::size_t> iterations) {
  if (N < 1) throw std::invalid_argument("naive search needs N >= 1");
  if (marked >= N) throw std::out_of_range("marked item out of range");
  const auto t0 = Clock::now();
  const Dims dims{N, 1, 1};
  std::vector<std::size_t> all(N);
  for (std::size_t i = 0; i < N; ++i) all[i] = i;
  const auto start = basis_state(dims, 0, 0, 0);
  const auto uniform = position_superposition(dims, all);
  const Amplifier amp{N == 1 ? identity(dims) : rotation_between(start, uniform),
                      reflect_initial(start), oracle(dims, marked), start};

  RunReport r;
  r.family = "flat-baseline";
  r.spec = {{"N", N}};
  r.N = N;
  r.n = N;
  r.marked = marked;
  r.a = 1.0 / static_cast<double>(N);
  r.rule = rule;
  r.t = iterations ? *iterations : iteration_count(r.a, rule);
  r.queries = r.t;
  r.bound = success_bound(r.a);
  r.spreading_layers = 1;
  r.spreading_applications = amp.prep.applications();
  r.p_marked = amp.run(r.t, marked);
  r.final_p_marked = r.p_marked.back();
  r.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::vector<double> success_curve(const PhaseNetwork& net, std::size_t marked,
                                  std::size_t t_max) {
  return search({&net, marked, t_max}).p_marked;
}

std::vector<ScalingRow> scaling_experiment(int d, int L_from, int L_to,
                                           std::uint64_t seed, IterationRule rule,
                                           bool simulate) {
  if (L_from < 1 || L_to < L_from) throw std::invalid_argument("invalid L range");
  std::vector<ScalingRow> rows;
  for (int L = L_from; L <= L_to; ++L) {
    ScalingRow row;
    row.L = L;
    TreeSpec spec;
    spec.d = d;
    spec.L = L;
    spec.seed = seed;
    if (simulate) {
      const auto net = build_perfect_tree(spec);
      const auto valid = enumerate_valid(net);
      const auto m = valid.per_layer.back().front();
      const auto rep = search({&net, m, std::nullopt, rule});
      row.N = rep.N;
      row.n = rep.n;
      row.t = rep.t;
      row.p_marked = rep.final_p_marked;
      const auto base = naive_grover(row.N, 0, rule);
      row.t_naive = base.t;
      row.p_naive = base.final_p_marked;
    } else {
      row.N = static_cast<std::size_t>(std::llround(std::pow(2.0 * d, L)));
      row.n = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(d), L)));
      row.t = iteration_count(1.0 / static_cast<double>(row.n), rule);
      row.t_naive = iteration_count(1.0 / static_cast<double>(row.N), rule);
    }
    rows.push_back(row);
  }
  return rows;
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit needs at least two paired points");
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("log-log fit needs positive values");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit needs distinct x values");
  return sxy / sxx;
}

nlohmann::json to_json(const RunReport& r, bool include_timing) {
  nlohmann::json j = {{"family", r.family},
                      {"spec", r.spec},
                      {"N", r.N},
                      {"n", r.n},
                      {"marked", r.marked},
                      {"a", r.a},
                      {"rule", to_string(r.rule)},
                      {"t", r.t},
                      {"queries", r.queries},
                      {"p_marked", r.p_marked},
                      {"final_p_marked", r.final_p_marked},
                      {"bound", r.bound},
                      {"spreading", {{"layers", r.spreading_layers},
                                     {"applications", r.spreading_applications}}}};
  if (include_timing) j["wall_time_s"] = r.wall_time_s;
  return j;
}

}  // namespace phasewalk
