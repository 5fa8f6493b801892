#include <algorithm>
#include <array>
#include <functional>
#include <optional>

#include "phasewalk/network.hpp"
#include "phasewalk/rng.hpp"

namespace phasewalk {
namespace {

constexpr std::size_t kMaxNodes = std::size_t{1} << 24;

PhaseNetwork empty_network(std::size_t nodes, std::size_t active,
                           std::size_t memory) {
  PhaseNetwork net;
  net.node_count = nodes;
  net.coin_dim = 2 * active;
  net.memory_dim = memory;
  net.ports.resize(nodes);
  net.return_ports.resize(nodes);
  net.phase_class.assign(nodes, std::vector<int>(net.coin_dim, 0));
  for (std::size_t x = 0; x < nodes; ++x) {
    net.ports[x].assign(net.coin_dim, x);
    net.return_ports[x].resize(net.coin_dim);
    for (std::size_t c = 0; c < net.coin_dim; ++c) net.return_ports[x][c] = c;
  }
  net.layer_of.assign(nodes, kNoLayer);
  net.groups.resize(nodes);
  net.down_ports.resize(nodes);
  net.reset_ports.resize(nodes);
  return net;
}

void connect(PhaseNetwork& net, std::size_t x, std::size_t cx, std::size_t y,
             std::size_t cy, int cls) {
  net.ports[x][cx] = y;
  net.return_ports[x][cx] = cy;
  net.phase_class[x][cx] = cls;
  net.ports[y][cy] = x;
  net.return_ports[y][cy] = cx;
  net.phase_class[y][cy] = cls;
}

std::size_t checked_pow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > kMaxNodes / base) throw SpecError("network too large");
    r *= base;
  }
  return r;
}

// Phase classes of the `arity` child ports of one node, drawn from rng.
using ChildClasses = std::function<std::vector<int>(Rng&)>;

PhaseNetwork build_tree(std::size_t arity, int depth, std::size_t memory,
                        bool padded, std::uint64_t seed,
                        const std::vector<PortList>& child_groups,
                        const ChildClasses& classes) {
  const std::size_t leaves = checked_pow(arity, depth);
  std::vector<std::size_t> offset(depth + 1, 0);
  std::size_t total = 0;
  for (int l = 0; l <= depth; ++l) {
    offset[l] = padded ? static_cast<std::size_t>(l) * leaves : total;
    total += checked_pow(arity, l);
  }
  if (padded) total = leaves * static_cast<std::size_t>(depth + 1);
  if (total > kMaxNodes) throw SpecError("network too large");

  const std::size_t parent_port = arity;
  PhaseNetwork net = empty_network(total, arity + 1, memory);
  net.root = 0;
  net.layers.resize(depth + 1);

  PortList children(arity);
  for (std::size_t c = 0; c < arity; ++c) children[c] = c;

  Rng rng(seed);
  for (int l = 0; l <= depth; ++l) {
    const std::size_t width = checked_pow(arity, l);
    for (std::size_t i = 0; i < width; ++i) {
      const std::size_t x = offset[l] + i;
      net.layer_of[x] = l;
      net.layers[l].push_back(x);
      net.reset_ports[x] = {parent_port};
      if (l == depth) continue;
      net.down_ports[x] = children;
      net.groups[x] = child_groups;
      const auto cls = classes(rng);
      for (std::size_t c = 0; c < arity; ++c)
        connect(net, x, c, offset[l + 1] + i * arity + c, parent_port, cls[c]);
    }
  }
  return net;
}

}  // namespace

PhaseNetwork build_perfect_tree(const TreeSpec& spec) {
  if (spec.d < 1) throw SpecError("TreeSpec.d must be >= 1");
  if (spec.L < 1) throw SpecError("TreeSpec.L must be >= 1");
  if (spec.valid_class == spec.invalid_class)
    throw SpecError("TreeSpec.valid_class must differ from invalid_class");
  if (spec.valid_class != 0)
    throw SpecError("TreeSpec.valid_class must be 0 (valid edges carry no phase)");
  if (spec.memory_dim < 2)
    throw SpecError("TreeSpec.memory_dim must be >= 2");
  if (spec.invalid_class < 1 || spec.invalid_class >= spec.memory_dim)
    throw SpecError("TreeSpec.invalid_class must lie in [1, memory_dim)");

  const auto d = static_cast<std::size_t>(spec.d);
  std::vector<PortList> pairs;
  for (std::size_t l = 0; l < d; ++l) pairs.push_back({2 * l, 2 * l + 1});

  const int good = spec.valid_class;
  const int bad = spec.invalid_class;
  auto classes = [d, good, bad](Rng& rng) {
    std::vector<int> cls(2 * d);
    for (std::size_t l = 0; l < d; ++l) {
      const auto b = uniform_below(rng, 2);
      cls[2 * l + b] = good;
      cls[2 * l + 1 - b] = bad;
    }
    return cls;
  };
  auto net = build_tree(2 * d, spec.L, static_cast<std::size_t>(spec.memory_dim),
                        spec.padded, spec.seed, pairs, classes);

  if (spec.marked_leaf) {
    const auto& b = net.bottom();
    if (!std::binary_search(b.begin(), b.end(), *spec.marked_leaf))
      throw SpecError("TreeSpec.marked_leaf is not a leaf node");
  }

  net.meta.family = "tree";
  net.meta.seed = spec.seed;
  net.meta.spec = {{"d", spec.d},
                   {"L", spec.L},
                   {"valid_class", spec.valid_class},
                   {"invalid_class", spec.invalid_class},
                   {"memory_dim", spec.memory_dim},
                   {"padded", spec.padded}};
  if (spec.marked_leaf) net.meta.spec["marked_leaf"] = *spec.marked_leaf;
  return net;
}

PhaseNetwork build_generalized_tree(const GeneralizedTreeSpec& spec) {
  if (spec.R < 1) throw SpecError("GeneralizedTreeSpec.R must be >= 1");
  if (spec.R > 10) throw SpecError("GeneralizedTreeSpec.R too large");
  if (spec.groups_per_node < 1)
    throw SpecError("GeneralizedTreeSpec.groups_per_node must be >= 1");
  if (spec.L < 1) throw SpecError("GeneralizedTreeSpec.L must be >= 1");

  const int q = selection_prefix_bits(spec.R);
  const std::size_t group = std::size_t{1} << spec.R;
  const std::size_t prefixes = std::size_t{1} << q;
  const int shift = spec.R - q;
  const auto groups = static_cast<std::size_t>(spec.groups_per_node);

  std::vector<PortList> port_groups(groups);
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t a = 0; a < group; ++a) port_groups[g].push_back(g * group + a);

  // The valid ports of a group share the prefix `chosen`; every other port is
  // labelled with the prefix mismatch chosen ^ prefix, which is nonzero.
  auto classes = [=](Rng& rng) {
    std::vector<int> cls(groups * group);
    for (std::size_t g = 0; g < groups; ++g) {
      const auto chosen = uniform_below(rng, prefixes);
      for (std::size_t a = 0; a < group; ++a)
        cls[g * group + a] = static_cast<int>(chosen ^ (a >> shift));
    }
    return cls;
  };
  auto net = build_tree(groups * group, spec.L, prefixes, false, spec.seed,
                        port_groups, classes);
  net.meta.family = "generalized";
  net.meta.seed = spec.seed;
  net.meta.spec = {{"R", spec.R},
                   {"groups_per_node", spec.groups_per_node},
                   {"L", spec.L}};
  return net;
}

namespace {

struct LayerAssignment {
  std::vector<std::size_t> valid_children;
  // Per parent (index within layer): children reached through class-0 and
  // class-1 edges, two of each.
  std::vector<std::array<std::size_t, 2>> good;
  std::vector<std::array<std::size_t, 2>> bad;
};

std::optional<LayerAssignment> try_assign(std::size_t width,
                                          const std::vector<std::size_t>& valid,
                                          Rng& rng) {
  constexpr std::size_t kIn = 4;
  const std::size_t h = valid.size() / 2;
  std::vector<std::size_t> order(width);
  for (std::size_t i = 0; i < width; ++i) order[i] = i;
  shuffle(order, rng);

  LayerAssignment a;
  a.valid_children.assign(order.begin(), order.begin() + h);
  std::sort(a.valid_children.begin(), a.valid_children.end());
  std::vector<std::size_t> invalid_children(order.begin() + h, order.end());
  std::sort(invalid_children.begin(), invalid_children.end());

  std::vector<bool> is_valid(width, false);
  for (auto v : valid) is_valid[v] = true;

  std::vector<std::size_t> stubs;
  for (auto c : a.valid_children) stubs.insert(stubs.end(), kIn, c);
  shuffle(stubs, rng);
  std::vector<std::size_t> bad_stubs;
  for (auto c : invalid_children) bad_stubs.insert(bad_stubs.end(), kIn, c);
  shuffle(bad_stubs, rng);

  a.good.resize(width);
  a.bad.resize(width);
  std::size_t next_good = 0;
  std::size_t next_bad = 0;
  for (std::size_t x = 0; x < width; ++x) {
    if (is_valid[x]) {
      a.good[x] = {stubs[next_good], stubs[next_good + 1]};
      next_good += 2;
    } else {
      a.good[x] = {bad_stubs[next_bad], bad_stubs[next_bad + 1]};
      next_bad += 2;
    }
    a.bad[x] = {bad_stubs[next_bad], bad_stubs[next_bad + 1]};
    next_bad += 2;
    std::array<std::size_t, 4> all{a.good[x][0], a.good[x][1], a.bad[x][0],
                                   a.bad[x][1]};
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
      return std::nullopt;
  }
  return a;
}

}  // namespace

PhaseNetwork build_multilevel(const MultilevelSpec& spec) {
  const std::size_t N = spec.layer_width;
  const std::size_t D = spec.depth;
  const std::size_t n = spec.bottom_valid;
  if (D < 1) throw SpecError("MultilevelSpec.depth must be >= 1");
  if (n < 1) throw SpecError("MultilevelSpec.bottom_valid must be >= 1");
  if (D > 40 || n > kMaxNodes / (std::size_t{1} << (D - 1)) ||
      N != n * (std::size_t{1} << (D - 1)))
    throw SpecError("MultilevelSpec requires layer_width = bottom_valid * 2^(depth-1)");
  if (1 + D * N > kMaxNodes) throw SpecError("network too large");
  if (D >= 2 && n < 2)
    throw SpecError(
        "no uniform in-degree assignment: a single bottom valid node would "
        "need parallel edges from its two valid parents");

  constexpr std::size_t kDown = 4;
  constexpr std::size_t kUp = 4;
  PhaseNetwork net = empty_network(1 + D * N, kDown + kUp, 2);
  auto id = [N](std::size_t layer, std::size_t i) { return 1 + (layer - 1) * N + i; };

  net.root = 0;
  net.prepare_top_layer = true;
  net.layer_of[0] = 0;
  net.layers.push_back({0});
  for (std::size_t l = 1; l <= D; ++l) {
    net.layers.emplace_back();
    for (std::size_t i = 0; i < N; ++i) {
      net.layer_of[id(l, i)] = static_cast<int>(l);
      net.layers[l].push_back(id(l, i));
    }
  }

  Rng rng(spec.seed);
  std::vector<std::vector<std::size_t>> valid_sets(D + 1);
  valid_sets[1].resize(N);
  for (std::size_t i = 0; i < N; ++i) valid_sets[1][i] = i;
  std::vector<std::size_t> up_used(net.node_count, 0);

  for (std::size_t l = 1; l < D; ++l) {
    std::optional<LayerAssignment> assignment;
    for (int attempt = 0; attempt < spec.max_attempts && !assignment; ++attempt)
      assignment = try_assign(N, valid_sets[l], rng);
    if (!assignment)
      throw SpecError("no uniform in-degree assignment found for layer " +
                      std::to_string(l) + " after " +
                      std::to_string(spec.max_attempts) + " attempts");

    for (std::size_t i = 0; i < N; ++i) {
      const auto x = id(l, i);
      net.down_ports[x] = {0, 1, 2, 3};
      net.groups[x] = {{0, 1}, {2, 3}};
      for (std::size_t pair = 0; pair < 2; ++pair) {
        const auto flip = uniform_below(rng, 2);
        const std::size_t gp = 2 * pair + flip;
        const std::size_t bp = 2 * pair + 1 - flip;
        const auto g = id(l + 1, assignment->good[i][pair]);
        const auto b = id(l + 1, assignment->bad[i][pair]);
        connect(net, x, gp, g, kDown + up_used[g]++, 0);
        connect(net, x, bp, b, kDown + up_used[b]++, 1);
      }
    }
    valid_sets[l + 1] = assignment->valid_children;
  }

  std::vector<bool> node_valid(net.node_count, false);
  for (std::size_t l = 1; l <= D; ++l)
    for (auto i : valid_sets[l]) node_valid[id(l, i)] = true;

  for (std::size_t l = 2; l <= D; ++l) {
    for (auto i : valid_sets[l]) {
      const auto y = id(l, i);
      for (std::size_t c = kDown; c < kDown + kUp; ++c) {
        const auto x = net.ports[y][c];
        if (x != y && net.phase_class[y][c] == 0 && node_valid[x])
          net.reset_ports[y].push_back(c);
      }
      if (net.reset_ports[y].size() != 4)
        throw SpecError("valid node " + std::to_string(y) +
                        " has non-uniform valid in-degree");
    }
  }

  net.meta.family = "multilevel";
  net.meta.seed = spec.seed;
  net.meta.spec = {{"layer_width", N}, {"depth", D}, {"bottom_valid", n}};
  return net;
}

}  // namespace phasewalk
