#include "phasewalk/network.hpp"

#include <algorithm>
#include <set>

namespace phasewalk {

int selection_prefix_bits(int R) { return std::max(1, R - 1); }

ValidSets enumerate_valid(const PhaseNetwork& net) {
  ValidSets out;
  if (net.layers.empty()) return out;

  out.per_layer.push_back({net.root});
  std::size_t start = 0;
  if (net.prepare_top_layer && net.layers.size() > 1) {
    out.per_layer.push_back(net.layers[1]);
    start = 1;
  }
  for (std::size_t l = start; l + 1 < net.layers.size(); ++l) {
    std::set<std::size_t> next;
    for (auto x : out.per_layer[l]) {
      for (std::size_t c = 0; c < net.active_ports(); ++c) {
        const auto y = net.ports[x][c];
        if (y == x || net.phase_class[x][c] != 0) continue;
        if (net.layer_of[y] != static_cast<int>(l) + 1) continue;
        next.insert(y);
      }
    }
    out.per_layer.emplace_back(next.begin(), next.end());
  }
  out.valid_leaves = out.per_layer.back().size();
  return out;
}

namespace {

void add(std::vector<Violation>& out, std::string kind, std::size_t x,
         std::size_t c, std::string message) {
  out.push_back({std::move(kind), x, c, std::move(message)});
}

std::string at(std::size_t x, std::size_t c) {
  return "(" + std::to_string(x) + "," + std::to_string(c) + ")";
}

void check_roles(const PhaseNetwork& net, std::vector<Violation>& out) {
  const auto n = net.node_count;
  if (net.groups.size() != n || net.down_ports.size() != n ||
      net.reset_ports.size() != n) {
    add(out, "roles", 0, 0, "role tables must have one entry per node");
    return;
  }
  const auto k = net.active_ports();
  for (std::size_t x = 0; x < n; ++x) {
    std::set<std::size_t> down(net.down_ports[x].begin(),
                               net.down_ports[x].end());
    for (auto c : net.down_ports[x])
      if (c >= k) add(out, "roles", x, c, "down port outside active range");
    for (auto c : net.reset_ports[x])
      if (c >= k) add(out, "roles", x, c, "reset port outside active range");
    for (const auto& g : net.groups[x]) {
      if (g.empty() || (g.size() & (g.size() - 1)) != 0)
        add(out, "groups", x, 0, "group size must be a power of two >= 2");
      for (auto c : g)
        if (!down.contains(c))
          add(out, "groups", x, c, "group port is not a down port");
    }
  }
}

void check_layers(const PhaseNetwork& net, std::vector<Violation>& out) {
  if (net.layer_of.size() != net.node_count) {
    add(out, "layers", 0, 0, "layer_of must have one entry per node");
    return;
  }
  if (net.root >= net.node_count) {
    add(out, "layers", net.root, 0, "root out of range");
    return;
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    for (auto x : net.layers[l])
      if (x >= net.node_count || net.layer_of[x] != static_cast<int>(l))
        add(out, "layers", x, 0,
            "node listed in layer " + std::to_string(l) +
                " disagrees with layer_of");
  if (!net.layers.empty() &&
      (net.layers[0].size() != 1 || net.layers[0][0] != net.root))
    add(out, "layers", net.root, 0, "layer 0 must hold exactly the root");
}

}  // namespace

std::vector<Violation> validate(const PhaseNetwork& net) {
  std::vector<Violation> out;
  const auto n = net.node_count;
  if (n == 0 || net.coin_dim == 0 || net.coin_dim % 2 != 0 ||
      net.memory_dim == 0) {
    add(out, "dimensions", 0, 0,
        "node_count, memory_dim must be positive and coin_dim positive even");
    return out;
  }
  if (net.ports.size() != n || net.return_ports.size() != n ||
      net.phase_class.size() != n) {
    add(out, "dimensions", 0, 0, "port tables must have one row per node");
    return out;
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (net.ports[x].size() != net.coin_dim ||
        net.return_ports[x].size() != net.coin_dim ||
        net.phase_class[x].size() != net.coin_dim) {
      add(out, "dimensions", x, 0, "port table row length != coin_dim");
      return out;
    }
  }

  const auto k = net.active_ports();
  const auto p = static_cast<int>(net.memory_dim);
  for (std::size_t x = 0; x < n; ++x) {
    std::set<std::size_t> seen;
    for (std::size_t c = 0; c < net.coin_dim; ++c) {
      const auto y = net.ports[x][c];
      const auto cr = net.return_ports[x][c];
      const int cls = net.phase_class[x][c];
      if (y >= n || cr >= net.coin_dim) {
        add(out, "port range", x, c, "endpoint or return port out of range");
        continue;
      }
      if (cls < 0 || cls >= p)
        add(out, "phase range", x, c,
            "phase class " + std::to_string(cls) + " gives phi >= pi or < 0 at " +
                at(x, c));
      if (y == x) {
        if (cls != 0)
          add(out, "loop phase", x, c, "loop carries nonzero phase class");
        if (cr != c)
          add(out, "symmetry", x, c, "loop must return through itself");
        continue;
      }
      if (c >= k) {
        add(out, "twin", x, c, "inactive twin port must be a loop");
        continue;
      }
      if (!seen.insert(y).second)
        add(out, "injectivity", x, c,
            "two ports of node " + std::to_string(x) + " reach " +
                std::to_string(y));
      if (net.ports[y][cr] != x || net.return_ports[y][cr] != c)
        add(out, "symmetry", x, c, "edge " + at(x, c) + " has no matching return");
      else if (net.phase_class[y][cr] != cls)
        add(out, "phase symmetry", x, c,
            "phase class differs across edge " + at(x, c) + " - " + at(y, cr));
    }
  }
  check_layers(net, out);
  check_roles(net, out);
  return out;
}

}  // namespace phasewalk
