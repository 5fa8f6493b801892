#include "phasewalk/network.hpp"

namespace phasewalk {

using nlohmann::json;

json serialize(const PhaseNetwork& net) {
  json groups = json::array();
  for (const auto& g : net.groups) groups.push_back(g);
  return {
      {"meta", {{"family", net.meta.family}, {"spec", net.meta.spec}, {"seed", net.meta.seed}}},
      {"node_count", net.node_count},
      {"coin_dim", net.coin_dim},
      {"memory_dim", net.memory_dim},
      {"root", net.root},
      {"prepare_top_layer", net.prepare_top_layer},
      {"layers", net.layers},
      {"ports", net.ports},
      {"return_ports", net.return_ports},
      {"phase_class", net.phase_class},
      {"groups", groups},
      {"down_ports", net.down_ports},
      {"reset_ports", net.reset_ports},
  };
}

namespace {

const json& field(const json& doc, const char* name) {
  if (!doc.is_object()) throw ParseError("", "network document must be an object");
  auto it = doc.find(name);
  if (it == doc.end())
    throw ParseError(name, std::string("missing field '") + name + "'");
  return *it;
}

template <typename T>
T read(const json& doc, const char* name) {
  const json& v = field(doc, name);
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(name, std::string("bad field '") + name + "': " + e.what());
  }
}

void require_integers(const json& v, const char* name) {
  if (v.is_array()) {
    for (const auto& e : v) require_integers(e, name);
  } else if (!v.is_number_integer()) {
    throw ParseError(name, std::string("field '") + name + "' must hold integers only");
  }
}

template <typename T>
T read_ints(const json& doc, const char* name) {
  require_integers(field(doc, name), name);
  return read<T>(doc, name);
}

}  // namespace

PhaseNetwork deserialize(const json& doc) {
  PhaseNetwork net;
  const json& meta = field(doc, "meta");
  net.meta.family = read<std::string>(meta, "family");
  net.meta.spec = field(meta, "spec");
  net.meta.seed = read<std::uint64_t>(meta, "seed");

  net.node_count = read<std::size_t>(doc, "node_count");
  net.coin_dim = read<std::size_t>(doc, "coin_dim");
  net.memory_dim = read<std::size_t>(doc, "memory_dim");
  net.root = read<std::size_t>(doc, "root");
  net.prepare_top_layer = read<bool>(doc, "prepare_top_layer");
  net.layers = read_ints<std::vector<std::vector<std::size_t>>>(doc, "layers");
  net.ports = read_ints<std::vector<PortList>>(doc, "ports");
  net.return_ports = read_ints<std::vector<PortList>>(doc, "return_ports");
  net.phase_class = read_ints<std::vector<std::vector<int>>>(doc, "phase_class");
  net.groups = read_ints<std::vector<std::vector<PortList>>>(doc, "groups");
  net.down_ports = read_ints<std::vector<PortList>>(doc, "down_ports");
  net.reset_ports = read_ints<std::vector<PortList>>(doc, "reset_ports");

  net.layer_of.assign(net.node_count, kNoLayer);
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    for (auto x : net.layers[l]) {
      if (x >= net.node_count)
        throw ParseError("layers", "layer entry " + std::to_string(x) + " out of range");
      net.layer_of[x] = static_cast<int>(l);
    }
  return net;
}

}  // namespace phasewalk
