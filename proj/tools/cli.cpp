#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "phasewalk/operators.hpp"
#include "phasewalk/rng.hpp"
#include "phasewalk/verify.hpp"

namespace phasewalk::cli {

namespace {

const std::set<std::string> kFamilies{"tree", "generalized", "multilevel", "flat-baseline"};

template <typename T>
T get_integer(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer())
    throw ParseError(key, "field '" + key + "' must be an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (v.is_number_unsigned()) return v.get<T>();
    if (v.get<long long>() < 0)
      throw ParseError(key, "field '" + key + "' must be non-negative");
  }
  return v.get<T>();
}

std::string get_string(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_string()) throw ParseError(key, "field '" + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const nlohmann::json& doc, const std::string& key) {
  const auto& v = doc.at(key);
  if (!v.is_boolean()) throw ParseError(key, "field '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void check_family(const std::string& f) {
  if (!kFamilies.count(f)) throw ParseError("family", "unknown family '" + f + "'");
}

void check_marked(const std::string& m) {
  if (m == "random-valid") return;
  if (m.empty() || !std::all_of(m.begin(), m.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    throw ParseError("marked", "marked must be a node id or 'random-valid'");
}

IterationRule rule_field(const std::string& s) {
  try {
    return parse_rule(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError("rule", e.what());
  }
}

// Writes to --out when given, otherwise to the command's stream.
class Sink {
 public:
  Sink(const std::optional<std::string>& path, std::ostream& fallback) : os_(&fallback) {
    if (path) {
      file_.open(*path, std::ios::binary);
      if (!file_) throw ParseError("out", "cannot open '" + *path + "' for writing");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void write_csv(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("csv", "cannot open '" + path + "' for writing");
  f << body;
}

nlohmann::json envelope(const std::string& command, const ExperimentConfig& c) {
  nlohmann::json j = {{"command", command}, {"config", to_json(c)}};
  if (!c.no_timestamp) j["timestamp"] = utc_timestamp();
  return j;
}

std::string iteration_csv(const RunReport& r) {
  std::string s = "iteration,p_marked,cumulative_queries\n";
  for (std::size_t i = 0; i < r.p_marked.size(); ++i)
    s += std::to_string(i) + "," + fmt(r.p_marked[i]) + "," + std::to_string(i) + "\n";
  return s;
}

int cmd_build(const ExperimentConfig& c, std::ostream& out) {
  const auto net = build_network(c);
  Sink sink(c.out, out);
  sink.stream() << serialize(net).dump(2) << "\n";
  return kOk;
}

int cmd_spread(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto net = build_network(c);
  const auto r = spread(net);
  Sink sink(c.out, out);
  auto& os = sink.stream();
  os << "node,layer,probability\n";
  for (std::size_t x = 0; x < net.node_count; ++x)
    os << x << "," << net.layer_of[x] << "," << fmt(r.marginal[x]) << "\n";
  if (r.first_bad_layer)
    err << "warning: spread is not uniform from layer " << *r.first_bad_layer << "\n";
  return kOk;
}

int cmd_search(const ExperimentConfig& c, std::ostream& out) {
  const auto net = build_network(c);
  const auto marked = resolve_marked(c, net);
  const auto r = search({&net, marked, c.t, c.rule, c.allow_invalid_marked});
  auto j = envelope("search", c);
  j["config"]["marked_node"] = marked;
  j["report"] = to_json(r, !c.no_timestamp);
  Sink sink(c.out, out);
  sink.stream() << j.dump(2) << "\n";
  if (c.csv) write_csv(*c.csv, iteration_csv(r));
  return kOk;
}

int cmd_baseline(const ExperimentConfig& c, std::ostream& out) {
  std::size_t N = c.width;
  if (c.family == "tree") {
    N = 1;
    for (int i = 0; i < c.L; ++i) N *= static_cast<std::size_t>(2 * c.d);
  } else if (c.family != "flat-baseline" && c.family != "multilevel") {
    throw ParseError("family", "baseline needs family tree, multilevel or flat-baseline");
  }
  std::size_t marked = 0;
  if (c.marked == "random-valid") {
    Rng rng(c.seed);
    marked = uniform_below(rng, N);
  } else {
    marked = std::stoull(c.marked);
    if (marked >= N) throw ParseError("marked", "marked item is out of range");
  }
  const auto r = naive_grover(N, marked, c.rule, c.t);
  auto j = envelope("baseline", c);
  j["config"]["marked_node"] = marked;
  j["report"] = to_json(r, !c.no_timestamp);
  Sink sink(c.out, out);
  sink.stream() << j.dump(2) << "\n";
  if (c.csv) write_csv(*c.csv, iteration_csv(r));
  return kOk;
}

int cmd_verify(const ExperimentConfig& c, std::ostream& out) {
  const auto net = build_network(c);
  const auto cap = c.dense_cap ? *c.dense_cap : default_dense_cap();
  const auto dims = net.dims();
  const bool dense_ok = dims.total() <= cap;
  const auto marked = resolve_marked(c, net);
  std::vector<VerificationReport> checks;

  VerificationReport structure;
  structure.check = "structure";
  structure.instance = {{"family", net.meta.family}, {"spec", net.meta.spec}};
  const auto violations = validate(net);
  structure.max_deviation = static_cast<double>(violations.size());
  structure.passed = violations.empty();
  if (!violations.empty()) structure.detail = violations.front().kind + ": " + violations.front().message;
  checks.push_back(structure);

  const auto start = initial_state(net);
  std::vector<WalkOperator> ops{shift(net),
                                fourier(dims),
                                phase_estimate_direct(net),
                                phase_estimate_loop(net),
                                coin_prepare(net),
                                selection_coin(net),
                                coin_reset(net),
                                oracle(dims, marked),
                                reflect_initial(start),
                                spreading(net)};
  for (const auto& op : ops) {
    if (!dense_ok) {
      VerificationReport skip;
      skip.check = "unitary:" + op.label();
      skip.passed = true;
      skip.detail = "skipped: dimension " + std::to_string(dims.total()) + " exceeds dense cap";
      checks.push_back(skip);
      continue;
    }
    checks.push_back(check_unitary(op, 1e-10, cap));
  }
  checks.push_back(check_phase_labels(net));
  if (dense_ok) checks.push_back(check_loop_equivalence(net, 1e-10, cap));
  checks.push_back(uniformity_check(net));

  if (dense_ok) {
    VerificationReport eq;
    eq.check = "oracle_equivalence";
    eq.instance = {{"marked", marked}, {"t_max", 4}};
    eq.tolerance = 1e-9;
    const auto curve = success_curve(net, marked, 4);
    for (std::size_t t = 0; t < curve.size(); ++t)
      eq.max_deviation = std::max(
          eq.max_deviation, std::abs(curve[t] - classical_success_oracle(net, marked, t, cap)));
    eq.passed = eq.max_deviation <= eq.tolerance;
    checks.push_back(eq);
  }

  bool passed = true;
  auto j = envelope("verify", c);
  j["checks"] = nlohmann::json::array();
  for (const auto& r : checks) {
    passed = passed && r.passed;
    j["checks"].push_back(to_json(r));
  }
  j["passed"] = passed;
  Sink sink(c.out, out);
  sink.stream() << j.dump(2) << "\n";
  return passed ? kOk : kVerifyFailed;
}

int cmd_scaling(const ExperimentConfig& c, std::ostream& out) {
  if (c.family != "tree") throw ParseError("family", "scaling runs on the tree family");
  const auto rows = scaling_experiment(c.d, c.L_from, c.L, c.seed, c.rule);
  Sink sink(c.out, out);
  auto& os = sink.stream();
  os << "L,N,n,t,t_naive,p_marked,p_naive\n";
  for (const auto& r : rows)
    os << r.L << "," << r.N << "," << r.n << "," << r.t << "," << r.t_naive << ","
       << fmt(r.p_marked) << "," << fmt(r.p_naive) << "\n";
  return kOk;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw ParseError("config", "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "family") c.family = get_string(doc, key), check_family(c.family);
    else if (key == "seed") c.seed = get_integer<std::uint64_t>(doc, key);
    else if (key == "d") c.d = get_integer<int>(doc, key);
    else if (key == "L") c.L = get_integer<int>(doc, key);
    else if (key == "L_from") c.L_from = get_integer<int>(doc, key);
    else if (key == "R") c.R = get_integer<int>(doc, key);
    else if (key == "groups") c.groups = get_integer<int>(doc, key);
    else if (key == "layers") c.layers = get_integer<std::size_t>(doc, key);
    else if (key == "width") c.width = get_integer<std::size_t>(doc, key);
    else if (key == "valid") c.valid = get_integer<std::size_t>(doc, key);
    else if (key == "marked") {
      if (value.is_number_unsigned()) c.marked = std::to_string(value.get<std::size_t>());
      else c.marked = get_string(doc, key);
      check_marked(c.marked);
    } else if (key == "allow_invalid_marked") c.allow_invalid_marked = get_bool(doc, key);
    else if (key == "rule") c.rule = rule_field(get_string(doc, key));
    else if (key == "t") c.t = get_integer<std::size_t>(doc, key);
    else if (key == "out") c.out = get_string(doc, key);
    else if (key == "csv") c.csv = get_string(doc, key);
    else if (key == "dense_cap") c.dense_cap = get_integer<std::size_t>(doc, key);
    else if (key == "no_timestamp") c.no_timestamp = get_bool(doc, key);
    else throw ParseError(key, "unknown config field '" + key + "'");
  }
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"family", c.family}, {"seed", c.seed}};
  if (c.family == "tree") {
    j["d"] = c.d;
    j["L"] = c.L;
    j["L_from"] = c.L_from;
  } else if (c.family == "generalized") {
    j["R"] = c.R;
    j["groups"] = c.groups;
    j["L"] = c.L;
  } else if (c.family == "multilevel") {
    j["layers"] = c.layers;
    j["width"] = c.width;
    j["valid"] = c.valid;
  } else {
    j["width"] = c.width;
  }
  j["marked"] = c.marked;
  j["allow_invalid_marked"] = c.allow_invalid_marked;
  j["rule"] = to_string(c.rule);
  j["t"] = c.t ? nlohmann::json(*c.t) : nlohmann::json(nullptr);
  j["dense_cap"] = c.dense_cap ? *c.dense_cap : default_dense_cap();
  return j;
}

PhaseNetwork build_network(const ExperimentConfig& c) {
  check_family(c.family);
  if (c.family == "tree") {
    TreeSpec s;
    s.d = c.d;
    s.L = c.L;
    s.seed = c.seed;
    return build_perfect_tree(s);
  }
  if (c.family == "generalized") {
    GeneralizedTreeSpec s;
    s.R = c.R;
    s.groups_per_node = c.groups;
    s.L = c.L;
    s.seed = c.seed;
    return build_generalized_tree(s);
  }
  if (c.family == "multilevel") {
    MultilevelSpec s;
    s.layer_width = c.width;
    s.depth = c.layers;
    s.bottom_valid = c.valid;
    s.seed = c.seed;
    return build_multilevel(s);
  }
  throw ParseError("family", "family flat-baseline has no network; use the baseline command");
}

std::size_t resolve_marked(const ExperimentConfig& c, const PhaseNetwork& net) {
  const auto good = enumerate_valid(net).per_layer.back();
  if (c.marked == "random-valid") {
    if (good.empty()) throw ParseError("marked", "network has no valid bottom node");
    // Separate stream from the builder so the choice does not shift its draws.
    Rng rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    return good[uniform_below(rng, good.size())];
  }
  const auto m = static_cast<std::size_t>(std::stoull(c.marked));
  const auto& bottom = net.bottom();
  if (std::find(bottom.begin(), bottom.end(), m) == bottom.end())
    throw ParseError("marked", "node " + c.marked + " is not a bottom-layer node");
  if (!c.allow_invalid_marked && std::find(good.begin(), good.end(), m) == good.end())
    throw ParseError("marked", "node " + c.marked +
                                   " is not a valid bottom node (see --allow-invalid-marked)");
  return m;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum-walk search on phase-altering networks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, family, marked, rule, out_path, csv_path;
  std::uint64_t seed = 0;
  int d = 0, L = 0, L_from = 0, R = 0, groups = 0;
  std::size_t layers = 0, width = 0, valid = 0, t = 0, dense_cap = 0;
  bool no_timestamp = false, allow_invalid = false;

  auto* o_config = app.add_option("--config", config_path, "JSON config file");
  auto* o_seed = app.add_option("--seed", seed, "Builder and marked-node seed");
  auto* o_family = app.add_option("--family", family, "tree | generalized | multilevel | flat-baseline");
  auto* o_d = app.add_option("--d", d, "Tree pairs per node");
  auto* o_L = app.add_option("--L", L, "Tree depth (upper end for scaling)");
  auto* o_L_from = app.add_option("--L-from", L_from, "First depth for scaling");
  auto* o_R = app.add_option("--R", R, "Generalized tree group exponent");
  auto* o_groups = app.add_option("--groups", groups, "Generalized tree groups per node");
  auto* o_layers = app.add_option("--layers", layers, "Multilevel depth D");
  auto* o_width = app.add_option("--width", width, "Multilevel layer width / flat item count");
  auto* o_valid = app.add_option("--valid", valid, "Multilevel valid bottom nodes n");
  auto* o_marked = app.add_option("--marked", marked, "Node id or random-valid");
  auto* o_allow = app.add_flag("--allow-invalid-marked", allow_invalid, "Permit an invalid marked node");
  auto* o_rule = app.add_option("--rule", rule, "theorem | paper");
  auto* o_t = app.add_option("--t", t, "Iteration count override");
  auto* o_out = app.add_option("--out", out_path, "Output file");
  auto* o_csv = app.add_option("--csv", csv_path, "Per-iteration CSV file");
  auto* o_nots = app.add_flag("--no-timestamp", no_timestamp, "Omit timestamp and wall time");
  auto* o_cap = app.add_option("--dense-cap", dense_cap, "Dense export dimension cap");

  std::vector<std::pair<std::string, CLI::App*>> commands;
  for (const char* name : {"build", "spread", "search", "baseline", "verify", "scaling"})
    commands.emplace_back(name, app.add_subcommand(name));
  commands[0].second->description("Write the network document");
  commands[1].second->description("Position marginal after spreading (CSV)");
  commands[2].second->description("Prior-knowledge search (JSON report)");
  commands[3].second->description("Naive amplitude amplification baseline");
  commands[4].second->description("Dense and structural checks on one instance");
  commands[5].second->description("Query counts over tree depths (CSV)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    ExperimentConfig c;
    if (*o_config) {
      std::ifstream in(config_path);
      if (!in) throw ParseError("config", "cannot read '" + config_path + "'");
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config", std::string("malformed JSON: ") + e.what());
      }
      c = parse_config(doc);
    }
    if (*o_seed) c.seed = seed;
    if (*o_family) check_family(c.family = family);
    if (*o_d) c.d = d;
    if (*o_L) c.L = L;
    if (*o_L_from) c.L_from = L_from;
    if (*o_R) c.R = R;
    if (*o_groups) c.groups = groups;
    if (*o_layers) c.layers = layers;
    if (*o_width) c.width = width;
    if (*o_valid) c.valid = valid;
    if (*o_marked) check_marked(c.marked = marked);
    if (*o_allow) c.allow_invalid_marked = allow_invalid;
    if (*o_rule) c.rule = rule_field(rule);
    if (*o_t) c.t = t;
    if (*o_out) c.out = out_path;
    if (*o_csv) c.csv = csv_path;
    if (*o_nots) c.no_timestamp = no_timestamp;
    if (*o_cap) c.dense_cap = dense_cap;

    std::string command;
    for (const auto& [name, sub] : commands)
      if (sub->parsed()) command = name;
    if (command == "build") return cmd_build(c, out);
    if (command == "spread") return cmd_spread(c, out, err);
    if (command == "search") return cmd_search(c, out);
    if (command == "baseline") return cmd_baseline(c, out);
    if (command == "verify") return cmd_verify(c, out);
    return cmd_scaling(c, out);
  } catch (const ParseError& e) {
    err << "config error: field '" << e.field() << "': " << e.what() << "\n";
    return kConfigError;
  } catch (const DenseCapError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::out_of_range& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace phasewalk::cli
