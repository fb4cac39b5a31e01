#pragma once

// Experiment configuration: flat key = value text with [block] headers.
// Parsing and serialization round-trip to a semantically identical config.
// Grammar (see README for the full reference):
//
//   [problem]   m, d, p, sigma, seed
//   [graph]     kind = k-out | ring | complete | random; k, edge_prob, B, seed
//   [schedules] alpha, tau, zeta = "power C P" | "const C" | "zero"
//   [run]       horizon, termination (number | none), cap, trials, base_seed,
//               thinning, theory_horizon
//   [table1]    tau_grid, zeta_grid = schedules separated by '|'
//   [curves]    variant = NAME | TAU | ZETA   (repeatable)
//   [output]    dir, formats

#include "etgp/common.hpp"
#include "etgp/graph.hpp"
#include "etgp/schedules.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace etgp {

struct ProblemBlock {
  int m = 50;
  int d = 5;
  int p = 1;
  double sigma = 0.1;
  std::uint64_t seed = 1;
  bool operator==(const ProblemBlock&) const = default;
};

struct GraphBlock {
  std::string kind = "k-out";
  int k = 4;
  double edge_prob = 0.15;
  int window_b = 1;
  std::uint64_t seed = 1;
  bool operator==(const GraphBlock&) const = default;
};

struct ScheduleBlock {
  Schedule alpha = Schedule::power(1.0, 0.52, ScheduleRole::Stepsize);
  Schedule tau = Schedule::zero(ScheduleRole::XThreshold);
  Schedule zeta = Schedule::zero(ScheduleRole::YThreshold);
  bool operator==(const ScheduleBlock&) const = default;
};

struct RunBlock {
  long horizon = 20000;
  std::optional<double> termination = 1e-2;
  long cap = 200000;  // hard iteration cap for terminating runs
  int trials = 20;
  std::uint64_t base_seed = 1;
  long thinning = 0;  // trajectory/state snapshot stride, 0 = off
  long theory_horizon = 5000;
  bool operator==(const RunBlock&) const = default;
};

struct OutputBlock {
  std::string dir = "out";
  std::string formats = "csv";
  bool operator==(const OutputBlock&) const = default;
};

struct Table1Block {
  std::vector<Schedule> tau_grid;
  std::vector<Schedule> zeta_grid;
  bool operator==(const Table1Block&) const = default;
};

struct CurveVariant {
  std::string name;
  Schedule tau = Schedule::zero(ScheduleRole::XThreshold);
  Schedule zeta = Schedule::zero(ScheduleRole::YThreshold);
  bool operator==(const CurveVariant&) const = default;
};

struct ExperimentConfig {
  ProblemBlock problem;
  GraphBlock graph;
  ScheduleBlock schedules;
  RunBlock run;
  OutputBlock output;
  Table1Block table1;
  std::vector<CurveVariant> curves;
  bool operator==(const ExperimentConfig&) const = default;
};

inline Schedule parse_schedule(const std::string& text, ScheduleRole role) {
  std::stringstream ss(text);
  std::string family;
  ss >> family;
  if (family == "zero") return Schedule::zero(role);
  if (family == "const") {
    std::string c;
    detail::require(static_cast<bool>(ss >> c), "const schedule needs a value");
    return Schedule::constant(parse_double(c), role);
  }
  if (family == "power") {
    std::string c, p;
    detail::require(static_cast<bool>(ss >> c >> p),
                    "power schedule needs 'power C P'");
    return Schedule::power(parse_double(c), parse_double(p), role);
  }
  throw Error("unknown schedule family: " + text);
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(s);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  return out;
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg);

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.run.termination.reset();  // defaults apply only to keys never seen
  bool termination_seen = false;
  std::string block;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      detail::require(line.back() == ']',
                      "line " + std::to_string(lineno) + ": malformed header");
      block = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    detail::require(eq != std::string::npos,
                    "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    auto as_int = [&] { return static_cast<int>(parse_double(value)); };
    auto as_long = [&] { return static_cast<long>(parse_double(value)); };
    auto as_seed = [&] { return static_cast<std::uint64_t>(std::stoull(value)); };

    if (block == "problem") {
      if (key == "m") cfg.problem.m = as_int();
      else if (key == "d") cfg.problem.d = as_int();
      else if (key == "p") cfg.problem.p = as_int();
      else if (key == "sigma") cfg.problem.sigma = parse_double(value);
      else if (key == "seed") cfg.problem.seed = as_seed();
      else throw Error("unknown problem key: " + key);
    } else if (block == "graph") {
      if (key == "kind") cfg.graph.kind = value;
      else if (key == "k") cfg.graph.k = as_int();
      else if (key == "edge_prob") cfg.graph.edge_prob = parse_double(value);
      else if (key == "B") cfg.graph.window_b = as_int();
      else if (key == "seed") cfg.graph.seed = as_seed();
      else throw Error("unknown graph key: " + key);
    } else if (block == "schedules") {
      if (key == "alpha")
        cfg.schedules.alpha = parse_schedule(value, ScheduleRole::Stepsize);
      else if (key == "tau")
        cfg.schedules.tau = parse_schedule(value, ScheduleRole::XThreshold);
      else if (key == "zeta")
        cfg.schedules.zeta = parse_schedule(value, ScheduleRole::YThreshold);
      else throw Error("unknown schedules key: " + key);
    } else if (block == "run") {
      if (key == "horizon") cfg.run.horizon = as_long();
      else if (key == "termination") {
        termination_seen = true;
        if (value == "none") cfg.run.termination.reset();
        else cfg.run.termination = parse_double(value);
      } else if (key == "cap") cfg.run.cap = as_long();
      else if (key == "trials") cfg.run.trials = as_int();
      else if (key == "base_seed") cfg.run.base_seed = as_seed();
      else if (key == "thinning") cfg.run.thinning = as_long();
      else if (key == "theory_horizon") cfg.run.theory_horizon = as_long();
      else throw Error("unknown run key: " + key);
    } else if (block == "table1") {
      auto scheds = detail::split_on(value, '|');
      detail::require(!scheds.empty(), "empty schedule grid");
      if (key == "tau_grid") {
        cfg.table1.tau_grid.clear();
        for (const auto& s : scheds)
          cfg.table1.tau_grid.push_back(
              parse_schedule(s, ScheduleRole::XThreshold));
      } else if (key == "zeta_grid") {
        cfg.table1.zeta_grid.clear();
        for (const auto& s : scheds)
          cfg.table1.zeta_grid.push_back(
              parse_schedule(s, ScheduleRole::YThreshold));
      } else {
        throw Error("unknown table1 key: " + key);
      }
    } else if (block == "curves") {
      detail::require(key == "variant", "unknown curves key: " + key);
      auto parts = detail::split_on(value, '|');
      detail::require(parts.size() == 3,
                      "variant needs 'NAME | TAU | ZETA': " + value);
      CurveVariant v;
      v.name = parts[0];
      v.tau = parse_schedule(parts[1], ScheduleRole::XThreshold);
      v.zeta = parse_schedule(parts[2], ScheduleRole::YThreshold);
      cfg.curves.push_back(std::move(v));
    } else if (block == "output") {
      if (key == "dir") cfg.output.dir = value;
      else if (key == "formats") cfg.output.formats = value;
      else throw Error("unknown output key: " + key);
    } else {
      throw Error("line " + std::to_string(lineno) +
                  ": key outside any known block: " + key);
    }
  }
  if (!termination_seen) cfg.run.termination = 1e-2;
  validate_config(cfg);
  return cfg;
}

inline void validate_config(const ExperimentConfig& cfg) {
  detail::require(cfg.problem.m >= 1 && cfg.problem.d >= 1 && cfg.problem.p >= 1,
                  "problem dimensions must be >= 1");
  detail::require(cfg.problem.sigma >= 0.0, "sigma must be nonnegative");
  detail::require(cfg.graph.kind == "k-out" || cfg.graph.kind == "ring" ||
                      cfg.graph.kind == "complete" || cfg.graph.kind == "random",
                  "unknown graph kind: " + cfg.graph.kind);
  if (cfg.graph.kind == "k-out")
    detail::require(1 <= cfg.graph.k && cfg.graph.k <= cfg.problem.m - 1,
                    "k-out graph needs 1 <= k <= m-1");
  detail::require(cfg.graph.window_b >= 1, "graph window B must be >= 1");
  detail::require(cfg.run.horizon >= 0, "horizon must be nonnegative");
  detail::require(cfg.run.cap >= 1, "cap must be >= 1");
  detail::require(cfg.run.trials >= 1, "trials must be >= 1");
  detail::require(cfg.run.thinning >= 0, "thinning must be nonnegative");
  if (cfg.run.termination)
    detail::require(*cfg.run.termination > 0.0, "termination must be positive");
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  detail::require(is.good(), "cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[problem]\n";
  os << "m = " << cfg.problem.m << '\n';
  os << "d = " << cfg.problem.d << '\n';
  os << "p = " << cfg.problem.p << '\n';
  os << "sigma = " << format_double(cfg.problem.sigma) << '\n';
  os << "seed = " << cfg.problem.seed << '\n';
  os << "\n[graph]\n";
  os << "kind = " << cfg.graph.kind << '\n';
  os << "k = " << cfg.graph.k << '\n';
  os << "edge_prob = " << format_double(cfg.graph.edge_prob) << '\n';
  os << "B = " << cfg.graph.window_b << '\n';
  os << "seed = " << cfg.graph.seed << '\n';
  os << "\n[schedules]\n";
  os << "alpha = " << cfg.schedules.alpha.to_string() << '\n';
  os << "tau = " << cfg.schedules.tau.to_string() << '\n';
  os << "zeta = " << cfg.schedules.zeta.to_string() << '\n';
  os << "\n[run]\n";
  os << "horizon = " << cfg.run.horizon << '\n';
  os << "termination = "
     << (cfg.run.termination ? format_double(*cfg.run.termination)
                             : std::string("none"))
     << '\n';
  os << "cap = " << cfg.run.cap << '\n';
  os << "trials = " << cfg.run.trials << '\n';
  os << "base_seed = " << cfg.run.base_seed << '\n';
  os << "thinning = " << cfg.run.thinning << '\n';
  os << "theory_horizon = " << cfg.run.theory_horizon << '\n';
  if (!cfg.table1.tau_grid.empty() || !cfg.table1.zeta_grid.empty()) {
    os << "\n[table1]\n";
    auto grid_line = [&os](const char* key, const std::vector<Schedule>& grid) {
      os << key << " = ";
      for (std::size_t i = 0; i < grid.size(); ++i)
        os << (i ? " | " : "") << grid[i].to_string();
      os << '\n';
    };
    if (!cfg.table1.tau_grid.empty()) grid_line("tau_grid", cfg.table1.tau_grid);
    if (!cfg.table1.zeta_grid.empty())
      grid_line("zeta_grid", cfg.table1.zeta_grid);
  }
  if (!cfg.curves.empty()) {
    os << "\n[curves]\n";
    for (const auto& v : cfg.curves)
      os << "variant = " << v.name << " | " << v.tau.to_string() << " | "
         << v.zeta.to_string() << '\n';
  }
  os << "\n[output]\n";
  os << "dir = " << cfg.output.dir << '\n';
  os << "formats = " << cfg.output.formats << '\n';
  return os.str();
}

/// Builds the graph sequence a config describes; the horizon bounds the
/// connectivity certification of random sequences.
inline GraphSequence build_graph(const ProblemBlock& problem,
                                 const GraphBlock& graph, long horizon) {
  if (graph.kind == "k-out")
    return k_out_neighbors_graph(problem.m, graph.k, graph.seed);
  if (graph.kind == "ring")
    return k_out_neighbors_graph(problem.m, 1, graph.seed);
  if (graph.kind == "complete")
    return k_out_neighbors_graph(problem.m, problem.m - 1, graph.seed);
  if (graph.kind == "random")
    return GraphSequence::random(problem.m, graph.edge_prob, graph.window_b,
                                 std::max<long>(horizon, graph.window_b),
                                 graph.seed);
  throw Error("unknown graph kind: " + graph.kind);
}

}  // namespace etgp
