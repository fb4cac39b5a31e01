#pragma once

// CSV helpers and the least-squares instance bundle format: one file for the
// stacked inputs (agent,row,col,value), one for the outputs, one metadata
// header carrying m, d, p, sigma, seed and the true weight vector.

#include "etgp/common.hpp"
#include "etgp/objective.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace etgp {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  detail::require(os.good(), "cannot open " + path.string() + " for writing");
  return os;
}

inline void export_instance(const LeastSquaresInstance& inst,
                            const std::string& base_path) {
  {
    auto os = open_output(base_path + "_inputs.csv");
    os << "agent,row,col,value\n";
    for (int i = 0; i < inst.agents(); ++i)
      for (int r = 0; r < inst.dim(); ++r)
        for (int c = 0; c < inst.out_dim(); ++c)
          os << (i + 1) << ',' << r << ',' << c << ','
             << format_double(inst.input(i)(r, c)) << '\n';
  }
  {
    auto os = open_output(base_path + "_outputs.csv");
    os << "agent,row,value\n";
    for (int i = 0; i < inst.agents(); ++i)
      for (int c = 0; c < inst.out_dim(); ++c)
        os << (i + 1) << ',' << c << ',' << format_double(inst.output(i)[c])
           << '\n';
  }
  {
    auto os = open_output(base_path + "_meta.csv");
    os << "key,value\n";
    os << "m," << inst.agents() << '\n';
    os << "d," << inst.dim() << '\n';
    os << "p," << inst.out_dim() << '\n';
    os << "sigma," << format_double(inst.noise_sigma()) << '\n';
    os << "seed," << inst.seed() << '\n';
    os << "xtilde,";
    for (int r = 0; r < inst.dim(); ++r)
      os << (r ? " " : "") << format_double(inst.true_weight()[r]);
    os << '\n';
  }
}

inline LeastSquaresInstance import_instance(const std::string& base_path) {
  auto read_lines = [](const std::string& path) {
    std::ifstream is(path);
    detail::require(is.good(), "cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
    detail::require(!lines.empty(), "empty file " + path);
    return lines;
  };

  int m = 0, d = 0, p = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  Vec xtilde;
  auto meta_lines = read_lines(base_path + "_meta.csv");
  for (std::size_t k = 1; k < meta_lines.size(); ++k) {
    auto f = split_csv_line(meta_lines[k]);
    detail::require(f.size() == 2, "malformed metadata line: " + meta_lines[k]);
    if (f[0] == "m") m = static_cast<int>(parse_double(f[1]));
    else if (f[0] == "d") d = static_cast<int>(parse_double(f[1]));
    else if (f[0] == "p") p = static_cast<int>(parse_double(f[1]));
    else if (f[0] == "sigma") sigma = parse_double(f[1]);
    else if (f[0] == "seed") seed = static_cast<std::uint64_t>(std::stoull(f[1]));
    else if (f[0] == "xtilde") {
      std::stringstream ss(f[1]);
      std::vector<double> vals;
      std::string tok;
      while (ss >> tok) vals.push_back(parse_double(tok));
      xtilde = Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }
  }
  detail::require(m >= 1 && d >= 1 && p >= 1, "incomplete instance metadata");
  detail::require(xtilde.size() == d, "true weight dimension mismatch");

  std::vector<Mat> inputs(static_cast<std::size_t>(m), Mat::Zero(d, p));
  auto in_lines = read_lines(base_path + "_inputs.csv");
  for (std::size_t k = 1; k < in_lines.size(); ++k) {
    auto f = split_csv_line(in_lines[k]);
    detail::require(f.size() == 4, "malformed input line: " + in_lines[k]);
    int i = static_cast<int>(parse_double(f[0])) - 1;
    int r = static_cast<int>(parse_double(f[1]));
    int c = static_cast<int>(parse_double(f[2]));
    detail::require(0 <= i && i < m && 0 <= r && r < d && 0 <= c && c < p,
                    "input index out of range: " + in_lines[k]);
    inputs[static_cast<std::size_t>(i)](r, c) = parse_double(f[3]);
  }
  std::vector<Vec> outputs(static_cast<std::size_t>(m), Vec::Zero(p));
  auto out_lines = read_lines(base_path + "_outputs.csv");
  for (std::size_t k = 1; k < out_lines.size(); ++k) {
    auto f = split_csv_line(out_lines[k]);
    detail::require(f.size() == 3, "malformed output line: " + out_lines[k]);
    int i = static_cast<int>(parse_double(f[0])) - 1;
    int c = static_cast<int>(parse_double(f[1]));
    detail::require(0 <= i && i < m && 0 <= c && c < p,
                    "output index out of range: " + out_lines[k]);
    outputs[static_cast<std::size_t>(i)][c] = parse_double(f[2]);
  }
  return LeastSquaresInstance(std::move(inputs), std::move(outputs),
                              std::move(xtilde), sigma, seed);
}

}  // namespace etgp
