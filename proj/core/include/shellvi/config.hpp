#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shellvi/assembly.hpp"
#include "shellvi/geometry.hpp"
#include "shellvi/shell3d.hpp"
#include "shellvi/vi_solver.hpp"

namespace shellvi {

// Flat "key = value" text; '#' starts a comment. Later keys override earlier ones.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Getters throw a Config error naming the key when it is missing or malformed.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Arithmetic expression in y1, y2, x3 with + - * / ^, parentheses, pi and
// the functions sin, cos, tan, exp, log, sqrt, abs.
class Expression {
 public:
  struct Node;
  static Expression parse(const std::string& text);
  double operator()(double y1, double y2, double x3) const;
  bool is_constant() const;
  const std::string& text() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

struct ExperimentConfig {
  std::string chart = "cylinder";
  Rect bounds;
  ChartOptions chart_options;
  EdgeSet clamped;
  Lame lame;
  std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  int nx = 16;
  int ny = 16;
  int nz = 4;
  std::array<std::string, 6> force_text{"0", "0", "0", "0", "0", "0"};  // pair order 11 22 33 23 13 12
  Vec3 q = Vec3(0.0, 0.0, 1.0);
  bool obstacle = true;
  SolverConfig solver;
  Options3D options3d;
  AveragingRule averaging = AveragingRule::Trapezoid;
  std::string output = "report.csv";
  // Korn probe.
  int korn_nx = 6;
  int korn_ny = 6;
  int korn_nz = 4;
  std::vector<double> korn_eps{0.2, 0.1, 0.05, 0.025};
  bool korn_assumed_membrane = true;  // tied membrane strains in the Korn strain form
  // Density pipeline.
  std::vector<double> density_k{4, 8, 16, 32};
  double density_amplitude = 0.05;
  // Signorini check.
  int samples = 20;
  double amplitude = 0.2;
  unsigned long seed = 1;

  ForceField force() const;
  Chart make_chart() const;
};

// Required keys: chart, bounds, clamped_edges, lambda, mu, q. Validates the
// invariants (decreasing positive eps, mesh sizes >= 2, unit q).
ExperimentConfig experiment_config(const Config& cfg);

}  // namespace shellvi
