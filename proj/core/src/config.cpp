#include "shellvi/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "shellvi/errors.hpp"

namespace shellvi {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

Error missing(const std::string& key) {
  return Error(ErrorKind::Config, "missing config key '" + key + "'");
}

Error malformed(const std::string& key, const std::string& value) {
  return Error(ErrorKind::Config, "malformed value for config key '" + key + "': " + value);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw missing(key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    return Expression::parse(v)(0.0, 0.0, 0.0);
  } catch (const Error&) {
    throw malformed(key, v);
  }
}

long Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  std::size_t pos = 0;
  long out = 0;
  try {
    out = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw malformed(key, v);
  }
  if (pos != v.size()) throw malformed(key, v);
  return out;
}

bool Config::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw malformed(key, v);
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::string v = get_string(key);
  for (char& ch : v)
    if (ch == ',') ch = ' ';
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(Expression::parse(tok)(0.0, 0.0, 0.0));
    } catch (const Error&) {
      throw malformed(key, get_string(key));
    }
  }
  if (out.empty()) throw malformed(key, get_string(key));
  return out;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}
double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}
bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}
std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? get_list(key) : fallback;
}

struct Expression::Node {
  char op = 0;  // 'n' number, 'v' variable, 'f' function, 'u' negation, else binary
  double value = 0.0;
  int var = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const double* vars) const {
    switch (op) {
      case 'n': return value;
      case 'v': return vars[var];
      case 'f': return fn(a->eval(vars));
      case 'u': return -a->eval(vars);
      case '+': return a->eval(vars) + b->eval(vars);
      case '-': return a->eval(vars) - b->eval(vars);
      case '*': return a->eval(vars) * b->eval(vars);
      case '/': return a->eval(vars) / b->eval(vars);
      case '^': return std::pow(a->eval(vars), b->eval(vars));
      default: return 0.0;
    }
  }
  bool constant() const {
    if (op == 'v') return false;
    return (!a || a->constant()) && (!b || b->constant());
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Config, "expression '" + s_ + "': " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
  NodePtr sum() {
    NodePtr n = product();
    while (true) {
      if (accept('+')) n = binary('+', n, product());
      else if (accept('-')) n = binary('-', n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    while (true) {
      if (accept('*')) n = binary('*', n, unary());
      else if (accept('/')) n = binary('/', n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Expression::Node>();
      n->op = 'u';
      n->a = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return binary('^', base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr n = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->op = 'n';
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t b = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(b, pos_ - b);
      auto n = std::make_shared<Expression::Node>();
      if (name == "y1" || name == "y2" || name == "x3") {
        n->op = 'v';
        n->var = name == "y1" ? 0 : name == "y2" ? 1 : 2;
        return n;
      }
      if (name == "pi") {
        n->op = 'n';
        n->value = std::numbers::pi;
        return n;
      }
      static const std::map<std::string, double (*)(double)> fns = {
          {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
          {"tan", [](double x) { return std::tan(x); }},   {"exp", [](double x) { return std::exp(x); }},
          {"log", [](double x) { return std::log(x); }},   {"sqrt", [](double x) { return std::sqrt(x); }},
          {"abs", [](double x) { return std::abs(x); }}};
      const auto it = fns.find(name);
      if (it == fns.end()) fail("unknown name '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      n->op = 'f';
      n->fn = it->second;
      n->a = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::operator()(double y1, double y2, double x3) const {
  const double vars[3] = {y1, y2, x3};
  return root_->eval(vars);
}

bool Expression::is_constant() const { return root_->constant(); }

ForceField ExperimentConfig::force() const {
  std::array<Expression, 6> e;
  for (std::size_t k = 0; k < 6; ++k) e[k] = Expression::parse(force_text[k]);
  ForceField f;
  f.F = [e](const Vec2& y, double x3) {
    Mat3 F;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) F(i, j) = e[static_cast<std::size_t>(pair3(i, j))](y[0], y[1], x3);
    return F;
  };
  return f;
}

Chart ExperimentConfig::make_chart() const { return builtin_chart(chart, bounds, clamped, chart_options); }

namespace {

Vec3 vec3(const Config& c, const std::string& key) {
  const std::vector<double> v = c.get_list(key);
  if (v.size() != 3) throw malformed(key, c.get_string(key));
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace

ExperimentConfig experiment_config(const Config& c) {
  ExperimentConfig x;
  x.chart = c.get_string("chart");
  const std::vector<double> b = c.get_list("bounds");
  if (b.size() != 4) throw malformed("bounds", c.get_string("bounds"));
  x.bounds = Rect{b[0], b[1], b[2], b[3]};
  x.chart_options.swap = c.get_bool("swap", false);
  if (c.has("offset")) x.chart_options.offset = vec3(c, "offset");
  x.clamped = EdgeSet::parse(c.get_string("clamped_edges"));
  x.lame = Lame{c.get_double("lambda"), c.get_double("mu")};
  check_lame(x.lame);
  x.q = vec3(c, "q");
  if (std::abs(x.q.norm() - 1.0) > 1e-12) throw Error(ErrorKind::Config, "config key 'q' must be a unit vector");
  x.eps = c.get_list("eps", x.eps);
  for (std::size_t i = 0; i < x.eps.size(); ++i)
    if (!(x.eps[i] > 0.0) || (i > 0 && !(x.eps[i] < x.eps[i - 1])))
      throw Error(ErrorKind::Config, "config key 'eps' must be strictly decreasing and positive");
  x.nx = static_cast<int>(c.get_int("nx", x.nx));
  x.ny = static_cast<int>(c.get_int("ny", x.ny));
  x.nz = static_cast<int>(c.get_int("nz", x.nz));
  if (x.nx < 2 || x.ny < 2 || x.nz < 2) throw Error(ErrorKind::Config, "mesh sizes nx, ny, nz must be at least 2");
  static const char* fkeys[6] = {"F11", "F22", "F33", "F23", "F13", "F12"};
  for (std::size_t k = 0; k < 6; ++k) {
    x.force_text[k] = c.get_string(fkeys[k], "0");
    try {
      (void)Expression::parse(x.force_text[k]);
    } catch (const Error&) {
      throw malformed(fkeys[k], x.force_text[k]);
    }
  }
  x.obstacle = c.get_bool("obstacle", true);
  x.solver.tol = c.get_double("tol", x.solver.tol);
  x.solver.active_tol = c.get_double("active_tol", x.solver.active_tol);
  x.solver.max_sweeps = c.get_int("max_sweeps", x.solver.max_sweeps);
  x.options3d.assumed_shear = c.get_bool("assumed_shear", true);
  x.options3d.assumed_membrane = c.get_bool("assumed_membrane", false);
  x.options3d.enhanced_normal = c.get_bool("enhanced_normal", true);
  const std::string avg = c.get_string("averaging", "trapezoid");
  if (avg == "trapezoid") x.averaging = AveragingRule::Trapezoid;
  else if (avg == "simpson") x.averaging = AveragingRule::Simpson;
  else throw malformed("averaging", avg);
  x.output = c.get_string("output", x.output);
  x.korn_nx = static_cast<int>(c.get_int("korn_nx", x.korn_nx));
  x.korn_ny = static_cast<int>(c.get_int("korn_ny", x.korn_ny));
  x.korn_nz = static_cast<int>(c.get_int("korn_nz", x.korn_nz));
  x.korn_eps = c.get_list("korn_eps", x.korn_eps);
  x.korn_assumed_membrane = c.get_bool("korn_assumed_membrane", x.korn_assumed_membrane);
  x.density_k = c.get_list("density_k", x.density_k);
  x.density_amplitude = c.get_double("density_amplitude", x.density_amplitude);
  x.samples = static_cast<int>(c.get_int("samples", x.samples));
  x.amplitude = c.get_double("amplitude", x.amplitude);
  x.seed = static_cast<unsigned long>(c.get_int("seed", static_cast<long>(x.seed)));
  return x;
}

}  // namespace shellvi
