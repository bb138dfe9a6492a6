#include "msfem/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "msfem/expression.hpp"

namespace msfem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Numbers may be written as expressions such as 2^-5.
double parse_number(const std::string& key, const std::string& value) {
  try {
    const double v = Expression::parse(value)(0.0, 0.0, 0.0, 0.0);
    if (!std::isfinite(v)) throw InvalidArgument("not finite");
    return v;
  } catch (const Error& e) {
    throw ConfigError(key + ": cannot read number '" + value + "' (" + e.what() + ")");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer, got '" + value + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

void check_expression(const std::string& key, const std::string& value) {
  try {
    Expression::parse(value);
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const bool path_key = key == "output" || key == "dump_dir" || key == "store_dir";
  if (value.empty() && !path_key) throw ConfigError(key + ": empty value");
  if (key == "testcase") {
    if (value != "1d" && value != "2d_moderate" && value != "2d_contrast" && value != "custom")
      throw ConfigError("testcase: unknown '" + value + "' (1d, 2d_moderate, 2d_contrast, custom)");
    c.testcase = value;
    if (value == "1d") c.dimension = 1;
    else if (value != "custom") c.dimension = 2;
  } else if (key == "dimension") {
    c.dimension = parse_int(key, value);
    if (c.dimension != 1 && c.dimension != 2) throw ConfigError("dimension: must be 1 or 2");
  } else if (key == "diffusion") {
    check_expression(key, value);
    c.diffusion = value;
  } else if (key == "advection_x") {
    check_expression(key, value);
    c.advection_x = value;
  } else if (key == "advection_y") {
    check_expression(key, value);
    c.advection_y = value;
  } else if (key == "load") {
    check_expression(key, value);
    c.load = value;
  } else if (key == "eps") {
    c.eps = parse_number(key, value);
  } else if (key == "alpha" || key == "alphas") {
    c.alphas.clear();
    for (const auto& item : split_list(value)) c.alphas.push_back(parse_number(key, item));
  } else if (key == "coarse_exponent") {
    c.coarse_exponent = parse_int(key, value);
  } else if (key == "fine_exponent") {
    if (value == "auto")
      c.fine_exponent.reset();
    else
      c.fine_exponent = parse_int(key, value);
  } else if (key == "fine_exponent_cap") {
    c.fine_exponent_cap = parse_int(key, value);
  } else if (key == "methods") {
    c.methods.clear();
    for (const auto& item : split_list(value)) {
      try {
        c.methods.push_back(parse_method_spec(item, c.form));
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("methods: ") + e.what());
      }
    }
  } else if (key == "form") {
    if (value == "standard") c.form = FormKind::standard;
    else if (value == "skew_symmetric") c.form = FormKind::skew_symmetric;
    else throw ConfigError("form: expected standard or skew_symmetric, got '" + value + "'");
    for (auto& m : c.methods) m.form = c.form;
  } else if (key == "mu_bar") {
    try {
      c.mu_bar = parse_mu_bar(value);
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("mu_bar: ") + e.what());
    }
  } else if (key == "u0") {
    c.u0 = parse_number(key, value);
  } else if (key == "u1") {
    c.u1 = parse_number(key, value);
  } else if (key == "output") {
    c.output = value;
  } else if (key == "dump_dir") {
    c.dump_dir = value;
  } else if (key == "store_dir") {
    c.store_dir = value;
  } else if (key == "workers") {
    c.workers = parse_int(key, value);
    if (c.workers < 1) throw ConfigError("workers: must be at least 1");
  } else if (key == "allow_singular") {
    c.allow_singular = parse_bool(key, value);
  } else if (key == "record_timings") {
    c.record_timings = parse_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void validate(const RunConfig& c) {
  if (c.methods.empty()) throw ConfigError("methods: list is empty");
  if (c.alphas.empty()) throw ConfigError("alpha: list is empty");
  for (double a : c.alphas)
    if (!(a > 0.0)) throw ConfigError("alpha: values must be positive");
  if (!(c.eps > 0.0)) throw ConfigError("eps: must be positive");
  if (c.coarse_exponent < 1 || c.coarse_exponent > 12) throw ConfigError("coarse_exponent: out of range 1..12");
  if (c.fine_exponent && *c.fine_exponent < c.coarse_exponent)
    throw ConfigError("fine_exponent: fine mesh must refine the coarse mesh");
  if (c.fine_exponent_cap < c.coarse_exponent) throw ConfigError("fine_exponent_cap: below coarse_exponent");
  if (c.testcase == "custom" && c.diffusion.empty()) throw ConfigError("diffusion: required for a custom testcase");
  if ((c.u0 || c.u1) && c.dimension != 1) throw ConfigError("u0/u1: boundary values are only supported in 1D");
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    try {
      apply_setting(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

int fine_exponent_for(const RunConfig& c, double alpha) {
  if (c.fine_exponent) return *c.fine_exponent;
  const double h = std::ldexp(std::min(c.eps, alpha), -5);
  int m = c.coarse_exponent;
  while (std::ldexp(1.0, -m) > h * (1 + 1e-12) && m < c.fine_exponent_cap) ++m;
  return m;
}

Problem make_problem(const RunConfig& c, double alpha) {
  Problem p;
  if (c.testcase == "1d") {
    p = testcase_1d(alpha, c.eps);
  } else if (c.testcase == "2d_moderate") {
    p = testcase_2d_moderate(alpha, c.eps);
  } else if (c.testcase == "2d_contrast") {
    p = testcase_2d_contrast(alpha, c.eps);
  } else {
    p = custom_problem(c.dimension, c.diffusion, c.advection_x, c.advection_y, c.load.empty() ? "1" : c.load,
                       alpha, c.eps);
  }
  if (!c.load.empty() && c.testcase != "custom") p = with_load_expression(std::move(p), c.load);
  if (c.u0 || c.u1) p = with_boundary(std::move(p), c.u0.value_or(0.0), c.u1.value_or(0.0));
  return p;
}

}  // namespace msfem
