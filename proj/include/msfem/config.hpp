#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msfem/online.hpp"

namespace msfem {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Flat "key = value" configuration; lists are comma separated, '#' starts a comment.
struct RunConfig {
  std::string testcase = "2d_moderate";  // 1d | 2d_moderate | 2d_contrast | custom
  int dimension = 2;
  std::string diffusion;  // custom only
  std::string advection_x = "0";
  std::string advection_y = "0";
  std::string load;  // overrides the built-in load when set
  double eps = 1.0 / 32;
  std::vector<double> alphas{0.5};
  int coarse_exponent = 3;
  std::optional<int> fine_exponent;  // unset: h = 2^-5 min(eps, alpha)
  int fine_exponent_cap = 13;
  std::vector<MethodSpec> methods;
  FormKind form = FormKind::standard;
  MuBarRule mu_bar = MuBarRule::automatic;
  std::optional<double> u0, u1;
  std::string output;
  std::string dump_dir;
  std::string store_dir;
  int workers = 1;
  bool allow_singular = false;
  bool record_timings = true;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
// Applies one "key = value" pair, as from a config line or a command-line override.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
void validate(const RunConfig& config);

// Fine level for one sweep point, never coarser than the coarse level.
int fine_exponent_for(const RunConfig& config, double alpha);
Problem make_problem(const RunConfig& config, double alpha);

}  // namespace msfem
