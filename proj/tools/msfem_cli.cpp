#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "msfem/acceptance.hpp"
#include "msfem/runner.hpp"

using namespace msfem;

namespace {

RunConfig read_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig c = load_config(path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(' '));
      s.erase(s.find_last_not_of(' ') + 1);
      return s;
    };
    try {
      apply_setting(c, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("--set: ") + e.what());
    }
  }
  validate(c);
  return c;
}

int finish(const RunOutput& out, const RunConfig& c) {
  if (out.any_singular && !c.allow_singular) {
    std::cerr << "error: a linear system was singular (set allow_singular = true to accept)\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale finite element solvers for advection-diffusion problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override a configuration key (key=value)");
  };

  auto* run_cmd = app.add_subcommand("run", "solve the configured methods at a single alpha");
  add_common(run_cmd);
  double alpha = 0.0;
  run_cmd->add_option("--alpha", alpha, "alpha value (default: the single configured alpha)");

  auto* sweep_cmd = app.add_subcommand("sweep", "solve the configured methods at every alpha and write the CSV");
  add_common(sweep_cmd);

  auto* basis_cmd = app.add_subcommand("dump-basis", "write basis functions, correctors and bubbles of one element");
  add_common(basis_cmd);
  Index element = 0;
  std::string out_path;
  basis_cmd->add_option("--element", element, "coarse element id")->required();
  basis_cmd->add_option("--alpha", alpha, "alpha value (default: first configured alpha)");
  basis_cmd->add_option("--out", out_path, "output directory")->required();

  auto* field_cmd = app.add_subcommand("dump-field", "write the fine field of one method: x [y] recon p1 ref");
  add_common(field_cmd);
  std::string method;
  field_cmd->add_option("--method", method, "method, e.g. Adv_MsFEM_CR_B or PG_Adv_MsFEM_CR:nonintrusive")->required();
  field_cmd->add_option("--alpha", alpha, "alpha value (default: first configured alpha)");
  field_cmd->add_option("--out", out_path, "output file")->required();
  std::string mesh_path;
  field_cmd->add_option("--mesh-out", mesh_path, "also write the global fine mesh");

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
  std::vector<std::string> only;
  verify_cmd->add_option("--only", only, "criteria to run, e.g. A1 A4");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify_cmd) return run_acceptance(std::cout, only) == 0 ? 0 : 1;

    RunConfig config = read_config(config_path, overrides);
    const bool alpha_given = alpha > 0.0;
    if (*run_cmd) {
      if (alpha_given) config.alphas = {alpha};
      if (config.alphas.size() != 1) throw ConfigError("run: several alpha values configured, use sweep or --alpha");
      const RunOutput out = run(config, &std::cout);
      return finish(out, config);
    }
    if (*sweep_cmd) {
      const RunOutput out = run(config, &std::cout);
      if (!config.output.empty()) std::cout << "wrote " << out.rows.size() << " rows to " << config.output << '\n';
      return finish(out, config);
    }
    const double a = alpha_given ? alpha : config.alphas.front();
    if (*basis_cmd) {
      for (const auto& name : dump_basis(config, a, element, out_path)) std::cout << name << '\n';
      return 0;
    }
    if (*field_cmd) {
      config.alphas = {a};
      config.methods = {parse_method_spec(method, config.form)};
      Session session(config);
      const Problem problem = make_problem(config, a);
      const NestedMeshes& meshes = session.meshes(a);
      const BasisStore& store = session.store(problem, a);
      AssemblyOptions opts;
      opts.workers = config.workers;
      const SolveResult r = solve(problem, meshes, store, config.methods.front(), opts);
      const BrokenField p1 = extract_p1_part(r, meshes);
      std::ofstream out(out_path);
      if (!out) throw Error("cannot write '" + out_path + "'");
      write_field(out, meshes, r.fine, p1, session.reference(problem, a));
      if (!mesh_path.empty()) {
        std::ofstream m(mesh_path);
        write_mesh(m, meshes.global);
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SingularSystem& e) {
    std::cerr << "singular system: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
