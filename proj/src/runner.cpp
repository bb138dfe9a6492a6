#include "msfem/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include "msfem/log.hpp"
#include "msfem/parallel.hpp"

namespace msfem {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv_header(std::ostream& out) {
  out << "alpha,method,pathway,err_oble,err_full,norm_oble,norm_full,overshoot,"
         "offline_seconds,online_seconds,singular_flag\n";
}

void write_csv_row(std::ostream& out, const CsvRow& r) {
  const ErrorReport& e = r.errors;
  out << format_double(r.alpha) << ',' << r.method << ',' << r.pathway << ',' << format_double(e.err_oble) << ','
      << format_double(e.err_full) << ',' << format_double(e.norm_oble) << ',' << format_double(e.norm_full)
      << ',' << format_double(e.overshoot) << ',' << format_double(r.offline_seconds) << ','
      << format_double(r.online_seconds) << ',' << (r.singular ? 1 : 0) << '\n';
}

Session::Session(RunConfig config) : config_(std::move(config)) {}

const NestedMeshes& Session::meshes(double alpha) {
  const int fine = fine_exponent_for(config_, alpha);
  auto& slot = meshes_[fine];
  if (!slot)
    slot = std::make_unique<NestedMeshes>(build_meshes(config_.dimension, config_.coarse_exponent, fine));
  return *slot;
}

const BasisStore& Session::store(const Problem& problem, double alpha, double* seconds) {
  const NestedMeshes& m = meshes(alpha);
  OfflineOptions base;
  base.form = config_.form;
  base.mu_bar = config_.mu_bar;
  base.workers = resolve_workers(config_.workers);
  const OfflineOptions options = required_options(config_.methods, base);
  const std::string key = store_key(problem, m, options);
  auto& slot = stores_[key];
  if (seconds) *seconds = 0.0;
  if (!slot) {
    const auto start = std::chrono::steady_clock::now();
    slot = std::make_unique<BasisStore>(obtain_store(problem, m, options, config_.store_dir));
    if (seconds) *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return *slot;
}

const BrokenField& Session::reference(const Problem& problem, double alpha) {
  const int fine = fine_exponent_for(config_, alpha);
  const std::string key = problem.descriptor + "|" + problem.load_descriptor + "|" + std::to_string(fine) +
                          "|" + std::to_string(static_cast<int>(config_.form));
  auto it = references_.find(key);
  if (it == references_.end()) {
    const NestedMeshes& m = meshes(alpha);
    const ReferenceSolution ref = reference_fine(problem, m.global, config_.form);
    it = references_.emplace(key, restrict_to_elements(m, ref.values)).first;
  }
  return it->second;
}

void write_field(std::ostream& out, const NestedMeshes& meshes, const BrokenField& recon, const BrokenField& p1,
                 const BrokenField& reference) {
  const Index n = meshes.global.num_vertices();
  std::vector<std::pair<Index, Index>> source(n, {-1, -1});
  for (std::size_t k = 0; k < meshes.local.size(); ++k) {
    const FineMesh& local = meshes.local[k];
    for (Index v = 0; v < local.num_vertices(); ++v)
      if (source[local.parent_map[v]].first < 0) source[local.parent_map[v]] = {static_cast<Index>(k), v};
  }
  for (Index g = 0; g < n; ++g) {
    const Point& p = meshes.global.vertices[g];
    const auto [k, v] = source[g];
    out << format_double(p.x());
    if (meshes.global.dimension == 2) out << ' ' << format_double(p.y());
    out << ' ' << format_double(recon[k][v]) << ' ' << format_double(p1[k][v]) << ' '
        << format_double(reference[k][v]) << '\n';
  }
}

namespace {

std::string method_label(const MethodSpec& s) {
  std::string label = to_string(s.method);
  if (s.pathway == Pathway::nonintrusive) label += "_nonintrusive";
  return label;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

RunOutput run(const RunConfig& config, std::ostream* log) {
  validate(config);
  Session session(config);
  RunOutput output;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
    const double alpha = config.alphas[ai];
    const Problem problem = make_problem(config, alpha);
    const NestedMeshes& meshes = session.meshes(alpha);
    double offline_seconds = 0.0;
    const BasisStore& store = session.store(problem, alpha, &offline_seconds);
    const BrokenField& reference = session.reference(problem, alpha);
    if (!config.dump_dir.empty()) {
      auto out = open_output(fs::path(config.dump_dir) / ("mesh_" + std::to_string(fine_exponent_for(config, alpha)) + ".txt"));
      write_mesh(out, meshes.global);
    }
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const MethodSpec& spec = config.methods[mi];
      CsvRow row;
      row.alpha = alpha;
      row.method = to_string(spec.method);
      row.pathway = to_string(spec.pathway);
      row.offline_seconds = mi == 0 ? offline_seconds : 0.0;
      AssemblyOptions opts;
      opts.workers = resolve_workers(config.workers);
      try {
        const SolveResult result = solve(problem, meshes, store, spec, opts);
        const BrokenField p1 = extract_p1_part(result, meshes);
        row.errors = error_report(meshes, result.fine, p1, reference);
        row.online_seconds = result.seconds;
        if (!config.dump_dir.empty()) {
          auto out = open_output(fs::path(config.dump_dir) /
                                 ("field_" + std::to_string(ai) + "_" + method_label(spec) + ".txt"));
          write_field(out, meshes, result.fine, p1, reference);
        }
      } catch (const SingularSystem& e) {
        row.singular = true;
        row.errors = ErrorReport{nan, nan, nan, nan, nan};
        output.any_singular = true;
        warn("SingularSystem", "alpha=" + format_double(alpha) + " " + row.method + ": " + e.what());
      }
      if (!config.record_timings) row.offline_seconds = row.online_seconds = 0.0;
      if (log)
        *log << "alpha=" << format_double(alpha) << ' ' << method_label(spec) << " err_oble=" << row.errors.err_oble
             << " err_full=" << row.errors.err_full << (row.singular ? " SINGULAR" : "") << '\n';
      output.rows.push_back(row);
    }
  }
  if (!config.output.empty()) {
    auto out = open_output(config.output);
    write_csv_header(out);
    for (const auto& r : output.rows) write_csv_row(out, r);
  }
  return output;
}

std::vector<std::string> dump_basis(const RunConfig& config, double alpha, Index element,
                                    const std::string& directory) {
  const Problem problem = make_problem(config, alpha);
  const NestedMeshes meshes =
      build_meshes(config.dimension, config.coarse_exponent, fine_exponent_for(config, alpha));
  if (element < 0 || element >= meshes.coarse.num_elements())
    throw InvalidArgument("unknown element id " + std::to_string(element));
  const FineMesh& local = meshes.local[element];
  const CoefficientField& fields = problem.fields;
  std::vector<std::string> names;
  auto emit = [&](const std::string& name, const Vector& values) {
    const fs::path path = fs::path(directory) / (name + ".txt");
    auto out = open_output(path);
    for (Index v = 0; v < local.num_vertices(); ++v) {
      out << format_double(local.vertices[v].x());
      if (local.dimension == 2) out << ' ' << format_double(local.vertices[v].y());
      out << ' ' << format_double(values[v]) << '\n';
    }
    names.push_back(path.string());
  };
  const struct {
    BasisKind kind;
    const char* name;
  } kinds[] = {{BasisKind::msfem_lin, "msfem_lin"}, {BasisKind::adv_lin, "adv_lin"}, {BasisKind::adv_cr, "adv_cr"}};
  for (const auto& k : kinds) {
    const auto basis = compute_element_basis(k.kind, meshes.coarse, element, local, fields, config.form);
    for (std::size_t i = 0; i < basis.size(); ++i) emit(std::string(k.name) + "_" + std::to_string(i), basis[i]);
  }
  const auto chi_strong = compute_correctors(local, fields, Constraint::strong, config.form);
  const auto chi_weak = compute_correctors(local, fields, Constraint::weak, config.form);
  for (int a = 0; a < config.dimension; ++a) {
    emit("corrector_strong_" + std::to_string(a), chi_strong[a]);
    emit("corrector_weak_" + std::to_string(a), chi_weak[a]);
  }
  emit("bubble_strong", compute_bubble(local, fields, Constraint::strong, config.form));
  emit("bubble_weak", compute_bubble(local, fields, Constraint::weak, config.form));
  return names;
}

}  // namespace msfem
