#include <bit>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "msfem/offline.hpp"

namespace msfem {

namespace fs = std::filesystem;

namespace {

constexpr char magic[8] = {'M', 'S', 'F', 'E', 'M', 'B', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw Error("truncated basis record");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::pair<std::string, const Vector*>> named_vectors(const ElementBasis& e) {
  std::vector<std::pair<std::string, const Vector*>> out;
  auto add_list = [&](const std::string& base, const std::vector<Vector>& list) {
    for (std::size_t i = 0; i < list.size(); ++i) out.emplace_back(base + "." + std::to_string(i), &list[i]);
  };
  auto add_pair = [&](const std::string& base, const std::array<Vector, 2>& p) {
    for (int i = 0; i < 2; ++i)
      if (p[i].size() > 0) out.emplace_back(base + "." + std::to_string(i), &p[i]);
  };
  add_list("msfem_lin", e.msfem_lin);
  add_pair("chi_diffusion", e.chi_diffusion);
  add_list("adv_lin", e.adv_lin);
  add_pair("chi_strong", e.chi_strong);
  if (e.bubble_strong.size() > 0) out.emplace_back("bubble_strong", &e.bubble_strong);
  add_list("adv_cr", e.adv_cr);
  add_pair("chi_weak", e.chi_weak);
  if (e.bubble_weak.size() > 0) out.emplace_back("bubble_weak", &e.bubble_weak);
  return out;
}

void assign_vector(ElementBasis& e, const std::string& name, Vector v) {
  const auto dot = name.find('.');
  const std::string base = name.substr(0, dot);
  const std::size_t i = dot == std::string::npos ? 0 : std::stoul(name.substr(dot + 1));
  auto into_list = [&](std::vector<Vector>& list) {
    if (list.size() <= i) list.resize(i + 1);
    list[i] = std::move(v);
  };
  if (base == "msfem_lin") into_list(e.msfem_lin);
  else if (base == "adv_lin") into_list(e.adv_lin);
  else if (base == "adv_cr") into_list(e.adv_cr);
  else if (base == "chi_diffusion") e.chi_diffusion.at(i) = std::move(v);
  else if (base == "chi_strong") e.chi_strong.at(i) = std::move(v);
  else if (base == "chi_weak") e.chi_weak.at(i) = std::move(v);
  else if (base == "bubble_strong") e.bubble_strong = std::move(v);
  else if (base == "bubble_weak") e.bubble_weak = std::move(v);
  else throw Error("unknown basis record entry '" + name + "'");
}

std::string element_file(Index k) { return "element_" + std::to_string(k) + ".bin"; }

std::vector<double> scalars(const ElementBasis& e) {
  return {e.mu_bar,
          e.peclet,
          e.tau_supg,
          e.tau_bubble,
          e.bubble_integral,
          e.weak_bubble_integral,
          e.a_bar_p1(0, 0), e.a_bar_p1(0, 1), e.a_bar_p1(1, 0), e.a_bar_p1(1, 1),
          e.b_bar_p1[0], e.b_bar_p1[1],
          e.a_bar_msfem_lin(0, 0), e.a_bar_msfem_lin(0, 1), e.a_bar_msfem_lin(1, 0), e.a_bar_msfem_lin(1, 1),
          e.b_bar_msfem_lin[0], e.b_bar_msfem_lin[1],
          e.a_bar_cr(0, 0), e.a_bar_cr(0, 1), e.a_bar_cr(1, 0), e.a_bar_cr(1, 1),
          e.b_bar_cr[0], e.b_bar_cr[1],
          e.r0, e.r[0], e.r[1], e.r_g[0], e.r_g[1]};
}

const char* scalar_names[] = {"mu_bar", "peclet", "tau", "tau_bubble", "bubble_integral",
                              "weak_bubble_integral", "a_bar_p1.00", "a_bar_p1.01", "a_bar_p1.10",
                              "a_bar_p1.11", "b_bar_p1.0", "b_bar_p1.1", "a_bar_msfem_lin.00",
                              "a_bar_msfem_lin.01", "a_bar_msfem_lin.10", "a_bar_msfem_lin.11",
                              "b_bar_msfem_lin.0", "b_bar_msfem_lin.1", "a_bar.00", "a_bar.01",
                              "a_bar.10", "a_bar.11", "b_bar.0", "b_bar.1", "r0", "r.0", "r.1",
                              "r_g.0", "r_g.1"};

void set_scalars(ElementBasis& e, const std::vector<double>& s) {
  std::size_t i = 0;
  e.mu_bar = s[i++];
  e.peclet = s[i++];
  e.tau_supg = s[i++];
  e.tau_bubble = s[i++];
  e.bubble_integral = s[i++];
  e.weak_bubble_integral = s[i++];
  for (Mat2* m : {&e.a_bar_p1}) {
    (*m)(0, 0) = s[i++]; (*m)(0, 1) = s[i++]; (*m)(1, 0) = s[i++]; (*m)(1, 1) = s[i++];
  }
  e.b_bar_p1 = Vec2(s[i], s[i + 1]);
  i += 2;
  e.a_bar_msfem_lin << s[i], s[i + 1], s[i + 2], s[i + 3];
  i += 4;
  e.b_bar_msfem_lin = Vec2(s[i], s[i + 1]);
  i += 2;
  e.a_bar_cr << s[i], s[i + 1], s[i + 2], s[i + 3];
  i += 4;
  e.b_bar_cr = Vec2(s[i], s[i + 1]);
  i += 2;
  e.r0 = s[i++];
  e.r = Vec2(s[i], s[i + 1]);
  i += 2;
  e.r_g = Vec2(s[i], s[i + 1]);
}

}  // namespace

void save_store(const BasisStore& store, const std::string& root) {
  const fs::path dir = fs::path(root) / store.key;
  fs::create_directories(dir);
  for (std::size_t k = 0; k < store.elements.size(); ++k) {
    std::ofstream out(dir / element_file(static_cast<Index>(k)), std::ios::binary);
    out.write(magic, sizeof magic);
    const auto vecs = named_vectors(store.elements[k]);
    put_u64(out, vecs.size());
    for (const auto& [name, v] : vecs) {
      put_u64(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put_u64(out, static_cast<std::uint64_t>(v->size()));
      for (Index i = 0; i < v->size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>((*v)[i]));
    }
    if (!out) throw Error("failed to write " + (dir / element_file(static_cast<Index>(k))).string());
  }
  std::ofstream m(dir / "manifest.txt");
  const auto& o = store.options;
  m << "key = " << store.key << '\n'
    << "dimension = " << store.dimension << '\n'
    << "elements = " << store.elements.size() << '\n'
    << "diffusion_lin = " << o.diffusion_lin << '\n'
    << "strong = " << o.strong << '\n'
    << "weak = " << o.weak << '\n'
    << "form = " << (o.form == FormKind::standard ? "standard" : "skew") << '\n'
    << "mu_bar = " << to_string(o.mu_bar) << '\n'
    << "seconds = " << fmt(store.seconds) << '\n';
  for (std::size_t k = 0; k < store.elements.size(); ++k) {
    const auto s = scalars(store.elements[k]);
    for (std::size_t i = 0; i < s.size(); ++i)
      m << "element." << k << '.' << scalar_names[i] << " = " << fmt(s[i]) << '\n';
  }
  if (!m) throw Error("failed to write manifest in " + dir.string());
}

std::optional<BasisStore> load_store(const std::string& root, const std::string& key) {
  const fs::path dir = fs::path(root) / key;
  std::ifstream m(dir / "manifest.txt");
  if (!m) return std::nullopt;
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(m, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  if (kv["key"] != key) return std::nullopt;
  BasisStore store;
  store.key = key;
  store.loaded = true;
  store.dimension = std::stoi(kv.at("dimension"));
  store.options.diffusion_lin = kv.at("diffusion_lin") == "1";
  store.options.strong = kv.at("strong") == "1";
  store.options.weak = kv.at("weak") == "1";
  store.options.form = kv.at("form") == "standard" ? FormKind::standard : FormKind::skew_symmetric;
  store.options.mu_bar = parse_mu_bar(kv.at("mu_bar"));
  const std::size_t ne = std::stoul(kv.at("elements"));
  store.elements.resize(ne);
  const std::size_t ns = std::size(scalar_names);
  for (std::size_t k = 0; k < ne; ++k) {
    std::vector<double> s(ns);
    for (std::size_t i = 0; i < ns; ++i)
      s[i] = std::strtod(kv.at("element." + std::to_string(k) + "." + scalar_names[i]).c_str(), nullptr);
    set_scalars(store.elements[k], s);
    std::ifstream in(dir / element_file(static_cast<Index>(k)), std::ios::binary);
    char head[8];
    in.read(head, 8);
    if (!in || std::memcmp(head, magic, 8) != 0) throw Error("bad basis record in " + dir.string());
    const std::uint64_t count = get_u64(in);
    for (std::uint64_t c = 0; c < count; ++c) {
      std::string name(get_u64(in), '\0');
      in.read(name.data(), static_cast<std::streamsize>(name.size()));
      Vector v(static_cast<Index>(get_u64(in)));
      for (Index i = 0; i < v.size(); ++i) v[i] = std::bit_cast<double>(get_u64(in));
      assign_vector(store.elements[k], name, std::move(v));
    }
  }
  return store;
}

BasisStore obtain_store(const Problem& problem, const NestedMeshes& meshes,
                        const OfflineOptions& options, const std::string& root) {
  if (root.empty()) return compute_offline(problem, meshes, options);
  const auto start = std::chrono::steady_clock::now();
  if (auto s = load_store(root, store_key(problem, meshes, options))) {
    s->options.workers = options.workers;
    s->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return *s;
  }
  BasisStore s = compute_offline(problem, meshes, options);
  save_store(s, root);
  return s;
}

}  // namespace msfem
