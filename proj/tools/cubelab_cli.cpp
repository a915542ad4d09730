// Command-line laboratory: orbits, cube averages, seminorms, maximal
// functions, inequality verification, and convergence sweeps.
//
// Output contract: CSV (fixed schema) plus a human-readable summary on
// standard output.  Results are independent of --threads.  Exit status is 0
// iff every rigorous check passed.

#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cubelab/lab.hpp"
#include "cubelab/maximal.hpp"
#include "cubelab/seminorms.hpp"
#include "cubelab/verify.hpp"

namespace {

using namespace cubelab;

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void write_output(const std::string& name, const std::string& text) {
  const std::string resolved = resolve_out_path(name);
  if (resolved.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(resolved);
  if (!out) throw std::runtime_error("cannot write '" + resolved + "'");
  out << text;
  std::cout << "wrote " << resolved << "\n";
}

/// Orbits of the first sweep instance, one per cube position.
std::vector<OrbitSample> instance_orbits(const ExperimentConfig& cfg, std::size_t length) {
  validate_config(cfg);
  const auto obs = expanded_observables(cfg);
  const auto instances = detail::sweep_instances(cfg);
  std::vector<OrbitSample> fs;
  fs.reserve(obs.size());
  for (const auto& o : obs) fs.push_back(orbit(instances.front().system, o, instances.front().base, length));
  return fs;
}

OrbitSample random_cyclic(std::mt19937_64& rng, std::uint64_t p, std::size_t length) {
  std::vector<double> table(p);
  for (auto& v : table) v = uniform_pm1(rng);
  return orbit(SystemSpec::cyclic(p), Observable::table(table),
               {static_cast<double>(uniform_index(rng, p)), 0.0}, length);
}

struct VerifyOpts {
  std::string ineq;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::size_t N = 0;  // 0 = per-inequality default
  std::size_t H = 0;
  std::size_t L = 8;
  int k = 3;
  unsigned threads = 1;
};

std::vector<InequalityReport> run_verify(const VerifyOpts& opt) {
  std::vector<InequalityReport> reports;
  const auto stamp = [&](std::vector<InequalityReport> batch, std::uint64_t seed) {
    for (auto& r : batch) {
      r.params.seed = seed;
      reports.push_back(std::move(r));
    }
  };
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const std::uint64_t seed = opt.seed + t;
    auto rng = seeded_rng(seed);
    if (opt.ineq == "eq1") {
      const std::size_t N = opt.N ? opt.N : 64;
      const std::uint64_t p = 2 + uniform_index(rng, 15);
      auto f2 = random_cyclic(rng, p, N);
      auto f3 = random_cyclic(rng, p, 2 * N - 1);
      stamp({check_eq1(f2, f3, N, opt.L)}, seed);
    } else if (opt.ineq == "eq2") {
      const std::size_t N = opt.N ? opt.N : 4096;
      const std::size_t H = opt.H ? opt.H : default_h(N);
      auto f = orbit(SystemSpec::bernoulli(seed, 2), Observable::symbol_fn({-1.0, 1.0}),
                     {0.0, 0.0}, N + H);
      const auto k2 = seminorm_recursive(f, 2, N, H);
      stamp(check_eq2(f, {N / 4, N / 2, N}, k2, opt.L), seed);
    } else if (opt.ineq == "eq3") {
      const std::size_t N = opt.N ? opt.N : 32;
      std::vector<OrbitSample> fs;
      for (int j = 0; j < 7; ++j) fs.push_back(random_cyclic(rng, 8, 3 * (N - 1) + 1));
      stamp({check_eq3(CubeSpec(3, N, fs), opt.L, opt.threads)}, seed);
    } else if (opt.ineq == "eq4") {
      const std::size_t N = opt.N ? opt.N : 512;
      const std::size_t H = opt.H ? opt.H : default_h(N);
      auto f = orbit(SystemSpec::bernoulli(seed, 2), Observable::symbol_fn({-1.0, 1.0}),
                     {0.0, 0.0}, 2 * N + 2 * H);
      stamp(check_eq4(f, f, {N}, H, opt.L, opt.threads), seed);
    } else if (opt.ineq == "eq5") {
      const std::size_t N = opt.N ? opt.N : 16;
      const int k = 2 + static_cast<int>(t % 2);
      std::vector<OrbitSample> fs;
      const std::size_t count = (std::size_t{1} << k) - 1;
      for (std::size_t j = 0; j < count; ++j) {
        fs.push_back(random_cyclic(rng, 8, static_cast<std::size_t>(k) * (N - 1) + 1));
      }
      stamp({check_eq5(CubeSpec(k, N, fs), opt.threads)}, seed);
    } else if (opt.ineq == "induction") {
      const std::size_t N = opt.N ? opt.N : 64;
      const std::size_t H = opt.H ? opt.H : 8;
      const int k = opt.k == 4 ? 4 : 3;
      const std::size_t need =
          std::max(static_cast<std::size_t>(k - 1) * (N - 1) + 1,
                   N + static_cast<std::size_t>(k - 2) * H);
      std::vector<OrbitSample> group;
      for (std::size_t j = 0; j < (std::size_t{1} << (k - 2)); ++j) {
        group.push_back(random_cyclic(rng, 8, need));
      }
      stamp(check_induction(k, group, N, H, opt.L, opt.threads), seed);
    } else if (opt.ineq == "vdc") {
      const std::size_t N = opt.N ? opt.N : 64;
      const std::size_t H = opt.H ? opt.H : 8;
      std::vector<std::complex<double>> u(N + H);
      for (auto& z : u) {
        const double theta = kTwoPi * uniform_unit(rng);
        z = {std::cos(theta), std::sin(theta)};
      }
      stamp({van_der_corput_check(std::span<const std::complex<double>>(u), N, H)}, seed);
    } else if (opt.ineq == "powermean") {
      const std::size_t N = opt.N ? opt.N : 16;
      std::vector<double> u(N);
      for (auto& v : u) v = 10.0 * uniform_unit(rng);
      const double exponents[] = {1.0, 2.0, 4.0, 8.0};
      std::size_t a = uniform_index(rng, 4);
      std::size_t b = uniform_index(rng, 4);
      if (a > b) std::swap(a, b);
      stamp({power_mean_step(u, exponents[a], exponents[b])}, seed);
    } else {
      throw CLI::ValidationError("--ineq",
                                 "unknown inequality '" + opt.ineq +
                                     "' (eq1|eq2|eq3|eq4|eq5|induction|vdc|powermean)");
    }
  }
  return reports;
}

void print_report_summary(const std::vector<InequalityReport>& reports) {
  for (const auto& r : reports) {
    std::cout << r.tag << " lhs=" << to_shortest_string(r.lhs)
              << " rhs=" << to_shortest_string(r.rhs)
              << " ratio=" << to_shortest_string(r.ratio)
              << (r.rigorous ? " rigorous" : " reported") << (r.holds ? " pass" : " fail")
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cube-average laboratory"};
  app.require_subcommand(1);
  // global flags may follow the subcommand
  app.fallthrough();

  std::string config_path;
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  app.add_option("--config", config_path, "experiment config file")->configurable(false);
  app.add_option("--out", out, "output path (CSV); default standard output");
  app.add_option("--seed", seed, "base seed for generated corpora");
  app.add_option("--threads", threads, "parallelism hint (results do not depend on it)")
      ->check(CLI::Range(1u, 256u));

  auto* orbit_cmd = app.add_subcommand("orbit", "emit an orbit of the configured system");
  std::size_t orbit_n = 0;
  std::size_t orbit_index = 1;
  orbit_cmd->add_option("--N", orbit_n, "orbit length (default: largest window)");
  orbit_cmd->add_option("--function", orbit_index, "cube position, 1-based");

  auto* average_cmd = app.add_subcommand("average", "one cube average");
  int average_k = 0;
  std::size_t average_n = 0;
  std::string average_method = "fast";
  average_cmd->add_option("--k", average_k, "cube dimension (default: from config)");
  average_cmd->add_option("--N", average_n, "window size (default: largest scheduled)");
  average_cmd->add_option("--method", average_method, "naive|fast")
      ->check(CLI::IsMember({"naive", "fast"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "convergence sweep from a config file");

  auto* seminorm_cmd = app.add_subcommand("seminorm", "seminorm estimate of f_1");
  int seminorm_level = 2;
  std::size_t seminorm_n = 0;
  std::size_t seminorm_h = 0;
  std::string seminorm_method = "recursive";
  seminorm_cmd->add_option("--k", seminorm_level, "seminorm level");
  seminorm_cmd->add_option("--N", seminorm_n, "window size (default: largest scheduled)");
  seminorm_cmd->add_option("--H", seminorm_h, "shift count (default: floor(sqrt(N)))");
  seminorm_cmd->add_option("--method", seminorm_method, "recursive|box|fourier")
      ->check(CLI::IsMember({"recursive", "box", "fourier"}));

  auto* wwmax_cmd = app.add_subcommand("wwmax", "maximal twisted average of f_1");
  std::size_t wwmax_n = 0;
  std::size_t wwmax_l = 8;
  wwmax_cmd->add_option("--N", wwmax_n, "window size (default: largest scheduled)");
  wwmax_cmd->add_option("--L", wwmax_l, "frequency oversampling factor");

  auto* verify_cmd = app.add_subcommand("verify", "inequality verification on seeded corpora");
  VerifyOpts vopt;
  verify_cmd->add_option("--ineq", vopt.ineq, "eq1|eq2|eq3|eq4|eq5|induction|vdc|powermean")
      ->required();
  verify_cmd->add_option("--trials", vopt.trials, "number of seeded trials")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--N", vopt.N, "window size override");
  verify_cmd->add_option("--H", vopt.H, "shift count override");
  verify_cmd->add_option("--L", vopt.L, "oversampling factor");
  verify_cmd->add_option("--k", vopt.k, "group dimension (induction: 3 or 4)");

  auto* report_cmd = app.add_subcommand("report", "aggregate CSV files");
  std::vector<std::string> report_files;
  report_cmd->add_option("files", report_files, "CSV files to merge")->expected(-1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*orbit_cmd) {
      const auto cfg = load_config(config_path);
      const std::size_t length =
          orbit_n ? orbit_n
                  : static_cast<std::size_t>(cfg.k) * (cfg.schedule.back() - 1) + 1;
      const auto fs = instance_orbits(cfg, length);
      if (orbit_index < 1 || orbit_index > fs.size()) {
        throw std::runtime_error("--function out of range");
      }
      std::string text;
      for (double v : fs[orbit_index - 1].values) {
        text += to_shortest_string(v);
        text += '\n';
      }
      write_output(out, text);
      return 0;
    }

    if (*average_cmd) {
      auto cfg = load_config(config_path);
      if (average_k != 0) cfg.k = average_k;
      const std::size_t N = average_n ? average_n : cfg.schedule.back();
      const auto fs = instance_orbits(cfg, static_cast<std::size_t>(cfg.k) * (N - 1) + 1);
      const CubeSpec spec(cfg.k, N, fs);
      const auto result = average_method == "naive" ? cube_average_naive(spec)
                                                    : cube_average_fast(spec, threads);
      std::cout << to_shortest_string(result.value) << "\n";
      return 0;
    }

    if (*sweep_cmd) {
      auto cfg = load_config(config_path);
      const auto traces = convergence_sweep(cfg, threads);
      std::string csv = csv_header() + "\n";
      for (const auto& t : traces) append_trace_rows(csv, t);
      for (const auto& t : traces) {
        std::cout << t.id << " [" << t.system_desc << "] final="
                  << to_shortest_string(t.points.back().value);
        if (t.oracle_limit) {
          std::cout << " oracle=" << to_shortest_string(*t.oracle_limit)
                    << " gap=" << to_shortest_string(*t.final_gap);
        }
        std::cout << "\n";
      }
      write_output(!out.empty() ? out : cfg.out, csv);
      return 0;
    }

    if (*seminorm_cmd) {
      const auto cfg = load_config(config_path);
      const std::size_t N = seminorm_n ? seminorm_n : cfg.schedule.back();
      const std::size_t H = seminorm_h ? seminorm_h : default_h(N);
      SeminormEstimate est;
      if (seminorm_method == "recursive") {
        const std::size_t length = N + static_cast<std::size_t>(std::max(0, seminorm_level - 1)) * H;
        const auto fs = instance_orbits(cfg, length);
        est = seminorm_recursive(fs.front(), seminorm_level, N, H);
      } else {
        if (cfg.system.kind != SystemKind::Cyclic) {
          throw std::runtime_error("seminorm --method box|fourier needs a cyclic system");
        }
        const auto obs = expanded_observables(cfg);
        est = seminorm_method == "box" ? box_norm_cyclic(obs.front().values(), seminorm_level)
                                       : u2_fourier(obs.front().values());
      }
      std::cout << to_shortest_string(est.value) << "\n";
      return 0;
    }

    if (*wwmax_cmd) {
      const auto cfg = load_config(config_path);
      const std::size_t N = wwmax_n ? wwmax_n : cfg.schedule.back();
      const auto fs = instance_orbits(cfg, N);
      const auto bound = ww_max(std::span<const double>(fs.front().values).first(N), wwmax_l);
      std::cout << "grid_max=" << to_shortest_string(bound.grid_max)
                << " certified_upper=" << to_shortest_string(bound.certified_upper) << "\n";
      return 0;
    }

    if (*verify_cmd) {
      vopt.seed = seed;
      vopt.threads = threads;
      const auto reports = run_verify(vopt);
      std::string csv = csv_header() + "\n";
      for (const auto& r : reports) append_report_row(csv, r);
      print_report_summary(reports);
      write_output(out, csv);
      return 0;  // a rigorous violation would have thrown logic_error
    }

    if (*report_cmd) {
      if (report_files.empty()) throw std::runtime_error("report: no input files");
      std::string merged = csv_header() + "\n";
      std::size_t rows = 0;
      std::size_t rigorous_failures = 0;
      for (const auto& path : report_files) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open '" + path + "'");
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          if (first) {
            first = false;
            if (line != csv_header()) {
              throw std::runtime_error("'" + path + "': unexpected CSV header");
            }
            continue;
          }
          merged += line;
          merged += '\n';
          ++rows;
          std::vector<std::string> cols;
          std::size_t start = 0;
          while (true) {
            const std::size_t comma = line.find(',', start);
            cols.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
          }
          if (cols.size() == 12 && cols[10] == "true" && cols[11] == "false") {
            ++rigorous_failures;
          }
        }
      }
      std::cout << "rows=" << rows << " rigorous_failures=" << rigorous_failures << "\n";
      write_output(out, merged);
      return rigorous_failures == 0 ? 0 : 1;
    }
  } catch (const std::logic_error& e) {
    std::cerr << "FAIL: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
