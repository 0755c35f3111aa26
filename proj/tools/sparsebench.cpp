#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparse/bench.hpp"
#include "sparse/denoise.hpp"
#include "sparse/error.hpp"

using namespace sparse;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Flat `key = value` file turned into `--key value` arguments placed right after
// the subcommand, so flags given on the command line (parsed later) win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + long(i));
      break;
    }
  }
  if (file.empty()) return args;
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file);
  std::vector<std::string> extra;
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    extra.push_back("--" + item.name);
    for (const auto& v : item.inputs) extra.push_back(v);
  }
  std::size_t at = 0;
  while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;  // after the subcommand name
  args.insert(args.begin() + long(std::min(at + 1, args.size())), extra.begin(), extra.end());
  return args;
}

std::string sibling(const std::string& out, const std::string& suffix) {
  const auto dot = out.rfind('.');
  const auto slash = out.find_last_of('/');
  const std::string stem = dot != std::string::npos && (slash == std::string::npos || dot > slash) ? out.substr(0, dot) : out;
  return stem + suffix;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

struct Common {
  BenchConfig cfg;
  std::string solvers = "omp,fista,dalm,lasso-homotopy,tptsr";
  std::string lambdas;
  std::string resize;

  void add(CLI::App* sub) {
    sub->add_option("--dataset", cfg.dataset, "folder with data.csv+labels.csv or class subfolders of PGM images")
        ->required();
    sub->add_option("--solvers", solvers, "comma-separated solver names");
    sub->add_option("--lambdas", lambdas, "grid, e.g. 1e-4:1:10log or 0.01,0.1");
    sub->add_option("--train-per-class", cfg.train_per_class);
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--pca-energy", cfg.pca_energy);
    sub->add_option("--out", cfg.output)->required();
    sub->add_option("--resize", resize, "HxW applied to PGM images, e.g. 56x46");
    sub->add_option("--tptsr-keep", cfg.tptsr_keep, "TPTSR phase-1 keep count (0 = default)");
    sub->add_option("--max-iterations", cfg.solver.max_iterations);
    sub->add_option("--tolerance", cfg.solver.tolerance);
  }

  void finish() {
    cfg.solvers.clear();
    std::string cur;
    for (char c : solvers + ",") {
      if (c == ',') {
        if (!cur.empty()) cfg.solvers.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur += c;
      }
    }
    if (!lambdas.empty()) cfg.lambdas = parse_lambda_grid(lambdas);
    if (!resize.empty()) {
      const auto x = resize.find('x');
      try {
        if (x == std::string::npos) throw std::invalid_argument(resize);
        cfg.resize_height = std::stol(resize.substr(0, x));
        cfg.resize_width = std::stol(resize.substr(x + 1));
      } catch (const std::exception&) {
        throw ConfigError("--resize expects HxW, got '" + resize + "'");
      }
    }
    cfg.validate();
  }
};

int cmd_run(Common& c) {
  c.finish();
  const BenchResult r = run_benchmark(c.cfg);
  {
    auto f = open_out(c.cfg.output);
    write_trials_csv(f, r);
  }
  {
    auto f = open_out(sibling(c.cfg.output, ".summary.csv"));
    write_summary_csv(f, r);
  }
  {
    auto f = open_out(sibling(c.cfg.output, ".timing.csv"));
    write_timing_csv(f, r);
  }
  std::printf("%-22s %8s %8s %16s\n", "solver", "mean%", "std%", "s/test sample");
  for (const auto& s : r.summary)
    std::printf("%-22s %8.2f %8.2f %16.6f\n", s.solver.c_str(), 100 * s.mean, 100 * s.stddev, s.mean_seconds);
  return 0;
}

int cmd_sweep(Common& c) {
  c.finish();
  const auto rows = sweep_lambda(c.cfg);
  auto f = open_out(c.cfg.output);
  write_sweep_csv(f, rows);
  return 0;
}

struct DenoiseArgs {
  std::string in, out, reference;
  DenoiseOptions opt;
};

int cmd_denoise(const DenoiseArgs& a) {
  const GrayImage noisy = read_pgm(a.in);
  DenoiseReport rep;
  try {
    rep = denoise_image(noisy, a.opt);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  write_pgm(a.out, rep.image);
  if (!a.reference.empty()) {
    const GrayImage ref = read_pgm(a.reference);
    std::printf("PSNR input %.2f dB, output %.2f dB\n", psnr(noisy, ref), psnr(rep.image, ref));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse representation benchmark"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all");

  Common run_args, sweep_args;
  auto* run = app.add_subcommand("run", "repeated random splits, accuracy and timing per solver");
  run_args.add(run);
  run->add_option("--trials", run_args.cfg.trials);
  auto* sweep = app.add_subcommand("sweep", "accuracy versus lambda on one split");
  sweep_args.add(sweep);

  DenoiseArgs dn;
  auto* den = app.add_subcommand("denoise", "K-SVD patch denoising of a P5 image");
  den->add_option("--in", dn.in)->required();
  den->add_option("--out", dn.out)->required();
  den->add_option("--sigma", dn.opt.sigma)->required();
  den->add_option("--patch", dn.opt.patch);
  den->add_option("--stride", dn.opt.stride);
  den->add_option("--atoms", dn.opt.atoms);
  den->add_option("--sweeps", dn.opt.sweeps);
  den->add_option("--gain", dn.opt.gain);
  den->add_option("--delta", dn.opt.delta, "fidelity weight (default 30/sigma)");
  den->add_option("--reference", dn.reference, "clean image for PSNR");
  for (auto* s : {run, sweep, den})
    s->add_option("--config", "flat key = value file; flags override it");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    if (run->parsed()) return cmd_run(run_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    return cmd_denoise(dn);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
