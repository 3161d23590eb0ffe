#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "dppsgd/experiments.hpp"
#include "dppsgd/version.hpp"

namespace dppsgd {

namespace {

ExperimentConfig load_config(const std::string& path, std::uint64_t seed, bool seed_set,
                             const std::string& out, const std::string& format,
                             int threads) {
  ExperimentConfig cfg;
  cfg.raw = KeyValueConfig::parse_file(path);
  cfg.seed = seed_set ? seed : static_cast<std::uint64_t>(cfg.raw.get_long("seed", 0));
  cfg.out = !out.empty() ? out : cfg.raw.get_or("out", "-");
  cfg.format = !format.empty() ? format : cfg.raw.get_or("format", "csv");
  cfg.threads = threads > 0 ? threads : static_cast<int>(cfg.raw.get_long("threads", 0));
  if (cfg.format != "csv" && cfg.format != "json") {
    throw std::runtime_error("format must be csv or json");
  }
  return cfg;
}

// Writes to the --out path, or stdout for "-".
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void warn_unread(const ExperimentConfig& cfg) {
  for (const std::string& key : cfg.raw.unread_keys()) {
    if (key == "seed" || key == "out" || key == "format" || key == "threads") continue;
    std::cerr << "warning: unused config key '" << key << "'\n";
  }
}

int run_variance_study(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const VarianceReport report = variance_study(cfg);
  OutputSink sink(cfg.out);
  write_variance_report(report, cfg, sink.stream());
  warn_unread(cfg);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cerr << "variance-study done in " << dt.count() << " s\n";
  return 0;
}

int run_sgd_study(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const CurveReport report = convergence_study(cfg);
  OutputSink sink(cfg.out);
  write_curve_report(report, cfg, sink.stream());
  warn_unread(cfg);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cerr << "sgd-run done in " << dt.count() << " s\n";
  return 0;
}

int run_kernel_build(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentData data = build_dataset(cfg);
  const int p = static_cast<int>(cfg.raw.get_long("p", 10));
  const double h = resolve_bandwidth(cfg.raw.get_or("bandwidth", "silverman"), data.train);
  const KernelPipeline pipe = build_kernel_pipeline(data.train, p, h);
  if (cfg.out == "-") throw std::runtime_error("kernel-build needs --out <path>");
  save_projection_kernel(pipe.pk, cfg.out);
  warn_unread(cfg);
  // Measured deviation of the pre-saturation operator from the projection.
  double dev = 0.0;
  for (int k = 0; k < p && k < pipe.pk.input_spectrum.size(); ++k) {
    dev = std::max(dev, std::abs(pipe.pk.input_spectrum[k] - 1.0));
  }
  std::cout << "kernel-build: N=" << pipe.pk.n() << " p=" << pipe.pk.rank()
            << " bandwidth=" << pipe.bandwidth << " max|lambda_k-1|=" << dev
            << (pipe.pk.degenerate_tie ? " (degenerate eigengap)" : "") << "\n";
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cerr << "kernel-build done in " << dt.count() << " s\n";
  return 0;
}

int run_sample(const std::string& kernel_path, int draws, std::uint64_t seed,
               const std::string& out) {
  const ProjectionKernel pk = load_projection_kernel(kernel_path);
  OutputSink sink(out.empty() ? "-" : out);
  Rng rng(seed);
  for (int k = 0; k < draws; ++k) {
    const Minibatch batch = sample_projection_dpp(pk, rng);
    for (std::size_t i = 0; i < batch.items.size(); ++i) {
      sink.stream() << batch.items[i] << (i + 1 == batch.items.size() ? "\n" : " ");
    }
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"DPP minibatch sampling for SGD via orthogonal polynomial ensembles"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out, format, kernel_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int draws = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "key=value config file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--out", out, "output path ('-' for stdout)");
    cmd->add_option("--format", format, "csv or json");
    cmd->add_option("--threads", threads, "worker threads (0: all cores)");
  };

  CLI::App* variance = app.add_subcommand("variance-study",
                                          "variance of gradient estimators at the optimum");
  add_common(variance, true);
  CLI::App* sgd = app.add_subcommand("sgd-run", "replicated SGD convergence curves");
  add_common(sgd, true);
  CLI::App* build = app.add_subcommand("kernel-build",
                                       "preprocess and persist a projection kernel");
  add_common(build, true);
  CLI::App* sample = app.add_subcommand("sample", "draw minibatches from a saved kernel");
  sample->add_option("--kernel", kernel_path, "projection kernel artifact")->required();
  sample->add_option("--draws", draws, "number of minibatches to print");
  sample->add_option("--seed", seed, "sampling seed");
  sample->add_option("--out", out, "output path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (variance->parsed()) {
      return run_variance_study(load_config(config_path, seed, seed_set, out, format, threads));
    }
    if (sgd->parsed()) {
      return run_sgd_study(load_config(config_path, seed, seed_set, out, format, threads));
    }
    if (build->parsed()) {
      return run_kernel_build(load_config(config_path, seed, seed_set, out, format, threads));
    }
    if (sample->parsed()) {
      return run_sample(kernel_path, draws, seed, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace dppsgd
