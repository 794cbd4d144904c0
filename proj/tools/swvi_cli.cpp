#include "swvi/pipeline.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <iostream>

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
};

swvi::Pipeline make_pipeline(const Globals& g) {
  swvi::ExperimentConfig cfg = swvi::load_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  const std::string out = g.out_dir.empty() ? "out/" + cfg.name : g.out_dir;
  return swvi::Pipeline(std::move(cfg), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-wise variational inference with neural net kernels"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--out-dir", g.out_dir, "output directory (default out/<name>)");
  app.add_option("--threads", g.threads, "OpenMP threads (0 keeps the default)")->check(CLI::NonNegativeNumber);

  std::string baseline_kind;
  auto* generate = app.add_subcommand("generate", "synthesize the dataset");
  auto* invert = app.add_subcommand("invert", "invert every observation");
  auto* permute = app.add_subcommand("permute", "scale and pair prior samples");
  auto* train = app.add_subcommand("train", "train the kernel network");
  auto* predict = app.add_subcommand("predict", "uniform and augmented test predictions");
  auto* baseline = app.add_subcommand("baseline", "run a comparison method");
  baseline->add_option("method", baseline_kind, "map, mh or hmc")
      ->required()
      ->check(CLI::IsMember({"map", "mh", "hmc"}));
  auto* sigma = app.add_subcommand("sigma", "optimize the mixture bandwidth");
  auto* report = app.add_subcommand("report", "compute metrics.json from existing outputs");
  auto* run = app.add_subcommand("run", "full pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

#ifdef _OPENMP
  if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

  try {
    swvi::Pipeline p = make_pipeline(g);
    if (*generate) p.generate();
    if (*invert) p.invert();
    if (*permute) p.permute();
    if (*train) p.train();
    if (*predict) p.predict();
    if (*baseline) {
      if (baseline_kind == "map") p.baseline_map();
      if (baseline_kind == "mh") p.baseline_mh();
      if (baseline_kind == "hmc") p.baseline_hmc();
    }
    if (*sigma) p.sigma();
    if (*report) std::cout << p.report().dump(2) << '\n';
    if (*run) {
      p.run();
      std::cout << "wrote " << p.out_dir().string() << '\n';
    }
  } catch (const swvi::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
