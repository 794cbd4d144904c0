#include "swvi/pipeline.hpp"

#include "swvi/io.hpp"
#include "swvi/map_estimate.hpp"
#include "swvi/mcmc.hpp"
#include "swvi/permutation.hpp"
#include "swvi/sigma.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace swvi {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {
      "generate", "invert", "permute", "init", "predict", "map",      "mh",
      "hmc",      "sigma",  "noise",   "analytic", "reference", "reference_latent"};
  return names;
}

json history_json(const TrainingResult& r) {
  json j;
  j["final_residual"] = r.final_residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["seconds"] = r.seconds;
  return j;
}

json training_summary(const TrainingResult& r, const TrainingOptions& o, Index n_residuals) {
  json j = history_json(r);
  j["trainer"] = to_string(o.trainer);
  j["learning_rate"] = o.learning_rate;
  j["max_iter"] = o.max_iter;
  j["rms_residual"] = r.final_residual / std::sqrt(static_cast<double>(n_residuals));
  return j;
}

void write_history(const fs::path& p, const TrainingResult& r) {
  Matrix h(static_cast<Index>(r.history.size()), 2);
  for (Index i = 0; i < h.rows(); ++i) {
    h(i, 0) = static_cast<double>(i);
    h(i, 1) = r.history[static_cast<std::size_t>(i)];
  }
  write_csv(p, h, {"iteration", "residual_norm"});
}

json convergence_json(const ConvergenceReport& r) {
  json j;
  j["total"] = r.total;
  j["converged"] = r.converged;
  j["not_converged"] = r.not_converged;
  j["residual_min"] = r.residual_min;
  j["residual_median"] = r.residual_median;
  j["residual_p90"] = r.residual_p90;
  j["residual_max"] = r.residual_max;
  j["mean_iterations"] = r.mean_iterations;
  return j;
}

json inversion_json(const DatasetInversion& inv) {
  json j = convergence_json(inv.report);
  std::vector<double> res;
  std::vector<int> iters;
  std::vector<bool> conv;
  for (const auto& r : inv.results) {
    res.push_back(r.residual_norm);
    iters.push_back(r.iterations);
    conv.push_back(r.converged);
  }
  j["per_sample"] = {{"residual_norm", res}, {"iterations", iters}, {"converged", conv}};
  return j;
}

SampleMatrix trace_after(const ChainState& c, Index burn_in) {
  const Index keep = std::max<Index>(c.trace.rows() - burn_in, 0);
  return c.trace.bottomRows(keep);
}

Vector matrix_row(const Matrix& m, Index i) { return m.row(i).transpose(); }

// Output statistics of `samples` pushed through the model at x, against a
// precomputed reference push-forward.
json output_errors(const ForwardModel& model, const Vector& x, const SampleMatrix& samples,
                   const SampleMatrix& reference, bool per_output) {
  const SampleMatrix out = push_forward(model, x, samples);
  json j;
  j["n_pushed"] = out.rows();
  j["n_failed"] = samples.rows() - out.rows();
  if (out.rows() < 2) {
    j["error"] = "too few successful evaluations";
    return j;
  }
  if (per_output) {
    j.update(to_json(moment_errors(out, reference)));
    j["mean"] = vector_to_json(sample_mean(out));
    j["std"] = vector_to_json(sample_std(out));
  } else {
    j["e_mean_field"] = normalized_error(sample_mean(out), sample_mean(reference));
    j["e_std_field"] = normalized_error(sample_std(out), sample_std(reference));
  }
  return j;
}

KernelNetwork make_network(const ExperimentConfig& cfg, const SampleMatrix& inputs,
                           const Box& box, Rng& rng) {
  const std::vector<int> layers = resolved_layers(cfg);
  const Index d = box.lower.size();
  if (cfg.nnk.anchors == AnchorPlacement::Box)
    return init_network(layers, cfg.nnk.n_anchors, d, box, rng);
  SampleMatrix anchors = pick_anchor_rows(inputs, cfg.nnk.n_anchors, rng);
  Vector scale = box.range();
  for (Index j = 0; j < d; ++j)
    if (!(scale(j) > 0.0)) scale(j) = 1.0;
  return init_network(layers, std::move(anchors), d, scale, rng);
}

std::vector<Vector> mode_centers(const TruthSampler& truth) {
  if (truth.is_analytic()) return {};
  return truth.mixture().means();
}

}  // namespace

std::uint64_t stage_seed(std::uint64_t base, const std::string& stage) {
  const auto& names = stage_names();
  const auto it = std::find(names.begin(), names.end(), stage);
  if (it == names.end()) throw Error("unknown stage '" + stage + "'");
  return derive_seed(base, static_cast<std::uint64_t>(it - names.begin()) + 1000);
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

MomentReport moment_errors_exact(const SampleMatrix& samples, const Vector& mean,
                                 const Vector& stddev) {
  require_dims(samples.cols() == mean.size() && mean.size() == stddev.size(),
               "reference moments do not match sample columns");
  require_dims(samples.rows() >= 2, "need at least two samples");
  const Vector mu = sample_mean(samples);
  const Vector sd = sample_std(samples);
  MomentReport r;
  r.n_samples = samples.rows();
  r.n_reference = 0;
  r.e_mu.resize(mean.size());
  r.e_sigma.resize(mean.size());
  for (Index j = 0; j < mean.size(); ++j) {
    const double dm = std::abs(mu(j) - mean(j));
    const double ds = std::abs(sd(j) - stddev(j));
    r.mu_flagged.push_back(mean(j) == 0.0);
    r.sigma_flagged.push_back(stddev(j) == 0.0);
    r.e_mu(j) = mean(j) == 0.0 ? dm : dm / std::abs(mean(j));
    r.e_sigma(j) = stddev(j) == 0.0 ? ds : ds / std::abs(stddev(j));
  }
  return r;
}

json to_json(const MomentReport& r) {
  json j;
  j["e_mu"] = vector_to_json(r.e_mu);
  j["e_sigma"] = vector_to_json(r.e_sigma);
  j["mu_flagged"] = r.mu_flagged;
  j["sigma_flagged"] = r.sigma_flagged;
  j["n_samples"] = r.n_samples;
  j["n_reference"] = r.n_reference;
  return j;
}

Pipeline::Pipeline(ExperimentConfig cfg, fs::path out_dir)
    : cfg_(std::move(cfg)), out_(std::move(out_dir)), model_(make_model(cfg_)),
      truth_(cfg_.truth) {
  fs::create_directories(out_);
}

Dataset Pipeline::load_dataset() const {
  const CsvTable t = read_csv(path("data.csv"));
  const Index l = model_->input_dim();
  const Index n = model_->output_dim();
  if (t.data.cols() != l + n)
    throw ValidationError("data.csv: expected " + std::to_string(l + n) + " columns");
  Dataset d;
  d.inputs = t.data.leftCols(l);
  d.observations = t.data.rightCols(n);
  return d;
}

SampleMatrix Pipeline::load_samples(const std::string& name) const {
  return read_csv(path(name)).data;
}

SampleMatrix Pipeline::truth_reference(Index n, const std::string& stream) const {
  Rng rng(seed(stream));
  return truth_.sample(n, rng);
}

Vector Pipeline::eval_input(Index k) const {
  if (cfg_.model.type == ModelType::Spring) return cfg_.evaluation.x_eval.at(k);
  return matrix_row(load_dataset().inputs, 0);
}

void Pipeline::generate() {
  if (truth_.is_analytic())
    throw ValidationError("truth.kind: analytic experiments run through the 'analytic' stage");
  Rng rng(seed("generate"));
  SyntheticData sd;
  if (cfg_.model.type == ModelType::Spring) {
    const Matrix inputs = spring_inputs(cfg_.data.n_data, cfg_.data.delta_x, rng, cfg_.data.center);
    sd = generate_dataset(*model_, truth_, inputs, rng);
  } else {
    const auto& fem = static_cast<const FemModel&>(*model_);
    const DesignConfig& g = cfg_.data.design;
    const auto base =
        synthetic_design_fields(fem.problem().mesh, g.n_fields, rng, g.volume_fraction, g.n_bumps);
    const Matrix inputs = generate_design_inputs(base, g.n_keep, g.n_noise_per, rng, g.jitter);
    sd = generate_dataset(*model_, truth_, inputs, rng);
  }
  Matrix both(sd.data.size(), sd.data.inputs.cols() + sd.data.observations.cols());
  both << sd.data.inputs, sd.data.observations;
  auto header = column_names("x", sd.data.inputs.cols());
  const auto yh = column_names("y", sd.data.observations.cols());
  header.insert(header.end(), yh.begin(), yh.end());
  write_csv(path("data.csv"), both, header);
  write_csv(path("latent_true.csv"), sd.latent, column_names("m", sd.latent.cols()));
}

void Pipeline::invert() {
  const Dataset data = load_dataset();
  const DatasetInversion inv =
      invert_dataset(*model_, data, cfg_.inversion.options, seed("invert"));
  SampleMatrix kept = inv.samples;
  if (!cfg_.inversion.keep_unconverged) {
    if (inv.report.converged < 2) throw Error("fewer than two inversions converged");
    kept.resize(inv.report.converged, inv.samples.cols());
    Index r = 0;
    for (std::size_t i = 0; i < inv.results.size(); ++i)
      if (inv.results[i].converged) kept.row(r++) = inv.samples.row(static_cast<Index>(i));
  }
  write_csv(path("m_opt.csv"), kept, column_names("m", kept.cols()));
  json j = inversion_json(inv);
  j["rows_kept"] = kept.rows();
  write_json(path("inversion.json"), j);
}

void Pipeline::permute() {
  const SampleMatrix m_opt = load_samples("m_opt.csv");
  Rng rng(seed("permute"));
  const SampleMatrix m0 = uniform_unit(rng, m_opt.rows(), m_opt.cols());
  const auto names = column_names("m", m_opt.cols());
  write_csv(path("prior_unit.csv"), m0, names);
  if (cfg_.permutation.enabled) {
    const PermutationOutput p = swvi::permute(m0, m_opt);
    write_csv(path("m_tilde.csv"), p.m_tilde, names);
    write_pairing_csv(p.pairing, path("pairing.csv"));
  } else {
    std::vector<Index> identity(static_cast<std::size_t>(m_opt.rows()));
    std::iota(identity.begin(), identity.end(), Index{0});
    write_csv(path("m_tilde.csv"), scale_prior(m0, m_opt), names);
    write_pairing_csv(identity, path("pairing.csv"));
  }
  if (cfg_.permutation.ablation)
    write_csv(path("m_unpermuted.csv"), scale_prior(m0, m_opt), names);
}

void Pipeline::train() {
  const SampleMatrix m_opt = load_samples("m_opt.csv");
  const SampleMatrix m_tilde = load_samples("m_tilde.csv");
  Rng rng(seed("init"));
  const KernelNetwork base = make_network(cfg_, m_tilde, bounding_box(m_opt), rng);
  json summary;
  KernelNetwork net = base;
  const TrainingResult r = swvi::train(net, m_tilde, m_opt, cfg_.nnk.training);
  save_network(net, &r, path("nnk.json"));
  write_history(path("training_history.csv"), r);
  summary["permuted"] = training_summary(r, cfg_.nnk.training, m_opt.size());
  if (cfg_.permutation.ablation) {
    KernelNetwork plain = base;
    const TrainingResult ru =
        swvi::train(plain, load_samples("m_unpermuted.csv"), m_opt, cfg_.nnk.training);
    save_network(plain, &ru, path("nnk_unpermuted.json"));
    write_history(path("training_history_unpermuted.csv"), ru);
    summary["unpermuted"] = training_summary(ru, cfg_.nnk.training, m_opt.size());
  }
  write_json(path("training.json"), summary);
}

void Pipeline::predict() {
  const SampleMatrix m_opt = load_samples("m_opt.csv");
  const SampleMatrix m_tilde = load_samples("m_tilde.csv");
  const KernelNetwork net = load_network(path("nnk.json"));
  const auto names = column_names("m", m_opt.cols());
  Rng rng(seed("predict"));
  const SampleMatrix test_in =
      scale_to_box(uniform_unit(rng, cfg_.predict.n_test, m_opt.cols()), bounding_box(m_opt));
  const SampleMatrix aug_in =
      augment_prior(m_tilde, cfg_.predict.augment_per, cfg_.predict.augment_sigma, rng);
  write_csv(path("test_prior_uniform.csv"), test_in, names);
  write_csv(path("test_prior_augmented.csv"), aug_in, names);
  write_csv(path("train_prediction.csv"), swvi::predict(net, m_tilde), names);
  write_csv(path("test_uniform.csv"), swvi::predict(net, test_in), names);
  write_csv(path("test_augmented.csv"), swvi::predict(net, aug_in), names);
  if (fs::exists(path("nnk_unpermuted.json"))) {
    const KernelNetwork plain = load_network(path("nnk_unpermuted.json"));
    write_csv(path("test_uniform_unpermuted.csv"), swvi::predict(plain, test_in), names);
  }
}

void Pipeline::baseline_map() {
  const MapConfig& mc = cfg_.baselines.map;
  const Dataset data = load_dataset();
  const Index d = model_->latent_dim();
  const Index n = model_->output_dim();
  const SampleMatrix starts = gaussian_coverage_points(d, mc.n_dq) * std::sqrt(mc.prior_scale);
  const MapMixture mix =
      map_posterior_mixture(*model_, data, starts, mc.noise_scale * Matrix::Identity(n, n),
                            mc.prior_scale * Matrix::Identity(d, d), mc.bfgs);
  Rng rng(seed("map"));
  const SampleMatrix samples = mix.mixture.sample(mc.n_samples, rng, Allocation::Iid);
  const auto names = column_names("m", d);
  write_csv(path("map_starts.csv"), starts, names);
  write_csv(path("map_samples.csv"), samples, names);
  Matrix points(static_cast<Index>(mix.mixture.size()), d);
  for (Index i = 0; i < points.rows(); ++i) points.row(i) = mix.mixture.means()[i].transpose();
  write_csv(path("map_points.csv"), points, names);
  json j;
  j["n_starts"] = starts.rows();
  j["n_kept"] = points.rows();
  json per = json::array();
  for (std::size_t i = 0; i < mix.starts.size(); ++i) {
    const MapResult& r = mix.starts[i];
    json s;
    s["kept"] = static_cast<bool>(mix.kept[i]);
    if (mix.kept[i]) {
      s["m_map"] = vector_to_json(r.m_map);
      s["sigma1"] = matrix_to_json(r.sigma1);
      s["fallback"] = r.fallback;
      s["converged"] = r.converged;
      s["iterations"] = r.iterations;
      s["objective"] = r.objective;
    }
    per.push_back(s);
  }
  j["starts"] = per;
  write_json(path("map.json"), j);
}

void Pipeline::baseline_mh() {
  const MhConfig& mc = cfg_.baselines.mh;
  const Index d = model_->latent_dim();
  LogDensity target;
  if (mc.likelihood == LikelihoodKind::Standard) {
    const Dataset data = load_dataset();
    const Matrix noise = mc.noise_scale * Matrix::Identity(model_->output_dim(), model_->output_dim());
    const ForwardModel* model = model_.get();
    target = [model, data, noise](const Vector& m) {
      try {
        return -standard_neg_loglik(*model, m, data, noise);
      } catch (const SingularSystemError&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
  } else {
    const SampleMatrix m_opt = load_samples("m_opt.csv");
    const Matrix w = mc.noise_scale * Matrix::Identity(d, d);
    const Index n_lkl = std::min(mc.n_lkl, m_opt.rows());
    target = [m_opt, w, n_lkl](const Vector& m) {
      return -distance_neg_loglik(m, m_opt, n_lkl, w);
    };
  }
  const Vector init = mc.init.size() == d ? mc.init : Vector::Zero(d);
  Rng rng(seed("mh"));
  ChainState chain = mh_sample(target, init, mc.proposal_scale * Matrix::Identity(d, d),
                               mc.n_steps, rng);
  chain.seed = seed("mh");
  write_chain(chain, path("mh_chain.csv"));
  write_csv(path("mh_samples.csv"), trace_after(chain, mc.burn_in), column_names("m", d));
}

void Pipeline::baseline_hmc() {
  const HmcConfig& hc = cfg_.baselines.hmc;
  const Index d = model_->latent_dim();
  LogDensityAndGradient target;
  if (hc.target == HmcTarget::Truth) {
    if (truth_.is_analytic()) throw ValidationError("baselines.hmc.target: truth has no density");
    const GaussianMixture gmm = truth_.mixture();
    target = [gmm](const Vector& m) { return gmm_logpdf_and_grad(gmm, m); };
  } else {
    const Dataset data = load_dataset();
    const Matrix noise = hc.noise_scale * Matrix::Identity(model_->output_dim(), model_->output_dim());
    const ForwardModel* model = model_.get();
    target = [model, data, noise](const Vector& m) {
      auto [v, g] = standard_neg_loglik_and_grad(*model, m, data, noise);
      return std::make_pair(-v, Vector(-g));
    };
  }
  std::vector<Vector> inits = hc.inits;
  if (inits.empty()) inits.push_back(Vector::Zero(d));
  for (std::size_t k = 0; k < inits.size(); ++k) {
    const std::uint64_t s = derive_seed(seed("hmc"), k);
    Rng rng(s);
    ChainState chain =
        hmc_sample(target, inits[k], hc.step_size, hc.leapfrog_steps, hc.n_steps, rng);
    chain.seed = s;
    const std::string tag = std::to_string(k);
    write_chain(chain, path("hmc_chain_" + tag + ".csv"));
    write_csv(path("hmc_samples_" + tag + ".csv"), trace_after(chain, hc.burn_in),
              column_names("m", d));
  }
}

void Pipeline::sigma() {
  const SampleMatrix m_opt = load_samples("m_opt.csv");
  SigmaOptions o;
  o.grid = log_spaced(cfg_.sigma.lo, cfg_.sigma.hi, cfg_.sigma.n);
  o.n_mc = cfg_.sigma.n_mc;
  o.seed = seed("sigma");
  const SigmaResult r = optimize_sigma(m_opt, bounding_box(m_opt), o);
  json j;
  j["prior"] = "box";
  j["sigma_star"] = r.sigma_star;
  j["grid"] = r.grid;
  j["cost"] = r.cost;
  write_json(path("sigma.json"), j);
}

void Pipeline::noise_study() {
  const NoiseStudyConfig& nc = cfg_.inversion.noise;
  if (nc.levels.empty()) return;
  if (cfg_.model.type != ModelType::Spring || cfg_.evaluation.x_eval.empty())
    throw ValidationError("inversion.noise: the noise study needs a spring model and evaluation.x_eval");
  const Dataset data = load_dataset();
  InversionOptions opts = cfg_.inversion.options;
  opts.residual_tol = nc.residual_tol;
  const Index d = model_->latent_dim();
  const auto names = column_names("m", d);
  const SampleMatrix ref_latent = truth_reference(cfg_.evaluation.n_mc, "reference");
  std::vector<SampleMatrix> refs;
  for (std::size_t k = 0; k < cfg_.evaluation.x_eval.size(); ++k)
    refs.push_back(push_forward(*model_, cfg_.evaluation.x_eval[k], ref_latent));

  // Paired design: every level reuses the same noise draws (scaled by the
  // level), row selection, prior draws, network init and test inputs.
  const std::uint64_t base = seed("noise");
  json study = json::array();
  for (std::size_t lvl = 0; lvl < nc.levels.size(); ++lvl) {
    const fs::path dir = path("noise") / ("level_" + std::to_string(lvl));
    fs::create_directories(dir);
    const DatasetInversion inv =
        invert_with_noise(*model_, data, nc.levels[lvl], nc.n_per_sample, opts, base);
    write_csv(dir / "m_opt_all.csv", inv.samples, names);

    Rng rng(derive_seed(base, 1));
    std::vector<Index> idx(static_cast<std::size_t>(inv.samples.rows()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    const Index n_sel = std::min(nc.n_select, inv.samples.rows());
    SampleMatrix m_opt(n_sel, d);
    for (Index i = 0; i < n_sel; ++i) m_opt.row(i) = inv.samples.row(idx[static_cast<std::size_t>(i)]);
    write_csv(dir / "m_opt.csv", m_opt, names);

    const SampleMatrix m0 = uniform_unit(rng, n_sel, d);
    const PermutationOutput p = swvi::permute(m0, m_opt);
    const Box box = bounding_box(m_opt);
    KernelNetwork net = make_network(cfg_, p.m_tilde, box, rng);
    const TrainingResult tr = swvi::train(net, p.m_tilde, m_opt, cfg_.nnk.training);
    const SampleMatrix test_in = scale_to_box(uniform_unit(rng, cfg_.predict.n_test, d), box);
    const SampleMatrix aug_in =
        augment_prior(p.m_tilde, cfg_.predict.augment_per, cfg_.predict.augment_sigma, rng);
    const SampleMatrix nnk1 = swvi::predict(net, test_in);
    const SampleMatrix nnk2 = swvi::predict(net, aug_in);
    write_csv(dir / "test_uniform.csv", nnk1, names);
    write_csv(dir / "test_augmented.csv", nnk2, names);

    json lj;
    lj["noise_level"] = nc.levels[lvl];
    lj["inversion"] = convergence_json(inv.report);
    lj["training"] = training_summary(tr, cfg_.nnk.training, m_opt.size());
    json outs = json::array();
    for (std::size_t k = 0; k < refs.size(); ++k) {
      json o;
      o["x"] = vector_to_json(cfg_.evaluation.x_eval[k]);
      o["nnk_uniform"] = output_errors(*model_, cfg_.evaluation.x_eval[k], nnk1, refs[k], true);
      o["nnk_augmented"] = output_errors(*model_, cfg_.evaluation.x_eval[k], nnk2, refs[k], true);
      outs.push_back(o);
    }
    lj["outputs"] = outs;
    study.push_back(lj);
  }
  write_json(path("noise_study.json"), study);
}

void Pipeline::analytic() {
  if (!truth_.is_analytic()) throw ValidationError("truth.kind: the analytic stage needs kind 'analytic'");
  Rng rng(seed("analytic"));
  const Index n_train = cfg_.data.n_data;
  const Matrix x_train = uniform_unit(rng, n_train, 2);
  const Matrix x_test = uniform_unit(rng, cfg_.predict.n_test, 2);
  auto map_rows = [](const Matrix& x) {
    Matrix m(x.rows(), 2);
    for (Index i = 0; i < x.rows(); ++i) m.row(i) = analytic_map(matrix_row(x, i)).transpose();
    return m;
  };
  const Matrix m_train = map_rows(x_train);
  const Matrix m_test = map_rows(x_test);
  Matrix both(n_train, 4);
  both << x_train, m_train;
  write_csv(path("analytic_train.csv"), both, {"x1", "x2", "m1", "m2"});
  Matrix tboth(x_test.rows(), 4);
  tboth << x_test, m_test;
  write_csv(path("analytic_test.csv"), tboth, {"x1", "x2", "m1", "m2"});

  Box unit{Vector::Zero(2), Vector::Ones(2)};
  std::vector<int> layers = cfg_.nnk.layers.empty() ? std::vector<int>{2, 7, 4, 1} : cfg_.nnk.layers;
  const KernelNetwork base = init_network(layers, cfg_.nnk.n_anchors, 2, unit, rng);
  std::vector<Trainer> trainers = cfg_.nnk.compare;
  if (trainers.empty()) trainers.push_back(cfg_.nnk.training.trainer);
  json j;
  for (Trainer t : trainers) {
    const TrainingOptions& o =
        t == Trainer::NewtonRaphson ? cfg_.nnk.training : cfg_.nnk.gradient_descent;
    TrainingOptions opts = o;
    opts.trainer = t;
    KernelNetwork net = base;
    const TrainingResult r = swvi::train(net, x_train, m_train, opts);
    const std::string tag = to_string(t);
    save_network(net, &r, path("analytic_nnk_" + tag + ".json"));
    write_history(path("analytic_history_" + tag + ".csv"), r);
    const Matrix pred_test = swvi::predict(net, x_test);
    write_csv(path("analytic_prediction_" + tag + ".csv"), pred_test, {"m1", "m2"});
    json tj = training_summary(r, opts, m_train.size());
    tj["e_train"] = normalized_error(swvi::predict(net, x_train), m_train);
    tj["e_test"] = normalized_error(pred_test, m_test);
    j[tag] = tj;
  }
  write_json(path("analytic.json"), j);
}

json Pipeline::report() {
  json m;
  m["name"] = cfg_.name;
  m["model"] = to_string(cfg_.model.type);
  m["truth"] = to_string(cfg_.truth.kind);
  m["seed"] = cfg_.seed;
  if (truth_.is_analytic()) {
    m["analytic"] = read_json(path("analytic.json"));
    write_json(path("metrics.json"), m);
    return m;
  }
  for (const char* f : {"inversion.json", "training.json", "sigma.json", "noise_study.json"}) {
    if (!fs::exists(path(f))) continue;
    json j = read_json(path(f));
    if (j.is_object()) j.erase("per_sample");
    m[fs::path(f).stem().string()] = j;
  }

  std::vector<std::pair<std::string, std::string>> variants = {
      {"inverted", "m_opt.csv"},
      {"train_prediction", "train_prediction.csv"},
      {"nnk_uniform", "test_uniform.csv"},
      {"nnk_augmented", "test_augmented.csv"},
      {"nnk_uniform_unpermuted", "test_uniform_unpermuted.csv"},
      {"map", "map_samples.csv"},
      {"mh", "mh_samples.csv"}};
  for (std::size_t k = 0;; ++k) {
    const std::string f = "hmc_samples_" + std::to_string(k) + ".csv";
    if (!fs::exists(path(f))) break;
    variants.emplace_back("hmc_" + std::to_string(k), f);
  }
  std::vector<std::pair<std::string, SampleMatrix>> loaded;
  for (const auto& [name, file] : variants)
    if (fs::exists(path(file))) loaded.emplace_back(name, load_samples(file));

  const GaussianMixture& gmm = truth_.mixture();
  const Vector mu = gmm.mean();
  const Vector sd = gmm.covariance().diagonal().cwiseSqrt();
  const std::vector<Vector> modes = mode_centers(truth_);
  json latent;
  for (const auto& [name, s] : loaded) {
    if (s.rows() < 2) continue;
    json v = to_json(moment_errors_exact(s, mu, sd));
    if (modes.size() > 1) v["mode_fractions"] = mode_fractions(s, modes, cfg_.evaluation.mode_radius);
    latent[name] = v;
  }
  {
    const SampleMatrix ref = truth_reference(cfg_.evaluation.n_reference, "reference_latent");
    json v;
    v["mean"] = vector_to_json(mu);
    v["std"] = vector_to_json(sd);
    if (modes.size() > 1) v["mode_fractions"] = mode_fractions(ref, modes, cfg_.evaluation.mode_radius);
    latent["truth"] = v;
  }
  m["latent"] = latent;

  const bool spring = cfg_.model.type == ModelType::Spring;
  const std::size_t n_eval = spring ? cfg_.evaluation.x_eval.size() : 1;
  const SampleMatrix ref_latent = truth_reference(cfg_.evaluation.n_mc, "reference");
  json outputs = json::array();
  for (std::size_t k = 0; k < n_eval; ++k) {
    const Vector x = eval_input(static_cast<Index>(k));
    const SampleMatrix ref = push_forward(*model_, x, ref_latent);
    json o;
    if (spring) o["x"] = vector_to_json(x);
    else o["x"] = "data row 0";
    o["reference"] = {{"mean", vector_to_json(sample_mean(ref))},
                      {"std", vector_to_json(sample_std(ref))},
                      {"n", ref.rows()}};
    for (const auto& [name, s] : loaded) {
      if (name == "train_prediction") continue;
      o[name] = output_errors(*model_, x, s, ref, spring);
    }
    outputs.push_back(o);
  }
  m["outputs"] = outputs;

  if (fs::exists(path("map.json"))) {
    const json mj = read_json(path("map.json"));
    m["map"] = {{"n_starts", mj["n_starts"]}, {"n_kept", mj["n_kept"]}};
  }
  if (fs::exists(path("mh_chain.json"))) m["mh"] = read_json(path("mh_chain.json"));
  json hmc = json::array();
  for (std::size_t k = 0;; ++k) {
    const fs::path f = path("hmc_chain_" + std::to_string(k) + ".json");
    if (!fs::exists(f)) break;
    hmc.push_back(read_json(f));
  }
  if (!hmc.empty()) m["hmc"] = hmc;
  write_json(path("metrics.json"), m);
  return m;
}

void Pipeline::write_manifest(const json& stages) const {
  json man;
  man["name"] = cfg_.name;
  man["seed"] = cfg_.seed;
  json seeds;
  for (const auto& s : stage_names()) seeds[s] = stage_seed(cfg_.seed, s);
  man["stage_seeds"] = seeds;
  man["config"] = cfg_.source;
  man["config_hash"] = git_blob_hash(cfg_.source.dump());
  json subs = json::array();
  if (cfg_.truth.kind == TruthKind::UShape)
    subs.push_back("ushape truth: 9 hand-placed centres along a U with covariance 0.05 I");
  if (cfg_.model.type == ModelType::Fem)
    subs.push_back("design inputs: synthetic radial-bump density fields replace topology-optimization iterates");
  if (cfg_.baselines.map.enabled)
    subs.push_back("MAP starts: deterministic Gaussian-coverage points replace designed-quadrature nodes");
  man["substitutions"] = subs;
  man["stages"] = stages;
  json files;
  std::vector<fs::path> all;
  for (const auto& e : fs::recursive_directory_iterator(out_))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") all.push_back(e.path());
  std::sort(all.begin(), all.end());
  for (const auto& p : all) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(p, out_).generic_string()] = git_blob_hash(ss.str());
  }
  man["files"] = files;
  write_json(path("manifest.json"), man);
}

json Pipeline::run() {
  std::vector<std::pair<std::string, std::function<void()>>> plan;
  if (truth_.is_analytic()) {
    plan.emplace_back("analytic", [this] { analytic(); });
  } else {
    plan.emplace_back("generate", [this] { generate(); });
    plan.emplace_back("invert", [this] { invert(); });
    plan.emplace_back("permute", [this] { permute(); });
    plan.emplace_back("train", [this] { train(); });
    plan.emplace_back("predict", [this] { predict(); });
    if (cfg_.baselines.map.enabled) plan.emplace_back("baseline_map", [this] { baseline_map(); });
    if (cfg_.baselines.mh.enabled) plan.emplace_back("baseline_mh", [this] { baseline_mh(); });
    if (cfg_.baselines.hmc.enabled) plan.emplace_back("baseline_hmc", [this] { baseline_hmc(); });
    if (cfg_.sigma.enabled) plan.emplace_back("sigma", [this] { sigma(); });
    if (!cfg_.inversion.noise.levels.empty())
      plan.emplace_back("noise_study", [this] { noise_study(); });
  }
  json metrics;
  plan.emplace_back("report", [this, &metrics] { metrics = report(); });

  json stages = json::array();
  for (const auto& [name, fn] : plan) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception& e) {
      stages.push_back({{"name", name}, {"status", "failed"}, {"error", e.what()}});
      write_manifest(stages);
      throw StageError(name, e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages.push_back({{"name", name}, {"status", "ok"}, {"seconds", secs}});
  }
  write_manifest(stages);
  return metrics;
}

json run_experiment(const fs::path& config_path, const fs::path& out_dir,
                    std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  Pipeline p(std::move(cfg), out_dir);
  return p.run();
}

}  // namespace swvi
