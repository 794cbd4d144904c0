#include "swvi/config.hpp"

#include "swvi/io.hpp"

#include <set>

namespace swvi {

using nlohmann::json;

namespace {

class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ValidationError(field(key) + ": " + what);
  }

  std::string field(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Section child(const std::string& key) {
    if (!has(key)) return Section(empty_, field(key));
    return Section(raw(key), field(key));
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  double positive(const std::string& key, double def) {
    const double v = number(key, def);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  double nonnegative(const std::string& key, double def) {
    const double v = number(key, def);
    if (!(v >= 0.0)) fail(key, "must be nonnegative");
    return v;
  }

  long long integer(const std::string& key, long long def, long long min_value) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const long long out = v.get<long long>();
    if (out < min_value) fail(key, "must be at least " + std::to_string(min_value));
    return out;
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  // Parser exceptions are rethrown with this field's path.
  template <typename F>
  auto parsed(const std::string& key, const std::string& def, F parse) {
    const std::string s = string(key, def);
    try {
      return parse(s);
    } catch (const ValidationError&) {
      fail(key, "unknown value '" + s + "'");
    }
  }

  Vector vector(const std::string& key, const Vector& def) {
    if (!has(key)) return def;
    return as_vector(raw(key), key);
  }

  std::vector<Vector> vectors(const std::string& key) {
    std::vector<Vector> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of vectors");
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(as_vector(v[i], key + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (!has(key)) return out;
    const Vector v = as_vector(raw(key), key);
    return std::vector<double>(v.data(), v.data() + v.size());
  }

  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  Vector as_vector(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key, "expected an array of numbers");
    Vector out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "expected an array of numbers");
      out(static_cast<Index>(i)) = v[i].get<double>();
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
  }

private:
  static inline const json empty_ = json::object();
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Matrix parse_covariance(Section& s, const std::string& key, Index d) {
  if (!s.has(key)) s.fail(key, "required");
  const json& v = s.raw(key);
  if (v.is_number()) return v.get<double>() * Matrix::Identity(d, d);
  if (v.is_array() && !v.empty() && v[0].is_number()) {
    const Vector diag = s.as_vector(v, key);
    if (diag.size() != d) s.fail(key, "diagonal length does not match the mean");
    return diag.asDiagonal();
  }
  if (!v.is_array() || static_cast<Index>(v.size()) != d) s.fail(key, "expected a d x d matrix");
  Matrix c(d, d);
  for (Index r = 0; r < d; ++r) {
    const Vector row = s.as_vector(v[r], key);
    if (row.size() != d) s.fail(key, "expected a d x d matrix");
    c.row(r) = row.transpose();
  }
  return c;
}

GaussianMixture parse_components(Section& truth) {
  if (!truth.has("components")) truth.fail("components", "required for kind 'mixture'");
  const json& arr = truth.raw("components");
  if (!arr.is_array() || arr.empty()) truth.fail("components", "expected a nonempty array");
  std::vector<double> weights;
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Section c(arr[i], truth.field("components") + "[" + std::to_string(i) + "]");
    weights.push_back(c.positive("weight", 1.0));
    if (!c.has("mean")) c.fail("mean", "required");
    means.push_back(c.vector("mean", Vector()));
    if (means.back().size() != means.front().size()) c.fail("mean", "dimension differs from component 0");
    covs.push_back(parse_covariance(c, "cov", means.back().size()));
    c.finish();
  }
  try {
    return GaussianMixture(weights, means, covs);
  } catch (const Error& e) {
    truth.fail("components", e.what());
  }
}

void parse_training(Section& s, TrainingOptions& t) {
  t.trainer = s.parsed("trainer", to_string(t.trainer), parse_trainer);
  t.learning_rate = s.positive("learning_rate", t.learning_rate);
  t.residual_tol = s.nonnegative("residual_tol", t.residual_tol);
  t.max_iter = static_cast<int>(s.integer("max_iter", t.max_iter, 0));
}

ModelConfig parse_model(Section s) {
  ModelConfig m;
  const std::string type = s.string("type", "spring");
  if (type == "spring") {
    m.type = ModelType::Spring;
    m.stiffness = s.parsed("stiffness", "exp", parse_stiffness_map);
  } else if (type == "fem") {
    m.type = ModelType::Fem;
    FemConfig& f = m.fem;
    Section mesh = s.child("mesh");
    f.nx = static_cast<int>(mesh.integer("nx", f.nx, 1));
    f.ny = static_cast<int>(mesh.integer("ny", f.ny, 1));
    if (mesh.has("hole")) {
      Section h = mesh.child("hole");
      CircularHole hole;
      hole.cx = h.number("cx", hole.cx);
      hole.cy = h.number("cy", hole.cy);
      hole.radius = h.positive("radius", hole.radius);
      h.finish();
      f.hole = hole;
    }
    mesh.finish();
    Section kl = s.child("kl");
    f.kl_dim = static_cast<int>(kl.integer("dim", f.kl_dim, 1));
    f.transform = kl.boolean("transform", f.transform);
    f.correlation_length = kl.positive("correlation_length", f.correlation_length);
    kl.finish();
    f.simp_exponent = s.positive("simp_exponent", f.simp_exponent);
    Section load = s.child("load");
    f.load.x = load.number("x", f.load.x);
    f.load.y = load.number("y", f.load.y);
    f.load.value = load.number("value", f.load.value);
    load.finish();
  } else {
    s.fail("type", "unknown model type '" + type + "'");
  }
  s.finish();
  return m;
}

}  // namespace

std::string to_string(ModelType t) { return t == ModelType::Spring ? "spring" : "fem"; }
std::string to_string(LikelihoodKind k) {
  return k == LikelihoodKind::Standard ? "standard" : "distance";
}
std::string to_string(HmcTarget t) { return t == HmcTarget::Truth ? "truth" : "standard"; }
std::string to_string(AnchorPlacement a) { return a == AnchorPlacement::Box ? "box" : "training"; }

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.source = j;
  Section root(j, "");
  cfg.name = root.string("name", cfg.name);
  cfg.seed = static_cast<std::uint64_t>(root.integer("seed", 1, 0));
  cfg.model = parse_model(root.child("model"));
  const Index latent_dim =
      cfg.model.type == ModelType::Spring ? 2 : static_cast<Index>(cfg.model.fem.kl_dim);

  {
    Section t = root.child("truth");
    cfg.truth.kind = t.parsed("kind", "unimodal", parse_truth_kind);
    cfg.truth.allocation = t.parsed("allocation", "stratified", parse_allocation);
    cfg.truth.dim = t.integer("dim", 0, 0);
    if (cfg.truth.kind == TruthKind::Mixture) cfg.truth.mixture = parse_components(t);
    t.finish();
    Index truth_dim = 0;
    try {
      truth_dim = TruthSampler(cfg.truth).dim();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("truth: ") + e.what());
    }
    if (cfg.truth.kind == TruthKind::Analytic && cfg.model.type != ModelType::Spring)
      throw ValidationError("truth.kind: 'analytic' requires model.type 'spring'");
    if (cfg.truth.kind != TruthKind::Analytic && truth_dim != latent_dim)
      throw ValidationError("truth.dim: truth dimension " + std::to_string(truth_dim) +
                            " does not match the model latent dimension " +
                            std::to_string(latent_dim));
  }
  {
    Section d = root.child("data");
    cfg.data.n_data = d.integer("n_data", cfg.data.n_data, 1);
    cfg.data.delta_x = d.nonnegative("delta_x", cfg.data.delta_x);
    cfg.data.center = d.vector("center", cfg.data.center);
    if (cfg.data.center.size() != 2) d.fail("center", "expected 2 entries");
    Section g = d.child("design");
    DesignConfig& dc = cfg.data.design;
    dc.n_fields = static_cast<int>(g.integer("n_fields", dc.n_fields, 1));
    dc.n_keep = static_cast<int>(g.integer("n_keep", dc.n_keep, 1));
    dc.n_noise_per = static_cast<int>(g.integer("n_noise_per", dc.n_noise_per, 1));
    dc.jitter = g.nonnegative("jitter", dc.jitter);
    dc.volume_fraction = g.positive("volume_fraction", dc.volume_fraction);
    dc.n_bumps = static_cast<int>(g.integer("n_bumps", dc.n_bumps, 1));
    g.finish();
    if (dc.n_keep > dc.n_fields) g.fail("n_keep", "cannot exceed n_fields");
    d.finish();
  }
  {
    Section s = root.child("inversion");
    InversionOptions& o = cfg.inversion.options;
    o.learning_rate = s.positive("learning_rate", o.learning_rate);
    o.residual_tol = s.nonnegative("residual_tol", o.residual_tol);
    o.max_iter = static_cast<int>(s.integer("max_iter", o.max_iter, 1));
    const std::string init = s.string("init", "zero");
    if (init == "zero") {
      o.init = InitPolicy::Zero;
    } else if (init == "uniform") {
      o.init = InitPolicy::Uniform;
    } else if (init == "fixed") {
      o.init = InitPolicy::Fixed;
    } else {
      s.fail("init", "unknown value '" + init + "'");
    }
    o.m_init = s.vector("m_init", Vector());
    o.init_lower = s.number("init_lower", o.init_lower);
    o.init_upper = s.number("init_upper", o.init_upper);
    o.warm_start_gd_iters = static_cast<int>(s.integer("warm_start_gd_iters", 0, 0));
    o.warm_start_gd_rate = s.positive("warm_start_gd_rate", o.warm_start_gd_rate);
    cfg.inversion.keep_unconverged = s.boolean("keep_unconverged", cfg.inversion.keep_unconverged);
    if (o.init == InitPolicy::Fixed && o.m_init.size() != latent_dim)
      s.fail("m_init", "expected " + std::to_string(latent_dim) + " entries");
    Section n = s.child("noise");
    NoiseStudyConfig& nc = cfg.inversion.noise;
    nc.levels = n.numbers("levels");
    for (double l : nc.levels)
      if (!(l >= 0.0)) n.fail("levels", "noise levels must be nonnegative");
    nc.n_per_sample = static_cast<int>(n.integer("n_per_sample", nc.n_per_sample, 1));
    nc.n_select = n.integer("n_select", nc.n_select, 1);
    nc.residual_tol = n.nonnegative("residual_tol", nc.residual_tol);
    n.finish();
    s.finish();
    try {
      o.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("inversion: ") + e.what());
    }
  }
  {
    Section s = root.child("permutation");
    cfg.permutation.enabled = s.boolean("enabled", cfg.permutation.enabled);
    cfg.permutation.ablation = s.boolean("ablation", cfg.permutation.ablation);
    s.finish();
  }
  {
    Section s = root.child("nnk");
    NnkConfig& n = cfg.nnk;
    n.layers = s.integers("layers");
    if (!n.layers.empty()) {
      if (n.layers.size() < 2 || n.layers.back() != 1)
        s.fail("layers", "expected [d, hidden..., 1]");
      if (cfg.truth.kind != TruthKind::Analytic && n.layers.front() != latent_dim)
        s.fail("layers", "input layer must equal the latent dimension " + std::to_string(latent_dim));
      for (int l : n.layers)
        if (l < 1) s.fail("layers", "layer sizes must be positive");
    }
    n.n_anchors = s.integer("n_anchors", n.n_anchors, 1);
    const std::string placement = s.string("anchors", "box");
    if (placement == "box") {
      n.anchors = AnchorPlacement::Box;
    } else if (placement == "training") {
      n.anchors = AnchorPlacement::Training;
    } else {
      s.fail("anchors", "unknown value '" + placement + "'");
    }
    parse_training(s, n.training);
    if (s.has("compare")) {
      const json& c = s.raw("compare");
      if (!c.is_array()) s.fail("compare", "expected an array of trainer names");
      for (const auto& e : c) {
        if (!e.is_string()) s.fail("compare", "expected an array of trainer names");
        try {
          n.compare.push_back(parse_trainer(e.get<std::string>()));
        } catch (const ValidationError&) {
          s.fail("compare", "unknown trainer '" + e.get<std::string>() + "'");
        }
      }
    }
    if (s.has("gradient_descent")) {
      Section g = s.child("gradient_descent");
      parse_training(g, n.gradient_descent);
      g.finish();
    }
    s.finish();
  }
  {
    Section s = root.child("predict");
    cfg.predict.n_test = s.integer("n_test", cfg.predict.n_test, 1);
    Section a = s.child("augment");
    cfg.predict.augment_per = static_cast<int>(a.integer("n_per", cfg.predict.augment_per, 1));
    cfg.predict.augment_sigma = a.nonnegative("sigma", cfg.predict.augment_sigma);
    a.finish();
    s.finish();
  }
  {
    Section s = root.child("evaluation");
    EvaluationConfig& e = cfg.evaluation;
    e.x_eval = s.vectors("x_eval");
    if (cfg.model.type == ModelType::Spring)
      for (const Vector& x : e.x_eval)
        if (x.size() != 2) s.fail("x_eval", "spring inputs have 2 entries");
    e.n_mc = s.integer("n_mc", e.n_mc, 2);
    e.n_reference = s.integer("n_reference", e.n_reference, 2);
    e.mode_radius = s.positive("mode_radius", e.mode_radius);
    s.finish();
  }
  {
    Section b = root.child("baselines");
    {
      Section s = b.child("map");
      MapConfig& m = cfg.baselines.map;
      m.enabled = s.boolean("enabled", m.enabled);
      m.n_dq = s.integer("n_dq", m.n_dq, 1);
      m.noise_scale = s.positive("noise_scale", m.noise_scale);
      m.prior_scale = s.positive("prior_scale", m.prior_scale);
      m.n_samples = s.integer("n_samples", m.n_samples, 1);
      m.bfgs.gtol = s.positive("gtol", m.bfgs.gtol);
      m.bfgs.max_iter = static_cast<int>(s.integer("max_iter", m.bfgs.max_iter, 1));
      s.finish();
    }
    {
      Section s = b.child("mh");
      MhConfig& m = cfg.baselines.mh;
      m.enabled = s.boolean("enabled", m.enabled);
      const std::string lk = s.string("likelihood", "standard");
      if (lk == "standard") {
        m.likelihood = LikelihoodKind::Standard;
      } else if (lk == "distance") {
        m.likelihood = LikelihoodKind::Distance;
      } else {
        s.fail("likelihood", "unknown value '" + lk + "'");
      }
      m.noise_scale = s.positive("noise_scale", m.noise_scale);
      m.n_lkl = s.integer("n_lkl", m.n_lkl, 1);
      m.proposal_scale = s.positive("proposal_scale", m.proposal_scale);
      m.n_steps = s.integer("n_steps", m.n_steps, 1);
      m.burn_in = s.integer("burn_in", m.burn_in, 0);
      m.init = s.vector("init", Vector());
      if (m.init.size() != 0 && m.init.size() != latent_dim)
        s.fail("init", "expected " + std::to_string(latent_dim) + " entries");
      s.finish();
    }
    {
      Section s = b.child("hmc");
      HmcConfig& h = cfg.baselines.hmc;
      h.enabled = s.boolean("enabled", h.enabled);
      const std::string target = s.string("target", "truth");
      if (target == "truth") {
        h.target = HmcTarget::Truth;
      } else if (target == "standard") {
        h.target = HmcTarget::Standard;
      } else {
        s.fail("target", "unknown value '" + target + "'");
      }
      h.noise_scale = s.positive("noise_scale", h.noise_scale);
      h.step_size = s.positive("step_size", h.step_size);
      h.leapfrog_steps = static_cast<int>(s.integer("leapfrog_steps", h.leapfrog_steps, 1));
      h.n_steps = s.integer("n_steps", h.n_steps, 1);
      h.burn_in = s.integer("burn_in", h.burn_in, 0);
      h.inits = s.vectors("inits");
      for (const Vector& v : h.inits)
        if (v.size() != latent_dim)
          s.fail("inits", "expected " + std::to_string(latent_dim) + " entries per start");
      s.finish();
    }
    b.finish();
  }
  {
    Section s = root.child("sigma");
    SigmaConfig& g = cfg.sigma;
    g.enabled = s.boolean("enabled", g.enabled);
    g.lo = s.positive("lo", g.lo);
    g.hi = s.positive("hi", g.hi);
    g.n = static_cast<int>(s.integer("n", g.n, 1));
    g.n_mc = s.integer("n_mc", g.n_mc, 1);
    if (g.hi < g.lo) s.fail("hi", "must be at least lo");
    s.finish();
  }
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_json(path));
}

std::unique_ptr<ForwardModel> make_model(const ExperimentConfig& cfg) {
  if (cfg.model.type == ModelType::Spring)
    return std::make_unique<SpringModel>(cfg.model.stiffness);
  const FemConfig& f = cfg.model.fem;
  Mesh mesh = structured_unit_square(f.nx, f.ny, f.hole);
  KlBasis kl = make_kl_basis(mesh, f.kl_dim, f.transform, f.correlation_length);
  return std::make_unique<FemModel>(
      make_fem_problem(std::move(mesh), std::move(kl), f.load, 1e-12, f.simp_exponent));
}

std::vector<int> resolved_layers(const ExperimentConfig& cfg) {
  if (!cfg.nnk.layers.empty()) return cfg.nnk.layers;
  const int d = cfg.model.type == ModelType::Spring ? 2 : cfg.model.fem.kl_dim;
  return {d, 10, 4, 1};
}

}  // namespace swvi
