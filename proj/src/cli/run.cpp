#include "regraft/cli/run.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "regraft/bounds/bounds.hpp"
#include "regraft/data/synthetic.hpp"
#include "regraft/error.hpp"
#include "regraft/models/kernel_ridge.hpp"
#include "regraft/models/networks.hpp"
#include "regraft/models/serialize.hpp"
#include "regraft/ndcore/ops.hpp"
#include "regraft/synthgen/generator.hpp"

namespace regraft::cli {

namespace fs = std::filesystem;
using nd::Tensor2;
using nd::Var;

namespace seeds {
constexpr std::uint64_t kData = 1, kInit = 2, kSynth = 3;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::uint64_t data_seed(const RunConfig& c) { return c.seed("seed.data", seeds::kData); }
std::uint64_t init_seed(const RunConfig& c) { return c.seed("seed.init", seeds::kInit); }
std::uint64_t synth_seed(const RunConfig& c) { return c.seed("seed.synth", seeds::kSynth); }

// Turns library validation failures raised while building settings into
// config errors.
template <class F>
auto as_config(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(key, 0, e.what());
  }
}

fs::path output_dir(const RunConfig& c) { return fs::path(c.str("output_dir")); }

fs::path teacher_path(const RunConfig& c) {
  return c.str("teacher.path").empty() ? output_dir(c) / "teacher.model" : fs::path(c.str("teacher.path"));
}

fs::path student_path(const RunConfig& c) {
  return c.str("student.path").empty() ? output_dir(c) / "best.model" : fs::path(c.str("student.path"));
}

void prepare_output(const RunConfig& c) {
  fs::create_directories(output_dir(c));
  std::ofstream(output_dir(c) / "resolved.cfg") << c.resolved_text();
}

data::TargetColumn target_column(const RunConfig& c, const fs::path& path) {
  const std::string& t = c.str("data.target");
  if (!t.empty()) {
    if (t.find_first_not_of("0123456789") == std::string::npos) return static_cast<std::size_t>(std::stoull(t));
    return t;
  }
  std::ifstream in(path);
  if (!in) throw ConfigError("data.path", c.line_of("data.path"), "cannot open '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  return static_cast<std::size_t>(std::count(header.begin(), header.end(), ','));
}

Tensor2 column_extreme(const Tensor2& x, bool max) {
  Tensor2 out(1, x.cols(), max ? -INFINITY : INFINITY);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      out[c] = max ? std::max(out[c], x(r, c)) : std::min(out[c], x(r, c));
  return out;
}

nd::OptimizerSettings student_optimizer(const RunConfig& c) {
  nd::OptimizerSettings s;
  s.kind = nd::parse_optimizer_kind(c.str("student.optimizer"));
  s.learning_rate = c.real("student.lr");
  s.weight_decay = c.real("student.weight_decay");
  s.rho = c.real("student.rho");
  s.eps = c.real("student.eps");
  return s;
}

synth::GenLossSpec gen_loss_spec(const RunConfig& c) {
  synth::GenLossSpec s;
  s.discrepancy = synth::parse_discrepancy(c.str("loss.discrepancy"));
  s.epsilon = c.real("loss.epsilon");
  s.input_penalty = synth::parse_input_penalty(c.str("loss.input_penalty"));
  s.beta = c.real("loss.beta");
  s.output_penalty = synth::parse_output_penalty(c.str("loss.output_penalty"));
  s.gamma = c.real("loss.gamma");
  s.random_target = synth::parse_random_target(c.str("loss.random_target"));
  s.penalize_input_as_output = c.flag("loss.literal_input_output");
  as_config("loss", [&] {
    s.validate();
    return 0;
  });
  return s;
}

synth::OptimizeSpec optimize_spec(const RunConfig& c) {
  synth::OptimizeSpec o;
  o.method = synth::parse_optimize_method(c.str("direct.method"));
  o.eta = c.real("direct.eta");
  o.steps = c.count("direct.steps");
  o.rho = c.real("direct.rho");
  o.eps = c.real("direct.eps");
  o.de.population = c.count("de.population");
  o.de.F = c.real("de.F");
  o.de.CR = c.real("de.CR");
  o.de.iterations = c.count("de.iterations");
  as_config("direct", [&] {
    o.validate();
    return 0;
  });
  return o;
}

models::GeneratorSpec generator_spec(const RunConfig& c, std::size_t dim) {
  models::GeneratorSpec g;
  g.latent_dim = c.count("generator.latent");
  g.hidden = c.counts("generator.hidden");
  g.activation = models::parse_activation(c.str("generator.activation"));
  g.output_dim = dim;
  as_config("generator", [&] {
    g.validate();
    return 0;
  });
  return g;
}

nd::OptimizerSettings generator_optimizer(const RunConfig& c) {
  return nd::OptimizerSettings{nd::OptimizerKind::RmsProp, c.real("generator.lr"), 0.99, 1e-8, 0.0};
}

std::shared_ptr<const nd::DifferentiableModel> load_student(const RunConfig& c) {
  return models::load_model(student_path(c));
}

Tensor2 student_row_loss(nd::LossKind kind, const Tensor2& t, const Tensor2& s) {
  Tensor2 out(t.rows(), 1);
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double d = s[i] - t[i];
    out[i] = kind == nd::LossKind::Mse ? d * d : nd::logcosh(d);
  }
  return out;
}

}  // namespace

DataBundle load_data(const RunConfig& c) {
  DataBundle b;
  const std::string source = c.str("data.source");
  if (source == "none") return b;
  data::Dataset ds;
  const std::uint64_t seed = data_seed(c);
  if (source == "csv") {
    if (c.str("data.path").empty()) throw ConfigError("data.path", 0, "required when data.source = csv");
    const fs::path path = c.str("data.path");
    ds = data::load_csv(path, target_column(c, path));
  } else if (source == "idx") {
    if (c.str("data.images").empty() || c.str("data.labels").empty())
      throw ConfigError("data.images", 0, "data.images and data.labels are required when data.source = idx");
    ds = data::load_idx(c.str("data.images"), c.str("data.labels"));
  } else if (source == "friedman") {
    const std::size_t n = c.count("data.samples") ? c.count("data.samples") : 8192;
    ds = data::make_friedman(n, nd::derive_seed(seed, 100), c.real("data.noise"));
  } else {
    const std::size_t n = c.count("data.samples") ? c.count("data.samples") : 3148;
    ds = data::make_protein_like(n, nd::derive_seed(seed, 101));
  }

  data::SplitSpec spec{c.count("split.train"), c.real("split.val_fraction"), nd::derive_seed(seed, 102)};
  as_config("split.train", [&] {
    spec.validate(ds.size());
    return 0;
  });
  b.split = data::split(ds, spec);
  if (c.flag("data.standardize")) {
    const bool target = c.flag("data.standardize_target");
    const data::Scaler scaler =
        c.str("data.scaling") == "whole" ? data::fit_scaler(ds, target) : data::fit_scaler(b.split.train, target);
    b.split.train = data::apply_scaler(b.split.train, scaler);
    b.split.validation = data::apply_scaler(b.split.validation, scaler);
    b.split.test = data::apply_scaler(b.split.test, scaler);
  }
  b.present = true;
  b.dim = ds.dim();
  return b;
}

synth::SamplerSpec make_sampler_spec(const RunConfig& c, const DataBundle& data, std::size_t dim) {
  synth::SamplerSpec s;
  s.kind = synth::parse_sampler_kind(c.str("sampler.kind"));
  s.dim = dim;
  s.simplex = c.flag("sampler.simplex");
  const std::string bounds = c.str("sampler.bounds");
  const bool qmc = s.kind == synth::SamplerKind::Halton || s.kind == synth::SamplerKind::LatinHypercube;
  if (bounds == "fixed") {
    s.bounds = synth::SamplerSpec::uniform_box(dim, c.real("sampler.lo"), c.real("sampler.hi"));
  } else if (bounds == "auto" && qmc) {
    if (data.present && data.split.validation.size() > 0) {
      const Tensor2 lo = column_extreme(data.split.validation.features, false);
      const Tensor2 hi = column_extreme(data.split.validation.features, true);
      s.bounds = synth::Box{{lo.values().begin(), lo.values().end()}, {hi.values().begin(), hi.values().end()}};
    } else {
      s.bounds = synth::SamplerSpec::uniform_box(dim, -3.0, 3.0);
    }
  }
  if (s.kind == synth::SamplerKind::Domain) {
    if (!data.present) throw ConfigError("sampler.kind", c.line_of("sampler.kind"), "domain sampler needs data");
    const auto st = data::domain_stats(data.split.train);
    s.mean = st.mean;
    s.stddev = st.stddev;
  }
  as_config("sampler", [&] {
    s.validate();
    return 0;
  });
  return s;
}

distill::DistillConfig make_distill_config(const RunConfig& c, const DataBundle& data, std::size_t dim) {
  distill::DistillConfig d;
  d.epochs = c.count("epochs");
  d.batches_per_epoch = c.count("batches");
  d.batch_size = c.count("batch_size");
  if (c.str("alpha.schedule") == "constant")
    d.alpha = distill::AlphaSchedule::constant(c.real("alpha.value"));
  else
    d.alpha = distill::AlphaSchedule::linear(c.real("alpha.start"), c.real("alpha.end"));
  d.double_at_edge = c.flag("alpha.double");
  d.student_optimizer = student_optimizer(c);
  d.student_loss = nd::parse_loss_kind(c.str("student.loss"));
  d.xp_sampler = make_sampler_spec(c, data, dim);
  d.synth.strategy = distill::parse_strategy(c.str("synth.method"));
  d.synth.sampler = d.xp_sampler;
  d.synth.loss = gen_loss_spec(c);
  d.synth.optimize = optimize_spec(c);
  d.synth.generator = generator_spec(c, dim);
  d.synth.generator_optimizer = generator_optimizer(c);
  d.synth.generator_rounds = c.count("generator.rounds");
  d.synth.reemit_after_update = c.flag("generator.reemit");
  d.validation_every = c.count("validation.every");
  d.data_seed = data_seed(c);
  d.init_seed = init_seed(c);
  d.synth_seed = synth_seed(c);
  as_config("", [&] {
    d.validate();
    return 0;
  });
  return d;
}

namespace {

// Median pairwise distance between rows; 1 when there is no spread.
double median_distance(const Tensor2& x) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = i + 1; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) s += (x(i, k) - x(j, k)) * (x(i, k) - x(j, k));
      d.push_back(std::sqrt(s));
    }
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  const double m = d[d.size() / 2];
  return m > 0.0 ? m : 1.0;
}

}  // namespace

std::unique_ptr<nd::DifferentiableModel> make_student(const RunConfig& c, const DataBundle& data, std::size_t dim) {
  const std::uint64_t seed = init_seed(c);
  if (c.str("student.kind") == "rbf") {
    models::RbfStudentSpec spec{dim, c.count("student.centers")};
    as_config("student.centers", [&] {
      spec.validate();
      return 0;
    });
    synth::Sampler sampler(make_sampler_spec(c, data, dim));
    nd::Rng rng(nd::derive_seed(seed, 5));
    const Tensor2 centers = sampler.draw(spec.centers, rng);
    const std::string width = c.str("student.width");
    if (width == "auto") {
      spec.initial_width = median_distance(centers);
    } else {
      char* end = nullptr;
      spec.initial_width = std::strtod(width.c_str(), &end);
      if (end == width.c_str() || *end != '\0' || !(spec.initial_width > 0.0))
        throw ConfigError("student.width", c.line_of("student.width"), "expected 'auto' or a positive real, got '" + width + "'");
    }
    return models::build_rbf(spec, centers, seed);
  }
  models::MlpSpec spec{dim, c.counts("student.hidden"), models::parse_activation(c.str("student.activation")), 1};
  return as_config("student.hidden", [&] { return models::build_mlp(spec, seed); });
}

models::TeacherOracle train_teacher(const RunConfig& c, const DataBundle& data, std::ostream& log) {
  const std::string kind = c.str("teacher.kind");
  if (kind == "command") {
    if (c.str("teacher.command").empty()) throw ConfigError("teacher.command", 0, "required when teacher.kind = command");
    const std::size_t d = data.present ? data.dim : 0;
    if (d == 0) throw ConfigError("data.source", 0, "a command teacher needs data to fix its input dimension");
    return models::TeacherOracle::from_command({c.str("teacher.command"), d});
  }
  if (!data.present) throw ConfigError("data.source", 0, "train-teacher needs data");
  const data::Dataset& train = data.split.train;
  if (kind == "krr") {
    double sigma = c.real("teacher.sigma");
    if (!(sigma > 0.0)) {
      // exp(-|x-y|^2 / (d * var)) with var taken over every feature entry.
      double mean = 0.0, var = 0.0;
      for (double v : train.features.values()) mean += v;
      mean /= static_cast<double>(train.features.size());
      for (double v : train.features.values()) var += (v - mean) * (v - mean);
      var /= static_cast<double>(train.features.size());
      if (!(var > 0.0)) throw ConfigError("teacher.sigma", 0, "training features are constant; set teacher.sigma");
      sigma = std::sqrt(static_cast<double>(data.dim) * var / 2.0);
    }
    return models::TeacherOracle::from_kernel_ridge(
        models::krr_fit(train.features, train.targets, sigma, c.real("teacher.lambda")));
  }

  models::MlpSpec spec{data.dim, c.counts("teacher.hidden"), models::parse_activation(c.str("teacher.activation")), 1};
  auto model = as_config("teacher.hidden", [&] { return models::build_mlp(spec, nd::derive_seed(init_seed(c), 9)); });
  nd::Optimizer opt({nd::OptimizerKind::RmsProp, c.real("teacher.lr"), 0.99, 1e-8, c.real("teacher.weight_decay")});
  const nd::LossKind loss = nd::parse_loss_kind(c.str("teacher.loss"));
  const std::size_t batch = std::max<std::uint64_t>(1, c.count("teacher.batch_size"));
  nd::Rng rng(nd::derive_seed(data_seed(c), 103));
  std::vector<std::size_t> order(train.size());
  std::ofstream metrics(output_dir(c) / "teacher_metrics.csv");
  metrics << "epoch,train_loss,val_rmse\n";
  for (std::uint64_t e = 0; e < c.count("teacher.epochs"); ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t s = 0; s < order.size(); s += batch) {
      std::span<const std::size_t> rows(order.data() + s, std::min(batch, order.size() - s));
      nd::Tape tape;
      const auto params = model->bind(tape, true);
      Var l = nd::loss(loss, model->forward(tape.constant(train.features.select_rows(rows)), params),
                       tape.constant(train.targets.select_rows(rows)));
      tape.backward(l);
      std::vector<Tensor2> grads;
      for (const Var& p : params) grads.push_back(tape.grad(p));
      opt.step(model->parameters(), grads);
      total += l.value()[0];
      ++batches;
    }
    metrics << e + 1 << ',' << format_real(total / static_cast<double>(batches)) << ',';
    if (data.split.validation.size() > 0)
      metrics << format_real(distill::evaluate(*model, data.split.validation, distill::Metric::Rmse));
    metrics << '\n';
  }
  log << "teacher trained for " << c.count("teacher.epochs") << " epochs\n";
  return models::TeacherOracle::from_model(std::shared_ptr<const nd::DifferentiableModel>(std::move(model)));
}

void write_metrics_csv(const fs::path& path, const std::vector<distill::MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,loss_combined,loss_xg,loss_xp,alpha,val_rmse,wall_s\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& r : rows)
    out << r.epoch << ',' << format_real(r.loss_combined) << ',' << opt(r.loss_xg) << ',' << opt(r.loss_xp) << ','
        << format_real(r.alpha) << ',' << opt(r.val_rmse) << ',' << format_real(r.wall_s) << '\n';
}

int cmd_train_teacher(const RunConfig& c, std::ostream& out) {
  const DataBundle data = load_data(c);
  prepare_output(c);
  const models::TeacherOracle teacher = train_teacher(c, data, out);
  models::save_teacher(teacher, teacher_path(c));
  std::ofstream summary(output_dir(c) / "teacher_summary.csv");
  summary << "split,rmse,mae\n";
  const std::pair<const char*, const data::Dataset*> parts[] = {
      {"train", &data.split.train}, {"validation", &data.split.validation}, {"test", &data.split.test}};
  for (const auto& [name, ds] : parts) {
    if (ds->size() == 0) continue;
    const Tensor2 pred = teacher.predict(ds->features);
    const double rmse = distill::score(pred, ds->targets, distill::Metric::Rmse);
    const double mae = distill::score(pred, ds->targets, distill::Metric::Mae);
    summary << name << ',' << format_real(rmse) << ',' << format_real(mae) << '\n';
    out << name << "_rmse " << format_real(rmse) << '\n';
  }
  out << "teacher written to " << teacher_path(c).string() << '\n';
  return kOk;
}

int cmd_distill(const RunConfig& c, std::ostream& out) {
  const DataBundle data = load_data(c);
  const models::TeacherOracle teacher = models::load_teacher(teacher_path(c));
  const std::size_t dim = teacher.input_dim();
  if (data.present && data.dim != dim)
    throw ConfigError("data.source", 0, "data width " + std::to_string(data.dim) + " differs from the teacher's " +
                                            std::to_string(dim));
  const distill::DistillConfig dc = make_distill_config(c, data, dim);
  auto student = make_student(c, data, dim);
  prepare_output(c);
  const data::Dataset* validation = data.present && data.split.validation.size() > 0 ? &data.split.validation : nullptr;
  const distill::DistillResult res = distill::distill_run(dc, teacher, *student, validation);
  write_metrics_csv(output_dir(c) / "metrics.csv", res.metrics);
  models::save_model(*res.best, output_dir(c) / "best.model");
  models::save_model(*res.final_model, output_dir(c) / "final.model");
  std::ofstream summary(output_dir(c) / "summary.csv");
  summary << "model,split,rmse,mae\n";
  if (data.present && data.split.test.size() > 0) {
    for (const auto& [name, m] : {std::pair{"best", res.best.get()}, std::pair{"final", res.final_model.get()}}) {
      const Tensor2 pred = m->predict(data.split.test.features);
      const double rmse = distill::score(pred, data.split.test.targets, distill::Metric::Rmse);
      const double mae = distill::score(pred, data.split.test.targets, distill::Metric::Mae);
      summary << name << ",test," << format_real(rmse) << ',' << format_real(mae) << '\n';
      out << name << "_test_rmse " << format_real(rmse) << "\n" << name << "_test_mae " << format_real(mae) << '\n';
    }
  }
  if (res.best_val_rmse)
    out << "best_val_rmse " << format_real(*res.best_val_rmse) << " at epoch " << res.best_epoch << '\n';
  out << "wrote " << res.metrics.size() << " metric rows to " << (output_dir(c) / "metrics.csv").string() << '\n';
  return kOk;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const DataBundle data = load_data(c);
  if (!data.present) throw ConfigError("data.source", 0, "evaluate needs data");
  const fs::path path = c.str("evaluate.model").empty() ? teacher_path(c) : fs::path(c.str("evaluate.model"));
  const models::TeacherOracle model = models::load_teacher(path);
  const std::string which = c.str("evaluate.split");
  data::Dataset ds;
  if (which == "train") ds = data.split.train;
  else if (which == "validation") ds = data.split.validation;
  else if (which == "test") ds = data.split.test;
  else {
    const data::Dataset parts[] = {data.split.train, data.split.validation, data.split.test};
    const Tensor2 f[] = {parts[0].features, parts[1].features, parts[2].features};
    const Tensor2 t[] = {parts[0].targets, parts[1].targets, parts[2].targets};
    ds.features = nd::vstack(f);
    ds.targets = nd::vstack(t);
  }
  if (ds.size() == 0) throw ConfigError("evaluate.split", 0, "split '" + which + "' is empty");
  const distill::Metric metric = distill::parse_metric(c.str("evaluate.metric"));
  const double v = distill::evaluate(model, ds, metric);
  prepare_output(c);
  const fs::path rows = output_dir(c) / "evaluate.csv";
  const bool fresh = !fs::exists(rows);
  std::ofstream f(rows, std::ios::app);
  if (fresh) f << "model,split,metric,value\n";
  f << path.string() << ',' << which << ',' << to_string(metric) << ',' << format_real(v) << '\n';
  out << to_string(metric) << ' ' << format_real(v) << '\n';
  return kOk;
}

int cmd_gen_dump(const RunConfig& c, std::ostream& out) {
  const DataBundle data = load_data(c);
  const models::TeacherOracle teacher = models::load_teacher(teacher_path(c));
  const auto student = load_student(c);
  const std::size_t dim = teacher.input_dim();
  if (student->input_dim() != dim) throw ConfigError("student.path", 0, "student and teacher input widths differ");
  synth::SamplerSpec sspec = make_sampler_spec(c, data, dim);
  const std::size_t n = c.count("dump.count");
  if (n == 0) throw ConfigError("dump.count", c.line_of("dump.count"), "must be >= 1");
  prepare_output(c);

  synth::Sampler sampler(sspec);
  nd::Rng rng(synth_seed(c));
  Tensor2 x;
  const std::string method = c.str("synth.method");
  if (method == "random") {
    x = sampler.draw(n, rng);
  } else if (method == "direct") {
    Tensor2 x0 = sampler.draw(n, rng);
    x = synth::direct_optimize(x0, teacher, *student, gen_loss_spec(c), optimize_spec(c), rng, &sampler).x;
  } else {
    synth::GeneratorTrainer trainer(models::build_generator(generator_spec(c, dim), init_seed(c)), generator_optimizer(c));
    const synth::GenLossSpec loss = gen_loss_spec(c);
    for (std::uint64_t r = 0; r < c.count("dump.generator_rounds"); ++r)
      trainer.round(teacher, *student, loss, c.count("batch_size"), rng, c.flag("generator.reemit"));
    x = trainer.emit(n, rng);
  }
  const Tensor2 t = teacher.predict(x);
  const Tensor2 s = student->predict(x);
  const Tensor2 l = student_row_loss(nd::parse_loss_kind(c.str("student.loss")), t, s);

  std::ofstream f(output_dir(c) / "gen_dump.csv");
  for (std::size_t j = 0; j < dim; ++j) f << 'x' << j << ',';
  f << "teacher_pred,student_pred,student_loss,epoch_tag\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) f << format_real(x(i, j)) << ',';
    f << format_real(t[i]) << ',' << format_real(s[i]) << ',' << format_real(l[i]) << ',' << c.str("dump.tag") << '\n';
  }
  double mean = 0.0;
  for (double v : l.values()) mean += v;
  out << "mean_student_loss " << format_real(mean / static_cast<double>(n)) << '\n';
  return kOk;
}

int cmd_bounds_check(const RunConfig& c, std::ostream& out) {
  const DataBundle data = load_data(c);
  const models::TeacherOracle teacher = models::load_teacher(teacher_path(c));
  const auto student = load_student(c);
  const std::size_t dim = teacher.input_dim();
  synth::OptimizeSpec opt = optimize_spec(c);
  if (opt.method != synth::OptimizeMethod::Gd)
    throw ConfigError("direct.method", c.line_of("direct.method"), "bounds-check covers plain gd traces only");
  const synth::GenLossSpec loss = gen_loss_spec(c);
  synth::Sampler sampler(make_sampler_spec(c, data, dim));
  prepare_output(c);
  nd::Rng rng(synth_seed(c));

  std::ofstream f(output_dir(c) / "bounds.csv");
  f << "check,trial,t,d,eta,k_hat,k_convention,bound,observed,satisfied,exact_bound,exact_satisfied,advisory\n";
  auto write = [&](const bounds::BoundReport& r, std::uint64_t trial) {
    f << r.check << ',' << trial << ',' << r.t << ',' << r.d << ',' << format_real(r.eta) << ',' << format_real(r.k_hat)
      << ',' << to_string(r.k_convention) << ',' << format_real(r.bound) << ',' << format_real(r.observed) << ','
      << (r.satisfied ? 1 : 0) << ',' << (r.exact_bound ? format_real(*r.exact_bound) : "") << ','
      << (r.exact_satisfied ? (*r.exact_satisfied ? "1" : "0") : "") << ',' << (r.advisory ? 1 : 0) << '\n';
  };
  std::uint64_t ok = 0, exact_ok = 0;
  const std::uint64_t trials = c.count("bounds.trials");
  for (std::uint64_t i = 0; i < trials; ++i) {
    const Tensor2 x0 = sampler.draw(c.count("batch_size"), rng);
    const auto res = synth::direct_optimize(x0, teacher, *student, loss, opt, rng, &sampler);
    const auto rep = bounds::check_displacement_bound(res);
    ok += rep.satisfied;
    exact_ok += rep.exact_satisfied.value_or(false);
    write(rep, i);
  }
  out << "displacement sqrt(d)K bound satisfied " << ok << "/" << trials << ", exact bound " << exact_ok << "/"
      << trials << '\n';

  if (const std::uint64_t rounds = c.count("bounds.generator_rounds"); rounds > 0) {
    if (!(loss.beta > 0.0)) throw ConfigError("loss.beta", c.line_of("loss.beta"), "generator norm bound needs beta > 0");
    synth::GeneratorTrainer trainer(models::build_generator(generator_spec(c, dim), init_seed(c)), generator_optimizer(c));
    for (std::uint64_t r = 0; r < rounds; ++r) trainer.round(teacher, *student, loss, c.count("batch_size"), rng);
    const Tensor2 xg = trainer.emit(c.count("batch_size"), rng);
    synth::GenLossSpec disc = loss;
    disc.beta = 0.0;
    disc.gamma = 0.0;
    if (!(disc.epsilon > 0.0)) disc.epsilon = 1.0;
    const double k = bounds::estimate_lipschitz(bounds::gen_loss_gradient_fn(disc, teacher, *student, std::nullopt), xg);
    const auto rep = bounds::check_generator_norm_bound(xg, loss.beta, k, dim);
    write(rep, 0);
    out << "generator norm " << format_real(rep.observed) << " vs bound " << format_real(rep.bound) << " (advisory)\n";
  }
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-free distillation of regression models"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  struct Cmd {
    const char* name;
    const char* help;
    int (*fn)(const RunConfig&, std::ostream&);
  };
  const Cmd cmds[] = {
      {"train-teacher", "fit a teacher on real data and save it", cmd_train_teacher},
      {"distill", "run data-free distillation", cmd_distill},
      {"evaluate", "score a saved model on a data split", cmd_evaluate},
      {"gen-dump", "write synthetic points with per-point student loss", cmd_gen_dump},
      {"bounds-check", "check displacement / generator-norm bounds", cmd_bounds_check},
  };
  std::vector<CLI::App*> subs;
  for (const auto& cmd : cmds) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("-c,--config", config_path, "key = value settings file");
    sub->add_option("-s,--set", sets, "override one setting, key=value")->take_all();
    subs.push_back(sub);
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kConfigError;
  }

  RunConfig cfg;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("", 0, "cannot open config file '" + config_path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    std::vector<Override> overrides;
    for (const auto& s : sets) overrides.push_back(parse_override(s));
    std::optional<std::string> env;
    if (const char* e = std::getenv("REGRAFT_SEED")) env = std::string(e);
    cfg = parse_config(text, overrides, env);
  } catch (const ConfigError& e) {
    err << "config error: " << (config_path.empty() ? "" : config_path + ": ") << e.what() << '\n';
    return kConfigError;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      return cmds[i].fn(cfg, out);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kRuntimeError;
    }
  }
  return kConfigError;
}

}  // namespace regraft::cli
