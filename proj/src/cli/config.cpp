#include "regraft/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "regraft/ndcore/rng.hpp"

namespace regraft::cli {

ConfigError::ConfigError(const std::string& key, std::size_t line, const std::string& what)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? what : "key '" + key + "': " + what)),
      key_(key),
      line_(line) {}

namespace {

using C = ValueType;

KeyInfo k(std::string key, ValueType t, std::string def, std::string help, std::vector<std::string> choices = {}) {
  return KeyInfo{std::move(key), t, std::move(def), std::move(choices), std::move(help)};
}

std::vector<KeyInfo> build_schema() {
  const std::vector<std::string> act{"tanh", "relu", "softplus"};
  const std::vector<std::string> loss{"mse", "logcosh"};
  return {
      k("seed", C::Count, "0", "base seed; the per-purpose seeds derive from it"),
      k("seed.data", C::Seed, "auto", "x_p sampling, split shuffle and synthetic datasets"),
      k("seed.init", C::Seed, "auto", "model initialization"),
      k("seed.synth", C::Seed, "auto", "x0 / z / y_rand / differential evolution"),
      k("output_dir", C::String, "out", "directory for all outputs"),

      k("data.source", C::Choice, "friedman", "where the real data comes from",
        {"csv", "idx", "friedman", "protein", "none"}),
      k("data.path", C::String, "", "csv file (data.source = csv)"),
      k("data.target", C::String, "", "target column name or 0-based index; empty = last column"),
      k("data.images", C::String, "", "idx image file"),
      k("data.labels", C::String, "", "idx label file"),
      k("data.samples", C::Count, "0", "rows for synthetic sources; 0 = source default"),
      k("data.noise", C::Real, "1", "friedman noise level"),
      k("data.standardize", C::Bool, "true", "standardize features"),
      k("data.standardize_target", C::Bool, "true", "standardize the target as well"),
      k("data.scaling", C::Choice, "whole", "statistics from the whole dataset or the train split",
        {"whole", "train"}),
      k("split.train", C::Count, "5000", "training rows"),
      k("split.val_fraction", C::Real, "0.1", "validation share of the remainder"),

      k("teacher.kind", C::Choice, "mlp", "teacher model", {"mlp", "krr", "command"}),
      k("teacher.hidden", C::CountList, "500", "hidden layer sizes"),
      k("teacher.activation", C::Choice, "tanh", "hidden activation", act),
      k("teacher.epochs", C::Count, "100", "training epochs over the train split"),
      k("teacher.batch_size", C::Count, "50", "minibatch size"),
      k("teacher.lr", C::Real, "1e-3", "RMSProp learning rate"),
      k("teacher.weight_decay", C::Real, "1e-5", "weight decay"),
      k("teacher.loss", C::Choice, "mse", "training loss", loss),
      k("teacher.sigma", C::Real, "0", "kernel bandwidth; 0 = sqrt(d * feature variance / 2)"),
      k("teacher.lambda", C::Real, "1e-3", "kernel ridge regularization"),
      k("teacher.command", C::String, "", "external predictor command (teacher.kind = command)"),
      k("teacher.path", C::String, "", "teacher model file; empty = <output_dir>/teacher.model"),

      k("student.kind", C::Choice, "mlp", "student model", {"mlp", "rbf"}),
      k("student.hidden", C::CountList, "50", "hidden layer sizes"),
      k("student.activation", C::Choice, "tanh", "hidden activation", act),
      k("student.centers", C::Count, "100", "RBF centers"),
      k("student.width", C::String, "auto", "initial RBF width; auto = median distance between initial centers"),
      k("student.optimizer", C::Choice, "rmsprop", "student optimizer", {"gd", "rmsprop"}),
      k("student.lr", C::Real, "1e-3", "learning rate"),
      k("student.weight_decay", C::Real, "1e-5", "weight decay"),
      k("student.rho", C::Real, "0.99", "RMSProp decay"),
      k("student.eps", C::Real, "1e-8", "RMSProp epsilon"),
      k("student.loss", C::Choice, "mse", "student loss", loss),
      k("student.path", C::String, "", "student model file; empty = <output_dir>/best.model"),

      k("strategy", C::Choice, "custom", "preset for synth.method and alpha.*",
        {"custom", "random", "generator-decreasing", "generator-alpha1", "direct-decreasing", "direct-alpha1"}),
      k("synth.method", C::Choice, "direct", "how x_g is produced", {"random", "generator", "direct"}),
      k("epochs", C::Count, "2000", "t_max"),
      k("batches", C::Count, "10", "n_s, student batches per epoch"),
      k("batch_size", C::Count, "50", "m"),
      k("alpha.schedule", C::Choice, "linear", "alpha schedule", {"constant", "linear"}),
      k("alpha.value", C::Real, "0", "constant alpha"),
      k("alpha.start", C::Real, "1", "linear schedule start"),
      k("alpha.end", C::Real, "0", "linear schedule end"),
      k("alpha.double", C::Bool, "true", "double the active batch when alpha is constant 0 or 1"),
      k("validation.every", C::Count, "1", "validation cadence in epochs"),

      k("sampler.kind", C::Choice, "gaussian", "x_p / x0 sampler", {"gaussian", "latin-hypercube", "halton", "domain"}),
      k("sampler.bounds", C::Choice, "auto", "auto: validation range (+-3 without one) for qMC, none for domain",
        {"auto", "fixed", "none"}),
      k("sampler.lo", C::Real, "-3", "lower bound (sampler.bounds = fixed)"),
      k("sampler.hi", C::Real, "3", "upper bound (sampler.bounds = fixed)"),
      k("sampler.simplex", C::Bool, "false", "renormalize domain samples to sum to 1"),

      k("loss.discrepancy", C::Choice, "squared", "teacher/student discrepancy", {"squared", "logcosh"}),
      k("loss.epsilon", C::Real, "1", "discrepancy weight"),
      k("loss.input_penalty", C::Choice, "l2-squared", "input norm penalty", {"l2-squared", "l1"}),
      k("loss.beta", C::Real, "1e-5", "input penalty weight"),
      k("loss.output_penalty", C::Choice, "student-squared", "output penalty",
        {"none", "student-squared", "teacher-random-target"}),
      k("loss.gamma", C::Real, "1e-5", "output penalty weight"),
      k("loss.random_target", C::Choice, "none", "y_rand policy", {"none", "integer-uniform", "real-uniform"}),
      k("loss.literal_input_output", C::Bool, "false", "use gamma*|x|^2 as the output term"),

      k("direct.method", C::Choice, "rmsprop", "direct optimizer", {"gd", "rmsprop", "differential-evolution"}),
      k("direct.eta", C::Real, "0.1", "step size"),
      k("direct.steps", C::Count, "2", "tau_max"),
      k("direct.rho", C::Real, "0.99", "RMSProp decay"),
      k("direct.eps", C::Real, "1e-8", "RMSProp epsilon"),
      k("de.population", C::Count, "15", "sub-population size per row"),
      k("de.F", C::Real, "0.8", "differential weight"),
      k("de.CR", C::Real, "0.9", "crossover rate"),
      k("de.iterations", C::Count, "25", "generations"),

      k("generator.latent", C::Count, "10", "latent dimension"),
      k("generator.hidden", C::CountList, "128", "hidden layer sizes"),
      k("generator.activation", C::Choice, "relu", "hidden activation", act),
      k("generator.lr", C::Real, "1e-3", "RMSProp learning rate"),
      k("generator.rounds", C::Count, "1", "generator updates per student batch"),
      k("generator.reemit", C::Bool, "true", "emit x_g from the updated generator"),

      k("evaluate.model", C::String, "", "model file; empty = teacher.path"),
      k("evaluate.split", C::Choice, "test", "rows to score", {"train", "validation", "test", "all"}),
      k("evaluate.metric", C::Choice, "rmse", "metric", {"rmse", "mae"}),

      k("dump.count", C::Count, "500", "points to emit"),
      k("dump.tag", C::String, "0", "epoch_tag column value"),
      k("dump.generator_rounds", C::Count, "200", "generator rounds before emitting"),

      k("bounds.trials", C::Count, "100", "direct-optimization traces to check"),
      k("bounds.generator_rounds", C::Count, "0", "generator rounds for the norm check; 0 skips it"),
  };
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    out.push_back(trim(s.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void check_value(const KeyInfo& info, const std::string& value, std::size_t line) {
  std::uint64_t u = 0;
  double r = 0.0;
  switch (info.type) {
    case C::Count:
      if (!parse_u64(value, u)) throw ConfigError(info.key, line, "expected a non-negative integer, got '" + value + "'");
      break;
    case C::Seed:
      if (value != "auto" && !parse_u64(value, u))
        throw ConfigError(info.key, line, "expected 'auto' or a non-negative integer, got '" + value + "'");
      break;
    case C::Real:
      if (!parse_real(value, r)) throw ConfigError(info.key, line, "expected a finite real number, got '" + value + "'");
      break;
    case C::Bool:
      if (value != "true" && value != "false") throw ConfigError(info.key, line, "expected true|false, got '" + value + "'");
      break;
    case C::Choice: {
      for (const auto& c : info.choices)
        if (c == value) return;
      std::string list;
      for (const auto& c : info.choices) list += (list.empty() ? "" : "|") + c;
      throw ConfigError(info.key, line, "expected one of " + list + ", got '" + value + "'");
    }
    case C::CountList:
      if (value.empty() || value == "none") return;
      for (const auto& item : split_list(value))
        if (!parse_u64(item, u) || u == 0)
          throw ConfigError(info.key, line, "expected comma-separated positive integers, got '" + value + "'");
      break;
    case C::String:
      break;
  }
}

}  // namespace

const std::vector<KeyInfo>& schema() {
  static const std::vector<KeyInfo> s = build_schema();
  return s;
}

const KeyInfo* find_key(std::string_view key) {
  for (const auto& k : schema())
    if (k.key == key) return &k;
  return nullptr;
}

RunConfig::RunConfig() {
  for (const auto& k : schema()) values_.emplace(k.key, k.default_value);
}

const std::string& RunConfig::raw(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(std::string(key), 0, "not a known setting");
  return it->second;
}

std::uint64_t RunConfig::count(std::string_view key) const {
  std::uint64_t u = 0;
  if (!parse_u64(raw(key), u)) throw ConfigError(std::string(key), line_of(key), "not an integer");
  return u;
}

double RunConfig::real(std::string_view key) const {
  double r = 0.0;
  if (!parse_real(raw(key), r)) throw ConfigError(std::string(key), line_of(key), "not a real number");
  return r;
}

bool RunConfig::flag(std::string_view key) const { return raw(key) == "true"; }

std::vector<std::size_t> RunConfig::counts(std::string_view key) const {
  const std::string& v = raw(key);
  std::vector<std::size_t> out;
  if (v.empty() || v == "none") return out;
  for (const auto& item : split_list(v)) {
    std::uint64_t u = 0;
    parse_u64(item, u);
    out.push_back(static_cast<std::size_t>(u));
  }
  return out;
}

std::uint64_t RunConfig::seed(std::string_view key, std::uint64_t stream) const {
  const std::string& v = raw(key);
  if (v == "auto") return nd::derive_seed(count("seed"), stream);
  return count(key);
}

std::size_t RunConfig::line_of(std::string_view key) const {
  auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

void RunConfig::set(const std::string& key, const std::string& value, std::size_t line) {
  const KeyInfo* info = find_key(key);
  if (!info) throw ConfigError(key, line, "unknown setting");
  check_value(*info, value, line);
  values_[key] = value;
  lines_[key] = line;
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  out << "# resolved settings\n";
  for (const auto& k : schema()) out << k.key << " = " << raw(k.key) << "\n";
  return out.str();
}

std::vector<Override> strategy_preset(std::string_view name) {
  if (name == "random")
    return {{"synth.method", "random"}, {"alpha.schedule", "constant"}, {"alpha.value", "0"}, {"alpha.double", "true"}};
  if (name == "generator-decreasing")
    return {{"synth.method", "generator"}, {"alpha.schedule", "linear"}, {"alpha.start", "1"}, {"alpha.end", "0"}};
  if (name == "generator-alpha1")
    return {{"synth.method", "generator"}, {"alpha.schedule", "constant"}, {"alpha.value", "1"}, {"alpha.double", "true"}};
  if (name == "direct-decreasing")
    return {{"synth.method", "direct"}, {"alpha.schedule", "linear"}, {"alpha.start", "1"}, {"alpha.end", "0"}};
  if (name == "direct-alpha1")
    return {{"synth.method", "direct"}, {"alpha.schedule", "constant"}, {"alpha.value", "1"}, {"alpha.double", "true"}};
  return {};
}

Override parse_override(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("", 0, "override '" + std::string(text) + "' is not key=value");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

RunConfig parse_config(std::string_view text, const std::vector<Override>& overrides,
                       std::optional<std::string> seed_env) {
  struct Entry {
    std::string key, value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (!t.empty()) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value', got '" + t + "'");
      std::string key = trim(std::string_view(t).substr(0, eq));
      std::string value = trim(std::string_view(t).substr(eq + 1));
      if (key.empty()) throw ConfigError("", line_no, "missing key before '='");
      if (!find_key(key)) throw ConfigError(key, line_no, "unknown setting");
      if (auto it = seen.find(key); it != seen.end())
        throw ConfigError(key, line_no, "already set on line " + std::to_string(it->second));
      seen[key] = line_no;
      entries.push_back({std::move(key), std::move(value), line_no});
    }
    if (nl == std::string_view::npos) break;
  }
  for (const auto& [k, v] : overrides) {
    if (!find_key(k)) throw ConfigError(k, 0, "unknown setting (from --set)");
    entries.push_back({k, v, 0});
  }

  RunConfig cfg;
  // The preset is looked up first so that explicit keys can refine it.
  std::string strategy = "custom";
  std::size_t strategy_line = 0;
  for (const auto& e : entries)
    if (e.key == "strategy") {
      strategy = e.value;
      strategy_line = e.line;
    }
  cfg.set("strategy", strategy, strategy_line);
  for (const auto& [k, v] : strategy_preset(strategy)) cfg.set(k, v, 0);
  for (const auto& e : entries)
    if (e.key != "strategy") cfg.set(e.key, e.value, e.line);
  if (seed_env) {
    try {
      cfg.set("seed", *seed_env, 0);
    } catch (const ConfigError&) {
      throw ConfigError("seed", 0, "REGRAFT_SEED must be a non-negative integer, got '" + *seed_env + "'");
    }
  }
  return cfg;
}

}  // namespace regraft::cli
