#include "regraft/models/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "regraft/error.hpp"
#include "regraft/models/networks.hpp"

namespace regraft::models {

namespace {

constexpr const char* kMagic = "regraft-model";
constexpr const char* kVersion = "v1";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_values(std::ostream& out, const std::vector<double>& values) {
  out << "param_count " << values.size() << '\n';
  for (double v : values) out << fmt17(v) << '\n';
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

// Line-oriented reader that tracks the line number for error messages.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string next(const char* expect) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("unexpected end of file, expected ") + expect, line_ + 1);
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::vector<std::string> field(const std::string& name) {
    const std::string line = next(name.c_str());
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key != name) throw ParseError("expected field '" + name + "', found '" + key + "'", line_);
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    return toks;
  }

  std::size_t count(const std::string& name) {
    auto toks = field(name);
    if (toks.size() != 1) throw ParseError("field '" + name + "' takes exactly one value", line_);
    return to_count(toks[0]);
  }

  std::vector<std::size_t> counts(const std::string& name) {
    std::vector<std::size_t> out;
    for (const auto& t : field(name)) out.push_back(to_count(t));
    return out;
  }

  double real(const std::string& name) {
    auto toks = field(name);
    if (toks.size() != 1) throw ParseError("field '" + name + "' takes exactly one value", line_);
    return to_real(toks[0]);
  }

  std::string word(const std::string& name) {
    auto toks = field(name);
    if (toks.size() != 1) throw ParseError("field '" + name + "' takes exactly one value", line_);
    return toks[0];
  }

  std::string rest(const std::string& name) {
    const std::string line = next(name.c_str());
    if (line.rfind(name + " ", 0) != 0) throw ParseError("expected field '" + name + "'", line_);
    return line.substr(name.size() + 1);
  }

  std::vector<double> values(std::size_t expected) {
    const std::size_t declared = count("param_count");
    if (declared != expected) {
      throw ParseError("declared param_count " + std::to_string(declared) + " but shape requires " +
                           std::to_string(expected),
                       line_);
    }
    std::vector<double> v(expected);
    for (auto& x : v) x = to_real(next("parameter value"));
    std::string extra;
    while (std::getline(in_, extra)) {
      ++line_;
      if (extra.find_first_not_of(" \t\r") != std::string::npos)
        throw ParseError("unexpected trailing content after parameter values", line_);
    }
    return v;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t to_count(const std::string& s) const {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("expected a count, found '" + s + "'", line_);
    return v;
  }

  double to_real(const std::string& s) const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("expected a number, found '" + s + "'", line_);
    return v;
  }

  std::istream& in_;
  std::size_t line_ = 0;
};

std::string read_header(Reader& r) {
  const std::string header = r.next("header");
  std::istringstream ss(header);
  std::string magic, version, kind, extra;
  ss >> magic >> version >> kind;
  if (magic != kMagic) throw ParseError("not a regraft model file (bad header)", r.line());
  if (version != kVersion) throw ParseError("unsupported model file version '" + version + "'", r.line());
  if (kind.empty() || (ss >> extra)) throw ParseError("malformed header", r.line());
  return kind;
}

std::unique_ptr<nd::DifferentiableModel> read_body(Reader& r, const std::string& kind) {
  try {
    if (kind == "mlp" || kind == "generator") {
      const std::size_t in = r.count(kind == "mlp" ? "input_dim" : "latent_dim");
      const auto hidden = r.counts("hidden");
      const Activation act = parse_activation(r.word("activation"));
      const std::size_t out = r.count("output_dim");
      std::vector<std::size_t> sizes{in};
      sizes.insert(sizes.end(), hidden.begin(), hidden.end());
      sizes.push_back(out);
      auto m = std::make_unique<Mlp>(kind, sizes, act);
      m->set_flat_parameters(r.values(mlp_parameter_count(in, hidden, out)));
      return m;
    }
    if (kind == "rbf") {
      const std::size_t in = r.count("input_dim");
      const std::size_t k = r.count("centers");
      auto m = std::make_unique<RbfNet>(in, k);
      m->set_flat_parameters(r.values(m->parameter_count()));
      return m;
    }
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what(), r.line());
  }
  throw ParseError("model kind '" + kind + "' is not a differentiable model", 1);
}

}  // namespace

void write_model(std::ostream& out, const nd::DifferentiableModel& model) {
  out << kMagic << ' ' << kVersion << ' ' << model.kind() << '\n';
  if (const auto* mlp = dynamic_cast<const Mlp*>(&model)) {
    const auto& sizes = mlp->layer_sizes();
    out << (model.kind() == "generator" ? "latent_dim " : "input_dim ") << sizes.front() << '\n';
    out << "hidden";
    const std::vector<std::size_t> hidden(sizes.begin() + 1, sizes.end() - 1);
    if (!hidden.empty()) out << ' ' << join(hidden);
    out << '\n';
    out << "activation " << to_string(mlp->activation()) << '\n';
    out << "output_dim " << sizes.back() << '\n';
  } else if (const auto* rbf = dynamic_cast<const RbfNet*>(&model)) {
    out << "input_dim " << rbf->input_dim() << '\n';
    out << "centers " << rbf->center_count() << '\n';
  } else {
    throw InvalidArgument("write_model: unsupported model kind '" + std::string(model.kind()) + "'");
  }
  write_values(out, model.flat_parameters());
}

void write_kernel_ridge(std::ostream& out, const KernelRidgePredictor& krr) {
  out << kMagic << ' ' << kVersion << " krr\n";
  out << "input_dim " << krr.input_dim() << '\n';
  out << "support_count " << krr.support().rows() << '\n';
  out << "sigma " << fmt17(krr.sigma()) << '\n';
  out << "lambda " << fmt17(krr.lambda()) << '\n';
  std::vector<double> values(krr.support().values().begin(), krr.support().values().end());
  values.insert(values.end(), krr.dual().begin(), krr.dual().end());
  write_values(out, values);
}

void write_teacher(std::ostream& out, const TeacherOracle& teacher) {
  if (teacher.gradient_capable()) {
    write_model(out, teacher.differentiable());
  } else if (const auto* krr = teacher.kernel_ridge()) {
    write_kernel_ridge(out, *krr);
  } else {
    const auto* cmd = teacher.command();
    out << kMagic << ' ' << kVersion << " command\n";
    out << "input_dim " << cmd->input_dim << '\n';
    out << "command " << cmd->command << '\n';
  }
}

std::unique_ptr<nd::DifferentiableModel> read_model(std::istream& in) {
  Reader r(in);
  const std::string kind = read_header(r);
  return read_body(r, kind);
}

TeacherOracle read_teacher(std::istream& in) {
  Reader r(in);
  const std::string kind = read_header(r);
  if (kind == "krr") {
    const std::size_t d = r.count("input_dim");
    const std::size_t n = r.count("support_count");
    const double sigma = r.real("sigma");
    const double lambda = r.real("lambda");
    auto values = r.values(n * d + n);
    std::vector<double> support(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n * d));
    std::vector<double> dual(values.begin() + static_cast<std::ptrdiff_t>(n * d), values.end());
    try {
      return TeacherOracle::from_kernel_ridge(
          KernelRidgePredictor(nd::Tensor2(n, d, std::move(support)), std::move(dual), sigma, lambda));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), r.line());
    }
  }
  if (kind == "command") {
    const std::size_t d = r.count("input_dim");
    return TeacherOracle::from_command(CommandTeacher{r.rest("command"), d});
  }
  std::shared_ptr<const nd::DifferentiableModel> model = read_body(r, kind);
  return TeacherOracle::from_model(std::move(model));
}

void save_model(const nd::DifferentiableModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write model file '" + path.string() + "'");
  write_model(out, model);
  if (!out) throw InvalidArgument("failed writing model file '" + path.string() + "'");
}

std::unique_ptr<nd::DifferentiableModel> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read model file '" + path.string() + "'");
  return read_model(in);
}

void save_teacher(const TeacherOracle& teacher, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write model file '" + path.string() + "'");
  write_teacher(out, teacher);
}

TeacherOracle load_teacher(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read model file '" + path.string() + "'");
  return read_teacher(in);
}

}  // namespace regraft::models
