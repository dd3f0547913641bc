#include "lsfem/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace lsfem {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

struct Value {
  std::string text;
  int line = 0;
};

[[noreturn]] void fail(const Value& v, std::string_view key, std::string_view what) {
  throw InputError(fmt::format("config line {}: key '{}': {}", v.line, key, what));
}

std::string as_string(const Value& v, std::string_view key) {
  const std::string_view t = v.text;
  if (t.size() < 2 || t.front() != '"' || t.back() != '"') fail(v, key, "expected a quoted string");
  return std::string(t.substr(1, t.size() - 2));
}

template <class T>
T parse_number(std::string_view t, const Value& v, std::string_view key) {
  t = trim(t);
  T out{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(v, key, fmt::format("cannot parse '{}' as a number", t));
  return out;
}

template <class T>
std::vector<T> as_list(const Value& v, std::string_view key) {
  std::string_view t = v.text;
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') fail(v, key, "expected a bracketed list");
  t = trim(t.substr(1, t.size() - 2));
  std::vector<T> out;
  while (!t.empty()) {
    const auto comma = t.find(',');
    out.push_back(parse_number<T>(t.substr(0, comma), v, key));
    if (comma == std::string_view::npos) break;
    t = trim(t.substr(comma + 1));
  }
  return out;
}

bool as_bool(const Value& v, std::string_view key) {
  if (v.text == "true") return true;
  if (v.text == "false") return false;
  fail(v, key, "expected true or false");
}

}  // namespace

std::string_view to_string(PencilMethod method) {
  switch (method) {
    case PencilMethod::Qz: return "qz";
    case PencilMethod::Reduction: return "reduction";
    case PencilMethod::Auto: return "auto";
  }
  return "?";
}

PencilMethod parse_method(std::string_view name) {
  if (name == "qz") return PencilMethod::Qz;
  if (name == "reduction") return PencilMethod::Reduction;
  if (name == "auto") return PencilMethod::Auto;
  throw InputError(fmt::format("unknown pencil method '{}' (expected qz, reduction or auto)", name));
}

void ExperimentConfig::validate() const {
  if (domain_of(family) != domain) throw InputError("config: family does not belong to the domain");
  if (n_list.empty()) throw InputError("config: n_list is empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw InputError("config: n_list entries must be positive");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw InputError("config: n_list must be strictly increasing");
    if (domain == Domain::Lshape && n_list[i] % 2 != 0)
      throw InputError(fmt::format("config: L-shape needs even N, got {}", n_list[i]));
  }
  if (lambda_list.empty()) throw InputError("config: lambda_list is empty");
  for (double l : lambda_list)
    if (!(l > 0) || !std::isfinite(l)) throw InputError(fmt::format("config: invalid lambda {}", l));
  if (!(mu > 0) || !std::isfinite(mu)) throw InputError(fmt::format("config: invalid mu {}", mu));
  if (!(filter_ratio > 0)) throw InputError("config: filter_ratio must be positive");
  if (n_eigs_report < 1) throw InputError("config: n_eigs_report must be positive");
  if (which < 1) throw InputError("config: which must be positive");
  if (mean_constraints && !bc.all_dirichlet())
    throw InputError("config: mean_constraints require a fully clamped boundary");
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, Value, std::less<>> kv;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InputError(fmt::format("config line {}: expected key = value", line_no));
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw InputError(fmt::format("config line {}: empty key", line_no));
    if (kv.contains(key)) throw InputError(fmt::format("config line {}: duplicate key '{}'", line_no, key));
    kv[key] = Value{std::string(trim(line.substr(eq + 1))), line_no};
  }

  ExperimentConfig c;
  auto take = [&](std::string_view key) -> const Value* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  if (auto v = take("domain")) c.domain = parse_domain(as_string(*v, "domain"));
  c.family = c.domain == Domain::Square ? MeshFamily::SquareRight : MeshFamily::LshapeLeft;
  if (auto v = take("family")) c.family = parse_family(c.domain, as_string(*v, "family"));
  if (auto v = take("n_list")) c.n_list = as_list<int>(*v, "n_list");
  if (auto v = take("lambda_list")) c.lambda_list = as_list<double>(*v, "lambda_list");
  if (auto v = take("mu")) c.mu = parse_number<double>(v->text, *v, "mu");
  if (auto v = take("bc")) c.bc = BoundaryConfig::parse(as_string(*v, "bc"));
  if (auto v = take("mean_constraints")) c.mean_constraints = as_bool(*v, "mean_constraints");
  if (auto v = take("seed")) c.seed = parse_number<std::uint64_t>(v->text, *v, "seed");
  if (auto v = take("filter_ratio")) c.filter_ratio = parse_number<double>(v->text, *v, "filter_ratio");
  if (auto v = take("n_eigs_report")) c.n_eigs_report = parse_number<int>(v->text, *v, "n_eigs_report");
  if (auto v = take("which")) c.which = parse_number<int>(v->text, *v, "which");
  if (auto v = take("method")) c.method = parse_method(as_string(*v, "method"));
  if (auto v = take("out")) c.out = as_string(*v, "out");
  if (auto v = take("reference_file")) {
    std::filesystem::path p = as_string(*v, "reference_file");
    c.reference_file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }

  static constexpr std::string_view known[] = {
      "domain", "family", "n_list", "lambda_list", "mu", "bc", "mean_constraints", "seed",
      "filter_ratio", "n_eigs_report", "which", "method", "out", "reference_file"};
  for (const auto& [key, v] : kv)
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw InputError(fmt::format("config line {}: unknown key '{}'", v.line, key));

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace lsfem
