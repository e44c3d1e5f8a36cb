#include "agentinv/params_io.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace agentinv {

namespace {

constexpr std::array<std::string_view, 9> kKeys = {
    "lambda", "r", "alpha", "beta", "mu", "delta", "theta", "gamma", "epsilon"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool known_key(std::string_view key) {
  for (auto k : kKeys) {
    if (k == key) return true;
  }
  return false;
}

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ModelError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

}  // namespace

void ParamSource::read(std::istream& in, std::string_view origin) {
  std::map<std::string, double> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto where = fmt::format("{}:{}", origin, lineno);
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ModelError(fmt::format("{}: expected 'key = value'", where));
    }
    const auto key = std::string(trim(body.substr(0, eq)));
    if (!known_key(key)) throw ModelError(fmt::format("{}: unknown key '{}'", where, key));
    if (seen.count(key)) throw ModelError(fmt::format("{}: duplicate key '{}'", where, key));
    seen[key] = parse_number(trim(body.substr(eq + 1)), where);
  }
  for (auto& [k, v] : seen) values_[k] = v;
}

void ParamSource::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError(fmt::format("cannot open parameter file '{}'", path.string()));
  read(in, path.string());
}

void ParamSource::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ModelError(fmt::format("override '{}' is not key=value", assignment));
  }
  const auto key = std::string(trim(assignment.substr(0, eq)));
  if (!known_key(key)) throw ModelError(fmt::format("unknown key '{}'", key));
  values_[key] = parse_number(trim(assignment.substr(eq + 1)), key);
}

void ParamSource::set(const std::string& key, double value) {
  if (!known_key(key)) throw ModelError(fmt::format("unknown key '{}'", key));
  values_[key] = value;
}

void ParamSource::assign(const ModelParams& p) {
  values_ = {{"lambda", p.lambda}, {"r", static_cast<double>(p.r)},
             {"alpha", p.alpha},   {"beta", p.beta},
             {"mu", p.mu},         {"delta", p.delta},
             {"theta", p.theta},   {"gamma", p.gamma},
             {"epsilon", p.epsilon}};
}

ModelParams ParamSource::build() const {
  std::string missing;
  for (auto k : kKeys) {
    if (!values_.count(std::string(k))) missing += (missing.empty() ? "" : ", ") + std::string(k);
  }
  if (!missing.empty()) throw ModelError("missing parameters: " + missing);

  const double r = values_.at("r");
  if (!(r >= 1.0) || r != std::floor(r) || r > 9.0e15) {
    throw ModelError("r must be an integer >= 1");
  }
  ModelParams p;
  p.lambda = values_.at("lambda");
  p.r = static_cast<std::int64_t>(r);
  p.alpha = values_.at("alpha");
  p.beta = values_.at("beta");
  p.mu = values_.at("mu");
  p.delta = values_.at("delta");
  p.theta = values_.at("theta");
  p.gamma = values_.at("gamma");
  p.epsilon = values_.at("epsilon");
  return validate(p);
}

ModelParams read_params(std::istream& in) {
  ParamSource src;
  src.read(in);
  return src.build();
}

std::string format_params(const ModelParams& p) {
  return fmt::format(
      "lambda = {}\nr = {}\nalpha = {}\nbeta = {}\nmu = {}\ndelta = {}\ntheta = {}\n"
      "gamma = {}\nepsilon = {}\n",
      p.lambda, p.r, p.alpha, p.beta, p.mu, p.delta, p.theta, p.gamma, p.epsilon);
}

}  // namespace agentinv
