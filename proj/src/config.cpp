#include "ness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ness/errors.hpp"

namespace ness {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double to_real(std::string_view v, const std::string& path) {
  if (v == "inf" || v == "infinity") return kInfiniteBeta;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(path, "expected a number, got '" + std::string(v) + "'");
  return x;
}

double to_finite(std::string_view v, const std::string& path) {
  const double x = to_real(v, path);
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

int to_int(std::string_view v, const std::string& path) {
  int x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(path, "expected an integer, got '" + std::string(v) + "'");
  return x;
}

bool to_bool(std::string_view v, const std::string& path) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(path, "expected true or false");
}

double chemical_potential(std::string_view v, const std::string& path) {
  const double mu = to_finite(v, path);
  if (mu < 0.0 || mu > kBandTop) throw ConfigError(path, "chemical potential must lie in the band [0, 4]");
  return mu;
}

double inverse_temperature(std::string_view v, const std::string& path) {
  const double b = to_real(v, path);
  if (!(b > 0.0)) throw ConfigError(path, "inverse temperature must be positive or inf");
  return b;
}

const std::set<std::string> kOutputs{"density", "current", "point", "spectral"};

}  // namespace

Junction ScenarioConfig::junction() const {
  if (contacts.empty()) return Junction::two_contacts(t1, d1, t2, d2);
  Junction j;
  for (const ContactPair& c : contacts) {
    if (std::find(j.contacts1.begin(), j.contacts1.end(), c.s1) == j.contacts1.end()) j.contacts1.push_back(c.s1);
    if (std::find(j.contacts2.begin(), j.contacts2.end(), c.s2) == j.contacts2.end()) j.contacts2.push_back(c.s2);
  }
  j.t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(j.n1()), static_cast<Eigen::Index>(j.n2()));
  for (const ContactPair& c : contacts) {
    const auto a = std::find(j.contacts1.begin(), j.contacts1.end(), c.s1) - j.contacts1.begin();
    const auto b = std::find(j.contacts2.begin(), j.contacts2.end(), c.s2) - j.contacts2.begin();
    j.t(a, b) += c.t;
  }
  return j;
}

std::vector<Site> ScenarioConfig::window_sites() const {
  std::vector<Site> out;
  for (int a = window.x1_min; a <= window.x1_max; ++a)
    for (int b = window.x2_min; b <= window.x2_max; ++b) out.push_back({a, b});
  return out;
}

std::vector<Bond> ScenarioConfig::window_bonds() const {
  std::vector<Bond> out;
  for (int a = window.x1_min; a <= window.x1_max; ++a)
    for (int b = window.x2_min; b <= window.x2_max; ++b) {
      if (b < window.x2_max) out.push_back({{a, b}, {a, b + 1}});
      if (a < window.x1_max) out.push_back({{a, b}, {a + 1, b}});
    }
  std::sort(out.begin(), out.end());
  return out;
}

bool ScenarioConfig::wants(std::string_view output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::map<std::string, std::pair<std::string, int>> entries;
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "missing key");
    if (entries.count(key)) throw ConfigError(key, "key given twice");
    entries[key] = {value, line_no};
  }

  for (const auto& [key, entry] : entries) {
    const std::string_view v = entry.first;
    if (key == "mu1") {
      cfg.states[0].mu = chemical_potential(v, key);
    } else if (key == "mu2") {
      cfg.states[1].mu = chemical_potential(v, key);
    } else if (key == "beta1") {
      cfg.states[0].beta = inverse_temperature(v, key);
    } else if (key == "beta2") {
      cfg.states[1].beta = inverse_temperature(v, key);
    } else if (key == "t1") {
      cfg.t1 = to_finite(v, key);
    } else if (key == "t2") {
      cfg.t2 = to_finite(v, key);
    } else if (key == "d1") {
      cfg.d1 = to_int(v, key);
    } else if (key == "d2") {
      cfg.d2 = to_int(v, key);
    } else if (key == "contacts") {
      const auto items = split(v, ';');
      for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string path = "contacts[" + std::to_string(i) + "]";
        const auto w = words(items[i]);
        if (w.size() != 5) throw ConfigError(path, "expected 'x1 x2 y1 y2 t'");
        ContactPair c;
        c.s1 = {to_int(w[0], path + ".x1"), to_int(w[1], path + ".x2")};
        c.s2 = {to_int(w[2], path + ".y1"), to_int(w[3], path + ".y2")};
        c.t = to_finite(w[4], path + ".t");
        cfg.contacts.push_back(c);
      }
      if (cfg.contacts.empty()) throw ConfigError(key, "no contact pairs given");
    } else if (key == "window") {
      const auto w = words(v);
      if (w.size() != 4) throw ConfigError(key, "expected 'x1_min x1_max x2_min x2_max'");
      cfg.window = {to_int(w[0], key + ".x1_min"), to_int(w[1], key + ".x1_max"), to_int(w[2], key + ".x2_min"),
                    to_int(w[3], key + ".x2_max")};
      if (cfg.window.x1_min > cfg.window.x1_max || cfg.window.x2_min > cfg.window.x2_max)
        throw ConfigError(key, "window is empty");
    } else if (key == "energy") {
      const double e = to_finite(v, key);
      if (!(e > 0.0 && e < kBandTop) || e == kBandCenter)
        throw ConfigError(key, "energy must lie in (0, 4) away from 2");
      cfg.energy = e;
    } else if (key == "energy_nodes") {
      cfg.energy_nodes = to_int(v, key);
      if (cfg.energy_nodes < 0) throw ConfigError(key, "must be non-negative");
    } else if (key == "tol") {
      cfg.tol = to_finite(v, key);
      if (!(cfg.tol > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "bound_tol") {
      cfg.bound_tol = to_finite(v, key);
      if (!(cfg.bound_tol > 0.0)) throw ConfigError(key, "must be positive");
    } else if (key == "include_point") {
      cfg.include_point = to_bool(v, key);
    } else if (key == "outputs") {
      cfg.outputs.clear();
      for (std::string_view o : split(v, ',')) {
        if (!kOutputs.count(std::string(o))) throw ConfigError(key, "unknown output '" + std::string(o) + "'");
        cfg.outputs.emplace_back(o);
      }
    } else {
      throw ConfigError(key, "unknown key");
    }
    cfg.keys.insert(key);
  }

  if (!cfg.contacts.empty())
    for (const char* k : {"t1", "d1", "t2", "d2"})
      if (cfg.keys.count(k)) throw ConfigError(k, "cannot be combined with 'contacts'");
  try {
    cfg.junction().validate();
  } catch (const ConfigError& e) {
    throw ConfigError(cfg.contacts.empty() ? "d1" : "contacts", e.what());
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace ness
