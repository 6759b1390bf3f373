#include "qclab/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qclab {

namespace {

[[noreturn]] void schema(std::size_t line, const std::string& what) {
  const std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
  throw LocatedError(ErrorKind::SchemaError, where + what, line);
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

long long parse_int(const std::string& v, std::size_t line, const std::string& key) {
  long long x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) schema(line, key + " must be an integer, got '" + v + "'");
  return x;
}

double parse_real(const std::string& v, std::size_t line, const std::string& key) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x)) {
    schema(line, key + " must be a real number, got '" + v + "'");
  }
  return x;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Section/key table shared by both readers.
struct Entry {
  std::string value;
  std::size_t line = 0;
};
using Table = std::map<std::string, std::map<std::string, Entry>>;

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s = {"chart", "coframe", "conformal", "domain", "sampling"};
  return s;
}

ChartConfig from_table(const Table& t) {
  auto get = [&](const std::string& sec, const std::string& key) -> const Entry* {
    auto si = t.find(sec);
    if (si == t.end()) return nullptr;
    auto ki = si->second.find(key);
    return ki == si->second.end() ? nullptr : &ki->second;
  };
  for (const auto& [sec, keys] : t) {
    if (!known_sections().count(sec)) {
      schema(keys.empty() ? 0 : keys.begin()->second.line, "unknown section [" + sec + "]");
    }
    static const std::map<std::string, std::set<std::string>> allowed = {
        {"chart", {"version", "name", "n", "coords", "description"}},
        {"coframe", {"eta1", "eta2", "eta3"}},
        {"conformal", {"factor"}},
        {"sampling", {"samples", "seed"}},
    };
    auto ai = allowed.find(sec);
    if (ai == allowed.end()) continue;  // domain keys are coordinate names
    for (const auto& [key, e] : keys) {
      if (!ai->second.count(key)) schema(e.line, "unknown key '" + key + "' in [" + sec + "]");
    }
  }

  ChartConfig cfg;
  const Entry* version = get("chart", "version");
  if (!version) schema(0, "missing [chart] version");
  cfg.version = static_cast<int>(parse_int(version->value, version->line, "version"));
  if (cfg.version != kConfigVersion) {
    schema(version->line, "unsupported config version " + version->value + " (expected " +
                              std::to_string(kConfigVersion) + ")");
  }
  const Entry* n = get("chart", "n");
  if (!n) schema(0, "missing [chart] n");
  cfg.n = static_cast<int>(parse_int(n->value, n->line, "n"));
  if (cfg.n < 1 || cfg.n > 4) schema(n->line, "n must be between 1 and 4");
  const int m = 4 * cfg.n + 3;
  if (const Entry* e = get("chart", "name")) cfg.name = e->value;
  if (const Entry* e = get("chart", "description")) cfg.description = e->value;
  if (const Entry* e = get("chart", "coords")) {
    cfg.coords = split_list(e->value);
    if (static_cast<int>(cfg.coords.size()) != m) {
      schema(e->line, "coords lists " + std::to_string(cfg.coords.size()) + " names, expected m = 4n+3 = " +
                          std::to_string(m));
    }
    std::set<std::string> seen;
    for (const auto& c : cfg.coords) {
      if (c.empty() || !std::isalpha(static_cast<unsigned char>(c[0]))) schema(e->line, "bad coordinate name '" + c + "'");
      if (!seen.insert(c).second) schema(e->line, "duplicate coordinate name '" + c + "'");
    }
  }
  for (int s = 0; s < 3; ++s) {
    const std::string key = "eta" + std::to_string(s + 1);
    const Entry* e = get("coframe", key);
    if (!e) schema(0, "missing [coframe] " + key);
    cfg.eta[s] = split_list(e->value);
    if (static_cast<int>(cfg.eta[s].size()) != m) {
      schema(e->line, key + " has " + std::to_string(cfg.eta[s].size()) + " coefficients, expected m = 4n+3 = " +
                          std::to_string(m));
    }
  }
  if (const Entry* e = get("conformal", "factor")) cfg.factor = e->value;

  auto di = t.find("domain");
  if (di != t.end() && !di->second.empty()) {
    const std::vector<std::string> names = cfg.coords.empty() ? default_coords(cfg.n) : cfg.coords;
    cfg.domain.assign(static_cast<std::size_t>(m), Interval{});
    for (const auto& [key, e] : di->second) {
      auto it = std::find(names.begin(), names.end(), key);
      if (it == names.end()) schema(e.line, "domain entry for unknown coordinate '" + key + "'");
      const std::vector<std::string> lohi = split_list(e.value);
      if (lohi.size() != 2) schema(e.line, "domain entry must be 'lo, hi'");
      Interval iv{parse_real(lohi[0], e.line, key), parse_real(lohi[1], e.line, key)};
      if (!(iv.lo < iv.hi)) schema(e.line, "domain interval for '" + key + "' has lo >= hi");
      cfg.domain[static_cast<std::size_t>(it - names.begin())] = iv;
    }
  }
  if (const Entry* e = get("sampling", "samples")) {
    const long long v = parse_int(e->value, e->line, "samples");
    if (v < 1) schema(e->line, "samples must be positive");
    cfg.samples = static_cast<int>(v);
  }
  if (const Entry* e = get("sampling", "seed")) {
    const long long v = parse_int(e->value, e->line, "seed");
    if (v < 0) schema(e->line, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  return cfg;
}

}  // namespace

ChartConfig parse_config_text(std::string_view text) {
  Table t;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::string pending;        // continued line
  std::size_t pending_line = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string line = trim(raw);
    if (!pending.empty()) {
      line = pending + " " + line;
    } else {
      pending_line = line_no;
    }
    if (!line.empty() && line.back() == '\\') {
      line.pop_back();
      pending = trim(line);
      if (pos > text.size()) schema(pending_line, "file ends inside a continued line");
      continue;
    }
    pending.clear();
    if (line.empty() || line[0] == '#' || line[0] == ';') {
      if (end == text.size()) break;
      continue;
    }
    if (line[0] == '[') {
      if (line.back() != ']') schema(pending_line, "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_sections().count(section)) schema(pending_line, "unknown section [" + section + "]");
      t[section];
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) schema(pending_line, "expected 'key = value'");
      if (section.empty()) schema(pending_line, "key outside of any section");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (key.empty()) schema(pending_line, "empty key");
      if (t[section].count(key)) schema(pending_line, "duplicate key '" + key + "' in [" + section + "]");
      t[section][key] = Entry{value, pending_line};
    }
    if (end == text.size()) break;
  }
  return from_table(t);
}

ChartConfig parse_config_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LocatedError(ErrorKind::SchemaError, std::string("invalid JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) schema(0, "JSON config must be an object");
  Table t;
  auto scalar = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt17(v.get<double>());
    schema(0, "expected a string or number, got " + v.dump());
  };
  auto joined = [&](const nlohmann::json& v) -> std::string {
    if (!v.is_array()) return scalar(v);
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + scalar(v[i]);
    return s;
  };
  for (const auto& [sec, body] : j.items()) {
    if (sec == "schema_version") continue;
    if (!body.is_object()) schema(0, "section '" + sec + "' must be an object");
    auto& tab = t[sec];
    for (const auto& [key, v] : body.items()) tab[key] = Entry{joined(v), 0};
  }
  return from_table(t);
}

ChartConfig parse_config(std::string_view text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' ? parse_config_json(text) : parse_config_text(text);
  }
  return parse_config_text(text);
}

std::string format_config_text(const ChartConfig& cfg) {
  std::ostringstream os;
  const int m = 4 * cfg.n + 3;
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  };
  os << "[chart]\n";
  os << "version = " << cfg.version << "\n";
  if (!cfg.name.empty()) os << "name = " << cfg.name << "\n";
  if (!cfg.description.empty()) os << "description = " << cfg.description << "\n";
  os << "n = " << cfg.n << "\n";
  const std::vector<std::string> names = cfg.coords.empty() ? default_coords(cfg.n) : cfg.coords;
  os << "coords = " << join(names) << "\n\n[coframe]\n";
  for (int s = 0; s < 3; ++s) os << "eta" << s + 1 << " = " << join(cfg.eta[s]) << "\n";
  if (cfg.factor) os << "\n[conformal]\nfactor = " << *cfg.factor << "\n";
  if (!cfg.domain.empty()) {
    os << "\n[domain]\n";
    for (int r = 0; r < m; ++r) {
      os << names[r] << " = " << fmt17(cfg.domain[r].lo) << ", " << fmt17(cfg.domain[r].hi) << "\n";
    }
  }
  os << "\n[sampling]\nsamples = " << cfg.samples << "\nseed = " << cfg.seed << "\n";
  return os.str();
}

std::string format_config_json(const ChartConfig& cfg) {
  nlohmann::ordered_json j;
  const std::vector<std::string> names = cfg.coords.empty() ? default_coords(cfg.n) : cfg.coords;
  j["chart"]["version"] = cfg.version;
  if (!cfg.name.empty()) j["chart"]["name"] = cfg.name;
  if (!cfg.description.empty()) j["chart"]["description"] = cfg.description;
  j["chart"]["n"] = cfg.n;
  j["chart"]["coords"] = names;
  for (int s = 0; s < 3; ++s) j["coframe"]["eta" + std::to_string(s + 1)] = cfg.eta[s];
  if (cfg.factor) j["conformal"]["factor"] = *cfg.factor;
  if (!cfg.domain.empty()) {
    for (std::size_t r = 0; r < cfg.domain.size(); ++r) {
      j["domain"][names[r]] = {cfg.domain[r].lo, cfg.domain[r].hi};
    }
  }
  j["sampling"]["samples"] = cfg.samples;
  j["sampling"]["seed"] = cfg.seed;
  return j.dump(2) + "\n";
}

QCChart chart_from_config(const ChartConfig& cfg) {
  const int m = 4 * cfg.n + 3;
  const std::vector<std::string> names = cfg.coords.empty() ? default_coords(cfg.n) : cfg.coords;
  CoeffTable base;
  for (int s = 0; s < 3; ++s) {
    for (int r = 0; r < m; ++r) {
      try {
        base[s].push_back(expr::parse(cfg.eta[s][r], m, names));
      } catch (const LocatedError& e) {
        throw LocatedError(e.kind(), "eta" + std::to_string(s + 1) + " coefficient " + std::to_string(r + 1) + " ('" +
                                         cfg.eta[s][r] + "'): " + e.what(),
                           e.location());
      }
    }
  }
  std::optional<expr::Expr> factor;
  if (cfg.factor) {
    try {
      factor = expr::parse(*cfg.factor, m, names);
    } catch (const LocatedError& e) {
      throw LocatedError(e.kind(), "conformal factor: " + std::string(e.what()), e.location());
    }
  }
  QCChart chart(cfg.name.empty() ? "config" : cfg.name, cfg.n, names, std::move(base), std::move(factor), cfg.domain);
  chart.set_description(cfg.description);
  chart.set_sampling(cfg.samples, cfg.seed);
  if (chart.factor()) {
    for (const auto& u : declared_points(chart)) {
      const double v = chart.factor()->eval(u);
      if (!(v > 0.0)) fail(ErrorKind::NonPositiveFactor, "conformal factor is not positive at a sample point");
    }
  }
  return chart;
}

ChartConfig config_from_chart(const QCChart& chart) {
  ChartConfig cfg;
  cfg.name = chart.name();
  cfg.description = chart.description();
  cfg.n = chart.n();
  cfg.coords = chart.coords();
  for (int s = 0; s < 3; ++s)
    for (int r = 0; r < chart.m(); ++r) cfg.eta[s].push_back(chart.base_coeff(s, r).print());
  if (chart.factor()) cfg.factor = chart.factor()->print();
  cfg.domain = chart.domain();
  cfg.samples = chart.samples();
  cfg.seed = chart.seed();
  return cfg;
}

PointValidation validate_point(const QCChart& chart, std::span<const double> u, const Settings& settings) {
  PointValidation pv;
  pv.u.assign(u.begin(), u.end());
  try {
    const PointFrame fr = FrameField(chart, u, settings).at(u);
    pv.bi1 = fr.bi1_residual;
    pv.reeb_min_singular = fr.reeb_min_singular;
    pv.check = check_frame(chart, fr, settings.tol);
    if (!(pv.check.max() <= settings.tol.frame)) {
      pv.error_kind = std::string(error_kind_name(ErrorKind::NotQuaternionic));
      pv.message = "frame invariants fail (max residual " + fmt17(pv.check.max()) + ")";
      return pv;
    }
    pv.ok = true;
  } catch (const Error& e) {
    pv.error_kind = std::string(error_kind_name(e.kind()));
    pv.message = e.what();
    // Diagnostics for the failing point when the structure itself is recoverable.
    try {
      const CoframeJet jet = coframe_jet(chart, u);
      const RecoveredStructure st = recover_structure(jet, chart.n(), settings.tol);
      const ReebSolution rs = reeb_solve(jet, st, settings.tol, false);
      pv.bi1 = rs.residual;
      pv.reeb_min_singular = rs.min_singular;
    } catch (const Error&) {
    }
  }
  return pv;
}

bool ValidationReport::ok() const {
  for (const auto& p : points)
    if (!p.ok) return false;
  return true;
}

void ValidationReport::raise_first() const {
  for (const auto& p : points) {
    if (p.ok) continue;
    for (int k = 0; k <= static_cast<int>(ErrorKind::IoError); ++k) {
      if (error_kind_name(static_cast<ErrorKind>(k)) == p.error_kind) fail(static_cast<ErrorKind>(k), p.message);
    }
    fail(ErrorKind::NotQuaternionic, p.message);
  }
}

ValidationReport validate_chart(const QCChart& chart, const std::vector<std::vector<double>>& points,
                                const Settings& settings) {
  ValidationReport rep;
  for (const auto& u : points) rep.points.push_back(validate_point(chart, u, settings));
  return rep;
}

std::vector<std::vector<double>> declared_points(const QCChart& chart) {
  std::vector<std::vector<double>> pts;
  std::vector<double> center(static_cast<std::size_t>(chart.m()), 0.0);
  if (!chart.domain().empty()) {
    for (int r = 0; r < chart.m(); ++r) center[r] = 0.5 * (chart.domain()[r].lo + chart.domain()[r].hi);
  }
  pts.push_back(center);
  for (auto& p : chart.sample_points(chart.samples(), chart.seed())) pts.push_back(std::move(p));
  return pts;
}

QCChart load_config(const std::string& path, bool validate, const Settings& settings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  QCChart chart = chart_from_config(parse_config(ss.str()));
  if (validate) validate_chart(chart, declared_points(chart), settings).raise_first();
  return chart;
}

void save_config(const QCChart& chart, const std::string& path) {
  const ChartConfig cfg = config_from_chart(chart);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write config file '" + path + "'");
  out << (json ? format_config_json(cfg) : format_config_text(cfg));
  if (!out) fail(ErrorKind::IoError, "write to '" + path + "' failed");
}

}  // namespace qclab
