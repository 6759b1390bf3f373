#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qclab/catalog.hpp"
#include "qclab/config_io.hpp"
#include "qclab/report.hpp"

namespace qclab::cli {

namespace {

using Json = nlohmann::ordered_json;

enum class Format { text, json, csv };

struct Options {
  std::string chart;
  std::string config;
  std::optional<int> points;
  std::vector<std::string> at;
  int fiber = 4;
  std::optional<std::uint64_t> seed;
  Settings settings;
  Format format = Format::text;
  int threads = 1;
  bool oracle = false;
  bool no_validate = false;
  std::string output;
  std::string config_dir;
  std::optional<int> grid;
  std::string axes = "1,2";
};

// A thrown exit request with the exit code and message.
struct Exit {
  int code;
  std::string message;
};

bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::SyntaxError:
    case ErrorKind::UnknownIdentifier:
    case ErrorKind::DimensionExceeded:
    case ErrorKind::SchemaError:
    case ErrorKind::IoError:
    case ErrorKind::UnsupportedDimension:
    case ErrorKind::SizeMismatch:
    case ErrorKind::NonPositiveFactor:
      return true;
    default:
      return false;
  }
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<Cell>> rows;
};

Json rows_json(const Table& t) {
  Json arr = Json::array();
  for (const auto& r : t.rows) {
    Json o = Json::object();
    for (std::size_t c = 0; c < t.cols.size(); ++c) {
      std::visit([&](const auto& v) { o[t.cols[c]] = v; }, r[c]);
    }
    arr.push_back(std::move(o));
  }
  return arr;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.cols.size(); ++c) os << (c ? "," : "") << t.cols[c];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << ",";
      if (const double* d = std::get_if<double>(&r[c])) os << fmt17(*d);
      else if (const long long* i = std::get_if<long long>(&r[c])) os << *i;
      else os << csv_escape(std::get<std::string>(r[c]));
    }
    os << "\n";
  }
}

void write_text_table(const Table& t, std::ostream& os) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width;
  for (const auto& c : t.cols) width.push_back(c.size());
  for (const auto& r : t.rows) {
    std::vector<std::string> line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      std::string s;
      if (const double* d = std::get_if<double>(&r[c])) s = fmt6(*d);
      else if (const long long* i = std::get_if<long long>(&r[c])) s = std::to_string(*i);
      else s = std::get<std::string>(r[c]);
      width[c] = std::max(width[c], s.size());
      line.push_back(std::move(s));
    }
    cells.push_back(std::move(line));
  }
  auto emit = [&](const std::vector<std::string>& line) {
    std::string s;
    for (std::size_t c = 0; c < line.size(); ++c) {
      std::string cell = line[c];
      if (c + 1 < line.size()) cell.resize(width[c], ' ');
      s += (c ? "  " : "") + cell;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    os << s << "\n";
  };
  emit(t.cols);
  for (const auto& l : cells) emit(l);
}

Json settings_json(const Options& o, const QCChart& chart, std::size_t npoints) {
  const Tolerances& t = o.settings.tol;
  Json j;
  j["tolerances"] = {{"algebra", t.algebra},
                     {"frame", t.frame},
                     {"structure", t.structure},
                     {"levi", t.levi},
                     {"biquard", t.biquard},
                     {"ill_conditioned", t.ill_conditioned},
                     {"connection", t.connection},
                     {"torsion", t.torsion},
                     {"u_tensor_n1", t.u_tensor_n1},
                     {"curvature", t.curvature},
                     {"ricci", t.ricci},
                     {"alpha", t.alpha},
                     {"normal", t.normal},
                     {"t0", t.t0},
                     {"oracle", t.oracle},
                     {"cr", t.cr},
                     {"levi_invariance", t.levi_invariance}};
  j["steps"] = {{"fd", o.settings.steps.fd}, {"curv", o.settings.steps.curv}, {"order", o.settings.steps.order}};
  j["seed"] = o.seed.value_or(chart.seed());
  j["points"] = npoints;
  j["fiber"] = o.fiber;
  return j;
}

Json chart_json(const QCChart& c) {
  return {{"name", c.name()}, {"n", c.n()}, {"m", c.m()}, {"description", c.description()}};
}

void add_u(std::vector<Cell>& row, const std::vector<double>& u) {
  for (double v : u) row.emplace_back(v);
}

class Runner {
 public:
  Runner(const Options& o, std::ostream& out, std::ostream& err) : o_(o), out_(out), err_(err) {}

  QCChart load_chart(bool validate_on_load) const {
    if (o_.chart.empty() == o_.config.empty()) throw Exit{2, "exactly one of --chart or --config is required"};
    try {
      if (!o_.chart.empty()) return catalog_chart(o_.chart);
      return load_config(o_.config, validate_on_load && !o_.no_validate, o_.settings);
    } catch (const Error& e) {
      throw Exit{is_input_error(e.kind()) ? 2 : 1, std::string(error_kind_name(e.kind())) + ": " + e.what()};
    }
  }

  std::vector<std::vector<double>> points(const QCChart& chart) const {
    std::vector<std::vector<double>> pts;
    if (!o_.at.empty()) {
      for (const auto& s : o_.at) {
        std::vector<double> u;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          try {
            std::size_t used = 0;
            u.push_back(std::stod(tok, &used));
            if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
          } catch (const std::exception&) {
            throw Exit{2, "bad coordinate '" + tok + "' in --at"};
          }
        }
        if (static_cast<int>(u.size()) != chart.m()) {
          throw Exit{2, "--at point has " + std::to_string(u.size()) + " coordinates, chart has m = " +
                            std::to_string(chart.m())};
        }
        pts.push_back(std::move(u));
      }
      return pts;
    }
    if (o_.grid) return grid_points(chart);
    if (o_.points) return chart.sample_points(*o_.points, o_.seed.value_or(chart.seed()));
    if (o_.seed) {
      pts.push_back(declared_points(chart).front());
      for (auto& p : chart.sample_points(chart.samples(), *o_.seed)) pts.push_back(std::move(p));
      return pts;
    }
    return declared_points(chart);
  }

  std::vector<std::vector<double>> grid_points(const QCChart& chart) const {
    std::vector<int> axes;
    std::stringstream ss(o_.axes);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      int a = 0;
      try {
        a = std::stoi(tok);
      } catch (const std::exception&) {
        throw Exit{2, "bad axis '" + tok + "' in --axes"};
      }
      if (a < 1 || a > chart.m()) throw Exit{2, "axis " + tok + " out of range 1.." + std::to_string(chart.m())};
      axes.push_back(a - 1);
    }
    if (axes.size() != 2 || axes[0] == axes[1]) throw Exit{2, "--axes needs two distinct coordinate indices"};
    const int g = *o_.grid;
    std::vector<double> center = declared_points(chart).front();
    auto range = [&](int r) {
      Interval iv = chart.domain().empty() ? Interval{} : chart.domain()[r];
      const double w = iv.hi - iv.lo;
      return Interval{iv.lo + 0.05 * w, iv.hi - 0.05 * w};
    };
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        std::vector<double> u = center;
        const Interval a = range(axes[0]);
        const Interval b = range(axes[1]);
        u[axes[0]] = g == 1 ? 0.5 * (a.lo + a.hi) : a.lo + (a.hi - a.lo) * i / (g - 1);
        u[axes[1]] = g == 1 ? 0.5 * (b.lo + b.hi) : b.lo + (b.hi - b.lo) * j / (g - 1);
        pts.push_back(std::move(u));
      }
    }
    return pts;
  }

  RunSpec spec(const QCChart& chart) const {
    RunSpec s;
    s.chart = chart;
    s.points = points(chart);
    s.fiber = o_.fiber;
    s.seed = o_.seed.value_or(chart.seed());
    s.settings = o_.settings;
    s.threads = o_.threads;
    s.oracle = o_.oracle;
    return s;
  }

  std::vector<std::string> u_cols(const QCChart& chart) const { return chart.coords(); }

  void emit(const std::string& command, const QCChart& chart, std::size_t npoints, const Table& t, Json summary,
            const std::vector<std::string>& text_summary) const {
    std::ostringstream os;
    switch (o_.format) {
      case Format::json: {
        Json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["command"] = command;
        doc["chart"] = chart_json(chart);
        doc["settings"] = settings_json(o_, chart, npoints);
        doc["rows"] = rows_json(t);
        doc["summary"] = std::move(summary);
        os << doc.dump(2) << "\n";
        break;
      }
      case Format::csv:
        write_csv(t, os);
        break;
      case Format::text:
        os << "# " << command << ": " << chart.name() << " (n = " << chart.n() << ", m = " << chart.m() << ")\n";
        write_text_table(t, os);
        for (const auto& l : text_summary) os << l << "\n";
        break;
    }
    if (o_.output.empty()) {
      out_ << os.str();
    } else {
      std::ofstream f(o_.output, std::ios::binary);
      if (!f) throw Exit{2, "cannot write output file '" + o_.output + "'"};
      f << os.str();
    }
  }

  int list() const {
    struct Item {
      std::string name;
      int n;
      std::string description;
      std::string source;
    };
    std::vector<Item> items;
    for (const auto& e : catalog_entries()) items.push_back({e.name, e.n, e.description, "builtin"});
    if (!o_.config_dir.empty()) {
      namespace fs = std::filesystem;
      std::error_code ec;
      if (!fs::is_directory(o_.config_dir, ec)) throw Exit{2, "not a directory: " + o_.config_dir};
      std::vector<fs::path> files;
      for (const auto& de : fs::directory_iterator(o_.config_dir, ec)) {
        const auto ext = de.path().extension().string();
        if (de.is_regular_file() && (ext == ".qc" || ext == ".json")) files.push_back(de.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& p : files) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
          const ChartConfig cfg = parse_config(ss.str());
          items.push_back({cfg.name.empty() ? p.stem().string() : cfg.name, cfg.n, cfg.description, p.string()});
        } catch (const Error& e) {
          err_ << "skipping " << p.string() << ": " << e.what() << "\n";
        }
      }
    }
    std::ostringstream os;
    if (o_.format == Format::json) {
      Json arr = Json::array();
      for (const auto& it : items) {
        arr.push_back({{"name", it.name},
                       {"n", it.n},
                       {"dimension", 4 * it.n + 3},
                       {"description", it.description},
                       {"source", it.source}});
      }
      os << arr.dump(2) << "\n";
    } else {
      Table t;
      t.cols = {"name", "n", "dimension", "source", "description"};
      for (const auto& it : items) {
        t.rows.push_back({it.name, static_cast<long long>(it.n), static_cast<long long>(4 * it.n + 3), it.source,
                          it.description});
      }
      if (o_.format == Format::csv) write_csv(t, os);
      else write_text_table(t, os);
    }
    out_ << os.str();
    return 0;
  }

  int validate() const {
    const QCChart chart = load_chart(false);
    const std::vector<std::vector<double>> pts = points(chart);
    const auto res = parallel_map<PointValidation>(static_cast<int>(pts.size()), o_.threads,
                                                   [&](int i) { return validate_point(chart, pts[i], o_.settings); });
    Table t;
    t.cols = {"index"};
    for (const auto& c : u_cols(chart)) t.cols.push_back(c);
    for (const char* c : {"status", "error_kind", "frame_residual", "bi1", "reeb_min_singular", "message"}) {
      t.cols.push_back(c);
    }
    int failed = 0;
    for (std::size_t i = 0; i < res.size(); ++i) {
      const PointValidation& p = res[i];
      std::vector<Cell> row{static_cast<long long>(i)};
      add_u(row, p.u);
      row.emplace_back(std::string(p.ok ? "pass" : "fail"));
      row.emplace_back(p.error_kind);
      row.emplace_back(p.check.max());
      row.emplace_back(p.bi1);
      row.emplace_back(p.reeb_min_singular);
      row.emplace_back(p.message);
      t.rows.push_back(std::move(row));
      if (!p.ok) ++failed;
    }
    Json summary = {{"passed", static_cast<int>(res.size()) - failed}, {"failed", failed}, {"ok", failed == 0}};
    emit("validate", chart, pts.size(), t, summary,
         {"# " + std::to_string(res.size() - failed) + "/" + std::to_string(res.size()) + " points pass"});
    return failed == 0 ? 0 : 1;
  }

  int invariants() const {
    const QCChart chart = load_chart(true);
    const RunSpec s = spec(chart);
    const auto rows = run_invariants(s);
    Table t;
    t.cols = {"index"};
    for (const auto& c : u_cols(chart)) t.cols.push_back(c);
    for (const char* c : {"status", "T0_norm", "U_norm", "scal", "tau", "ricci_residual", "alpha_residual",
                          "connection_residual", "torsion_residual", "error"}) {
      t.cols.push_back(c);
    }
    const Tolerances& tol = o_.settings.tol;
    int failed = 0;
    double max_t0 = 0.0;
    for (const auto& r : rows) {
      const bool ok = r.error.empty() && r.ricci_residual <= tol.ricci && r.alpha_residual <= tol.alpha &&
                      r.connection_residual <= tol.connection && r.torsion_residual <= tol.torsion;
      if (!ok) ++failed;
      max_t0 = std::max(max_t0, r.T0_norm);
      std::vector<Cell> row{static_cast<long long>(r.index)};
      add_u(row, r.u);
      row.emplace_back(std::string(ok ? "pass" : "fail"));
      for (double v : {r.T0_norm, r.U_norm, r.scal, r.tau, r.ricci_residual, r.alpha_residual, r.connection_residual,
                       r.torsion_residual}) {
        row.emplace_back(v);
      }
      row.emplace_back(r.error);
      t.rows.push_back(std::move(row));
    }
    Json summary = {{"failed", failed}, {"max_T0_norm", max_t0}, {"ok", failed == 0}};
    emit("invariants", chart, s.points.size(), t, summary,
         {"# max ||T0|| = " + fmt6(max_t0), "# " + std::to_string(rows.size() - failed) + "/" +
                                                std::to_string(rows.size()) + " points pass"});
    return failed == 0 ? 0 : 1;
  }

  int normality(bool sweep) const {
    const QCChart chart = load_chart(true);
    const RunSpec s = spec(chart);
    const auto rows = run_normality(s);
    Table t;
    t.cols = {"index", "point", "fiber"};
    for (const auto& c : u_cols(chart)) t.cols.push_back(c);
    for (const char* c : {"fiber_x1", "fiber_x2", "fiber_x3", "status"}) t.cols.push_back(c);
    if (sweep) {
      for (const char* c : {"T0_norm", "U_norm", "scal", "tau", "normality_residual", "verdict"}) t.cols.push_back(c);
    } else {
      for (const char* c : {"normality_residual", "T0_norm", "tau", "mte_residual", "verdict", "G_positive",
                            "G_negative"}) {
        t.cols.push_back(c);
      }
      if (o_.oracle) t.cols.push_back("oracle_deviation");
    }
    t.cols.push_back("error");
    int errors = 0;
    int oracle_fail = 0;
    double max_dev = 0.0;
    for (const auto& r : rows) {
      std::vector<Cell> row{static_cast<long long>(r.index), static_cast<long long>(r.point),
                            static_cast<long long>(r.fiber)};
      add_u(row, r.u);
      for (double v : r.x) row.emplace_back(v);
      row.emplace_back(std::string(r.error.empty() ? "ok" : "error"));
      const std::string verdict(verdict_name(r.verdict));
      if (sweep) {
        for (double v : {r.T0_norm, r.U_norm, r.scal, r.tau, r.residual}) row.emplace_back(v);
        row.emplace_back(r.error.empty() ? verdict : std::string());
      } else {
        for (double v : {r.residual, r.T0_norm, r.tau, r.mte}) row.emplace_back(v);
        row.emplace_back(r.error.empty() ? verdict : std::string());
        row.emplace_back(static_cast<long long>(r.signature.positive));
        row.emplace_back(static_cast<long long>(r.signature.negative));
        if (o_.oracle) {
          const double d = r.oracle_deviation.value_or(std::nan(""));
          row.emplace_back(d);
          if (r.oracle_deviation) {
            max_dev = std::max(max_dev, d);
            if (!(d <= o_.settings.tol.oracle)) ++oracle_fail;
          }
        }
      }
      row.emplace_back(r.error);
      t.rows.push_back(std::move(row));
      if (!r.error.empty()) ++errors;
    }
    const std::string summary_v(verdict_name(summary_verdict(rows)));
    Json summary = {{"verdict", summary_v}, {"errors", errors}};
    std::vector<std::string> text = {"# summary verdict: " + summary_v};
    if (o_.oracle && !sweep) {
      summary["max_oracle_deviation"] = max_dev;
      summary["oracle_failures"] = oracle_fail;
      text.push_back("# max oracle deviation: " + fmt6(max_dev));
    }
    emit(sweep ? "sweep" : "normality", chart, s.points.size(), t, summary, text);
    return (errors == 0 && oracle_fail == 0) ? 0 : 1;
  }

  int identities() const {
    const QCChart chart = load_chart(false);
    const RunSpec s = spec(chart);
    const IdentityReport rep = run_identities(s);
    Table t;
    t.cols = {"check", "value", "tolerance", "evaluated", "status"};
    for (const auto& c : rep.checks) {
      t.rows.push_back({c.name, c.value, c.tolerance, static_cast<long long>(c.evaluated),
                        std::string(check_status_name(c.status))});
    }
    Json errors = Json::array();
    for (const auto& e : rep.errors) errors.push_back(e);
    Json summary = {{"ok", rep.ok()}, {"errors", errors}};
    std::vector<std::string> text;
    for (const auto& e : rep.errors) text.push_back("# error: " + e);
    if (!rep.errors.empty()) text.push_back("# downstream checks skipped at failing points");
    text.push_back(std::string("# suite: ") + (rep.ok() ? "pass" : "fail"));
    emit("identities", chart, s.points.size(), t, summary, text);
    return rep.ok() ? 0 : 1;
  }

 private:
  const Options& o_;
  std::ostream& out_;
  std::ostream& err_;
};

void add_common(CLI::App* sub, Options& o, bool twistor) {
  sub->add_option("--chart", o.chart, "catalog chart name (see 'list')");
  sub->add_option("--config", o.config, "chart configuration file");
  sub->add_option("--points", o.points, "number of random base points")->check(CLI::PositiveNumber);
  sub->add_option("--at", o.at, "explicit base point 'u1,...,um' (repeatable)");
  sub->add_option("--seed", o.seed, "seed for points, fibre samples and sampled pairs");
  sub->add_option("--threads", o.threads, "worker threads (default QCLAB_THREADS or 1)")->check(CLI::PositiveNumber);
  sub->add_flag("--no-validate", o.no_validate, "skip validation when loading --config");
  sub->add_option("--output,-o", o.output, "write the report to a file");
  if (twistor) {
    sub->add_option("--fiber", o.fiber, "fibre points per base point")->check(CLI::PositiveNumber);
    sub->add_flag("--oracle", o.oracle, "also run the direct finite-difference oracle");
  }
  Tolerances& t = o.settings.tol;
  const std::vector<std::pair<std::string, double*>> tols = {
      {"algebra", &t.algebra},       {"frame", &t.frame},
      {"structure", &t.structure},   {"levi", &t.levi},
      {"biquard", &t.biquard},       {"ill-conditioned", &t.ill_conditioned},
      {"connection", &t.connection}, {"torsion", &t.torsion},
      {"u-tensor-n1", &t.u_tensor_n1}, {"curvature", &t.curvature},
      {"ricci", &t.ricci},           {"alpha", &t.alpha},
      {"normal", &t.normal},         {"t0", &t.t0},
      {"oracle", &t.oracle},         {"cr", &t.cr},
      {"levi-invariance", &t.levi_invariance},
  };
  for (const auto& [name, ptr] : tols) {
    sub->add_option("--tol-" + name, *ptr, "tolerance (default " + fmt6(*ptr) + ")")
        ->check(CLI::PositiveNumber)
        ->group("Tolerances");
  }
  sub->add_option("--fd-step", o.settings.steps.fd, "finite-difference step for frame derivatives")
      ->check(CLI::PositiveNumber)
      ->group("Steps");
  sub->add_option("--curv-step", o.settings.steps.curv, "finite-difference step for curvature and twistor data")
      ->check(CLI::PositiveNumber)
      ->group("Steps");
  sub->add_option("--fd-order", o.settings.steps.order, "central difference order (2 or 4)")
      ->check(CLI::IsMember({2, 4}))
      ->group("Steps");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  o.threads = default_threads();
  CLI::App app{"qclab: quaternionic contact geometry laboratory"};
  app.require_subcommand(1);
  std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json}, {"csv", Format::csv}};
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "output format: text, json or csv")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  };

  CLI::App* list = app.add_subcommand("list", "list built-in charts (and configs in --config-dir)");
  add_format(list);
  list->add_option("--config-dir", o.config_dir, "also list chart configs (*.qc, *.json) in this directory");

  CLI::App* validate = app.add_subcommand("validate", "check the structure recovery and frame at base points");
  CLI::App* invariants = app.add_subcommand("invariants", "torsion, curvature and Ricci-decomposition residuals");
  CLI::App* normality = app.add_subcommand("normality", "normality of the twistor contact structure");
  CLI::App* identities = app.add_subcommand("identities", "named identity suite with pass/fail");
  CLI::App* sweep = app.add_subcommand("sweep", "base points x fibre points, one row per evaluation");
  for (CLI::App* s : {validate, invariants}) {
    add_common(s, o, false);
    add_format(s);
  }
  for (CLI::App* s : {normality, identities, sweep}) {
    add_common(s, o, true);
    add_format(s);
  }
  sweep->add_option("--grid", o.grid, "grid size per axis instead of random points")->check(CLI::PositiveNumber);
  sweep->add_option("--axes", o.axes, "two 1-based coordinate indices for --grid (default 1,2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const Runner r(o, out, err);
  try {
    if (*list) return r.list();
    if (*validate) return r.validate();
    if (*invariants) return r.invariants();
    if (*normality) return r.normality(false);
    if (*identities) return r.identities();
    if (*sweep) return r.normality(true);
  } catch (const Exit& e) {
    err << "qclab: " << e.message << "\n";
    return e.code;
  } catch (const Error& e) {
    err << "qclab: " << error_kind_name(e.kind()) << ": " << e.what() << "\n";
    return is_input_error(e.kind()) ? 2 : 1;
  }
  return 2;
}

}  // namespace qclab::cli
