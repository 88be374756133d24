#include "cli_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "evtest/evtest.hpp"

namespace evtest::cli {

namespace {

using json = nlohmann::ordered_json;

enum class Format { Csv, Json };

// A flat result table; CSV and JSON renderings carry identical values.
using Cell = std::variant<std::monostate, double, std::size_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "-"; }
    std::string operator()(double x) const { return format_number(x); }
    std::string operator()(std::size_t n) const { return std::to_string(n); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

// Numbers are rounded to the same 12 significant digits as the CSV; JSON has
// no non-finite literals, so those become the strings used in CSV.
json json_cell(const Cell& c) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(double x) const {
      if (!std::isfinite(x)) return format_number(x);
      return std::stod(format_number(x));
    }
    json operator()(std::size_t n) const { return n; }
    json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
}

json to_json(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = json_cell(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

void write_json(std::ostream& os, const Table& t) { os << to_json(t).dump() << '\n'; }

void emit(std::ostream& os, Format f, const Table& t) {
  if (f == Format::Csv)
    write_csv(os, t);
  else
    write_json(os, t);
}

// Flag validators: bad enumerated names are usage errors, not domain errors.
template <typename Parse>
CLI::Validator name_check(std::string description, Parse parse) {
  return CLI::Validator(
      [parse](std::string& s) -> std::string {
        try {
          parse(s);
          return {};
        } catch (const Error& e) {
          return e.what();
        }
      },
      std::move(description));
}

BettingStrategy parse_strategy(std::string_view name, double cap, double c) {
  if (name == "emixture" || name == "mixture") return EMixture::default_grid();
  if (name == "egree" || name == "gree") return EGree{cap};
  if (name == "grapa") return Grapa{c, true};
  if (name == "agrapa") return Agrapa{c};
  throw Error("unknown strategy '" + std::string(name) + "'");
}

struct HypothesisFlags {
  double mu = 0.0;
  double sigma = 1.0;
  std::string shape = "plain";
  std::optional<double> mu_lower;
  std::optional<double> mu_upper;

  void add_to(CLI::App* app) {
    app->add_option("--mu", mu, "Null mean bound")->capture_default_str();
    app->add_option("--sigma", sigma, "Null standard deviation bound")->capture_default_str();
    app->add_option("--shape", shape, "plain, symmetric, unimodal or us")
        ->capture_default_str()
        ->check(name_check("SHAPE", [](const std::string& s) { parse_shape(s); }));
    auto* lo = app->add_option("--mu-lower", mu_lower, "Lower end of a two-sided null interval");
    auto* hi = app->add_option("--mu-upper", mu_upper, "Upper end of a two-sided null interval");
    lo->needs(hi);
    hi->needs(lo);
  }

  Hypothesis build() const {
    Hypothesis h{{mu, sigma}, parse_shape(shape), OneSidedUpper{}};
    if (mu_lower) {
      h.side = TwoSided{*mu_lower, *mu_upper};
      h.spec.mu = *mu_lower;
    }
    h.validate();
    return h;
  }
};

struct StrategyFlags {
  std::string name = "egree";
  double cap = 0.5;
  double c = 0.5;

  void add_to(CLI::App* app) {
    app->add_option("--strategy", name, "emixture, egree, grapa or agrapa")
        ->capture_default_str()
        ->check(name_check("STRATEGY", [](const std::string& s) { parse_strategy(s, 0.5, 0.5); }));
    app->add_option("--cap", cap, "Upper bound on the GREE betting fraction")->capture_default_str();
    app->add_option("--c", c, "GRAPA truncation constant")->capture_default_str();
  }

  BettingStrategy build() const {
    BettingStrategy s = parse_strategy(name, cap, c);
    validate(s);
    return s;
  }
};

struct ThresholdFlags {
  std::vector<double> thresholds;
  std::vector<double> alphas;

  void add_to(CLI::App* app) {
    auto* t = app->add_option("--thresholds", thresholds, "Rejection thresholds (default 2,5,10,20)")
                  ->delimiter(',');
    auto* a = app->add_option("--alpha", alphas, "Significance levels, used as thresholds 1/alpha")->delimiter(',');
    t->excludes(a);
  }

  std::vector<double> build() const {
    if (!alphas.empty()) {
      std::vector<double> out;
      for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw Error("alpha must lie in (0, 1)");
        out.push_back(1.0 / a);
      }
      return out;
    }
    return thresholds.empty() ? default_thresholds() : thresholds;
  }
};

// One number per non-blank line, or one CSV column selected by header name.
std::vector<double> read_values(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t col = 0;
  if (!column.empty()) {
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    ++line_no;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);
    const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return trim(h) == column; });
    if (it == header.end()) throw Error(path + ": missing column '" + column + "'");
    col = static_cast<std::size_t>(it - header.begin());
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (column.empty()) {
      out.push_back(parse_double(line, where));
    } else {
      const auto fields = split_csv_line(line);
      if (fields.size() <= col) throw Error(where + ": too few columns");
      out.push_back(parse_double(fields[col], where));
    }
    if (!std::isfinite(out.back())) throw Error(where + ": value must be finite");
  }
  if (out.empty()) throw Error(path + ": no values");
  return out;
}

// Side outputs are rendered in memory and written only after everything else
// has succeeded.
struct PendingFile {
  std::string path;
  std::string content;
};

void write_files(const std::vector<PendingFile>& files) {
  for (const auto& f : files) {
    std::ofstream os(f.path, std::ios::binary);
    if (!os) throw Error("cannot write '" + f.path + "'");
    os << f.content;
    if (!os) throw Error("failed writing '" + f.path + "'");
  }
}

Table detection_table(const DetectionReport& r, const std::vector<std::string>* dates) {
  Table t;
  t.columns = dates ? std::vector<std::string>{"threshold", "crossing_day", "crossing_date"}
                    : std::vector<std::string>{"threshold", "crossing_index"};
  for (std::size_t k = 0; k < r.thresholds.size(); ++k) {
    const auto& idx = r.crossing_index[k];
    std::vector<Cell> row{r.thresholds[k], idx ? Cell{*idx} : Cell{}};
    if (dates) row.push_back(idx ? Cell{(*dates)[*idx - 1]} : Cell{});
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct Globals {
  std::string format = "csv";
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  Format fmt() const { return format == "json" ? Format::Json : Format::Csv; }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anytime-valid tests of mean-variance hypotheses with e-values and e-processes", "evtest"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--seed", g.seed, "Master seed for simulations")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for simulations (0 = all cores)")->capture_default_str();

  std::ostringstream buf;
  std::vector<PendingFile> files;
  std::function<void()> action;

  // evalue
  auto* evalue = app.add_subcommand("evalue", "Single-observation e-value and p-value");
  double ev_x = 0.0;
  HypothesisFlags ev_h;
  evalue->add_option("--x", ev_x, "Observation")->required();
  ev_h.add_to(evalue);
  evalue->callback([&] {
    action = [&] {
      const Evidence ev = evaluate(ev_x, ev_h.build());
      emit(buf, g.fmt(), Table{{"e", "p"}, {{ev.e, ev.p}}});
    };
  });

  // eprocess
  auto* eproc = app.add_subcommand("eprocess", "Run an e-process over a data file");
  std::string ep_input;
  std::string ep_column;
  std::string ep_traj;
  HypothesisFlags ep_h;
  StrategyFlags ep_s;
  ThresholdFlags ep_t;
  eproc->add_option("--input", ep_input, "Observations, one per line (or a CSV with --column)")->required();
  eproc->add_option("--column", ep_column, "CSV column holding the observations");
  eproc->add_option("--trajectory-out", ep_traj, "Write t, x, lambda, wealth to this file");
  ep_h.add_to(eproc);
  ep_s.add_to(eproc);
  ep_t.add_to(eproc);
  eproc->callback([&] {
    action = [&] {
      const Hypothesis h = ep_h.build();
      const BettingStrategy s = ep_s.build();
      const auto thresholds = ep_t.build();
      const auto xs = read_values(ep_input, ep_column);
      EProcessState st = eprocess_init(h, s);
      for (double x : xs) eprocess_update(st, x);
      emit(buf, g.fmt(), detection_table(first_crossing(st.trajectory, thresholds), nullptr));
      if (!ep_traj.empty()) {
        Table t{{"t", "x", "lambda", "wealth"}, {}};
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const Cell lambda = st.lambdas.empty() ? Cell{} : Cell{st.lambdas[i]};
          t.rows.push_back({i + 1, xs[i], lambda, st.trajectory[i]});
        }
        std::ostringstream os;
        emit(os, g.fmt(), t);
        files.push_back({ep_traj, os.str()});
      }
    };
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo rejection rates or average log e-process curves");
  std::string sim_gen = "nl";
  double sim_nu = 0.5;
  double sim_eta2 = 1.0;
  double sim_sigma2 = 0.01;
  double sim_param = 0.1;
  std::optional<std::size_t> sim_break;
  std::optional<double> sim_post_nu;
  std::vector<std::string> sim_methods{"egree"};
  std::size_t sim_n = 100;
  std::size_t sim_runs = 1000;
  double sim_threshold = 20.0;
  std::optional<double> sim_alpha;
  std::string sim_rule = "crossing";
  double sim_cap = 0.5;
  double sim_c = 0.5;
  bool sim_curve = false;
  HypothesisFlags sim_h;
  sim->add_option("--generator", sim_gen, "nl, beta, extremal-plain, extremal-symmetric, extremal-unimodal or extremal-us")
      ->capture_default_str()
      ->check(CLI::IsMember({"nl", "beta", "extremal-plain", "extremal-symmetric", "extremal-unimodal", "extremal-us"}));
  sim->add_option("--nu", sim_nu, "Data mean (nl, beta)")->capture_default_str();
  sim->add_option("--eta2", sim_eta2, "Data variance (nl)")->capture_default_str();
  sim->add_option("--sigma2", sim_sigma2, "Data variance (beta)")->capture_default_str();
  sim->add_option("--param", sim_param, "Extremal law parameter (alpha, a or p)")->capture_default_str();
  auto* brk = sim->add_option("--break-index", sim_break, "Switch to mean --post-nu after this many draws");
  auto* post = sim->add_option("--post-nu", sim_post_nu, "Data mean after the break (nl, beta)");
  brk->needs(post);
  post->needs(brk);
  sim->add_option("--method", sim_methods, "Methods, comma separated")
      ->delimiter(',')
      ->capture_default_str()
      ->check(name_check("METHOD", [](const std::string& s) { parse_method(s); }));
  sim->add_option("--n", sim_n, "Observations per run")->capture_default_str();
  sim->add_option("--runs", sim_runs, "Monte-Carlo replicates")->capture_default_str();
  auto* thr = sim->add_option("--threshold", sim_threshold, "Rejection threshold")->capture_default_str();
  sim->add_option("--alpha", sim_alpha, "Significance level, used as threshold 1/alpha")->excludes(thr);
  sim->add_option("--rule", sim_rule, "crossing (any t) or terminal (t = n)")
      ->capture_default_str()
      ->check(name_check("RULE", [](const std::string& s) { parse_rule(s); }));
  sim->add_option("--cap", sim_cap, "GREE cap")->capture_default_str();
  sim->add_option("--c", sim_c, "GRAPA truncation constant")->capture_default_str();
  sim->add_flag("--curve", sim_curve, "Emit average log e-process curves instead of rates");
  sim_h.add_to(sim);
  sim->callback([&] {
    action = [&] {
      const auto single = [&](double nu) -> Generator {
        if (sim_gen == "nl") return Generator{NL{nu, sim_eta2}};
        if (sim_gen == "beta") return Generator{BetaMV{nu, sim_sigma2}};
        if (sim_gen == "extremal-plain") return Generator{ExtremalPlain{sim_param}};
        if (sim_gen == "extremal-symmetric") return Generator{ExtremalSymmetric{sim_param}};
        if (sim_gen == "extremal-unimodal") return Generator{ExtremalUnimodal{sim_param}};
        return Generator{ExtremalUS{sim_param}};
      };
      SimConfig base;
      base.generator = single(sim_nu);
      if (sim_break) {
        if (sim_gen != "nl" && sim_gen != "beta") throw Error("regime shifts need the nl or beta generator");
        base.generator = make_regime_shift(base.generator, single(*sim_post_nu), *sim_break);
      }
      base.n = sim_n;
      base.runs = sim_runs;
      if (sim_alpha) {
        if (!(*sim_alpha > 0.0 && *sim_alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
        base.threshold = 1.0 / *sim_alpha;
      } else {
        base.threshold = sim_threshold;
      }
      base.seed = g.seed;
      base.hypothesis = sim_h.build();
      base.cap = sim_cap;
      base.c = sim_c;
      base.rule = parse_rule(sim_rule);
      base.jobs = g.jobs;

      std::vector<SimConfig> configs;
      for (const auto& name : sim_methods) {
        SimConfig cfg = base;
        cfg.method = parse_method(name);
        if (sim_curve && !is_eprocess_method(cfg.method))
          throw Error("--curve needs e-process methods; '" + name + "' is not one");
        cfg.validate();
        configs.push_back(cfg);
      }

      if (sim_curve) {
        std::vector<Method> methods;
        std::vector<ExperimentResult> results;
        for (const auto& cfg : configs) {
          methods.push_back(cfg.method);
          results.push_back(run_avg_log_trajectory(cfg));
        }
        if (g.fmt() == Format::Csv) {
          write_trajectory_csv(buf, methods, results);
        } else {
          Table t{{"t"}, {}};
          for (Method m : methods) t.columns.push_back("mean_log_M_" + std::string(to_string(m)));
          for (std::size_t i = 0; i < sim_n; ++i) {
            std::vector<Cell> row{i + 1};
            for (const auto& r : results) row.push_back(r.avg_log_trajectory.value()[i]);
            t.rows.push_back(std::move(row));
          }
          write_json(buf, t);
        }
        return;
      }

      std::vector<ExperimentResult> results;
      for (const auto& cfg : configs) results.push_back(run_rejection_experiment(cfg));
      if (g.fmt() == Format::Csv) {
        write_results_csv_header(buf);
        for (std::size_t i = 0; i < configs.size(); ++i) write_result_csv_row(buf, configs[i], results[i]);
      } else {
        Table t{{"method", "shape", "generator", "param", "n", "runs", "threshold", "rate", "se"}, {}};
        for (std::size_t i = 0; i < configs.size(); ++i) {
          const auto& c = configs[i];
          t.rows.push_back({std::string(to_string(c.method)), std::string(to_string(c.hypothesis.shape)),
                            generator_name(c.generator), generator_params(c.generator), c.n, c.runs, c.threshold,
                            results[i].rejection_rate, results[i].standard_error});
        }
        write_json(buf, t);
      }
    };
  });

  // monitor
  auto* mon = app.add_subcommand("monitor", "Detect departures from a historically estimated null in price data");
  std::string mon_prices;
  PriceCsvOptions mon_csv;
  DateRange mon_est;
  DateRange mon_test;
  bool mon_log = false;
  std::string mon_shape = "plain";
  std::string mon_traj;
  StrategyFlags mon_s;
  ThresholdFlags mon_t;
  mon->add_option("--prices", mon_prices, "Price CSV with a header row")->required();
  mon->add_option("--date-column", mon_csv.date_column, "Date column name")->capture_default_str();
  mon->add_option("--price-column", mon_csv.price_column, "Price column name")->capture_default_str();
  mon->add_option("--estimate-from", mon_est.first, "First date of the estimation window");
  mon->add_option("--estimate-to", mon_est.last, "Last date of the estimation window")->required();
  mon->add_option("--test-from", mon_test.first, "First date of the testing window (default: after --estimate-to)");
  mon->add_option("--test-to", mon_test.last, "Last date of the testing window");
  mon->add_flag("--log-loss", mon_log, "Use log losses instead of linear losses");
  mon->add_option("--shape", mon_shape, "plain, symmetric, unimodal or us")
      ->capture_default_str()
      ->check(name_check("SHAPE", [](const std::string& s) { parse_shape(s); }));
  mon->add_option("--trajectory-out", mon_traj, "Write date, log_wealth to this file");
  mon_s.add_to(mon);
  mon_t.add_to(mon);
  mon->callback([&] {
    action = [&] {
      for (const auto* d : {&mon_est.first, &mon_est.last, &mon_test.first, &mon_test.last})
        if (!d->empty() && !is_iso_date(*d)) throw Error("invalid date '" + *d + "'");
      const BettingStrategy s = mon_s.build();
      const auto thresholds = mon_t.build();
      const LossSeries losses = to_losses(load_prices(mon_prices, mon_csv), mon_log);
      const NullEstimate est = estimate_null(losses, mon_est);
      LossSeries test;
      if (mon_test.first.empty()) {
        for (std::size_t i = 0; i < losses.size(); ++i) {
          if (losses.dates[i] > mon_est.last && (mon_test.last.empty() || losses.dates[i] <= mon_test.last)) {
            test.dates.push_back(losses.dates[i]);
            test.losses.push_back(losses.losses[i]);
          }
        }
      } else {
        test = restrict_to(losses, mon_test);
      }
      if (test.size() == 0) throw Error("the testing window contains no losses");
      const MonitorResult r = detect(test, est, s, parse_shape(mon_shape), thresholds);
      if (g.fmt() == Format::Csv)
        write_detection_csv(buf, r);
      else
        write_json(buf, detection_table(r.report, &r.dates));
      if (!mon_traj.empty()) {
        std::ostringstream os;
        if (g.fmt() == Format::Csv) {
          write_log_wealth_csv(os, r);
        } else {
          Table t{{"date", "log_wealth"}, {}};
          for (std::size_t i = 0; i < r.dates.size(); ++i) t.rows.push_back({r.dates[i], r.log_wealth[i]});
          write_json(os, t);
        }
        files.push_back({mon_traj, os.str()});
      }
    };
  });

  // combine
  auto* comb = app.add_subcommand("combine", "Fisher or Simes combination of p-values, or batch e/p-values");
  std::string cb_method = "fisher";
  std::string cb_input;
  std::string cb_column;
  std::vector<double> cb_values;
  HypothesisFlags cb_h;
  comb->add_option("--method", cb_method, "fisher, simes (p-values in) or ebatch, pbatch (observations in)")
      ->capture_default_str()
      ->check(CLI::IsMember({"fisher", "simes", "ebatch", "pbatch"}));
  auto* cin = comb->add_option("--input", cb_input, "Values, one per line (or a CSV with --column)");
  comb->add_option("--column", cb_column, "CSV column holding the values");
  auto* cvals = comb->add_option("--values", cb_values, "Values, comma separated")->delimiter(',');
  cin->excludes(cvals);
  cb_h.add_to(comb);
  comb->callback([&] {
    action = [&] {
      const std::vector<double> vs = cb_input.empty() ? cb_values : read_values(cb_input, cb_column);
      if (vs.empty()) throw Error("no values given; use --input or --values");
      double value = 0.0;
      if (cb_method == "fisher") {
        value = fisher_combine(vs);
      } else if (cb_method == "simes") {
        value = simes_combine(vs);
      } else {
        const Hypothesis h = cb_h.build();
        if (h.two_sided()) throw Error("batch methods are one-sided");
        value = cb_method == "ebatch" ? e_batch(vs, h.spec, h.shape) : p_batch(vs, h.spec, h.shape);
      }
      emit(buf, g.fmt(), Table{{"method", "n", "value"}, {{cb_method, vs.size(), value}}});
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (!action) throw Error("no subcommand given");
    action();
    write_files(files);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  out << buf.str();
  out.flush();
  return kOk;
}

}  // namespace evtest::cli
