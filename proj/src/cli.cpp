// Copyright 2026 The heislat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "heislat/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "heislat/measure.hpp"
#include "heislat/monge_ampere.hpp"
#include "heislat/shell_count.hpp"

namespace heislat::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Rational> parse_list(const std::string& text, const char* what) {
  std::vector<Rational> values;
  for (const std::string& part : split(text, ',')) {
    if (trim(part).empty()) throw ValidationError(fmt::format("empty entry in {} list", what));
    values.push_back(parse_rational(trim(part)));
  }
  if (values.empty()) throw ValidationError(fmt::format("{} list is empty", what));
  return values;
}

unsigned default_threads() {
  const char* env = std::getenv("HEISLAT_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw ValidationError(fmt::format("HEISLAT_THREADS={} is not a thread count", env));
  return static_cast<unsigned>(v);
}

// Reads "key = value" lines ('#' starts a comment) into flag arguments.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot read config file {}", path));
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(fmt::format("{}:{}: expected key = value", path, line_no));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.size() > 2 && key.starts_with("--")) key = key.substr(2);
    if (key.empty()) throw ValidationError(fmt::format("{}:{}: empty key", path, line_no));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ValidationError(fmt::format("cannot write {}", path));
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& stream() { return *stream_; }
  bool to_file() const { return !path_.empty(); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_;
};

struct Common {
  int n = 1;
  int alpha = 4;
  std::string c_alpha = "16";
  std::string c = "1";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  bool is_unsigned = false;
};

struct ShellArgs {
  std::string Q;
  std::string delta;
  std::string delta_rule;
  std::string q;
  std::string tau;
  std::uint64_t samples = 0;
};

GaugeParams gauge(const Common& o) { return GaugeParams(o.n, o.alpha, parse_rational(o.c_alpha)); }

Rational resolve_delta(const ShellArgs& a, const Rational& Q) {
  if (!a.delta.empty() && !a.delta_rule.empty()) throw ValidationError("give either --delta or --delta-rule");
  const std::string rule = a.delta.empty() ? a.delta_rule : a.delta;
  if (rule.empty()) throw ValidationError("--delta or --delta-rule is required");
  if (rule == "1/Q") return 1 / Q;
  return parse_rational(rule);
}

Sampling sampling_for(std::uint64_t samples, std::uint64_t seed) {
  return samples == 0 ? Sampling::exhaustive() : Sampling::random(samples, seed);
}

std::string result_row(const std::string& id, const Common& o, const ShellQuery& query, const std::string& c_field,
                       const Sampling& sampling) {
  const auto start = Clock::now();
  const ShellCount count = averaged_shell_count(query, sampling, o.threads);
  const std::int64_t ms = elapsed_ms(start);
  const double bound = theorem_bound(query);
  const bool lemma = query.mode() == QueryMode::counting_lemma;
  std::string mode = count.sampling.kind == Sampling::Kind::exhaustive ? "exhaustive" : "random";
  if (lemma) mode = "lemma-" + mode;
  const std::string ratio = bound > 0 ? format_double(count.normalized / bound) : "";
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", id, o.n, o.alpha,
                     parse_rational(o.c_alpha).get_str(), c_field, format_double(query.radius()),
                     format_double(query.thickness()), mode, count.centers_used, count.raw_count.get_str(),
                     format_double(count.normalized), format_double(bound), ratio, format_double(count.std_error),
                     o.seed, ms);
}

void report_written(std::ostream& out, const Output& file, std::size_t rows, std::optional<std::uint64_t> seed) {
  if (!file.to_file()) return;
  out << fmt::format("wrote {} ({} rows", file.path(), rows);
  if (seed) out << fmt::format(", seed {}", *seed);
  out << ")\n";
}

// Builds one query per row: fixed radius over a Q list, or counting-lemma over a q list.
std::vector<std::pair<std::string, ShellQuery>> shell_queries(const std::string& prefix, const Common& o,
                                                             const ShellArgs& a) {
  const GaugeParams g = gauge(o);
  std::vector<std::pair<std::string, ShellQuery>> queries;
  if (!a.q.empty()) {
    if (!a.Q.empty()) throw ValidationError("give either --Q or --q");
    if (a.tau.empty()) throw ValidationError("--q needs --tau");
    const Rational tau = parse_rational(a.tau);
    for (const Rational& q : parse_list(a.q, "q")) {
      queries.emplace_back(fmt::format("{}-n{}-a{}-q{}", prefix, o.n, o.alpha, q.get_str()),
                           ShellQuery::counting_lemma(g, q, tau));
    }
    return queries;
  }
  if (a.Q.empty()) throw ValidationError("--Q (or --q with --tau) is required");
  const Rational c = parse_rational(o.c);
  for (const Rational& Q : parse_list(a.Q, "Q")) {
    const Rational delta = resolve_delta(a, Q);
    queries.emplace_back(fmt::format("{}-n{}-a{}-Q{}", prefix, o.n, o.alpha, Q.get_str()),
                         ShellQuery::fixed_radius(g, Q, delta, c, !o.is_unsigned));
  }
  return queries;
}

int cmd_count(const Common& o, const ShellArgs& a, const std::string& center, bool naive, std::ostream& out) {
  const GaugeParams g = gauge(o);
  if (a.Q.empty()) throw ValidationError("--Q is required");
  const Rational Q = parse_rational(a.Q);
  const ShellQuery query = ShellQuery::fixed_radius(g, Q, resolve_delta(a, Q), parse_rational(o.c), !o.is_unsigned);
  std::vector<Integer> coords;
  if (center.empty()) {
    coords.assign(static_cast<std::size_t>(g.D()), Integer(0));
  } else {
    for (const Rational& v : parse_list(center, "center")) {
      if (v.get_den() != 1) throw ValidationError("center coordinates must be integers");
      coords.push_back(v.get_num());
    }
  }
  if (coords.size() != static_cast<std::size_t>(g.D())) {
    throw ValidationError(fmt::format("--center needs {} coordinates", g.D()));
  }
  const IntPoint u = make_point(std::move(coords));
  const Integer count = naive ? naive_shell_count(u, query) : fast_shell_count(u, query);
  out << count.get_str() << "\n";
  return 0;
}

int cmd_rows(const std::string& name, const Common& o, const ShellArgs& a, std::ostream& out) {
  const auto queries = shell_queries(name, o, a);
  if (name == "avg-count" && queries.size() != 1) throw ValidationError("avg-count takes a single Q or q");
  const Sampling sampling = sampling_for(a.samples, o.seed);
  const std::string c_field = a.q.empty() ? parse_rational(o.c).get_str() : "";
  Output file(o.out, out);
  file.stream() << kResultHeader << "\n";
  for (const auto& [id, query] : queries) file.stream() << result_row(id, o, query, c_field, sampling);
  report_written(out, file, queries.size(), a.samples > 0 ? std::optional(o.seed) : std::nullopt);
  return 0;
}

int cmd_bound(const Common& o, const ShellArgs& a, std::ostream& out) {
  for (const auto& [id, query] : shell_queries("bound", o, a)) out << format_double(theorem_bound(query)) << "\n";
  return 0;
}

nlohmann::ordered_json rank_json(const RankReport& r, const RankCheckOptions& opt, const GaugeParams& g) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["alpha"] = r.alpha;
  j["C_alpha"] = g.c_alpha().get_str();
  j["t"] = r.t.get_str();
  j["seed"] = opt.seed;
  j["samples"] = r.samples;
  j["off_equator"] = {{"count", r.off_equator_count},
                      {"nonzero_det", r.off_equator_nonzero_det},
                      {"min_abs_det", r.min_abs_det},
                      {"factorization_agrees", r.factorization_agrees},
                      {"x_functional_positive", r.x_functional_positive}};
  j["equator"] = {{"count", r.equator_count},
                  {"rank_full", r.equator_rank_full},
                  {"rank_D", r.equator_rank_d},
                  {"subdet_nonzero", r.equator_subdet_nonzero},
                  {"rank_histogram", r.equator_rank_histogram}};
  j["gradient_nonzero"] = r.gradient_nonzero;
  j["level_exact"] = r.level_exact;
  j["max_level_deviation"] = r.max_level_deviation;
  j["passed"] = r.passed();
  return j;
}

int cmd_rank(const Common& o, const std::string& t, std::uint64_t samples, std::uint64_t equator, std::ostream& out) {
  const GaugeParams g = gauge(o);
  RankCheckOptions opt;
  opt.t = parse_rational(t);
  opt.samples = samples;
  opt.equator_samples = equator;
  opt.seed = o.seed;
  opt.threads = o.threads;
  const RankReport report = verify_rank_proposition(g, opt);
  Output file(o.out, out);
  file.stream() << rank_json(report, opt, g).dump(2) << "\n";
  report_written(out, file, 1, o.seed);
  return 0;
}

int cmd_energy(const Common& o, const std::string& q_list, const std::string& tau_text, const std::string& t_text,
               std::uint64_t samples, const std::string& method, bool all_pairs, std::ostream& out) {
  if (method != "stratified" && method != "plain") throw ValidationError("--method must be stratified or plain");
  const EnergyMethod m = method == "plain" ? EnergyMethod::plain : EnergyMethod::stratified;
  const Rational tau = parse_rational(tau_text);
  const double t = parse_rational(t_text).get_d();
  Output file(o.out, out);
  file.stream() << kEnergyHeader << "\n";
  std::size_t rows = 0;
  for (const Rational& q : parse_list(q_list, "q")) {
    const SmoothedMeasure measure(build_thick_lattice(q, tau, o.n));
    const std::string prefix = fmt::format("energy-n{}-q{}-tau{}-t{}", o.n, q.get_str(), tau.get_str(), t_text);
    auto start = Clock::now();
    const EnergyEstimate e = energy_integral_mc(measure, t, samples, o.seed, o.threads, m);
    file.stream() << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", prefix, o.n, q.get_str(), tau.get_str(),
                                 format_double(t), to_string(m), e.samples, format_double(e.value),
                                 format_double(e.std_error), o.seed, elapsed_ms(start));
    ++rows;
    if (all_pairs) {
      start = Clock::now();
      const double v = energy_integral_all_pairs(measure, t);
      file.stream() << fmt::format("{},{},{},{},{},all-pairs,0,{},0,{},{}\n", prefix, o.n, q.get_str(),
                                   tau.get_str(), format_double(t), format_double(v), o.seed, elapsed_ms(start));
      ++rows;
    }
  }
  report_written(out, file, rows, o.seed);
  return 0;
}

int cmd_error_term(const Common& o, const std::string& Q_list, std::ostream& out) {
  const GaugeParams g = gauge(o);
  Output file(o.out, out);
  file.stream() << kErrorTermHeader << "\n";
  std::size_t rows = 0;
  for (const Rational& Q : parse_list(Q_list, "Q")) {
    const auto start = Clock::now();
    const BallErrorTerm e = fixed_center_error_term(g, Q);
    file.stream() << fmt::format("error-term-n{}-a{}-Q{},{},{},{},{},{},{},{},{}\n", o.n, o.alpha, Q.get_str(), o.n,
                                 o.alpha, g.c_alpha().get_str(), format_double(Q.get_d()), e.lattice_count.get_str(),
                                 format_double(e.volume), format_double(e.error), elapsed_ms(start));
    ++rows;
  }
  report_written(out, file, rows, std::nullopt);
  return 0;
}

int cmd_fit(const std::string& path, const std::string& x_col, const std::string& y_col, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot read {}", path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(fmt::format("{} is empty", path));
  const std::vector<std::string> header = split(line, ',');
  const auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError(fmt::format("{} has no column {}", path, name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = column(x_col), yi = column(y_col);
  std::vector<std::pair<double, double>> series;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != header.size()) throw ValidationError(fmt::format("{}:{}: wrong field count", path, line_no));
    const double x = parse_rational(fields[xi]).get_d();
    const double y = parse_rational(fields[yi]).get_d();
    if (!(x > 0) || !(y > 0)) throw ValidationError(fmt::format("{}:{}: log fit needs positive values", path, line_no));
    series.emplace_back(x, y);
  }
  const ScalingFit fit = fit_scaling_exponent(series);
  out << "slope,intercept,residual,points\n"
      << fmt::format("{},{},{},{}\n", format_double(fit.slope), format_double(fit.intercept),
                     format_double(fit.residual), series.size());
  return 0;
}

// Moves "--config PATH" out of args and splices its entries in right after the
// subcommand name, so explicit flags (parsed later, last one wins) override.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  if (rest.empty()) throw CLI::RequiredError("a subcommand");
  CLI::App* sub = app.get_subcommand_no_throw(rest.front());
  if (sub == nullptr) return rest;  // CLI11 reports the bad subcommand
  std::vector<std::string> injected{rest.front()};
  for (const auto& [key, value] : read_config(*path)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw ValidationError(fmt::format("config key '{}' is not an option of {}", key, rest.front()));
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") injected.push_back("--" + key);
      else if (value != "false" && value != "0") throw ValidationError(fmt::format("config flag '{}' needs true or false", key));
    } else {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  injected.insert(injected.end(), rest.begin() + 1, rest.end());
  return injected;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lattice points in Heisenberg gauge shells, Monge-Ampere rank checks and energy integrals", "heislat"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_path;  // consumed by expand_config; registered for --help
  app.add_option("--config", config_path, "key = value file; keys are long flag names of the subcommand");

  Common o;
  ShellArgs a;
  std::string center, rank_t = "1", energy_q = "4", energy_tau = "3/2", energy_t = "2", method = "stratified";
  std::string fit_path, fit_x = "Q", fit_y = "normalized", error_Q;
  std::uint64_t rank_samples = 100, equator_samples = 0, energy_samples = 100000;
  bool naive = false, all_pairs = false;
  std::string threads_text;

  auto common = [&](CLI::App* s, bool gauge_opts) {
    s->add_option("--n", o.n, "Heisenberg dimension n (D = 2n + 1)")->capture_default_str();
    if (gauge_opts) {
      s->add_option("--alpha", o.alpha, "gauge exponent (even)")->capture_default_str();
      s->add_option("--C", o.c_alpha, "vertical gauge constant C_alpha")->capture_default_str();
    }
    s->add_option("--threads", threads_text, "worker threads (default $HEISLAT_THREADS or 1)");
  };
  auto shell = [&](CLI::App* s, bool lists) {
    s->add_option("--Q", a.Q, lists ? "radius or comma-separated radii" : "radius");
    s->add_option("--delta", a.delta, "shell half-thickness");
    s->add_option("--delta-rule", a.delta_rule, "\"1/Q\" or a fixed value");
    s->add_option("--c", o.c, "lattice truncation factor")->capture_default_str();
    s->add_flag("--unsigned", o.is_unsigned, "use the unsigned lattice box");
  };

  CLI::App* count = app.add_subcommand("count", "exact shell count around one center");
  common(count, true);
  shell(count, false);
  count->add_option("--center", center, "comma-separated integer center (default origin)");
  count->add_flag("--naive", naive, "use the brute-force counter");

  CLI::App* avg = app.add_subcommand("avg-count", "shell count averaged over lattice centers (one CSV row)");
  CLI::App* sweep = app.add_subcommand("sweep", "avg-count over a list of Q (or q) values");
  for (CLI::App* s : {avg, sweep}) {
    common(s, true);
    shell(s, s == sweep);
    s->add_option("--q", a.q, "counting-lemma scale(s) q; Q = q^a, delta = q^(a - tau)");
    s->add_option("--tau", a.tau, "counting-lemma thickness exponent");
    s->add_option("--samples", a.samples, "random centers (0 = every center)")->capture_default_str();
    s->add_option("--seed", o.seed)->capture_default_str();
    s->add_option("--out", o.out, "CSV path (default stdout)");
  }

  CLI::App* bound = app.add_subcommand("bound", "theorem bound for Q and delta (or q and tau)");
  common(bound, true);
  shell(bound, false);
  bound->add_option("--q", a.q);
  bound->add_option("--tau", a.tau);

  CLI::App* rank = app.add_subcommand("rank-check", "exact rank of the Monge-Ampere matrix on a level set (JSON)");
  common(rank, true);
  rank->add_option("--t", rank_t, "level")->capture_default_str();
  rank->add_option("--samples", rank_samples, "off-equator samples")->capture_default_str();
  rank->add_option("--equator-samples", equator_samples, "samples with vanishing vertical part")->capture_default_str();
  rank->add_option("--seed", o.seed)->capture_default_str();
  rank->add_option("--out", o.out, "JSON path (default stdout)");

  CLI::App* energy = app.add_subcommand("energy", "energy integral of the smoothed lattice measure (CSV)");
  common(energy, false);
  energy->add_option("--q", energy_q, "scale(s) q, comma-separated")->capture_default_str();
  energy->add_option("--tau", energy_tau)->capture_default_str();
  energy->add_option("--t", energy_t, "exponent, 0 <= t < D")->capture_default_str();
  energy->add_option("--samples", energy_samples)->capture_default_str();
  energy->add_option("--seed", o.seed)->capture_default_str();
  energy->add_option("--method", method, "stratified or plain")->capture_default_str();
  energy->add_flag("--all-pairs", all_pairs, "add the deterministic all-pairs value (n = 1)");
  energy->add_option("--out", o.out, "CSV path (default stdout)");

  CLI::App* error_term = app.add_subcommand("error-term", "lattice points in the gauge ball against its volume (CSV)");
  common(error_term, true);
  error_term->add_option("--Q", error_Q, "radius or comma-separated radii")->required();
  error_term->add_option("--out", o.out, "CSV path (default stdout)");

  CLI::App* fit = app.add_subcommand("fit", "log-log slope of a sweep CSV");
  fit->add_option("csv", fit_path, "CSV file")->required();
  fit->add_option("--x", fit_x, "abscissa column")->capture_default_str();
  fit->add_option("--y", fit_y, "ordinate column")->capture_default_str();

  try {
    std::vector<std::string> argv = expand_config(args, app);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    o.threads = threads_text.empty() ? default_threads() : 0;
    if (!threads_text.empty()) {
      const Rational v = parse_rational(threads_text);
      if (v.get_den() != 1 || v < 1 || v > 4096) throw ValidationError("--threads must be an integer >= 1");
      o.threads = static_cast<unsigned>(v.get_num().get_ui());
    }
    CLI::App* s = app.get_subcommands().front();
    const std::string name = s->get_name();
    if (name == "count") return cmd_count(o, a, center, naive, out);
    if (name == "avg-count" || name == "sweep") return cmd_rows(name, o, a, out);
    if (name == "bound") return cmd_bound(o, a, out);
    if (name == "rank-check") return cmd_rank(o, rank_t, rank_samples, equator_samples, out);
    if (name == "energy") return cmd_energy(o, energy_q, energy_tau, energy_t, energy_samples, method, all_pairs, out);
    if (name == "error-term") return cmd_error_term(o, error_Q, out);
    if (name == "fit") return cmd_fit(fit_path, fit_x, fit_y, out);
    throw std::logic_error("unhandled subcommand " + name);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace heislat::cli
