#include "eshare/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "eshare/bidding.hpp"
#include "eshare/brlab.hpp"
#include "eshare/equilibrium.hpp"
#include "eshare/generator.hpp"
#include "eshare/scenario_io.hpp"

namespace eshare {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Per-prosumer columns for CSV output.
struct Table {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> columns;

  void add(std::string name, Eigen::VectorXd column) {
    names.push_back(std::move(name));
    columns.push_back(std::move(column));
  }
};

struct Report {
  json results = json::object();
  json residuals = json::object();
  json warnings = json::array();
  Table table;
  int exit_code = kExitOk;
};

struct Options {
  std::string scenario;
  std::string format = "json";
  std::string out;
  std::vector<double> bids;
  std::vector<double> fix_bids;
  std::optional<double> eps;
  int max_iter = 1000;
  std::string trace;
  int prosumer = 0;
  bool classify = false;
  bool verify = false;
  bool iterate = false;
  bool region = false;
  bool regulated = false;
  double tol = 1e-6;
  int max_sweeps = 50;
  std::optional<double> lo;
  std::optional<double> hi;
  std::string scan_csv;
  double c = 1.0;
  double D1 = 0.0;
  double D2 = 0.0;
  double F = 0.0;
  std::uint64_t seed = 0;
  int size = 0;
  std::string style = "radial";
  std::optional<double> a;
  std::string dir;
  std::string out_dir;
  std::string batch_command = "gne";
  int jobs = 0;
};

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream suffix;
  suffix << ".tmp." << std::this_thread::get_id();
  const fs::path tmp = path.string() + suffix.str();
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::FileError, "cannot write " + tmp.string());
    f << content;
    if (!f) throw Error(Errc::FileError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_csv_file(const std::string& path, const std::function<void(std::ostream&)>& fill) {
  std::ostringstream os;
  fill(os);
  write_atomic(path, os.str());
}

Eigen::VectorXd bid_vector(const std::vector<double>& bids, const Scenario& s, const char* flag) {
  if (static_cast<int>(bids.size()) != s.size()) {
    throw Error(Errc::UsageError, std::string(flag) + " needs " + std::to_string(s.size()) + " values");
  }
  return to_vector(bids);
}

std::string render_csv(const Report& r) {
  std::ostringstream os;
  os.precision(17);
  if (!r.table.names.empty()) {
    os << "i";
    for (const auto& n : r.table.names) os << ',' << n;
    os << '\n';
    const Eigen::Index rows = r.table.columns.front().size();
    for (Eigen::Index i = 0; i < rows; ++i) {
      os << i + 1;
      for (const auto& col : r.table.columns) os << ',' << col(i);
      os << '\n';
    }
    return os.str();
  }
  os << "key,value\n";
  for (const auto& [key, value] : r.results.items()) {
    if (value.is_primitive()) os << key << ',' << value.dump() << '\n';
  }
  return os.str();
}

void cmd_validate(const Scenario& s, Report& r) {
  const NetworkModel& net = s.network;
  double oracle = 0.0;
  for (int bus = 0; bus < net.bus_count(); ++bus) {
    if (bus == net.slack()) continue;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(net.bus_count());
    q(bus) = 1.0;
    q(net.slack()) = -1.0;
    const Eigen::VectorXd diff = line_flows(net, q) - dc_flow_oracle(net, -q);
    if (diff.size() > 0) oracle = std::max(oracle, diff.cwiseAbs().maxCoeff());
  }
  r.results = {{"valid", true},
               {"bus_count", net.bus_count()},
               {"line_count", net.line_count()},
               {"slack", net.slack() + 1},
               {"radial", is_radial(net)},
               {"a", s.a},
               {"a_min", a_min(s)}};
  r.residuals["ptdf_oracle"] = oracle;
  if (s.a < a_min(s)) r.warnings.push_back("a is below the bidding convergence threshold");
  r.table.add("c", s.c());
  r.table.add("d", s.d());
  r.table.add("D", s.D());
}

void cmd_clear(const Scenario& s, const Options& o, Report& r) {
  const Eigen::VectorXd b = bid_vector(o.bids, s, "--bids");
  const ClearingOutcome c = clear_market(s, b);
  r.results = {{"lambda", to_json(c.lambda)},     {"q", to_json(c.q)},
               {"eta", c.eta},                    {"alpha_lower", to_json(c.alpha_lower)},
               {"alpha_upper", to_json(c.alpha_upper)}, {"flows", to_json(c.flows)}};
  r.residuals["clearing_kkt"] = clearing_kkt_residual(s, b, c);
  r.table.add("b", b);
  r.table.add("lambda", c.lambda);
  r.table.add("q", c.q);
}

void cmd_gne(const Scenario& s, Report& r) {
  const EquilibriumResult e = improved_gne(s);
  const NetPayment np = net_payment(s, e);
  const std::vector<bool> pareto = pareto_check(s, e);
  r.results = {{"p", to_json(e.p_bar)},
               {"b", to_json(e.b_bar)},
               {"lambda_r", to_json(e.lambda_r)},
               {"q", to_json(e.q_bar)},
               {"kappa", e.kappa},
               {"tau_lower", to_json(e.tau_lower)},
               {"tau_upper", to_json(e.tau_upper)},
               {"costs", to_json(e.costs)},
               {"total_disutility", e.total_disutility},
               {"net_payment", np.payment},
               {"congestion_rent", np.congestion_rent},
               {"pareto", pareto}};
  r.residuals = {{"central_kkt", e.kkt_residual},
                 {"price_consistency", e.price_consistency},
                 {"quantity_consistency", e.quantity_consistency},
                 {"price_structure", price_structure_residual(s, e)},
                 {"net_payment_identity", std::abs(np.payment - np.congestion_rent)}};
  r.table.add("p", e.p_bar);
  r.table.add("b", e.b_bar);
  r.table.add("lambda_r", e.lambda_r);
  r.table.add("q", e.q_bar);
  r.table.add("cost", e.costs);
}

void cmd_ve(const Scenario& s, Report& r) {
  const VariationalEquilibrium v = variational_equilibrium(s);
  for (const auto& w : v.warnings) r.warnings.push_back(w);
  r.results = {{"p", to_json(v.p_bar)}, {"b", to_json(v.b_bar)}, {"lambda", to_json(v.lambda_bar)}};
  r.table.add("p", v.p_bar);
  r.table.add("b", v.b_bar);
  r.table.add("lambda", v.lambda_bar);
}

void cmd_social(const Scenario& s, Report& r) {
  const SocialOptimum so = social_optimum(s);
  const PriceTakingEquilibrium pt = price_taking_equilibrium(s);
  r.results = {{"p", to_json(so.p_tilde)},
               {"costs", to_json(so.costs)},
               {"total_cost", so.total_cost},
               {"kappa", so.kappa},
               {"tau_lower", to_json(so.tau_lower)},
               {"tau_upper", to_json(so.tau_upper)},
               {"price_taking", {{"lambda", to_json(pt.lambda_tilde)}, {"b", to_json(pt.b_tilde)}}}};
  r.residuals = {{"kkt", so.kkt_residual}, {"price_taking_marginal", pt.marginal_residual}};
  r.table.add("p", so.p_tilde);
  r.table.add("cost", so.costs);
  r.table.add("lambda", pt.lambda_tilde);
  r.table.add("b", pt.b_tilde);
}

void cmd_selfsuff(const Scenario& s, Report& r) {
  const SelfSufficiency ss = self_sufficiency(s);
  r.results = {{"costs", to_json(ss.costs)}, {"total", ss.total}};
  r.table.add("cost", ss.costs);
}

void cmd_poa(const Scenario& s, Report& r) {
  const PoaReport p = poa(s);
  r.results = {{"poa", p.poa}, {"C1", p.C1}, {"C2", p.C2}, {"J_bar", p.J_bar}, {"J_tilde", p.J_tilde}};
  r.results["upper_bound"] = p.upper_bound ? json(*p.upper_bound) : json(nullptr);
  if (!p.upper_bound) r.warnings.push_back("C2 <= 0: the efficiency bound is undefined");
}

void cmd_bid(const Scenario& s, const Options& o, Report& r) {
  const EquilibriumResult e = improved_gne(s);
  BiddingConfig cfg;
  cfg.epsilon = o.eps;
  cfg.max_iter = o.max_iter;
  const BiddingResult br = run_bidding(s, cfg, &e);
  for (const auto& w : br.warnings) r.warnings.push_back(w);
  const FejerReport fj = fejer_check(br.trace, e);
  const bool converged = br.status == BiddingStatus::Converged;
  r.results = {{"status", converged ? "converged" : "max_iter_exceeded"},
               {"iterations", br.iterations},
               {"epsilon", br.epsilon},
               {"final_delta", br.final_delta},
               {"lambda", to_json(br.lambda)},
               {"b", to_json(br.b)},
               {"p", to_json(br.p)},
               {"fejer_monotone", fj.monotone}};
  r.residuals = {{"b_error", (br.b - e.b_bar).cwiseAbs().maxCoeff()},
                 {"p_error", (br.p - e.p_bar).cwiseAbs().maxCoeff()}};
  r.table.add("lambda", br.lambda);
  r.table.add("b", br.b);
  r.table.add("p", br.p);
  if (!o.trace.empty()) write_csv_file(o.trace, [&](std::ostream& os) { write_trace_csv(os, br); });
  if (!converged) r.exit_code = kExitNoConvergence;
}

json scan_json(const BestResponseScan& scan) {
  json minima = json::array();
  for (const auto& m : scan.minima) minima.push_back({{"b", m.b}, {"gamma", m.gamma}});
  return {{"prosumer", scan.prosumer + 1}, {"interval", {scan.lo, scan.hi}}, {"minima", minima},
          {"argmin", scan.argmin},         {"min_value", scan.min_value},     {"current_value", scan.current_value}};
}

json verification_json(const GneVerification& v) {
  return {{"is_gne", v.is_gne},
          {"gaps", to_json(v.gaps)},
          {"current_cost", to_json(v.current_cost)},
          {"best_cost", to_json(v.best_cost)},
          {"best_bid", to_json(v.best_bid)}};
}

const char* regime_name(GneRegime g) {
  switch (g) {
    case GneRegime::Unique: return "unique";
    case GneRegime::MultipleUpper: return "multiple-upper";
    case GneRegime::MultipleLower: return "multiple-lower";
  }
  return "";
}

void cmd_brlab(const std::optional<LoadedScenario>& loaded, const Options& o, Report& r) {
  const int modes = o.classify + o.verify + o.iterate + o.region + (o.prosumer > 0);
  if (modes != 1) {
    throw Error(Errc::UsageError, "brlab needs exactly one of --classify-2bus, --prosumer, --verify, --iterate, --region");
  }
  if (o.classify) {
    const GneClassification2Bus g = classify_gne_2bus(o.c, o.D1, o.D2, o.F);
    r.results = {{"regime", regime_name(g.regime)},
                 {"b", to_json(g.point.b)},
                 {"lambda", to_json(g.point.lambda)},
                 {"p", to_json(g.point.p)}};
    if (g.regime != GneRegime::Unique) {
      r.results["b2_interval"] = {g.b2_lo, g.b2_hi};
      r.results["b1_offset"] = g.b1_offset;
    }
    r.table.add("b", g.point.b);
    r.table.add("lambda", g.point.lambda);
    r.table.add("p", g.point.p);
    return;
  }
  if (!loaded) throw Error(Errc::UsageError, "brlab needs a scenario file for this mode");
  const Scenario& s = loaded->scenario;
  ScanConfig cfg;
  cfg.mode = o.regulated ? CostMode::Regulated : CostMode::Unregulated;
  if (o.lo || o.hi) {
    if (!o.lo || !o.hi) throw Error(Errc::UsageError, "--lo and --hi go together");
    cfg.interval = std::make_pair(*o.lo, *o.hi);
  }

  if (o.prosumer > 0) {
    if (o.prosumer > s.size()) throw Error(Errc::UsageError, "--prosumer out of range");
    const Eigen::VectorXd b = bid_vector(o.fix_bids, s, "--fix-bids");
    const BestResponseScan scan = best_response(s, o.prosumer - 1, b, cfg);
    r.results = scan_json(scan);
    if (!o.scan_csv.empty()) write_csv_file(o.scan_csv, [&](std::ostream& os) { write_scan_csv(os, scan); });
    return;
  }

  Eigen::VectorXd b;
  if (o.bids.empty() && o.verify) {
    b = improved_gne(s).b_bar;
  } else {
    b = bid_vector(o.bids, s, "--bids");
  }

  if (o.verify) {
    const GneVerification v = verify_gne(s, b, o.tol, cfg);
    r.results = verification_json(v);
    r.results["bids"] = to_json(b);
    r.table.add("b", b);
    r.table.add("gap", v.gaps);
    r.table.add("best_bid", v.best_bid);
  } else if (o.iterate) {
    const BrIteration it = br_iteration(s, b, o.max_sweeps, o.tol, cfg);
    json traj = json::array();
    for (const auto& step : it.trajectory) traj.push_back(to_json(step));
    const char* status = it.status == BrStatus::FixedPoint ? "fixed_point"
                         : it.status == BrStatus::Cycling  ? "cycling"
                                                           : "max_iter_exceeded";
    r.results = {{"status", status}, {"sweeps", it.sweeps}, {"trajectory", traj}};
    if (it.verification) r.results["verification"] = verification_json(*it.verification);
    r.table.add("b", it.trajectory.back());
    if (it.status != BrStatus::FixedPoint) r.exit_code = kExitNoConvergence;
  } else {
    const Example2Prices ep = example2_region(s, b);
    const char* name = ep.region == Example2Region::Middle ? "M" : ep.region == Example2Region::Lower ? "L" : "U";
    const ClearingOutcome c = clear_market(s, b);
    r.results = {{"region", name}, {"lambda", to_json(ep.lambda)}};
    r.residuals["solver_agreement"] = (c.lambda - Eigen::VectorXd(ep.lambda)).cwiseAbs().maxCoeff();
    r.table.add("lambda", ep.lambda);
  }
}

int run_batch(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path dir(o.dir);
  if (!fs::is_directory(dir)) throw Error(Errc::FileError, "not a directory: " + o.dir);
  fs::path out_dir = o.out_dir;
  if (out_dir.empty()) {
    const char* env = std::getenv("ESHARE_OUTPUT_DIR");
    out_dir = env && *env ? fs::path(env) : dir / "reports";
  }
  fs::create_directories(out_dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Outcome {
    int code = 0;
    std::string report;
    std::string error;
  };
  std::vector<Outcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < files.size(); k = next++) {
      const fs::path report = out_dir / (files[k].stem().string() + "." + o.batch_command + ".json");
      std::ostringstream sink;
      std::ostringstream diag;
      outcomes[k].code = run_command({o.batch_command, files[k].string(), "--out", report.string()}, sink, diag);
      outcomes[k].report = report.string();
      outcomes[k].error = diag.str();
    }
  };
  int jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(files.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  json list = json::array();
  int worst = kExitOk;
  for (std::size_t k = 0; k < files.size(); ++k) {
    json item{{"file", files[k].string()}, {"exit_code", outcomes[k].code}};
    if (outcomes[k].code == kExitOk) item["report"] = outcomes[k].report;
    if (!outcomes[k].error.empty()) {
      item["error"] = outcomes[k].error;
      err << files[k].string() << ": " << outcomes[k].error;
    }
    list.push_back(std::move(item));
    worst = std::max(worst, outcomes[k].code);
  }
  json doc{{"command", "batch"}, {"results", {{"out_dir", out_dir.string()}, {"files", list}}}};
  out << doc.dump(2) << '\n';
  return worst;
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::Infeasible:
    case Errc::MarketInfeasible:
      return kExitInfeasible;
    case Errc::IterationLimit:
      return kExitNoConvergence;
    default:
      return kExitUsage;
  }
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Energy-sharing market equilibrium engine", "eshare"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool scenario_required) {
    auto* opt = sub->add_option("scenario", o.scenario, "Scenario JSON file");
    if (scenario_required) opt->required();
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", o.out, "Write the report to this file");
  };

  auto* validate = app.add_subcommand("validate", "Check a scenario and its network");
  add_common(validate, true);
  auto* clear = app.add_subcommand("clear", "Clear the market for given bids");
  add_common(clear, true);
  clear->add_option("--bids", o.bids, "Comma-separated bids")->delimiter(',')->required();
  auto* gne = app.add_subcommand("gne", "Equilibrium of the regulated mechanism");
  add_common(gne, true);
  auto* ve = app.add_subcommand("ve", "Variational equilibrium of the unregulated game");
  add_common(ve, true);
  auto* social = app.add_subcommand("social", "Social optimum and price-taking equilibrium");
  add_common(social, true);
  auto* selfsuff = app.add_subcommand("selfsuff", "Self-sufficiency costs");
  add_common(selfsuff, true);
  auto* poa_cmd = app.add_subcommand("poa", "Price of anarchy and its bound");
  add_common(poa_cmd, true);

  auto* bid = app.add_subcommand("bid", "Run the distributed bidding algorithm");
  add_common(bid, true);
  bid->add_option("--eps", o.eps, "Stop tolerance on the bid change (infinity norm)");
  bid->add_option("--max-iter", o.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  bid->add_option("--trace", o.trace, "Write the iteration trace as CSV");

  auto* brlab = app.add_subcommand("brlab", "Best responses of the unregulated game");
  add_common(brlab, false);
  brlab->add_flag("--classify-2bus", o.classify, "Classify the two-bus example");
  brlab->add_option("--c", o.c, "Cost coefficient (two-bus example)");
  brlab->add_option("--D1", o.D1, "Demand reduction of prosumer 1 (two-bus example)");
  brlab->add_option("--D2", o.D2, "Demand reduction of prosumer 2 (two-bus example)");
  brlab->add_option("--F", o.F, "Line limit (two-bus example)");
  brlab->add_option("--prosumer", o.prosumer, "Scan this prosumer's cost (1-based)");
  brlab->add_option("--fix-bids", o.fix_bids, "Bid profile for the scan")->delimiter(',');
  brlab->add_flag("--verify", o.verify, "Check whether --bids (default: regulated equilibrium bids) is an equilibrium");
  brlab->add_flag("--iterate", o.iterate, "Best-response sweeps from --bids");
  brlab->add_flag("--region", o.region, "Closed-form price region of the three-bus example");
  brlab->add_option("--bids", o.bids, "Comma-separated bids")->delimiter(',');
  brlab->add_flag("--regulated", o.regulated, "Use regulated costs");
  brlab->add_option("--tol", o.tol, "Cost gap tolerance");
  brlab->add_option("--max-sweeps", o.max_sweeps, "Sweep cap for --iterate")->check(CLI::PositiveNumber);
  brlab->add_option("--lo", o.lo, "Scan interval lower end");
  brlab->add_option("--hi", o.hi, "Scan interval upper end");
  brlab->add_option("--scan-csv", o.scan_csv, "Write the coarse scan as CSV");

  auto* gen = app.add_subcommand("gen", "Generate a random radial scenario");
  gen->add_option("--seed", o.seed, "Random seed")->required();
  gen->add_option("--size", o.size, "Number of buses")->required()->check(CLI::Range(2, 100000));
  gen->add_option("--style", o.style, "Tree shape")->check(CLI::IsMember({"radial", "path", "star"}));
  gen->add_option("--a", o.a, "Market sensitivity (default max 1/c)");
  gen->add_option("--out", o.out, "Write the scenario to this file");

  auto* batch = app.add_subcommand("batch", "Evaluate every scenario file in a directory");
  batch->add_option("--dir", o.dir, "Directory of scenario files")->required();
  batch->add_option("--out-dir", o.out_dir, "Report directory (default $ESHARE_OUTPUT_DIR or DIR/reports)");
  batch->add_option("--command", o.batch_command, "Command to run per file")
      ->check(CLI::IsMember({"validate", "gne", "ve", "social", "selfsuff", "poa", "bid"}));
  batch->add_option("--jobs", o.jobs, "Worker threads");

  std::vector<std::string> argv_store{"eshare"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    if (gen->parsed()) {
      GeneratorOptions gopt;
      gopt.style = parse_tree_style(o.style);
      gopt.a = o.a;
      const std::string text = scenario_to_json(generate_scenario(o.seed, o.size, gopt)).dump(2) + "\n";
      if (o.out.empty()) {
        out << text;
      } else {
        write_atomic(o.out, text);
      }
      return kExitOk;
    }
    if (batch->parsed()) return run_batch(o, out, err);

    CLI::App* sub = app.get_subcommands().front();
    std::optional<LoadedScenario> loaded;
    if (!o.scenario.empty()) loaded = load_scenario(o.scenario);

    Report r;
    const std::string name = sub->get_name();
    if (name == "brlab") {
      cmd_brlab(loaded, o, r);
    } else {
      const Scenario& s = loaded->scenario;
      if (name == "validate") cmd_validate(s, r);
      else if (name == "clear") cmd_clear(s, o, r);
      else if (name == "gne") cmd_gne(s, r);
      else if (name == "ve") cmd_ve(s, r);
      else if (name == "social") cmd_social(s, r);
      else if (name == "selfsuff") cmd_selfsuff(s, r);
      else if (name == "poa") cmd_poa(s, r);
      else if (name == "bid") cmd_bid(s, o, r);
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    std::string text;
    if (o.format == "csv") {
      text = render_csv(r);
    } else {
      json doc{{"command", name}, {"results", r.results}, {"residuals", r.residuals}, {"warnings", r.warnings},
               {"timing_ms", ms}};
      if (loaded) {
        doc["scenario"] = {{"path", loaded->path}, {"digest", loaded->digest}, {"label", loaded->scenario.label}};
      }
      text = doc.dump(2) + "\n";
    }
    for (const auto& w : r.warnings) err << "warning: " << w.get<std::string>() << '\n';
    if (o.out.empty()) {
      out << text;
    } else {
      write_atomic(o.out, text);
    }
    return r.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace eshare
