// divrisk: divergence-ball risk measures, Beta tables, and mean-risk
// portfolio frontiers over return/price CSVs.
//
// Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver error.
// Every failure prints exactly one line on stderr of the form
//   error: <config|data|solver|internal>: <reason>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "divrisk/betas.hpp"
#include "divrisk/divergence.hpp"
#include "divrisk/errors.hpp"
#include "divrisk/market_data.hpp"
#include "divrisk/portfolio_opt.hpp"
#include "divrisk/risk_engine.hpp"

namespace {

using nlohmann::json;

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Relative output paths land in $DIVRISK_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output(const std::string& base) {
  std::filesystem::path p(base);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("DIVRISK_OUTPUT_DIR"))
      if (*dir) p = std::filesystem::path(dir) / p;
  }
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  return p;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw divrisk::ParseError("cannot open for writing: " + p.string(), 0);
  f << text;
  if (!f) throw divrisk::ParseError("write failed: " + p.string(), 0);
}

struct OutputOptions {
  std::string base;            // empty: stdout only
  std::string format = "both"; // csv | json | both
};

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("-o,--output", out.base,
                  "output base path; writes <base>.csv / <base>.json");
  cmd->add_option("--format", out.format, "which report files to write")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
}

void emit(const OutputOptions& out, const std::string& csv, const json& report) {
  std::fputs(csv.c_str(), stdout);
  if (out.base.empty()) return;
  auto base = resolve_output(out.base);
  if (out.format != "json")
    write_file(base.string() + ".csv", csv);
  if (out.format != "csv")
    write_file(base.string() + ".json", report.dump(2) + "\n");
}

struct DivOptions {
  std::string kind = "hellinger";
  double scale = 0.0;       // 0: use the kind's default
  double alpha_param = 2.0; // order of the alpha family
};

void add_div_flags(CLI::App* cmd, DivOptions& d) {
  cmd->add_option("--div", d.kind, "divergence kind")
      ->check(CLI::IsMember({"tv", "kl", "rkl", "pearson", "neyman",
                             "hellinger", "js", "alpha"}))
      ->capture_default_str();
  cmd->add_option("--scale", d.scale,
                  "divergence scale a > 0 (default: 1, hellinger 1/2)");
  cmd->add_option("--alpha-param", d.alpha_param,
                  "order for --div alpha (not 0 or 1)")
      ->capture_default_str();
}

divrisk::DivergenceSpec make_spec(const DivOptions& d) {
  using divrisk::DivKind;
  if (d.kind == "alpha")
    return divrisk::DivergenceSpec::alpha(d.alpha_param,
                                          d.scale > 0.0 ? d.scale : 1.0);
  DivKind k = DivKind::SquaredHellinger;
  if (d.kind == "tv") k = DivKind::TotalVariation;
  else if (d.kind == "kl") k = DivKind::KL;
  else if (d.kind == "rkl") k = DivKind::ReverseKL;
  else if (d.kind == "pearson") k = DivKind::PearsonChi2;
  else if (d.kind == "neyman") k = DivKind::NeymanChi2;
  else if (d.kind == "js") k = DivKind::JensenShannon;
  return d.scale > 0.0 ? divrisk::DivergenceSpec::make(k, d.scale)
                       : divrisk::DivergenceSpec::make(k);
}

struct DataOptions {
  std::string input;
  bool returns_input = false;
  std::string market;
  std::string from, to;
};

void add_data_flags(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("-i,--input", d.input, "CSV file: date column plus tickers")
      ->required();
  cmd->add_flag("--returns-input", d.returns_input,
                "input holds simple returns rather than prices");
  cmd->add_option("--market", d.market, "ticker of the market column");
  cmd->add_option("--from", d.from, "first return date kept (inclusive)");
  cmd->add_option("--to", d.to, "last return date kept (inclusive)");
}

divrisk::PriceTable load_table(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw divrisk::ParseError("no such file: " + path, 0);
  return divrisk::load_csv(path, divrisk::CsvSchema{});
}

divrisk::MarketFrame load_frame(const DataOptions& d) {
  divrisk::PriceTable table = load_table(d.input);
  std::string market = d.market;
  if (market.empty()) {
    if (table.tickers.size() == 1) {
      market = table.tickers.front();
    } else {
      throw std::invalid_argument(
          "--market is required when the file has several tickers");
    }
  }
  divrisk::MarketFrame::Options opts;
  opts.market_ticker = market;
  opts.returns_input = d.returns_input;
  opts.period_from = d.from;
  opts.period_to = d.to;
  return divrisk::MarketFrame(table, opts);
}

json config_echo(const DataOptions& d, const divrisk::DivergenceSpec& spec) {
  json j;
  j["input"] = d.input;
  j["returns_input"] = d.returns_input;
  j["market"] = d.market;
  if (!d.from.empty()) j["from"] = d.from;
  if (!d.to.empty()) j["to"] = d.to;
  j["divergence"] = spec.label();
  return j;
}

// ---------------------------------------------------------------- risk ----

int run_risk(const DataOptions& data, const DivOptions& div, double delta,
             const std::string& method, const OutputOptions& out) {
  divrisk::MarketFrame frame = load_frame(data);
  divrisk::DivergenceSpec spec = make_spec(div);
  divrisk::SolverConfig cfg;
  if (method == "primal") cfg.method = divrisk::SolverConfig::Method::Primal;
  if (method == "dual") cfg.method = divrisk::SolverConfig::Method::Dual;
  auto loss = divrisk::EmpiricalLoss::single_path(frame.market_losses());
  divrisk::RiskResult r = divrisk::rho(loss, spec, delta, cfg);

  std::string csv = "date,loss,weight\n";
  const auto& q = r.identifier_single();
  for (std::size_t t = 0; t < q.size(); ++t)
    csv += frame.dates()[t] + "," + fmt6(frame.market_losses()[t]) + "," +
           fmt6(q[t]) + "\n";

  json rep;
  rep["command"] = "risk";
  rep["config"] = config_echo(data, spec);
  rep["config"]["delta"] = delta;
  rep["config"]["method"] = method;
  rep["value"] = r.value;
  rep["attained"] = r.attained;
  if (r.t_star) rep["t_star"] = *r.t_star;
  if (r.mu_star) rep["mu_star"] = *r.mu_star;
  rep["residuals"] = {r.residuals[0], r.residuals[1]};
  rep["iterations"] = r.iterations;
  rep["dates"] = frame.dates();
  rep["losses"] = frame.market_losses();
  rep["identifier"] = q;

  std::printf("%s\n", fmt_full(r.value).c_str());
  if (!out.base.empty()) {
    auto base = resolve_output(out.base);
    if (out.format != "json") write_file(base.string() + ".csv", csv);
    if (out.format != "csv") write_file(base.string() + ".json", rep.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------- betas ---

struct ComparatorSpec {
  std::string name;  // standard | cdar | erod
  double param = 0.0;
};

ComparatorSpec parse_comparator(const std::string& s) {
  auto colon = s.find(':');
  ComparatorSpec c;
  c.name = s.substr(0, colon);
  if (c.name == "cdar") c.param = 0.5;
  if (colon != std::string::npos) {
    try {
      c.param = std::stod(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad comparator parameter in '" + s + "'");
    }
  }
  if (c.name != "standard" && c.name != "cdar" && c.name != "erod")
    throw std::invalid_argument("unknown comparator '" + c.name +
                                "' (use standard, cdar:A, erod:E)");
  return c;
}

divrisk::BetaReport run_comparator(const divrisk::MarketFrame& frame,
                                   const ComparatorSpec& c) {
  divrisk::BetaRequest req;
  if (c.name == "standard") {
    req.kind = divrisk::BetaKind::Standard;
  } else if (c.name == "cdar") {
    req.kind = divrisk::BetaKind::CDaR;
    req.alpha = c.param;
  } else {
    req.kind = divrisk::BetaKind::ERoD;
    req.epsilon = c.param;
  }
  return divrisk::compute_betas(frame, req, {});
}

std::string comparator_column(const ComparatorSpec& c) {
  if (c.name == "standard") return "standard_beta";
  if (c.name == "cdar") return "cdar_beta[alpha=" + fmt6(c.param) + "]";
  return "erod_beta[eps=" + fmt6(c.param) + "]";
}

divrisk::BetaKind beta_kind_from_flag(const std::string& kind) {
  if (kind == "return") return divrisk::BetaKind::FReturn;
  if (kind == "deviation") return divrisk::BetaKind::FDeviation;
  return divrisk::BetaKind::FDrawdown;
}

int run_beta(const DataOptions& data, const DivOptions& div, double delta,
             const std::string& kind, const std::vector<std::string>& comps,
             const OutputOptions& out) {
  divrisk::MarketFrame frame = load_frame(data);
  if (frame.assets() == 0)
    throw std::invalid_argument("no asset columns besides the market");
  divrisk::DivergenceSpec spec = make_spec(div);

  divrisk::BetaRequest req;
  req.kind = beta_kind_from_flag(kind);
  req.spec = spec;
  req.delta = delta;
  divrisk::BetaReport rep = divrisk::compute_betas(frame, req, {});

  std::vector<ComparatorSpec> cspecs;
  std::vector<divrisk::BetaReport> creps;
  for (const auto& s : comps) {
    cspecs.push_back(parse_comparator(s));
    creps.push_back(run_comparator(frame, cspecs.back()));
  }

  std::string main_col = std::string(kind) + "_beta[" + spec.label() +
                         ";delta=" + fmt6(delta) + "]";
  std::string csv = "ticker," + main_col;
  for (const auto& c : cspecs) csv += "," + comparator_column(c);
  csv += "\n";
  for (std::size_t i = 0; i < rep.tickers.size(); ++i) {
    csv += rep.tickers[i] + "," + fmt6(rep.betas[i]);
    for (const auto& cr : creps) csv += "," + fmt6(cr.betas[i]);
    csv += "\n";
  }

  json j;
  j["command"] = kind == "drawdown" ? "dd-beta" : "beta";
  j["config"] = config_echo(data, spec);
  j["config"]["delta"] = delta;
  j["config"]["kind"] = kind;
  j["tickers"] = rep.tickers;
  j["betas"] = rep.betas;
  j["market_risk"] = rep.market_risk;
  j["warnings"] = rep.warnings;
  if (!rep.identifier.empty()) j["identifier"] = rep.identifier;
  json jc = json::object();
  for (std::size_t k = 0; k < cspecs.size(); ++k) {
    jc[comparator_column(cspecs[k])] = {{"betas", creps[k].betas},
                                        {"market_risk", creps[k].market_risk}};
  }
  j["comparators"] = jc;

  emit(out, csv, j);
  return 0;
}

// ---------------------------------------------------------------- sweep ---

int run_sweep(const DataOptions& data, const DivOptions& div,
              const std::vector<double>& deltas, const std::string& kind,
              const OutputOptions& out) {
  if (deltas.empty()) throw std::invalid_argument("--deltas must be nonempty");
  divrisk::MarketFrame frame = load_frame(data);
  if (frame.assets() == 0)
    throw std::invalid_argument("no asset columns besides the market");
  divrisk::DivergenceSpec spec = make_spec(div);

  divrisk::BetaRequest req;
  req.kind = beta_kind_from_flag(kind);
  req.spec = spec;
  divrisk::SweepResult sr = divrisk::delta_sweep(frame, req, deltas, {});

  std::string csv = "ticker";
  for (double d : deltas) csv += ",beta[delta=" + fmt6(d) + "]";
  csv += "\n";
  for (std::size_t i = 0; i < frame.assets(); ++i) {
    csv += frame.tickers()[i];
    for (const auto& r : sr.reports) csv += "," + fmt6(r.betas[i]);
    csv += "\n";
  }

  json j;
  j["command"] = "sweep";
  j["config"] = config_echo(data, spec);
  j["config"]["kind"] = kind;
  j["config"]["deltas"] = deltas;
  j["tickers"] = frame.tickers();
  json rows = json::array();
  for (std::size_t k = 0; k < sr.reports.size(); ++k) {
    rows.push_back({{"delta", deltas[k]},
                    {"betas", sr.reports[k].betas},
                    {"market_risk", sr.reports[k].market_risk},
                    {"warnings", sr.reports[k].warnings}});
  }
  j["reports"] = rows;
  json drift = json::array();
  for (auto dd : sr.drift) drift.push_back(divrisk::drift_name(dd));
  j["drift"] = drift;

  emit(out, csv, j);
  return 0;
}

// ------------------------------------------------------------- frontier ---

std::vector<double> load_probs(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw divrisk::ParseError("no such file: " + path, 0);
  std::vector<double> probs;
  double v;
  while (f >> v) probs.push_back(v);
  return probs;
}

divrisk::ScenarioPanel build_panel(const std::vector<std::string>& inputs,
                                   const std::string& probs_file,
                                   bool returns_input) {
  std::vector<std::vector<std::vector<double>>> paths;
  std::vector<std::string> tickers;
  for (const auto& in : inputs) {
    divrisk::PriceTable t = load_table(in);
    if (tickers.empty()) {
      tickers = t.tickers;
    } else if (tickers != t.tickers) {
      throw divrisk::ParseError("ticker mismatch across path files (" + in + ")", 0);
    }
    std::vector<std::vector<double>> path;
    path.reserve(t.tickers.size());
    for (const auto& col : t.columns)
      path.push_back(returns_input ? col : divrisk::to_returns(col));
    paths.push_back(std::move(path));
  }
  std::vector<double> probs;
  if (!probs_file.empty()) {
    probs = load_probs(probs_file);
    if (probs.size() != paths.size())
      throw divrisk::ParseError("path-probability count does not match inputs", 0);
  } else {
    probs.assign(paths.size(), 1.0 / static_cast<double>(paths.size()));
  }
  return divrisk::ScenarioPanel(std::move(tickers), std::move(paths),
                                std::move(probs));
}

int run_frontier(const std::vector<std::string>& inputs,
                 const std::string& probs_file, bool returns_input,
                 const DivOptions& div, double delta,
                 std::vector<double> targets, int points,
                 const OutputOptions& out) {
  divrisk::ScenarioPanel panel = build_panel(inputs, probs_file, returns_input);
  divrisk::DivergenceSpec spec = make_spec(div);
  divrisk::PortfolioProblem base{panel, spec, delta,
                                 -std::numeric_limits<double>::infinity()};
  divrisk::OptConfig cfg;

  if (targets.empty()) {
    if (points < 1) throw std::invalid_argument("--points must be >= 1");
    divrisk::PortfolioSolution s0 = divrisk::min_risk(base, cfg);
    auto mu = panel.mean_returns();
    double hi = *std::max_element(mu.begin(), mu.end());
    double lo = std::min(s0.mean_return, hi);
    for (int k = 0; k < points; ++k)
      targets.push_back(points == 1 ? lo
                                    : lo + (hi - lo) * k / (points - 1.0));
  }
  auto pts = divrisk::efficient_frontier(base, targets, cfg);

  std::string csv = "target,feasible,risk,mean_return,lambda";
  for (const auto& tk : panel.tickers) csv += ",w_" + tk;
  csv += "\n";
  for (const auto& pt : pts) {
    csv += fmt6(pt.target_return);
    csv += pt.feasible ? ",1" : ",0";
    if (pt.feasible) {
      csv += "," + fmt6(pt.solution.risk) + "," + fmt6(pt.solution.mean_return) +
             "," + fmt6(pt.solution.lambda_star);
      for (double w : pt.solution.weights) csv += "," + fmt6(w);
    } else {
      csv += ",,,";
      for (std::size_t i = 0; i < panel.assets(); ++i) csv += ",";
    }
    csv += "\n";
  }

  json j;
  j["command"] = "frontier";
  j["config"] = {{"inputs", inputs},
                 {"returns_input", returns_input},
                 {"divergence", spec.label()},
                 {"delta", delta},
                 {"targets", targets}};
  if (!probs_file.empty()) j["config"]["path_probs"] = probs_file;
  j["tickers"] = panel.tickers;
  json rows = json::array();
  for (const auto& pt : pts) {
    json r;
    r["target"] = pt.target_return;
    r["feasible"] = pt.feasible;
    if (pt.feasible) {
      r["risk"] = pt.solution.risk;
      r["mean_return"] = pt.solution.mean_return;
      r["lambda"] = pt.solution.lambda_star;
      r["weights"] = pt.solution.weights;
      r["capm_residuals"] = pt.solution.capm_residuals;
      r["iterations"] = pt.solution.iterations;
      r["converged"] = pt.solution.converged;
    } else {
      r["note"] = pt.note;
    }
    rows.push_back(std::move(r));
  }
  j["points"] = rows;

  emit(out, csv, j);
  return 0;
}

// ----------------------------------------------------------------- corr ---

int run_corr(const std::string& input, const std::string& col_a,
             const std::string& col_b, const OutputOptions& out) {
  std::ifstream f(input);
  if (!f) throw divrisk::ParseError("no such file: " + input, 0);
  std::string line;
  if (!std::getline(f, line))
    throw divrisk::ParseError("empty table: " + input, 0);
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };
  auto header = split(line);
  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::invalid_argument("column '" + name + "' not found in " + input);
  };
  std::size_t ia = find_col(col_a), ib = find_col(col_b);

  std::vector<double> a, b;
  std::size_t row = 1;
  while (std::getline(f, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw divrisk::ParseError("row has " + std::to_string(cells.size()) +
                                    " cells, header has " +
                                    std::to_string(header.size()),
                                row);
    try {
      a.push_back(std::stod(cells[ia]));
      b.push_back(std::stod(cells[ib]));
    } catch (const std::exception&) {
      throw divrisk::ParseError("non-numeric cell in correlation columns", row);
    }
  }
  divrisk::Correlations c = divrisk::period_correlations(a, b);

  std::string csv = "metric,value\npearson," + fmt6(c.pearson) + "\nspearman," +
                    fmt6(c.spearman) + "\n";
  json j;
  j["command"] = "corr";
  j["config"] = {{"input", input}, {"col_a", col_a}, {"col_b", col_b}};
  j["pearson"] = c.pearson;
  j["spearman"] = c.spearman;
  j["rows"] = a.size();

  emit(out, csv, j);
  return 0;
}

// ------------------------------------------------------------- gen-demo ---

std::string iso_date(std::chrono::sys_days day) {
  std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()));
  return buf;
}

int run_gen_demo(const std::string& output, int assets, int periods,
                 unsigned long long seed, std::vector<double> betas,
                 double market_drift, double market_vol, double noise) {
  if (assets < 1) throw std::invalid_argument("--assets must be >= 1");
  if (periods < 2) throw std::invalid_argument("--periods must be >= 2");
  if (market_vol <= 0 || noise < 0)
    throw std::invalid_argument("volatilities must be positive");
  if (betas.empty()) {
    for (int i = 0; i < assets; ++i)
      betas.push_back(assets == 1 ? 1.0 : 0.25 + 1.75 * i / (assets - 1.0));
  }
  if (static_cast<int>(betas.size()) != assets)
    throw std::invalid_argument("--betas length must match --assets");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);

  std::string csv = "date";
  csv += ",MKT";
  for (int i = 0; i < assets; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "A%02d", i + 1);
    csv += std::string(",") + name;
  }
  csv += "\n";

  using namespace std::chrono;
  sys_days day = sys_days(year{2018} / 1 / 2);
  char cell[32];
  for (int t = 0; t < periods; ++t) {
    double rm = market_drift + market_vol * n01(rng);
    csv += iso_date(day);
    std::snprintf(cell, sizeof cell, ",%.10g", rm);
    csv += cell;
    for (int i = 0; i < assets; ++i) {
      double ri = betas[i] * rm + noise * n01(rng);
      std::snprintf(cell, sizeof cell, ",%.10g", ri);
      csv += cell;
    }
    csv += "\n";
    day += days{1};
  }

  auto base = resolve_output(output);
  write_file(base.string() + ".csv", csv);

  json meta;
  meta["command"] = "gen-demo";
  meta["market"] = "MKT";
  meta["seed"] = seed;
  meta["periods"] = periods;
  meta["market_drift"] = market_drift;
  meta["market_vol"] = market_vol;
  meta["noise"] = noise;
  json jb = json::object();
  for (int i = 0; i < assets; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "A%02d", i + 1);
    jb[name] = betas[i];
  }
  meta["betas"] = jb;
  write_file(base.string() + "_meta.json", meta.dump(2) + "\n");

  std::printf("wrote %s.csv (%d periods, %d assets) and %s_meta.json\n",
              base.string().c_str(), periods, assets, base.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f-divergence risk measures, Betas, and mean-risk frontiers"};
  app.require_subcommand(1);
  int rc = 0;

  // risk
  DataOptions risk_data;
  DivOptions risk_div;
  double risk_delta = 0.2;
  std::string risk_method = "auto";
  OutputOptions risk_out;
  auto* risk_cmd = app.add_subcommand(
      "risk", "Robust expected loss of the market column");
  add_data_flags(risk_cmd, risk_data);
  add_div_flags(risk_cmd, risk_div);
  risk_cmd->add_option("--delta", risk_delta, "divergence budget")
      ->capture_default_str();
  risk_cmd->add_option("--method", risk_method, "solution form")
      ->check(CLI::IsMember({"auto", "primal", "dual"}))
      ->capture_default_str();
  add_output_flags(risk_cmd, risk_out);
  risk_cmd->callback([&] {
    rc = run_risk(risk_data, risk_div, risk_delta, risk_method, risk_out);
  });

  // beta
  DataOptions beta_data;
  DivOptions beta_div;
  double beta_delta = 0.2;
  std::string beta_kind = "return";
  std::vector<std::string> beta_comps;
  OutputOptions beta_out;
  auto* beta_cmd =
      app.add_subcommand("beta", "Per-asset Betas against the market column");
  add_data_flags(beta_cmd, beta_data);
  add_div_flags(beta_cmd, beta_div);
  beta_cmd->add_option("--delta", beta_delta, "divergence budget")
      ->capture_default_str();
  beta_cmd->add_option("--kind", beta_kind, "loss series used")
      ->check(CLI::IsMember({"return", "deviation"}))
      ->capture_default_str();
  beta_cmd
      ->add_option("--comparators", beta_comps,
                   "extra columns: standard, cdar:A, erod:E")
      ->delimiter(',');
  add_output_flags(beta_cmd, beta_out);
  beta_cmd->callback([&] {
    rc = run_beta(beta_data, beta_div, beta_delta, beta_kind, beta_comps,
                  beta_out);
  });

  // dd-beta
  DataOptions dd_data;
  DivOptions dd_div;
  double dd_delta = 0.2;
  std::vector<std::string> dd_comps;
  OutputOptions dd_out;
  auto* dd_cmd = app.add_subcommand(
      "dd-beta", "Drawdown Betas against the market column");
  add_data_flags(dd_cmd, dd_data);
  add_div_flags(dd_cmd, dd_div);
  dd_cmd->add_option("--delta", dd_delta, "divergence budget")
      ->capture_default_str();
  dd_cmd
      ->add_option("--comparators", dd_comps,
                   "extra columns: standard, cdar:A, erod:E")
      ->delimiter(',');
  add_output_flags(dd_cmd, dd_out);
  dd_cmd->callback([&] {
    rc = run_beta(dd_data, dd_div, dd_delta, "drawdown", dd_comps, dd_out);
  });

  // sweep
  DataOptions sweep_data;
  DivOptions sweep_div;
  std::vector<double> sweep_deltas;
  std::string sweep_kind = "deviation";
  OutputOptions sweep_out;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Beta table across an ascending grid of budgets");
  add_data_flags(sweep_cmd, sweep_data);
  add_div_flags(sweep_cmd, sweep_div);
  sweep_cmd->add_option("--deltas", sweep_deltas, "ascending budgets")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--kind", sweep_kind, "loss series used")
      ->check(CLI::IsMember({"return", "deviation", "drawdown"}))
      ->capture_default_str();
  add_output_flags(sweep_cmd, sweep_out);
  sweep_cmd->callback([&] {
    rc = run_sweep(sweep_data, sweep_div, sweep_deltas, sweep_kind, sweep_out);
  });

  // frontier
  std::vector<std::string> fr_inputs;
  std::string fr_probs;
  bool fr_returns = false;
  DivOptions fr_div;
  double fr_delta = 0.2;
  std::vector<double> fr_targets;
  int fr_points = 5;
  OutputOptions fr_out;
  auto* fr_cmd = app.add_subcommand(
      "frontier", "Mean-risk efficient frontier over the asset columns");
  fr_cmd->add_option("-i,--input", fr_inputs, "CSV per scenario path")
      ->required();
  fr_cmd->add_option("--path-probs", fr_probs,
                     "file of path probabilities (one per line)");
  fr_cmd->add_flag("--returns-input", fr_returns,
                   "inputs hold simple returns rather than prices");
  add_div_flags(fr_cmd, fr_div);
  fr_cmd->add_option("--delta", fr_delta, "divergence budget")
      ->capture_default_str();
  fr_cmd->add_option("--targets", fr_targets, "mean-return floors (ascending)")
      ->delimiter(',');
  fr_cmd->add_option("--points", fr_points,
                     "auto-spaced target count when --targets is absent")
      ->capture_default_str();
  add_output_flags(fr_cmd, fr_out);
  fr_cmd->callback([&] {
    rc = run_frontier(fr_inputs, fr_probs, fr_returns, fr_div, fr_delta,
                      fr_targets, fr_points, fr_out);
  });

  // corr
  std::string corr_input, corr_a, corr_b;
  OutputOptions corr_out;
  auto* corr_cmd = app.add_subcommand(
      "corr", "Pearson/Spearman correlation between two table columns");
  corr_cmd->add_option("-i,--input", corr_input, "CSV table (e.g. a Beta report)")
      ->required();
  corr_cmd->add_option("--col-a", corr_a, "first column name")->required();
  corr_cmd->add_option("--col-b", corr_b, "second column name")->required();
  add_output_flags(corr_cmd, corr_out);
  corr_cmd->callback([&] { rc = run_corr(corr_input, corr_a, corr_b, corr_out); });

  // gen-demo
  std::string gd_output = "demo";
  int gd_assets = 8, gd_periods = 2000;
  unsigned long long gd_seed = 42;
  std::vector<double> gd_betas;
  double gd_drift = 0.0005, gd_vol = 0.045, gd_noise = 0.015;
  auto* gd_cmd = app.add_subcommand(
      "gen-demo", "Write a synthetic returns CSV with planted Betas");
  gd_cmd->add_option("-o,--output", gd_output,
                     "output base path; writes <base>.csv and <base>_meta.json")
      ->capture_default_str();
  gd_cmd->add_option("--assets", gd_assets, "asset count")->capture_default_str();
  gd_cmd->add_option("--periods", gd_periods, "return rows")->capture_default_str();
  gd_cmd->add_option("--seed", gd_seed, "generator seed")->capture_default_str();
  gd_cmd->add_option("--betas", gd_betas, "planted Betas (default: spaced)")
      ->delimiter(',');
  gd_cmd->add_option("--market-drift", gd_drift, "market mean return")
      ->capture_default_str();
  gd_cmd->add_option("--market-vol", gd_vol, "market volatility")
      ->capture_default_str();
  gd_cmd->add_option("--noise", gd_noise, "idiosyncratic volatility")
      ->capture_default_str();
  gd_cmd->callback([&] {
    rc = run_gen_demo(gd_output, gd_assets, gd_periods, gd_seed, gd_betas,
                      gd_drift, gd_vol, gd_noise);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const divrisk::ParseError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 2;
  } catch (const divrisk::InfeasibleError& e) {
    std::cerr << "error: solver: " << e.what() << "\n";
    return 3;
  } catch (const divrisk::SolverError& e) {
    std::cerr << "error: solver: " << e.what() << "\n";
    return 3;
  } catch (const divrisk::DegenerateError& e) {
    std::cerr << "error: solver: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
