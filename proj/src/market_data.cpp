#include "divrisk/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "divrisk/errors.hpp"

namespace divrisk {

namespace {

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && issp(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_missing(const std::string& cell) {
  if (cell.empty()) return true;
  std::string low;
  for (char c : cell) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return low == "na" || low == "nan";
}

bool iso_date_ok(const std::string& d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
  int mm = (d[5] - '0') * 10 + (d[6] - '0');
  int dd = (d[8] - '0') * 10 + (d[9] - '0');
  return mm >= 1 && mm <= 12 && dd >= 1 && dd <= 31;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  double v = 0.0;
  const char* b = cell.data();
  const char* e = b + cell.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e || !std::isfinite(v))
    throw ParseError("non-numeric cell '" + cell + "' in column " + col +
                         " at data row " + std::to_string(row),
                     row);
  return v;
}

}  // namespace

std::optional<std::size_t> PriceTable::ticker_index(const std::string& name) const {
  for (std::size_t i = 0; i < tickers.size(); ++i)
    if (tickers[i] == name) return i;
  return std::nullopt;
}

PriceTable load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file '" + path.string() + "'");
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != schema.date_column)
    throw ParseError("header must start with '" + schema.date_column + "' column");
  if (header.size() < 2) throw ParseError("no ticker columns in header");

  PriceTable t;
  t.tickers.assign(header.begin() + 1, header.end());

  struct Row {
    std::string date;
    std::vector<double> vals;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;  // 1-based data row counter
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(lineno) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(header.size()),
                       lineno);
    if (!iso_date_ok(cells[0]))
      throw ParseError("bad ISO-8601 date '" + cells[0] + "' at data row " +
                           std::to_string(lineno),
                       lineno);
    bool missing = false;
    Row r;
    r.date = cells[0];
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (is_missing(cells[c])) {
        missing = true;
        break;
      }
      r.vals.push_back(parse_cell(cells[c], lineno, header[c]));
    }
    if (missing)
      ++t.rows_dropped;
    else
      rows.push_back(std::move(r));
    ++lineno;
  }
  if (rows.empty()) throw ParseError("no usable data rows in '" + path.string() + "'");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw ParseError("duplicate date " + rows[i].date, i + 1);

  t.columns.assign(t.tickers.size(), {});
  for (auto& c : t.columns) c.reserve(rows.size());
  t.dates.reserve(rows.size());
  for (auto& r : rows) {
    t.dates.push_back(std::move(r.date));
    for (std::size_t c = 0; c < t.tickers.size(); ++c)
      t.columns[c].push_back(r.vals[c]);
  }
  return t;
}

std::vector<double> to_returns(std::span<const double> prices) {
  if (prices.size() < 2)
    throw std::invalid_argument("to_returns: need at least two prices");
  std::vector<double> r;
  r.reserve(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) {
    if (prices[i - 1] == 0.0)
      throw std::invalid_argument("to_returns: zero price at index " + std::to_string(i - 1));
    r.push_back(prices[i] / prices[i - 1] - 1.0);
  }
  return r;
}

std::vector<double> deviations(std::span<const double> returns) {
  if (returns.empty()) throw std::invalid_argument("deviations: empty series");
  double mean = std::accumulate(returns.begin(), returns.end(), 0.0) /
                static_cast<double>(returns.size());
  std::vector<double> d;
  d.reserve(returns.size());
  for (double r : returns) d.push_back(mean - r);
  return d;
}

DrawdownTrack drawdown_market(std::span<const double> returns) {
  if (returns.empty()) throw std::invalid_argument("drawdown_market: empty series");
  DrawdownTrack out;
  out.cumulative.reserve(returns.size());
  out.drawdown.reserve(returns.size());
  out.peaks.reserve(returns.size());
  double w = 0.0;
  double peak = 0.0;  // the w_0 = 0 seed
  int peak_at = 0;
  for (std::size_t t = 0; t < returns.size(); ++t) {
    w += returns[t];
    if (w > peak) {  // strict: earliest maximum wins ties
      peak = w;
      peak_at = static_cast<int>(t) + 1;
    }
    out.cumulative.push_back(w);
    out.drawdown.push_back(peak - w);
    out.peaks.push_back(peak_at);
  }
  return out;
}

std::vector<double> drawdown_asset(std::span<const double> asset_returns,
                                   const std::vector<int>& peaks) {
  if (asset_returns.size() != peaks.size())
    throw std::invalid_argument("drawdown_asset: length mismatch");
  // prefix[k] = sum of the first k returns; window (tau, t] is a difference
  std::vector<double> prefix(asset_returns.size() + 1, 0.0);
  for (std::size_t i = 0; i < asset_returns.size(); ++i)
    prefix[i + 1] = prefix[i] + asset_returns[i];
  std::vector<double> dd(asset_returns.size());
  for (std::size_t t = 0; t < asset_returns.size(); ++t) {
    int tau = peaks[t];
    if (tau < 0 || static_cast<std::size_t>(tau) > t + 1)
      throw std::invalid_argument("drawdown_asset: peak index out of range");
    dd[t] = -(prefix[t + 1] - prefix[static_cast<std::size_t>(tau)]);
  }
  return dd;
}

MarketFrame::MarketFrame(const PriceTable& table, const Options& opts) {
  auto mkt = table.ticker_index(opts.market_ticker);
  if (!mkt)
    throw std::invalid_argument("market ticker '" + opts.market_ticker +
                                "' not present in table");

  // derive returns first; period bounds select return dates
  std::vector<std::string> rdates;
  std::vector<std::vector<double>> rcols(table.tickers.size());
  if (opts.returns_input) {
    rdates = table.dates;
    rcols = table.columns;
  } else {
    if (table.rows() < 2)
      throw ParseError("need at least two price rows to form returns");
    rdates.assign(table.dates.begin() + 1, table.dates.end());
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      rcols[c] = to_returns(table.columns[c]);
  }

  std::size_t b = 0, e = rdates.size();
  if (!opts.period_from.empty())
    b = static_cast<std::size_t>(
        std::lower_bound(rdates.begin(), rdates.end(), opts.period_from) - rdates.begin());
  if (!opts.period_to.empty())
    e = static_cast<std::size_t>(
        std::upper_bound(rdates.begin(), rdates.end(), opts.period_to) - rdates.begin());
  if (b >= e) throw std::invalid_argument("period selects no return dates");

  dates_.assign(rdates.begin() + b, rdates.begin() + e);
  market_returns_.assign(rcols[*mkt].begin() + b, rcols[*mkt].begin() + e);
  market_losses_.resize(market_returns_.size());
  std::transform(market_returns_.begin(), market_returns_.end(),
                 market_losses_.begin(), std::negate<>{});
  market_dev_ = deviations(market_returns_);
  market_dd_ = drawdown_market(market_returns_);

  for (std::size_t c = 0; c < table.tickers.size(); ++c) {
    if (c == *mkt) continue;
    tickers_.push_back(table.tickers[c]);
    std::vector<double> r(rcols[c].begin() + b, rcols[c].begin() + e);
    std::vector<double> l(r.size());
    std::transform(r.begin(), r.end(), l.begin(), std::negate<>{});
    devs_.push_back(deviations(r));
    dds_.push_back(drawdown_asset(r, market_dd_.peaks));
    returns_.push_back(std::move(r));
    losses_.push_back(std::move(l));
  }
}

const std::vector<double>& MarketFrame::asset_returns(std::size_t i) const {
  return returns_.at(i);
}
const std::vector<double>& MarketFrame::asset_losses(std::size_t i) const {
  return losses_.at(i);
}
const std::vector<double>& MarketFrame::asset_deviations(std::size_t i) const {
  return devs_.at(i);
}
const std::vector<double>& MarketFrame::asset_drawdown(std::size_t i) const {
  return dds_.at(i);
}

}  // namespace divrisk
