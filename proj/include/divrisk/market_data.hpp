#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace divrisk {

/// CSV layout: first column holds ISO-8601 dates, remaining columns one
/// series per ticker.  Cells that are empty (or "NA"/"NaN" in any case)
/// count as missing and drop the whole row.
struct CsvSchema {
  std::string date_column = "date";
};

/// Raw parsed table, date-sorted, rows with missing cells removed.
struct PriceTable {
  std::vector<std::string> dates;            // strictly increasing
  std::vector<std::string> tickers;          // header order
  std::vector<std::vector<double>> columns;  // per ticker, length dates.size()
  std::size_t rows_dropped = 0;

  [[nodiscard]] std::size_t rows() const { return dates.size(); }
  [[nodiscard]] std::optional<std::size_t> ticker_index(const std::string& name) const;
};

PriceTable load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Simple returns r_t = P_t / P_{t-1} - 1 (length shrinks by one).
std::vector<double> to_returns(std::span<const double> prices);

/// Deviation losses d_t = mean(r) - r_t: positive when the period
/// underperforms the series average.
std::vector<double> deviations(std::span<const double> returns);

/// Uncompounded drawdown track of a return series.  The cumulative sum w is
/// seeded with w_0 = 0, so a drawdown can never be negative and an initial
/// losing streak measures against the seed.
///
/// peaks[t] is the 1-based index of the earliest running maximum of w up to
/// time t+1; 0 denotes the seed.
struct DrawdownTrack {
  std::vector<double> cumulative;  // w_t
  std::vector<double> drawdown;    // max_{tau <= t} w_tau - w_t  (>= 0)
  std::vector<int> peaks;          // tau(t), earliest argmax, 0 = seed
};

DrawdownTrack drawdown_market(std::span<const double> returns);

/// Drawdown of an asset relative to the market's peak times: the negated
/// asset return accumulated strictly after the market peak,
/// dd_t = -sum_{tau(t) < u <= t} r_u.  Feeding the market's own returns
/// reproduces the market drawdown, and the value may be negative when the
/// asset gained while the market slid.
std::vector<double> drawdown_asset(std::span<const double> asset_returns,
                                   const std::vector<int>& peaks);

/// Aligned market/asset return panel with the loss-side series derived once
/// up front.  Immutable after construction; safe to share across threads.
class MarketFrame {
 public:
  struct Options {
    std::string market_ticker;
    bool returns_input = false;       // table already holds returns
    std::string period_from, period_to;  // inclusive ISO bounds on return dates
  };

  MarketFrame(const PriceTable& table, const Options& opts);

  [[nodiscard]] const std::vector<std::string>& dates() const { return dates_; }
  [[nodiscard]] const std::vector<std::string>& tickers() const { return tickers_; }
  [[nodiscard]] std::size_t assets() const { return tickers_.size(); }
  [[nodiscard]] std::size_t periods() const { return market_returns_.size(); }

  [[nodiscard]] const std::vector<double>& market_returns() const { return market_returns_; }
  [[nodiscard]] const std::vector<double>& market_losses() const { return market_losses_; }
  [[nodiscard]] const std::vector<double>& market_deviations() const { return market_dev_; }
  [[nodiscard]] const DrawdownTrack& market_drawdown() const { return market_dd_; }

  [[nodiscard]] const std::vector<double>& asset_returns(std::size_t i) const;
  [[nodiscard]] const std::vector<double>& asset_losses(std::size_t i) const;
  [[nodiscard]] const std::vector<double>& asset_deviations(std::size_t i) const;
  [[nodiscard]] const std::vector<double>& asset_drawdown(std::size_t i) const;

 private:
  std::vector<std::string> dates_;    // return-dated
  std::vector<std::string> tickers_;  // non-market columns
  std::vector<double> market_returns_, market_losses_, market_dev_;
  DrawdownTrack market_dd_;
  std::vector<std::vector<double>> returns_, losses_, devs_, dds_;  // per asset
};

}  // namespace divrisk
