#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/matrix.hpp"
#include "alphaloop/panel/calendar.hpp"

namespace alphaloop {

enum class Field { Open, High, Low, Close, Volume, Pe, Ps, Pb, Dyr };

std::string_view field_name(Field f);
std::optional<Field> parse_field(std::string_view name);
bool is_fundamental(Field f);

/// Point-in-time membership: date -> asset ids, in force until the next listed date.
struct Universe {
  std::map<Date, std::set<std::string>> membership;
};

/// Daily OHLC of the market index, aligned to the panel calendar.
struct IndexBars {
  std::vector<double> open;
  std::vector<double> high;
  std::vector<double> low;
  std::vector<double> close;
  bool derived = false;  // built from constituents rather than loaded
};

/// Immutable day x asset market data. All matrices share |days| x |assets|.
class PricePanel {
 public:
  struct Columns {
    Matrix open, high, low, close, volume;
    std::map<Field, Matrix> fundamentals;
  };

  PricePanel() = default;
  /// Validates every invariant; throws OhlcViolation / EmptyUniverse.
  /// When `index` is absent an equal-weight index is derived.
  PricePanel(TradingCalendar calendar, std::vector<std::string> assets, Columns columns,
             std::optional<Universe> universe = std::nullopt,
             std::optional<IndexBars> index = std::nullopt);

  const TradingCalendar& calendar() const { return calendar_; }
  const std::vector<std::string>& assets() const { return assets_; }
  std::size_t num_days() const { return calendar_.size(); }
  std::size_t num_assets() const { return assets_.size(); }
  std::optional<std::size_t> asset_index(std::string_view id) const;

  bool has_field(Field f) const;
  /// Throws UnknownField when a fundamental column was not loaded.
  const Matrix& field(Field f) const;
  const Matrix& close() const { return cols_.close; }

  bool has_universe() const { return universe_.has_value(); }
  const std::optional<Universe>& universe() const { return universe_; }
  bool is_member(std::size_t day, std::size_t asset) const {
    return member_mask_.empty() || member_mask_[day * assets_.size() + asset] != 0;
  }
  std::size_t universe_size(std::size_t day) const;

  const IndexBars& index() const { return index_; }

  /// Rows [first, last] inclusive by date. Throws DateOutOfRange.
  PricePanel slice(Date start, Date end) const;
  PricePanel slice_rows(std::size_t first, std::size_t last) const;

 private:
  void validate() const;
  void build_member_mask();
  void derive_index();

  TradingCalendar calendar_;
  std::vector<std::string> assets_;
  Columns cols_;
  std::optional<Universe> universe_;
  std::vector<std::uint8_t> member_mask_;
  IndexBars index_;
};

/// close(t+h)/close(t) - 1; the last h rows are missing. Throws HorizonTooLarge.
Matrix forward_return(const PricePanel& panel, int horizon);
Matrix forward_return(const Matrix& close, int horizon);

}  // namespace alphaloop
