#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/date.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/panel/calendar.hpp"

namespace alphaloop::exchange {

enum class Settlement { TPlus1, TPlus0 };

struct MarketProfile {
  MarketId market = MarketId::UsLike;
  Settlement settlement = Settlement::TPlus0;
  bool allow_short = true;
  long long lot_size = 1;
  double commission_rate = 0.0001;
  double initial_margin_rate = 0.20;
  double maintenance_ratio = 0.80;
  int days_per_year = 252;
  double rf_annual = 0.0381;

  static MarketProfile csi();
  static MarketProfile us();
  static MarketProfile for_market(MarketId m);
};

enum class Side { Buy, Sell, Short, Cover };
enum class OrderStatus { Pending, Filled, Expired, Rejected, Cancelled };

std::string_view to_string(Side s);
std::string_view to_string(OrderStatus s);

using OrderId = std::uint64_t;

/// Orders expire after this many settlements pending and leave the book
/// after kPurgeAge.
inline constexpr int kExpiryAge = 7;
inline constexpr int kPurgeAge = 14;

struct OrderRequest {
  std::string asset;
  Side side = Side::Buy;
  long long quantity = 0;
  std::optional<double> limit_price;  // market order when absent
};

struct Order {
  OrderId id = 0;
  OrderRequest request;
  double ref_price = 0.0;
  Date submitted_day;
  OrderStatus status = OrderStatus::Pending;
  int age_days = 0;
};

struct SubmitResult {
  std::optional<OrderId> id;
  std::optional<ErrorCode> error;
  std::string message;

  bool ok() const { return id.has_value(); }
};

struct LongPosition {
  long long qty = 0;
  long long available = 0;
};

struct ShortPosition {
  long long qty = 0;
  double entry_value = 0.0;  // sum of fill values still open
};

struct Account {
  double cash = 0.0;
  std::map<std::string, LongPosition> longs;
  std::map<std::string, ShortPosition> shorts;
  double reserved_margin = 0.0;
  double fee_paid_cumulative = 0.0;
};

/// One line of the append-only trade log.
struct TradeRecord {
  Date day;
  OrderId order_id = 0;
  std::string asset;
  Side side = Side::Buy;
  long long qty = 0;
  double price = 0.0;
  double commission = 0.0;
  OrderStatus status = OrderStatus::Filled;
};

struct MarginCall {
  Date day;
  std::string asset;
  long long covered_qty = 0;
  double equity_before = 0.0;
  double reserved_before = 0.0;
};

struct SettlementReport {
  Date day;
  std::vector<TradeRecord> fills;
  std::vector<TradeRecord> rejections;
  std::vector<OrderId> expired;
  std::vector<MarginCall> margin_calls;
};

using PriceMap = std::map<std::string, double>;

/// Daily-close exchange. Per day: begin_day, any number of submit_order,
/// then settle_day with that day's closes.
class Exchange {
 public:
  Exchange(MarketProfile profile, double initial_cash);

  /// Makes earlier purchases sellable on T+1 profiles.
  void begin_day(Date day);
  /// `ref_price` sizes the cash and margin checks (normally the last close).
  SubmitResult submit_order(const OrderRequest& req, double ref_price);
  bool cancel(OrderId id);
  /// Fills in the order SELL, SHORT, COVER, BUY (then by id); a missing close
  /// leaves the order pending.
  SettlementReport settle_day(const PriceMap& closes);

  const MarketProfile& profile() const { return profile_; }
  const Account& account() const { return account_; }
  const std::vector<Order>& orders() const { return orders_; }
  const std::vector<TradeRecord>& trade_log() const { return log_; }
  double initial_cash() const { return initial_cash_; }
  Date day() const { return day_; }

  /// Throws MissingPrice for a held asset without a price.
  double nav(const PriceMap& prices) const;
  double long_value(const PriceMap& prices) const;
  double short_value(const PriceMap& prices) const;
  /// (long MV - short MV) / NAV. Throws NonPositiveNav.
  double net_position_rate(const PriceMap& prices) const;

  /// Single-line JSON snapshot of the account marked at `prices`.
  std::string snapshot_json(const PriceMap& prices) const;

 private:
  struct Commitments {
    double cash = 0.0;
    double sell_credit = 0.0;
    std::map<std::string, long long> sells;
    std::map<std::string, long long> covers;
  };
  Commitments pending_commitments() const;
  void add_commitment(Commitments& c, const Order& o) const;
  SubmitResult reject(const OrderRequest& req, double ref_price, ErrorCode code,
                      const std::string& why);
  std::optional<std::string> try_fill(const Order& o, double price, TradeRecord& rec);
  void apply_fill(const std::string& asset, Side side, long long qty, double price,
                  double commission);
  void recompute_margin();
  void maintenance(const PriceMap& closes, SettlementReport& report);

  MarketProfile profile_;
  double initial_cash_;
  Account account_;
  std::vector<Order> orders_;
  Commitments committed_;  // sum over PENDING orders
  std::vector<TradeRecord> log_;
  OrderId next_id_ = 1;
  Date day_;
};

std::string trade_log_csv(const std::vector<TradeRecord>& log);
std::string trade_log_header();
std::string trade_log_line(const TradeRecord& r);

}  // namespace alphaloop::exchange
