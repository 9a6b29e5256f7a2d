#include "alphaloop/exchange/exchange.hpp"

#include <algorithm>
#include <cmath>

#include "alphaloop/core/io.hpp"
#include "json.hpp"

namespace alphaloop::exchange {

namespace {

int settle_rank(Side s) {
  switch (s) {
    case Side::Sell: return 0;
    case Side::Short: return 1;
    case Side::Cover: return 2;
    case Side::Buy: return 3;
  }
  return 4;
}

bool limit_met(const OrderRequest& r, double close) {
  if (!r.limit_price) return true;
  if (r.side == Side::Buy || r.side == Side::Cover) return close <= *r.limit_price;
  return close >= *r.limit_price;
}

double price_of(const PriceMap& prices, const std::string& asset) {
  const auto it = prices.find(asset);
  if (it == prices.end() || std::isnan(it->second)) {
    throw Error(ErrorCode::MissingPrice, "no price for held asset " + asset);
  }
  return it->second;
}

}  // namespace

MarketProfile MarketProfile::csi() {
  MarketProfile p;
  p.market = MarketId::CsiLike;
  p.settlement = Settlement::TPlus1;
  p.allow_short = false;
  p.lot_size = 100;
  p.commission_rate = 0.0002;
  p.initial_margin_rate = 0.0;
  p.maintenance_ratio = 0.0;
  p.days_per_year = 243;
  p.rf_annual = 0.0125;
  return p;
}

MarketProfile MarketProfile::us() { return MarketProfile{}; }

MarketProfile MarketProfile::for_market(MarketId m) {
  return m == MarketId::CsiLike ? csi() : us();
}

std::string_view to_string(Side s) {
  switch (s) {
    case Side::Buy: return "BUY";
    case Side::Sell: return "SELL";
    case Side::Short: return "SHORT";
    case Side::Cover: return "COVER";
  }
  return "?";
}

std::string_view to_string(OrderStatus s) {
  switch (s) {
    case OrderStatus::Pending: return "PENDING";
    case OrderStatus::Filled: return "FILLED";
    case OrderStatus::Expired: return "EXPIRED";
    case OrderStatus::Rejected: return "REJECTED";
    case OrderStatus::Cancelled: return "CANCELLED";
  }
  return "?";
}

Exchange::Exchange(MarketProfile profile, double initial_cash)
    : profile_(profile), initial_cash_(initial_cash) {
  account_.cash = initial_cash;
}

void Exchange::begin_day(Date day) {
  day_ = day;
  for (auto& [_, pos] : account_.longs) pos.available = pos.qty;
}

void Exchange::add_commitment(Commitments& c, const Order& o) const {
  const auto& r = o.request;
  const double px = r.limit_price ? std::max(*r.limit_price, o.ref_price) : o.ref_price;
  switch (r.side) {
    case Side::Buy:
    case Side::Cover:
      c.cash += static_cast<double>(r.quantity) * px * (1.0 + profile_.commission_rate);
      if (r.side == Side::Cover) c.covers[r.asset] += r.quantity;
      break;
    case Side::Short:
      c.cash += static_cast<double>(r.quantity) * o.ref_price *
                (profile_.initial_margin_rate + profile_.commission_rate);
      break;
    case Side::Sell:
      c.sells[r.asset] += r.quantity;
      if (!r.limit_price) {
        c.sell_credit += static_cast<double>(r.quantity) * o.ref_price *
                         (1.0 - profile_.commission_rate);
      }
      break;
  }
}

Exchange::Commitments Exchange::pending_commitments() const {
  Commitments c;
  for (const auto& o : orders_) {
    if (o.status == OrderStatus::Pending) add_commitment(c, o);
  }
  return c;
}

SubmitResult Exchange::reject(const OrderRequest& req, double ref_price, ErrorCode code,
                              const std::string& why) {
  TradeRecord rec{day_, 0, req.asset, req.side, req.quantity, ref_price, 0.0,
                  OrderStatus::Rejected};
  log_.push_back(rec);
  return {std::nullopt, code, why};
}

SubmitResult Exchange::submit_order(const OrderRequest& req, double ref_price) {
  const bool short_side = req.side == Side::Short || req.side == Side::Cover;
  if (short_side && !profile_.allow_short) {
    return reject(req, ref_price, ErrorCode::ShortNotAllowed,
                  "short selling is not allowed on this market");
  }
  if (req.quantity <= 0 || req.quantity % profile_.lot_size != 0) {
    return reject(req, ref_price, ErrorCode::LotViolation,
                  "quantity " + std::to_string(req.quantity) + " is not a positive multiple of " +
                      std::to_string(profile_.lot_size));
  }
  if (!(ref_price > 0.0)) {
    return reject(req, ref_price, ErrorCode::MissingPrice, "no reference price for " + req.asset);
  }
  const Commitments& c = committed_;
  // pending market sells settle before buys, so their proceeds count
  const double free_cash = account_.cash - account_.reserved_margin - c.cash + c.sell_credit;
  const double value = static_cast<double>(req.quantity) * ref_price;
  switch (req.side) {
    case Side::Sell: {
      const auto it = account_.longs.find(req.asset);
      const long long held = it == account_.longs.end() ? 0 : it->second.available;
      const auto pend = c.sells.find(req.asset);
      const long long committed = pend == c.sells.end() ? 0 : pend->second;
      if (req.quantity > held - committed) {
        return reject(req, ref_price, ErrorCode::InsufficientAvailableShares,
                      "sell " + std::to_string(req.quantity) + " " + req.asset + " but only " +
                          std::to_string(held - committed) + " available");
      }
      break;
    }
    case Side::Cover: {
      const auto it = account_.shorts.find(req.asset);
      const long long held = it == account_.shorts.end() ? 0 : it->second.qty;
      const auto pend = c.covers.find(req.asset);
      const long long committed = pend == c.covers.end() ? 0 : pend->second;
      if (req.quantity > held - committed) {
        return reject(req, ref_price, ErrorCode::InsufficientAvailableShares,
                      "cover " + std::to_string(req.quantity) + " " + req.asset + " exceeds short");
      }
      const double release = it == account_.shorts.end()
                                 ? 0.0
                                 : profile_.initial_margin_rate * it->second.entry_value *
                                       static_cast<double>(req.quantity) /
                                       static_cast<double>(it->second.qty);
      if (value * (1.0 + profile_.commission_rate) > free_cash + release) {
        return reject(req, ref_price, ErrorCode::InsufficientCash, "cannot afford cover");
      }
      break;
    }
    case Side::Buy:
      if (value * (1.0 + profile_.commission_rate) > free_cash) {
        return reject(req, ref_price, ErrorCode::InsufficientCash,
                      "buy " + std::to_string(req.quantity) + " " + req.asset + " needs " +
                          io::format_double(value * (1.0 + profile_.commission_rate)));
      }
      break;
    case Side::Short:
      if (value * (profile_.initial_margin_rate + profile_.commission_rate) > free_cash) {
        return reject(req, ref_price, ErrorCode::InsufficientMargin,
                      "short " + std::to_string(req.quantity) + " " + req.asset +
                          " exceeds margin capacity");
      }
      break;
  }
  Order o;
  o.id = next_id_++;
  o.request = req;
  o.ref_price = ref_price;
  o.submitted_day = day_;
  orders_.push_back(o);
  add_commitment(committed_, o);
  return {o.id, std::nullopt, {}};
}

bool Exchange::cancel(OrderId id) {
  for (auto& o : orders_) {
    if (o.id == id && o.status == OrderStatus::Pending) {
      o.status = OrderStatus::Cancelled;
      committed_ = pending_commitments();
      log_.push_back({day_, o.id, o.request.asset, o.request.side, o.request.quantity, 0.0, 0.0,
                      OrderStatus::Cancelled});
      return true;
    }
  }
  return false;
}

void Exchange::recompute_margin() {
  double entry = 0.0;
  for (const auto& [_, s] : account_.shorts) entry += s.entry_value;
  account_.reserved_margin = profile_.initial_margin_rate * entry;
}

void Exchange::apply_fill(const std::string& asset, Side side, long long qty, double price,
                          double commission) {
  const double value = static_cast<double>(qty) * price;
  switch (side) {
    case Side::Buy: {
      account_.cash -= value + commission;
      auto& pos = account_.longs[asset];
      pos.qty += qty;
      if (profile_.settlement == Settlement::TPlus0) pos.available += qty;
      break;
    }
    case Side::Sell: {
      account_.cash += value - commission;
      auto& pos = account_.longs[asset];
      pos.qty -= qty;
      pos.available -= qty;
      if (pos.qty == 0) account_.longs.erase(asset);
      break;
    }
    case Side::Short: {
      account_.cash += value - commission;
      auto& pos = account_.shorts[asset];
      pos.qty += qty;
      pos.entry_value += value;
      break;
    }
    case Side::Cover: {
      account_.cash -= value + commission;
      auto& pos = account_.shorts[asset];
      if (qty == pos.qty) {
        account_.shorts.erase(asset);
      } else {
        pos.entry_value *= static_cast<double>(pos.qty - qty) / static_cast<double>(pos.qty);
        pos.qty -= qty;
      }
      break;
    }
  }
  account_.fee_paid_cumulative += commission;
  recompute_margin();
}

std::optional<std::string> Exchange::try_fill(const Order& o, double price, TradeRecord& rec) {
  const auto& r = o.request;
  const double value = static_cast<double>(r.quantity) * price;
  const double commission = value * profile_.commission_rate;
  switch (r.side) {
    case Side::Sell: {
      const auto it = account_.longs.find(r.asset);
      if (it == account_.longs.end() || it->second.available < r.quantity) {
        return "shares no longer available";
      }
      break;
    }
    case Side::Short: {
      const double reserved_after = account_.reserved_margin + profile_.initial_margin_rate * value;
      if (account_.cash + value - commission < reserved_after) return "margin would be overdrawn";
      break;
    }
    case Side::Cover: {
      const auto it = account_.shorts.find(r.asset);
      if (it == account_.shorts.end() || it->second.qty < r.quantity) return "short position too small";
      const double release = profile_.initial_margin_rate * it->second.entry_value *
                             static_cast<double>(r.quantity) / static_cast<double>(it->second.qty);
      if (account_.cash - value - commission < account_.reserved_margin - release) {
        return "cash would be overdrawn";
      }
      break;
    }
    case Side::Buy:
      if (account_.cash - value - commission < account_.reserved_margin) {
        return "cash would be overdrawn";
      }
      break;
  }
  apply_fill(r.asset, r.side, r.quantity, price, commission);
  rec = {day_, o.id, r.asset, r.side, r.quantity, price, commission, OrderStatus::Filled};
  return std::nullopt;
}

void Exchange::maintenance(const PriceMap& closes, SettlementReport& report) {
  if (!profile_.allow_short || account_.shorts.empty()) return;
  auto equity = [&]() {
    double e = account_.cash;
    for (const auto& [a, p] : account_.longs) {
      const auto it = closes.find(a);
      if (it != closes.end()) e += static_cast<double>(p.qty) * it->second;
    }
    for (const auto& [a, s] : account_.shorts) {
      const auto it = closes.find(a);
      const double px = it != closes.end() ? it->second : s.entry_value / static_cast<double>(s.qty);
      e -= static_cast<double>(s.qty) * px;
    }
    return e;
  };
  while (!account_.shorts.empty() &&
         equity() < profile_.maintenance_ratio * account_.reserved_margin) {
    // largest short by market value first
    std::string target;
    double best = -1.0;
    for (const auto& [a, s] : account_.shorts) {
      const auto it = closes.find(a);
      if (it == closes.end()) continue;
      const double mv = static_cast<double>(s.qty) * it->second;
      if (mv > best) {
        best = mv;
        target = a;
      }
    }
    if (target.empty()) return;
    const double px = closes.at(target);
    const auto& pos = account_.shorts.at(target);
    const double eq = equity();
    const double reserved = account_.reserved_margin;
    // Cover as much as cash allows, keeping the remaining reservation funded.
    long long qty = pos.qty;
    const double per_share_release =
        profile_.initial_margin_rate * pos.entry_value / static_cast<double>(pos.qty);
    const double per_share_cost = px * (1.0 + profile_.commission_rate);
    const double free = account_.cash - account_.reserved_margin;
    const double net_cost = per_share_cost - per_share_release;
    if (net_cost > 0.0 && free < net_cost * static_cast<double>(qty)) {
      qty = static_cast<long long>(std::floor(std::max(0.0, free) / net_cost));
      qty -= qty % profile_.lot_size;
    }
    if (qty <= 0) return;
    const double value = static_cast<double>(qty) * px;
    const double commission = value * profile_.commission_rate;
    apply_fill(target, Side::Cover, qty, px, commission);
    const TradeRecord rec{day_, next_id_++, target, Side::Cover, qty, px, commission,
                          OrderStatus::Filled};
    log_.push_back(rec);
    report.fills.push_back(rec);
    report.margin_calls.push_back({day_, target, qty, eq, reserved});
  }
}

SettlementReport Exchange::settle_day(const PriceMap& closes) {
  SettlementReport report;
  report.day = day_;
  std::vector<Order*> pending;
  for (auto& o : orders_) {
    if (o.status == OrderStatus::Pending) pending.push_back(&o);
  }
  std::stable_sort(pending.begin(), pending.end(), [](const Order* a, const Order* b) {
    const int ra = settle_rank(a->request.side);
    const int rb = settle_rank(b->request.side);
    return ra != rb ? ra < rb : a->id < b->id;
  });
  for (Order* o : pending) {
    const auto it = closes.find(o->request.asset);
    if (it == closes.end() || !(it->second > 0.0)) continue;
    if (!limit_met(o->request, it->second)) continue;
    TradeRecord rec;
    if (const auto why = try_fill(*o, it->second, rec)) {
      o->status = OrderStatus::Rejected;
      const TradeRecord rej{day_, o->id, o->request.asset, o->request.side, o->request.quantity,
                            it->second, 0.0, OrderStatus::Rejected};
      log_.push_back(rej);
      report.rejections.push_back(rej);
      continue;
    }
    o->status = OrderStatus::Filled;
    log_.push_back(rec);
    report.fills.push_back(rec);
  }
  maintenance(closes, report);

  for (auto& o : orders_) {
    ++o.age_days;
    if (o.status == OrderStatus::Pending && o.age_days >= kExpiryAge) {
      o.status = OrderStatus::Expired;
      report.expired.push_back(o.id);
      log_.push_back({day_, o.id, o.request.asset, o.request.side, o.request.quantity, 0.0, 0.0,
                      OrderStatus::Expired});
    }
  }
  std::erase_if(orders_, [](const Order& o) { return o.age_days >= kPurgeAge; });
  committed_ = pending_commitments();
  return report;
}

double Exchange::long_value(const PriceMap& prices) const {
  double v = 0.0;
  for (const auto& [a, p] : account_.longs) v += static_cast<double>(p.qty) * price_of(prices, a);
  return v;
}

double Exchange::short_value(const PriceMap& prices) const {
  double v = 0.0;
  for (const auto& [a, s] : account_.shorts) v += static_cast<double>(s.qty) * price_of(prices, a);
  return v;
}

double Exchange::nav(const PriceMap& prices) const {
  return account_.cash + long_value(prices) - short_value(prices);
}

double Exchange::net_position_rate(const PriceMap& prices) const {
  const double n = nav(prices);
  if (!(n > 0.0)) throw Error(ErrorCode::NonPositiveNav, "NAV " + io::format_double(n) + " <= 0");
  return (long_value(prices) - short_value(prices)) / n;
}

std::string Exchange::snapshot_json(const PriceMap& prices) const {
  nlohmann::ordered_json longs = nlohmann::ordered_json::object();
  for (const auto& [a, p] : account_.longs) longs[a] = {{"qty", p.qty}, {"available", p.available}};
  nlohmann::ordered_json shorts = nlohmann::ordered_json::object();
  for (const auto& [a, s] : account_.shorts) {
    shorts[a] = {{"qty", s.qty}, {"entry_value", s.entry_value}};
  }
  const double n = nav(prices);
  nlohmann::ordered_json j;
  j["day"] = day_.to_string();
  j["cash"] = account_.cash;
  j["nav"] = n;
  j["net_position_rate"] = n > 0.0 ? nlohmann::ordered_json(net_position_rate(prices))
                                   : nlohmann::ordered_json(nullptr);
  j["reserved_margin"] = account_.reserved_margin;
  j["fee_paid_cumulative"] = account_.fee_paid_cumulative;
  j["longs"] = longs;
  j["shorts"] = shorts;
  return j.dump();
}

std::string trade_log_header() { return "day,order_id,asset,side,qty,price,commission,status\n"; }

std::string trade_log_line(const TradeRecord& r) {
  return r.day.to_string() + "," + std::to_string(r.order_id) + "," + r.asset + "," +
         std::string(to_string(r.side)) + "," + std::to_string(r.qty) + "," +
         io::format_double(r.price) + "," + io::format_double(r.commission) + "," +
         std::string(to_string(r.status)) + "\n";
}

std::string trade_log_csv(const std::vector<TradeRecord>& log) {
  std::string out = trade_log_header();
  for (const auto& r : log) out += trade_log_line(r);
  return out;
}

}  // namespace alphaloop::exchange
