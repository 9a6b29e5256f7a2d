#include "alphaloop/panel/panel.hpp"

#include <algorithm>

#include "alphaloop/core/error.hpp"

namespace alphaloop {

namespace {

constexpr std::pair<Field, std::string_view> kFieldNames[] = {
    {Field::Open, "open"}, {Field::High, "high"},     {Field::Low, "low"},
    {Field::Close, "close"}, {Field::Volume, "volume"}, {Field::Pe, "pe"},
    {Field::Ps, "ps"},     {Field::Pb, "pb"},         {Field::Dyr, "dyr"},
};

std::string cell_name(const PricePanel& p, std::size_t t, std::size_t i) {
  return p.assets()[i] + " on " + p.calendar()[t].to_string();
}

}  // namespace

std::string_view field_name(Field f) {
  for (const auto& [field, name] : kFieldNames) {
    if (field == f) return name;
  }
  return "?";
}

std::optional<Field> parse_field(std::string_view name) {
  for (const auto& [field, n] : kFieldNames) {
    if (n == name) return field;
  }
  return std::nullopt;
}

bool is_fundamental(Field f) {
  return f == Field::Pe || f == Field::Ps || f == Field::Pb || f == Field::Dyr;
}

PricePanel::PricePanel(TradingCalendar calendar, std::vector<std::string> assets,
                       Columns columns, std::optional<Universe> universe,
                       std::optional<IndexBars> index)
    : calendar_(std::move(calendar)),
      assets_(std::move(assets)),
      cols_(std::move(columns)),
      universe_(std::move(universe)) {
  if (assets_.empty() || calendar_.empty()) {
    throw Error(ErrorCode::EmptyUniverse, "panel has no assets or no trading days");
  }
  validate();
  build_member_mask();
  if (index) {
    index_ = std::move(*index);
    if (index_.close.size() != calendar_.size() || index_.open.size() != calendar_.size() ||
        index_.high.size() != calendar_.size() || index_.low.size() != calendar_.size()) {
      throw Error(ErrorCode::MalformedCsv, "index bars do not cover the panel calendar");
    }
  } else {
    derive_index();
  }
}

void PricePanel::validate() const {
  const std::size_t n = calendar_.size();
  const std::size_t m = assets_.size();
  auto check_dims = [&](const Matrix& mat, std::string_view name) {
    if (mat.rows() != n || mat.cols() != m) {
      throw Error(ErrorCode::MalformedCsv,
                  "matrix '" + std::string(name) + "' does not match days x assets");
    }
  };
  check_dims(cols_.open, "open");
  check_dims(cols_.high, "high");
  check_dims(cols_.low, "low");
  check_dims(cols_.close, "close");
  check_dims(cols_.volume, "volume");
  for (const auto& [f, mat] : cols_.fundamentals) check_dims(mat, field_name(f));

  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      const double o = cols_.open(t, i);
      const double h = cols_.high(t, i);
      const double l = cols_.low(t, i);
      const double c = cols_.close(t, i);
      const double v = cols_.volume(t, i);
      const bool any = !is_missing(o) || !is_missing(h) || !is_missing(l) ||
                       !is_missing(c) || !is_missing(v);
      if (!any) continue;
      if (is_missing(o) || is_missing(h) || is_missing(l) || is_missing(c) ||
          is_missing(v)) {
        throw Error(ErrorCode::MalformedCsv, "partial OHLCV bar for " + cell_name(*this, t, i));
      }
      if (!(l > 0.0) || !(l <= o && o <= h) || !(l <= c && c <= h)) {
        throw Error(ErrorCode::OhlcViolation, "OHLC ordering violated for " +
                                                  cell_name(*this, t, i));
      }
      if (v < 0.0) {
        throw Error(ErrorCode::OhlcViolation, "negative volume for " + cell_name(*this, t, i));
      }
    }
  }
}

void PricePanel::build_member_mask() {
  if (!universe_) return;
  const std::size_t m = assets_.size();
  member_mask_.assign(calendar_.size() * m, 0);
  std::vector<std::size_t> members;
  for (const auto& [date, ids] : universe_->membership) {
    for (const auto& id : ids) {
      if (!asset_index(id)) {
        throw Error(ErrorCode::EmptyUniverse,
                    "universe member '" + id + "' is not in the panel");
      }
    }
  }
  // Membership on a trading day is the latest listing dated on or before it.
  auto it = universe_->membership.begin();
  const std::set<std::string>* current = nullptr;
  for (std::size_t t = 0; t < calendar_.size(); ++t) {
    while (it != universe_->membership.end() && it->first <= calendar_[t]) {
      current = &it->second;
      ++it;
    }
    if (!current) continue;
    for (const auto& id : *current) member_mask_[t * m + *asset_index(id)] = 1;
  }
}

void PricePanel::derive_index() {
  const std::size_t n = calendar_.size();
  const std::size_t m = assets_.size();
  index_ = IndexBars{};
  index_.derived = true;
  index_.open.resize(n);
  index_.high.resize(n);
  index_.low.resize(n);
  index_.close.resize(n);
  double level = 100.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const double prev = cols_.close(t - 1, i);
        const double cur = cols_.close(t, i);
        if (is_missing(prev) || is_missing(cur)) continue;
        sum += cur / prev - 1.0;
        ++cnt;
      }
      if (cnt > 0) level *= 1.0 + sum / static_cast<double>(cnt);
    }
    double ro = 0.0;
    double rh = 0.0;
    double rl = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double c = cols_.close(t, i);
      if (is_missing(c)) continue;
      ro += cols_.open(t, i) / c;
      rh += cols_.high(t, i) / c;
      rl += cols_.low(t, i) / c;
      ++cnt;
    }
    index_.close[t] = level;
    if (cnt == 0) {
      index_.open[t] = index_.high[t] = index_.low[t] = level;
    } else {
      const double k = static_cast<double>(cnt);
      index_.open[t] = level * ro / k;
      index_.high[t] = level * rh / k;
      index_.low[t] = level * rl / k;
    }
  }
}

std::optional<std::size_t> PricePanel::asset_index(std::string_view id) const {
  const auto it = std::lower_bound(assets_.begin(), assets_.end(), id,
                                   [](const std::string& a, std::string_view b) { return a < b; });
  if (it != assets_.end() && *it == id) return static_cast<std::size_t>(it - assets_.begin());
  // Assets are normally sorted; fall back to a scan for hand-built panels.
  const auto lin = std::find(assets_.begin(), assets_.end(), id);
  if (lin == assets_.end()) return std::nullopt;
  return static_cast<std::size_t>(lin - assets_.begin());
}

bool PricePanel::has_field(Field f) const {
  return !is_fundamental(f) || cols_.fundamentals.count(f) > 0;
}

const Matrix& PricePanel::field(Field f) const {
  switch (f) {
    case Field::Open: return cols_.open;
    case Field::High: return cols_.high;
    case Field::Low: return cols_.low;
    case Field::Close: return cols_.close;
    case Field::Volume: return cols_.volume;
    default: break;
  }
  const auto it = cols_.fundamentals.find(f);
  if (it == cols_.fundamentals.end()) {
    throw Error(ErrorCode::UnknownField,
                "field '" + std::string(field_name(f)) + "' is not loaded in this panel");
  }
  return it->second;
}

std::size_t PricePanel::universe_size(std::size_t day) const {
  if (member_mask_.empty()) return assets_.size();
  std::size_t n = 0;
  for (std::size_t i = 0; i < assets_.size(); ++i) n += member_mask_[day * assets_.size() + i];
  return n;
}

PricePanel PricePanel::slice(Date start, Date end) const {
  if (end < start) {
    throw Error(ErrorCode::DateOutOfRange,
                "slice start " + start.to_string() + " is after end " + end.to_string());
  }
  if (start < calendar_.front() || calendar_.back() < end) {
    throw Error(ErrorCode::DateOutOfRange, "slice [" + start.to_string() + ", " +
                                               end.to_string() + "] outside calendar");
  }
  const std::size_t first = calendar_.lower_bound(start);
  const auto last = calendar_.last_at_or_before(end);
  if (!last || first > *last) {
    throw Error(ErrorCode::DateOutOfRange, "slice contains no trading days");
  }
  return slice_rows(first, *last);
}

PricePanel PricePanel::slice_rows(std::size_t first, std::size_t last) const {
  if (first > last || last >= calendar_.size()) {
    throw Error(ErrorCode::DateOutOfRange, "row slice outside calendar");
  }
  std::vector<Date> days(calendar_.days().begin() + static_cast<std::ptrdiff_t>(first),
                         calendar_.days().begin() + static_cast<std::ptrdiff_t>(last) + 1);
  Columns cols;
  cols.open = cols_.open.rows_between(first, last);
  cols.high = cols_.high.rows_between(first, last);
  cols.low = cols_.low.rows_between(first, last);
  cols.close = cols_.close.rows_between(first, last);
  cols.volume = cols_.volume.rows_between(first, last);
  for (const auto& [f, mat] : cols_.fundamentals) cols.fundamentals[f] = mat.rows_between(first, last);

  std::optional<Universe> uni;
  if (universe_) {
    uni.emplace();
    for (const auto& [d, ids] : universe_->membership) {
      if (d <= days.front()) {
        uni->membership[days.front()] = ids;
      } else if (d <= days.back()) {
        uni->membership[d] = ids;
      }
    }
  }
  IndexBars idx;
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first),
                               v.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  };
  idx.open = cut(index_.open);
  idx.high = cut(index_.high);
  idx.low = cut(index_.low);
  idx.close = cut(index_.close);
  idx.derived = index_.derived;
  return PricePanel(TradingCalendar(calendar_.market(), std::move(days)), assets_,
                    std::move(cols), std::move(uni), std::move(idx));
}

Matrix forward_return(const Matrix& close, int horizon) {
  if (horizon <= 0 || static_cast<std::size_t>(horizon) >= close.rows()) {
    throw Error(ErrorCode::HorizonTooLarge,
                "horizon " + std::to_string(horizon) + " needs more than " +
                    std::to_string(close.rows()) + " days");
  }
  const auto h = static_cast<std::size_t>(horizon);
  Matrix out(close.rows(), close.cols());
  for (std::size_t t = 0; t + h < close.rows(); ++t) {
    for (std::size_t i = 0; i < close.cols(); ++i) {
      const double c0 = close(t, i);
      const double c1 = close(t + h, i);
      if (is_missing(c0) || is_missing(c1)) continue;
      out(t, i) = c1 / c0 - 1.0;
    }
  }
  return out;
}

Matrix forward_return(const PricePanel& panel, int horizon) {
  return forward_return(panel.close(), horizon);
}

}  // namespace alphaloop
