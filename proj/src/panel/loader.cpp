#include "alphaloop/panel/loader.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"

namespace alphaloop {

namespace fs = std::filesystem;

namespace {

struct Bar {
  double open, high, low, close, volume;
};

struct CsvRows {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

[[noreturn]] void fail(ErrorCode code, const fs::path& file, std::size_t line,
                       const std::string& what) {
  throw Error(code, file.filename().string() + " row " + std::to_string(line) + ": " + what);
}

CsvRows read_csv(const fs::path& file, const std::vector<std::string>& header) {
  const std::string text = io::read_file(file);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  CsvRows out;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (io::trim(line).empty()) continue;
    auto cells = io::split(line, ',');
    if (!seen_header) {
      if (cells != header) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        fail(ErrorCode::MalformedCsv, file, lineno, "expected header '" + want + "'");
      }
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size()) {
      fail(ErrorCode::MalformedCsv, file, lineno,
           "expected " + std::to_string(header.size()) + " columns, got " +
               std::to_string(cells.size()));
    }
    out.rows.push_back(std::move(cells));
    out.line_numbers.push_back(lineno);
  }
  if (!seen_header) fail(ErrorCode::MalformedCsv, file, 1, "missing header");
  return out;
}

Date parse_date_cell(const std::string& cell, const fs::path& file, std::size_t line) {
  const auto d = Date::parse(cell);
  if (!d) fail(ErrorCode::MalformedCsv, file, line, "bad date '" + cell + "'");
  return *d;
}

double parse_number_cell(const std::string& cell, const fs::path& file, std::size_t line,
                         bool allow_empty) {
  if (cell.empty() && allow_empty) return kMissing;
  const auto v = io::parse_double(cell);
  if (!v || !std::isfinite(*v)) fail(ErrorCode::MalformedCsv, file, line, "bad number '" + cell + "'");
  return *v;
}

const std::vector<std::string> kBarHeader = {"date", "open", "high", "low", "close", "volume"};
const std::vector<std::string> kFundHeader = {"date", "asset", "pe", "ps", "pb", "dyr"};
const std::vector<std::string> kUniverseHeader = {"date", "asset"};
constexpr std::array<Field, 4> kFundFields = {Field::Pe, Field::Ps, Field::Pb, Field::Dyr};

std::map<Date, Bar> read_bars(const fs::path& file, bool check_volume) {
  const auto csv = read_csv(file, kBarHeader);
  std::map<Date, Bar> bars;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const auto& c = csv.rows[r];
    const std::size_t line = csv.line_numbers[r];
    const Date d = parse_date_cell(c[0], file, line);
    Bar b{parse_number_cell(c[1], file, line, false), parse_number_cell(c[2], file, line, false),
          parse_number_cell(c[3], file, line, false), parse_number_cell(c[4], file, line, false),
          parse_number_cell(c[5], file, line, !check_volume)};
    if (b.low > b.high) {
      fail(ErrorCode::OhlcViolation, file, line,
           "low " + c[3] + " exceeds high " + c[2]);
    }
    if (!(b.low > 0.0) || b.open < b.low || b.open > b.high || b.close < b.low ||
        b.close > b.high) {
      fail(ErrorCode::OhlcViolation, file, line, "OHLC ordering violated");
    }
    if (check_volume && b.volume < 0.0) {
      fail(ErrorCode::OhlcViolation, file, line, "negative volume");
    }
    if (!bars.emplace(d, b).second) {
      fail(ErrorCode::MalformedCsv, file, line, "duplicate date " + c[0]);
    }
  }
  return bars;
}

bool is_reserved(const std::string& name) {
  return name == kFundamentalsFile || name == kUniverseFile || name == kIndexFile;
}

void append_csv(std::string& out, std::initializer_list<std::string_view> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
}

std::string cell_text(double v) { return is_missing(v) ? std::string() : io::format_double(v); }

std::string bars_csv(const PricePanel& p, std::size_t i) {
  std::string out = "date,open,high,low,close,volume\n";
  for (std::size_t t = 0; t < p.num_days(); ++t) {
    if (is_missing(p.close()(t, i))) continue;
    append_csv(out, {p.calendar()[t].to_string(), cell_text(p.field(Field::Open)(t, i)),
                     cell_text(p.field(Field::High)(t, i)), cell_text(p.field(Field::Low)(t, i)),
                     cell_text(p.close()(t, i)), cell_text(p.field(Field::Volume)(t, i))});
  }
  return out;
}

std::optional<std::string> fundamentals_csv(const PricePanel& p) {
  bool any = false;
  for (Field f : kFundFields) any = any || p.has_field(f);
  if (!any) return std::nullopt;
  std::string out = "date,asset,pe,ps,pb,dyr\n";
  for (std::size_t t = 0; t < p.num_days(); ++t) {
    for (std::size_t i = 0; i < p.num_assets(); ++i) {
      std::array<std::string, 4> cells;
      bool present = false;
      for (std::size_t k = 0; k < kFundFields.size(); ++k) {
        if (!p.has_field(kFundFields[k])) continue;
        const double v = p.field(kFundFields[k])(t, i);
        cells[k] = cell_text(v);
        present = present || !is_missing(v);
      }
      if (!present) continue;
      append_csv(out, {p.calendar()[t].to_string(), p.assets()[i], cells[0], cells[1], cells[2],
                       cells[3]});
    }
  }
  return out;
}

std::optional<std::string> universe_csv(const PricePanel& p) {
  if (!p.has_universe()) return std::nullopt;
  std::string out = "date,asset\n";
  for (const auto& [d, ids] : p.universe()->membership) {
    for (const auto& id : ids) append_csv(out, {d.to_string(), id});
  }
  return out;
}

std::optional<std::string> index_csv(const PricePanel& p) {
  if (p.index().derived) return std::nullopt;
  std::string out = "date,open,high,low,close,volume\n";
  const auto& idx = p.index();
  for (std::size_t t = 0; t < p.num_days(); ++t) {
    append_csv(out, {p.calendar()[t].to_string(), cell_text(idx.open[t]), cell_text(idx.high[t]),
                     cell_text(idx.low[t]), cell_text(idx.close[t]), ""});
  }
  return out;
}

}  // namespace

PricePanel load_panel(const fs::path& data_dir, MarketId market) {
  if (!fs::is_directory(data_dir)) {
    throw Error(ErrorCode::IoError, "data directory not found: " + data_dir.string());
  }
  std::vector<fs::path> asset_files;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    if (is_reserved(entry.path().filename().string())) continue;
    asset_files.push_back(entry.path());
  }
  std::sort(asset_files.begin(), asset_files.end());
  if (asset_files.empty()) {
    throw Error(ErrorCode::EmptyUniverse, "no asset CSV files in " + data_dir.string());
  }

  std::vector<std::string> assets;
  std::vector<std::map<Date, Bar>> per_asset;
  std::set<Date> all_days;
  for (const auto& file : asset_files) {
    assets.push_back(file.stem().string());
    per_asset.push_back(read_bars(file, true));
    for (const auto& [d, _] : per_asset.back()) all_days.insert(d);
  }
  if (all_days.empty()) {
    throw Error(ErrorCode::EmptyUniverse, "asset files in " + data_dir.string() + " have no rows");
  }
  TradingCalendar cal(market, std::vector<Date>(all_days.begin(), all_days.end()));
  const std::size_t n = cal.size();
  const std::size_t m = assets.size();

  PricePanel::Columns cols{Matrix(n, m), Matrix(n, m), Matrix(n, m), Matrix(n, m), Matrix(n, m),
                           {}};
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& [d, b] : per_asset[i]) {
      const std::size_t t = *cal.index_of(d);
      cols.open(t, i) = b.open;
      cols.high(t, i) = b.high;
      cols.low(t, i) = b.low;
      cols.close(t, i) = b.close;
      cols.volume(t, i) = b.volume;
    }
  }

  auto asset_pos = [&](const std::string& id) -> std::optional<std::size_t> {
    const auto it = std::lower_bound(assets.begin(), assets.end(), id);
    if (it == assets.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - assets.begin());
  };

  const fs::path fund_file = data_dir / kFundamentalsFile;
  if (fs::exists(fund_file)) {
    const auto csv = read_csv(fund_file, kFundHeader);
    for (Field f : kFundFields) cols.fundamentals.emplace(f, Matrix(n, m));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      const auto& c = csv.rows[r];
      const std::size_t line = csv.line_numbers[r];
      const Date d = parse_date_cell(c[0], fund_file, line);
      const auto i = asset_pos(c[1]);
      if (!i) fail(ErrorCode::MalformedCsv, fund_file, line, "unknown asset '" + c[1] + "'");
      const auto t = cal.index_of(d);
      if (!t) fail(ErrorCode::MalformedCsv, fund_file, line, "date " + c[0] + " not in calendar");
      for (std::size_t k = 0; k < kFundFields.size(); ++k) {
        cols.fundamentals[kFundFields[k]](*t, *i) =
            parse_number_cell(c[2 + k], fund_file, line, true);
      }
    }
  }

  std::optional<Universe> universe;
  const fs::path uni_file = data_dir / kUniverseFile;
  if (fs::exists(uni_file)) {
    const auto csv = read_csv(uni_file, kUniverseHeader);
    universe.emplace();
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
      const auto& c = csv.rows[r];
      const std::size_t line = csv.line_numbers[r];
      const Date d = parse_date_cell(c[0], uni_file, line);
      if (!asset_pos(c[1])) {
        fail(ErrorCode::EmptyUniverse, uni_file, line, "member '" + c[1] + "' has no price file");
      }
      universe->membership[d].insert(c[1]);
    }
    if (universe->membership.empty()) {
      throw Error(ErrorCode::EmptyUniverse, "universe file lists no members");
    }
  }

  std::optional<IndexBars> index;
  const fs::path idx_file = data_dir / kIndexFile;
  if (fs::exists(idx_file)) {
    const auto bars = read_bars(idx_file, false);
    IndexBars ib;
    for (std::size_t t = 0; t < n; ++t) {
      const auto it = bars.find(cal[t]);
      if (it == bars.end()) {
        throw Error(ErrorCode::MalformedCsv,
                    std::string(kIndexFile) + " has no bar for " + cal[t].to_string());
      }
      ib.open.push_back(it->second.open);
      ib.high.push_back(it->second.high);
      ib.low.push_back(it->second.low);
      ib.close.push_back(it->second.close);
    }
    index = std::move(ib);
  }

  return PricePanel(std::move(cal), std::move(assets), std::move(cols), std::move(universe),
                    std::move(index));
}

void write_panel(const PricePanel& panel, const fs::path& data_dir) {
  fs::create_directories(data_dir);
  for (std::size_t i = 0; i < panel.num_assets(); ++i) {
    io::write_file_atomic(data_dir / (panel.assets()[i] + ".csv"), bars_csv(panel, i));
  }
  if (auto f = fundamentals_csv(panel)) io::write_file_atomic(data_dir / kFundamentalsFile, *f);
  if (auto u = universe_csv(panel)) io::write_file_atomic(data_dir / kUniverseFile, *u);
  if (auto x = index_csv(panel)) io::write_file_atomic(data_dir / kIndexFile, *x);
}

std::string serialize_panel(const PricePanel& panel) {
  std::string out;
  out += "# market " + std::string(profile_name(panel.calendar().market())) + "\n";
  for (std::size_t i = 0; i < panel.num_assets(); ++i) {
    out += "# " + panel.assets()[i] + ".csv\n" + bars_csv(panel, i);
  }
  if (auto f = fundamentals_csv(panel)) out += "# " + std::string(kFundamentalsFile) + "\n" + *f;
  if (auto u = universe_csv(panel)) out += "# " + std::string(kUniverseFile) + "\n" + *u;
  if (auto x = index_csv(panel)) out += "# " + std::string(kIndexFile) + "\n" + *x;
  return out;
}

}  // namespace alphaloop
