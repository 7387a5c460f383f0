#include "catxl/event_table.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"

namespace catxl {

namespace {

constexpr char kEventMagic[9] = "CATXLEVT";
constexpr std::uint32_t kEventVersion = 1;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

EventLossTable::EventLossTable(std::uint32_t num_trial_years, std::vector<std::string> peril_names,
                               std::vector<LossEvent> events)
    : num_trial_years_(num_trial_years),
      peril_names_(std::move(peril_names)),
      events_(std::move(events)) {
  validate();
}

void EventLossTable::validate() const {
  if (num_trial_years_ < 1) throw ValidationError("event table needs at least one trial year");
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (!(e.loss > 0.0)) {
      throw ValidationError("event " + std::to_string(i) + ": loss must be strictly positive");
    }
    if (e.trial_year >= num_trial_years_) {
      throw ValidationError("event " + std::to_string(i) + ": trial year out of range");
    }
    if (e.peril >= peril_names_.size()) {
      throw ValidationError("event " + std::to_string(i) + ": unknown peril id");
    }
  }
}

std::optional<PerilId> EventLossTable::find_peril(std::string_view name) const {
  for (std::size_t i = 0; i < peril_names_.size(); ++i) {
    if (peril_names_[i] == name) return static_cast<PerilId>(i);
  }
  return std::nullopt;
}

std::vector<Currency> EventLossTable::yearly_max(PerilId p) const {
  std::vector<Currency> out(num_trial_years_, 0.0);
  for (const auto& e : events_) {
    if (e.peril == p) out[e.trial_year] = std::max(out[e.trial_year], e.loss);
  }
  return out;
}

EventFormat event_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return EventFormat::csv;
  return EventFormat::binary;
}

EventLossTable parse_events_csv(std::string_view text,
                                std::optional<std::uint32_t> num_trial_years) {
  struct Row {
    YearIndex year;
    std::string peril;
    Currency loss;
  };
  std::vector<Row> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      const auto cols = split_fields(line);
      if (cols.size() != 3 || cols[0] != "trial_year" || cols[1] != "peril" || cols[2] != "loss") {
        throw ParseError(line_no, "expected header 'trial_year,peril,loss'");
      }
      header_seen = true;
      continue;
    }
    const auto cols = split_fields(line);
    if (cols.size() != 3) throw ParseError(line_no, "expected 3 fields");
    Row row{};
    if (!parse_number(cols[0], row.year)) throw ParseError(line_no, "bad trial_year");
    if (cols[1].empty()) throw ParseError(line_no, "empty peril");
    row.peril = std::string(cols[1]);
    if (!parse_number(cols[2], row.loss)) throw ParseError(line_no, "bad loss");
    if (!(row.loss > 0.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": loss must be strictly positive");
    }
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (!header_seen) throw ParseError(1, "missing header");

  std::map<std::string, PerilId> ids;
  for (const auto& r : rows) ids.emplace(r.peril, 0);
  std::vector<std::string> names;
  for (auto& [name, id] : ids) {
    id = static_cast<PerilId>(names.size());
    names.push_back(name);
  }
  std::uint32_t max_year = 0;
  std::vector<LossEvent> events;
  events.reserve(rows.size());
  for (const auto& r : rows) {
    max_year = std::max(max_year, r.year);
    events.push_back({r.year, ids.at(r.peril), r.loss});
  }
  std::uint32_t years = rows.empty() ? 1 : max_year + 1;
  if (num_trial_years) {
    if (*num_trial_years < years) {
      throw ValidationError("trial year " + std::to_string(max_year) +
                            " exceeds the declared number of years");
    }
    years = *num_trial_years;
  }
  return EventLossTable(years, std::move(names), std::move(events));
}

std::string to_csv(const EventLossTable& table) {
  std::ostringstream os;
  os << "trial_year,peril,loss\n";
  for (const auto& e : table.events()) {
    os << e.trial_year << ',' << table.peril_name(e.peril) << ',' << format_double(e.loss) << '\n';
  }
  return os.str();
}

EventLossTable load_events(const std::filesystem::path& path, EventFormat format,
                           std::optional<std::uint32_t> num_trial_years) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open event file: " + path.string());
  if (format == EventFormat::csv) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_events_csv(buf.str(), num_trial_years);
  }
  detail::expect_magic(in, kEventMagic, "binary event");
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != kEventVersion) {
    throw ParseError("unsupported binary event version " + std::to_string(version));
  }
  const auto years = detail::read_pod<std::uint32_t>(in);
  const auto num_perils = detail::read_pod<std::uint32_t>(in);
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < num_perils; ++i) names.push_back(detail::read_string(in));
  const auto count = detail::read_pod<std::uint64_t>(in);
  const auto year_col = detail::read_column<std::uint32_t>(in, count);
  const auto peril_col = detail::read_column<std::uint32_t>(in, count);
  const auto loss_col = detail::read_column<double>(in, count);
  std::vector<LossEvent> events(count);
  for (std::size_t i = 0; i < count; ++i) events[i] = {year_col[i], peril_col[i], loss_col[i]};
  const std::uint32_t declared = num_trial_years.value_or(years);
  return EventLossTable(declared, std::move(names), std::move(events));
}

void save_events(const EventLossTable& table, const std::filesystem::path& path,
                 EventFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write event file: " + path.string());
  if (format == EventFormat::csv) {
    out << to_csv(table);
    return;
  }
  out.write(kEventMagic, 8);
  detail::write_pod(out, kEventVersion);
  detail::write_pod(out, table.num_trial_years());
  detail::write_pod(out, static_cast<std::uint32_t>(table.num_perils()));
  for (const auto& name : table.peril_names()) detail::write_string(out, name);
  const auto events = table.events();
  detail::write_pod(out, static_cast<std::uint64_t>(events.size()));
  std::vector<std::uint32_t> years(events.size()), perils(events.size());
  std::vector<double> losses(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    years[i] = events[i].trial_year;
    perils[i] = events[i].peril;
    losses[i] = events[i].loss;
  }
  detail::write_column<std::uint32_t>(out, years);
  detail::write_column<std::uint32_t>(out, perils);
  detail::write_column<double>(out, losses);
}

}  // namespace catxl
