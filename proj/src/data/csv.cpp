#include "rssi/data/csv.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "rssi/error.hpp"
#include "rssi/format.hpp"

namespace rssi {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void row_error(std::size_t line_no, const std::string& what) {
  throw DataError("csv line " + std::to_string(line_no) + ": " + what);
}

RssiRecord parse_row(const std::vector<std::string_view>& f,
                     std::size_t line_no) {
  RssiRecord r;
  try {
    r.rssi_dbm = parse_double(f[0]);
    r.distance_m = parse_double(f[1]);
  } catch (const ValueError& e) {
    row_error(line_no, e.what());
  }
  if (!(r.distance_m > 0.0)) {
    row_error(line_no, "distance must be positive, got '" + std::string(f[1]) +
                           "'");
  }
  if (f[2] == "LoS") {
    r.condition = Condition::LoS;
  } else if (f[2] == "NLoS") {
    r.condition = Condition::NLoS;
  } else {
    row_error(line_no, "unknown condition '" + std::string(f[2]) + "'");
  }
  const std::string_view loc = f[3];
  if (loc.size() < 2 || loc.front() != 'L') {
    row_error(line_no, "location must look like L<n>, got '" +
                           std::string(loc) + "'");
  }
  std::int64_t n = 0;
  try {
    n = parse_int(loc.substr(1));
  } catch (const ValueError&) {
    row_error(line_no, "location must look like L<n>, got '" +
                           std::string(loc) + "'");
  }
  if (n < kMinLocation || n > kMaxLocation) {
    row_error(line_no, "location '" + std::string(loc) + "' outside L1..L40");
  }
  r.location = static_cast<int>(n);
  return r;
}

}  // namespace

Dataset parse_csv_text(std::string_view text, CleansingReport* report) {
  Dataset ds;
  ds.source = DataSource::CsvFile;
  CleansingReport local;
  CleansingReport& rep = report != nullptr ? *report : local;
  rep = {};

  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!header_seen) {
      if (line != kCsvHeader) {
        row_error(line_no, "expected header '" + std::string(kCsvHeader) +
                               "', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      row_error(line_no, "expected 4 fields, got " +
                             std::to_string(fields.size()));
    }
    ++rep.rows_read;
    bool has_empty = false;
    for (auto f : fields) has_empty = has_empty || f.empty();
    if (has_empty) {
      ++rep.rows_dropped_empty;
      continue;
    }
    ds.records.push_back(parse_row(fields, line_no));
  }
  if (!header_seen) throw DataError("csv: missing header row");
  return ds;
}

Dataset parse_csv(const std::filesystem::path& path, CleansingReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read dataset file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("error while reading " + path.string());
  return parse_csv_text(buf.str(), report);
}

std::string format_csv(const Dataset& ds) {
  std::string out;
  out.reserve(32 * (ds.size() + 1));
  out.append(kCsvHeader);
  out.push_back('\n');
  for (const auto& r : ds.records) {
    out += format_double(r.rssi_dbm);
    out.push_back(',');
    out += format_double(r.distance_m);
    out.push_back(',');
    out += condition_name(r.condition);
    out += ",L";
    out += std::to_string(r.location);
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  const auto text = format_csv(ds);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("error while writing " + path.string());
}

}  // namespace rssi
