#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "rssi/data/dataset.hpp"

namespace rssi {

// Canonical header of the dataset CSV.
inline constexpr std::string_view kCsvHeader =
    "rssi_dbm,distance_m,condition,location";

// Rows dropped by cleansing: any row with an empty cell.
struct CleansingReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped_empty = 0;
};

// Parses CSV text in the canonical schema. Malformed numbers, unknown
// conditions, bad location labels and wrong column counts throw DataError
// naming the 1-based line number.
Dataset parse_csv_text(std::string_view text, CleansingReport* report = nullptr);

// Reads and parses a file. An unreadable file throws DataError.
Dataset parse_csv(const std::filesystem::path& path,
                  CleansingReport* report = nullptr);

// Canonical serialisation: LF endings, shortest round-trip numbers.
std::string format_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace rssi
