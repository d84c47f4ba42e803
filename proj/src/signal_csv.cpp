#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "pseudorep/errors.hpp"
#include "pseudorep/io.hpp"

namespace pseudorep {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

Dataset load_signal_csv(const std::filesystem::path& path,
                        std::size_t signal_len) {
  if (signal_len == 0) throw ConfigError("signal_len must be positive");
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open CSV file " + path.string());

  std::vector<float> samples;
  std::vector<int> labels;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::string_view rest = line;
    std::size_t col = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      const std::string where =
          path.string() + ":" + std::to_string(row) + ":" + std::to_string(col + 1);
      if (col < signal_len) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size()) {
          // from_chars rejects "nan"/"inf" spellings with a sign; treat any
          // of them as a finite-value violation rather than a parse error.
          const std::string lower = [&] {
            std::string s(field);
            for (auto& c : s) c = static_cast<char>(std::tolower(c));
            return s;
          }();
          if (lower.find("nan") != std::string::npos ||
              lower.find("inf") != std::string::npos) {
            throw NonFiniteError(where + ": non-finite value");
          }
          throw FormatError(where + ": not a number: '" + std::string(field) + "'");
        }
        if (!std::isfinite(v)) throw NonFiniteError(where + ": non-finite value");
        samples.push_back(static_cast<float>(v));
      } else if (col == signal_len) {
        long long y = 0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), y);
        if (ec != std::errc() || ptr != field.data() + field.size()) {
          // Accept "3.0" style labels as long as they are integral.
          double d = 0.0;
          auto [p2, e2] = std::from_chars(field.data(), field.data() + field.size(), d);
          if (e2 != std::errc() || p2 != field.data() + field.size() ||
              d != std::floor(d) || !std::isfinite(d)) {
            throw FormatError(where + ": label is not an integer: '" +
                              std::string(field) + "'");
          }
          y = static_cast<long long>(d);
        }
        if (y < 0 || y > std::numeric_limits<int>::max()) {
          throw FormatError(where + ": label out of range");
        }
        labels.push_back(static_cast<int>(y));
      } else {
        throw FormatError(path.string() + ":" + std::to_string(row) +
                          ": ragged row, expected " + std::to_string(signal_len + 1) +
                          " columns");
      }
      ++col;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (col != signal_len + 1) {
      throw FormatError(path.string() + ":" + std::to_string(row) +
                        ": ragged row, expected " + std::to_string(signal_len + 1) +
                        " columns, got " + std::to_string(col));
    }
  }
  if (labels.empty()) throw EmptyDatasetError(path.string() + ": no rows");

  int num_classes = 1;
  for (int y : labels) num_classes = std::max(num_classes, y + 1);
  std::vector<SampleId> ids(labels.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = SampleId{i};
  return Dataset(Shape{{signal_len}}, std::move(samples), std::move(ids),
                 std::move(labels), num_classes);
}

void write_signal_csv(const std::filesystem::path& path, const Dataset& dataset) {
  if (dataset.shape().rank() != 1) throw InputError("write_signal_csv needs 1-D samples");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(9);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (float v : dataset.sample(i)) out << v << ',';
    out << dataset.label(i) << '\n';
  }
}

}  // namespace pseudorep
