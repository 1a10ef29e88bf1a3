#include "ovsim/scenario.h"

#include <cmath>
#include <iomanip>
#include <set>

namespace ovsim {

std::vector<std::string> parse_sweep_values(const std::string& spec)
{
  std::vector<std::string> out;
  if (spec.find(':') != std::string::npos) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    if (b == std::string::npos) {
      throw std::invalid_argument("range must be start:stop:step");
    }
    std::size_t used = 0;
    double      start = 0, stop = 0, step = 0;
    try {
      start = std::stod(spec.substr(0, a), &used);
      stop  = std::stod(spec.substr(a + 1, b - a - 1));
      step  = std::stod(spec.substr(b + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("range must be numeric start:stop:step");
    }
    if (!(step > 0) || stop < start) {
      throw std::invalid_argument("range needs step > 0 and stop >= start");
    }
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    if (n > 100000) {
      throw std::invalid_argument("range has too many points");
    }
    for (long i = 0; i <= n; ++i) {
      std::ostringstream os;
      os << std::setprecision(10) << start + static_cast<double>(i) * step;
      out.push_back(os.str());
    }
    return out;
  }
  // ';' separates values that themselves contain commas, e.g. positions.
  const char  sep   = spec.find(';') != std::string::npos ? ';' : ',';
  std::size_t start = 0;
  for (;;) {
    const auto pos = spec.find(sep, start);
    auto       v   = spec.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    v.erase(0, v.find_first_not_of(' '));
    v.erase(v.find_last_not_of(' ') + 1);
    if (v.empty()) {
      throw std::invalid_argument("empty sweep value");
    }
    out.push_back(v);
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

std::vector<sweep_row> run_sweep(const raw_config& base, const std::string& param,
                                 const std::vector<std::string>& values, std::optional<std::uint64_t> seed)
{
  std::vector<sweep_row> rows;
  for (const auto& v : values) {
    raw_config raw = base;
    raw.set(param, v);
    rows.push_back({v, run_scenario(build_config(raw), seed)});
  }
  return rows;
}

void write_sweep_table(std::ostream& os, const std::string& param, const std::vector<sweep_row>& rows, bool csv)
{
  std::vector<std::string> header{param, "pass"};
  if (!rows.empty()) {
    for (const auto& a : rows.front().result.assertions) {
      header.push_back(a.name);
    }
    for (const auto& m : rows.front().result.metrics) {
      header.push_back(m.first);
    }
  }
  std::vector<std::vector<std::string>> table{header};
  for (const auto& r : rows) {
    std::vector<std::string> line{r.value, r.result.passed() ? "yes" : "no"};
    for (const auto& a : r.result.assertions) {
      line.emplace_back(to_string(a.status));
    }
    for (const auto& m : r.result.metrics) {
      line.push_back(m.second == std::floor(m.second) ? std::to_string(static_cast<long long>(m.second))
                                                      : format_double(m.second));
    }
    table.push_back(std::move(line));
  }

  if (csv) {
    for (const auto& line : table) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        os << (i ? "," : "") << line[i];
      }
      os << "\n";
    }
    return;
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], line[i].size());
    }
  }
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      os << std::left << std::setw(static_cast<int>(width[i] + 2)) << line[i];
    }
    os << "\n";
  }
}

} // namespace ovsim
