#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace rctadjust {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
    --e;
  }
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trimmed(line.substr(start)));
      break;
    }
    out.push_back(trimmed(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void throw_parse(const std::string& msg) {
  throw Error(ErrorCode::Parse, msg);
}

double parse_cell(const std::string& text, std::size_t row,
                  const std::string& column) {
  const std::string where =
      "row " + std::to_string(row) + ", column '" + column + "': ";
  if (text.empty()) throw_parse(where + "empty cell");
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;  // std::from_chars rejects an explicit plus
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw_parse(where + "cannot parse '" + text + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw_parse(where + "value must be finite");
  }
  return value;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // parsed numeric cells
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open file: " + path);

  Table table;
  std::string line;
  if (!std::getline(in, line)) {
    throw_parse(path + ": missing header row");
  }
  table.header = split_fields(line);

  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trimmed(line).empty()) continue;
    ++data_row;
    const auto fields = split_fields(line);
    if (fields.size() != table.header.size()) {
      throw_parse("row " + std::to_string(data_row) + " has " +
                  std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(table.header.size()));
    }
    std::vector<double> parsed(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      parsed[j] = parse_cell(fields[j], data_row, table.header[j]);
    }
    table.rows.push_back(std::move(parsed));
  }
  return table;
}

/// Verifies header equals [prefix..., w1..wp, suffix...] and returns p.
std::size_t check_header(const Table& table,
                         const std::vector<std::string>& prefix,
                         const std::vector<std::string>& suffix) {
  const auto& h = table.header;
  const std::size_t fixed = prefix.size() + suffix.size();
  if (h.size() < fixed) {
    throw_parse("header has " + std::to_string(h.size()) +
                " columns, expected at least " + std::to_string(fixed));
  }
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (h[i] != prefix[i]) {
      throw_parse("missing required column '" + prefix[i] + "' (found '" +
                  h[i] + "' at position " + std::to_string(i + 1) + ")");
    }
  }
  const std::size_t p = h.size() - fixed;
  for (std::size_t j = 0; j < p; ++j) {
    const std::string want = "w" + std::to_string(j + 1);
    if (h[prefix.size() + j] != want) {
      throw_parse("expected covariate column '" + want + "', found '" +
                  h[prefix.size() + j] + "'");
    }
  }
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    if (h[prefix.size() + p + i] != suffix[i]) {
      throw_parse("missing required column '" + suffix[i] + "' (found '" +
                  h[prefix.size() + p + i] + "')");
    }
  }
  return p;
}

double checked_treatment(double value, std::size_t row) {
  if (value != 0.0 && value != 1.0) {
    throw_parse("row " + std::to_string(row) +
                ", column 'a': treatment must be 0 or 1");
  }
  return value;
}

void write_line(std::ofstream& out, const std::vector<double>& cells) {
  for (std::size_t j = 0; j < cells.size(); ++j) {
    if (j > 0) out << ',';
    out << format_csv_number(cells[j]);
  }
  out << '\n';
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write file: " + path);
  return out;
}

}  // namespace

std::string format_csv_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

TrialDataset read_trial_csv(const std::string& path) {
  const Table table = read_table(path);
  const std::size_t p = check_header(table, {"y", "a"}, {});
  const std::size_t n = table.rows.size();

  TrialDataset data;
  data.y.resize(n);
  data.a.resize(n);
  data.w = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    data.y[i] = table.rows[i][0];
    data.a[i] = checked_treatment(table.rows[i][1], i + 1);
    for (std::size_t j = 0; j < p; ++j) data.w(i, j) = table.rows[i][2 + j];
  }
  data.validate();
  return data;
}

HistoricalDataset read_historical_csv(const std::string& path) {
  const Table table = read_table(path);
  const std::size_t p = check_header(table, {"y"}, {});
  const std::size_t n = table.rows.size();

  HistoricalDataset data;
  data.y.resize(n);
  data.w = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    data.y[i] = table.rows[i][0];
    for (std::size_t j = 0; j < p; ++j) data.w(i, j) = table.rows[i][1 + j];
  }
  data.validate();
  return data;
}

AugmentedTrialDataset read_augmented_trial_csv(const std::string& path) {
  const Table table = read_table(path);
  const std::size_t p =
      check_header(table, {"y", "a"}, {"u", "y0", "y1", "m0", "m1"});
  const std::size_t n = table.rows.size();

  AugmentedTrialDataset data;
  data.trial.y.resize(n);
  data.trial.a.resize(n);
  data.trial.w = Matrix(n, p);
  data.u.resize(n);
  data.y0.resize(n);
  data.y1.resize(n);
  data.m0.resize(n);
  data.m1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = table.rows[i];
    data.trial.y[i] = r[0];
    data.trial.a[i] = checked_treatment(r[1], i + 1);
    for (std::size_t j = 0; j < p; ++j) data.trial.w(i, j) = r[2 + j];
    data.u[i] = r[2 + p];
    data.y0[i] = r[3 + p];
    data.y1[i] = r[4 + p];
    data.m0[i] = r[5 + p];
    data.m1[i] = r[6 + p];
  }
  data.validate();
  return data;
}

void write_trial_csv(const TrialDataset& data, const std::string& path) {
  auto out = open_for_write(path);
  out << "y,a";
  for (std::size_t j = 0; j < data.p(); ++j) out << ",w" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::vector<double> cells{data.y[i], data.a[i]};
    for (std::size_t j = 0; j < data.p(); ++j) cells.push_back(data.w(i, j));
    write_line(out, cells);
  }
}

void write_historical_csv(const HistoricalDataset& data,
                          const std::string& path) {
  auto out = open_for_write(path);
  out << "y";
  for (std::size_t j = 0; j < data.p(); ++j) out << ",w" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::vector<double> cells{data.y[i]};
    for (std::size_t j = 0; j < data.p(); ++j) cells.push_back(data.w(i, j));
    write_line(out, cells);
  }
}

void write_augmented_trial_csv(const AugmentedTrialDataset& data,
                               const std::string& path) {
  auto out = open_for_write(path);
  out << "y,a";
  const std::size_t p = data.trial.p();
  for (std::size_t j = 0; j < p; ++j) out << ",w" << (j + 1);
  out << ",u,y0,y1,m0,m1\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    std::vector<double> cells{data.trial.y[i], data.trial.a[i]};
    for (std::size_t j = 0; j < p; ++j) cells.push_back(data.trial.w(i, j));
    cells.push_back(data.u[i]);
    cells.push_back(data.y0[i]);
    cells.push_back(data.y1[i]);
    cells.push_back(data.m0[i]);
    cells.push_back(data.m1[i]);
    write_line(out, cells);
  }
}

}  // namespace rctadjust
