#include "tbslab/grid_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>

#include "tbslab/errors.hpp"

namespace tbslab {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

struct CsvTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> cells;
  std::vector<std::pair<std::size_t, std::size_t>> where;  // (line, column)
};

CsvTable read_csv_table(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const auto end = comma == std::string::npos ? line.size() : comma;
      std::string cell = line.substr(start, end - start);
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      cell = first == std::string::npos ? std::string() : cell.substr(first, last - first + 1);
      if (cell.empty()) throw ParseError("empty CSV field", line_no, start + 1);
      t.cells.push_back(std::move(cell));
      t.where.emplace_back(line_no, start + 1);
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (t.rows == 0) {
      t.cols = count;
    } else if (count != t.cols) {
      throw ParseError("row has " + std::to_string(count) + " fields, expected " +
                           std::to_string(t.cols),
                       line_no, 1);
    }
    ++t.rows;
  }
  if (t.rows == 0) throw ParseError("empty file", 1, 1);
  return t;
}

// Whitespace/comment-aware tokenizer for the netpbm family.
class PnmReader {
 public:
  explicit PnmReader(std::istream& in) : in_(in) {}

  std::string token() {
    skip_space();
    const auto at_line = line_;
    const auto at_col = col_;
    std::string tok;
    while (true) {
      const int c = in_.peek();
      if (c == EOF || std::isspace(c) || c == '#') break;
      tok.push_back(static_cast<char>(get()));
    }
    if (tok.empty()) throw ParseError("unexpected end of file", at_line, at_col);
    last_line_ = at_line;
    last_col_ = at_col;
    return tok;
  }

  std::size_t number() {
    const auto tok = token();
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw ParseError("expected a non-negative integer, got '" + tok + "'", last_line_,
                       last_col_);
    }
    return v;
  }

  // P1 allows digits without separators, so bits are read one at a time.
  int bit() {
    skip_space();
    const auto at_line = line_;
    const auto at_col = col_;
    const int c = get();
    if (c == EOF) throw ParseError("unexpected end of file", at_line, at_col);
    if (c != '0' && c != '1') {
      if (std::isdigit(c)) {
        throw ValidationError("non-binary mask value '" + std::string(1, static_cast<char>(c)) +
                              "' at line " + std::to_string(at_line) + ", column " +
                              std::to_string(at_col));
      }
      throw ParseError("unexpected character in bitmap", at_line, at_col);
    }
    return c - '0';
  }

  // P5 rasters start after exactly one whitespace byte.
  void single_space() {
    const int c = get();
    if (c == EOF || !std::isspace(c)) throw ParseError("malformed raster header", line_, col_);
  }

  std::istream& stream() { return in_; }
  std::size_t line() const { return last_line_; }
  std::size_t column() const { return last_col_; }

 private:
  int get() {
    const int c = in_.get();
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if (c != EOF) {
      ++col_;
    }
    return c;
  }
  void skip_space() {
    while (true) {
      const int c = in_.peek();
      if (c == '#') {
        while (in_.peek() != '\n' && in_.peek() != EOF) get();
      } else if (c != EOF && std::isspace(c)) {
        get();
      } else {
        return;
      }
    }
  }

  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::size_t last_line_ = 1;
  std::size_t last_col_ = 1;
};

void check_dims(const GridSpec& got, const std::optional<GridSpec>& expected) {
  if (expected && (expected->width() != got.width() || expected->height() != got.height())) {
    throw ValidationError("map is " + std::to_string(got.width()) + "x" +
                          std::to_string(got.height()) + ", mask is " +
                          std::to_string(expected->width()) + "x" +
                          std::to_string(expected->height()));
  }
}

}  // namespace

MaskFormat parse_mask_format(std::string_view name) {
  if (name == "csv01") return MaskFormat::csv01;
  if (name == "pbm") return MaskFormat::pbm;
  throw ValidationError("unknown mask format '" + std::string(name) + "'");
}

DenseFormat parse_dense_format(std::string_view name) {
  if (name == "csvfloat") return DenseFormat::csvfloat;
  if (name == "pgm16") return DenseFormat::pgm16;
  throw ValidationError("unknown dense map format '" + std::string(name) + "'");
}

EnvironmentMask read_mask(std::istream& in, MaskFormat format, double cell_size) {
  if (format == MaskFormat::csv01) {
    const auto t = read_csv_table(in);
    std::vector<std::uint8_t> occ(t.cells.size());
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      const auto& cell = t.cells[i];
      int v = 0;
      const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size()) {
        throw ParseError("not an integer: '" + cell + "'", t.where[i].first, t.where[i].second);
      }
      if (v != 0 && v != 1) {
        throw ValidationError("non-binary mask value " + cell + " at line " +
                              std::to_string(t.where[i].first) + ", column " +
                              std::to_string(t.where[i].second));
      }
      occ[i] = static_cast<std::uint8_t>(v);
    }
    return EnvironmentMask(GridSpec(t.cols, t.rows, cell_size), std::move(occ));
  }

  PnmReader r(in);
  const auto magic = r.token();
  if (magic != "P1") throw ParseError("expected P1 bitmap, got '" + magic + "'", 1, 1);
  const auto width = r.number();
  const auto height = r.number();
  GridSpec grid(width, height, cell_size);
  std::vector<std::uint8_t> occ(grid.cell_count());
  for (auto& v : occ) v = static_cast<std::uint8_t>(r.bit());
  return EnvironmentMask(grid, std::move(occ));
}

EnvironmentMask load_mask(const std::filesystem::path& path, MaskFormat format,
                          double cell_size) {
  auto in = open_in(path);
  return read_mask(in, format, cell_size);
}

void write_mask(std::ostream& out, const EnvironmentMask& mask, MaskFormat format) {
  const auto& g = mask.grid();
  const auto occ = mask.occupancy();
  const char sep = format == MaskFormat::csv01 ? ',' : ' ';
  if (format == MaskFormat::pbm) out << "P1\n" << g.width() << ' ' << g.height() << '\n';
  for (std::size_t r = 0; r < g.height(); ++r) {
    for (std::size_t c = 0; c < g.width(); ++c) {
      if (c) out << sep;
      out << static_cast<int>(occ[g.linear_index(r, c)]);
    }
    out << '\n';
  }
}

void save_mask(const std::filesystem::path& path, const EnvironmentMask& mask,
               MaskFormat format) {
  auto out = open_out(path);
  write_mask(out, mask, format);
}

FieldSample read_dense_map(std::istream& in, DenseFormat format,
                           std::optional<GridSpec> expected) {
  const double cell_size = expected ? expected->cell_size() : 1.0;
  if (format == DenseFormat::csvfloat) {
    const auto t = read_csv_table(in);
    GridSpec grid(t.cols, t.rows, cell_size);
    check_dims(grid, expected);
    std::vector<double> values(t.cells.size());
    for (std::size_t i = 0; i < t.cells.size(); ++i) {
      std::istringstream cell(t.cells[i]);
      cell.imbue(std::locale::classic());
      double v = 0.0;
      if (!(cell >> v) || !cell.eof() || !std::isfinite(v)) {
        throw ParseError("not a finite number: '" + t.cells[i] + "'", t.where[i].first,
                         t.where[i].second);
      }
      values[i] = v;
    }
    return {grid, std::move(values)};
  }

  PnmReader r(in);
  const auto magic = r.token();
  if (magic != "P2" && magic != "P5") {
    throw ParseError("expected P2 or P5 graymap, got '" + magic + "'", 1, 1);
  }
  const auto width = r.number();
  const auto height = r.number();
  const auto maxval = r.number();
  if (maxval == 0 || maxval > 65535) {
    throw ValidationError("graymap maxval must be in [1, 65535]");
  }
  GridSpec grid(width, height, cell_size);
  check_dims(grid, expected);
  std::vector<double> values(grid.cell_count());
  const double scale = static_cast<double>(maxval);
  if (magic == "P2") {
    for (auto& v : values) {
      const auto level = r.number();
      if (level > maxval) {
        throw ValidationError("graymap level " + std::to_string(level) + " exceeds maxval at line " +
                              std::to_string(r.line()));
      }
      v = static_cast<double>(level) / scale;
    }
  } else {
    r.single_space();
    auto& s = r.stream();
    const bool wide = maxval > 255;
    for (auto& v : values) {
      unsigned level = 0;
      const int hi = s.get();
      if (hi == EOF) throw ValidationError("graymap raster is truncated");
      level = static_cast<unsigned>(hi);
      if (wide) {
        const int lo = s.get();
        if (lo == EOF) throw ValidationError("graymap raster is truncated");
        level = (level << 8) | static_cast<unsigned>(lo);
      }
      if (level > maxval) throw ValidationError("graymap level exceeds maxval");
      v = static_cast<double>(level) / scale;
    }
  }
  return {grid, std::move(values)};
}

FieldSample load_dense_map(const std::filesystem::path& path, DenseFormat format,
                           std::optional<GridSpec> expected) {
  auto in = open_in(path);
  return read_dense_map(in, format, expected);
}

void write_csv_field(std::ostream& out, const FieldSample& field) {
  const auto& g = field.grid;
  char buf[32];
  for (std::size_t r = 0; r < g.height(); ++r) {
    for (std::size_t c = 0; c < g.width(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", field.values[g.linear_index(r, c)]);
      out << buf;
    }
    out << '\n';
  }
}

void write_pgm16(std::ostream& out, const GridSpec& grid,
                 const std::vector<std::uint16_t>& levels) {
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n65535\n";
  for (const auto level : levels) {
    out.put(static_cast<char>(level >> 8));
    out.put(static_cast<char>(level & 0xff));
  }
}

}  // namespace tbslab
