#ifndef L1PC_IO_HPP
#define L1PC_IO_HPP

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "l1pc/common.hpp"
#include "l1pc/pcm.hpp"

namespace l1pc::io {

// File formats.
//  - Points / centers: headerless CSV, one point per row, 17 significant
//    digits (lossless round-trip for 64-bit values; 9 digits in 32-bit mode).
//  - Labels: one integer per line. Weights: one number per line.
//  - Binary points: magic "L1PC", u32 version (1), u64 N, u64 n, u8 dtype
//    (byte width 4 or 8), then the row-major little-endian payload. Readers
//    pick the format by sniffing the magic.

static_assert(std::endian::native == std::endian::little,
              "binary point files assume a little-endian host");

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

inline File open_file(const std::string& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f)
    throw std::runtime_error("cannot open " + path + ": " +
                             std::strerror(errno));
  return f;
}

inline void write_all(std::FILE* f, const void* data, std::size_t bytes,
                      const std::string& path) {
  if (bytes > 0 && std::fwrite(data, 1, bytes, f) != bytes)
    throw std::runtime_error("short write to " + path);
}

inline std::string read_entire_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failure on " + path);
  return buffer.str();
}

inline int format_value(char* buf, std::size_t cap, double v, bool f32) {
  return f32 ? std::snprintf(buf, cap, "%.9g", double(float(v)))
             : std::snprintf(buf, cap, "%.17g", v);
}

}  // namespace detail

inline constexpr char kBinaryMagic[4] = {'L', '1', 'P', 'C'};
inline constexpr std::uint32_t kBinaryVersion = 1;

inline void write_points_csv(const std::string& path,
                             const Matrix<double>& points, bool f32 = false) {
  auto f = detail::open_file(path, "wb");
  std::string line;
  char buf[40];
  for (Index i = 0; i < points.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < points.cols(); ++j) {
      if (j > 0) line.push_back(',');
      const int len = detail::format_value(buf, sizeof buf, points(i, j), f32);
      line.append(buf, static_cast<std::size_t>(len));
    }
    line.push_back('\n');
    detail::write_all(f.get(), line.data(), line.size(), path);
  }
}

inline void write_points_binary(const std::string& path,
                                const Matrix<double>& points,
                                bool f32 = false) {
  auto f = detail::open_file(path, "wb");
  const std::uint32_t version = kBinaryVersion;
  const std::uint64_t rows = static_cast<std::uint64_t>(points.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(points.cols());
  const std::uint8_t dtype = f32 ? 4 : 8;
  detail::write_all(f.get(), kBinaryMagic, 4, path);
  detail::write_all(f.get(), &version, sizeof version, path);
  detail::write_all(f.get(), &rows, sizeof rows, path);
  detail::write_all(f.get(), &cols, sizeof cols, path);
  detail::write_all(f.get(), &dtype, sizeof dtype, path);
  if (f32) {
    std::vector<float> row(static_cast<std::size_t>(points.cols()));
    for (Index i = 0; i < points.rows(); ++i) {
      for (Index j = 0; j < points.cols(); ++j)
        row[static_cast<std::size_t>(j)] = static_cast<float>(points(i, j));
      detail::write_all(f.get(), row.data(), row.size() * sizeof(float), path);
    }
  } else {
    std::vector<double> row(static_cast<std::size_t>(points.cols()));
    for (Index i = 0; i < points.rows(); ++i) {
      for (Index j = 0; j < points.cols(); ++j)
        row[static_cast<std::size_t>(j)] = points(i, j);
      detail::write_all(f.get(), row.data(), row.size() * sizeof(double), path);
    }
  }
}

namespace detail {

inline Matrix<double> parse_points_csv(const std::string& text,
                                       const std::string& path) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    const char* line_end = static_cast<const char*>(
        std::memchr(p, '\n', static_cast<std::size_t>(end - p)));
    const char* stop = line_end ? line_end : end;
    while (stop > p && (stop[-1] == '\r' || stop[-1] == ' ')) --stop;
    if (stop > p) {
      Index fields = 0;
      const char* q = p;
      while (q < stop) {
        char* after = nullptr;
        errno = 0;
        const double v = std::strtod(q, &after);
        if (after == q || after > stop)
          throw std::runtime_error(path + ": malformed number in row " +
                                   std::to_string(rows + 1));
        values.push_back(v);
        ++fields;
        q = after;
        while (q < stop && (*q == ' ' || *q == '\t')) ++q;
        if (q < stop) {
          if (*q != ',')
            throw std::runtime_error(path + ": expected comma in row " +
                                     std::to_string(rows + 1));
          ++q;
          while (q < stop && (*q == ' ' || *q == '\t')) ++q;
          if (q >= stop)
            throw std::runtime_error(path + ": trailing comma in row " +
                                     std::to_string(rows + 1));
        }
      }
      if (cols < 0) cols = fields;
      if (fields != cols)
        throw std::runtime_error(path + ": row " + std::to_string(rows + 1) +
                                 " has " + std::to_string(fields) +
                                 " fields, expected " + std::to_string(cols));
      ++rows;
    }
    if (!line_end) break;
    p = line_end + 1;
  }
  if (rows == 0) throw std::runtime_error(path + ": no data rows");
  Matrix<double> points(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      points(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  if (!points.allFinite())
    throw std::runtime_error(path + ": non-finite coordinate");
  return points;
}

inline Matrix<double> parse_points_binary(const std::string& bytes,
                                          const std::string& path) {
  constexpr std::size_t header = 4 + 4 + 8 + 8 + 1;
  if (bytes.size() < header) throw std::runtime_error(path + ": truncated header");
  std::uint32_t version;
  std::uint64_t rows, cols;
  std::uint8_t dtype;
  std::memcpy(&version, bytes.data() + 4, sizeof version);
  std::memcpy(&rows, bytes.data() + 8, sizeof rows);
  std::memcpy(&cols, bytes.data() + 16, sizeof cols);
  std::memcpy(&dtype, bytes.data() + 24, sizeof dtype);
  if (version != kBinaryVersion)
    throw std::runtime_error(path + ": unsupported version " +
                             std::to_string(version));
  if (dtype != 4 && dtype != 8)
    throw std::runtime_error(path + ": unsupported element width " +
                             std::to_string(int(dtype)));
  if (rows == 0 || cols == 0)
    throw std::runtime_error(path + ": empty matrix");
  const std::uint64_t count = rows * cols;
  if (cols != 0 && count / cols != rows)
    throw std::runtime_error(path + ": size overflow");
  if (bytes.size() - header != count * dtype)
    throw std::runtime_error(path + ": payload size mismatch");
  Matrix<double> points(static_cast<Index>(rows), static_cast<Index>(cols));
  const char* payload = bytes.data() + header;
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      const char* src = payload + (i * cols + j) * dtype;
      if (dtype == 4) {
        float v;
        std::memcpy(&v, src, 4);
        points(static_cast<Index>(i), static_cast<Index>(j)) = v;
      } else {
        double v;
        std::memcpy(&v, src, 8);
        points(static_cast<Index>(i), static_cast<Index>(j)) = v;
      }
    }
  if (!points.allFinite())
    throw std::runtime_error(path + ": non-finite coordinate");
  return points;
}

}  // namespace detail

// Reads a points file in either format, sniffing the binary magic.
inline Matrix<double> read_points(const std::string& path) {
  const std::string bytes = detail::read_entire_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic, 4) == 0)
    return detail::parse_points_binary(bytes, path);
  return detail::parse_points_csv(bytes, path);
}

inline void write_labels(const std::string& path,
                         const std::vector<Index>& labels) {
  auto f = detail::open_file(path, "wb");
  std::string line;
  for (const Index label : labels) {
    line = std::to_string(label);
    line.push_back('\n');
    detail::write_all(f.get(), line.data(), line.size(), path);
  }
}

inline std::vector<Index> read_labels(const std::string& path) {
  const std::string text = detail::read_entire_file(path);
  std::vector<Index> labels;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    char* after = nullptr;
    const long long v = std::strtoll(token.c_str(), &after, 10);
    if (after == token.c_str() || *after != '\0' || v < 0)
      throw std::runtime_error(path + ": malformed label '" + token + "'");
    labels.push_back(static_cast<Index>(v));
  }
  if (labels.empty()) throw std::runtime_error(path + ": no labels");
  return labels;
}

inline void write_weights(const std::string& path,
                          const Vector<double>& weights) {
  auto f = detail::open_file(path, "wb");
  char buf[40];
  std::string line;
  for (Index i = 0; i < weights.size(); ++i) {
    const int len = std::snprintf(buf, sizeof buf, "%.17g", weights(i));
    line.assign(buf, static_cast<std::size_t>(len));
    line.push_back('\n');
    detail::write_all(f.get(), line.data(), line.size(), path);
  }
}

inline Vector<double> read_weights(const std::string& path) {
  const std::string text = detail::read_entire_file(path);
  std::vector<double> weights;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    char* after = nullptr;
    errno = 0;
    const double v = std::strtod(token.c_str(), &after);
    if (after == token.c_str() || *after != '\0')
      throw std::runtime_error(path + ": malformed weight '" + token + "'");
    weights.push_back(v);
  }
  if (weights.empty()) throw std::runtime_error(path + ": no weights");
  Vector<double> out(static_cast<Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i)
    out(static_cast<Index>(i)) = weights[i];
  return out;
}

// Per-iteration trace as CSV with a header row. The carried column lists the
// clusters whose center was carried over, joined by ';' (empty when none).
template <class Scalar>
void write_trace_csv(const std::string& path,
                     const pcm::IterationTrace<Scalar>& trace) {
  auto f = detail::open_file(path, "wb");
  const std::string header =
      "iter,exponent,jdf,soft_objective,hard_objective,center_movement,"
      "carried\n";
  detail::write_all(f.get(), header.data(), header.size(), path);
  char buf[40];
  std::string line;
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto& rec = trace.records[r];
    line = std::to_string(r + 1);
    const double fields[] = {double(rec.nu), double(rec.jdf),
                             double(rec.soft_objective),
                             double(rec.hard_objective),
                             double(rec.center_movement)};
    for (const double v : fields) {
      line.push_back(',');
      const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
      line.append(buf, static_cast<std::size_t>(len));
    }
    line.push_back(',');
    for (std::size_t c = 0; c < rec.carried.size(); ++c) {
      if (c > 0) line.push_back(';');
      line += std::to_string(rec.carried[c]);
    }
    line.push_back('\n');
    detail::write_all(f.get(), line.data(), line.size(), path);
  }
}

}  // namespace l1pc::io

#endif  // L1PC_IO_HPP
