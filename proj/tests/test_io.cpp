#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "l1pc/io.hpp"
#include "l1pc/random.hpp"

using l1pc::Engine;
using l1pc::Index;
using l1pc::Matrix;
using l1pc::Vector;
namespace io = l1pc::io;
namespace fs = std::filesystem;

namespace {

// A per-process scratch directory, removed when the last test finishes.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("l1pc_io_test_" + std::to_string(std::uint64_t(::getpid())));
    fs::create_directories(dir);
  }
  ~Scratch() { std::error_code ec; fs::remove_all(dir, ec); }
  std::string operator()(const char* name) const { return (dir / name).string(); }
};

Scratch& scratch() {
  static Scratch s;
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Matrix<double> awkward_matrix() {
  Matrix<double> m(4, 3);
  m << 0.1, -2.5e-300, 3.0,
      1e300, -0.0, 123456789.123456789,
      1.0 / 3.0, -7, 2.2250738585072014e-308,
      0.1 + 0.2, 42, -1e-9;
  return m;
}

bool same_values(const Matrix<double>& a, const Matrix<double>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     sizeof(double) * std::size_t(a.size())) == 0;
}

}  // namespace

TEST_CASE("csv points round-trip losslessly") {
  const auto m = awkward_matrix();
  const auto path = scratch()("points.csv");
  io::write_points_csv(path, m);
  const auto back = io::read_points(path);
  CHECK(same_values(m, back));
}

TEST_CASE("32-bit mode narrows before writing") {
  Matrix<double> m(2, 3);
  m << 0.1, -2.5e-30, 123456789.123456789,
      1.0 / 3.0, -0.0, 1e30;
  const auto csv = scratch()("points_f32.csv");
  io::write_points_csv(csv, m, true);
  const auto back = io::read_points(csv);
  REQUIRE(back.rows() == m.rows());
  // %.9g preserves a float exactly across the decimal text, so narrowing the
  // re-read value must land back on the narrowed original.
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      CHECK(float(back(i, j)) == float(m(i, j)));
  CHECK(float(back(0, 0)) != 0.1);  // narrowing is observable
}

TEST_CASE("binary points round-trip in both widths") {
  Engine eng(80);
  Matrix<double> m(31, 5);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = l1pc::uniform_in(eng, -1e6, 1e6);
  const auto wide = scratch()("points.bin");
  io::write_points_binary(wide, m);
  CHECK(same_values(m, io::read_points(wide)));

  const auto narrow = scratch()("points_f32.bin");
  io::write_points_binary(narrow, m, true);
  const auto back = io::read_points(narrow);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      CHECK(back(i, j) == double(float(m(i, j))));

  // The binary file starts with the magic, the csv with a digit.
  const std::string head = read_text(wide).substr(0, 4);
  CHECK(head == "L1PC");
}

TEST_CASE("csv tolerates CRLF endings and blank lines") {
  const auto path = scratch()("crlf.csv");
  write_text(path, "1,2\r\n3,4\r\n\r\n5 , 6\r\n");
  const auto m = io::read_points(path);
  REQUIRE(m.rows() == 3);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 1);
  CHECK(m(2, 1) == 6);
}

TEST_CASE("malformed point files are rejected") {
  const auto& tmp = scratch();
  CHECK_THROWS_AS((void)io::read_points(tmp("missing.csv")),
                  std::runtime_error);

  write_text(tmp("ragged.csv"), "1,2\n3\n");
  CHECK_THROWS_AS((void)io::read_points(tmp("ragged.csv")), std::runtime_error);

  write_text(tmp("junk.csv"), "1,x\n");
  CHECK_THROWS_AS((void)io::read_points(tmp("junk.csv")), std::runtime_error);

  write_text(tmp("trailing.csv"), "1,2,\n");
  CHECK_THROWS_AS((void)io::read_points(tmp("trailing.csv")),
                  std::runtime_error);

  write_text(tmp("nan.csv"), "1,nan\n");
  CHECK_THROWS_AS((void)io::read_points(tmp("nan.csv")), std::runtime_error);

  write_text(tmp("empty.csv"), "");
  CHECK_THROWS_AS((void)io::read_points(tmp("empty.csv")), std::runtime_error);

  // Truncated binary payload.
  Matrix<double> m(2, 2);
  m << 1, 2, 3, 4;
  io::write_points_binary(tmp("trunc.bin"), m);
  const std::string bytes = read_text(tmp("trunc.bin"));
  write_text(tmp("trunc.bin"), bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS((void)io::read_points(tmp("trunc.bin")), std::runtime_error);

  // Wrong version field.
  std::string versioned = bytes;
  versioned[4] = 9;
  write_text(tmp("version.bin"), versioned);
  CHECK_THROWS_AS((void)io::read_points(tmp("version.bin")),
                  std::runtime_error);
}

TEST_CASE("labels round-trip and reject garbage") {
  const auto& tmp = scratch();
  const std::vector<Index> labels{0, 1, 1, 0, 2};
  io::write_labels(tmp("labels.txt"), labels);
  CHECK(io::read_labels(tmp("labels.txt")) == labels);

  write_text(tmp("bad_labels.txt"), "0\n-1\n");
  CHECK_THROWS_AS((void)io::read_labels(tmp("bad_labels.txt")),
                  std::runtime_error);
  write_text(tmp("word_labels.txt"), "zero\n");
  CHECK_THROWS_AS((void)io::read_labels(tmp("word_labels.txt")),
                  std::runtime_error);
  write_text(tmp("empty_labels.txt"), "\n\n");
  CHECK_THROWS_AS((void)io::read_labels(tmp("empty_labels.txt")),
                  std::runtime_error);
}

TEST_CASE("weights round-trip bitwise") {
  Engine eng(81);
  Vector<double> w(17);
  for (Index i = 0; i < w.size(); ++i) w(i) = l1pc::uniform_in(eng, 1e-6, 1e6);
  w(3) = 1.0 / 3.0;
  const auto path = scratch()("weights.txt");
  io::write_weights(path, w);
  const auto back = io::read_weights(path);
  REQUIRE(back.size() == w.size());
  for (Index i = 0; i < w.size(); ++i) CHECK(back(i) == w(i));

  write_text(scratch()("bad_weights.txt"), "1.5\nabc\n");
  CHECK_THROWS_AS((void)io::read_weights(scratch()("bad_weights.txt")),
                  std::runtime_error);
}

TEST_CASE("trace csv layout") {
  l1pc::pcm::IterationTrace<double> trace;
  l1pc::pcm::IterationRecord<double> r1{1.0, 10.0, 20.0, 5.0, 2.5, {}};
  l1pc::pcm::IterationRecord<double> r2{1.1, 9.0, 18.0, 4.0, 0.0, {0, 2}};
  trace.records.push_back(r1);
  trace.records.push_back(r2);
  const auto path = scratch()("trace.csv");
  io::write_trace_csv(path, trace);
  const std::string text = read_text(path);
  CHECK(text.rfind("iter,exponent,jdf,soft_objective,hard_objective,"
                   "center_movement,carried\n", 0) == 0);
  CHECK(text.find("\n1,1,10,20,5,2.5,\n") != std::string::npos);
  CHECK(text.find("0;2\n") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
