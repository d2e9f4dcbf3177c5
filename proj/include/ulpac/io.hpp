#pragma once

// Matrix Market (array complex general), CSV and PGM output.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ulpac/jointspec.hpp"
#include "ulpac/matcore.hpp"
#include "ulpac/path.hpp"
#include "ulpac/pseudospec.hpp"

namespace ulpac {

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io: " + what) {}
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

/// Column-major "array complex general"; values printed with 17
/// significant digits so the round trip is exact.
inline void mm_write(std::ostream& out, const CMatrix& a) {
  out << "%%MatrixMarket matrix array complex general\n";
  out << a.rows() << " " << a.cols() << "\n";
  for (Index c = 0; c < a.cols(); ++c) {
    for (Index r = 0; r < a.rows(); ++r) {
      out << detail::fmt17(a(r, c).real()) << " " << detail::fmt17(a(r, c).imag()) << "\n";
    }
  }
}

inline void mm_write(const std::string& path, const CMatrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  mm_write(out, a);
  if (!out) throw IoError("write failed for " + path);
}

inline CMatrix mm_read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty Matrix Market stream");
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || detail::lower(object) != "matrix") {
    throw IoError("malformed Matrix Market header");
  }
  if (detail::lower(format) != "array") throw IoError("only the array format is supported");
  if (detail::lower(field) != "complex") throw IoError("expected a complex field, got '" + field + "'");
  if (detail::lower(symmetry) != "general") throw IoError("only general symmetry is supported");

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream ds(line);
  long long rows = -1, cols = -1;
  if (!(ds >> rows >> cols) || rows < 0 || cols < 0) throw IoError("malformed size line");
  CMatrix a(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      double re = 0, im = 0;
      if (!(in >> re >> im)) throw IoError("fewer entries than the declared dimensions");
      a(r, c) = {re, im};
    }
  }
  double extra = 0;
  if (in >> extra) throw IoError("more entries than the declared dimensions");
  return a;
}

inline CMatrix mm_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return mm_read(in);
}

/// One row per joint eigenvalue: k,re_1,im_1,...,re_m,im_m (k from 1).
inline void write_joint_spectrum_csv(std::ostream& out, const JointSpectrum& js) {
  const Index m = js.points.cols();
  out << "k";
  for (Index j = 0; j < m; ++j) out << ",re" << j + 1 << ",im" << j + 1;
  out << "\n";
  for (Index k = 0; k < js.points.rows(); ++k) {
    out << k + 1;
    for (Index j = 0; j < m; ++j) {
      out << "," << detail::fmt17(js.points(k, j).real()) << ","
          << detail::fmt17(js.points(k, j).imag());
    }
    out << "\n";
  }
}

/// Rows re,im,inside over the grid.
inline void write_mask_csv(std::ostream& out, const PseudospectrumMask& mask) {
  out << "re,im,inside\n";
  for (Index iy = 0; iy < mask.grid.ny; ++iy) {
    for (Index ix = 0; ix < mask.grid.nx; ++ix) {
      const Complex p = mask.grid.point(ix, iy);
      out << detail::fmt17(p.real()) << "," << detail::fmt17(p.imag()) << ","
          << (mask.at(ix, iy) ? 1 : 0) << "\n";
    }
  }
}

/// Binary PGM, top row = largest imaginary part; inside points are black.
inline void write_mask_pgm(std::ostream& out, const PseudospectrumMask& mask) {
  out << "P5\n" << mask.grid.nx << " " << mask.grid.ny << "\n255\n";
  for (Index iy = mask.grid.ny - 1; iy >= 0; --iy) {
    for (Index ix = 0; ix < mask.grid.nx; ++ix) out.put(mask.at(ix, iy) ? '\0' : '\xff');
  }
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "t,defect,deviation\n";
  for (const auto& r : rows) {
    out << detail::fmt17(r.t) << "," << detail::fmt17(r.defect) << "," << detail::fmt17(r.deviation)
        << "\n";
  }
}

}  // namespace ulpac
