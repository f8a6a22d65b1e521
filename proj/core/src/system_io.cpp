#include "shellvi/system_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>
#include <vector>

#include "shellvi/errors.hpp"

namespace shellvi {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void expect(std::istream& is, const std::string& word) {
  std::string got;
  if (!(is >> got) || got != word) throw Error(ErrorKind::Io, "expected '" + word + "' in system file");
}

template <class T>
T read_value(std::istream& is, const char* what) {
  T v{};
  if (!(is >> v)) throw Error(ErrorKind::Io, std::string("malformed ") + what + " in system file");
  return v;
}

}  // namespace

void write_system(std::ostream& os, const QuadraticProgram& qp) {
  std::vector<std::tuple<int, int, double>> entries;
  for (int k = 0; k < qp.H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(qp.H, k); it; ++it)
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  std::sort(entries.begin(), entries.end());
  os << "shellvi-system 1\n";
  os << "dofs " << qp.H.rows() << "\n";
  os << "matrix " << entries.size() << "\n";
  for (const auto& [i, j, v] : entries) os << i << ' ' << j << ' ' << fmt(v) << "\n";
  os << "load\n";
  for (int i = 0; i < qp.f.size(); ++i) os << fmt(qp.f[i]) << "\n";
  os << "constraints " << qp.constraints.rows.size() << "\n";
  for (const ConstraintRow& r : qp.constraints.rows) {
    os << r.node << ' ' << r.dofs[0] << ' ' << r.dofs[1] << ' ' << r.dofs[2];
    for (int i = 0; i < 3; ++i) os << ' ' << fmt(r.coeff[i]);
    os << ' ' << fmt(r.bound) << "\n";
  }
}

QuadraticProgram read_system(std::istream& is) {
  expect(is, "shellvi-system");
  if (read_value<int>(is, "version") != 1) throw Error(ErrorKind::Io, "unsupported system version");
  expect(is, "dofs");
  const int n = read_value<int>(is, "dof count");
  if (n < 0) throw Error(ErrorKind::Io, "negative dof count");
  expect(is, "matrix");
  const long nnz = read_value<long>(is, "entry count");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(std::max(0L, nnz)));
  for (long k = 0; k < nnz; ++k) {
    const int i = read_value<int>(is, "row index");
    const int j = read_value<int>(is, "column index");
    const double v = read_value<double>(is, "matrix value");
    if (i < 0 || j < 0 || i >= n || j >= n) throw Error(ErrorKind::Io, "matrix index out of range");
    t.emplace_back(i, j, v);
  }
  QuadraticProgram qp;
  qp.H.resize(n, n);
  qp.H.setFromTriplets(t.begin(), t.end());
  qp.H.makeCompressed();
  expect(is, "load");
  qp.f.resize(n);
  for (int i = 0; i < n; ++i) qp.f[i] = read_value<double>(is, "load value");
  expect(is, "constraints");
  const long m = read_value<long>(is, "constraint count");
  for (long k = 0; k < m; ++k) {
    ConstraintRow r;
    r.node = read_value<int>(is, "constraint node");
    for (int i = 0; i < 3; ++i) r.dofs[static_cast<std::size_t>(i)] = read_value<int>(is, "constraint dof");
    for (int i = 0; i < 3; ++i) r.coeff[i] = read_value<double>(is, "constraint coefficient");
    r.bound = read_value<double>(is, "constraint bound");
    qp.constraints.rows.push_back(r);
  }
  qp.constraints.validate(n);
  return qp;
}

void save_system(const std::string& path, const QuadraticProgram& qp) {
  std::ostringstream os;
  write_system(os, qp);
  write_file_atomic(path, os.str());
}

QuadraticProgram load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_system(in);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::Io, "rename failed for " + path + ": " + ec.message());
}

}  // namespace shellvi
