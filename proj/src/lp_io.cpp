#include <iomanip>
#include <ostream>

#include "rasddp/lp.hpp"

namespace rasddp {

namespace {

void put_bound(std::ostream& out, double v) {
  if (v == kInf) out << "inf";
  else if (v == -kInf) out << "-inf";
  else out << v;
}

}  // namespace

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  const auto flags = out.flags();
  out << std::setprecision(17);
  out << "vars " << lp.num_vars() << " rows " << lp.num_rows() << "\n";
  out << "objective";
  for (double c : lp.objective) out << ' ' << c;
  out << "\n";
  std::vector<std::vector<Triplet>> rows(lp.num_rows());
  for (const Triplet& t : lp.eq_matrix.entries) {
    if (t.row >= 0 && t.row < lp.num_rows()) rows[t.row].push_back(t);
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    out << "row " << i << ':';
    for (const Triplet& t : rows[i]) out << ' ' << t.value << "*x" << t.col;
    out << " = " << lp.eq_rhs[i] << "\n";
  }
  for (int j = 0; j < lp.num_vars(); ++j) {
    out << "bound x" << j << ' ';
    put_bound(out, lp.var_lower[j]);
    out << ' ';
    put_bound(out, lp.var_upper[j]);
    out << "\n";
  }
  out.flags(flags);
}

}  // namespace rasddp
