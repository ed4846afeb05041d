// Solves lambda^4 x = x (n = 1) and a small planted problem, printing the
// eigenvalues and backward errors.

#include <cstdio>

#include "quarteig/quarteig.hpp"

int main() {
  using namespace quarteig;
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  const Matrix zero = Matrix::Zero(1, 1);
  const QuarticPencil q(one, zero, zero, zero, -one);
  const SolveResult r = solve(q);
  for (const auto& p : r.solution.pairs) {
    const Complex l = p.eig.lambda();
    std::printf("%-8s % .16f % .16fi  eta=%.2e\n", to_string(p.eig.cls), l.real(), l.imag(), p.diag.eta_right);
  }

  const probio::ProblemBundle b = probio::gen_planted(5, 2, 1, 7);
  const SolveResult s = solve(b.pencil);
  std::printf("%s: case %s, %td zeros and %td infinities deflated, max eta %.2e\n", b.name.c_str(),
              s.deflation.case_id.c_str(), s.deflation.zeros_deflated, s.deflation.infs_deflated,
              s.summary.eta_right.max);
  return 0;
}
