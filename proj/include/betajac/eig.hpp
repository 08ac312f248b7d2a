#pragma once

#include <vector>

#include "betajac/errors.hpp"
#include "betajac/model.hpp"

namespace betajac {

struct Spectrum {
  std::vector<double> values;  // ascending
  double residual_trace_error = 0.0;
  bool used_bisection = false;
};

struct EigOptions {
  double tol = 1e-14;             // bisection width, relative to ||A||
  int max_sweeps_per_value = 50;  // QL iteration cap
  bool bisection_fallback = true;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, int index) : NumericalError(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

// Implicit QL with Wilkinson shift. On hitting the iteration cap either
// falls back to Sturm bisection or throws NonConvergence naming the index.
Spectrum eigenvalues(const SymTridiagonal& a, const EigOptions& options = {});

// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
int sturm_count(const SymTridiagonal& a, double x);

// All eigenvalues by bisection on the Sturm count.
std::vector<double> bisection_eigenvalues(const SymTridiagonal& a, double tol = 1e-14);

// Infinity norm of the matrix.
double norm_inf(const SymTridiagonal& a);

}  // namespace betajac

namespace betajac {

// Eigenvalues of a dense symmetric matrix (row-major, n x n): Householder
// reduction to tridiagonal form followed by eigenvalues().
std::vector<double> dense_symmetric_eigenvalues(std::vector<std::vector<double>> a);

}  // namespace betajac
