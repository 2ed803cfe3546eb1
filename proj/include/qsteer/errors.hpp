#pragma once

#include <stdexcept>
#include <string>

namespace qsteer {

// Base class for all qsteer errors.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-domain input (CLI exit code 2).
class invalid_input : public error {
public:
  using error::error;
};

// Bob's reduced state is singular, the canonical-form filter does not exist.
class singular_marginal : public invalid_input {
public:
  using invalid_input::invalid_input;
};

// Kraus extraction requested for a channel whose Choi matrix is not PSD.
class not_completely_positive : public invalid_input {
public:
  using invalid_input::invalid_input;
};

// A closed-form branch expression is not real at the requested point.
// Carries the offending parameters so reports can be machine-readable.
class branch_domain_error : public error {
public:
  branch_domain_error(double a, double alpha, double c, const std::string& what)
      : error(what), a(a), alpha(alpha), c(c) {}
  double a;
  double alpha;
  double c;
};

// Ray-bisection predicate flipped more than once on the coarse scan.
class non_monotone_predicate : public error {
public:
  using error::error;
};

// An integrand evaluated to NaN or infinity at a quadrature node.
class nonfinite_integrand : public error {
public:
  using error::error;
};

// Convex hull requested for fewer than 3 non-collinear points.
class degenerate_hull : public invalid_input {
public:
  degenerate_hull(bool collinear, const std::string& what)
      : invalid_input(what), collinear(collinear) {}
  bool collinear;
};

}  // namespace qsteer
