#pragma once

#include <stdexcept>
#include <string>

namespace tipgm {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct invalid_prime : error {
  explicit invalid_prime(const std::string& msg) : error(msg) {}
};

struct parse_error : error {
  explicit parse_error(const std::string& msg) : error(msg) {}
};

struct division_by_zero : error {
  explicit division_by_zero(const std::string& msg) : error(msg) {}
};

struct zero_input : error {
  explicit zero_input(const std::string& msg) : error(msg) {}
};

// An arithmetic result has no digits left at the working precision
// (e.g. subtraction cancelled every known digit).
struct precision_exhausted : error {
  explicit precision_exhausted(const std::string& msg) : error(msg) {}
};

// Input violates a documented domain (convergence region, k != 2, ...).
struct outside_domain : error {
  explicit outside_domain(const std::string& msg) : error(msg) {}
};

struct no_square_root : outside_domain {
  explicit no_square_root(const std::string& msg) : outside_domain(msg) {}
};

struct pole_at_input : error {
  explicit pole_at_input(const std::string& msg) : error(msg) {}
};

// The classifier's case analysis did not match the input; indicates a gap
// in the rule tree rather than a user error.
struct unmatched_case : error {
  explicit unmatched_case(const std::string& msg) : error(msg) {}
};

// Rule-based and direct classifications disagree; carries evidence text.
struct rule_direct_mismatch : error {
  explicit rule_direct_mismatch(const std::string& msg) : error(msg) {}
};

struct search_space_too_large : error {
  explicit search_space_too_large(const std::string& msg) : error(msg) {}
};

}  // namespace tipgm
