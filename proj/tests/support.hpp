#pragma once

#include <doctest.h>

#include <functional>
#include <initializer_list>
#include <string>

#include "pnewton/error.hpp"
#include "pnewton/linop.hpp"
#include "pnewton/problems.hpp"

namespace support {

inline pnewton::Vector vec(std::initializer_list<double> v) {
  pnewton::Vector out(static_cast<pnewton::Index>(v.size()));
  pnewton::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline pnewton::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const pnewton::Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return pnewton::ErrorCode::IoError;
}

// Default desk instance: n = 200 for heat and shaw, 32 x 32 for blur.
inline pnewton::ProblemInstance desk(const std::string& name) {
  auto spec = pnewton::problems::default_spec(name);
  spec.n = 200;
  spec.side = 32;
  return pnewton::problems::build_problem(spec);
}

inline pnewton::ProblemInstance euclidean(const pnewton::Matrix& a, const pnewton::Vector& b,
                                          double tau = 1.001) {
  pnewton::ProblemInstance p;
  p.a = pnewton::linop::dense_operator(a);
  p.m_inv = pnewton::linop::diagonal_spd(pnewton::Vector::Ones(a.rows()));
  p.n_cov = pnewton::linop::diagonal_spd(pnewton::Vector::Ones(a.cols()));
  p.b = b;
  p.tau = tau;
  return p;
}

}  // namespace support
