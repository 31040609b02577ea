#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <concepts>
#include <type_traits>

namespace povmgeo {

template <typename S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <typename S>
concept real_scalar = std::floating_point<S>;

template <typename S>
concept exact_scalar = std::same_as<S, Rational>;

// Scalars the diagonal-operator algebra is instantiated with.
template <typename S>
concept operator_scalar = real_scalar<S> || exact_scalar<S>;

template <operator_scalar S>
S scalar_from_rational(const Rational& q) {
  if constexpr (exact_scalar<S>)
    return q;
  else
    return q.template convert_to<S>();
}

}  // namespace povmgeo
