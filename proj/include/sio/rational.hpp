#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace sio {

using Rational = mpq_class;
using Integer = mpz_class;

// The exact rational value of a finite binary double.
Rational exact(double value);

Rational make_rational(std::int64_t num, std::int64_t den = 1);

// lambda^exponent as an exact integer.
Integer ipow(long base, unsigned exponent);

// lambda^{-exponent}
Rational inverse_power(long base, unsigned exponent);

// Largest integer <= q.
Integer floor(const Rational& q);

bool fits_int64(const Integer& z);

std::string to_string(const Rational& q);

}  // namespace sio
