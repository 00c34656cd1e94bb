#include "sio/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace sio {

Rational exact(double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("cannot lift a non-finite double to a rational");
    }
    // mpq_set_d is exact for finite doubles.
    Rational q(value);
    q.canonicalize();
    return q;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    Rational q;
    mpz_set_si(q.get_num_mpz_t(), static_cast<long>(num));
    mpz_set_si(q.get_den_mpz_t(), static_cast<long>(den));
    q.canonicalize();
    return q;
}

Integer ipow(long base, unsigned exponent) {
    Integer z;
    mpz_ui_pow_ui(z.get_mpz_t(), static_cast<unsigned long>(base), exponent);
    return z;
}

Rational inverse_power(long base, unsigned exponent) {
    Rational q(Integer(1), ipow(base, exponent));
    q.canonicalize();
    return q;
}

Integer floor(const Rational& q) {
    Integer z;
    mpz_fdiv_q(z.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return z;
}

bool fits_int64(const Integer& z) {
    return mpz_fits_slong_p(z.get_mpz_t()) != 0;
}

std::string to_string(const Rational& q) {
    return q.get_str();
}

}  // namespace sio
