#pragma once

#include <cmath>
#include <string>

#include <boost/multiprecision/gmp.hpp>

namespace netrel {

/// Exact rational used by the arbitrary-precision mode. Edge probabilities
/// enter this mode as the exact value of their double representation.
using Rational = boost::multiprecision::mpq_rational;

enum class Precision { Double, Exact };

/// Compensated (Kahan-Babuska) accumulator for sums of probabilities.
class KahanSum {
public:
    KahanSum() = default;
    explicit KahanSum(double v) : sum_(v) {}

    KahanSum& operator+=(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Running sum of disjoint-event probabilities; compensated for double,
/// plain for the exact rational type.
template <class Real>
class Accumulator {
public:
    Accumulator& operator+=(const Real& v) { sum_ += v; return *this; }
    Real value() const { return sum_; }
private:
    Real sum_ = 0;
};

template <>
class Accumulator<double> {
public:
    Accumulator& operator+=(double v) { sum_ += v; return *this; }
    double value() const { return sum_.value(); }
private:
    KahanSum sum_;
};

inline double to_double(double v) { return v; }
inline double to_double(const Rational& v) { return v.convert_to<double>(); }

template <class Real>
Real from_double(double v) { return Real(v); }

/// Decimal rendering with `digits` significant digits ("%.*g").
std::string format_number(double v, int digits = 12);

/// Exact value as "num/den" (or "num" when the denominator is 1).
inline std::string format_raw(const Rational& v) { return v.str(); }
inline std::string format_raw(double v) { return format_number(v, 17); }

}  // namespace netrel
