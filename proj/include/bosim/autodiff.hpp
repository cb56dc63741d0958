#pragma once

#include <array>
#include <cmath>

namespace bosim {

/// Forward-mode dual number carrying N partial derivatives.
///
/// Residual kernels are written once as templates over the scalar type and
/// instantiated with double (residual only) or Eval<N> (residual plus exact
/// Jacobian entries).
template <int N>
struct Eval {
    double v = 0.0;
    std::array<double, N> d{};

    Eval() = default;
    Eval(double value) : v(value) {} // NOLINT: implicit constants are intended

    static Eval variable(double value, int slot)
    {
        Eval e(value);
        e.d[static_cast<std::size_t>(slot)] = 1.0;
        return e;
    }

    Eval& operator+=(const Eval& o)
    {
        v += o.v;
        for (int i = 0; i < N; ++i)
            d[i] += o.d[i];
        return *this;
    }
    Eval& operator-=(const Eval& o)
    {
        v -= o.v;
        for (int i = 0; i < N; ++i)
            d[i] -= o.d[i];
        return *this;
    }
    Eval& operator*=(const Eval& o)
    {
        for (int i = 0; i < N; ++i)
            d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Eval& operator/=(const Eval& o)
    {
        const double inv = 1.0 / o.v;
        for (int i = 0; i < N; ++i)
            d[i] = (d[i] - v * inv * o.d[i]) * inv;
        v *= inv;
        return *this;
    }
    Eval& operator*=(double s)
    {
        v *= s;
        for (auto& x : d)
            x *= s;
        return *this;
    }

    Eval operator-() const
    {
        Eval r(*this);
        r.v = -r.v;
        for (auto& x : r.d)
            x = -x;
        return r;
    }
};

template <int N> Eval<N> operator+(Eval<N> a, const Eval<N>& b) { return a += b; }
template <int N> Eval<N> operator-(Eval<N> a, const Eval<N>& b) { return a -= b; }
template <int N> Eval<N> operator*(Eval<N> a, const Eval<N>& b) { return a *= b; }
template <int N> Eval<N> operator/(Eval<N> a, const Eval<N>& b) { return a /= b; }

template <int N> Eval<N> operator+(Eval<N> a, double b) { a.v += b; return a; }
template <int N> Eval<N> operator+(double b, Eval<N> a) { a.v += b; return a; }
template <int N> Eval<N> operator-(Eval<N> a, double b) { a.v -= b; return a; }
template <int N> Eval<N> operator-(double b, const Eval<N>& a) { return -a + b; }
template <int N> Eval<N> operator*(Eval<N> a, double b) { return a *= b; }
template <int N> Eval<N> operator*(double b, Eval<N> a) { return a *= b; }
template <int N> Eval<N> operator/(Eval<N> a, double b) { return a *= (1.0 / b); }
template <int N> Eval<N> operator/(double b, const Eval<N>& a) { return Eval<N>(b) / a; }

template <int N>
Eval<N> exp(const Eval<N>& a)
{
    Eval<N> r;
    r.v = std::exp(a.v);
    for (int i = 0; i < N; ++i)
        r.d[i] = r.v * a.d[i];
    return r;
}

template <int N>
Eval<N> sqrt(const Eval<N>& a)
{
    Eval<N> r;
    r.v = std::sqrt(a.v);
    const double s = 0.5 / r.v;
    for (int i = 0; i < N; ++i)
        r.d[i] = s * a.d[i];
    return r;
}

inline double value(double x) { return x; }
template <int N> double value(const Eval<N>& x) { return x.v; }

/// Larger of a and a constant; the derivative follows the selected branch.
inline double max_with(double a, double b) { return a > b ? a : b; }
template <int N> Eval<N> max_with(const Eval<N>& a, double b) { return a.v > b ? a : Eval<N>(b); }

/// Re-indexes the derivatives of a small Eval into slots [offset, offset+M) of a larger one.
template <int N, int M>
Eval<N> widen(const Eval<M>& a, int offset)
{
    Eval<N> r(a.v);
    for (int i = 0; i < M; ++i)
        r.d[static_cast<std::size_t>(offset + i)] = a.d[static_cast<std::size_t>(i)];
    return r;
}

} // namespace bosim
