#pragma once

// Truncated multivariate Taylor polynomials (forward-mode jets).
//
// Taylor<N, O> holds the coefficients of a polynomial in N variables truncated
// at total degree O. Arithmetic is exact on the truncated polynomials, so
// evaluating a smooth formula on seeded variables yields its partial
// derivatives up to order O at the expansion point.

#include <array>
#include <cmath>
#include <cstddef>

namespace rdeform {

namespace detail {

constexpr int binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    int r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

constexpr int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

template <int N, int O>
struct MonomialTable {
    static constexpr int size = binomial(N + O, N);
    std::array<std::array<int, N>, size> exps{};
    std::array<int, size> degree{};

    constexpr MonomialTable()
    {
        // graded ordering: degree 0, then degree 1, ...
        int k = 0;
        for (int d = 0; d <= O; ++d) {
            std::array<int, N> e{};
            enumerate(d, 0, e, k);
        }
    }

    constexpr void enumerate(int remaining, int var, std::array<int, N>& e, int& k)
    {
        if (var == N - 1) {
            e[var] = remaining;
            exps[k] = e;
            int s = 0;
            for (int v = 0; v < N; ++v) s += e[v];
            degree[k] = s;
            ++k;
            return;
        }
        for (int p = remaining; p >= 0; --p) {
            e[var] = p;
            enumerate(remaining - p, var + 1, e, k);
        }
    }

    constexpr int index_of(const std::array<int, N>& e) const
    {
        for (int k = 0; k < size; ++k) {
            bool same = true;
            for (int v = 0; v < N; ++v) same = same && exps[k][v] == e[v];
            if (same) return k;
        }
        return -1;
    }

    // product table: prod[i][j] = index of monomial i*j, or -1 if truncated
    constexpr auto product_table() const
    {
        std::array<std::array<int, size>, size> t{};
        for (int i = 0; i < size; ++i)
            for (int j = 0; j < size; ++j) {
                std::array<int, N> e{};
                int d = 0;
                for (int v = 0; v < N; ++v) {
                    e[v] = exps[i][v] + exps[j][v];
                    d += e[v];
                }
                t[i][j] = d > O ? -1 : index_of(e);
            }
        return t;
    }
};

} // namespace detail

template <int N, int O>
class Taylor {
public:
    static constexpr int num_vars = N;
    static constexpr int order = O;
    static constexpr detail::MonomialTable<N, O> table{};
    static constexpr int size = detail::MonomialTable<N, O>::size;

    constexpr Taylor() = default;
    constexpr Taylor(double v) { c_[0] = v; } // NOLINT: implicit by design of scalar templates

    // Independent variable number `var` expanded about `value`.
    static Taylor variable(int var, double value)
    {
        Taylor t(value);
        std::array<int, N> e{};
        e[var] = 1;
        t.c_[table.index_of(e)] = 1.0;
        return t;
    }

    double value() const { return c_[0]; }

    // Sets the coefficient so that derivative(e) == d.
    void set_derivative(const std::array<int, N>& e, double d)
    {
        double f = 1.0;
        for (int v = 0; v < N; ++v) f *= detail::factorial(e[v]);
        c_[table.index_of(e)] = d / f;
    }
    double& coeff(int k) { return c_[k]; }
    double coeff(int k) const { return c_[k]; }

    // Partial derivative d^{|e|} / dx^e at the expansion point.
    double derivative(const std::array<int, N>& e) const
    {
        const int k = table.index_of(e);
        if (k < 0) return 0.0;
        double f = 1.0;
        for (int v = 0; v < N; ++v) f *= detail::factorial(e[v]);
        return c_[k] * f;
    }

    // Polynomial derivative along variable `var`, truncated to order O-1
    // (stored in the same type, top-degree terms are zero).
    Taylor differentiate(int var) const
    {
        Taylor r;
        for (int k = 0; k < size; ++k) {
            const auto& e = table.exps[k];
            if (e[var] == 0) continue;
            std::array<int, N> f = e;
            f[var] -= 1;
            r.c_[table.index_of(f)] += c_[k] * e[var];
        }
        return r;
    }

    Taylor& operator+=(const Taylor& o)
    {
        for (int k = 0; k < size; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Taylor& operator-=(const Taylor& o)
    {
        for (int k = 0; k < size; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Taylor& operator*=(double s)
    {
        for (auto& x : c_) x *= s;
        return *this;
    }
    Taylor& operator*=(const Taylor& o)
    {
        *this = *this * o;
        return *this;
    }
    Taylor& operator/=(const Taylor& o)
    {
        *this = *this / o;
        return *this;
    }

    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
    friend Taylor operator-(Taylor a)
    {
        for (auto& x : a.c_) x = -x;
        return a;
    }
    friend Taylor operator*(Taylor a, double s) { return a *= s; }
    friend Taylor operator*(double s, Taylor a) { return a *= s; }
    friend Taylor operator+(Taylor a, double s)
    {
        a.c_[0] += s;
        return a;
    }
    friend Taylor operator+(double s, Taylor a) { return a + s; }
    friend Taylor operator-(Taylor a, double s)
    {
        a.c_[0] -= s;
        return a;
    }
    friend Taylor operator-(double s, Taylor a) { return -a + s; }
    friend Taylor operator/(Taylor a, double s) { return a *= 1.0 / s; }

    friend Taylor operator*(const Taylor& a, const Taylor& b)
    {
        static constexpr auto prod = table.product_table();
        Taylor r;
        for (int i = 0; i < size; ++i) {
            if (a.c_[i] == 0.0) continue;
            for (int j = 0; j < size; ++j) {
                const int k = prod[i][j];
                if (k >= 0) r.c_[k] += a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

    // Composition with a univariate function given its derivatives
    // f(x0), f'(x0), ..., f^(O)(x0) at x0 = value().
    Taylor compose(const std::array<double, O + 1>& derivs) const
    {
        Taylor delta = *this;
        delta.c_[0] = 0.0;
        Taylor r(derivs[0]);
        Taylor power(1.0);
        double fact = 1.0;
        for (int k = 1; k <= O; ++k) {
            power = power * delta;
            fact *= k;
            r += power * (derivs[k] / fact);
        }
        return r;
    }

    friend Taylor operator/(const Taylor& a, const Taylor& b) { return a * reciprocal(b); }
    friend Taylor operator/(double s, const Taylor& b) { return reciprocal(b) * s; }

    friend Taylor reciprocal(const Taylor& b)
    {
        std::array<double, O + 1> d{};
        const double x = b.value();
        double p = 1.0 / x;
        double sign = 1.0;
        double fact = 1.0;
        for (int k = 0; k <= O; ++k) {
            if (k > 0) fact *= k;
            d[k] = sign * fact * p;
            p /= x;
            sign = -sign;
        }
        return b.compose(d);
    }

    friend Taylor sqrt(const Taylor& a)
    {
        std::array<double, O + 1> d{};
        const double x = a.value();
        double coef = 1.0;
        double expo = 0.5;
        for (int k = 0; k <= O; ++k) {
            d[k] = coef * std::pow(x, expo);
            coef *= expo;
            expo -= 1.0;
        }
        return a.compose(d);
    }

    friend Taylor sin(const Taylor& a)
    {
        std::array<double, O + 1> d{};
        const double s = std::sin(a.value()), c = std::cos(a.value());
        const double cyc[4] = {s, c, -s, -c};
        for (int k = 0; k <= O; ++k) d[k] = cyc[k % 4];
        return a.compose(d);
    }

    friend Taylor cos(const Taylor& a)
    {
        std::array<double, O + 1> d{};
        const double s = std::sin(a.value()), c = std::cos(a.value());
        const double cyc[4] = {c, -s, -c, s};
        for (int k = 0; k <= O; ++k) d[k] = cyc[k % 4];
        return a.compose(d);
    }

private:
    std::array<double, size> c_{};
};

// Scalar helpers so that geometry code can be templated on double or Taylor.
inline double value_of(double x) { return x; }
template <int N, int O>
double value_of(const Taylor<N, O>& x)
{
    return x.value();
}

} // namespace rdeform
