#pragma once

// Exact scalars: F_p, F_{p^f}, K(t) and K[t]/(t^N), all with Frobenius.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace prc {

enum class FieldKind { prime, extension, rational_t, truncated_t };

/// Polynomial over a finite field as element codes, lowest degree first.
using Poly = std::vector<std::uint32_t>;

class FieldCtx;

namespace detail {

inline bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Coefficient vectors over Z/p, lowest degree first.
using IntPoly = std::vector<int>;

inline void trim(IntPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline IntPoly int_poly_mod(IntPoly a, const IntPoly& m, int p) {
    trim(a);
    const int dm = static_cast<int>(m.size()) - 1;
    int lead_inv = 1;
    while ((lead_inv * m.back()) % p != 1) ++lead_inv;
    while (static_cast<int>(a.size()) - 1 >= dm && !a.empty()) {
        const int shift = static_cast<int>(a.size()) - 1 - dm;
        const int c = (a.back() * lead_inv) % p;
        for (int i = 0; i <= dm; ++i) a[shift + i] = ((a[shift + i] - c * m[i]) % p + p) % p;
        trim(a);
    }
    return a;
}

// Exhaustive check: no monic factor of degree 1..deg/2.
inline bool is_irreducible(const IntPoly& m, int p) {
    const int f = static_cast<int>(m.size()) - 1;
    for (int d = 1; 2 * d <= f; ++d) {
        long count = 1;
        for (int i = 0; i < d; ++i) count *= p;
        for (long code = 0; code < count; ++code) {
            IntPoly g(d + 1, 0);
            long c = code;
            for (int i = 0; i < d; ++i) {
                g[i] = static_cast<int>(c % p);
                c /= p;
            }
            g[d] = 1;
            if (int_poly_mod(m, g, p).empty()) return false;
        }
    }
    return true;
}

} // namespace detail

/// Interned description of a coefficient domain. Compare by address.
class FieldCtx {
public:
    static constexpr int max_table_order = 256;

    FieldKind kind() const { return kind_; }
    int p() const { return p_; }
    int f() const { return f_; }
    int q() const { return q_; }
    const std::vector<int>& modulus() const { return modulus_; }
    const FieldCtx& finite() const { return base_ ? *base_ : *this; }
    bool is_finite() const { return kind_ == FieldKind::prime || kind_ == FieldKind::extension; }
    bool is_field() const { return kind_ != FieldKind::truncated_t; }
    bool has_t() const { return !is_finite(); }
    int precision() const { return prec_; }

    std::string describe() const {
        switch (kind_) {
        case FieldKind::prime: return "F_" + std::to_string(p_);
        case FieldKind::extension: {
            std::string s = "F_" + std::to_string(p_) + "[x]/(";
            bool first = true;
            for (int i = f_; i >= 0; --i) {
                if (modulus_[i] == 0) continue;
                if (!first) s += "+";
                first = false;
                if (i == 0 || modulus_[i] != 1) s += std::to_string(modulus_[i]);
                if (i >= 1) s += "x";
                if (i >= 2) s += "^" + std::to_string(i);
            }
            return s + ")";
        }
        case FieldKind::rational_t: return base_->describe() + "(t)";
        case FieldKind::truncated_t: return base_->describe() + "[t]/(t^" + std::to_string(prec_) + ")";
        }
        return "?";
    }

    // Finite-layer arithmetic on element codes.
    std::uint32_t add(std::uint32_t a, std::uint32_t b) const { return fin().add_[a * q_ + b]; }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const { return fin().mul_[a * q_ + b]; }
    std::uint32_t neg(std::uint32_t a) const { return fin().neg_[a]; }
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return add(a, neg(b)); }
    std::uint32_t inv(std::uint32_t a) const {
        require(a != 0, ErrorKind::invalid_input, "division by zero in " + describe());
        return fin().inv_[a];
    }
    std::uint32_t frob(std::uint32_t a) const { return fin().frob_[a]; }
    std::uint32_t from_int(long n) const {
        long r = n % p_;
        if (r < 0) r += p_;
        return static_cast<std::uint32_t>(r);
    }

    static const FieldCtx& prime(int p) {
        require(detail::is_prime(p), ErrorKind::invalid_input, std::to_string(p) + " is not prime");
        require(p <= max_table_order, ErrorKind::bound_exceeded, "characteristic too large");
        return intern("p" + std::to_string(p), [&] {
            auto c = std::unique_ptr<FieldCtx>(new FieldCtx());
            c->kind_ = FieldKind::prime;
            c->p_ = p;
            c->f_ = 1;
            c->q_ = p;
            c->modulus_ = {0, 1};
            c->build_tables();
            return c;
        });
    }

    /// F_p[x]/(modulus); modulus is monic, lowest degree first, irreducible.
    static const FieldCtx& extension(int p, std::vector<int> modulus) {
        require(detail::is_prime(p), ErrorKind::invalid_input, std::to_string(p) + " is not prime");
        for (int& c : modulus) c = ((c % p) + p) % p;
        detail::trim(modulus);
        require(modulus.size() >= 2 && modulus.back() == 1, ErrorKind::invalid_input,
                "modulus must be monic of positive degree");
        const int f = static_cast<int>(modulus.size()) - 1;
        if (f == 1) return prime(p);
        long q = 1;
        for (int i = 0; i < f; ++i) q *= p;
        require(q <= max_table_order, ErrorKind::bound_exceeded, "field order exceeds table bound");
        require(detail::is_irreducible(modulus, p), ErrorKind::invalid_input, "modulus is reducible");
        std::string key = "e" + std::to_string(p) + ":";
        for (int c : modulus) key += std::to_string(c) + ",";
        return intern(key, [&] {
            auto c = std::unique_ptr<FieldCtx>(new FieldCtx());
            c->kind_ = FieldKind::extension;
            c->p_ = p;
            c->f_ = f;
            c->q_ = static_cast<int>(q);
            c->modulus_ = modulus;
            c->build_tables();
            return c;
        });
    }

    /// F_{p^f} with the first irreducible monic modulus in code order.
    static const FieldCtx& galois(int p, int f) {
        require(f >= 1, ErrorKind::invalid_input, "degree must be positive");
        if (f == 1) return prime(p);
        long count = 1;
        for (int i = 0; i < f; ++i) count *= p;
        require(count <= max_table_order, ErrorKind::bound_exceeded, "field order exceeds table bound");
        for (long code = 0; code < count; ++code) {
            std::vector<int> m(f + 1, 0);
            long c = code;
            for (int i = 0; i < f; ++i) {
                m[i] = static_cast<int>(c % p);
                c /= p;
            }
            m[f] = 1;
            if (detail::is_irreducible(m, p)) return extension(p, m);
        }
        fail(ErrorKind::internal, "no irreducible polynomial found");
    }

    static const FieldCtx& of_order(int q) {
        require(q >= 2, ErrorKind::invalid_input, "field order must be at least 2");
        for (int p = 2; p <= q; ++p) {
            if (q % p != 0) continue;
            int f = 0, r = q;
            while (r % p == 0) {
                r /= p;
                ++f;
            }
            require(r == 1 && detail::is_prime(p), ErrorKind::invalid_input,
                    std::to_string(q) + " is not a prime power");
            return galois(p, f);
        }
        fail(ErrorKind::invalid_input, std::to_string(q) + " is not a prime power");
    }

    static const FieldCtx& rational_t(const FieldCtx& base) {
        require(base.is_finite(), ErrorKind::invalid_input, "rational functions need a finite base");
        return intern("r|" + base.key_, [&] {
            auto c = std::unique_ptr<FieldCtx>(new FieldCtx());
            c->copy_finite(base);
            c->kind_ = FieldKind::rational_t;
            return c;
        });
    }

    static const FieldCtx& truncated_t(const FieldCtx& base, int prec = 16) {
        require(base.is_finite(), ErrorKind::invalid_input, "truncated series need a finite base");
        require(prec >= 1, ErrorKind::invalid_input, "precision must be positive");
        return intern("s" + std::to_string(prec) + "|" + base.key_, [&] {
            auto c = std::unique_ptr<FieldCtx>(new FieldCtx());
            c->copy_finite(base);
            c->kind_ = FieldKind::truncated_t;
            c->prec_ = prec;
            return c;
        });
    }

    FieldCtx(const FieldCtx&) = delete;
    FieldCtx& operator=(const FieldCtx&) = delete;

private:
    FieldCtx() = default;

    const FieldCtx& fin() const { return base_ ? *base_ : *this; }

    void copy_finite(const FieldCtx& base) {
        base_ = &base;
        p_ = base.p_;
        f_ = base.f_;
        q_ = base.q_;
        modulus_ = base.modulus_;
    }

    template <class Make>
    static const FieldCtx& intern(const std::string& key, Make make) {
        static std::mutex mu;
        static std::map<std::string, std::unique_ptr<FieldCtx>> registry;
        std::lock_guard<std::mutex> lock(mu);
        auto it = registry.find(key);
        if (it != registry.end()) return *it->second;
        auto ctx = make();
        ctx->key_ = key;
        auto& slot = registry[key];
        slot = std::move(ctx);
        return *slot;
    }

    std::vector<int> digits(std::uint32_t code) const {
        std::vector<int> d(f_, 0);
        for (int i = 0; i < f_; ++i) {
            d[i] = static_cast<int>(code % p_);
            code /= p_;
        }
        return d;
    }
    std::uint32_t undigits(const std::vector<int>& d) const {
        std::uint32_t code = 0;
        for (int i = f_ - 1; i >= 0; --i) code = code * p_ + static_cast<std::uint32_t>(d[i]);
        return code;
    }

    void build_tables() {
        const int q = q_;
        add_.assign(static_cast<std::size_t>(q) * q, 0);
        mul_.assign(static_cast<std::size_t>(q) * q, 0);
        neg_.assign(q, 0);
        inv_.assign(q, 0);
        frob_.assign(q, 0);
        std::vector<std::vector<int>> dig(q);
        for (int a = 0; a < q; ++a) dig[a] = digits(a);
        for (int a = 0; a < q; ++a) {
            std::vector<int> n(f_);
            for (int i = 0; i < f_; ++i) n[i] = (p_ - dig[a][i]) % p_;
            neg_[a] = static_cast<std::uint16_t>(undigits(n));
            for (int b = 0; b < q; ++b) {
                std::vector<int> s(f_);
                for (int i = 0; i < f_; ++i) s[i] = (dig[a][i] + dig[b][i]) % p_;
                add_[a * q + b] = static_cast<std::uint16_t>(undigits(s));
                detail::IntPoly prod(2 * f_, 0);
                for (int i = 0; i < f_; ++i)
                    for (int j = 0; j < f_; ++j) prod[i + j] = (prod[i + j] + dig[a][i] * dig[b][j]) % p_;
                prod = detail::int_poly_mod(prod, modulus_, p_);
                prod.resize(f_, 0);
                mul_[a * q + b] = static_cast<std::uint16_t>(undigits(prod));
            }
        }
        for (int a = 1; a < q; ++a)
            for (int b = 1; b < q; ++b)
                if (mul_[a * q + b] == 1) inv_[a] = static_cast<std::uint16_t>(b);
        for (int a = 0; a < q; ++a) {
            std::uint32_t r = 1;
            for (int i = 0; i < p_; ++i) r = mul_[r * q + a];
            frob_[a] = static_cast<std::uint16_t>(r);
        }
    }

    FieldKind kind_ = FieldKind::prime;
    int p_ = 0, f_ = 0, q_ = 0, prec_ = 0;
    std::vector<int> modulus_;
    const FieldCtx* base_ = nullptr;
    std::string key_;
    std::vector<std::uint16_t> add_, mul_, neg_, inv_, frob_;
};

namespace poly {

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}
inline int degree(const Poly& a) { return static_cast<int>(a.size()) - 1; }

inline Poly add(const FieldCtx& F, const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = F.add(i < a.size() ? a[i] : 0, i < b.size() ? b[i] : 0);
    trim(r);
    return r;
}
inline Poly neg(const FieldCtx& F, Poly a) {
    for (auto& c : a) c = F.neg(c);
    return a;
}
inline Poly sub(const FieldCtx& F, const Poly& a, const Poly& b) { return add(F, a, neg(F, b)); }
inline Poly scale(const FieldCtx& F, Poly a, std::uint32_t c) {
    for (auto& x : a) x = F.mul(x, c);
    trim(a);
    return a;
}
inline Poly mul(const FieldCtx& F, const Poly& a, const Poly& b, std::size_t cap = SIZE_MAX) {
    if (a.empty() || b.empty()) return {};
    Poly r(std::min(a.size() + b.size() - 1, cap), 0);
    for (std::size_t i = 0; i < a.size() && i < r.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size() && i + j < r.size(); ++j)
            r[i + j] = F.add(r[i + j], F.mul(a[i], b[j]));
    }
    trim(r);
    return r;
}
inline void divmod(const FieldCtx& F, const Poly& a, const Poly& b, Poly& quo, Poly& rem) {
    require(!b.empty(), ErrorKind::invalid_input, "polynomial division by zero");
    rem = a;
    trim(rem);
    quo.assign(rem.size() >= b.size() ? rem.size() - b.size() + 1 : 0, 0);
    const std::uint32_t li = F.inv(b.back());
    while (!rem.empty() && rem.size() >= b.size()) {
        const std::size_t shift = rem.size() - b.size();
        const std::uint32_t c = F.mul(rem.back(), li);
        quo[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i) rem[shift + i] = F.sub(rem[shift + i], F.mul(c, b[i]));
        trim(rem);
    }
    trim(quo);
}
inline Poly monic(const FieldCtx& F, const Poly& a) {
    if (a.empty()) return a;
    return scale(F, a, F.inv(a.back()));
}
inline Poly gcd(const FieldCtx& F, Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly q, r;
        divmod(F, a, b, q, r);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(F, a);
}
inline std::uint32_t eval(const FieldCtx& F, const Poly& a, std::uint32_t x) {
    std::uint32_t r = 0;
    for (std::size_t i = a.size(); i-- > 0;) r = F.add(F.mul(r, x), a[i]);
    return r;
}
inline int valuation(const Poly& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) return static_cast<int>(i);
    return -1;
}
/// Coefficientwise Frobenius composed with t -> t^p.
inline Poly frobenius(const FieldCtx& F, const Poly& a, std::size_t cap = SIZE_MAX) {
    Poly r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t j = i * static_cast<std::size_t>(F.p());
        if (j >= cap) break;
        if (a[i] == 0) continue;
        if (r.size() <= j) r.resize(j + 1, 0);
        r[j] = F.frob(a[i]);
    }
    trim(r);
    return r;
}

} // namespace poly

/// An element of one of the four coefficient domains.
class Scalar {
public:
    Scalar() = default;

    static Scalar zero(const FieldCtx& K) {
        Scalar s;
        s.ctx_ = &K;
        if (K.kind() == FieldKind::rational_t) s.den_ = {1};
        return s;
    }
    static Scalar one(const FieldCtx& K) { return from_int(K, 1); }
    static Scalar from_int(const FieldCtx& K, long n) {
        return constant(K, K.finite().from_int(n));
    }
    /// Embeds a finite-layer element code as a constant.
    static Scalar constant(const FieldCtx& K, std::uint32_t code) {
        require(code < static_cast<std::uint32_t>(K.q()), ErrorKind::invalid_input, "element code out of range");
        Scalar s = zero(K);
        if (K.is_finite()) {
            s.code_ = code;
        } else if (code != 0) {
            s.num_ = {code};
        }
        return s;
    }
    /// Embeds a finite-field scalar as a constant of K.
    static Scalar constant(const FieldCtx& K, const Scalar& c) {
        require(c.is_valid() && c.field().is_finite() && &c.field() == &K.finite(), ErrorKind::mixed_contexts,
                "constant from a different base field");
        return constant(K, c.code());
    }
    /// Extension element from F_p coefficients (lowest degree first).
    static Scalar from_coeffs(const FieldCtx& K, const std::vector<long>& coeffs) {
        require(K.is_finite(), ErrorKind::invalid_input, "coefficient vectors need a finite context");
        require(static_cast<int>(coeffs.size()) <= K.f(), ErrorKind::invalid_input, "too many coefficients");
        std::uint32_t code = 0;
        for (std::size_t i = coeffs.size(); i-- > 0;)
            code = code * static_cast<std::uint32_t>(K.p()) + K.from_int(coeffs[i]);
        return constant(K, code);
    }
    static Scalar t(const FieldCtx& K) {
        require(K.has_t(), ErrorKind::invalid_input, "t lives only in t-extensions");
        Scalar s = zero(K);
        if (K.kind() == FieldKind::truncated_t && K.precision() <= 1) return s;
        s.num_ = {0, 1};
        return s;
    }
    static Scalar rational(const FieldCtx& K, Poly num, Poly den) {
        require(K.kind() == FieldKind::rational_t, ErrorKind::invalid_input, "not a rational function context");
        Scalar s;
        s.ctx_ = &K;
        s.num_ = std::move(num);
        s.den_ = std::move(den);
        s.normalize();
        return s;
    }
    static Scalar series(const FieldCtx& K, Poly coeffs) {
        require(K.kind() == FieldKind::truncated_t, ErrorKind::invalid_input, "not a truncated series context");
        Scalar s;
        s.ctx_ = &K;
        s.num_ = std::move(coeffs);
        s.normalize();
        return s;
    }

    bool is_valid() const { return ctx_ != nullptr; }
    const FieldCtx& field() const { return *ctx_; }
    std::uint32_t code() const { return code_; }
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    bool is_zero() const { return ctx_->is_finite() ? code_ == 0 : num_.empty(); }
    bool is_one() const {
        if (ctx_->is_finite()) return code_ == 1;
        if (ctx_->kind() == FieldKind::rational_t) return num_ == Poly{1} && den_ == Poly{1};
        return num_ == Poly{1};
    }
    bool is_unit() const {
        if (ctx_->kind() == FieldKind::truncated_t) return !num_.empty() && num_[0] != 0;
        return !is_zero();
    }
    /// t-adic valuation; -1 for zero in truncated contexts.
    int t_valuation() const {
        if (ctx_->is_finite()) return is_zero() ? -1 : 0;
        if (is_zero()) return -1;
        const int v = poly::valuation(num_);
        return ctx_->kind() == FieldKind::rational_t ? v - poly::valuation(den_) : v;
    }
    bool has_pole_at_zero() const {
        return ctx_->kind() == FieldKind::rational_t && !den_.empty() && den_[0] == 0;
    }
    /// Degree of numerator and denominator, for display and budgets.
    int t_height() const {
        if (ctx_->is_finite()) return 0;
        return std::max(poly::degree(num_), poly::degree(den_));
    }

    friend bool operator==(const Scalar& a, const Scalar& b) {
        return a.ctx_ == b.ctx_ && a.code_ == b.code_ && a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    Scalar operator-() const {
        Scalar r = *this;
        const FieldCtx& F = ctx_->finite();
        if (ctx_->is_finite())
            r.code_ = F.neg(code_);
        else
            r.num_ = poly::neg(F, num_);
        return r;
    }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
        check_same(a, b);
        const FieldCtx& K = *a.ctx_;
        const FieldCtx& F = K.finite();
        Scalar r;
        r.ctx_ = a.ctx_;
        switch (K.kind()) {
        case FieldKind::prime:
        case FieldKind::extension: r.code_ = F.add(a.code_, b.code_); break;
        case FieldKind::truncated_t: r.num_ = poly::add(F, a.num_, b.num_); break;
        case FieldKind::rational_t:
            if (a.den_ == b.den_) {
                r.num_ = poly::add(F, a.num_, b.num_);
                r.den_ = a.den_;
            } else {
                r.num_ = poly::add(F, poly::mul(F, a.num_, b.den_), poly::mul(F, b.num_, a.den_));
                r.den_ = poly::mul(F, a.den_, b.den_);
            }
            r.normalize();
            break;
        }
        return r;
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        check_same(a, b);
        const FieldCtx& K = *a.ctx_;
        const FieldCtx& F = K.finite();
        Scalar r;
        r.ctx_ = a.ctx_;
        switch (K.kind()) {
        case FieldKind::prime:
        case FieldKind::extension: r.code_ = F.mul(a.code_, b.code_); break;
        case FieldKind::truncated_t:
            r.num_ = poly::mul(F, a.num_, b.num_, static_cast<std::size_t>(K.precision()));
            break;
        case FieldKind::rational_t:
            r.num_ = poly::mul(F, a.num_, b.num_);
            r.den_ = poly::mul(F, a.den_, b.den_);
            r.normalize();
            break;
        }
        return r;
    }

    Scalar inverse() const {
        const FieldCtx& K = *ctx_;
        const FieldCtx& F = K.finite();
        require(is_unit(), ErrorKind::invalid_input, "inverse of a non-unit " + to_string());
        Scalar r;
        r.ctx_ = ctx_;
        switch (K.kind()) {
        case FieldKind::prime:
        case FieldKind::extension: r.code_ = F.inv(code_); break;
        case FieldKind::rational_t:
            r.num_ = den_;
            r.den_ = num_;
            r.normalize();
            break;
        case FieldKind::truncated_t: {
            // Newton-free inverse: solve coefficient by coefficient.
            const int N = K.precision();
            const std::uint32_t i0 = F.inv(num_[0]);
            Poly inv(N, 0);
            inv[0] = i0;
            for (int n = 1; n < N; ++n) {
                std::uint32_t acc = 0;
                for (int k = 1; k <= n && k < static_cast<int>(num_.size()); ++k)
                    acc = F.add(acc, F.mul(num_[k], inv[n - k]));
                inv[n] = F.neg(F.mul(acc, i0));
            }
            r.num_ = std::move(inv);
            r.normalize();
            break;
        }
        }
        return r;
    }
    friend Scalar operator/(const Scalar& a, const Scalar& b) {
        check_same(a, b);
        return a * b.inverse();
    }

    Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
    Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
    Scalar& operator*=(const Scalar& b) { return *this = *this * b; }

    Scalar pow(unsigned n) const {
        Scalar base = *this, r = one(*ctx_);
        while (n) {
            if (n & 1U) r = r * base;
            base = base * base;
            n >>= 1U;
        }
        return r;
    }

    Scalar frobenius() const {
        const FieldCtx& K = *ctx_;
        const FieldCtx& F = K.finite();
        Scalar r;
        r.ctx_ = ctx_;
        switch (K.kind()) {
        case FieldKind::prime:
        case FieldKind::extension: r.code_ = F.frob(code_); break;
        case FieldKind::rational_t:
            r.num_ = poly::frobenius(F, num_);
            r.den_ = poly::frobenius(F, den_);
            r.normalize();
            break;
        case FieldKind::truncated_t:
            r.num_ = poly::frobenius(F, num_, static_cast<std::size_t>(K.precision()));
            break;
        }
        return r;
    }

    /// Value at t = 0, as an element of the finite base.
    Scalar specialize_at_zero() const {
        const FieldCtx& K = *ctx_;
        require(K.has_t(), ErrorKind::invalid_input, "specialization needs a t-extension");
        const FieldCtx& F = K.finite();
        const std::uint32_t n0 = num_.empty() ? 0 : num_[0];
        if (K.kind() == FieldKind::truncated_t) return constant(F, n0);
        require(!has_pole_at_zero(), ErrorKind::pole_at_zero, to_string() + " has a pole at t = 0");
        return constant(F, F.mul(n0, F.inv(den_[0])));
    }

    /// Value at t = a for a rational function and a in the finite base.
    Scalar evaluate(const Scalar& a) const {
        const FieldCtx& K = *ctx_;
        require(K.kind() == FieldKind::rational_t, ErrorKind::invalid_input, "evaluation needs K(t)");
        const FieldCtx& F = K.finite();
        require(&a.field() == &F, ErrorKind::mixed_contexts, "evaluation point from another field");
        const std::uint32_t d = poly::eval(F, den_, a.code());
        require(d != 0, ErrorKind::pole_at_zero, to_string() + " has a pole at the evaluation point");
        return constant(F, F.mul(poly::eval(F, num_, a.code()), F.inv(d)));
    }

    /// Reduction K[t]-polynomial -> K[t]/(t^N); rejects genuine fractions with a pole at 0.
    Scalar to_series(const FieldCtx& S) const {
        require(S.kind() == FieldKind::truncated_t && &S.finite() == &ctx_->finite(), ErrorKind::mixed_contexts,
                "series context mismatch");
        if (ctx_->is_finite()) return constant(S, code_);
        if (ctx_->kind() == FieldKind::truncated_t) {
            Poly c = num_;
            if (static_cast<int>(c.size()) > S.precision()) c.resize(S.precision());
            return series(S, c);
        }
        require(!has_pole_at_zero(), ErrorKind::pole_at_zero, "cannot expand " + to_string() + " at t = 0");
        return series(S, num_) * series(S, den_).inverse();
    }

    std::string to_string() const {
        if (!ctx_) return "<invalid>";
        const FieldCtx& K = *ctx_;
        if (K.is_finite()) return element_string(K, code_);
        auto pstr = [&](const Poly& a) {
            if (a.empty()) return std::string("0");
            std::string s;
            for (std::size_t i = a.size(); i-- > 0;) {
                if (a[i] == 0) continue;
                if (!s.empty()) s += " + ";
                std::string c = element_string(K.finite(), a[i]);
                const bool compound = c.find('+') != std::string::npos;
                if (i == 0)
                    s += c;
                else {
                    if (c != "1") s += compound ? "(" + c + ")" : c;
                    s += "t";
                    if (i > 1) s += "^" + std::to_string(i);
                }
            }
            return s;
        };
        if (K.kind() == FieldKind::truncated_t) return pstr(num_) + " + O(t^" + std::to_string(K.precision()) + ")";
        if (den_ == Poly{1}) return pstr(num_);
        return "(" + pstr(num_) + ")/(" + pstr(den_) + ")";
    }

    static std::string element_string(const FieldCtx& F, std::uint32_t code) {
        if (F.kind() == FieldKind::prime) return std::to_string(code);
        std::string s;
        for (int i = F.f() - 1; i >= 0; --i) {
            std::uint32_t c = code;
            for (int k = 0; k < i; ++k) c /= static_cast<std::uint32_t>(F.p());
            c %= static_cast<std::uint32_t>(F.p());
            if (c == 0) continue;
            if (!s.empty()) s += "+";
            if (i == 0 || c != 1) s += std::to_string(c);
            if (i >= 1) s += "x";
            if (i >= 2) s += "^" + std::to_string(i);
        }
        return s.empty() ? "0" : s;
    }

private:
    static void check_same(const Scalar& a, const Scalar& b) {
        require(a.ctx_ && a.ctx_ == b.ctx_, ErrorKind::mixed_contexts, "scalars from different contexts");
    }

    void normalize() {
        const FieldCtx& K = *ctx_;
        const FieldCtx& F = K.finite();
        poly::trim(num_);
        if (K.kind() == FieldKind::truncated_t) {
            if (static_cast<int>(num_.size()) > K.precision()) num_.resize(K.precision());
            poly::trim(num_);
            return;
        }
        poly::trim(den_);
        require(!den_.empty(), ErrorKind::invalid_input, "zero denominator");
        if (num_.empty()) {
            den_ = {1};
            return;
        }
        if (den_.size() > 1) {
            Poly g = poly::gcd(F, num_, den_);
            if (g.size() > 1) {
                Poly q, r;
                poly::divmod(F, num_, g, q, r);
                num_ = q;
                poly::divmod(F, den_, g, q, r);
                den_ = q;
            }
        }
        const std::uint32_t lead = den_.back();
        if (lead != 1) {
            const std::uint32_t li = F.inv(lead);
            num_ = poly::scale(F, num_, li);
            den_ = poly::scale(F, den_, li);
        }
    }

    const FieldCtx* ctx_ = nullptr;
    std::uint32_t code_ = 0;
    Poly num_, den_;
};

inline Scalar frobenius(const Scalar& x) { return x.frobenius(); }
inline Scalar specialize_at_zero(const Scalar& x) { return x.specialize_at_zero(); }

/// All q elements of a finite context in code order (0 first).
inline std::vector<Scalar> field_elements(const FieldCtx& K, int bound = 128) {
    require(K.is_finite(), ErrorKind::invalid_input, "field_elements needs a finite context");
    require(K.q() <= bound, ErrorKind::bound_exceeded,
            "field of order " + std::to_string(K.q()) + " exceeds enumeration bound " + std::to_string(bound));
    std::vector<Scalar> out;
    out.reserve(K.q());
    for (int c = 0; c < K.q(); ++c) out.push_back(Scalar::constant(K, static_cast<std::uint32_t>(c)));
    return out;
}

/// A generator of the multiplicative group of a finite context.
inline Scalar primitive_element(const FieldCtx& K) {
    require(K.is_finite(), ErrorKind::invalid_input, "primitive element needs a finite context");
    for (int c = 1; c < K.q(); ++c) {
        const Scalar a = Scalar::constant(K, static_cast<std::uint32_t>(c));
        Scalar x = a;
        int order = 1;
        while (!x.is_one()) {
            x = x * a;
            ++order;
        }
        if (order == K.q() - 1) return a;
    }
    fail(ErrorKind::internal, "no primitive element");
}

inline std::ostream& operator<<(std::ostream& os, const Scalar& x) { return os << x.to_string(); }

} // namespace prc
