#pragma once

// E_N = (K[u]/(u^N))^2 as a 2N-dimensional K-space with nilpotent u.
// Column order: e1 u^0..u^{N-1}, then e2 u^0..u^{N-1}.

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "scalar.hpp"

namespace prc {

using Row = std::vector<Scalar>;

class UVec {
public:
    UVec() = default;
    UVec(const FieldCtx& K, int N) : ctx_(&K), n_(N), e_(2 * static_cast<std::size_t>(N), Scalar::zero(K)) {
        require(N >= 1, ErrorKind::invalid_input, "N must be positive");
    }

    /// c * u^deg * e_{coord+1}.
    static UVec monomial(const FieldCtx& K, int N, int coord, int deg) {
        return monomial(K, N, coord, deg, Scalar::one(K));
    }
    static UVec monomial(const FieldCtx& K, int N, int coord, int deg, const Scalar& c) {
        require(coord == 0 || coord == 1, ErrorKind::invalid_input, "coordinate must be 0 or 1");
        UVec v(K, N);
        if (deg >= 0 && deg < N) v.e_[coord * N + deg] = c;
        return v;
    }
    static UVec from_row(const FieldCtx& K, int N, Row r) {
        require(static_cast<int>(r.size()) == 2 * N, ErrorKind::invalid_input, "row length must be 2N");
        for (const auto& s : r)
            require(&s.field() == &K, ErrorKind::mixed_contexts, "row entry from another context");
        UVec v;
        v.ctx_ = &K;
        v.n_ = N;
        v.e_ = std::move(r);
        return v;
    }
    /// From coefficient lists a(u), b(u) of length N.
    static UVec from_ab(const FieldCtx& K, const Row& a, const Row& b) {
        require(a.size() == b.size() && !a.empty(), ErrorKind::invalid_input, "a and b must have equal length N");
        Row r = a;
        r.insert(r.end(), b.begin(), b.end());
        return from_row(K, static_cast<int>(a.size()), std::move(r));
    }

    bool is_valid() const { return ctx_ != nullptr; }
    const FieldCtx& field() const { return *ctx_; }
    int length() const { return n_; }
    int size() const { return 2 * n_; }
    const Row& entries() const { return e_; }
    const Scalar& operator[](int col) const { return e_[col]; }
    Scalar& operator[](int col) { return e_[col]; }
    const Scalar& a(int k) const { return e_[k]; }
    const Scalar& b(int k) const { return e_[n_ + k]; }
    Scalar& a(int k) { return e_[k]; }
    Scalar& b(int k) { return e_[n_ + k]; }

    bool is_zero() const {
        for (const auto& s : e_)
            if (!s.is_zero()) return false;
        return true;
    }
    /// True when the u^0 coefficients vanish, i.e. the vector lies in u E_N.
    bool in_u_multiples() const { return e_[0].is_zero() && e_[n_].is_zero(); }

    UVec times_u() const {
        UVec r(*ctx_, n_);
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k + 1 < n_; ++k) r.e_[c * n_ + k + 1] = e_[c * n_ + k];
        return r;
    }
    UVec times_u_power(int k) const {
        UVec r = *this;
        for (int i = 0; i < k; ++i) r = r.times_u();
        return r;
    }
    /// Shift toward lower u-degree; the inverse of u on u E_N with top coefficient 0.
    UVec shift_down() const {
        UVec r(*ctx_, n_);
        for (int c = 0; c < 2; ++c)
            for (int k = 1; k < n_; ++k) r.e_[c * n_ + k - 1] = e_[c * n_ + k];
        return r;
    }
    UVec frobenius() const {
        UVec r = *this;
        for (auto& s : r.e_) s = s.frobenius();
        return r;
    }
    UVec specialize_at_zero() const {
        require(ctx_->has_t(), ErrorKind::invalid_input, "specialization needs a t-extension");
        UVec r(ctx_->finite(), n_);
        for (int i = 0; i < size(); ++i) r.e_[i] = e_[i].specialize_at_zero();
        return r;
    }
    /// Constant embedding of a finite-field vector into a t-extension (or the identity).
    UVec base_change(const FieldCtx& L) const {
        if (&L == ctx_) return *this;
        require(&L.finite() == ctx_, ErrorKind::mixed_contexts, "base change needs the matching finite base");
        UVec r(L, n_);
        for (int i = 0; i < size(); ++i) r.e_[i] = Scalar::constant(L, e_[i].code());
        return r;
    }

    friend bool operator==(const UVec& x, const UVec& y) { return x.n_ == y.n_ && x.e_ == y.e_; }
    friend bool operator!=(const UVec& x, const UVec& y) { return !(x == y); }
    friend UVec operator+(const UVec& x, const UVec& y) {
        check(x, y);
        UVec r = x;
        for (int i = 0; i < x.size(); ++i) r.e_[i] = x.e_[i] + y.e_[i];
        return r;
    }
    friend UVec operator-(const UVec& x, const UVec& y) {
        check(x, y);
        UVec r = x;
        for (int i = 0; i < x.size(); ++i) r.e_[i] = x.e_[i] - y.e_[i];
        return r;
    }
    friend UVec operator*(const Scalar& c, const UVec& x) {
        UVec r = x;
        for (auto& s : r.e_) s = c * s;
        return r;
    }

    std::string to_string() const {
        std::string s;
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < n_; ++k) {
                const Scalar& x = e_[c * n_ + k];
                if (x.is_zero()) continue;
                if (!s.empty()) s += " + ";
                std::string xs = x.to_string();
                if (xs != "1") s += (xs.find(' ') != std::string::npos || xs.find('+') != std::string::npos) ? "(" + xs + ")" : xs;
                if (k > 0) s += "u" + (k > 1 ? "^" + std::to_string(k) : std::string());
                s += c == 0 ? "e1" : "e2";
            }
        return s.empty() ? "0" : s;
    }

private:
    static void check(const UVec& x, const UVec& y) {
        require(x.ctx_ == y.ctx_ && x.n_ == y.n_, ErrorKind::mixed_contexts, "vectors from different modules");
    }

    const FieldCtx* ctx_ = nullptr;
    int n_ = 0;
    Row e_;
};

namespace linalg {

inline bool pivot_ok(const Scalar& s) { return s.is_unit(); }

/// Reduced row echelon form in place; returns pivot columns.
/// Over K[t]/(t^N) only unit pivots are used; leftover non-zero rows raise NonUnitPivot.
inline std::vector<int> rref(std::vector<Row>& rows, const FieldCtx& K) {
    std::vector<int> pivots;
    if (rows.empty()) return pivots;
    const std::size_t L = rows[0].size();
    std::size_t r = 0;
    for (std::size_t col = 0; col < L && r < rows.size(); ++col) {
        std::size_t sel = rows.size();
        for (std::size_t i = r; i < rows.size(); ++i)
            if (pivot_ok(rows[i][col])) {
                sel = i;
                break;
            }
        if (sel == rows.size()) continue;
        std::swap(rows[sel], rows[r]);
        const Scalar inv = rows[r][col].inverse();
        if (!inv.is_one())
            for (auto& x : rows[r]) x = x * inv;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][col].is_zero()) continue;
            const Scalar c = rows[i][col];
            for (std::size_t j = 0; j < L; ++j)
                if (!rows[r][j].is_zero()) rows[i][j] = rows[i][j] - c * rows[r][j];
        }
        pivots.push_back(static_cast<int>(col));
        ++r;
    }
    for (std::size_t i = r; i < rows.size(); ++i)
        for (const auto& x : rows[i])
            if (!x.is_zero())
                fail(ErrorKind::non_unit_pivot, "span over " + K.describe() + " is not a free direct summand");
    rows.resize(r);
    return pivots;
}

/// Rank over a field context.
inline int rank(std::vector<Row> rows, const FieldCtx& K) {
    require(K.is_field(), ErrorKind::invalid_input, "rank needs a field; use certified_rank for series");
    return static_cast<int>(rref(rows, K).size());
}

/// Number of invariant factors of valuation < N over K[t]/(t^N), by minimal-valuation pivoting.
inline int certified_rank(std::vector<Row> rows, const FieldCtx& K) {
    require(K.kind() == FieldKind::truncated_t, ErrorKind::invalid_input, "certified rank needs a series context");
    int rank = 0;
    if (rows.empty()) return 0;
    const std::size_t L = rows[0].size();
    std::vector<bool> used_col(L, false);
    std::size_t r = 0;
    while (r < rows.size()) {
        int best = -1;
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = r; i < rows.size(); ++i)
            for (std::size_t j = 0; j < L; ++j) {
                if (used_col[j]) continue;
                const int v = rows[i][j].t_valuation();
                if (v >= 0 && (best < 0 || v < best)) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        if (best < 0) break;
        std::swap(rows[bi], rows[r]);
        const Scalar piv = rows[r][bj];
        // piv = t^best * unit; entries below have valuation >= best in this column.
        Poly unit_part(piv.num().begin() + best, piv.num().end());
        const FieldCtx& F = K.finite();
        const Scalar unit_inv = Scalar::series(K, unit_part).inverse();
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            const Scalar& x = rows[i][bj];
            if (x.is_zero()) continue;
            Poly shifted(x.num().begin() + best, x.num().end());
            const Scalar c = Scalar::series(K, shifted) * unit_inv;
            for (std::size_t j = 0; j < L; ++j) rows[i][j] = rows[i][j] - c * rows[r][j];
        }
        (void)F;
        used_col[bj] = true;
        ++rank;
        ++r;
    }
    return rank;
}

} // namespace linalg

/// A K-subspace of E_N held in canonical reduced row echelon form.
class Subspace {
public:
    Subspace() = default;
    Subspace(const FieldCtx& K, int N) : ctx_(&K), n_(N) {
        require(N >= 1, ErrorKind::invalid_input, "N must be positive");
    }

    static Subspace span(const FieldCtx& K, int N, const std::vector<UVec>& vs) {
        Subspace W(K, N);
        std::vector<Row> rows;
        rows.reserve(vs.size());
        for (const auto& v : vs) {
            require(&v.field() == &K && v.length() == N, ErrorKind::mixed_contexts,
                    "span of vectors from different modules");
            rows.push_back(v.entries());
        }
        W.pivots_ = linalg::rref(rows, K);
        W.basis_.reserve(rows.size());
        for (auto& r : rows) W.basis_.push_back(UVec::from_row(K, N, std::move(r)));
        return W;
    }
    static Subspace span(const std::vector<UVec>& vs) {
        require(!vs.empty(), ErrorKind::invalid_input, "span of an empty list needs a context");
        return span(vs[0].field(), vs[0].length(), vs);
    }
    static Subspace whole(const FieldCtx& K, int N) { return u_multiples(K, N, 0); }
    static Subspace zero(const FieldCtx& K, int N) { return Subspace(K, N); }
    /// E_N[u^k]: the kernel of u^k.
    static Subspace u_torsion(const FieldCtx& K, int N, int k) {
        std::vector<UVec> vs;
        for (int c = 0; c < 2; ++c)
            for (int d = std::max(0, N - k); d < N; ++d) vs.push_back(UVec::monomial(K, N, c, d));
        return span(K, N, vs);
    }
    /// u^k E_N.
    static Subspace u_multiples(const FieldCtx& K, int N, int k) {
        std::vector<UVec> vs;
        for (int c = 0; c < 2; ++c)
            for (int d = std::max(0, k); d < N; ++d) vs.push_back(UVec::monomial(K, N, c, d));
        return span(K, N, vs);
    }

    bool is_valid() const { return ctx_ != nullptr; }
    const FieldCtx& field() const { return *ctx_; }
    int length() const { return n_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<UVec>& basis() const { return basis_; }
    const std::vector<int>& pivots() const { return pivots_; }

    /// Remainder of v after clearing pivot columns with the basis.
    UVec reduce(const UVec& v) const {
        UVec r = v;
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            const Scalar c = r[pivots_[i]];
            if (!c.is_zero()) r = r - c * basis_[i];
        }
        return r;
    }
    bool contains(const UVec& v) const {
        require(&v.field() == ctx_ && v.length() == n_, ErrorKind::mixed_contexts, "vector from another module");
        return reduce(v).is_zero();
    }

    friend bool operator==(const Subspace& x, const Subspace& y) {
        return x.ctx_ == y.ctx_ && x.n_ == y.n_ && x.basis_ == y.basis_;
    }
    friend bool operator!=(const Subspace& x, const Subspace& y) { return !(x == y); }

    /// Byte string identifying the subspace; orders canonically over finite fields.
    std::string key() const {
        std::string k;
        k.push_back(static_cast<char>(dim()));
        for (const auto& b : basis_)
            for (const auto& s : b.entries()) {
                if (ctx_->is_finite())
                    k.push_back(static_cast<char>(s.code()));
                else
                    k += s.to_string() + "|";
            }
        return k;
    }

    std::string to_string() const {
        std::string s = "<";
        for (std::size_t i = 0; i < basis_.size(); ++i) s += (i ? ", " : "") + basis_[i].to_string();
        return s + ">";
    }

private:
    const FieldCtx* ctx_ = nullptr;
    int n_ = 0;
    std::vector<UVec> basis_;
    std::vector<int> pivots_;
};

inline void check_same_module(const Subspace& a, const Subspace& b) {
    require(&a.field() == &b.field() && a.length() == b.length(), ErrorKind::mixed_contexts,
            "subspaces of different modules");
}

inline Subspace span(const FieldCtx& K, int N, const std::vector<UVec>& vs) { return Subspace::span(K, N, vs); }

inline Subspace sum(const Subspace& a, const Subspace& b) {
    check_same_module(a, b);
    std::vector<UVec> vs = a.basis();
    vs.insert(vs.end(), b.basis().begin(), b.basis().end());
    return Subspace::span(a.field(), a.length(), vs);
}

inline Subspace sum(const Subspace& a, const UVec& v) {
    std::vector<UVec> vs = a.basis();
    vs.push_back(v);
    return Subspace::span(a.field(), a.length(), vs);
}

/// Intersection via the Zassenhaus sum-intersection algorithm.
inline Subspace intersect(const Subspace& a, const Subspace& b) {
    check_same_module(a, b);
    const FieldCtx& K = a.field();
    const int N = a.length();
    const int L = 2 * N;
    std::vector<Row> rows;
    for (const auto& v : a.basis()) {
        Row r = v.entries();
        r.insert(r.end(), v.entries().begin(), v.entries().end());
        rows.push_back(std::move(r));
    }
    for (const auto& v : b.basis()) {
        Row r = v.entries();
        r.insert(r.end(), L, Scalar::zero(K));
        rows.push_back(std::move(r));
    }
    linalg::rref(rows, K);
    std::vector<UVec> out;
    for (auto& r : rows) {
        bool left_zero = true;
        for (int j = 0; j < L; ++j)
            if (!r[j].is_zero()) {
                left_zero = false;
                break;
            }
        if (left_zero) out.push_back(UVec::from_row(K, N, Row(r.begin() + L, r.end())));
    }
    return Subspace::span(K, N, out);
}

/// small ⊆ big.
inline bool contains(const Subspace& big, const Subspace& small) {
    check_same_module(big, small);
    for (const auto& v : small.basis())
        if (!big.contains(v)) return false;
    return true;
}

inline bool equals(const Subspace& a, const Subspace& b) { return a == b; }

inline Subspace u_image(const Subspace& W) {
    std::vector<UVec> vs;
    for (const auto& v : W.basis()) vs.push_back(v.times_u());
    return Subspace::span(W.field(), W.length(), vs);
}

inline Subspace u_power_image(const Subspace& W, int k) {
    Subspace r = W;
    for (int i = 0; i < k; ++i) r = u_image(r);
    return r;
}

inline bool is_u_stable(const Subspace& W) { return contains(W, u_image(W)); }

/// {v : u v ∈ W} = shift_down(W ∩ u E) + E[u].
inline Subspace u_preimage(const Subspace& W) {
    const FieldCtx& K = W.field();
    const int N = W.length();
    bool inside = true;
    for (const auto& v : W.basis())
        if (!v.in_u_multiples()) {
            inside = false;
            break;
        }
    const Subspace Wu = inside ? W : intersect(W, Subspace::u_multiples(K, N, 1));
    std::vector<UVec> vs;
    for (const auto& v : Wu.basis()) vs.push_back(v.shift_down());
    for (int c = 0; c < 2; ++c) vs.push_back(UVec::monomial(K, N, c, N - 1));
    return Subspace::span(K, N, vs);
}

inline Subspace u_power_preimage(const Subspace& W, int k) {
    Subspace r = W;
    for (int i = 0; i < k; ++i) r = u_preimage(r);
    return r;
}

inline Subspace frobenius_twist(const Subspace& W) {
    std::vector<UVec> vs;
    for (const auto& v : W.basis()) vs.push_back(v.frobenius());
    return Subspace::span(W.field(), W.length(), vs);
}

/// Constant embedding into a t-extension.
inline Subspace base_change(const Subspace& W, const FieldCtx& L) {
    if (&L == &W.field()) return W;
    std::vector<UVec> vs;
    for (const auto& v : W.basis()) vs.push_back(v.base_change(L));
    return Subspace::span(L, W.length(), vs);
}

/// Coordinates of v in terms of independent generators over a field, if v lies in their span.
inline std::optional<std::vector<Scalar>> coordinates(const std::vector<UVec>& gens, const UVec& v) {
    const FieldCtx& K = v.field();
    require(K.is_field(), ErrorKind::invalid_input, "coordinates need a field");
    const int L = v.size();
    const std::size_t m = gens.size();
    std::vector<Row> rows;
    for (std::size_t i = 0; i < m; ++i) {
        Row r = gens[i].entries();
        for (std::size_t j = 0; j < m; ++j) r.push_back(j == i ? Scalar::one(K) : Scalar::zero(K));
        rows.push_back(std::move(r));
    }
    auto piv = linalg::rref(rows, K);
    Row w = v.entries();
    w.insert(w.end(), m, Scalar::zero(K));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int c = piv[r];
        if (c >= L) break;
        const Scalar x = w[c];
        if (x.is_zero()) continue;
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = w[j] - x * rows[r][j];
    }
    for (int j = 0; j < L; ++j)
        if (!w[j].is_zero()) return std::nullopt;
    std::vector<Scalar> out;
    for (std::size_t i = 0; i < m; ++i) out.push_back(-w[L + i]);
    return out;
}

/// The first canonical basis vector of big that is not in small.
inline std::optional<UVec> complement_vector(const Subspace& small, const Subspace& big) {
    for (const auto& v : big.basis())
        if (!small.contains(v)) return v;
    return std::nullopt;
}

inline std::ostream& operator<<(std::ostream& os, const UVec& v) { return os << v.to_string(); }
inline std::ostream& operator<<(std::ostream& os, const Subspace& W) { return os << W.to_string(); }

} // namespace prc
