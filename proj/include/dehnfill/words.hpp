#pragma once

#include "dehnfill/gl2.hpp"

#include <vector>

namespace dehnfill {

// Words in Z/2 * Z/3 = <a> * <b>. Letters: a, b, b^-1 (b^2). A reduced word
// contains no aa, bb, b^-1 b^-1, b b^-1, b^-1 b; equivalently we combine
// b-exponents mod 3 and cancel double a's.
struct FreeWord {
    struct Letter {
        bool is_a;
        int bexp;  // 1 or 2 when !is_a
        bool operator==(const Letter& o) const { return is_a == o.is_a && (is_a || bexp == o.bexp); }
    };
    std::vector<Letter> letters;

    static FreeWord from_string(const std::string& s) {
        // 'a' -> a, 'b' -> b, 'B' -> b^-1
        FreeWord w;
        for (char ch : s) {
            if (ch == 'a')
                w.letters.push_back({true, 0});
            else if (ch == 'b')
                w.letters.push_back({false, 1});
            else if (ch == 'B')
                w.letters.push_back({false, 2});
            else if (ch == ' ')
                continue;
            else
                throw std::invalid_argument("FreeWord: bad letter");
        }
        return w;
    }
    std::string str() const {
        std::string s;
        for (auto& l : letters) s += l.is_a ? 'a' : (l.bexp == 1 ? 'b' : 'B');
        return s;
    }
    size_t length() const { return letters.size(); }
    bool operator==(const FreeWord& o) const { return letters == o.letters; }

    FreeWord concat(const FreeWord& o) const {
        FreeWord w = *this;
        w.letters.insert(w.letters.end(), o.letters.begin(), o.letters.end());
        return w;
    }
    FreeWord inverse() const {
        FreeWord w;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it)
            w.letters.push_back(it->is_a ? Letter{true, 0} : Letter{false, 3 - it->bexp});
        return w;
    }
    FreeWord power(long long n) const {
        FreeWord base = n >= 0 ? *this : inverse();
        long long m = n >= 0 ? n : -n;
        FreeWord w;
        for (long long i = 0; i < m; ++i) w = w.concat(base);
        return w;
    }
};

inline FreeWord reduce(const FreeWord& w) {
    // stack invariant: the output prefix stays reduced
    FreeWord out;
    for (auto& l : w.letters) {
        if (!out.letters.empty() && out.letters.back().is_a && l.is_a) {
            out.letters.pop_back();
            continue;
        }
        if (!out.letters.empty() && !out.letters.back().is_a && !l.is_a) {
            int e = (out.letters.back().bexp + l.bexp) % 3;
            out.letters.pop_back();
            if (e != 0) out.letters.push_back({false, e});
            continue;
        }
        out.letters.push_back(l);
    }
    return out;
}

// Minimal-length representative of the conjugacy class: reduced, and the
// first/last letters do not combine cyclically.
inline FreeWord cyclically_reduce(const FreeWord& input) {
    FreeWord w = reduce(input);
    while (w.letters.size() >= 2) {
        auto& f = w.letters.front();
        auto& l = w.letters.back();
        if (f.is_a && l.is_a) {
            w.letters.erase(w.letters.begin());
            w.letters.pop_back();
            w = reduce(w);
        } else if (!f.is_a && !l.is_a) {
            int e = (f.bexp + l.bexp) % 3;
            w.letters.pop_back();
            w.letters.erase(w.letters.begin());
            if (e != 0) w.letters.push_back({false, e});
            w = reduce(w);
        } else {
            break;
        }
    }
    return w;
}

inline bool is_cyclically_reduced(const FreeWord& w) {
    FreeWord r = reduce(w);
    if (!(r == w)) return false;
    if (w.letters.size() <= 1) return true;
    bool fa = w.letters.front().is_a, la = w.letters.back().is_a;
    return fa != la;
}

// Conjugacy test for cyclically reduced words: equality up to rotation.
inline bool cyclic_words_conjugate(const FreeWord& w1, const FreeWord& w2) {
    if (w1.letters.size() != w2.letters.size()) return false;
    size_t n = w1.letters.size();
    if (n == 0) return true;
    for (size_t r = 0; r < n; ++r) {
        bool eq = true;
        for (size_t i = 0; i < n && eq; ++i) eq = w1.letters[(i + r) % n] == w2.letters[i];
        if (eq) return true;
    }
    return false;
}

// phi: a -> (0 -1; 1 0), b -> (1 -1; 1 0); lands in PSL2 (sign ambiguity).
inline GL2Matrix phi_letter(const FreeWord::Letter& l) {
    if (l.is_a) return GL2Matrix(0, -1, 1, 0);
    if (l.bexp == 1) return GL2Matrix(1, -1, 1, 0);
    return GL2Matrix(0, -1, 1, -1);  // b^2
}

inline GL2Matrix phi_evaluate(const FreeWord& w) {
    GL2Matrix m = GL2Matrix::identity();
    for (auto& l : w.letters) m = m * phi_letter(l);
    return m;
}

inline bool equal_up_to_sign(const GL2Matrix& x, const GL2Matrix& y) { return x == y || x == -y; }

// Continued-fraction style decomposition: a reduced word whose phi-image is
// +-m. Requires det(m) = +1.
inline FreeWord psl2_decompose(const GL2Matrix& m) {
    if (m.det() != 1) throw std::invalid_argument("psl2_decompose: det must be +1");
    // T = phi(ba) up to sign, S = phi(a). Peel factors T^q S from the left.
    static const FreeWord ba = FreeWord::from_string("ba");
    static const FreeWord aw = FreeWord::from_string("a");
    GL2Matrix cur = m;
    FreeWord out;
    const GL2Matrix S(0, -1, 1, 0);
    while (cur.c != 0) {
        // choose q minimizing |a - q c|
        Int q = div_floor(cur.a, cur.c);
        Int r = cur.a - q * cur.c;
        if (2 * r > abs_int(cur.c)) q += cur.c > 0 ? 1 : -1;
        r = cur.a - q * cur.c;
        if (abs_int(r) == abs_int(cur.c)) q += cur.c > 0 ? 1 : -1;  // tie: make |r| < |c|
        // m = T^q S (S^-1 T^-q m); S^-1 = -S in SL2
        out = out.concat(ba.power(static_cast<long long>(q)));
        out = out.concat(aw);
        GL2Matrix tinv = GL2Matrix::twist(-q);
        cur = (S.inverse() * tinv) * cur;
    }
    // upper triangular (e n; 0 e): equals +- T^(n*e)
    Int e = cur.a;
    Int n = cur.b * e;
    out = out.concat(ba.power(static_cast<long long>(n)));
    FreeWord red = reduce(out);
    // exactness check
    if (!equal_up_to_sign(phi_evaluate(red), m)) throw std::logic_error("psl2_decompose: verification failed");
    return red;
}

}  // namespace dehnfill
